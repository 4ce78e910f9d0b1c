use thiserror::Error;

/// Errors surfaced by fallible operations.
///
/// Structural misuse (mixing algebra tags, mismatched vector lengths) is a
/// programming error and panics instead; every variant here is reachable
/// from well-formed data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point at infinity ({0}); use another chart")]
    PointAtInfinity(&'static str),

    #[error("projective point is not in the closed model domain (form value {0:.3e})")]
    OutsideModel(f64),

    #[error("hyperbolic distance requires interior points (form value {0:.3e})")]
    NotInterior(f64),

    #[error("singular inversion input: {0}")]
    SingularInversion(&'static str),

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("cell enumeration would produce {0} boxes, above the cap {1}")]
    EnumerationCap(u128, u64),

    #[error("zero dilation factor")]
    ZeroDilation,

    #[error("degenerate box: half-width {0:.3e}")]
    DegenerateBox(f64),

    #[error("ball index {0} out of range ({1} balls)")]
    BallIndex(usize, usize),

    #[error("reduction did not converge within {0} steps")]
    NotConverged(usize),

    #[error("orbit left the numerical range at iterate {0}; reduce the iteration count")]
    NumericalRange(u32),

    #[error("cell projection [{0:.6}, {1:.6}] is not inside a single gap component")]
    CellGapMismatch(f64, f64),

    #[error("no qualifying generator pair: {0}")]
    NoWitnessPair(String),

    #[error("stretch map and group were built from different carpets: {0}")]
    CarpetMismatch(&'static str),

    #[error("unknown suite name {0:?}")]
    UnknownSuite(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid plane spec {0:?}: {1}")]
    InvalidPlane(String, String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
