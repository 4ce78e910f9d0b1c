//! Configuration: a single TOML file drives construction, sweeps,
//! verification and rendering. Outputs embed a stable fingerprint of the
//! configuration so reruns are attributable.

use crate::algebra::Algebra;
use crate::carnot::chart_dim;
use crate::carpet::CarpetSpec;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// "R", "C" or "H".
    pub algebra: Algebra,
    /// Rank of the hyperbolic space; the boundary group is `F^{n-1} x Im F`.
    pub n: usize,
    /// Explicit subdivision counts, one per level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_seq: Option<Vec<u32>>,
    /// Geometric rule `k_j = k_base^j`; mutually exclusive with `k_seq`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_base: Option<u32>,
    /// Carpet truncation depth.
    pub depth: usize,
    /// Recursive ball-packing depth inside each removed cell.
    #[serde(default)]
    pub pack_depth: usize,
    /// Stretch parameters for sweeps and deformation checks.
    #[serde(default = "default_t_values")]
    pub t_values: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Ball indices withheld from the inversion generators.
    #[serde(default)]
    pub excluded_balls: Vec<usize>,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
    #[serde(default)]
    pub samples: Samples,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_t_values() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_seed() -> u64 {
    7
}

fn default_cap() -> u64 {
    1_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Samples {
    /// Monte Carlo sample count for measures and coverage.
    pub mc: u64,
    /// Per-property sample count inside verification suites.
    pub suite: u64,
    /// Boundary evaluations for the sampled ball inradius.
    pub inradius: usize,
    /// Power-iteration count for translation lengths.
    pub witness_iterations: u32,
}

impl Default for Samples {
    fn default() -> Self {
        Samples {
            mc: 100_000,
            suite: 10_000,
            inradius: 10_000,
            witness_iterations: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub isometry: f64,
    pub inversion: f64,
    pub cross_check: f64,
    pub equivariance: f64,
    pub stretch: f64,
    pub delta1: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            isometry: 1e-12,
            inversion: 1e-10,
            cross_check: 1e-9,
            equivariance: 1e-9,
            stretch: 1e-14,
            delta1: 1e-12,
        }
    }
}

impl Default for Config {
    fn default() -> Self {
        Config {
            algebra: Algebra::R,
            n: 3,
            k_seq: None,
            k_base: Some(3),
            depth: 3,
            pack_depth: 0,
            t_values: default_t_values(),
            seed: default_seed(),
            excluded_balls: Vec::new(),
            enumeration_cap: default_cap(),
            samples: Samples::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Config> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n = {} must be at least 2", self.n)));
        }
        match (&self.k_seq, &self.k_base) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "k_seq and k_base are mutually exclusive; set only one".into(),
                ))
            }
            (None, None) => {
                return Err(Error::InvalidConfig("one of k_seq or k_base is required".into()))
            }
            _ => {}
        }
        if self.t_values.is_empty() {
            return Err(Error::InvalidConfig("t_values must not be empty".into()));
        }
        for &t in &self.t_values {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "t_values entry {t} must be a positive finite number"
                )));
            }
        }
        // materializes every k_seq validation error
        self.carpet_spec().map(|_| ())
    }

    /// The per-level subdivision counts, resolving the geometric rule.
    pub fn resolved_k_seq(&self) -> Result<Vec<u32>> {
        if let Some(seq) = &self.k_seq {
            return Ok(seq.clone());
        }
        let base = self.k_base.expect("validated");
        if base < 3 || base % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "k_base = {base} must be an odd integer >= 3"
            )));
        }
        let mut seq = Vec::with_capacity(self.depth);
        let mut k: u64 = 1;
        for _ in 0..self.depth {
            k *= base as u64;
            if k > u32::MAX as u64 {
                return Err(Error::InvalidConfig(format!(
                    "k_base = {base} overflows at depth {}",
                    self.depth
                )));
            }
            seq.push(k as u32);
        }
        Ok(seq)
    }

    /// Chart dimension of the boundary group for this algebra and rank.
    pub fn dim(&self) -> usize {
        chart_dim(self.algebra, self.n)
    }

    pub fn carpet_spec(&self) -> Result<CarpetSpec> {
        CarpetSpec::new(self.dim(), self.resolved_k_seq()?, self.depth)
    }

    /// Stable fingerprint (FNV-1a over the canonical serialization).
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.resolved_k_seq().unwrap(), vec![3, 9, 27]);
        assert_eq!(cfg.dim(), 2);
    }

    #[test]
    fn toml_roundtrip() {
        let text = r#"
            algebra = "R"
            n = 3
            k_seq = [3, 9]
            depth = 2
            pack_depth = 1
            t_values = [1.0, 2.0]
            seed = 42
        "#;
        let cfg = Config::from_toml_str(text).unwrap();
        assert_eq!(cfg.resolved_k_seq().unwrap(), vec![3, 9]);
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn errors_name_the_offending_key() {
        let text = r#"
            algebra = "R"
            n = 3
            k_seq = [3, 4]
            depth = 2
        "#;
        let err = Config::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("k_seq"), "message: {err}");

        let text = r#"
            algebra = "C"
            n = 2
            depth = 2
        "#;
        let err = Config::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("k_seq") || err.contains("k_base"), "message: {err}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = Config::default();
        let mut b = Config::default();
        assert_eq!(a.hash(), b.hash());
        b.seed = 8;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn heisenberg_dimensions() {
        let cfg = Config {
            algebra: Algebra::C,
            n: 2,
            k_seq: Some(vec![3]),
            k_base: None,
            depth: 1,
            ..Config::default()
        };
        cfg.validate().unwrap();
        assert_eq!(cfg.dim(), 3);
    }
}
