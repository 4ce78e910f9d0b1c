//! Depth-truncated fat Sierpinski carpet in the coordinate cube
//! `Q = [-1/2, 1/2]^dim`.
//!
//! Level `j` splits every surviving cell into `k_j^dim` congruent subcubes
//! and casts out the open interior of the central one (all `k_j` odd). With
//! a growing sequence, e.g. `k_j = 3^j`, the residual set keeps positive
//! Lebesgue measure `prod (1 - k_j^{-dim})`; the constant sequence
//! `k_j = 3` reproduces the classical measure-zero carpet.

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Construction parameters of a truncated carpet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarpetSpec {
    /// Real dimension of the ambient cube.
    pub dim: usize,
    /// Per-level subdivision counts, one per level, all odd and at least 3,
    /// either constant or strictly increasing.
    pub k_seq: Vec<u32>,
    /// Truncation depth `D >= 1`.
    pub depth: usize,
}

impl CarpetSpec {
    pub fn new(dim: usize, k_seq: Vec<u32>, depth: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dim must be at least 1".into()));
        }
        if depth == 0 {
            return Err(Error::InvalidConfig("depth must be at least 1".into()));
        }
        if k_seq.len() < depth {
            return Err(Error::InvalidConfig(format!(
                "k_seq has {} entries but depth is {depth}",
                k_seq.len()
            )));
        }
        for (i, &k) in k_seq.iter().enumerate() {
            if k < 3 || k % 2 == 0 {
                return Err(Error::InvalidConfig(format!(
                    "k_seq[{i}] = {k}: entries must be odd integers >= 3"
                )));
            }
        }
        let constant = k_seq.windows(2).all(|w| w[0] == w[1]);
        let increasing = k_seq.windows(2).all(|w| w[0] < w[1]);
        if !constant && !increasing {
            return Err(Error::InvalidConfig(
                "k_seq must be constant or strictly increasing".into(),
            ));
        }
        Ok(CarpetSpec { dim, k_seq, depth })
    }

    /// `m(K_D) = prod_{j<=D} (1 - k_j^{-dim})`.
    pub fn measure_exact(&self) -> f64 {
        self.k_seq[..self.depth]
            .iter()
            .map(|&k| 1.0 - (k as f64).powi(-(self.dim as i32)))
            .product()
    }

    /// Closed-form measure of the first-axis gap projection,
    /// `1 - prod (1 - 1/k_j)`.
    pub fn delta1_measure_exact(&self) -> f64 {
        1.0 - self.k_seq[..self.depth]
            .iter()
            .map(|&k| 1.0 - 1.0 / k as f64)
            .product::<f64>()
    }

    /// Number of removed cells up to the truncation depth.
    pub fn removed_cell_count(&self) -> u128 {
        let mut total: u128 = 0;
        let mut survivors: u128 = 1;
        for &k in &self.k_seq[..self.depth] {
            total += survivors;
            let cells = (k as u128).pow(self.dim as u32);
            survivors *= cells - 1;
        }
        total
    }

    /// Membership in the depth-`D` carpet by per-level index arithmetic.
    ///
    /// Points on removed-cell faces belong to the carpet: only open
    /// interiors are cast out.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        assert_eq!(x.len(), self.dim, "coordinate count");
        for &c in x {
            if !(-0.5..=0.5).contains(&c) {
                return Err(Error::OutOfRange {
                    what: "carpet coordinate",
                    value: c,
                    lo: -0.5,
                    hi: 0.5,
                });
            }
        }
        let mut lo = vec![-0.5; self.dim];
        let mut side = 1.0;
        for &k in &self.k_seq[..self.depth] {
            let kf = k as f64;
            let central = (k - 1) / 2;
            let child = side / kf;
            let mut all_central = true;
            let mut idx = Vec::with_capacity(self.dim);
            for (i, &c) in x.iter().enumerate() {
                let j = (((c - lo[i]) / child).floor() as i64).clamp(0, k as i64 - 1) as u32;
                all_central &= j == central;
                idx.push(j);
            }
            if all_central {
                // cast out only the open interior; face points stay in the
                // carpet and lie on grid faces of every deeper level too
                let strictly_inside = x.iter().enumerate().all(|(i, &c)| {
                    let cell_lo = lo[i] + central as f64 * child;
                    cell_lo < c && c < cell_lo + child
                });
                return Ok(!strictly_inside);
            }
            for i in 0..self.dim {
                lo[i] += idx[i] as f64 * child;
            }
            side = child;
        }
        Ok(true)
    }

    /// Monte Carlo estimate of the carpet measure with its standard error.
    ///
    /// Sampling is split into fixed chunks with per-chunk generator streams,
    /// so the result does not depend on the number of worker threads.
    pub fn measure_mc(&self, samples: u64, seed: u64) -> (f64, f64) {
        assert!(samples >= 1, "need at least one sample");
        const CHUNK: u64 = 4096;
        let chunks = samples.div_ceil(CHUNK);
        let hits: u64 = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(chunk);
                let count = CHUNK.min(samples - chunk * CHUNK);
                let mut hits = 0u64;
                let mut x = vec![0.0; self.dim];
                for _ in 0..count {
                    for c in x.iter_mut() {
                        *c = rng.gen_range(-0.5..0.5);
                    }
                    if self.contains(&x).expect("sample inside the cube") {
                        hits += 1;
                    }
                }
                hits
            })
            .sum();
        let p = hits as f64 / samples as f64;
        let stderr = (p * (1.0 - p) / samples as f64).sqrt();
        (p, stderr)
    }

    /// Box-counting dimension estimate from surviving-cell counts at the
    /// grid scales of the first `depth` levels (least-squares slope of
    /// `ln N` against `ln 1/s`).
    pub fn box_count_dimension(&self) -> f64 {
        let mut pts = Vec::with_capacity(self.depth);
        let mut survivors: f64 = 1.0;
        let mut inv_scale: f64 = 1.0;
        for &k in &self.k_seq[..self.depth] {
            survivors *= (k as f64).powi(self.dim as i32) - 1.0;
            inv_scale *= k as f64;
            pts.push((inv_scale.ln(), survivors.ln()));
        }
        if pts.len() == 1 {
            return pts[0].1 / pts[0].0;
        }
        let n = pts.len() as f64;
        let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / n, sy / n);
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        num / den
    }
}

/// Address of a subcube: one multi-index per level. For a removed cell the
/// last multi-index is the central one of its level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub address: Vec<Vec<u32>>,
}

impl CellId {
    pub fn level(&self) -> usize {
        self.address.len()
    }
}

/// Removed cell with its box geometry in the chart cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovedCell {
    pub id: CellId,
    /// Box center in chart coordinates.
    pub center: Vec<f64>,
    /// Half-width, the same along every axis.
    pub half_width: f64,
}

impl RemovedCell {
    /// First-axis projection `(center_1 - hw, center_1 + hw)`.
    pub fn x1_interval(&self) -> Interval {
        Interval::new(self.center[0] - self.half_width, self.center[0] + self.half_width)
    }

    /// Open-box membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.center
            .iter()
            .zip(x)
            .all(|(&c, &xi)| (xi - c).abs() < self.half_width)
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.center.len() as i32)
    }
}

/// A built carpet: the spec plus the enumerated removed cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Carpet {
    spec: CarpetSpec,
    cells: Vec<RemovedCell>,
}

impl Carpet {
    /// Enumerates all removed cells up to the truncation depth.
    ///
    /// Fails if the enumeration would exceed `cap` boxes.
    pub fn build(spec: CarpetSpec, cap: u64) -> Result<Self> {
        let count = spec.removed_cell_count();
        if count > cap as u128 {
            return Err(Error::EnumerationCap(count, cap));
        }
        let mut cells = Vec::with_capacity(count as usize);
        let center = vec![0.0; spec.dim];
        enumerate(&spec, 0, &center, 0.5, &mut Vec::new(), &mut cells);
        Ok(Carpet { spec, cells })
    }

    pub fn spec(&self) -> &CarpetSpec {
        &self.spec
    }

    /// All removed cells, enumerated level by level in index order.
    pub fn cells(&self) -> &[RemovedCell] {
        &self.cells
    }

    /// Union of the first-axis projections of all removed cells.
    pub fn project_delta1(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.cells.iter().map(RemovedCell::x1_interval).collect())
    }

    /// Total volume of the removed cells, `1 - m(K_D)`.
    pub fn removed_volume(&self) -> f64 {
        1.0 - self.spec.measure_exact()
    }
}

fn enumerate(
    spec: &CarpetSpec,
    level: usize,
    center: &[f64],
    half_width: f64,
    address: &mut Vec<Vec<u32>>,
    out: &mut Vec<RemovedCell>,
) {
    let k = spec.k_seq[level];
    let central = (k - 1) / 2;
    let child_hw = half_width / k as f64;

    address.push(vec![central; spec.dim]);
    out.push(RemovedCell {
        id: CellId {
            address: address.clone(),
        },
        center: center.to_vec(),
        half_width: child_hw,
    });
    address.pop();

    if level + 1 >= spec.depth {
        return;
    }
    // iterate the non-central children in lexicographic index order
    let mut idx = vec![0u32; spec.dim];
    loop {
        if idx.iter().any(|&i| i != central) {
            let child_center: Vec<f64> = center
                .iter()
                .zip(&idx)
                .map(|(&c, &i)| c + (i as f64 - central as f64) * 2.0 * child_hw)
                .collect();
            address.push(idx.clone());
            enumerate(spec, level + 1, &child_center, child_hw, address, out);
            address.pop();
        }
        // increment multi-index
        let mut axis = spec.dim;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < k {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Versioned serialization record for a built carpet.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CarpetArtifact {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub k_seq: Vec<u32>,
    pub depth: usize,
    pub cell_count: usize,
    pub measure_exact: f64,
    pub cells: Vec<RemovedCell>,
}

impl Carpet {
    pub fn to_artifact(&self) -> CarpetArtifact {
        CarpetArtifact {
            format: "nilcarpet/carpet".into(),
            version: 1,
            dim: self.spec.dim,
            k_seq: self.spec.k_seq.clone(),
            depth: self.spec.depth,
            cell_count: self.cells.len(),
            measure_exact: self.spec.measure_exact(),
            cells: self.cells.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dim: usize, k: &[u32], depth: usize) -> CarpetSpec {
        CarpetSpec::new(dim, k.to_vec(), depth).unwrap()
    }

    #[test]
    fn depth_one_single_central_box() {
        let carpet = Carpet::build(spec(2, &[3], 1), 1000).unwrap();
        assert_eq!(carpet.cells().len(), 1);
        let cell = &carpet.cells()[0];
        assert_eq!(cell.center, vec![0.0, 0.0]);
        assert!((cell.half_width - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn depth_two_cell_count() {
        let carpet = Carpet::build(spec(2, &[3, 9], 2), 1000).unwrap();
        assert_eq!(carpet.cells().len(), 9, "1 + 8 removed boxes");
    }

    #[test]
    fn zero_depth_rejected() {
        assert!(CarpetSpec::new(2, vec![3], 0).is_err());
    }

    #[test]
    fn even_k_rejected() {
        assert!(CarpetSpec::new(2, vec![4], 1).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            Carpet::build(spec(2, &[3, 9], 2), 5),
            Err(Error::EnumerationCap(9, 5))
        ));
    }

    #[test]
    fn contains_examples() {
        let s = spec(2, &[3, 9], 2);
        assert!(!s.contains(&[0.0, 0.0]).unwrap(), "center removed at level 1");
        assert!(s.contains(&[0.5, 0.5]).unwrap(), "corner survives every depth");
        // a point in a level-2 removed cell: center of the (0,0) level-1 cell
        let p = [-1.0 / 3.0, -1.0 / 3.0];
        assert!(!s.contains(&p).unwrap());
        let s1 = spec(2, &[3, 9], 1);
        assert!(s1.contains(&p).unwrap(), "level-2 removal invisible at depth 1");
        assert!(s.contains(&[0.7, 0.0]).is_err(), "outside the cube");
    }

    #[test]
    fn measure_exact_values() {
        assert!((spec(2, &[3], 1).measure_exact() - 8.0 / 9.0).abs() < 1e-15);
        let m = spec(2, &[3, 9], 2).measure_exact();
        assert!((m - 640.0 / 729.0).abs() < 1e-15);
    }

    #[test]
    fn contains_agrees_with_enumeration() {
        use rand::rngs::StdRng;
        let s = spec(2, &[3, 9], 2);
        let carpet = Carpet::build(s.clone(), 1000).unwrap();
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..10_000 {
            let x = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            let fast = s.contains(&x).unwrap();
            let slow = !carpet.cells().iter().any(|c| c.contains(&x));
            assert_eq!(fast, slow, "disagreement at {x:?}");
        }
    }

    #[test]
    fn monte_carlo_brackets_exact() {
        let s = spec(2, &[3], 1);
        let (est, se) = s.measure_mc(100_000, 7);
        let exact = 8.0 / 9.0;
        assert!((est - exact).abs() < 3.0 * se, "est {est}, se {se}");
    }

    #[test]
    fn monte_carlo_deterministic() {
        let s = spec(2, &[3, 9], 2);
        let a = s.measure_mc(20_000, 12345);
        let b = s.measure_mc(20_000, 12345);
        assert_eq!(a, b);
    }

    #[test]
    fn delta1_examples() {
        let carpet = Carpet::build(spec(2, &[3], 1), 1000).unwrap();
        let d1 = carpet.project_delta1();
        assert_eq!(d1.len(), 1);
        let iv = d1.intervals()[0];
        assert!((iv.lo + 1.0 / 6.0).abs() < 1e-15 && (iv.hi - 1.0 / 6.0).abs() < 1e-15);
        assert!((d1.measure() - 1.0 / 3.0).abs() < 1e-15);

        let carpet = Carpet::build(spec(2, &[3, 9], 2), 1000).unwrap();
        let d1 = carpet.project_delta1();
        assert!((d1.measure() - 11.0 / 27.0).abs() < 1e-12);
        let spec2 = spec(2, &[3, 9], 2);
        assert!((d1.measure() - spec2.delta1_measure_exact()).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_depth() {
        let k = vec![3, 9, 27];
        let mut last_k = f64::INFINITY;
        let mut last_d = -1.0;
        for depth in 1..=3 {
            let s = CarpetSpec::new(2, k.clone(), depth).unwrap();
            let m = s.measure_exact();
            let d = s.delta1_measure_exact();
            assert!(m < last_k, "carpet measure strictly decreasing");
            assert!(d > last_d, "gap projection strictly increasing");
            last_k = m;
            last_d = d;
        }
    }

    #[test]
    fn classical_carpet_dimension() {
        let s = spec(2, &[3, 3, 3], 3);
        let dim = s.box_count_dimension();
        let expected = 8.0_f64.ln() / 3.0_f64.ln();
        assert!((dim - expected).abs() < 0.05, "dim {dim}");
    }
}
