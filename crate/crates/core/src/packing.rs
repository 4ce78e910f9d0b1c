//! Disjoint Koranyi-Cygan ball packings of the removed set.
//!
//! Each removed cell receives a greedy family of inscribed balls: one at the
//! cell center, then recursively one per coordinate orthant sub-box, skipping
//! candidates that would meet an earlier ball. Disjointness of closed balls
//! is enforced pairwise through the exact test
//! `rho_c(c_i, c_j) > r_i + r_j`, never by tolerance.

use crate::algebra::Algebra;
use crate::carnot::{chart_dim, kc_dist_boundary, CarnotPoint};
use crate::carpet::Carpet;
use crate::error::{Error, Result};
use crate::hyperbolic::Ball;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Shrink factor applied to computed inradii so that rounding can never
/// produce touching balls.
pub const SAFETY: f64 = 0.99;

/// Ball together with the removed cell that owns it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackedBall {
    /// Index into the carpet's removed-cell list.
    pub cell: usize,
    pub ball: Ball,
    /// Excluded balls generate no inversion; they seed the discontinuity set.
    pub excluded: bool,
}

/// Disjoint ball family covering part of the removed set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub algebra: Algebra,
    pub n: usize,
    pub pack_depth: usize,
    balls: Vec<PackedBall>,
}

impl Packing {
    pub fn balls(&self) -> &[PackedBall] {
        &self.balls
    }

    /// Indices of the excluded balls.
    pub fn excluded_indices(&self) -> Vec<usize> {
        self.balls
            .iter()
            .enumerate()
            .filter(|(_, b)| b.excluded)
            .map(|(i, _)| i)
            .collect()
    }

    /// Marks balls as excluded; they stay in the family but carry no
    /// inversion generator.
    pub fn exclude(&self, indices: &[usize]) -> Result<Packing> {
        let mut out = self.clone();
        for &i in indices {
            if i >= out.balls.len() {
                return Err(Error::BallIndex(i, out.balls.len()));
            }
            out.balls[i].excluded = true;
        }
        Ok(out)
    }

    /// All strictly-violating pairs of the exact disjointness test; empty
    /// for any packing produced by [`pack`].
    pub fn disjointness_violations(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for i in 0..self.balls.len() {
            for j in i + 1..self.balls.len() {
                let a = &self.balls[i].ball;
                let b = &self.balls[j].ball;
                if kc_dist_boundary(&a.center, &b.center) <= a.radius + b.radius {
                    bad.push((i, j));
                }
            }
        }
        bad
    }
}

/// Inscribes a ball in a coordinate box: centered at the box center, with
/// radius a safety fraction of the `rho_c` distance from the center to the
/// box boundary.
///
/// Over R that distance is the half-width; otherwise it is minimized by
/// seeded boundary sampling with local refinement (`samples` evaluations)
/// and treated as approximate, which the safety factor absorbs.
pub fn inscribe_ball(
    alg: Algebra,
    n: usize,
    center: &[f64],
    half_width: f64,
    samples: usize,
) -> Result<Ball> {
    if !(half_width > 0.0) {
        return Err(Error::DegenerateBox(half_width));
    }
    assert_eq!(center.len(), chart_dim(alg, n), "chart coordinate count");
    let c = CarnotPoint::from_chart(alg, n, center);
    let inradius = match alg {
        Algebra::R => half_width,
        _ => sampled_inradius(alg, n, &c, center, half_width, samples),
    };
    Ok(Ball::new(c, SAFETY * inradius))
}

fn sampled_inradius(
    alg: Algebra,
    n: usize,
    c: &CarnotPoint,
    center: &[f64],
    hw: f64,
    samples: usize,
) -> f64 {
    let dim = center.len();
    let faces = 2 * dim;
    let per_face = (samples / (2 * faces)).max(16);
    let mut best = f64::INFINITY;
    let mut best_offset = vec![0.0; dim];

    let dist_at = |offset: &[f64]| -> f64 {
        let chart: Vec<f64> = center.iter().zip(offset).map(|(&a, &b)| a + b).collect();
        kc_dist_boundary(c, &CarnotPoint::from_chart(alg, n, &chart))
    };

    for face in 0..faces {
        let axis = face / 2;
        let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
        let mut rng = ChaCha12Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
        rng.set_stream(face as u64);
        let mut offset = vec![0.0; dim];
        for _ in 0..per_face {
            for (i, o) in offset.iter_mut().enumerate() {
                *o = if i == axis {
                    sign * hw
                } else {
                    rng.gen_range(-hw..hw)
                };
            }
            let d = dist_at(&offset);
            if d < best {
                best = d;
                best_offset.copy_from_slice(&offset);
            }
        }
    }

    // two local refinement passes around the running minimum
    let mut window = hw * 0.2;
    let mut rng = ChaCha12Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
    rng.set_stream(faces as u64);
    for _ in 0..2 {
        let anchor = best_offset.clone();
        for _ in 0..per_face * dim {
            let offset: Vec<f64> = anchor
                .iter()
                .map(|&a| {
                    if a.abs() == hw {
                        a // stay on the face
                    } else {
                        (a + rng.gen_range(-window..window)).clamp(-hw, hw)
                    }
                })
                .collect();
            let d = dist_at(&offset);
            if d < best {
                best = d;
                best_offset = offset;
            }
        }
        window *= 0.15;
    }
    best
}

/// Builds the packing for the carpet seen as a subset of the boundary group
/// of `H_F^n`: per removed cell a root inscribed ball plus a greedy recursive
/// orthant subdivision to `pack_depth`, accepting each candidate only if it
/// is strictly disjoint from everything accepted before.
///
/// Candidate generation runs in parallel over cells; acceptance is a single
/// deterministic pass in cell order, so the result is thread-count
/// independent.
pub fn pack(
    alg: Algebra,
    n: usize,
    carpet: &Carpet,
    pack_depth: usize,
    inradius_samples: usize,
) -> Packing {
    assert_eq!(
        chart_dim(alg, n),
        carpet.spec().dim,
        "carpet chart dimension does not match (algebra, n)"
    );
    let candidates: Vec<Vec<Ball>> = carpet
        .cells()
        .par_iter()
        .map(|cell| {
            let mut boxes = Vec::new();
            collect_boxes(&cell.center, cell.half_width, pack_depth, &mut boxes);
            boxes
                .iter()
                .filter_map(|(center, hw)| inscribe_ball(alg, n, center, *hw, inradius_samples).ok())
                .collect()
        })
        .collect();

    let mut balls: Vec<PackedBall> = Vec::new();
    for (cell_idx, cell_candidates) in candidates.into_iter().enumerate() {
        for ball in cell_candidates {
            let disjoint = balls.iter().all(|existing| {
                kc_dist_boundary(&existing.ball.center, &ball.center)
                    > existing.ball.radius + ball.radius
            });
            if disjoint {
                balls.push(PackedBall {
                    cell: cell_idx,
                    ball,
                    excluded: false,
                });
            }
        }
    }
    Packing {
        algebra: alg,
        n,
        pack_depth,
        balls,
    }
}

/// Boxes of the recursive orthant subdivision, root first, in a fixed order.
fn collect_boxes(center: &[f64], hw: f64, depth: usize, out: &mut Vec<(Vec<f64>, f64)>) {
    out.push((center.to_vec(), hw));
    if depth == 0 {
        return;
    }
    let dim = center.len();
    let child_hw = hw / 2.0;
    for pattern in 0..(1usize << dim) {
        let child: Vec<f64> = center
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let sign = if pattern >> i & 1 == 0 { -1.0 } else { 1.0 };
                c + sign * child_hw
            })
            .collect();
        collect_boxes(&child, child_hw, depth - 1, out);
    }
}

/// Monte Carlo fraction of the removed set covered by the packing's balls.
///
/// Sampling is uniform over the union of removed cells (cells weighted by
/// volume) with per-chunk generator streams; the result is deterministic for
/// a fixed seed and independent of thread count.
pub fn coverage_mc(packing: &Packing, carpet: &Carpet, samples: u64, seed: u64) -> (f64, f64) {
    assert!(samples >= 1, "need at least one sample");
    if packing.balls.is_empty() || carpet.cells().is_empty() {
        return (0.0, 0.0);
    }
    let cells = carpet.cells();
    let mut cumulative = Vec::with_capacity(cells.len());
    let mut total = 0.0;
    for cell in cells {
        total += cell.volume();
        cumulative.push(total);
    }

    const CHUNK: u64 = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(chunk.wrapping_add(0x5eed));
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut hits = 0u64;
            for _ in 0..count {
                let pick = rng.gen_range(0.0..total);
                let idx = cumulative.partition_point(|&c| c <= pick);
                let cell = &cells[idx.min(cells.len() - 1)];
                let chart: Vec<f64> = cell
                    .center
                    .iter()
                    .map(|&c| c + rng.gen_range(-1.0..1.0) * cell.half_width)
                    .collect();
                let p = CarnotPoint::from_chart(packing.algebra, packing.n, &chart);
                let covered = packing
                    .balls
                    .iter()
                    .any(|pb| kc_dist_boundary(&p, &pb.ball.center) <= pb.ball.radius);
                if covered {
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

/// Versioned serialization record for a packing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackingArtifact {
    pub format: String,
    pub version: u32,
    pub algebra: Algebra,
    pub n: usize,
    pub pack_depth: usize,
    pub balls: Vec<BallRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallRecord {
    pub cell_address: Vec<Vec<u32>>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub excluded: bool,
}

impl Packing {
    pub fn to_artifact(&self, carpet: &Carpet) -> PackingArtifact {
        PackingArtifact {
            format: "nilcarpet/packing".into(),
            version: 1,
            algebra: self.algebra,
            n: self.n,
            pack_depth: self.pack_depth,
            balls: self
                .balls
                .iter()
                .map(|pb| BallRecord {
                    cell_address: carpet.cells()[pb.cell].id.address.clone(),
                    center: pb.ball.center.to_chart(),
                    radius: pb.ball.radius,
                    excluded: pb.excluded,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carpet::CarpetSpec;
    use rand::rngs::StdRng;

    fn carpet(k: &[u32], depth: usize) -> Carpet {
        Carpet::build(CarpetSpec::new(2, k.to_vec(), depth).unwrap(), 10_000).unwrap()
    }

    #[test]
    fn euclidean_inradius_is_exact() {
        let ball = inscribe_ball(Algebra::R, 3, &[0.0, 0.0], 1.0 / 6.0, 1000).unwrap();
        assert!((ball.radius - SAFETY / 6.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(inscribe_ball(Algebra::R, 3, &[0.0, 0.0], 0.0, 10).is_err());
    }

    #[test]
    fn heisenberg_inradius_close_to_half_width() {
        // for boxes near the origin the xi-faces dominate and the rho_c
        // inradius equals the half-width
        let hw = 1.0 / 6.0;
        let ball = inscribe_ball(Algebra::C, 2, &[0.0, 0.0, 0.0], hw, 10_000).unwrap();
        assert!(ball.radius <= SAFETY * hw * 1.02, "radius {}", ball.radius);
        assert!(ball.radius >= SAFETY * hw * 0.9, "radius {}", ball.radius);
    }

    #[test]
    fn inscribed_ball_points_stay_in_box() {
        use crate::hyperbolic::random_unit_sphere_point;
        use rand::{Rng, SeedableRng};
        let center = [1.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0];
        let hw = 1.0 / 18.0;
        let ball = inscribe_ball(Algebra::C, 2, &center, hw, 10_000).unwrap();
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..1000 {
            let unit = random_unit_sphere_point(Algebra::C, 2, &mut rng);
            let rho: f64 = rng.gen_range(0.0..1.0);
            let scaled = crate::carnot::dilate(
                crate::algebra::Scalar::real(Algebra::C, rho * ball.radius),
                &unit.to_boundary(),
            );
            let p = crate::carnot::translate(&ball.center, &scaled).carnot();
            let chart = p.to_chart();
            for (i, &c) in chart.iter().enumerate() {
                assert!(
                    (c - center[i]).abs() <= hw,
                    "ball point escapes the box on axis {i}: {c} vs {} +- {hw}",
                    center[i]
                );
            }
        }
    }

    #[test]
    fn pack_depth_zero_one_ball_per_cell() {
        let carpet = carpet(&[3, 9], 2);
        let packing = pack(Algebra::R, 3, &carpet, 0, 1000);
        assert_eq!(packing.balls().len(), carpet.cells().len());
        assert!(packing.disjointness_violations().is_empty());
    }

    #[test]
    fn coverage_nondecreasing_in_depth() {
        let carpet = carpet(&[3], 1);
        let mut last = -1.0;
        for d in 0..=2 {
            let packing = pack(Algebra::R, 3, &carpet, d, 1000);
            assert!(packing.disjointness_violations().is_empty());
            let (cov, _) = coverage_mc(&packing, &carpet, 20_000, 3);
            assert!(cov >= last, "coverage dropped at depth {d}: {cov} < {last}");
            last = cov;
        }
        assert!(last > 0.7, "depth-2 coverage {last}");
    }

    #[test]
    fn coverage_matches_area_ratio_at_depth_zero() {
        let carpet = carpet(&[3], 1);
        let packing = pack(Algebra::R, 3, &carpet, 0, 1000);
        let (cov, se) = coverage_mc(&packing, &carpet, 100_000, 9);
        let expected = std::f64::consts::PI * (SAFETY / 6.0).powi(2) / (1.0 / 9.0);
        assert!((cov - expected).abs() < 3.0 * se, "cov {cov} vs {expected}");
    }

    #[test]
    fn coverage_deterministic() {
        let carpet = carpet(&[3, 9], 2);
        let packing = pack(Algebra::R, 3, &carpet, 1, 500);
        let a = coverage_mc(&packing, &carpet, 30_000, 777);
        let b = coverage_mc(&packing, &carpet, 30_000, 777);
        assert_eq!(a, b);
    }

    #[test]
    fn exclusion_flags() {
        let carpet = carpet(&[3, 9], 2);
        let packing = pack(Algebra::R, 3, &carpet, 0, 100);
        assert_eq!(packing.exclude(&[]).unwrap(), packing);
        let one = packing.exclude(&[0]).unwrap();
        assert_eq!(one.excluded_indices(), vec![0]);
        let two = packing.exclude(&[0, 3]).unwrap();
        assert_eq!(two.excluded_indices(), vec![0, 3]);
        assert!(packing.exclude(&[99]).is_err());
    }

    #[test]
    fn empty_packing_coverage_zero() {
        let carpet = carpet(&[3], 1);
        let packing = Packing {
            algebra: Algebra::R,
            n: 3,
            pack_depth: 0,
            balls: Vec::new(),
        };
        assert_eq!(coverage_mc(&packing, &carpet, 1000, 1).0, 0.0);
    }

    #[test]
    fn heisenberg_packing_disjoint() {
        let spec = CarpetSpec::new(3, vec![3, 9], 2).unwrap();
        let carpet = Carpet::build(spec, 100_000).unwrap();
        let packing = pack(Algebra::C, 2, &carpet, 0, 2000);
        assert_eq!(packing.balls().len(), carpet.cells().len());
        assert!(packing.disjointness_violations().is_empty());
    }
}
