//! The stretch homeomorphism `f_t` along the first chart axis.
//!
//! The slope function is 1 on the projected gap set and `t` off it, so
//! `psi_t(x) = int_0^x phi_t` is piecewise linear with exactly two slopes.
//! On every gap component `psi_t` is a translation `x -> x + c`; the
//! integral is evaluated by interval arithmetic, not quadrature, and the
//! per-component offsets are precomputed so that the translation is exact
//! down to the last bit.

use crate::carnot::HalfSpacePoint;
use crate::carpet::RemovedCell;
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use serde::{Deserialize, Serialize};

/// The map `f_t` determined by the stretch factor `t` and the projected
/// gap set `Delta_1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StretchMap {
    t: f64,
    delta1: IntervalSet,
    /// Per-component constants with `psi(x) = x + offset[i]` on component `i`.
    offsets: Vec<f64>,
    t1: f64,
    /// Segment breakpoints `(x, psi(x), slope to the next breakpoint)`.
    segments: Vec<(f64, f64, f64)>,
}

impl StretchMap {
    pub fn new(t: f64, delta1: IntervalSet) -> Self {
        assert!(t > 0.0 && t.is_finite(), "stretch factor must be positive");
        let offsets: Vec<f64> = delta1
            .intervals()
            .iter()
            .map(|iv| {
                // anchor the component at an endpoint (or at 0 for the
                // central one) where the signed gap measure is exact
                let anchor = if iv.lo >= 0.0 {
                    iv.lo
                } else if iv.hi <= 0.0 {
                    iv.hi
                } else {
                    0.0
                };
                (1.0 - t) * (signed_gap_measure(&delta1, anchor) - anchor)
            })
            .collect();
        let m = delta1.measure();
        let t1 = m + t * (1.0 - m);

        let mut map = StretchMap {
            t,
            delta1,
            offsets,
            t1,
            segments: Vec::new(),
        };
        let mut xs = vec![-0.5, 0.5];
        for iv in map.delta1.intervals() {
            xs.push(iv.lo);
            xs.push(iv.hi);
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        map.segments = xs
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let slope = if map.delta1.contains(mid) { 1.0 } else { t };
                (w[0], map.eval(w[0]), slope)
            })
            .collect();
        map
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn delta1(&self) -> &IntervalSet {
        &self.delta1
    }

    /// Slope `phi_t(y)`: 1 on the gap set, `t` on the carpet projection.
    pub fn phi(&self, y: f64) -> Result<f64> {
        check_range(y)?;
        Ok(if self.delta1.contains(y) { 1.0 } else { self.t })
    }

    /// `psi_t(x) = int_0^x phi_t(y) dy`, exact by interval arithmetic.
    pub fn psi(&self, x: f64) -> Result<f64> {
        check_range(x)?;
        Ok(self.eval(x))
    }

    fn eval(&self, x: f64) -> f64 {
        match self.delta1.component_of(x) {
            Some(i) => x + self.offsets[i],
            None => self.t * x + (1.0 - self.t) * signed_gap_measure(&self.delta1, x),
        }
    }

    /// `psi_t` extended to the whole axis by `psi(x + m) = psi(x) + m t_1`.
    pub fn psi_extended(&self, x: f64) -> f64 {
        let m = (x + 0.5).floor();
        self.eval(x - m) + m * self.t1
    }

    /// Total stretch of the fundamental interval:
    /// `t_1 = psi(1/2) - psi(-1/2) = m(Delta_1) + t (1 - m(Delta_1))`.
    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Inverse of `psi_t` on its image interval.
    pub fn psi_inv(&self, y: f64) -> Result<f64> {
        let lo = self.eval(-0.5);
        let hi = self.eval(0.5);
        if !(lo..=hi).contains(&y) {
            return Err(Error::OutOfRange {
                what: "psi image value",
                value: y,
                lo,
                hi,
            });
        }
        let idx = self
            .segments
            .partition_point(|&(_, py, _)| py <= y)
            .saturating_sub(1);
        let (bx, by, slope) = self.segments[idx];
        Ok((bx + (y - by) / slope).clamp(-0.5, 0.5))
    }

    /// Applies `f_t` inside the fundamental column: only the first real
    /// coordinate moves, to `psi_t(x_1)`.
    pub fn apply(&self, p: &HalfSpacePoint) -> Result<HalfSpacePoint> {
        let x1 = p.x1();
        check_range(x1)?;
        Ok(set_x1(p, self.eval(x1)))
    }

    /// The lattice-periodic extension of [`StretchMap::apply`] to all of
    /// the half-space model.
    pub fn apply_extended(&self, p: &HalfSpacePoint) -> HalfSpacePoint {
        set_x1(p, self.psi_extended(p.x1()))
    }

    /// The translation constant of `f_t` on a removed cell's column.
    ///
    /// Fails if the cell projection is not contained in a single gap
    /// component, which signals an inconsistent carpet.
    pub fn cell_translation(&self, cell: &RemovedCell) -> Result<f64> {
        let iv = cell.x1_interval();
        let mid = 0.5 * (iv.lo + iv.hi);
        let comp = self
            .delta1
            .component_of(mid)
            .ok_or(Error::CellGapMismatch(iv.lo, iv.hi))?;
        let host = self.delta1.intervals()[comp];
        if iv.lo < host.lo - 1e-12 || iv.hi > host.hi + 1e-12 {
            return Err(Error::CellGapMismatch(iv.lo, iv.hi));
        }
        Ok(self.offsets[comp])
    }
}

/// Signed measure of the gap set between 0 and `x`.
fn signed_gap_measure(delta1: &IntervalSet, x: f64) -> f64 {
    if x >= 0.0 {
        delta1.measure_within(0.0, x)
    } else {
        -delta1.measure_within(x, 0.0)
    }
}

fn check_range(x: f64) -> Result<()> {
    if !(-0.5..=0.5).contains(&x) {
        return Err(Error::OutOfRange {
            what: "first-axis coordinate",
            value: x,
            lo: -0.5,
            hi: 0.5,
        });
    }
    Ok(())
}

/// Replaces the first real coordinate of `xi`.
pub fn set_x1(p: &HalfSpacePoint, x: f64) -> HalfSpacePoint {
    let mut xi = p.xi.clone();
    let mut coords = xi.entry(0).coords();
    coords[0] = x;
    let alg = p.algebra();
    xi.set_entry(0, crate::algebra::Scalar::new(alg, &coords[..alg.dim()]));
    HalfSpacePoint::new(xi, p.v, p.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carpet::{Carpet, CarpetSpec};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn delta1(k: &[u32], depth: usize) -> IntervalSet {
        let spec = CarpetSpec::new(2, k.to_vec(), depth).unwrap();
        Carpet::build(spec, 10_000).unwrap().project_delta1()
    }

    #[test]
    fn phi_values() {
        let map = StretchMap::new(2.0, delta1(&[3], 1));
        assert_eq!(map.phi(0.0).unwrap(), 1.0, "0 lies in the central gap");
        assert_eq!(map.phi(0.4).unwrap(), 2.0, "0.4 is over the carpet");
        assert!(map.phi(0.7).is_err());
        let id = StretchMap::new(1.0, delta1(&[3], 1));
        assert_eq!(id.phi(0.4).unwrap(), 1.0);
    }

    #[test]
    fn psi_values() {
        let map = StretchMap::new(2.0, delta1(&[3], 1));
        assert!((map.psi(0.5).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(map.psi(0.1).unwrap(), 0.1, "identity inside the central gap");
        let id = StretchMap::new(1.0, delta1(&[3], 1));
        for x in [-0.5, -0.21, 0.0, 0.37, 0.5] {
            assert_eq!(id.psi(x).unwrap(), x, "psi_1 is the identity");
        }
    }

    #[test]
    fn t1_values() {
        let d = delta1(&[3], 1);
        assert!((StretchMap::new(2.0, d.clone()).t1() - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(StretchMap::new(1.0, d.clone()).t1(), 1.0);
        let mut last = 0.0;
        for i in 1..=10 {
            let t = i as f64 * 0.4;
            let t1 = StretchMap::new(t, d.clone()).t1();
            assert!(t1 > last, "t1 strictly increasing in t");
            last = t1;
        }
    }

    #[test]
    fn t1_matches_endpoint_difference() {
        let map = StretchMap::new(2.7, delta1(&[3, 9], 2));
        let span = map.psi(0.5).unwrap() - map.psi(-0.5).unwrap();
        assert!((span - map.t1()).abs() < 1e-14);
    }

    #[test]
    fn apply_moves_only_x1() {
        use crate::algebra::Algebra;
        use crate::carnot::CarnotPoint;
        let map = StretchMap::new(2.0, delta1(&[3], 1));
        let p = CarnotPoint::from_chart(Algebra::R, 3, &[0.5, -0.3]).at_height(1.25);
        let q = map.apply(&p).unwrap();
        assert!((q.x1() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(q.carnot().to_chart()[1], -0.3);
        assert_eq!(q.u, 1.25);

        let inside = CarnotPoint::from_chart(Algebra::R, 3, &[0.1, 0.2]).at_height(0.0);
        assert_eq!(map.apply(&inside).unwrap().x1(), 0.1);

        let outside = CarnotPoint::from_chart(Algebra::R, 3, &[0.7, 0.0]).at_height(0.0);
        assert!(map.apply(&outside).is_err());
    }

    #[test]
    fn cell_translations() {
        let spec = CarpetSpec::new(2, vec![3, 9], 2).unwrap();
        let carpet = Carpet::build(spec, 1000).unwrap();
        let map = StretchMap::new(2.0, carpet.project_delta1());

        // central cell is fixed by symmetry
        let central = &carpet.cells()[0];
        assert_eq!(map.cell_translation(central).unwrap(), 0.0);

        // the first level-2 cell sits left of center and moves left by 4/27
        let left = &carpet.cells()[1];
        assert!(left.center[0] < 0.0);
        let c = map.cell_translation(left).unwrap();
        assert!((c + 4.0 / 27.0).abs() < 1e-13, "offset {c}");

        // any stretch fixes the central cell
        for t in [0.5, 2.0, 3.5] {
            let m = StretchMap::new(t, carpet.project_delta1());
            assert_eq!(m.cell_translation(central).unwrap(), 0.0);
        }
    }

    #[test]
    fn restriction_to_cell_is_exact_translation() {
        use crate::algebra::Algebra;
        use crate::carnot::CarnotPoint;
        let spec = CarpetSpec::new(2, vec![3, 9], 2).unwrap();
        let carpet = Carpet::build(spec, 1000).unwrap();
        let map = StretchMap::new(2.0, carpet.project_delta1());
        let cell = &carpet.cells()[1];
        let c = map.cell_translation(cell).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            let x1 = cell.center[0] + rng.gen_range(-0.999..0.999) * cell.half_width;
            let x2 = cell.center[1] + rng.gen_range(-0.999..0.999) * cell.half_width;
            let p = CarnotPoint::from_chart(Algebra::R, 3, &[x1, x2]).at_height(0.5);
            let stretched = map.apply(&p).unwrap();
            // bit-exact agreement with the translation by c along e_1
            assert_eq!(stretched.x1(), x1 + c);
            assert_eq!(stretched.carnot().to_chart()[1], x2);
        }
    }

    #[test]
    fn psi_inverse_roundtrip() {
        let map = StretchMap::new(2.0, delta1(&[3, 9], 2));
        let mut rng = StdRng::seed_from_u64(8);
        let (lo, hi) = (map.psi(-0.5).unwrap(), map.psi(0.5).unwrap());
        for _ in 0..10_000 {
            let y = rng.gen_range(lo..hi);
            let x = map.psi_inv(y).unwrap();
            let back = map.psi(x).unwrap();
            assert!((back - y).abs() < 1e-14, "roundtrip {y} -> {x} -> {back}");
        }
        assert!(map.psi_inv(hi + 0.1).is_err());
    }

    #[test]
    fn difference_quotients_stay_between_slopes() {
        let t = 2.0;
        let map = StretchMap::new(t, delta1(&[3, 9], 2));
        let mut rng = StdRng::seed_from_u64(21);
        let h = 1e-6;
        for _ in 0..10_000 {
            let x = rng.gen_range(-0.5..0.5 - h);
            let q = (map.psi(x + h).unwrap() - map.psi(x).unwrap()) / h;
            assert!(
                (1.0 - 1e-9..=t + 1e-9).contains(&q),
                "quotient {q} at x = {x}"
            );
        }
    }

    #[test]
    fn extension_is_periodic_equivariant() {
        let map = StretchMap::new(2.0, delta1(&[3], 1));
        let mut rng = StdRng::seed_from_u64(34);
        for _ in 0..1000 {
            let x = rng.gen_range(-0.5..0.5);
            let shifted = map.psi_extended(x + 1.0);
            let direct = map.psi(x).unwrap() + map.t1();
            assert!((shifted - direct).abs() < 1e-14);
        }
        assert!((map.psi_extended(0.5) - map.psi(0.5).unwrap()).abs() < 1e-14);
    }
}
