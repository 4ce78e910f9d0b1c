//! The Carnot group `F^{n-1} x Im F` at infinity and its extension to the
//! upper half-space model via horospherical coordinates `(xi, v, u)`.
//!
//! The group law is `(xi, v) . (xi', v') = (xi + xi', v + v' + 2 Im<xi, xi'>)`
//! with inverse `(-xi, -v)`; the Koranyi-Cygan gauge and metric extend it to
//! heights `u >= 0`. Left translations are isometries, and dilations scale
//! the metric by `|lambda|`.

use crate::algebra::{hermitian, Algebra, FVector, ImScalar, Scalar};
use serde::{Deserialize, Serialize};

/// Boundary point `(xi, v)` of the Carnot group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarnotPoint {
    pub xi: FVector,
    pub v: ImScalar,
}

/// Interior (or boundary, at `u = 0`) point in horospherical coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePoint {
    pub xi: FVector,
    pub v: ImScalar,
    pub u: f64,
}

impl CarnotPoint {
    pub fn new(xi: FVector, v: ImScalar) -> Self {
        assert_eq!(xi.algebra(), v.algebra(), "algebra tag mismatch");
        CarnotPoint { xi, v }
    }

    pub fn origin(alg: Algebra, n: usize) -> Self {
        CarnotPoint {
            xi: FVector::zero(alg, n - 1),
            v: ImScalar::zero(alg),
        }
    }

    pub fn algebra(&self) -> Algebra {
        self.xi.algebra()
    }

    /// Lifts to the half-space model at height `u`.
    pub fn at_height(&self, u: f64) -> HalfSpacePoint {
        assert!(u >= 0.0, "height must be nonnegative");
        HalfSpacePoint {
            xi: self.xi.clone(),
            v: self.v,
            u,
        }
    }

    pub fn to_boundary(&self) -> HalfSpacePoint {
        self.at_height(0.0)
    }
}

impl HalfSpacePoint {
    pub fn new(xi: FVector, v: ImScalar, u: f64) -> Self {
        assert_eq!(xi.algebra(), v.algebra(), "algebra tag mismatch");
        assert!(u >= 0.0, "height must be nonnegative");
        HalfSpacePoint { xi, v, u }
    }

    pub fn algebra(&self) -> Algebra {
        self.xi.algebra()
    }

    pub fn is_boundary(&self) -> bool {
        self.u == 0.0
    }

    /// Drops the height; meaningful for boundary points.
    pub fn carnot(&self) -> CarnotPoint {
        CarnotPoint {
            xi: self.xi.clone(),
            v: self.v,
        }
    }
}

/// Group law `(xi + xi', v + v' + 2 Im<xi, xi'>)`.
pub fn group_mul(a: &CarnotPoint, b: &CarnotPoint) -> CarnotPoint {
    let xi = &a.xi + &b.xi;
    let v = a.v + b.v + hermitian(&a.xi, &b.xi).im().scale(2.0);
    CarnotPoint { xi, v }
}

/// Group inverse `(-xi, -v)`.
pub fn group_inv(a: &CarnotPoint) -> CarnotPoint {
    CarnotPoint {
        xi: -&a.xi,
        v: -a.v,
    }
}

/// Left translation extended to the half-space model; the height is fixed.
pub fn translate(g: &CarnotPoint, p: &HalfSpacePoint) -> HalfSpacePoint {
    let xi = &g.xi + &p.xi;
    let v = g.v + p.v + hermitian(&g.xi, &p.xi).im().scale(2.0);
    HalfSpacePoint { xi, v, u: p.u }
}

/// Carnot dilation `D_lambda`.
///
/// The horizontal part is scaled from the left and the height by
/// `|lambda|^2`. Over R and C the center scales by `|lambda|^2` as well; over
/// H it transforms by the sandwich `lambda v conj(lambda)` (the same thing
/// when lambda and v commute), which is what makes `D_lambda` a group
/// automorphism and a `|lambda|`-similarity of the metric in all three
/// algebras.
pub fn dilate(lambda: Scalar, p: &HalfSpacePoint) -> HalfSpacePoint {
    assert!(!lambda.is_zero(), "zero dilation factor");
    let n2 = lambda.norm_sqr();
    let xi = p.xi.scale_left(lambda);
    let v = match p.algebra() {
        Algebra::R | Algebra::C => p.v.scale(n2),
        Algebra::H => ImScalar::from_scalar(lambda * p.v.as_scalar() * lambda.conj()),
    };
    HalfSpacePoint { xi, v, u: n2 * p.u }
}

/// Koranyi-Cygan gauge `| |xi|^2 + u - v |_F^{1/2}`.
pub fn kc_norm(p: &HalfSpacePoint) -> f64 {
    let mixed = Scalar::real(p.algebra(), p.xi.norm_sqr() + p.u) - p.v.as_scalar();
    mixed.norm().sqrt()
}

/// Koranyi-Cygan metric
/// `| |xi - xi'|^2 + |u - u'| - (v - v' + 2 Im<xi, xi'>) |_F^{1/2}`.
pub fn kc_dist(p: &HalfSpacePoint, q: &HalfSpacePoint) -> f64 {
    let dxi = &p.xi - &q.xi;
    let re = dxi.norm_sqr() + (p.u - q.u).abs();
    let im = p.v - q.v + hermitian(&p.xi, &q.xi).im().scale(2.0);
    let mixed = Scalar::real(p.algebra(), re) - im.as_scalar();
    mixed.norm().sqrt()
}

/// Metric restricted to the boundary.
pub fn kc_dist_boundary(p: &CarnotPoint, q: &CarnotPoint) -> f64 {
    kc_dist(&p.to_boundary(), &q.to_boundary())
}

/// Coordinate-wise deviation: the sup difference over the horospherical
/// chart coordinates and the height.
///
/// This is the right stick for comparing points claimed to be identical:
/// the gauge is Holder-1/2 in the vertical part and the height, so a single
/// unit of double-precision rounding (~1e-16) already reads as ~1e-8 in
/// `rho_c`, swamping any identity check measured there.
pub fn coord_dist(p: &HalfSpacePoint, q: &HalfSpacePoint) -> f64 {
    let pc = p.carnot().to_chart();
    let qc = q.carnot().to_chart();
    let mut sup = (p.u - q.u).abs();
    for (a, b) in pc.iter().zip(&qc) {
        sup = sup.max((a - b).abs());
    }
    sup
}

/// Real chart dimension of the Carnot group: `dim_R(F) * (n-1) + dim(Im F)`.
pub fn chart_dim(alg: Algebra, n: usize) -> usize {
    alg.dim() * (n - 1) + alg.im_dim()
}

impl CarnotPoint {
    /// Real coordinates: the `dim_R(F)` coordinates of each entry of `xi`
    /// in order, then the coordinates of `v`.
    pub fn to_chart(&self) -> Vec<f64> {
        let alg = self.algebra();
        let mut out = Vec::with_capacity(chart_dim(alg, self.xi.len() + 1));
        for e in self.xi.entries() {
            out.extend_from_slice(&e.coords()[..alg.dim()]);
        }
        out.extend_from_slice(self.v.im_coords());
        out
    }

    /// Inverse of [`CarnotPoint::to_chart`].
    pub fn from_chart(alg: Algebra, n: usize, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), chart_dim(alg, n), "chart coordinate count");
        let d = alg.dim();
        let mut entries = Vec::with_capacity(n - 1);
        for slot in 0..n - 1 {
            entries.push(Scalar::new(alg, &coords[slot * d..(slot + 1) * d]));
        }
        let v = ImScalar::new(alg, &coords[(n - 1) * d..]);
        CarnotPoint {
            xi: FVector::new(alg, entries),
            v,
        }
    }

    /// First real coordinate of `xi` (the stretch axis).
    pub fn x1(&self) -> f64 {
        self.xi.entry(0).re()
    }
}

impl HalfSpacePoint {
    pub fn x1(&self) -> f64 {
        self.xi.entry(0).re()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heis(x: f64, y: f64, v: f64) -> CarnotPoint {
        CarnotPoint::from_chart(Algebra::C, 2, &[x, y, v])
    }

    #[test]
    fn heisenberg_group_mul() {
        // (1, 0) . (i, 0) = (1 + i, -2i)
        let a = heis(1.0, 0.0, 0.0);
        let b = heis(0.0, 1.0, 0.0);
        let ab = group_mul(&a, &b);
        assert_eq!(ab.to_chart(), vec![1.0, 1.0, -2.0]);
    }

    #[test]
    fn identity_and_inverse() {
        let a = heis(0.3, -0.7, 1.1);
        let e = CarnotPoint::origin(Algebra::C, 2);
        assert_eq!(group_mul(&a, &e), a);
        let prod = group_mul(&a, &group_inv(&a));
        assert!(prod.xi.norm() < 1e-15 && prod.v.norm() < 1e-15);
    }

    #[test]
    fn real_case_is_abelian_translation() {
        let a = CarnotPoint::from_chart(Algebra::R, 3, &[0.25, -0.5]);
        let b = CarnotPoint::from_chart(Algebra::R, 3, &[0.5, 0.125]);
        assert_eq!(group_mul(&a, &b).to_chart(), vec![0.75, -0.375]);
        assert_eq!(group_mul(&a, &b), group_mul(&b, &a));
    }

    #[test]
    fn translate_keeps_height_and_inverts() {
        let g = heis(1.0, 0.0, 0.0);
        let p = HalfSpacePoint::new(FVector::zero(Algebra::C, 1), ImScalar::zero(Algebra::C), 5.0);
        let q = translate(&g, &p);
        assert_eq!(q.carnot().to_chart(), vec![1.0, 0.0, 0.0]);
        assert_eq!(q.u, 5.0);
        let back = translate(&group_inv(&g), &q);
        assert!(kc_dist(&back, &p) < 1e-15);
    }

    #[test]
    fn dilation_examples() {
        let p = heis(0.3, 0.4, 0.5).at_height(0.25);
        let d2 = dilate(Scalar::real(Algebra::C, 2.0), &p);
        assert_eq!(d2.carnot().to_chart(), vec![0.6, 0.8, 2.0]);
        assert_eq!(d2.u, 1.0);

        let d1 = dilate(Scalar::one(Algebra::C), &p);
        assert_eq!(d1, p);

        // |lambda| = 1 rotates: D_i (1, 0, 0) = (i, 0, 0)
        let e1 = heis(1.0, 0.0, 0.0).to_boundary();
        let di = dilate(Scalar::new(Algebra::C, &[0.0, 1.0]), &e1);
        assert_eq!(di.carnot().to_chart(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn kc_norm_examples() {
        // (0, 4i, 0) has gauge 2
        let p = heis(0.0, 0.0, 4.0).to_boundary();
        assert!((kc_norm(&p) - 2.0).abs() < 1e-15);
        // origin has gauge 0
        let o = CarnotPoint::origin(Algebra::C, 2).to_boundary();
        assert_eq!(kc_norm(&o), 0.0);
        // (e1, 0, 0) has gauge 1
        let e1 = heis(1.0, 0.0, 0.0).to_boundary();
        assert!((kc_norm(&e1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kc_dist_examples() {
        let o = CarnotPoint::origin(Algebra::C, 2).to_boundary();
        let e1 = heis(1.0, 0.0, 0.0).to_boundary();
        assert!((kc_dist(&o, &e1) - 1.0).abs() < 1e-15);
        assert_eq!(kc_dist(&e1, &e1), 0.0);
        let pole = heis(0.0, 0.0, 4.0).to_boundary();
        assert!((kc_dist(&o, &pole) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn chart_roundtrip() {
        let coords = [0.1, -0.2, 0.3, 0.4, 0.5, 0.6, -0.7];
        let p = CarnotPoint::from_chart(Algebra::H, 2, &coords);
        assert_eq!(p.to_chart(), coords.to_vec());
        assert_eq!(chart_dim(Algebra::H, 2), 7);
        assert_eq!(chart_dim(Algebra::R, 3), 2);
        assert_eq!(chart_dim(Algebra::C, 2), 3);
    }
}
