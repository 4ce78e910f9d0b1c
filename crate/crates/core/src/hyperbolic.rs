//! Projective model of the F-hyperbolic space, transport to the upper
//! half-space model, inversions in Koranyi-Cygan spheres, bisector side
//! tests, and translation-length estimation.
//!
//! Points of the space are negative left lines in `F^{n,1}` for the
//! indefinite form `<<z, w>> = z_1 conj(w_1) + ... + z_n conj(w_n)
//! - z_{n+1} conj(w_{n+1})`. Internally the half-space transport goes
//! through a second basis in which the form reads
//! `a conj(b') + b conj(a') + <xi, xi'>`; a point `(xi, v, u)` lifts to
//! `[(v - |xi|^2 - u)/2, xi, 1]` there, which has form value `-u`.

use crate::algebra::{hermitian, Algebra, FVector, Scalar};
use crate::carnot::{dilate, group_inv, kc_norm, translate, CarnotPoint, HalfSpacePoint};
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Homogeneous coordinates of a left line in `F^{n,1}`, diagonal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<Scalar>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<Scalar>) -> Self {
        assert!(coords.len() >= 3, "need at least three homogeneous coords");
        let alg = coords[0].algebra();
        assert!(
            coords.iter().all(|c| c.algebra() == alg),
            "algebra tag mismatch"
        );
        assert!(coords.iter().any(|c| !c.is_zero()), "zero vector");
        ProjectivePoint { coords }
    }

    pub fn algebra(&self) -> Algebra {
        self.coords[0].algebra()
    }

    /// The `n` of `F^{n,1}`; coordinates have length `n + 1`.
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    /// Left-multiplies the representative; the line is unchanged.
    pub fn rescale(&self, lambda: Scalar) -> ProjectivePoint {
        assert!(!lambda.is_zero(), "zero rescale");
        ProjectivePoint {
            coords: self.coords.iter().map(|&c| lambda * c).collect(),
        }
    }

    pub fn is_interior(&self) -> bool {
        hform(self, self).re() < 0.0
    }
}

/// Indefinite Hermitian `(n,1)`-form
/// `z_1 conj(w_1) + ... + z_n conj(w_n) - z_{n+1} conj(w_{n+1})`.
pub fn hform(z: &ProjectivePoint, w: &ProjectivePoint) -> Scalar {
    assert_eq!(z.coords.len(), w.coords.len(), "dimension mismatch in hform");
    assert_eq!(z.algebra(), w.algebra(), "algebra tag mismatch in hform");
    let last = z.coords.len() - 1;
    let mut acc = Scalar::zero(z.algebra());
    for i in 0..last {
        acc = acc + z.coords[i] * w.coords[i].conj();
    }
    acc - z.coords[last] * w.coords[last].conj()
}

/// Hyperbolic distance from `cosh^2(d/2) = |<<z,w>>|^2 / (<<z,z>> <<w,w>>)`.
///
/// Projectively invariant; reduces to the curvature -1 distance over R.
pub fn dist(z: &ProjectivePoint, w: &ProjectivePoint) -> Result<f64> {
    let zz = hform(z, z).re();
    let ww = hform(w, w).re();
    if zz >= 0.0 {
        return Err(Error::NotInterior(zz));
    }
    if ww >= 0.0 {
        return Err(Error::NotInterior(ww));
    }
    let num = hform(z, w).norm_sqr();
    let ratio = num / (zz * ww);
    Ok(2.0 * ratio.sqrt().max(1.0).acosh())
}

/// Hyperbolic distance between interior points of the half-space model.
///
/// Works on the paired-null lifts, where the form value of a lift is `-u`
/// exactly and the cross term is `a_p + conj(a_q) + <xi_p, xi_q>`; unlike the
/// diagonal basis there is no cancellation, so orbits with heights across
/// hundreds of orders of magnitude stay measurable.
pub fn dist_halfspace(p: &HalfSpacePoint, q: &HalfSpacePoint) -> Result<f64> {
    if p.u <= 0.0 {
        return Err(Error::NotInterior(-p.u));
    }
    if q.u <= 0.0 {
        return Err(Error::NotInterior(-q.u));
    }
    let alg = p.algebra();
    let a_p = Scalar::real(alg, -(p.xi.norm_sqr() + p.u) / 2.0) + p.v.as_scalar().scale(0.5);
    let a_q = Scalar::real(alg, -(q.xi.norm_sqr() + q.u) / 2.0) + q.v.as_scalar().scale(0.5);
    let cross = a_p + a_q.conj() + hermitian(&p.xi, &q.xi);
    let ratio = cross.norm_sqr() / (p.u * q.u);
    Ok(2.0 * ratio.sqrt().max(1.0).acosh())
}

// --- transport between the half-space model and the projective model ---

/// Lift into the paired-null basis `[a, xi_1 .. xi_{n-1}, b]`.
fn j_lift(p: &HalfSpacePoint) -> Vec<Scalar> {
    let alg = p.algebra();
    let a = Scalar::real(alg, -(p.xi.norm_sqr() + p.u) / 2.0) + p.v.as_scalar().scale(0.5);
    let mut out = Vec::with_capacity(p.xi.len() + 2);
    out.push(a);
    out.extend_from_slice(p.xi.entries());
    out.push(Scalar::one(alg));
    out
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn j_to_diag(j: &[Scalar]) -> ProjectivePoint {
    let last = j.len() - 1;
    let (a, b) = (j[0], j[last]);
    let mut coords = Vec::with_capacity(j.len());
    coords.extend_from_slice(&j[1..last]);
    coords.push((a + b).scale(FRAC_1_SQRT_2));
    coords.push((b - a).scale(FRAC_1_SQRT_2));
    ProjectivePoint::new(coords)
}

fn diag_to_j(z: &ProjectivePoint) -> Vec<Scalar> {
    let n = z.n();
    let y_n = z.coords[n - 1];
    let y_last = z.coords[n];
    let a = (y_n - y_last).scale(FRAC_1_SQRT_2);
    let b = (y_n + y_last).scale(FRAC_1_SQRT_2);
    let mut out = Vec::with_capacity(n + 1);
    out.push(a);
    out.extend_from_slice(&z.coords[..n - 1]);
    out.push(b);
    out
}

/// Embeds a half-space point as a projective point. Boundary points land on
/// null lines, interior points on negative lines.
pub fn ball_from_halfspace(p: &HalfSpacePoint) -> ProjectivePoint {
    j_to_diag(&j_lift(p))
}

/// Inverse transport. Fails on the line at infinity (the chart does not
/// cover it) and on positive lines, which are outside the closed model.
pub fn halfspace_from_ball(z: &ProjectivePoint) -> Result<HalfSpacePoint> {
    let j = diag_to_j(z);
    let last = j.len() - 1;
    let b = j[last];
    let scale: f64 = j.iter().map(|c| c.norm_sqr()).sum();
    if b.norm_sqr() <= scale * 1e-28 {
        return Err(Error::PointAtInfinity("last paired-null coordinate vanishes"));
    }
    let lam = b.inv();
    let a = lam * j[0];
    let entries: Vec<Scalar> = j[1..last].iter().map(|&c| lam * c).collect();
    let alg = z.algebra();
    let xi = FVector::new(alg, entries);
    let v = a.scale(2.0).im();
    let u = -2.0 * a.re() - xi.norm_sqr();
    let tol = 1e-9 * (1.0 + scale * lam.norm_sqr());
    if u < -tol {
        return Err(Error::OutsideModel(-u));
    }
    Ok(HalfSpacePoint::new(xi, v, u.max(0.0)))
}

// --- inversions ---

/// Inversion in the unit Koranyi-Cygan sphere, on the boundary group:
/// `(xi, v) -> ((|xi|^2 - v)^{-1} xi, -v / (|xi|^4 + |v|^2))`.
///
/// The scalar factor multiplies `xi` from the left; that is the order under
/// which the map is the restriction of a projective involution (over R and C
/// the two orders agree). Swaps the origin and infinity, fixes the
/// hyperchain `|xi| = 1, v = 0`, and preserves the unit sphere
/// `|xi|^4 + |v|^2 = 1`.
pub fn invert_unit(p: &CarnotPoint) -> Result<CarnotPoint> {
    let alg = p.algebra();
    let s = Scalar::real(alg, p.xi.norm_sqr()) - p.v.as_scalar();
    let n = s.norm_sqr();
    if n < 1e-300 {
        return Err(Error::SingularInversion("origin maps to infinity"));
    }
    let xi = p.xi.scale_left(s.inv());
    let v = p.v.scale(-1.0 / n);
    Ok(CarnotPoint::new(xi, v))
}

/// The same inversion on the whole half-space model, through the projective
/// transport: lift, apply the model involution `[a, xi, b] -> [-b/2, xi, -2a]`
/// (which preserves the paired-null form and squares to the identity), and
/// normalize back. Restricted to `u = 0` this agrees with [`invert_unit`].
pub fn invert_unit_transport(p: &HalfSpacePoint) -> Result<HalfSpacePoint> {
    let j = j_lift(p);
    let last = j.len() - 1;
    let b_new = j[0].scale(-2.0);
    if b_new.norm_sqr() < 1e-300 {
        return Err(Error::SingularInversion("origin maps to infinity"));
    }
    let a_new = j[last].scale(-0.5);
    let lam = b_new.inv();
    let alg = p.algebra();
    let xi = FVector::new(alg, j[1..last].iter().map(|&c| lam * c).collect());
    let v = (lam * a_new).scale(2.0).im();
    // The involution preserves the form exactly, so the height transforms by
    // the normalization factor alone.
    let u = p.u * lam.norm_sqr();
    Ok(HalfSpacePoint::new(xi, v, u))
}

/// Closed Koranyi-Cygan ball in the boundary group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: CarnotPoint,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: CarnotPoint, radius: f64) -> Self {
        assert!(radius > 0.0 && radius.is_finite(), "radius must be positive");
        Ball { center, radius }
    }

    /// The normalizing isometry `h_B = D_{1/r} T_{c^{-1}}` carrying the ball
    /// to the unit ball at the origin.
    pub fn normalize(&self, p: &HalfSpacePoint) -> HalfSpacePoint {
        let shifted = translate(&group_inv(&self.center), p);
        dilate(Scalar::real(p.algebra(), 1.0 / self.radius), &shifted)
    }

    /// Inverse of [`Ball::normalize`].
    pub fn denormalize(&self, p: &HalfSpacePoint) -> HalfSpacePoint {
        let scaled = dilate(Scalar::real(p.algebra(), self.radius), p);
        translate(&self.center, &scaled)
    }

    /// Point of the boundary sphere obtained from a unit-sphere point.
    pub fn boundary_point(&self, unit: &CarnotPoint) -> CarnotPoint {
        self.denormalize(&unit.to_boundary()).carnot()
    }

    /// `rho_c` distance from the center to a boundary point.
    pub fn gauge_of(&self, p: &HalfSpacePoint) -> f64 {
        kc_norm(&self.normalize(p))
    }
}

/// Inversion of order 2 in the sphere bounding `ball`:
/// `I_B = h_B^{-1} I h_B`. Preserves the sphere, swaps inside and outside,
/// and fixes the horizontal hyperchain of the sphere pointwise.
pub fn invert_in_ball(ball: &Ball, p: &HalfSpacePoint) -> Result<HalfSpacePoint> {
    let h = ball.normalize(p);
    let inverted = if h.u == 0.0 {
        invert_unit(&h.carnot())?.to_boundary()
    } else {
        invert_unit_transport(&h)?
    };
    Ok(ball.denormalize(&inverted))
}

/// Classification of a point against the spinal sphere of a ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Inside,
    On,
    Outside,
}

/// Tolerance band around the sphere for [`bisector_side`].
pub const BISECTOR_TOL: f64 = 1e-12;

/// Which side of the bisector (spinal sphere) of `ball` the point lies on.
/// `Inside` is the component with the ball at its infinity.
pub fn bisector_side(ball: &Ball, p: &HalfSpacePoint) -> Side {
    let g = kc_norm(&ball.normalize(p));
    if (g - 1.0).abs() <= BISECTOR_TOL {
        Side::On
    } else if g < 1.0 {
        Side::Inside
    } else {
        Side::Outside
    }
}

// --- composable isometries ---

/// Primitive moves of the half-space model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    Translate(CarnotPoint),
    Dilate(Scalar),
    InvertUnit,
    InvertInBall(Ball),
}

impl Primitive {
    pub fn apply(&self, p: &HalfSpacePoint) -> Result<HalfSpacePoint> {
        match self {
            Primitive::Translate(g) => Ok(translate(g, p)),
            Primitive::Dilate(lam) => Ok(dilate(*lam, p)),
            Primitive::InvertUnit => {
                if p.u == 0.0 {
                    Ok(invert_unit(&p.carnot())?.to_boundary())
                } else {
                    invert_unit_transport(p)
                }
            }
            Primitive::InvertInBall(b) => invert_in_ball(b, p),
        }
    }

    pub fn inverse(&self) -> Primitive {
        match self {
            Primitive::Translate(g) => Primitive::Translate(group_inv(g)),
            Primitive::Dilate(lam) => Primitive::Dilate(lam.inv()),
            Primitive::InvertUnit => Primitive::InvertUnit,
            Primitive::InvertInBall(b) => Primitive::InvertInBall(b.clone()),
        }
    }
}

/// Word of primitive moves, evaluated left to right.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    word: Vec<Primitive>,
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry { word: Vec::new() }
    }

    pub fn from_primitives(word: Vec<Primitive>) -> Self {
        Isometry { word }
    }

    pub fn then(mut self, p: Primitive) -> Self {
        self.word.push(p);
        self
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.word
    }

    /// `self` first, then `other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        Isometry { word }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry {
            word: self.word.iter().rev().map(Primitive::inverse).collect(),
        }
    }

    pub fn eval(&self, p: &HalfSpacePoint) -> Result<HalfSpacePoint> {
        let mut q = p.clone();
        for prim in &self.word {
            q = prim.apply(&q)?;
        }
        Ok(q)
    }
}

/// Result of the power-iteration translation-length estimator.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TranslationLength {
    /// `d(x0, g^{2N} x0) / 2N`, the refined estimate.
    pub estimate: f64,
    /// `d(x0, g^N x0) / N`.
    pub coarse: f64,
    /// Gap between the two estimates, an empirical error bound.
    pub error_bound: f64,
}

/// Estimates the translation length of `g` from the orbit of `x0`:
/// `d(x0, g^N x0) / N`, together with the `2N` refinement and their gap.
///
/// Fails when the orbit leaves the numerical range (height underflow or
/// non-finite coordinates); reduce `n` in that case.
pub fn translation_length(
    g: &Isometry,
    x0: &ProjectivePoint,
    n: u32,
) -> Result<TranslationLength> {
    assert!(n >= 1, "iteration count must be positive");
    let start = halfspace_from_ball(x0)?;
    if start.u <= 0.0 {
        return Err(Error::NotInterior(0.0));
    }
    let mut p = start.clone();
    let mut d_n = 0.0;
    for step in 1..=2 * n {
        p = g.eval(&p)?;
        if !(p.u > 0.0) || !p.u.is_finite() || !p.xi.norm_sqr().is_finite() {
            return Err(Error::NumericalRange(step));
        }
        if step == n {
            d_n = dist_halfspace(&start, &p)?;
            if !d_n.is_finite() {
                return Err(Error::NumericalRange(step));
            }
        }
    }
    let d_2n = dist_halfspace(&start, &p)?;
    if !d_2n.is_finite() {
        return Err(Error::NumericalRange(2 * n));
    }
    let coarse = d_n / n as f64;
    let estimate = d_2n / (2 * n) as f64;
    Ok(TranslationLength {
        estimate,
        coarse,
        error_bound: (coarse - estimate).abs(),
    })
}

/// Uniform-ish random point of the unit sphere `|xi|^4 + |v|^2 = 1`,
/// built from a random direction pair and an exact radial split.
pub fn random_unit_sphere_point<R: Rng>(alg: Algebra, n: usize, rng: &mut R) -> CarnotPoint {
    let hdim = alg.dim() * (n - 1);
    let mut xi_dir = vec![0.0; hdim];
    loop {
        for x in xi_dir.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
        let norm: f64 = xi_dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            for x in xi_dir.iter_mut() {
                *x /= norm;
            }
            break;
        }
    }
    let (xi_mag, v_mag) = if alg.im_dim() == 0 {
        (1.0, 0.0)
    } else {
        let theta = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        // |xi|^2 = cos(theta), |v| = sin(theta) puts the point on the sphere.
        (theta.cos().sqrt(), theta.sin())
    };
    let mut chart = Vec::with_capacity(hdim + alg.im_dim());
    chart.extend(xi_dir.iter().map(|x| x * xi_mag));
    if alg.im_dim() > 0 {
        let mut v_dir = vec![0.0; alg.im_dim()];
        loop {
            for x in v_dir.iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
            let norm: f64 = v_dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.1 {
                for x in v_dir.iter_mut() {
                    *x /= norm;
                }
                break;
            }
        }
        chart.extend(v_dir.iter().map(|x| x * v_mag));
    }
    CarnotPoint::from_chart(alg, n, &chart)
}
