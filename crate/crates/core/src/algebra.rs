//! Arithmetic over the associative real division algebras R, C and H.
//!
//! A [`Scalar`] stores up to four real coordinates (basis 1, i, j, k) next to
//! an [`Algebra`] tag; the quaternion product restricts to complex and real
//! multiplication on the embedded subalgebras, so one multiplication routine
//! serves all three. Quaternionic vectors are left modules: scalars multiply
//! entries from the left, and the Hermitian product is `sum z_i * conj(w_i)`.
//!
//! Mixing algebra tags or vector lengths is a programming error and panics.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Tag selecting one of the three associative real division algebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algebra {
    R,
    C,
    H,
}

impl Algebra {
    /// Real dimension: 1, 2 or 4.
    pub fn dim(self) -> usize {
        match self {
            Algebra::R => 1,
            Algebra::C => 2,
            Algebra::H => 4,
        }
    }

    /// Real dimension of the imaginary part: 0, 1 or 3.
    pub fn im_dim(self) -> usize {
        self.dim() - 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Algebra::R => "R",
            Algebra::C => "C",
            Algebra::H => "H",
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Element of R, C or H. Coordinates beyond `alg.dim()` stay zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    alg: Algebra,
    c: [f64; 4],
}

impl Scalar {
    /// Builds a scalar from `alg.dim()` coordinates.
    pub fn new(alg: Algebra, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), alg.dim(), "coordinate count for {alg}");
        let mut c = [0.0; 4];
        c[..coords.len()].copy_from_slice(coords);
        Scalar { alg, c }
    }

    pub fn real(alg: Algebra, x: f64) -> Self {
        Scalar {
            alg,
            c: [x, 0.0, 0.0, 0.0],
        }
    }

    pub fn zero(alg: Algebra) -> Self {
        Scalar::real(alg, 0.0)
    }

    pub fn one(alg: Algebra) -> Self {
        Scalar::real(alg, 1.0)
    }

    /// Basis element along coordinate `axis` (0 = real part).
    pub fn basis(alg: Algebra, axis: usize) -> Self {
        assert!(axis < alg.dim(), "axis {axis} for {alg}");
        let mut c = [0.0; 4];
        c[axis] = 1.0;
        Scalar { alg, c }
    }

    pub fn algebra(&self) -> Algebra {
        self.alg
    }

    pub fn re(&self) -> f64 {
        self.c[0]
    }

    /// All four coordinates (trailing ones zero below H).
    pub fn coords(&self) -> [f64; 4] {
        self.c
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.c[axis]
    }

    pub fn conj(&self) -> Self {
        Scalar {
            alg: self.alg,
            c: [self.c[0], -self.c[1], -self.c[2], -self.c[3]],
        }
    }

    /// Imaginary part `(x - conj(x)) / 2` as a typed imaginary element.
    pub fn im(&self) -> ImScalar {
        ImScalar(Scalar {
            alg: self.alg,
            c: [0.0, self.c[1], self.c[2], self.c[3]],
        })
    }

    /// Conjugate together with the imaginary part.
    pub fn conj_im(&self) -> (Scalar, ImScalar) {
        (self.conj(), self.im())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum()
    }

    /// The modulus `|x|_F`, i.e. the Euclidean norm of the coordinates.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplicative inverse `conj(x) / |x|^2`.
    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        assert!(n > 0.0, "inverse of zero scalar");
        self.conj().scale(1.0 / n)
    }

    pub fn scale(&self, s: f64) -> Self {
        Scalar {
            alg: self.alg,
            c: [self.c[0] * s, self.c[1] * s, self.c[2] * s, self.c[3] * s],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        assert_eq!(self.alg, rhs.alg, "algebra tag mismatch in add");
        Scalar {
            alg: self.alg,
            c: [
                self.c[0] + rhs.c[0],
                self.c[1] + rhs.c[1],
                self.c[2] + rhs.c[2],
                self.c[3] + rhs.c[3],
            ],
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        assert_eq!(self.alg, rhs.alg, "algebra tag mismatch in sub");
        Scalar {
            alg: self.alg,
            c: [
                self.c[0] - rhs.c[0],
                self.c[1] - rhs.c[1],
                self.c[2] - rhs.c[2],
                self.c[3] - rhs.c[3],
            ],
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.scale(-1.0)
    }
}

/// Quaternion product; restricts to complex and real multiplication since
/// the unused coordinates are zero. `ij = k`, `jk = i`, `ki = j`.
impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        assert_eq!(self.alg, rhs.alg, "algebra tag mismatch in mul");
        let a = &self.c;
        let b = &rhs.c;
        Scalar {
            alg: self.alg,
            c: [
                a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
            ],
        }
    }
}

/// Division `a * b^{-1}`; the order matters for quaternions.
impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        self * rhs.inv()
    }
}

/// Purely imaginary element: zero real part by construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImScalar(Scalar);

impl ImScalar {
    /// Builds from `alg.im_dim()` imaginary coordinates.
    pub fn new(alg: Algebra, im_coords: &[f64]) -> Self {
        assert_eq!(im_coords.len(), alg.im_dim(), "imaginary coords for {alg}");
        let mut c = [0.0; 4];
        c[1..=im_coords.len()].copy_from_slice(im_coords);
        ImScalar(Scalar { alg, c })
    }

    pub fn zero(alg: Algebra) -> Self {
        ImScalar(Scalar::zero(alg))
    }

    /// Projects a scalar onto its imaginary part.
    pub fn from_scalar(s: Scalar) -> Self {
        s.im()
    }

    pub fn algebra(&self) -> Algebra {
        self.0.alg
    }

    pub fn as_scalar(&self) -> Scalar {
        self.0
    }

    /// Imaginary coordinates, `alg.im_dim()` of them.
    pub fn im_coords(&self) -> &[f64] {
        &self.0.c[1..self.0.alg.dim()]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    pub fn scale(&self, s: f64) -> Self {
        ImScalar(self.0.scale(s))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl Add for ImScalar {
    type Output = ImScalar;
    fn add(self, rhs: ImScalar) -> ImScalar {
        ImScalar(self.0 + rhs.0)
    }
}

impl Sub for ImScalar {
    type Output = ImScalar;
    fn sub(self, rhs: ImScalar) -> ImScalar {
        ImScalar(self.0 - rhs.0)
    }
}

impl Neg for ImScalar {
    type Output = ImScalar;
    fn neg(self) -> ImScalar {
        ImScalar(-self.0)
    }
}

/// Vector over F with left scalar action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FVector {
    alg: Algebra,
    entries: Vec<Scalar>,
}

impl FVector {
    pub fn new(alg: Algebra, entries: Vec<Scalar>) -> Self {
        for e in &entries {
            assert_eq!(e.algebra(), alg, "entry algebra tag");
        }
        FVector { alg, entries }
    }

    pub fn zero(alg: Algebra, len: usize) -> Self {
        FVector {
            alg,
            entries: vec![Scalar::zero(alg); len],
        }
    }

    /// `e_axis` along F-slot `slot`, real direction `axis` within the slot.
    pub fn basis(alg: Algebra, len: usize, slot: usize, axis: usize) -> Self {
        let mut v = FVector::zero(alg, len);
        v.entries[slot] = Scalar::basis(alg, axis);
        v
    }

    pub fn algebra(&self) -> Algebra {
        self.alg
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> Scalar {
        self.entries[i]
    }

    pub fn set_entry(&mut self, i: usize, s: Scalar) {
        assert_eq!(s.algebra(), self.alg, "entry algebra tag");
        self.entries[i] = s;
    }

    /// Left scalar multiple `lambda * v`, entrywise from the left.
    pub fn scale_left(&self, lambda: Scalar) -> FVector {
        FVector {
            alg: self.alg,
            entries: self.entries.iter().map(|&e| lambda * e).collect(),
        }
    }

    /// `sum |z_i|^2`, a real number.
    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl Add for &FVector {
    type Output = FVector;
    fn add(self, rhs: &FVector) -> FVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        FVector {
            alg: self.alg,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &FVector {
    type Output = FVector;
    fn sub(self, rhs: &FVector) -> FVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        FVector {
            alg: self.alg,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &FVector {
    type Output = FVector;
    fn neg(self) -> FVector {
        FVector {
            alg: self.alg,
            entries: self.entries.iter().map(|&e| -e).collect(),
        }
    }
}

/// Standard Hermitian product `<z, w> = sum z_i * conj(w_i)`.
///
/// Panics on mismatched lengths or algebra tags.
pub fn hermitian(z: &FVector, w: &FVector) -> Scalar {
    assert_eq!(z.len(), w.len(), "vector length mismatch in hermitian");
    assert_eq!(z.algebra(), w.algebra(), "algebra tag mismatch in hermitian");
    let mut acc = Scalar::zero(z.algebra());
    for (&a, &b) in z.entries.iter().zip(&w.entries) {
        acc = acc + a * b.conj();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(Algebra::C, &[re, im])
    }

    fn q(w: f64, x: f64, y: f64, z: f64) -> Scalar {
        Scalar::new(Algebra::H, &[w, x, y, z])
    }

    #[test]
    fn complex_i_squared() {
        let i = c(0.0, 1.0);
        assert_eq!(i * i, c(-1.0, 0.0));
    }

    #[test]
    fn quaternion_table() {
        let i = q(0.0, 1.0, 0.0, 0.0);
        let j = q(0.0, 0.0, 1.0, 0.0);
        let k = q(0.0, 0.0, 0.0, 1.0);
        assert_eq!(i * j, k);
        assert_eq!(j * i, -k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(i * i, q(-1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    #[should_panic(expected = "algebra tag mismatch")]
    fn mixed_tags_panic() {
        let _ = c(1.0, 0.0) * Scalar::real(Algebra::R, 1.0);
    }

    #[test]
    fn conj_im_examples() {
        // 3 + 4i -> (3 - 4i, 4i)
        let (cj, im) = c(3.0, 4.0).conj_im();
        assert_eq!(cj, c(3.0, -4.0));
        assert_eq!(im.as_scalar(), c(0.0, 4.0));

        // real scalar has no imaginary part
        let (cj, im) = Scalar::real(Algebra::R, 5.0).conj_im();
        assert_eq!(cj.re(), 5.0);
        assert!(im.is_zero());

        // 1 + i + j -> (1 - i - j, i + j)
        let (cj, im) = q(1.0, 1.0, 1.0, 0.0).conj_im();
        assert_eq!(cj, q(1.0, -1.0, -1.0, 0.0));
        assert_eq!(im.as_scalar(), q(0.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn im_plus_conj_im_is_zero() {
        let x = q(0.3, -1.2, 0.7, 2.5);
        let im = x.im().as_scalar();
        assert!(im.conj() + im == Scalar::zero(Algebra::H));
    }

    #[test]
    fn hermitian_examples() {
        // <(1, i), (i, 0)> = 1 * conj(i) = -i
        let z = FVector::new(Algebra::C, vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let w = FVector::new(Algebra::C, vec![c(0.0, 1.0), c(0.0, 0.0)]);
        assert_eq!(hermitian(&z, &w), c(0.0, -1.0));

        // <z, z> for z = (1, 1) is 2
        let z = FVector::new(Algebra::R, vec![Scalar::real(Algebra::R, 1.0); 2]);
        assert_eq!(hermitian(&z, &z).re(), 2.0);

        // <(i), (j)> = i * (-j) = -k
        let z = FVector::new(Algebra::H, vec![q(0.0, 1.0, 0.0, 0.0)]);
        let w = FVector::new(Algebra::H, vec![q(0.0, 0.0, 1.0, 0.0)]);
        assert_eq!(hermitian(&z, &w), q(0.0, 0.0, 0.0, -1.0));
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn hermitian_length_mismatch_panics() {
        let z = FVector::zero(Algebra::C, 2);
        let w = FVector::zero(Algebra::C, 3);
        let _ = hermitian(&z, &w);
    }

    #[test]
    fn inverse_roundtrip() {
        let x = q(0.5, -1.5, 2.0, 0.25);
        let y = x * x.inv();
        assert!((y - Scalar::one(Algebra::H)).norm() < 1e-15);
    }
}
