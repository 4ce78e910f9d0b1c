//! Discrete groups `E * H`: a lattice of horizontal unit translations and a
//! free product of ball inversions, with fundamental polyhedron membership,
//! reduction to the fundamental domain, generator-wise deformation, Klein
//! combination checks, and the non-triviality and boundary-triviality
//! witnesses.

use crate::algebra::{hermitian, Algebra, Scalar};
use crate::carnot::{
    chart_dim, coord_dist, group_inv, group_mul, kc_dist, translate, CarnotPoint, HalfSpacePoint,
};
use crate::carpet::Carpet;
use crate::error::{Error, Result};
use crate::hyperbolic::{
    ball_from_halfspace, bisector_side, invert_in_ball, translation_length, Ball, Isometry,
    Primitive, Side, TranslationLength,
};
use crate::packing::Packing;
use crate::stretch::StretchMap;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

/// Ball that carries (or, when excluded, withholds) an inversion generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorBall {
    pub ball: Ball,
    /// Index of the owning removed cell in the carpet.
    pub cell: usize,
    pub excluded: bool,
}

/// Generators of `Gamma = E * H` together with the fundamental-domain data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub algebra: Algebra,
    pub n: usize,
    /// Horizontal unit translations, the first one along `e_1`.
    pub generators_e: Vec<CarnotPoint>,
    /// All packing balls; excluded ones generate no inversion.
    pub balls: Vec<GeneratorBall>,
    /// Half-extent of the vertical fundamental box per imaginary axis,
    /// derived from generator commutators.
    pub v_extent: Vec<f64>,
    /// Generator pair and signed spacing realizing each vertical period.
    commutator_basis: Vec<(usize, usize, f64)>,
    /// With no excluded balls the limit set is the whole boundary sphere.
    pub full_sphere_limit_set: bool,
    /// Carpet truncation depth, carried into reports.
    pub depth: usize,
    pub pack_depth: usize,
}

/// Freely reduced word over the generators. Evaluated left to right.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<Letter>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Letter {
    /// `generators_e[gen]` raised to `power`.
    Step { gen: usize, power: i64 },
    /// The involution in `balls[ball]`.
    Inversion { ball: usize },
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Appends a letter, keeping the word freely reduced: adjacent powers of
    /// one translation merge, and a repeated inversion cancels.
    pub fn push(&mut self, letter: Letter) {
        match (self.letters.last_mut(), letter) {
            (Some(Letter::Step { gen: g0, power: p0 }), Letter::Step { gen, power })
                if *g0 == gen =>
            {
                *p0 += power;
                if *p0 == 0 {
                    self.letters.pop();
                }
            }
            (Some(Letter::Inversion { ball: b0 }), Letter::Inversion { ball }) if *b0 == ball => {
                self.letters.pop();
            }
            _ => self.letters.push(letter),
        }
    }

    pub fn inverse(&self) -> Word {
        let mut out = Word::empty();
        for letter in self.letters.iter().rev() {
            out.push(match *letter {
                Letter::Step { gen, power } => Letter::Step { gen, power: -power },
                inv @ Letter::Inversion { .. } => inv,
            });
        }
        out
    }
}

/// Integer power of a Carnot translation: `(xi, v)^k = (k xi, k v)`.
fn power_point(g: &CarnotPoint, k: i64) -> CarnotPoint {
    let kf = k as f64;
    CarnotPoint::new(g.xi.scale_left(Scalar::real(g.algebra(), kf)), g.v.scale(kf))
}

/// Builds `Gamma = E * H` from a carpet and a packing over it.
pub fn build_group(
    alg: Algebra,
    n: usize,
    carpet: &Carpet,
    packing: &Packing,
) -> Result<GroupSpec> {
    if packing.algebra != alg || packing.n != n {
        return Err(Error::CarpetMismatch("packing algebra/rank"));
    }
    if chart_dim(alg, n) != carpet.spec().dim {
        return Err(Error::CarpetMismatch("carpet chart dimension"));
    }
    let mut generators_e = Vec::with_capacity(alg.dim() * (n - 1));
    for slot in 0..n - 1 {
        for axis in 0..alg.dim() {
            generators_e.push(CarnotPoint::new(
                crate::algebra::FVector::basis(alg, n - 1, slot, axis),
                crate::algebra::ImScalar::zero(alg),
            ));
        }
    }
    let (v_extent, commutator_basis) = vertical_box(alg, &generators_e);
    let balls: Vec<GeneratorBall> = packing
        .balls()
        .iter()
        .map(|pb| GeneratorBall {
            ball: pb.ball.clone(),
            cell: pb.cell,
            excluded: pb.excluded,
        })
        .collect();
    let full_sphere = balls.iter().all(|b| !b.excluded);
    Ok(GroupSpec {
        algebra: alg,
        n,
        generators_e,
        balls,
        v_extent,
        commutator_basis,
        full_sphere_limit_set: full_sphere,
        depth: carpet.spec().depth,
        pack_depth: packing.pack_depth,
    })
}

/// Vertical periods from the generator commutators
/// `[g_i, g_j] = (0, 4 Im<xi_i, xi_j>)`; the fundamental box half-extent is
/// half the spacing on each imaginary axis.
fn vertical_box(alg: Algebra, gens: &[CarnotPoint]) -> (Vec<f64>, Vec<(usize, usize, f64)>) {
    let mut extent = vec![f64::INFINITY; alg.im_dim()];
    let mut basis: Vec<(usize, usize, f64)> = vec![(0, 0, 0.0); alg.im_dim()];
    for i in 0..gens.len() {
        for j in 0..gens.len() {
            if i == j {
                continue;
            }
            let comm = hermitian(&gens[i].xi, &gens[j].xi).im().scale(4.0);
            let coords = comm.im_coords();
            for (m, &w) in coords.iter().enumerate() {
                let others_zero = coords
                    .iter()
                    .enumerate()
                    .all(|(mm, &ww)| mm == m || ww.abs() < 1e-12);
                if w > 1e-9 && others_zero && w / 2.0 < extent[m] {
                    extent[m] = w / 2.0;
                    basis[m] = (i, j, w);
                }
            }
        }
    }
    (extent, basis)
}

impl GroupSpec {
    /// Non-excluded balls, the actual inversion generators of `H`.
    pub fn active_balls(&self) -> impl Iterator<Item = (usize, &GeneratorBall)> {
        self.balls.iter().enumerate().filter(|(_, b)| !b.excluded)
    }

    pub fn generator_count(&self) -> (usize, usize) {
        (self.generators_e.len(), self.active_balls().count())
    }

    /// The inversion in ball `i` as a composable isometry.
    pub fn inversion(&self, i: usize) -> Isometry {
        Isometry::identity().then(Primitive::InvertInBall(self.balls[i].ball.clone()))
    }

    /// Fundamental polyhedron `P(Gamma)`: the column over the cube minus the
    /// inside regions of the active generator balls.
    pub fn polyhedron(&self) -> Polyhedron {
        Polyhedron {
            v_extent: self.v_extent.clone(),
            balls: self.active_balls().map(|(_, b)| b.ball.clone()).collect(),
        }
    }

    /// Membership in the closed fundamental polyhedron.
    pub fn in_polyhedron(&self, p: &HalfSpacePoint) -> bool {
        self.polyhedron().contains(p)
    }

    fn xi_chart(&self, p: &HalfSpacePoint) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.generators_e.len());
        for e in p.xi.entries() {
            out.extend_from_slice(&e.coords()[..self.algebra.dim()]);
        }
        out
    }

    /// Strict interior of the column (used by the Klein translate check).
    pub fn in_open_column(&self, p: &HalfSpacePoint) -> bool {
        let xi_ok = self.xi_chart(p).iter().all(|&c| -0.5 < c && c < 0.5);
        let v_ok = p
            .v
            .im_coords()
            .iter()
            .zip(&self.v_extent)
            .all(|(&c, &e)| !e.is_finite() || (-e < c && c < e));
        xi_ok && v_ok
    }

    /// Evaluates a word on a point, letter by letter.
    pub fn apply_word(&self, word: &Word, p: &HalfSpacePoint) -> Result<HalfSpacePoint> {
        let mut q = p.clone();
        for letter in word.letters() {
            q = match *letter {
                Letter::Step { gen, power } => {
                    translate(&power_point(&self.generators_e[gen], power), &q)
                }
                Letter::Inversion { ball } => invert_in_ball(&self.balls[ball].ball, &q)?,
            };
        }
        Ok(q)
    }

    /// Greedy reduction to the fundamental polyhedron.
    ///
    /// While a chart coordinate leaves the cube, steps it back with a lattice
    /// generator (or a commutator block for vertical coordinates); while the
    /// point sits inside an active ball region, applies that inversion.
    /// Returns the word `w` and the representative `q = w^{-1}(p)`, so that
    /// `apply_word(w, q) = p`.
    pub fn reduce(
        &self,
        p: &HalfSpacePoint,
        max_steps: usize,
    ) -> Result<(Word, HalfSpacePoint)> {
        assert!(max_steps >= 1, "max_steps must be positive");
        let mut q = p.clone();
        let mut applied: Vec<Letter> = Vec::new();
        for _ in 0..max_steps {
            let xi = self.xi_chart(&q);
            if let Some((gen, c)) = xi
                .iter()
                .enumerate()
                .find(|(_, &c)| c.abs() > 0.5)
                .map(|(i, &c)| (i, c))
            {
                let k = c.round() as i64;
                let letter = Letter::Step { gen, power: -k };
                q = translate(&power_point(&self.generators_e[gen], -k), &q);
                applied.push(letter);
                continue;
            }
            if let Some((axis, c)) = q
                .v
                .im_coords()
                .iter()
                .zip(&self.v_extent)
                .enumerate()
                .find(|(_, (&c, &e))| e.is_finite() && c.abs() > e)
                .map(|(m, (&c, _))| (m, c))
            {
                let (gi, gj, spacing) = self.commutator_basis[axis];
                let k = (c / spacing.abs()).round() as i64;
                // one commutator block per unit of the period
                for _ in 0..k.unsigned_abs() {
                    let (a, b) = if k > 0 { (gi, gj) } else { (gj, gi) };
                    for letter in [
                        Letter::Step { gen: a, power: -1 },
                        Letter::Step { gen: b, power: -1 },
                        Letter::Step { gen: a, power: 1 },
                        Letter::Step { gen: b, power: 1 },
                    ] {
                        q = match letter {
                            Letter::Step { gen, power } => {
                                translate(&power_point(&self.generators_e[gen], power), &q)
                            }
                            _ => unreachable!(),
                        };
                        applied.push(letter);
                    }
                }
                continue;
            }
            if let Some((i, _)) = self
                .active_balls()
                .find(|(_, b)| bisector_side(&b.ball, &q) == Side::Inside)
            {
                q = invert_in_ball(&self.balls[i].ball, &q)?;
                applied.push(Letter::Inversion { ball: i });
                continue;
            }
            let mut word = Word::empty();
            for letter in applied.iter().rev() {
                word.push(match *letter {
                    Letter::Step { gen, power } => Letter::Step { gen, power: -power },
                    inv @ Letter::Inversion { .. } => inv,
                });
            }
            return Ok((word, q));
        }
        Err(Error::NotConverged(max_steps))
    }

    /// Uniform sample of the closed fundamental column, `u` in `[0, u_max]`.
    pub fn sample_column<R: Rng>(&self, rng: &mut R, u_max: f64) -> HalfSpacePoint {
        let alg = self.algebra;
        let mut chart = Vec::with_capacity(chart_dim(alg, self.n));
        for _ in 0..alg.dim() * (self.n - 1) {
            chart.push(rng.gen_range(-0.5..0.5));
        }
        for m in 0..alg.im_dim() {
            let e = self.v_extent[m].min(2.0);
            chart.push(rng.gen_range(-e..e));
        }
        CarnotPoint::from_chart(alg, self.n, &chart).at_height(rng.gen_range(0.0..u_max))
    }
}

/// Column over the cube minus the inside regions of the generator balls.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    pub v_extent: Vec<f64>,
    pub balls: Vec<Ball>,
}

impl Polyhedron {
    pub fn contains(&self, p: &HalfSpacePoint) -> bool {
        let alg = p.algebra();
        for e in p.xi.entries() {
            for &c in &e.coords()[..alg.dim()] {
                if !(-0.5..=0.5).contains(&c) {
                    return false;
                }
            }
        }
        for (&c, &e) in p.v.im_coords().iter().zip(&self.v_extent) {
            if e.is_finite() && c.abs() > e {
                return false;
            }
        }
        self.balls
            .iter()
            .all(|b| bisector_side(b, p) != Side::Inside)
    }
}

// --- deformation ---

/// Generator-wise deformed group `Gamma_t` together with its stretch map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Deformation {
    pub t: f64,
    pub t1: f64,
    pub stretch: StretchMap,
    pub group: GroupSpec,
}

/// Deforms the group: the first lattice step is scaled to `t_1` and every
/// ball is carried by the Carnot translation matching the stretch of its
/// owning cell. Radii are unchanged.
pub fn deform(base: &GroupSpec, carpet: &Carpet, stretch: StretchMap) -> Result<Deformation> {
    let delta1 = carpet.project_delta1();
    if delta1.len() != stretch.delta1().len()
        || (delta1.measure() - stretch.delta1().measure()).abs() > 1e-12
    {
        return Err(Error::CarpetMismatch("stretch gap set"));
    }
    let alg = base.algebra;
    let t1 = stretch.t1();
    let mut generators_e = base.generators_e.clone();
    generators_e[0] = CarnotPoint::new(
        generators_e[0].xi.scale_left(Scalar::real(alg, t1)),
        generators_e[0].v,
    );
    let mut balls = Vec::with_capacity(base.balls.len());
    for gb in &base.balls {
        let c = stretch.cell_translation(&carpet.cells()[gb.cell])?;
        let shift = CarnotPoint::new(
            crate::algebra::FVector::basis(alg, base.n - 1, 0, 0)
                .scale_left(Scalar::real(alg, c)),
            crate::algebra::ImScalar::zero(alg),
        );
        balls.push(GeneratorBall {
            ball: Ball::new(group_mul(&shift, &gb.ball.center), gb.ball.radius),
            cell: gb.cell,
            excluded: gb.excluded,
        });
    }
    let (v_extent, commutator_basis) = vertical_box(alg, &generators_e);
    Ok(Deformation {
        t: stretch.t(),
        t1,
        group: GroupSpec {
            algebra: alg,
            n: base.n,
            generators_e,
            balls,
            v_extent,
            commutator_basis,
            full_sphere_limit_set: base.full_sphere_limit_set,
            depth: base.depth,
            pack_depth: base.pack_depth,
        },
        stretch,
    })
}

// --- checks and witnesses ---

/// Outcome of the Klein combination checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KleinReport {
    pub seed: u64,
    pub cases: u64,
    pub failures: Vec<String>,
    pub max_deviation: f64,
}

impl KleinReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies on samples that (i) each active inversion maps polyhedron
/// points into its ball region, (ii) the generator balls are pairwise
/// disjoint, and (iii) lattice translates of the open column miss it.
pub fn klein_check(group: &GroupSpec, samples: u64, seed: u64) -> KleinReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut cases = 0u64;

    // (ii) exact pairwise disjointness of active balls
    let active: Vec<(usize, &GeneratorBall)> = group.active_balls().collect();
    for a in 0..active.len() {
        for b in a + 1..active.len() {
            cases += 1;
            let (i, x) = active[a];
            let (j, y) = active[b];
            let d = crate::carnot::kc_dist_boundary(&x.ball.center, &y.ball.center);
            if d <= x.ball.radius + y.ball.radius {
                failures.push(format!(
                    "balls {i} and {j} are not disjoint: centers {d:.6} apart, radii sum {:.6}",
                    x.ball.radius + y.ball.radius
                ));
            }
        }
    }

    // (i) inversions send the polyhedron into the ball regions
    let mut found = 0u64;
    let mut attempts = 0u64;
    while found < samples && attempts < samples * 50 {
        attempts += 1;
        let p = group.sample_column(&mut rng, 1.5);
        if !group.in_polyhedron(&p) {
            continue;
        }
        found += 1;
        for (i, gb) in group.active_balls() {
            cases += 1;
            match invert_in_ball(&gb.ball, &p) {
                Ok(q) => {
                    if bisector_side(&gb.ball, &q) != Side::Inside {
                        failures.push(format!(
                            "inversion {i} left a polyhedron point outside its ball region"
                        ));
                    }
                }
                Err(e) => failures.push(format!("inversion {i} failed: {e}")),
            }
        }
    }

    // (iii) generator translates of the open column are disjoint from it
    for _ in 0..samples {
        let p = group.sample_column(&mut rng, 1.5);
        if !group.in_open_column(&p) {
            continue;
        }
        for (g, gen) in group.generators_e.iter().enumerate() {
            for sign in [1i64, -1] {
                cases += 1;
                let q = translate(&power_point(gen, sign), &p);
                if group.in_open_column(&q) {
                    failures.push(format!(
                        "translate of the open column by generator {g}^{sign} meets it"
                    ));
                }
            }
        }
        for &(gi, gj, spacing) in &group.commutator_basis {
            if spacing == 0.0 {
                continue;
            }
            cases += 1;
            let comm = group_commutator(&group.generators_e[gi], &group.generators_e[gj]);
            let q = translate(&comm, &p);
            if group.in_open_column(&q) {
                failures.push(format!(
                    "vertical commutator translate [{gi},{gj}] of the open column meets it"
                ));
            }
        }
    }

    KleinReport {
        seed,
        cases,
        failures,
        max_deviation: 0.0,
    }
}

fn group_commutator(a: &CarnotPoint, b: &CarnotPoint) -> CarnotPoint {
    group_mul(
        &group_mul(&group_mul(a, b), &group_inv(a)),
        &group_inv(b),
    )
}

/// Maximum deviation of `f_t(gamma p)` from `gamma_t(f_t p)` over sampled
/// points, for every generator. Lattice generators are tested on the whole
/// column; ball inversions on their owning cell columns, where the stretch
/// restricts to the matching translation.
pub fn equivariance_check(
    base: &GroupSpec,
    def: &Deformation,
    carpet: &Carpet,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let f = &def.stretch;
    let mut max_dev: f64 = 0.0;

    for (g, gen) in base.generators_e.iter().enumerate() {
        let gen_t = &def.group.generators_e[g];
        for _ in 0..samples {
            let p = base.sample_column(&mut rng, 2.0);
            let lhs = f.apply_extended(&translate(gen, &p));
            let rhs = translate(gen_t, &f.apply_extended(&p));
            max_dev = max_dev.max(coord_dist(&lhs, &rhs));
        }
    }

    // inversion generators pair the spinal-sphere faces of the polyhedron
    // with themselves; that face is where the conjugation identity lives,
    // since the sphere and its image stay inside the owning cell column
    let alg = base.algebra;
    for (i, gb) in base.balls.iter().enumerate() {
        if gb.excluded {
            continue;
        }
        let ball_t = &def.group.balls[i].ball;
        for _ in 0..samples {
            let unit = crate::hyperbolic::random_unit_sphere_point(alg, base.n, &mut rng);
            let p = gb.ball.boundary_point(&unit).to_boundary();
            let lhs = f.apply_extended(&invert_in_ball(&gb.ball, &p)?);
            let rhs = invert_in_ball(ball_t, &f.apply_extended(&p))?;
            max_dev = max_dev.max(coord_dist(&lhs, &rhs));
        }
    }
    Ok(max_dev)
}

/// Report of the translation-length separation witness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessReport {
    /// Ball indices whose gap components differ.
    pub pair: (usize, usize),
    pub t_a: f64,
    pub t_b: f64,
    pub ell_a: TranslationLength,
    pub ell_b: TranslationLength,
    pub difference: f64,
    pub combined_error: f64,
    /// Separation beyond three times the estimator error.
    pub nontrivial: bool,
}

/// Finds the first pair of active balls projecting to distinct gap
/// components and compares the translation length of the composed
/// inversions under the two deformations.
pub fn nontriviality_witness(
    base: &GroupSpec,
    carpet: &Carpet,
    def_a: &Deformation,
    def_b: &Deformation,
    iterations: u32,
) -> Result<WitnessReport> {
    let delta1 = carpet.project_delta1();
    let active: Vec<usize> = base.active_balls().map(|(i, _)| i).collect();
    let component = |i: usize| -> Option<usize> {
        delta1.component_of(base.balls[i].ball.center.x1())
    };
    let mut pair = None;
    'outer: for (ai, &i) in active.iter().enumerate() {
        for &j in &active[ai + 1..] {
            match (component(i), component(j)) {
                (Some(ci), Some(cj)) if ci != cj => {
                    pair = Some((i, j));
                    break 'outer;
                }
                _ => {}
            }
        }
    }
    let (i, j) = pair.ok_or_else(|| {
        Error::NoWitnessPair(
            "all ball projections share one gap component; increase the depth".into(),
        )
    })?;

    let measure = |def: &Deformation| -> Result<TranslationLength> {
        let bi = &def.group.balls[i].ball;
        let bj = &def.group.balls[j].ball;
        let g = Isometry::identity()
            .then(Primitive::InvertInBall(bj.clone()))
            .then(Primitive::InvertInBall(bi.clone()));
        let ci = bi.center.to_chart();
        let cj = bj.center.to_chart();
        let mid: Vec<f64> = ci.iter().zip(&cj).map(|(&a, &b)| 0.5 * (a + b)).collect();
        let x0 = CarnotPoint::from_chart(def.group.algebra, def.group.n, &mid)
            .at_height(0.5 * (bi.radius + bj.radius));
        let z0 = ball_from_halfspace(&x0);
        // back off when long orbits leave the floating-point range
        let mut n = iterations;
        loop {
            match translation_length(&g, &z0, n) {
                Err(Error::NumericalRange(_)) if n > 4 => n /= 2,
                other => return other,
            }
        }
    };

    let ell_a = measure(def_a)?;
    let ell_b = measure(def_b)?;
    let difference = (ell_a.estimate - ell_b.estimate).abs();
    let combined_error = ell_a.error_bound + ell_b.error_bound + 1e-12;
    Ok(WitnessReport {
        pair: (i, j),
        t_a: def_a.t,
        t_b: def_b.t,
        ell_a,
        ell_b,
        difference,
        combined_error,
        nontrivial: difference > 3.0 * combined_error,
    })
}

/// Report of the boundary-triviality witness for excluded balls.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub seed: u64,
    /// Per excluded ball: cell index and the translation constant.
    pub translations: Vec<(usize, f64)>,
    /// Largest deviation of the stretch from the matching translation on the
    /// excluded cell columns.
    pub max_translation_deviation: f64,
    /// Finite-difference slope failures (expected 1 on the gap set, `t` off
    /// it).
    pub slope_failures: u64,
    pub slope_cases: u64,
    /// Excluded balls generate no inversion.
    pub seeds_have_no_generator: bool,
}

/// Verifies that the deformation restricted to each excluded cell column is
/// one exact Carnot translation, and that the stretch slope differs from 1
/// only over the carpet projection.
pub fn boundary_triviality_check(
    def: &Deformation,
    carpet: &Carpet,
    samples: u64,
    seed: u64,
) -> Result<BoundaryReport> {
    let excluded: Vec<usize> = def
        .group
        .balls
        .iter()
        .enumerate()
        .filter(|(_, b)| b.excluded)
        .map(|(i, _)| i)
        .collect();
    if excluded.is_empty() {
        return Err(Error::InvalidConfig(
            "boundary triviality needs at least one excluded ball".into(),
        ));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let alg = def.group.algebra;
    let n = def.group.n;
    let mut translations = Vec::new();
    let mut max_dev: f64 = 0.0;

    for &i in &excluded {
        let cell = &carpet.cells()[def.group.balls[i].cell];
        let c = def.stretch.cell_translation(cell)?;
        translations.push((def.group.balls[i].cell, c));
        let shift = CarnotPoint::from_chart(
            alg,
            n,
            &{
                let mut chart = vec![0.0; chart_dim(alg, n)];
                chart[0] = c;
                chart
            },
        );
        for _ in 0..samples {
            let chart: Vec<f64> = cell
                .center
                .iter()
                .map(|&cc| cc + rng.gen_range(-0.999..0.999) * cell.half_width)
                .collect();
            let p = CarnotPoint::from_chart(alg, n, &chart)
                .at_height(rng.gen_range(0.0..2.0));
            let stretched = def.stretch.apply(&p)?;
            let translated = translate(&shift, &p);
            max_dev = max_dev.max(coord_dist(&stretched, &translated));
        }
    }

    // slope of psi differs from 1 exactly off the gap set
    let delta1 = def.stretch.delta1().clone();
    let h = 1e-7;
    let mut slope_failures = 0u64;
    let mut slope_cases = 0u64;
    for _ in 0..samples {
        let x = rng.gen_range(-0.5..0.5 - h);
        // skip straddles of a component boundary
        if delta1.contains(x) != delta1.contains(x + h) {
            continue;
        }
        slope_cases += 1;
        let q = (def.stretch.psi(x + h)? - def.stretch.psi(x)?) / h;
        let expected = if delta1.contains(x) { 1.0 } else { def.t };
        if (q - expected).abs() > 1e-3 * (1.0 + expected) {
            slope_failures += 1;
        }
    }

    Ok(BoundaryReport {
        seed,
        translations,
        max_translation_deviation: max_dev,
        slope_failures,
        slope_cases,
        seeds_have_no_generator: excluded
            .iter()
            .all(|&i| def.group.balls[i].excluded),
    })
}

/// Measure bookkeeping for the limit-set side of the polyhedron boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitSetProxy {
    pub carpet_measure: f64,
    pub removed_measure: f64,
    pub coverage: f64,
    /// `1 - coverage * m(Delta) - m(K)`: removed volume not covered by balls.
    pub residual: f64,
}

pub fn limit_set_proxy(carpet: &Carpet, coverage: f64) -> LimitSetProxy {
    let carpet_measure = carpet.spec().measure_exact();
    let removed_measure = 1.0 - carpet_measure;
    LimitSetProxy {
        carpet_measure,
        removed_measure,
        coverage,
        residual: 1.0 - coverage * removed_measure - carpet_measure,
    }
}

/// Versioned serialization record for a group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupArtifact {
    pub format: String,
    pub version: u32,
    pub algebra: Algebra,
    pub n: usize,
    pub depth: usize,
    pub pack_depth: usize,
    pub generators_e: Vec<Vec<f64>>,
    pub ball_count: usize,
    pub excluded: Vec<usize>,
    pub v_extent: Vec<f64>,
    pub full_sphere_limit_set: bool,
}

impl GroupSpec {
    pub fn to_artifact(&self) -> GroupArtifact {
        GroupArtifact {
            format: "nilcarpet/group".into(),
            version: 1,
            algebra: self.algebra,
            n: self.n,
            depth: self.depth,
            pack_depth: self.pack_depth,
            generators_e: self.generators_e.iter().map(|g| g.to_chart()).collect(),
            ball_count: self.balls.len(),
            excluded: self
                .balls
                .iter()
                .enumerate()
                .filter(|(_, b)| b.excluded)
                .map(|(i, _)| i)
                .collect(),
            v_extent: self.v_extent.clone(),
            full_sphere_limit_set: self.full_sphere_limit_set,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carpet::CarpetSpec;
    use crate::packing::pack;

    fn real_setup(k: &[u32], depth: usize, pack_depth: usize) -> (Carpet, Packing, GroupSpec) {
        let spec = CarpetSpec::new(2, k.to_vec(), depth).unwrap();
        let carpet = Carpet::build(spec, 10_000).unwrap();
        let packing = pack(Algebra::R, 3, &carpet, pack_depth, 500);
        let group = build_group(Algebra::R, 3, &carpet, &packing).unwrap();
        (carpet, packing, group)
    }

    #[test]
    fn real_generator_counts() {
        let (_, _, group) = real_setup(&[3], 1, 0);
        let (e, h) = group.generator_count();
        assert_eq!(e, 2);
        assert_eq!(h, 1);
        assert!(group.full_sphere_limit_set);
        assert!(group.v_extent.is_empty());
    }

    #[test]
    fn heisenberg_commutator_box() {
        let spec = CarpetSpec::new(3, vec![3], 1).unwrap();
        let carpet = Carpet::build(spec, 1000).unwrap();
        let packing = pack(Algebra::C, 2, &carpet, 0, 500);
        let group = build_group(Algebra::C, 2, &carpet, &packing).unwrap();
        let (e, h) = group.generator_count();
        assert_eq!(e, 2, "two horizontal unit steps");
        assert_eq!(h, 1);
        assert_eq!(group.v_extent.len(), 1);
        assert!((group.v_extent[0] - 2.0).abs() < 1e-12, "commutator spacing 4");
    }

    #[test]
    fn excluding_all_balls_empties_h() {
        let (carpet, packing, _) = real_setup(&[3], 1, 0);
        let all: Vec<usize> = (0..packing.balls().len()).collect();
        let excluded = packing.exclude(&all).unwrap();
        let group = build_group(Algebra::R, 3, &carpet, &excluded).unwrap();
        assert_eq!(group.generator_count().1, 0);
        assert!(!group.full_sphere_limit_set);
    }

    #[test]
    fn polyhedron_membership() {
        let (_, _, group) = real_setup(&[3], 1, 0);
        let high = CarnotPoint::origin(Algebra::R, 3).at_height(10.0);
        assert!(group.in_polyhedron(&high), "high point clears every ball");
        let center = group.balls[0].ball.center.to_boundary();
        assert!(!group.in_polyhedron(&center), "ball center is inside");
        let outside = CarnotPoint::from_chart(Algebra::R, 3, &[0.7, 0.0]).to_boundary();
        assert!(!group.in_polyhedron(&outside), "outside the column");
    }

    #[test]
    fn word_reduction_rules() {
        let mut w = Word::empty();
        w.push(Letter::Step { gen: 0, power: 1 });
        w.push(Letter::Step { gen: 0, power: -1 });
        assert!(w.is_empty(), "step and inverse cancel");
        w.push(Letter::Inversion { ball: 2 });
        w.push(Letter::Inversion { ball: 2 });
        assert!(w.is_empty(), "involutions cancel");
        w.push(Letter::Step { gen: 1, power: 2 });
        w.push(Letter::Step { gen: 1, power: 3 });
        assert_eq!(w.letters(), &[Letter::Step { gen: 1, power: 5 }]);
    }

    #[test]
    fn apply_word_basics() {
        let (_, _, group) = real_setup(&[3], 1, 0);
        let p = CarnotPoint::from_chart(Algebra::R, 3, &[0.2, -0.3]).at_height(0.7);
        assert_eq!(group.apply_word(&Word::empty(), &p).unwrap(), p);

        let mut w = Word::empty();
        w.push(Letter::Step { gen: 0, power: 1 });
        let q = group.apply_word(&w, &p).unwrap();
        assert!((q.x1() - 1.2).abs() < 1e-15);

        // I I = id within tolerance
        let mut ww = Word::empty();
        ww.letters.push(Letter::Inversion { ball: 0 });
        ww.letters.push(Letter::Inversion { ball: 0 });
        let r = group.apply_word(&ww, &p).unwrap();
        assert!(coord_dist(&r, &p) < 1e-10);
    }

    #[test]
    fn reduce_examples() {
        let (_, _, group) = real_setup(&[3, 9], 2, 0);
        // already reduced
        let p = CarnotPoint::from_chart(Algebra::R, 3, &[0.45, 0.45]).at_height(0.9);
        assert!(group.in_polyhedron(&p));
        let (w, q) = group.reduce(&p, 10).unwrap();
        assert!(w.is_empty());
        assert_eq!(q, p);

        // one lattice step away
        let moved = translate(&group.generators_e[0], &p);
        let (w, q) = group.reduce(&moved, 10).unwrap();
        assert_eq!(w.letters(), &[Letter::Step { gen: 0, power: 1 }]);
        assert!(coord_dist(&q, &p) < 1e-12);
        let back = group.apply_word(&w, &q).unwrap();
        assert!(coord_dist(&back, &moved) < 1e-12);

        // a point pushed inside a ball by an inversion reduces back out
        let inside = CarnotPoint::from_chart(Algebra::R, 3, &[0.01, 0.01]).at_height(0.01);
        let (w, q) = group.reduce(&inside, 50).unwrap();
        assert!(group.in_polyhedron(&q));
        let back = group.apply_word(&w, &q).unwrap();
        assert!(coord_dist(&back, &inside) < 1e-9);
    }

    #[test]
    fn reduce_reports_nonconvergence() {
        let (_, _, group) = real_setup(&[3], 1, 0);
        let far = CarnotPoint::from_chart(Algebra::R, 3, &[25.3, 30.2]).at_height(0.5);
        assert!(matches!(group.reduce(&far, 1), Err(Error::NotConverged(1))));
        assert!(group.reduce(&far, 100).is_ok());
    }

    #[test]
    fn klein_default_passes() {
        let (_, _, group) = real_setup(&[3, 9], 2, 0);
        let report = klein_check(&group, 200, 4);
        assert!(report.passed(), "failures: {:?}", report.failures);
        let again = klein_check(&group, 200, 4);
        assert_eq!(report.failures, again.failures);
        assert_eq!(report.cases, again.cases);
    }

    #[test]
    fn klein_flags_overlapping_balls() {
        let (_, _, mut group) = real_setup(&[3, 9], 2, 0);
        // force an overlap
        group.balls[1].ball = Ball::new(group.balls[0].ball.center.clone(), 0.05);
        let report = klein_check(&group, 50, 4);
        assert!(!report.passed());
        assert!(report.failures.iter().any(|f| f.contains("not disjoint")));
    }

    #[test]
    fn deform_identity_at_t_one() {
        let (carpet, _, group) = real_setup(&[3], 1, 0);
        let stretch = StretchMap::new(1.0, carpet.project_delta1());
        let def = deform(&group, &carpet, stretch).unwrap();
        assert_eq!(def.t1, 1.0);
        assert_eq!(def.group.generators_e, group.generators_e);
        for (a, b) in def.group.balls.iter().zip(&group.balls) {
            assert!(coord_dist(
                &a.ball.center.to_boundary(),
                &b.ball.center.to_boundary()
            ) < 1e-15);
        }
    }

    #[test]
    fn deform_scales_first_step() {
        let (carpet, _, group) = real_setup(&[3], 1, 0);
        let stretch = StretchMap::new(2.0, carpet.project_delta1());
        let def = deform(&group, &carpet, stretch).unwrap();
        assert!((def.t1 - 5.0 / 3.0).abs() < 1e-14);
        assert!((def.group.generators_e[0].x1() - 5.0 / 3.0).abs() < 1e-14);
        // central ball is fixed
        assert!((def.group.balls[0].ball.center.x1()).abs() < 1e-15);
    }

    #[test]
    fn equivariance_exact_over_r() {
        let (carpet, _, group) = real_setup(&[3, 9], 2, 0);
        for t in [0.5, 1.0, 2.0] {
            let stretch = StretchMap::new(t, carpet.project_delta1());
            let def = deform(&group, &carpet, stretch).unwrap();
            let dev = equivariance_check(&group, &def, &carpet, 200, 6).unwrap();
            assert!(dev < 1e-9, "t = {t}: deviation {dev}");
        }
    }

    #[test]
    fn witness_separates_deformations() {
        let (carpet, _, group) = real_setup(&[3, 9], 2, 0);
        let def1 = deform(&group, &carpet, StretchMap::new(1.0, carpet.project_delta1())).unwrap();
        let def2 = deform(&group, &carpet, StretchMap::new(2.0, carpet.project_delta1())).unwrap();
        let report = nontriviality_witness(&group, &carpet, &def1, &def2, 16).unwrap();
        assert!(report.nontrivial, "report: {report:?}");
        assert!(report.difference > 0.5, "difference {}", report.difference);

        // control: equal parameters show no separation
        let def1b = deform(&group, &carpet, StretchMap::new(1.0, carpet.project_delta1())).unwrap();
        let control = nontriviality_witness(&group, &carpet, &def1, &def1b, 16).unwrap();
        assert!(control.difference <= control.combined_error.max(1e-12));
    }

    #[test]
    fn witness_needs_two_components() {
        let (carpet, _, group) = real_setup(&[3], 1, 0);
        let def1 = deform(&group, &carpet, StretchMap::new(1.0, carpet.project_delta1())).unwrap();
        let def2 = deform(&group, &carpet, StretchMap::new(2.0, carpet.project_delta1())).unwrap();
        assert!(matches!(
            nontriviality_witness(&group, &carpet, &def1, &def2, 8),
            Err(Error::NoWitnessPair(_))
        ));
    }

    #[test]
    fn boundary_triviality_on_excluded_cell() {
        let spec = CarpetSpec::new(2, vec![3, 9], 2).unwrap();
        let carpet = Carpet::build(spec, 10_000).unwrap();
        let packing = pack(Algebra::R, 3, &carpet, 0, 500)
            .exclude(&[1])
            .unwrap();
        let group = build_group(Algebra::R, 3, &carpet, &packing).unwrap();
        let def = deform(&group, &carpet, StretchMap::new(2.0, carpet.project_delta1())).unwrap();
        let report = boundary_triviality_check(&def, &carpet, 500, 8).unwrap();
        assert_eq!(report.max_translation_deviation, 0.0, "translation is exact");
        assert_eq!(report.slope_failures, 0);
        assert!(report.seeds_have_no_generator);
        assert!((report.translations[0].1 + 4.0 / 27.0).abs() < 1e-13);
    }

    #[test]
    fn boundary_triviality_requires_exclusions() {
        let (carpet, _, group) = real_setup(&[3], 1, 0);
        let def = deform(&group, &carpet, StretchMap::new(2.0, carpet.project_delta1())).unwrap();
        assert!(boundary_triviality_check(&def, &carpet, 10, 1).is_err());
    }
}
