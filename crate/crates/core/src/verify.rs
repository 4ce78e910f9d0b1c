//! Named property suites binding the module invariants into runnable
//! checks with machine-readable, deterministic reports.

use crate::algebra::{Algebra, Scalar};
use crate::carnot::{
    chart_dim, coord_dist, dilate, kc_dist, kc_norm, translate, CarnotPoint, HalfSpacePoint,
};
use crate::carpet::{Carpet, CarpetSpec};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::groups::{
    boundary_triviality_check, build_group, deform, equivariance_check, klein_check,
    limit_set_proxy, nontriviality_witness, Deformation, GroupSpec,
};
use crate::hyperbolic::{
    ball_from_halfspace, invert_unit, invert_unit_transport, random_unit_sphere_point,
};
use crate::packing::{coverage_mc, pack, Packing, SAFETY};
use crate::stretch::{set_x1, StretchMap};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

pub const SUITE_NAMES: [&str; 9] = [
    "carnot_isometry",
    "inversion_involution",
    "carpet_measure",
    "stretch_exactness",
    "packing_disjoint",
    "klein",
    "equivariance",
    "nontriviality",
    "boundary_trivial",
];

/// One failed case: a description and the observed deviation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Failure {
    pub case: String,
    pub deviation: f64,
}

/// Deterministic machine-readable outcome of one suite run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config_hash: String,
    pub seed: u64,
    pub depth: usize,
    pub pack_depth: usize,
    pub cases: u64,
    pub failures: Vec<Failure>,
    pub max_deviation: f64,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, config: &Config, seed: u64) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            config_hash: config.hash(),
            seed,
            depth: config.depth,
            pack_depth: config.pack_depth,
            cases: 0,
            failures: Vec::new(),
            max_deviation: 0.0,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, case: &str, deviation: f64, tol: f64) {
        self.cases += 1;
        self.max_deviation = self.max_deviation.max(deviation);
        if !(deviation <= tol) {
            self.failures.push(Failure {
                case: case.to_string(),
                deviation,
            });
        }
    }

    fn assert_true(&mut self, case: &str, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures.push(Failure {
                case: case.to_string(),
                deviation: f64::NAN,
            });
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Runs one named suite. The set of names is [`SUITE_NAMES`].
pub fn run_suite(name: &str, config: &Config, seed: u64) -> Result<SuiteReport> {
    match name {
        "carnot_isometry" => carnot_isometry(config, seed),
        "inversion_involution" => inversion_involution(config, seed),
        "carpet_measure" => carpet_measure(config, seed),
        "stretch_exactness" => stretch_exactness(config, seed),
        "packing_disjoint" => packing_disjoint(config, seed),
        "klein" => klein(config, seed),
        "equivariance" => equivariance(config, seed),
        "nontriviality" => nontriviality(config, seed),
        "boundary_trivial" => boundary_trivial(config, seed),
        other => Err(Error::UnknownSuite(other.to_string())),
    }
}

const SUITE_ALGEBRAS: [Algebra; 3] = [Algebra::R, Algebra::C, Algebra::H];

fn random_point(alg: Algebra, n: usize, u_max: f64, rng: &mut StdRng) -> HalfSpacePoint {
    let dim = chart_dim(alg, n);
    let chart: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let u = if u_max > 0.0 { rng.gen_range(0.0..u_max) } else { 0.0 };
    CarnotPoint::from_chart(alg, n, &chart).at_height(u)
}

fn random_scalar(alg: Algebra, rng: &mut StdRng) -> Scalar {
    loop {
        let coords: Vec<f64> = (0..alg.dim()).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let s = Scalar::new(alg, &coords);
        if s.norm() > 0.05 {
            return s;
        }
    }
}

/// Left-translation invariance and dilation similarity of the metric, plus
/// the boundary triangle inequality and horosphere independence.
fn carnot_isometry(config: &Config, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("carnot_isometry", config, seed);
    let tol = config.tolerances.isometry;
    let count = config.samples.suite;
    for alg in SUITE_ALGEBRAS {
        let n = config.n.max(2);
        let mut rng = StdRng::seed_from_u64(seed ^ alg.dim() as u64);
        let mut interior_triangle_violations = 0u64;
        for _ in 0..count {
            let p = random_point(alg, n, 2.0, &mut rng);
            let q = random_point(alg, n, 2.0, &mut rng);
            let g = random_point(alg, n, 0.0, &mut rng).carnot();
            let d = kc_dist(&p, &q);

            let dev = (kc_dist(&translate(&g, &p), &translate(&g, &q)) - d).abs();
            report.check(&format!("{alg}: left invariance"), dev, tol);

            let lam = random_scalar(alg, &mut rng);
            let dev = (kc_dist(&dilate(lam, &p), &dilate(lam, &q)) - lam.norm() * d).abs();
            report.check(&format!("{alg}: dilation similarity"), dev, tol);

            // triangle inequality on the boundary
            let (mut a, mut b, mut c) = (p.clone(), q.clone(), random_point(alg, n, 0.0, &mut rng));
            a.u = 0.0;
            b.u = 0.0;
            c.u = 0.0;
            let excess = kc_dist(&a, &c) - kc_dist(&a, &b) - kc_dist(&b, &c);
            report.check(&format!("{alg}: boundary triangle inequality"), excess, tol);

            // interior triangle behavior is reported, not asserted
            let r = random_point(alg, n, 2.0, &mut rng);
            if kc_dist(&p, &r) > kc_dist(&p, &q) + kc_dist(&q, &r) + tol {
                interior_triangle_violations += 1;
            }
        }
        if interior_triangle_violations > 0 {
            report.notes.push(format!(
                "{alg}: interior triangle inequality violated on {interior_triangle_violations}/{count} samples (not asserted)"
            ));
        }
        // restrictions to horospheres agree
        let mut rng = StdRng::seed_from_u64(seed ^ 0xa5a5);
        for _ in 0..100 {
            let p = random_point(alg, n, 0.0, &mut rng);
            let q = random_point(alg, n, 0.0, &mut rng);
            let base = kc_dist(&p, &q);
            for c in [0.25, 1.0, 7.5] {
                let pc = p.carnot().at_height(c);
                let qc = q.carnot().at_height(c);
                report.check(
                    &format!("{alg}: horosphere restriction at u = {c}"),
                    (kc_dist(&pc, &qc) - base).abs(),
                    tol,
                );
            }
        }
    }
    Ok(report)
}

/// Involution, unit-sphere preservation, hyperchain fixing, pole swap, and
/// agreement of the boundary formula with the projective transport.
fn inversion_involution(config: &Config, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("inversion_involution", config, seed);
    let tol = config.tolerances.inversion;
    let count = config.samples.suite;
    for alg in SUITE_ALGEBRAS {
        let n = config.n.max(2);
        let mut rng = StdRng::seed_from_u64(seed ^ (0x11 * alg.dim() as u64));
        for _ in 0..count {
            let p = random_point(alg, n, 0.0, &mut rng).carnot();
            if kc_norm(&p.to_boundary()) < 0.05 {
                continue;
            }
            let back = invert_unit(&invert_unit(&p)?)?;
            report.check(
                &format!("{alg}: involution"),
                coord_dist(&p.to_boundary(), &back.to_boundary()),
                tol,
            );

            let s = random_unit_sphere_point(alg, n, &mut rng);
            let image = invert_unit(&s)?;
            report.check(
                &format!("{alg}: unit sphere preservation"),
                (kc_norm(&image.to_boundary()) - 1.0).abs(),
                tol,
            );

            // the transport through the projective model agrees on u = 0
            let transported = invert_unit_transport(&p.to_boundary())?;
            report.check(
                &format!("{alg}: boundary cross-check"),
                coord_dist(&invert_unit(&p)?.to_boundary(), &transported),
                config.tolerances.cross_check,
            );
        }

        // hyperchain points (|xi| = 1, v = 0) are fixed up to rounding
        let hdim = alg.dim() * (n - 1);
        for _ in 0..200 {
            let mut chart = vec![0.0; chart_dim(alg, n)];
            loop {
                let mut norm2: f64 = 0.0;
                for c in chart.iter_mut().take(hdim) {
                    *c = rng.gen_range(-1.0..1.0);
                    norm2 += *c * *c;
                }
                if norm2 > 0.01 {
                    let norm = norm2.sqrt();
                    for c in chart.iter_mut().take(hdim) {
                        *c /= norm;
                    }
                    break;
                }
            }
            let s = CarnotPoint::from_chart(alg, n, &chart);
            let fixed = invert_unit(&s)?;
            report.check(
                &format!("{alg}: hyperchain fixed"),
                coord_dist(&s.to_boundary(), &fixed.to_boundary()),
                1e-12,
            );
        }
    }

    // pole swap (0, v) -> (0, -v) is exact over C
    let pole = CarnotPoint::from_chart(Algebra::C, config.n.max(2), &{
        let mut chart = vec![0.0; chart_dim(Algebra::C, config.n.max(2))];
        *chart.last_mut().unwrap() = 1.0;
        chart
    });
    let swapped = invert_unit(&pole)?;
    let expected: Vec<f64> = pole.to_chart().iter().map(|&c| -c).collect();
    report.assert_true(
        "C: pole swap is exact",
        swapped.to_chart() == expected,
    );
    Ok(report)
}

/// Product-formula measure against Monte Carlo for five carpets, the gap
/// projection in closed form, monotonicity, the positivity targets, and the
/// classical carpet's box-counting dimension.
fn carpet_measure(config: &Config, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("carpet_measure", config, seed);
    let mc = config.samples.mc.max(1000);

    let mut specs: Vec<(String, CarpetSpec)> = vec![
        (
            "dim 2, k_j = 3^j, depth 5".into(),
            CarpetSpec::new(2, vec![3, 9, 27, 81, 243], 5)?,
        ),
        (
            "dim 2, classical k = 3, depth 5".into(),
            CarpetSpec::new(2, vec![3; 5], 5)?,
        ),
        ("dim 3, k = (3, 9)".into(), CarpetSpec::new(3, vec![3, 9], 2)?),
        ("dim 2, k = (5, 15)".into(), CarpetSpec::new(2, vec![5, 15], 2)?),
    ];
    specs.push(("configured carpet".into(), config.carpet_spec()?));

    for (idx, (name, spec)) in specs.iter().enumerate() {
        let exact = spec.measure_exact();
        let (est, se) = spec.measure_mc(mc, seed.wrapping_add(idx as u64));
        let dev = (est - exact).abs();
        report.check(
            &format!("measure vs Monte Carlo, {name}"),
            dev,
            3.0 * se.max(1e-12),
        );
    }

    // truncated fat-carpet value at depth 5
    let fat = &specs[0].1;
    report.check(
        "fat carpet measure near 0.8766 at depth 5",
        (fat.measure_exact() - 0.8766).abs(),
        1e-4,
    );

    // positivity targets for k_j = 3^j at every depth up to 6
    let k6: Vec<u32> = (1..=6).map(|j| 3u32.pow(j)).collect();
    for d in 1..=6 {
        let s = CarpetSpec::new(2, k6.clone(), d)?;
        report.assert_true(
            &format!("m(K) >= 0.8765 at depth {d}"),
            s.measure_exact() >= 0.8765,
        );
        report.assert_true(
            &format!("gap complement > 0.56 at depth {d}"),
            1.0 - s.delta1_measure_exact() > 0.56,
        );
    }

    // monotonicity in depth for the configured sequence
    let k = config.resolved_k_seq()?;
    let mut last_m = f64::INFINITY;
    let mut last_d = -1.0;
    for d in 1..=config.depth {
        let s = CarpetSpec::new(config.dim(), k.clone(), d)?;
        report.assert_true(
            &format!("carpet measure decreasing at depth {d}"),
            s.measure_exact() < last_m,
        );
        report.assert_true(
            &format!("gap projection increasing at depth {d}"),
            s.delta1_measure_exact() > last_d,
        );
        last_m = s.measure_exact();
        last_d = s.delta1_measure_exact();
    }

    // gap-projection exactness from the enumerated cells
    let carpet = Carpet::build(config.carpet_spec()?, config.enumeration_cap)?;
    report.check(
        "interval measure of the gap projection",
        (carpet.project_delta1().measure() - carpet.spec().delta1_measure_exact()).abs(),
        config.tolerances.delta1,
    );
    let pair = Carpet::build(CarpetSpec::new(2, vec![3, 9], 2)?, 1000)?;
    report.check(
        "gap projection 11/27 for k = (3, 9)",
        (pair.project_delta1().measure() - 11.0 / 27.0).abs(),
        config.tolerances.delta1,
    );

    // classical control: box-count dimension close to log 8 / log 3
    let classical = CarpetSpec::new(2, vec![3; 4], 4)?;
    let dim_est = classical.box_count_dimension();
    let target = 8.0_f64.ln() / 3.0_f64.ln();
    report.check("classical box-count dimension", (dim_est - target).abs(), 0.05);
    report
        .notes
        .push(format!("classical box-count dimension estimate {dim_est:.4}"));

    // contains agrees with cell enumeration
    let mut rng = StdRng::seed_from_u64(seed ^ 0xca9);
    let spec = carpet.spec().clone();
    for _ in 0..config.samples.suite {
        let x: Vec<f64> = (0..spec.dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let fast = spec.contains(&x)?;
        let slow = !carpet.cells().iter().any(|c| c.contains(&x));
        report.assert_true("membership agrees with enumeration", fast == slow);
    }
    Ok(report)
}

/// psi_1 = id, the closed form of t_1, bit-exact cell translations, the
/// bijection roundtrip, slope bounds, and the empirical boundary distortion.
fn stretch_exactness(config: &Config, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("stretch_exactness", config, seed);
    let carpet = Carpet::build(config.carpet_spec()?, config.enumeration_cap)?;
    let delta1 = carpet.project_delta1();
    let gap = delta1.measure();
    let mut rng = StdRng::seed_from_u64(seed ^ 0x57);

    // identity at t = 1, bitwise
    let id = StretchMap::new(1.0, delta1.clone());
    for _ in 0..1000 {
        let x = rng.gen_range(-0.5..0.5);
        report.assert_true("psi_1 is the identity", id.psi(x)? == x);
    }

    let mut ts = config.t_values.clone();
    ts.push(2.0);
    for &t in &ts {
        let map = StretchMap::new(t, delta1.clone());
        report.check(
            &format!("t1 closed form at t = {t}"),
            (map.t1() - (gap + t * (1.0 - gap))).abs(),
            config.tolerances.stretch,
        );

        // every removed cell moves by one exact translation
        for cell in carpet.cells().iter().take(60) {
            let c = map.cell_translation(cell)?;
            for _ in 0..50 {
                let chart: Vec<f64> = cell
                    .center
                    .iter()
                    .map(|&cc| cc + rng.gen_range(-0.999..0.999) * cell.half_width)
                    .collect();
                let p = CarnotPoint::from_chart(config.algebra, config.n, &chart)
                    .at_height(rng.gen_range(0.0..1.0));
                let stretched = map.apply(&p)?;
                let translated = set_x1(&p, p.x1() + c);
                report.assert_true(
                    "cell restriction equals its translation bitwise",
                    stretched == translated,
                );
            }
        }

        // bijection roundtrip
        let (lo, hi) = (map.psi(-0.5)?, map.psi(0.5)?);
        for _ in 0..2000 {
            let y = rng.gen_range(lo..hi);
            report.check(
                &format!("psi inverse roundtrip at t = {t}"),
                (map.psi(map.psi_inv(y)?)? - y).abs(),
                1e-14,
            );
        }

        // difference quotients stay between the slopes
        let h = 1e-6;
        for _ in 0..2000 {
            let x = rng.gen_range(-0.5..0.5 - h);
            let q = (map.psi(x + h)? - map.psi(x)?) / h;
            let (lo_s, hi_s) = (t.min(1.0), t.max(1.0));
            report.assert_true(
                "difference quotient between slopes",
                (lo_s - 1e-6..=hi_s + 1e-6).contains(&q),
            );
        }
    }

    // empirical boundary distortion of f_t, reported only
    let map = StretchMap::new(2.0, delta1);
    let mut max_ratio: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..2000 {
        let p = random_point(config.algebra, config.n, 0.0, &mut rng);
        let q = random_point(config.algebra, config.n, 0.0, &mut rng);
        let (p, q) = (clamp_column(&p), clamp_column(&q));
        let d = kc_dist(&p, &q);
        if d < 1e-6 {
            continue;
        }
        let ratio = kc_dist(&map.apply(&p)?, &map.apply(&q)?) / d;
        max_ratio = max_ratio.max(ratio);
        min_ratio = min_ratio.min(ratio);
    }
    report.notes.push(format!(
        "boundary distortion of f_2: ratio range [{min_ratio:.4}, {max_ratio:.4}] (slope band [1, 2])"
    ));
    Ok(report)
}

fn clamp_column(p: &HalfSpacePoint) -> HalfSpacePoint {
    set_x1(p, p.x1().clamp(-0.5, 0.5))
}

/// Exact pairwise disjointness, sphere classification, in-cell containment,
/// coverage determinism, and the analytic coverage anchor over R.
fn packing_disjoint(config: &Config, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("packing_disjoint", config, seed);
    let carpet = Carpet::build(config.carpet_spec()?, config.enumeration_cap)?;
    let packing = pack(
        config.algebra,
        config.n,
        &carpet,
        config.pack_depth,
        config.samples.inradius,
    );

    report.assert_true(
        "pairwise disjointness is exact",
        packing.disjointness_violations().is_empty(),
    );
    report.assert_true(
        "one ball per cell at pack depth 0",
        config.pack_depth != 0 || packing.balls().len() == carpet.cells().len(),
    );

    let mut rng = StdRng::seed_from_u64(seed ^ 0xba11);
    for pb in packing.balls().iter().take(40) {
        let cell = &carpet.cells()[pb.cell];
        for _ in 0..50 {
            // boundary points classify "on" the bisector sphere
            let unit = random_unit_sphere_point(config.algebra, config.n, &mut rng);
            let on = pb.ball.boundary_point(&unit).to_boundary();
            report.check(
                "sphere sample classifies on",
                (pb.ball.gauge_of(&on) - 1.0).abs(),
                1e-10,
            );
            // interior points stay inside the owning cell
            let rho: f64 = rng.gen_range(0.0..1.0);
            let scaled = dilate(
                Scalar::real(config.algebra, rho * pb.ball.radius),
                &unit.to_boundary(),
            );
            let inside = translate(&pb.ball.center, &scaled);
            let chart = inside.carnot().to_chart();
            let contained = chart
                .iter()
                .zip(&cell.center)
                .all(|(&x, &c)| (x - c).abs() <= cell.half_width);
            report.assert_true("ball stays in its removed cell", contained);
        }
    }

    let a = coverage_mc(&packing, &carpet, config.samples.mc, seed);
    let b = coverage_mc(&packing, &carpet, config.samples.mc, seed);
    report.assert_true("coverage is reproducible bit for bit", a == b);
    report
        .notes
        .push(format!("coverage {:.4} +- {:.4} at pack depth {}", a.0, a.1, config.pack_depth));
    let proxy = limit_set_proxy(&carpet, a.0);
    report.notes.push(format!(
        "limit-set proxy: carpet {:.4}, removed {:.4}, uncovered residual {:.4}",
        proxy.carpet_measure, proxy.removed_measure, proxy.residual
    ));

    // analytic anchor: single ball over R, area ratio pi (SAFETY/6)^2 / (1/9)
    let anchor_carpet = Carpet::build(CarpetSpec::new(2, vec![3], 1)?, 100)?;
    let anchor = pack(Algebra::R, 3, &anchor_carpet, 0, 100);
    let (cov, se) = coverage_mc(&anchor, &anchor_carpet, config.samples.mc, seed);
    let expected = std::f64::consts::PI * (SAFETY / 6.0).powi(2) / (1.0 / 9.0);
    report.check(
        "depth-0 coverage matches the area ratio over R",
        (cov - expected).abs(),
        3.0 * se,
    );

    // regression floor for the documented configuration
    let reg_carpet = Carpet::build(CarpetSpec::new(2, vec![3, 9], 2)?, 1000)?;
    let reg = pack(Algebra::R, 3, &reg_carpet, 2, config.samples.inradius);
    let (cov, _) = coverage_mc(&reg, &reg_carpet, config.samples.mc, seed);
    report.assert_true("coverage floor 0.5 at (D, d) = (2, 2)", cov > 0.5);
    report.notes.push(format!("regression coverage {cov:.4}"));
    Ok(report)
}

fn built_group(config: &Config) -> Result<(Carpet, Packing, GroupSpec)> {
    let carpet = Carpet::build(config.carpet_spec()?, config.enumeration_cap)?;
    let mut packing = pack(
        config.algebra,
        config.n,
        &carpet,
        config.pack_depth,
        config.samples.inradius,
    );
    if !config.excluded_balls.is_empty() {
        packing = packing.exclude(&config.excluded_balls)?;
    }
    let group = build_group(config.algebra, config.n, &carpet, &packing)?;
    Ok((carpet, packing, group))
}

fn deformation_at(group: &GroupSpec, carpet: &Carpet, t: f64) -> Result<Deformation> {
    deform(group, carpet, StretchMap::new(t, carpet.project_delta1()))
}

/// Klein combination checks plus the no-hidden-relations and orbit
/// disjointness sampling.
fn klein(config: &Config, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("klein", config, seed);
    let (carpet, _, group) = built_group(config)?;
    let inner = klein_check(&group, (config.samples.suite / 10).max(50), seed);
    report.cases += inner.cases;
    for f in &inner.failures {
        report.failures.push(Failure {
            case: f.clone(),
            deviation: f64::NAN,
        });
    }

    // the deformed group passes the same checks
    let def = deformation_at(&group, &carpet, *config.t_values.last().unwrap())?;
    let deformed = klein_check(&def.group, (config.samples.suite / 10).max(50), seed ^ 1);
    report.cases += deformed.cases;
    for f in &deformed.failures {
        report.failures.push(Failure {
            case: format!("deformed: {f}"),
            deviation: f64::NAN,
        });
    }

    // no hidden relations: short random reduced words move a base point
    let mut rng = StdRng::seed_from_u64(seed ^ 0x3e1);
    let base = CarnotPoint::from_chart(config.algebra, config.n, &{
        let mut c = vec![0.31; chart_dim(config.algebra, config.n)];
        c[0] = 0.47;
        c
    })
    .at_height(0.8);
    let (e_count, h_count) = group.generator_count();
    let active: Vec<usize> = group.balls.iter().enumerate().filter(|(_, b)| !b.excluded).map(|(i, _)| i).collect();
    for _ in 0..200 {
        let len = rng.gen_range(1..=6usize);
        let mut word = crate::groups::Word::empty();
        for _ in 0..len {
            if h_count > 0 && rng.gen_bool(0.5) {
                word.push(crate::groups::Letter::Inversion {
                    ball: active[rng.gen_range(0..active.len())],
                });
            } else {
                let gen = rng.gen_range(0..e_count);
                let power = if rng.gen_bool(0.5) { 1 } else { -1 };
                word.push(crate::groups::Letter::Step { gen, power });
            }
        }
        if word.is_empty() {
            continue;
        }
        match group.apply_word(&word, &base) {
            Ok(moved) => {
                let displacement = kc_dist(&moved, &base);
                report.assert_true(
                    "reduced word displaces the base point",
                    displacement > 1e-6,
                );
            }
            Err(_) => report.assert_true("word evaluation stays regular", false),
        }
    }

    // orbit disjointness: images of the open polyhedron under distinct short
    // words stay apart, tested via w2^{-1} w1 leaving the polyhedron
    let mut polyhedron_samples = Vec::new();
    let mut attempts = 0;
    while polyhedron_samples.len() < 40 && attempts < 4000 {
        attempts += 1;
        let p = group.sample_column(&mut rng, 1.0);
        if group.in_polyhedron(&p) {
            polyhedron_samples.push(p);
        }
    }
    let mut words: Vec<crate::groups::Word> = Vec::new();
    for gen in 0..e_count.min(2) {
        for power in [1i64, -1] {
            let mut w = crate::groups::Word::empty();
            w.push(crate::groups::Letter::Step { gen, power });
            words.push(w);
        }
    }
    for &b in active.iter().take(3) {
        let mut w = crate::groups::Word::empty();
        w.push(crate::groups::Letter::Inversion { ball: b });
        words.push(w);
    }
    for w1 in &words {
        for w2 in &words {
            // w1 first, then w2^{-1}: images of the polyhedron under w1 and
            // w2 are disjoint iff this relator maps its interior off itself
            let mut rel = w1.clone();
            for &l in w2.inverse().letters() {
                rel.push(l);
            }
            if rel.is_empty() {
                continue;
            }
            for p in polyhedron_samples.iter().take(10) {
                if let Ok(moved) = group.apply_word(&rel, p) {
                    // interior samples must leave the open polyhedron
                    let interior = group.in_open_column(&moved)
                        && group
                            .polyhedron()
                            .balls
                            .iter()
                            .all(|b| crate::hyperbolic::bisector_side(b, &moved)
                                == crate::hyperbolic::Side::Outside);
                    report.assert_true("orbit images of the polyhedron are disjoint", !interior);
                }
            }
        }
    }
    report.notes.push(format!(
        "limit set flagged full sphere: {}",
        group.full_sphere_limit_set
    ));
    Ok(report)
}

/// Generator-wise equivariance of the stretch at t in {0.5, 1, 2}.
fn equivariance(config: &Config, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("equivariance", config, seed);
    let (carpet, _, group) = built_group(config)?;
    for t in [0.5, 1.0, 2.0] {
        let def = deformation_at(&group, &carpet, t)?;
        let dev = equivariance_check(&group, &def, &carpet, 1000, seed)?;
        report.check(
            &format!("equivariance at t = {t}"),
            dev,
            config.tolerances.equivariance,
        );
    }
    Ok(report)
}

/// Translation-length separation between two deformations, with the equal-t
/// control and, over R, the inversive-distance closed form as oracle.
fn nontriviality(config: &Config, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("nontriviality", config, seed);
    let (carpet, _, group) = built_group(config)?;
    let def1 = deformation_at(&group, &carpet, 1.0)?;
    let def2 = deformation_at(&group, &carpet, 2.0)?;
    let iterations = config.samples.witness_iterations;
    let witness = nontriviality_witness(&group, &carpet, &def1, &def2, iterations)?;
    report.assert_true(
        "translation lengths separate beyond three estimator errors",
        witness.nontrivial,
    );
    report.notes.push(format!(
        "pair {:?}: ell(1) = {:.6} +- {:.2e}, ell(2) = {:.6} +- {:.2e}, difference {:.6}",
        witness.pair,
        witness.ell_a.estimate,
        witness.ell_a.error_bound,
        witness.ell_b.estimate,
        witness.ell_b.error_bound,
        witness.difference
    ));

    // control: identical parameters agree within the estimator error
    let def1b = deformation_at(&group, &carpet, 1.0)?;
    let control = nontriviality_witness(&group, &carpet, &def1, &def1b, iterations)?;
    report.assert_true(
        "equal-parameter control shows no separation",
        control.difference <= control.combined_error.max(1e-12),
    );

    // swapping the pair leaves the length unchanged (inverse conjugacy)
    let swapped = {
        let bi = &def2.group.balls[witness.pair.0].ball;
        let bj = &def2.group.balls[witness.pair.1].ball;
        use crate::hyperbolic::{translation_length, Isometry, Primitive};
        let g = Isometry::identity()
            .then(Primitive::InvertInBall(bi.clone()))
            .then(Primitive::InvertInBall(bj.clone()));
        let mid: Vec<f64> = bi
            .center
            .to_chart()
            .iter()
            .zip(&bj.center.to_chart())
            .map(|(&a, &b)| 0.5 * (a + b))
            .collect();
        let x0 = CarnotPoint::from_chart(config.algebra, config.n, &mid)
            .at_height(0.5 * (bi.radius + bj.radius));
        translation_length(&g, &ball_from_halfspace(&x0), iterations)?
    };
    report.check(
        "inverse order gives the same length",
        (swapped.estimate - witness.ell_b.estimate).abs(),
        3.0 * (swapped.error_bound + witness.ell_b.error_bound) + 1e-9,
    );

    if config.algebra == Algebra::R {
        for (def, measured) in [(&def1, &witness.ell_a), (&def2, &witness.ell_b)] {
            let bi = &def.group.balls[witness.pair.0].ball;
            let bj = &def.group.balls[witness.pair.1].ball;
            let d2: f64 = bi
                .center
                .to_chart()
                .iter()
                .zip(&bj.center.to_chart())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            let inversive = (d2 - bi.radius * bi.radius - bj.radius * bj.radius)
                / (2.0 * bi.radius * bj.radius);
            // dist doubles the hyperboloid-model distance (the ball chart is
            // the Klein ball: d(0, 1/2) = ln 3 = 2 artanh(1/2)), so the
            // composed reflections translate by 2 * 2 * arccosh(I)
            let closed = 4.0 * inversive.acosh();
            report.check(
                &format!("closed-form length oracle at t = {}", def.t),
                (measured.estimate - closed).abs(),
                3.0 * measured.error_bound + 1e-6,
            );
        }
    }
    Ok(report)
}

/// Exact translation on excluded cell columns and slope localization.
fn boundary_trivial(config: &Config, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("boundary_trivial", config, seed);
    let carpet = Carpet::build(config.carpet_spec()?, config.enumeration_cap)?;
    let mut packing = pack(
        config.algebra,
        config.n,
        &carpet,
        config.pack_depth,
        config.samples.inradius,
    );
    let t = config
        .t_values
        .iter()
        .copied()
        .find(|&t| t != 1.0)
        .unwrap_or(2.0);
    if config.excluded_balls.is_empty() {
        // pick the first ball whose cell actually moves under the stretch
        let probe = StretchMap::new(t, carpet.project_delta1());
        let idx = packing
            .balls()
            .iter()
            .position(|pb| {
                probe
                    .cell_translation(&carpet.cells()[pb.cell])
                    .map(|c| c != 0.0)
                    .unwrap_or(false)
            })
            .unwrap_or(0);
        packing = packing.exclude(&[idx])?;
    } else {
        packing = packing.exclude(&config.excluded_balls)?;
    }
    let group = build_group(config.algebra, config.n, &carpet, &packing)?;
    let def = deformation_at(&group, &carpet, t)?;
    let inner = boundary_triviality_check(&def, &carpet, config.samples.suite.min(1000), seed)?;
    report.check(
        "excluded columns move by one exact translation",
        inner.max_translation_deviation,
        0.0,
    );
    report.assert_true("slopes differ from 1 only off the gap set", inner.slope_failures == 0);
    report.assert_true("excluded balls carry no generator", inner.seeds_have_no_generator);
    report.cases += inner.slope_cases;
    for (cell, c) in &inner.translations {
        report
            .notes
            .push(format!("cell {cell}: translation constant {c:.6} at t = {t}"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> Config {
        let mut cfg = Config::default();
        cfg.k_seq = Some(vec![3, 9]);
        cfg.k_base = None;
        cfg.depth = 2;
        cfg.samples.mc = 20_000;
        cfg.samples.suite = 300;
        cfg.samples.inradius = 500;
        cfg.samples.witness_iterations = 16;
        cfg.validate().unwrap();
        cfg
    }

    #[test]
    fn unknown_suite_is_an_error() {
        let cfg = quick_config();
        assert!(matches!(
            run_suite("no_such_suite", &cfg, 1),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn all_suites_pass_on_the_default_real_config() {
        let cfg = quick_config();
        for name in SUITE_NAMES {
            let report = run_suite(name, &cfg, 11).unwrap();
            assert!(
                report.passed(),
                "suite {name} failed: {:?}",
                report.failures.iter().take(3).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = quick_config();
        let a = run_suite("carnot_isometry", &cfg, 5).unwrap().to_json();
        let b = run_suite("carnot_isometry", &cfg, 5).unwrap().to_json();
        assert_eq!(a, b);
    }
}
