//! The acceptance suite: ten criteria, each a self-contained randomized
//! experiment with its own seeded generator.

use std::time::Instant;

use czreach::algebra::*;
use czreach::learning::{
    concat_noise, model_set_lti, model_set_poly, refine, ModelSet, MonomialBasis,
};
use czreach::oracle::*;
use czreach::reach::{
    monomial_image_compact, run_lti, run_poly_data, run_poly_model, step_lti, ReachConfig,
    ReachResult,
};
use czreach::systems::*;
use czreach::{Cpmz, Cpz, FactorAssignment, FactorId, FEASIBILITY_TOL};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::experiments::run_demo;
use crate::output::sets_and_models;

pub const CRITERIA: [&str; 10] = [
    "algebraic exactness",
    "generator and constraint accounting",
    "mergeID fidelity",
    "LTI model-set witness",
    "polynomial model-set witness",
    "intersection and refinement",
    "end-to-end witness propagation",
    "conservatism against the interval baseline",
    "reduction soundness",
    "determinism",
];

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

struct Check {
    passed: bool,
    detail: String,
}

impl Check {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

type Outcome = Result<Check, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Runs criterion `id` (1-based) with a generator derived from `seed`.
pub fn run_criterion(id: usize, seed: u64) -> CriterionResult {
    assert!((1..=10).contains(&id), "criteria are numbered 1..=10");
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(id as u64));
    let outcome = match id {
        1 => algebraic_exactness(&mut rng),
        2 => accounting(&mut rng),
        3 => merge_fidelity(),
        4 => lti_model_witness(&mut rng),
        5 => poly_model_witness(&mut rng),
        6 => intersection_and_refinement(&mut rng),
        7 => witness_propagation(&mut rng),
        8 => conservatism(&mut rng),
        9 => reduction_soundness(&mut rng),
        _ => determinism(seed),
    };
    let (passed, detail) = match outcome {
        Ok(c) => (c.passed, c.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name: CRITERIA[id - 1],
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// All criteria on a pool of at most `threads` workers, reported in order.
pub fn run_all(seed: u64, threads: usize) -> Vec<CriterionResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        (1..=10)
            .into_par_iter()
            .map(|id| run_criterion(id, seed))
            .collect()
    })
}

pub fn report(results: &[CriterionResult]) -> String {
    let mut out: String = results.iter().map(|r| r.line() + "\n").collect();
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
    out
}

const EXACT_TOL: f64 = 1e-10;
const WITNESS_TOL: f64 = 1e-8;

/// Two overlapping id pools and a witness over both.
struct Operands {
    sigma: FactorAssignment,
    pool1: Vec<FactorId>,
    pool2: Vec<FactorId>,
}

fn operands<R: Rng>(rng: &mut R) -> Operands {
    let all: Vec<FactorId> = (1..=8).map(FactorId).collect();
    let split = rng.random_range(0..=4);
    Operands {
        sigma: random_assignment(&all, rng),
        pool1: all[..4].to_vec(),
        pool2: all[split..split + 4].to_vec(),
    }
}

fn deviation(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    (a - b).amax()
}

const OPS: [&str; 7] = ["⊗", "⊞", "⊠", "⊙", "pow", "project", "map_linear"];

/// `(max pointwise error, max constraint residual)` of one random instance of `op`.
fn exactness_case<R: Rng>(op: usize, rng: &mut R) -> Result<(f64, f64), String> {
    let o = operands(rng);
    let spec = InstanceSpec::default();
    let n = rng.random_range(1..=5);
    let cpz = |second: bool, dim: usize, rng: &mut R| {
        let pool = if second { &o.pool2 } else { &o.pool1 };
        random_cpz(dim, pool, &o.sigma, &spec, rng)
    };
    let s = &o.sigma;
    let (out, expect) = match op {
        0 => {
            let m = rng.random_range(1..=5);
            let y = random_cpmz(m, n, &o.pool1, s, &spec, rng);
            let p = cpz(true, n, rng);
            let expect = y.eval_matrix(s).map_err(err)? * p.eval_point(s).map_err(err)?;
            (mul_cpmz_cpz(&y, &p).map_err(err)?, expect)
        }
        1 => {
            let (a, b) = (cpz(false, n, rng), cpz(true, n, rng));
            let expect = a.eval_point(s).map_err(err)? + b.eval_point(s).map_err(err)?;
            (add_exact(&a, &b).map_err(err)?, expect)
        }
        2 => {
            let w = rng.random_range(1..=5);
            let (a, b) = (cpz(false, n, rng), cpz(true, w, rng));
            let (x, y) = (a.eval_point(s).map_err(err)?, b.eval_point(s).map_err(err)?);
            let expect = DVector::from_iterator(n + w, x.iter().chain(y.iter()).copied());
            (cartesian_exact(&a, &b), expect)
        }
        3 => {
            let (a, b) = (cpz(false, n, rng), cpz(true, n, rng));
            let expect = a
                .eval_point(s)
                .map_err(err)?
                .component_mul(&b.eval_point(s).map_err(err)?);
            (hadamard_exact(&a, &b).map_err(err)?, expect)
        }
        4 => {
            let e = rng.random_range(0..=3u32);
            let a = cpz(false, n, rng);
            let expect = a.eval_point(s).map_err(err)?.map(|v| v.powi(e as i32));
            (pow_exact(&a, e), expect)
        }
        5 => {
            let a = cpz(false, n, rng);
            let mut idx: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
            if idx.is_empty() {
                idx.push(rng.random_range(0..n));
            }
            if rng.random_bool(0.5) {
                idx.reverse();
            }
            let expect = a.eval_point(s).map_err(err)?.select_rows(&idx);
            (project(&a, &idx).map_err(err)?, expect)
        }
        _ => {
            let a = cpz(false, n, rng);
            let m = DMatrix::from_fn(rng.random_range(1..=5), n, |_, _| {
                rng.random_range(-2.0..=2.0)
            });
            let expect = &m * a.eval_point(s).map_err(err)?;
            (map_linear(&m, &a).map_err(err)?, expect)
        }
    };
    let got = out.eval_point(s).map_err(err)?;
    Ok((
        deviation(&got, &expect),
        out.constraint_residual(s).map_err(err)?,
    ))
}

fn algebraic_exactness(rng: &mut ChaCha8Rng) -> Outcome {
    const CASES: usize = 1000;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (op, name) in OPS.iter().enumerate() {
        let mut bad = 0;
        for _ in 0..CASES {
            let (e, res) = exactness_case(op, rng)?;
            worst = worst.max(e);
            if e > EXACT_TOL || res > FEASIBILITY_TOL {
                bad += 1;
            }
        }
        if bad > 0 {
            failures.push(format!("{name}: {bad}"));
        }
    }
    Ok(Check::new(
        failures.is_empty(),
        format!(
            "{} ops x {CASES} cases, max error {worst:.1e}{}",
            OPS.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(", failures {}", failures.join(", "))
            }
        ),
    ))
}

/// Deviations of the block sizes from the closed-form counts on one instance.
fn accounting_case<R: Rng>(rng: &mut R) -> Result<Vec<String>, String> {
    let o = operands(rng);
    let spec = InstanceSpec::default();
    let n = rng.random_range(1..=5);
    let s = &o.sigma;
    let mut bad = Vec::new();
    let mut expect = |what: &str, got: usize, want: usize| {
        if got != want {
            bad.push(format!("{what}: {got} != {want}"));
        }
    };
    let p1 = random_cpz(n, &o.pool1, s, &spec, rng);
    let p2 = random_cpz(n, &o.pool2, s, &spec, rng);
    let (h1, h2) = (p1.num_generators(), p2.num_generators());
    let (q1, q2) = (p1.num_constraint_terms(), p2.num_constraint_terms());
    let (c1, c2) = (p1.num_constraints(), p2.num_constraints());

    let m = rng.random_range(1..=5);
    let y = random_cpmz(m, n, &o.pool1, s, &spec, rng);
    let gamma = y.num_generators();
    let prod = mul_cpmz_cpz(&y, &p2).map_err(err)?;
    expect(
        "⊗ generators",
        prod.num_generators(),
        gamma + h2 + gamma * h2,
    );
    expect(
        "⊗ constraint terms",
        prod.num_constraint_terms(),
        y.num_constraint_terms() + q2,
    );
    expect(
        "⊗ constraint rows",
        prod.num_constraints(),
        y.num_constraint_rows() + c2,
    );

    let had = hadamard_exact(&p1, &p2).map_err(err)?;
    expect("⊙ generators", had.num_generators(), h1 + h2 + h1 * h2);
    expect("⊙ constraint terms", had.num_constraint_terms(), q1 + q2);
    expect("⊙ constraint rows", had.num_constraints(), c1 + c2);

    let sum = add_exact(&p1, &p2).map_err(err)?;
    expect("⊞ generators", sum.num_generators(), h1 + h2);
    expect("⊞ constraint rows", sum.num_constraints(), c1 + c2);
    let cart = cartesian_exact(&p1, &p2);
    expect("⊠ generators", cart.num_generators(), h1 + h2);
    expect("⊠ dimension", cart.dim(), 2 * n);
    expect("⊠ constraint terms", cart.num_constraint_terms(), q1 + q2);

    let e = rng.random_range(1..=3u32);
    let pw = pow_exact(&p1, e);
    let mut count = h1;
    for _ in 1..e {
        count = count + h1 + count * h1;
    }
    expect("pow generators", pw.num_generators(), count);
    expect("pow constraint rows", pw.num_constraints(), c1 * e as usize);

    let y2 = random_cpmz(m, n, &o.pool2, s, &spec, rng);
    let cap = intersect_cpmz(&y, &y2).map_err(err)?;
    expect("∩ generators", cap.num_generators(), gamma);
    expect(
        "∩ constraint terms",
        cap.num_constraint_terms(),
        y.num_constraint_terms() + y2.num_constraint_terms() + gamma + y2.num_generators(),
    );
    expect(
        "∩ constraint rows",
        cap.num_constraint_rows(),
        y.num_constraint_rows() + y2.num_constraint_rows() + m * n,
    );
    Ok(bad)
}

fn accounting(rng: &mut ChaCha8Rng) -> Outcome {
    const CASES: usize = 200;
    let mut deviations = Vec::new();
    for case in 0..CASES {
        for d in accounting_case(rng)? {
            deviations.push(format!("case {case}: {d}"));
        }
    }
    Ok(Check::new(
        deviations.is_empty(),
        if deviations.is_empty() {
            format!("{CASES} cases, ⊗ ⊙ ⊞ ⊠ pow ∩, zero deviations")
        } else {
            format!("{} deviations, first {}", deviations.len(), deviations[0])
        },
    ))
}

fn ids(v: &[u64]) -> Vec<FactorId> {
    v.iter().copied().map(FactorId).collect()
}

/// The two printed example sets with ids `[1, 2]` and `[1, 3]`.
pub fn example_pair() -> (Cpz, Cpz) {
    let p1 = Cpz::new(
        DVector::from_vec(vec![0.0, 2.0, 1.0]),
        DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 3.0, 2.0, 1.0, 5.0]),
        DMatrix::from_row_slice(2, 2, &[4, 1, 0, 2]),
        DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 0.0, 3.0, 4.0]),
        DVector::from_vec(vec![2.0, 0.0, 2.0]),
        DMatrix::from_row_slice(2, 2, &[4, 2, 0, 2]),
        ids(&[1, 2]),
    )
    .expect("printed set is well formed");
    let p2 = Cpz::new(
        DVector::from_vec(vec![3.0, 3.0, 4.0]),
        DMatrix::from_row_slice(3, 2, &[2.0, 2.0, 3.0, 0.0, 1.0, 4.0]),
        DMatrix::from_row_slice(2, 2, &[3, 2, 3, 0]),
        DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]),
        DVector::from_vec(vec![2.0, 5.0]),
        DMatrix::from_row_slice(2, 2, &[2, 0, 2, 3]),
        ids(&[1, 3]),
    )
    .expect("printed set is well formed");
    (p1, p2)
}

fn merge_fidelity() -> Outcome {
    let (p1, p2) = example_pair();
    let m = merge_id(&p1, &p2);
    let printed = [
        ("E1", m.first.e(), [4, 1, 0, 2, 0, 0]),
        ("R1", m.first.r(), [4, 2, 0, 2, 0, 0]),
        ("E2", m.second.e(), [3, 2, 0, 0, 3, 0]),
        ("R2", m.second.r(), [2, 0, 0, 0, 2, 3]),
    ];
    let mut bad: Vec<&str> = printed
        .iter()
        .filter(|(_, got, want)| **got != DMatrix::from_row_slice(3, 2, want))
        .map(|(name, _, _)| *name)
        .collect();
    if m.shared_id != ids(&[1, 2, 3]) {
        bad.push("id");
    }
    if m.first.g() != p1.g() || m.second.a() != p2.a() || m.second.b() != p2.b() {
        bad.push("untouched blocks");
    }
    Ok(Check::new(
        bad.is_empty(),
        if bad.is_empty() {
            "merged id [1, 2, 3]; E and R matrices of both sets match entry for entry".into()
        } else {
            format!("mismatch in {}", bad.join(", "))
        },
    ))
}

fn lti_model_witness(rng: &mut ChaCha8Rng) -> Outcome {
    const REALIZATIONS: usize = 50;
    let start = Instant::now();
    let truth = lti_true_model();
    let zw = lti_noise_set();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..REALIZATIONS {
        let data = lti_recorded(10, 10, &zw, rng).map_err(err)?;
        let batch = data.batch().map_err(err)?;
        let m =
            model_set_lti(&batch, &concat_noise(&zw, batch.len()).map_err(err)?).map_err(err)?;
        let sigma = noise_witness(&m, &data.sigmas()).map_err(err)?;
        let e = (m.set.eval_matrix(&sigma).map_err(err)? - &truth).amax();
        worst = worst.max(e);
        if e > WITNESS_TOL {
            failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Check::new(
        failures == 0 && secs < 5.0,
        format!(
            "{REALIZATIONS} realizations of T = 100, max |M(σ_w) − [Φ Γ]| = {worst:.1e}, {failures} failures, {secs:.2} s"
        ),
    ))
}

fn poly_model_witness(rng: &mut ChaCha8Rng) -> Outcome {
    let basis = poly_basis();
    let theta = poly_theta();
    let mut worst: f64 = 0.0;
    for radius in [POLY_NOISE_SMALL, POLY_NOISE_MODEL, POLY_NOISE_LARGE] {
        let zw = poly_noise_set(radius);
        let data = poly_recorded(20, 7, &zw, rng).map_err(err)?;
        let batch = data.batch().map_err(err)?;
        let m = model_set_poly(
            &batch,
            &basis,
            &concat_noise(&zw, batch.len()).map_err(err)?,
        )
        .map_err(err)?;
        let sigma = noise_witness(&m, &data.sigmas()).map_err(err)?;
        worst = worst.max((m.set.eval_matrix(&sigma).map_err(err)? - &theta).amax());
    }
    let zero = Cpz::point(DVector::zeros(2));
    let data = poly_recorded(20, 7, &zero, rng).map_err(err)?;
    let batch = data.batch().map_err(err)?;
    let m = model_set_poly(
        &batch,
        &basis,
        &concat_noise(&zero, batch.len()).map_err(err)?,
    )
    .map_err(err)?;
    let singleton = m.set.num_generators() == 0;
    let coeff = (m.set.c() - &theta).amax();
    Ok(Check::new(
        worst <= WITNESS_TOL && singleton && coeff <= WITNESS_TOL,
        format!(
            "140 samples at radii 0.7e-5, 0.7e-4, 7e-3: max witness error {worst:.1e}; noise-free set is {} with coefficient error {coeff:.1e}",
            if singleton { "a singleton" } else { "not a singleton" }
        ),
    ))
}

/// Scalar interval `[lo, hi]` as a 1 × 1 matrix set.
fn scalar_interval(lo: f64, hi: f64, id: u64) -> Cpmz {
    Cpmz::polynomial(
        DMatrix::from_element(1, 1, 0.5 * (lo + hi)),
        vec![DMatrix::from_element(1, 1, 0.5 * (hi - lo))],
        DMatrix::identity(1, 1),
        ids(&[id]),
    )
    .expect("interval")
}

/// Signed-distance test against a counter-clockwise convex polygon.
fn inside_hull(hull: &[[f64; 2]], p: [f64; 2], tol: f64) -> bool {
    let n = hull.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = (ex * ex + ey * ey).sqrt();
        (ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / len >= -tol
    })
}

/// One step before and after refinement with the same injected sets.
struct NestingCase {
    pre: Cpz,
    post: Cpz,
}

/// Checks `post ⊆ pre`: every sampled post point is certified by evaluating
/// `pre` at the restricted factors, and the post sampled hull lies in the pre
/// sampled hull.
fn check_nesting<R: Rng>(case: &NestingCase, rng: &mut R) -> Result<(bool, String), String> {
    const TOL: f64 = 1e-6;
    let pre_cloud = boundary_cloud(&case.pre, [0, 1], 5000, rng).map_err(err)?;
    let pre_hull = convex_hull(&pre_cloud);
    let mut post_points = Vec::new();
    let mut cert: f64 = 0.0;
    for _ in 0..500 {
        let s = sample_feasible(&case.post, rng).map_err(err)?;
        let y = case.post.eval_point(&s).map_err(err)?;
        let x = case.pre.eval_point(&s).map_err(err)?;
        cert = cert
            .max((x - &y).amax())
            .max(case.pre.constraint_residual(&s).map_err(err)?);
        post_points.push([y[0], y[1]]);
    }
    let post_hull = convex_hull(&post_points);
    let outside = post_hull
        .iter()
        .filter(|p| !inside_hull(&pre_hull, **p, TOL))
        .count();
    let ok = cert <= TOL && outside == 0;
    Ok((
        ok,
        format!(
            "hull areas {:.3e} ⊆ {:.3e}, {outside} vertices outside, certificate {cert:.1e}",
            polygon_area(&post_hull),
            polygon_area(&pre_hull)
        ),
    ))
}

fn poly_step(
    m: &ModelSet,
    x: &Cpz,
    u: &Cpz,
    w: &Cpz,
    basis: &MonomialBasis,
) -> czreach::Result<Cpz> {
    let h = monomial_image_compact(&cartesian_exact(x, u), basis)?;
    add_exact(&mul_cpmz_cpz_compact(&m.set, &h)?, w)
}

fn intersection_and_refinement(rng: &mut ChaCha8Rng) -> Outcome {
    let cap = intersect_cpmz(&scalar_interval(0.0, 2.0, 1), &scalar_interval(1.0, 3.0, 2))
        .map_err(err)?;
    let mut wrong = Vec::new();
    for (x, want) in [
        (1.0, true),
        (1.25, true),
        (1.5, true),
        (2.0, true),
        (0.5, false),
        (0.99, false),
        (2.01, false),
        (2.5, false),
    ] {
        let got = membership_bruteforce_matrix(&cap, &DMatrix::from_element(1, 1, x), 1e-6)
            .map_err(err)?;
        if got != want {
            wrong.push(x);
        }
    }
    let interval_ok = wrong.is_empty();

    let zw = lti_noise_set();
    let first = lti_recorded(1, 6, &zw, rng).map_err(err)?;
    let second = lti_recorded(1, 6, &zw, rng).map_err(err)?;
    let m0 = model_set_lti(
        &first.batch().map_err(err)?,
        &concat_noise(&zw, 6).map_err(err)?,
    )
    .map_err(err)?;
    let m1 = model_set_lti(
        &second.batch().map_err(err)?.with_tag(1),
        &concat_noise(&zw, 6).map_err(err)?,
    )
    .map_err(err)?;
    let refined = refine(&m0, &m1).map_err(err)?;
    let (x0, u, w) = (lti_initial_nonconvex(), lti_input_set(), lti_noise_set());
    let lti = NestingCase {
        pre: step_lti(&m0, &x0, &u, &w).map_err(err)?,
        post: step_lti(&refined, &x0, &u, &w).map_err(err)?,
    };
    let (lti_ok, lti_msg) = check_nesting(&lti, rng)?;

    let basis = poly_basis();
    let zw = poly_noise_set(POLY_NOISE_LARGE);
    let first = poly_recorded(10, 7, &zw, rng).map_err(err)?;
    let second = poly_recorded(10, 7, &zw, rng).map_err(err)?;
    let m0 = model_set_poly(
        &first.batch().map_err(err)?,
        &basis,
        &concat_noise(&zw, 70).map_err(err)?,
    )
    .map_err(err)?;
    let m1 = model_set_poly(
        &second.batch().map_err(err)?.with_tag(1),
        &basis,
        &concat_noise(&zw, 70).map_err(err)?,
    )
    .map_err(err)?;
    let refined = refine(&m0, &m1).map_err(err)?;
    let (x0, u, w) = (poly_initial_nonconvex(), poly_input_set(), zw);
    let poly = NestingCase {
        pre: poly_step(&m0, &x0, &u, &w, &basis).map_err(err)?,
        post: poly_step(&refined, &x0, &u, &w, &basis).map_err(err)?,
    };
    let (poly_ok, poly_msg) = check_nesting(&poly, rng)?;
    Ok(Check::new(
        interval_ok && lti_ok && poly_ok,
        format!(
            "[0,2]∩[1,3] grid membership {}; LTI nesting: {lti_msg}; polynomial nesting: {poly_msg}",
            if interval_ok {
                "agrees on 8 probes".to_string()
            } else {
                format!("wrong at {wrong:?}")
            }
        ),
    ))
}

/// Largest witness error over `traces` simulations of one run.
fn propagate_witnesses<F>(
    f: F,
    cfg: &ReachConfig,
    result: &ReachResult,
    sigmas: &[Vec<f64>],
    traces: usize,
    seed: u64,
) -> Result<f64, String>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Sync,
{
    (0..traces)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9));
            let trace = simulate_run(&f, cfg, result, sigmas, &mut rng).map_err(err)?;
            witness_error(result, &trace).map_err(err)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

fn lti_dynamics(x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
    lti_phi() * x + lti_gamma() * u
}

fn witness_propagation(rng: &mut ChaCha8Rng) -> Outcome {
    const TRACES: usize = 500;
    let mut lines = Vec::new();
    let mut worst: f64 = 0.0;

    let zw = lti_noise_set();
    let offline = lti_recorded(1, 6, &zw, rng).map_err(err)?;
    let online = lti_recorded(1, 6, &zw, rng).map_err(err)?;
    let cfg = ReachConfig::new(lti_initial_nonconvex(), lti_input_set(), zw, 5, 6);
    let stream = vec![Vec::new(), online.transitions()];
    let res = run_lti(&cfg, &offline.batch().map_err(err)?, &stream).map_err(err)?;
    let mut sigmas = offline.sigmas();
    sigmas.extend(online.sigmas());
    let e = propagate_witnesses(lti_dynamics, &cfg, &res, &sigmas, TRACES, rng.random())?;
    worst = worst.max(e);
    lines.push(format!("LTI {e:.1e}"));

    let basis = poly_basis();
    for (name, x0) in [
        ("convex", poly_initial_convex()),
        ("nonconvex", poly_initial_nonconvex()),
    ] {
        let cfg = ReachConfig::new(x0, poly_input_set(), poly_noise_set(POLY_NOISE_MODEL), 3, 0);
        let res = run_poly_model(&cfg, &poly_theta(), &basis).map_err(err)?;
        let e = propagate_witnesses(poly_dynamics, &cfg, &res, &[], TRACES, rng.random())?;
        worst = worst.max(e);
        lines.push(format!("model-based {name} {e:.1e}"));
    }

    for (name, x0, radius) in [
        ("convex", poly_initial_convex(), POLY_NOISE_SMALL),
        ("nonconvex", poly_initial_nonconvex(), POLY_NOISE_LARGE),
    ] {
        let zw = poly_noise_set(radius);
        let offline = poly_recorded(1, 5, &zw, rng).map_err(err)?;
        let online = poly_recorded(1, 5, &zw, rng).map_err(err)?;
        let cfg = ReachConfig::new(x0, poly_input_set(), zw, 3, 5);
        let stream = vec![Vec::new(), online.transitions()];
        let res =
            run_poly_data(&cfg, &offline.batch().map_err(err)?, &stream, &basis).map_err(err)?;
        let mut sigmas = offline.sigmas();
        sigmas.extend(online.sigmas());
        let e = propagate_witnesses(poly_dynamics, &cfg, &res, &sigmas, TRACES, rng.random())?;
        worst = worst.max(e);
        lines.push(format!("data-driven {name} {e:.1e}"));
    }
    Ok(Check::new(
        worst <= WITNESS_TOL,
        format!("{TRACES} traces per run, max error: {}", lines.join(", ")),
    ))
}

fn conservatism(rng: &mut ChaCha8Rng) -> Outcome {
    const MARGIN: f64 = 0.05;
    let basis = poly_basis();
    let zw = poly_noise_set(POLY_NOISE_SMALL);
    let data = poly_recorded(20, 7, &zw, rng).map_err(err)?;
    let batch = data.batch().map_err(err)?;
    let cfg = ReachConfig::new(poly_initial_convex(), poly_input_set(), zw.clone(), 1, 5);
    let res = run_poly_data(&cfg, &batch, &[], &basis).map_err(err)?;
    let r1 = &res.sets[1];
    let cloud = boundary_cloud(r1, [0, 1], 5000, rng).map_err(err)?;
    let exact = hull_area(&cloud);

    let model = &res.model_history[0].model.set;
    let (u, _) = &res.injected_sets(&cfg).map_err(err)?[0];
    let zk: Vec<Interval> = interval_enclosure(&cfg.initial_set)
        .into_iter()
        .chain(interval_enclosure(u))
        .collect();
    let boxed = interval_baseline_poly(
        &interval_matrix(model),
        &zk,
        &basis,
        &interval_enclosure(&zw),
    )
    .map_err(err)?;
    let baseline = box_area(&boxed, [0, 1]);
    let own_box = box_area(&interval_enclosure(r1), [0, 1]);
    let ratio = exact / baseline;
    Ok(Check::new(
        exact <= (1.0 - MARGIN) * baseline,
        format!(
            "sampled hull {exact:.4e} vs baseline box {baseline:.4e} (ratio {ratio:.3}, required ≤ {:.2}); enclosure box of the exact set {own_box:.4e}",
            1.0 - MARGIN
        ),
    ))
}

fn reduction_soundness(rng: &mut ChaCha8Rng) -> Outcome {
    const POINTS: usize = 10_000;
    let zw = lti_noise_set();
    let offline = lti_recorded(1, 6, &zw, rng).map_err(err)?;
    let cfg = ReachConfig::new(lti_initial_nonconvex(), lti_input_set(), zw, 5, 6);
    let res = run_lti(&cfg, &offline.batch().map_err(err)?, &[]).map_err(err)?;
    let full = res.sets.last().expect("horizon ≥ 1");
    let (n, h) = (full.dim(), full.num_generators());
    let order = (h / 2 / n).max(1);
    let reduced = reduce(full, order * n).map_err(err)?;
    let enclosure = interval_enclosure(&reduced);
    let mut outside = 0;
    for _ in 0..POINTS {
        let s = sample_feasible(full, rng).map_err(err)?;
        let x = full.eval_point(&s).map_err(err)?;
        if !enclosure
            .iter()
            .zip(x.iter())
            .all(|(iv, v)| iv.contains(*v, 1e-9))
        {
            outside += 1;
        }
    }
    Ok(Check::new(
        outside == 0 && 2 * reduced.num_generators() <= h,
        format!(
            "{h} → {} generators (order {order}), {outside} of {POINTS} witness points outside the enclosure",
            reduced.num_generators()
        ),
    ))
}

fn determinism(seed: u64) -> Outcome {
    let mut cfg = ExperimentConfig::from_json(Experiment::LtiDemo.bundled()).map_err(err)?;
    cfg.seed = seed;
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let run = run_demo(&cfg, &mut rng).map_err(err)?;
        bytes.push(sets_and_models(cfg.experiment.name(), &run.result).0);
    }
    Ok(Check::new(
        bytes[0] == bytes[1],
        format!(
            "two lti-demo runs with seed {seed}: sets.json {} ({} bytes)",
            if bytes[0] == bytes[1] {
                "byte-identical"
            } else {
                "differs"
            },
            bytes[0].len()
        ),
    ))
}
