use czreach::algebra::*;
use czreach::oracle::{
    interval_enclosure, random_assignment, random_cpmz, random_cpz, InstanceSpec,
};
use czreach::{Cpmz, Cpz, FactorAssignment, FactorId, FEASIBILITY_TOL};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

struct Case {
    rng: ChaCha8Rng,
    sigma: FactorAssignment,
    pool1: Vec<FactorId>,
    pool2: Vec<FactorId>,
}

/// Two id pools that overlap on a random share, and σ over both.
fn case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<FactorId> = (1..=8).map(FactorId).collect();
    let split = rng.random_range(0..=4);
    let pool1 = all[..4].to_vec();
    let pool2 = all[split..split + 4].to_vec();
    let sigma = random_assignment(&all, &mut rng);
    Case {
        rng,
        sigma,
        pool1,
        pool2,
    }
}

fn close(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    a.len() == b.len() && (a - b).amax() <= TOL
}

fn feasible_at(s: &Cpz, sigma: &FactorAssignment) -> bool {
    s.constraint_residual(sigma).unwrap() <= FEASIBILITY_TOL
}

fn cpz(c: &mut Case, n: usize, second: bool) -> Cpz {
    let pool = if second {
        c.pool2.clone()
    } else {
        c.pool1.clone()
    };
    random_cpz(n, &pool, &c.sigma, &InstanceSpec::default(), &mut c.rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_with_matrix_set(seed in any::<u64>()) {
        let mut c = case(seed);
        let (m, n) = (c.rng.random_range(1..=5), c.rng.random_range(1..=5));
        let pool = c.pool1.clone();
        let y = random_cpmz(m, n, &pool, &c.sigma, &InstanceSpec::default(), &mut c.rng);
        let p = cpz(&mut c, n, true);
        let out = mul_cpmz_cpz(&y, &p).unwrap();
        let expect = y.eval_matrix(&c.sigma).unwrap() * p.eval_point(&c.sigma).unwrap();
        prop_assert!(close(&out.eval_point(&c.sigma).unwrap(), &expect));
        prop_assert!(feasible_at(&out, &c.sigma));
        let (g, h) = (y.num_generators(), p.num_generators());
        prop_assert_eq!(out.num_generators(), g + h + g * h);
        prop_assert_eq!(out.num_constraint_terms(), y.num_constraint_terms() + p.num_constraint_terms());
        prop_assert_eq!(out.num_constraints(), y.num_constraint_rows() + p.num_constraints());
        let fused = mul_cpmz_cpz_compact(&y, &p).unwrap();
        prop_assert_eq!(&fused, &compact_cpz(&out));
        prop_assert!(close(&fused.eval_point(&c.sigma).unwrap(), &expect));
    }

    #[test]
    fn exact_addition(seed in any::<u64>()) {
        let mut c = case(seed);
        let n = c.rng.random_range(1..=5);
        let (p1, p2) = (cpz(&mut c, n, false), cpz(&mut c, n, true));
        let out = add_exact(&p1, &p2).unwrap();
        let expect = p1.eval_point(&c.sigma).unwrap() + p2.eval_point(&c.sigma).unwrap();
        prop_assert!(close(&out.eval_point(&c.sigma).unwrap(), &expect));
        prop_assert!(feasible_at(&out, &c.sigma));
        prop_assert_eq!(out.num_generators(), p1.num_generators() + p2.num_generators());
        prop_assert_eq!(out.num_constraints(), p1.num_constraints() + p2.num_constraints());
    }

    #[test]
    fn exact_cartesian_product(seed in any::<u64>()) {
        let mut c = case(seed);
        let (n, w) = (c.rng.random_range(1..=5), c.rng.random_range(1..=5));
        let (p1, p2) = (cpz(&mut c, n, false), cpz(&mut c, w, true));
        let out = cartesian_exact(&p1, &p2);
        let (a, b) = (p1.eval_point(&c.sigma).unwrap(), p2.eval_point(&c.sigma).unwrap());
        let expect = DVector::from_iterator(n + w, a.iter().chain(b.iter()).copied());
        prop_assert!(close(&out.eval_point(&c.sigma).unwrap(), &expect));
        prop_assert!(feasible_at(&out, &c.sigma));
        prop_assert_eq!(out.num_generators(), p1.num_generators() + p2.num_generators());
        prop_assert_eq!(project(&out, &(0..n).collect::<Vec<_>>()).unwrap().eval_point(&c.sigma).unwrap(), a);
    }

    #[test]
    fn exact_elementwise_product(seed in any::<u64>()) {
        let mut c = case(seed);
        let n = c.rng.random_range(1..=5);
        let (p1, p2) = (cpz(&mut c, n, false), cpz(&mut c, n, true));
        let out = hadamard_exact(&p1, &p2).unwrap();
        let expect = p1.eval_point(&c.sigma).unwrap().component_mul(&p2.eval_point(&c.sigma).unwrap());
        prop_assert!(close(&out.eval_point(&c.sigma).unwrap(), &expect));
        prop_assert!(feasible_at(&out, &c.sigma));
        let (h1, h2) = (p1.num_generators(), p2.num_generators());
        prop_assert_eq!(out.num_generators(), h1 + h2 + h1 * h2);
        prop_assert_eq!(&hadamard_compact(&p1, &p2).unwrap(), &compact_cpz(&out));
    }

    #[test]
    fn exact_power(seed in any::<u64>(), e in 0u32..=3) {
        let mut c = case(seed);
        let n = c.rng.random_range(1..=5);
        let p = cpz(&mut c, n, false);
        let out = pow_exact(&p, e);
        let x = p.eval_point(&c.sigma).unwrap();
        let expect = x.map(|v| v.powi(e as i32));
        prop_assert!(close(&out.eval_point(&c.sigma).unwrap(), &expect));
        let h = p.num_generators();
        let mut count = 0;
        for k in 1..=e {
            count = if k == 1 { h } else { count + h + count * h };
        }
        prop_assert_eq!(out.num_generators(), count);
        let fused = pow_compact(&p, e);
        prop_assert!(close(&fused.eval_point(&c.sigma).unwrap(), &expect));
    }

    #[test]
    fn projection_and_linear_map(seed in any::<u64>()) {
        let mut c = case(seed);
        let n = c.rng.random_range(1..=5);
        let p = cpz(&mut c, n, false);
        let x = p.eval_point(&c.sigma).unwrap();
        let mut idx: Vec<usize> = (0..n).filter(|_| c.rng.random_bool(0.6)).collect();
        if idx.is_empty() {
            idx.push(0);
        }
        idx.reverse();
        let out = project(&p, &idx).unwrap();
        prop_assert_eq!(out.eval_point(&c.sigma).unwrap(), x.select_rows(&idx));
        let m = DMatrix::from_fn(c.rng.random_range(1..=5), n, |_, _| c.rng.random_range(-2.0..2.0));
        let img = map_linear(&m, &p).unwrap();
        prop_assert!(close(&img.eval_point(&c.sigma).unwrap(), &(&m * &x)));
        prop_assert_eq!(img.num_generators(), p.num_generators());
    }

    #[test]
    fn merge_is_set_identity(seed in any::<u64>()) {
        let mut c = case(seed);
        let n = c.rng.random_range(1..=5);
        let (p1, p2) = (cpz(&mut c, n, false), cpz(&mut c, n, true));
        let mp = merge_id(&p1, &p2);
        prop_assert_eq!(mp.first.id(), mp.shared_id.as_slice());
        prop_assert_eq!(mp.second.id(), mp.shared_id.as_slice());
        prop_assert_eq!(mp.first.eval_point(&c.sigma).unwrap(), p1.eval_point(&c.sigma).unwrap());
        prop_assert_eq!(mp.second.eval_point(&c.sigma).unwrap(), p2.eval_point(&c.sigma).unwrap());
        prop_assert_eq!(mp.first.constraint_residual(&c.sigma).unwrap(), p1.constraint_residual(&c.sigma).unwrap());
    }

    #[test]
    fn compaction_preserves_points(seed in any::<u64>()) {
        let mut c = case(seed);
        let n = c.rng.random_range(1..=5);
        let (p1, p2) = (cpz(&mut c, n, false), cpz(&mut c, n, true));
        let lit = hadamard_exact(&add_exact(&p1, &p2).unwrap(), &p1).unwrap();
        let comp = compact_cpz(&lit);
        prop_assert!(comp.num_generators() <= lit.num_generators());
        prop_assert!(close(&comp.eval_point(&c.sigma).unwrap(), &lit.eval_point(&c.sigma).unwrap()));
        prop_assert!(feasible_at(&comp, &c.sigma));
        prop_assert_eq!(compact_cpz(&comp), comp);
    }

    #[test]
    fn self_intersection_keeps_every_point(seed in any::<u64>()) {
        let mut c = case(seed);
        let pool = c.pool1.clone();
        let spec = InstanceSpec { max_constraints: 0, ..Default::default() };
        let y = random_cpmz(2, 3, &pool, &c.sigma, &spec, &mut c.rng);
        let (both, relabel) = intersect_cpmz_relabeled(&y, &y).unwrap();
        let mut witness = c.sigma.clone();
        for (old, new) in &relabel {
            witness.insert(*new, c.sigma.get(*old).unwrap()).unwrap();
        }
        prop_assert!(both.constraint_residual(&witness).unwrap() <= FEASIBILITY_TOL);
        prop_assert_eq!(both.eval_matrix(&witness).unwrap(), y.eval_matrix(&c.sigma).unwrap());
    }

    #[test]
    fn reduction_encloses_samples(seed in any::<u64>()) {
        let mut c = case(seed);
        let n = c.rng.random_range(1..=3);
        let spec = InstanceSpec { max_constraints: 0, ..Default::default() };
        let pool = c.pool1.clone();
        let p = random_cpz(n, &pool, &c.sigma, &spec, &mut c.rng);
        let max = n.max(p.num_generators() / 2);
        let r = reduce(&p, max).unwrap();
        prop_assert!(r.num_generators() <= max.max(p.num_generators().min(max)) || r.num_generators() == p.num_generators());
        let boxr = interval_enclosure(&r);
        for _ in 0..50 {
            let s = random_assignment(p.id(), &mut c.rng);
            let x = p.eval_point(&s).unwrap();
            for (i, iv) in boxr.iter().enumerate() {
                prop_assert!(iv.contains(x[i], 1e-9));
            }
        }
    }

    #[test]
    fn json_round_trip_is_bitwise(seed in any::<u64>()) {
        let mut c = case(seed);
        let n = c.rng.random_range(1..=5);
        let p = cpz(&mut c, n, false);
        let back: Cpz = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
        let pool = c.pool2.clone();
        let y = random_cpmz(2, n, &pool, &c.sigma, &InstanceSpec::default(), &mut c.rng);
        let back: Cpmz = serde_json::from_str(&serde_json::to_string(&y).unwrap()).unwrap();
        prop_assert_eq!(back, y);
    }
}

#[test]
fn product_of_intervals_matches_interval_oracle() {
    let y = Cpmz::polynomial(
        DMatrix::from_element(1, 1, 2.0),
        vec![DMatrix::from_element(1, 1, 1.0)],
        DMatrix::identity(1, 1),
        vec![FactorId(1)],
    )
    .unwrap();
    let p = Cpz::polynomial(
        DVector::zeros(1),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::identity(1, 1),
        vec![FactorId(2)],
    )
    .unwrap();
    let out = mul_cpmz_cpz(&y, &p).unwrap();
    assert_eq!(out.c()[0], 0.0);
    assert_eq!(out.g().as_slice(), &[0.0, 2.0, 1.0]);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=100 {
        for j in 0..=100 {
            let s = FactorAssignment::zip(
                &[FactorId(1), FactorId(2)],
                &[-1.0 + 0.02 * i as f64, -1.0 + 0.02 * j as f64],
            )
            .unwrap();
            let v = out.eval_point(&s).unwrap()[0];
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    assert!((lo + 3.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
}

#[test]
fn dependency_cancels_and_squares() {
    let p = Cpz::zonotope(DVector::zeros(1), DMatrix::from_element(1, 1, 1.0)).unwrap();
    let zero = add_exact(&p, &p.negated()).unwrap();
    let sq = hadamard_exact(&p, &p).unwrap();
    let cube = pow_exact(&p, 3);
    for a in [-1.0, -0.4, 0.0, 0.5, 1.0] {
        let s = FactorAssignment::zip(p.id(), &[a]).unwrap();
        assert_eq!(zero.eval_point(&s).unwrap()[0], 0.0);
        assert!((sq.eval_point(&s).unwrap()[0] - a * a).abs() < 1e-15);
        assert!((cube.eval_point(&s).unwrap()[0] - a * a * a).abs() < 1e-15);
    }
    let other = Cpz::zonotope(DVector::zeros(1), DMatrix::from_element(1, 1, 1.0)).unwrap();
    let indep = hadamard_exact(&p, &other).unwrap();
    let s = FactorAssignment::zip(indep.id(), &[1.0, -1.0]).unwrap();
    assert_eq!(indep.eval_point(&s).unwrap()[0], -1.0);
}
