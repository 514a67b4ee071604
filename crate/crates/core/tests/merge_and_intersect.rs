use czreach::algebra::{intersect_cpmz, merge_id, project};
use czreach::oracle::{
    membership_bruteforce_matrix, sample_feasible, sample_feasible_with, SamplerConfig,
};
use czreach::{Cpmz, Cpz, Error, FactorAssignment, FactorId, FactorSpace, FEASIBILITY_TOL};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ids(v: &[u64]) -> Vec<FactorId> {
    v.iter().copied().map(FactorId).collect()
}

fn p1() -> Cpz {
    Cpz::new(
        DVector::from_vec(vec![0.0, 2.0, 1.0]),
        DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 3.0, 2.0, 1.0, 5.0]),
        DMatrix::from_row_slice(2, 2, &[4, 1, 0, 2]),
        DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 0.0, 3.0, 4.0]),
        DVector::from_vec(vec![2.0, 0.0, 2.0]),
        DMatrix::from_row_slice(2, 2, &[4, 2, 0, 2]),
        ids(&[1, 2]),
    )
    .unwrap()
}

fn p2() -> Cpz {
    Cpz::new(
        DVector::from_vec(vec![3.0, 3.0, 4.0]),
        DMatrix::from_row_slice(3, 2, &[2.0, 2.0, 3.0, 0.0, 1.0, 4.0]),
        DMatrix::from_row_slice(2, 2, &[3, 2, 3, 0]),
        DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]),
        DVector::from_vec(vec![2.0, 5.0]),
        DMatrix::from_row_slice(2, 2, &[2, 0, 2, 3]),
        ids(&[1, 3]),
    )
    .unwrap()
}

#[test]
fn merge_inserts_zero_rows_for_missing_factors() {
    let m = merge_id(&p1(), &p2());
    assert_eq!(m.shared_id, ids(&[1, 2, 3]));
    assert_eq!(
        m.first.e(),
        &DMatrix::from_row_slice(3, 2, &[4, 1, 0, 2, 0, 0])
    );
    assert_eq!(
        m.first.r(),
        &DMatrix::from_row_slice(3, 2, &[4, 2, 0, 2, 0, 0])
    );
    assert_eq!(
        m.second.e(),
        &DMatrix::from_row_slice(3, 2, &[3, 2, 0, 0, 3, 0])
    );
    assert_eq!(
        m.second.r(),
        &DMatrix::from_row_slice(3, 2, &[2, 0, 0, 0, 2, 3])
    );
    assert_eq!(m.first.g(), p1().g());
    assert_eq!(m.second.a(), p2().a());
    assert_eq!(m.second.b(), p2().b());
}

#[test]
fn merge_with_itself_is_identity() {
    let m = merge_id(&p1(), &p1());
    assert_eq!(m.first, p1());
    assert_eq!(m.second, p1());
}

#[test]
fn merge_of_disjoint_lists_embeds_rows() {
    let a = Cpz::polynomial(
        DVector::zeros(1),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_row_slice(2, 1, &[1, 1]),
        ids(&[10, 20]),
    )
    .unwrap();
    let b = Cpz::polynomial(
        DVector::zeros(1),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_row_slice(3, 1, &[1, 2, 3]),
        ids(&[5, 15, 25]),
    )
    .unwrap();
    let m = merge_id(&a, &b);
    assert_eq!(m.shared_id, ids(&[5, 10, 15, 20, 25]));
    assert_eq!(m.first.e().as_slice(), &[0, 1, 0, 1, 0]);
    assert_eq!(m.second.e().as_slice(), &[1, 0, 2, 0, 3]);
}

#[test]
fn projection_slices_printed_rows() {
    let s = project(&p1(), &[1]).unwrap();
    assert_eq!(s.c().as_slice(), &[2.0]);
    assert_eq!(s.g().as_slice(), &[3.0, 2.0]);
    assert_eq!(s.e(), p1().e());
    assert_eq!(s.a(), p1().a());
    assert!(matches!(
        project(&p1(), &[3]),
        Err(Error::IndexOutOfRange { index: 3, dim: 3 })
    ));
}

#[test]
fn coupled_quartic_constraints_are_empty() {
    // rows 1 and 3 force α₁⁴ = −2
    let cfg = SamplerConfig {
        restarts: 50,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    assert_eq!(
        sample_feasible_with(&p1(), &cfg, &mut rng),
        Err(Error::Infeasible { restarts: 50 })
    );
}

#[test]
fn polynomial_constraints_are_met_by_samples() {
    // same structure, right-hand side chosen so that α₁⁴ = 1, α₁²α₂² = 1
    let s = Cpz::new(
        p1().c().clone(),
        p1().g().clone(),
        p1().e().clone(),
        p1().a().clone(),
        DVector::from_vec(vec![3.0, 0.0, 7.0]),
        p1().r().clone(),
        ids(&[1, 2]),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let sigma = sample_feasible(&s, &mut rng).unwrap();
        assert!(s.constraint_residual(&sigma).unwrap() <= FEASIBILITY_TOL);
    }
}

fn interval(lo: f64, hi: f64, id: u64) -> Cpmz {
    Cpmz::polynomial(
        DMatrix::from_element(1, 1, 0.5 * (lo + hi)),
        vec![DMatrix::from_element(1, 1, 0.5 * (hi - lo))],
        DMatrix::identity(1, 1),
        ids(&[id]),
    )
    .unwrap()
}

#[test]
fn interval_intersection_by_brute_force() {
    let y = intersect_cpmz(&interval(0.0, 2.0, 1), &interval(1.0, 3.0, 2)).unwrap();
    let at =
        |v: f64| membership_bruteforce_matrix(&y, &DMatrix::from_element(1, 1, v), 1e-6).unwrap();
    assert!(at(1.0));
    assert!(at(2.0));
    assert!(at(1.5));
    assert!(!at(0.5));
    assert!(!at(2.5));
    assert!(!at(1.0 - 1e-3));
    assert!(!at(2.0 + 1e-3));
}

#[test]
fn disjoint_intervals_have_no_witness() {
    let y = intersect_cpmz(&interval(0.0, 1.0, 1), &interval(2.0, 3.0, 2)).unwrap();
    let sys = y.constraint_system();
    let mut best = f64::INFINITY;
    for i in 0..=200 {
        for j in 0..=200 {
            let a = [-1.0 + 0.01 * i as f64, -1.0 + 0.01 * j as f64];
            best = best.min(sys.residual(&a));
        }
    }
    assert!(best > 0.1, "minimum residual {best}");
}

#[test]
fn intersection_with_shared_ids_relabels_the_second_operand() {
    let a = interval(0.0, 2.0, 7);
    let y = intersect_cpmz(&a, &a).unwrap();
    assert_eq!(y.num_factors(), 2);
    let sigma = FactorAssignment::zip(y.id(), &[0.25, 0.25]).unwrap();
    assert!(y.constraint_residual(&sigma).unwrap() <= FEASIBILITY_TOL);
    assert_eq!(y.eval_matrix(&sigma).unwrap()[(0, 0)], 1.25);
}
