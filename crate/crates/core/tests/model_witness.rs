use czreach::learning::{concat_noise, model_set_lti, model_set_poly, refine};
use czreach::oracle::{noise_witness, random_assignment};
use czreach::systems::*;
use czreach::Cpz;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn lti_model_set_contains_true_matrices_at_recorded_noise() {
    let truth = lti_true_model();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zw = lti_noise_set();
        let data = lti_recorded(10, 10, &zw, &mut rng).unwrap();
        let batch = data.batch().unwrap();
        assert_eq!(batch.len(), 100);
        let m = model_set_lti(&batch, &concat_noise(&zw, batch.len()).unwrap()).unwrap();
        assert_eq!(m.set.num_generators(), 100);
        let sigma = noise_witness(&m, &data.sigmas()).unwrap();
        let err = (m.set.eval_matrix(&sigma).unwrap() - &truth).amax();
        assert!(err < 1e-8, "seed {seed}: {err}");
    }
}

#[test]
fn noise_free_lti_data_give_a_singleton() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zero = Cpz::point(DVector::zeros(5));
    let data = lti_recorded(2, 6, &zero, &mut rng).unwrap();
    let batch = data.batch().unwrap();
    let m = model_set_lti(&batch, &concat_noise(&zero, batch.len()).unwrap()).unwrap();
    assert_eq!(m.set.num_generators(), 0);
    assert!((m.set.c() - lti_true_model()).amax() < 1e-8);
}

#[test]
fn polynomial_model_set_contains_true_coefficients() {
    let basis = poly_basis();
    let theta = poly_theta();
    for radius in [POLY_NOISE_SMALL, POLY_NOISE_MODEL, POLY_NOISE_LARGE] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let zw = poly_noise_set(radius);
        let data = poly_recorded(20, 7, &zw, &mut rng).unwrap();
        let batch = data.batch().unwrap();
        assert_eq!(batch.len(), 140);
        let m = model_set_poly(&batch, &basis, &concat_noise(&zw, 140).unwrap()).unwrap();
        let sigma = noise_witness(&m, &data.sigmas()).unwrap();
        let err = (m.set.eval_matrix(&sigma).unwrap() - &theta).amax();
        assert!(err < 1e-8, "radius {radius}: {err}");
    }
}

#[test]
fn noise_free_polynomial_data_recover_coefficients() {
    let basis = poly_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let zero = Cpz::point(DVector::zeros(2));
    let data = poly_recorded(20, 7, &zero, &mut rng).unwrap();
    let batch = data.batch().unwrap();
    let m = model_set_poly(&batch, &basis, &concat_noise(&zero, 140).unwrap()).unwrap();
    assert_eq!(m.set.num_generators(), 0);
    let c = m.set.c();
    for (r, k, v) in [
        (0, 0, 0.7),
        (0, 1, 1.0),
        (0, 2, 0.32),
        (1, 0, 0.09),
        (1, 4, 0.32),
        (1, 3, 0.4),
    ] {
        assert!((c[(r, k)] - v).abs() < 1e-8, "Θ({r},{k}) = {}", c[(r, k)]);
    }
    assert!(
        c[(0, 3)].abs() < 1e-8
            && c[(0, 4)].abs() < 1e-8
            && c[(1, 1)].abs() < 1e-8
            && c[(1, 2)].abs() < 1e-8
    );
}

#[test]
fn refinement_keeps_the_true_model_and_the_first_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let zw = lti_noise_set();
    let first = lti_recorded(1, 8, &zw, &mut rng).unwrap();
    let second = lti_recorded(1, 8, &zw, &mut rng).unwrap();
    let b0 = first.batch().unwrap();
    let b1 = second.batch().unwrap().with_tag(1);
    let m0 = model_set_lti(&b0, &concat_noise(&zw, 8).unwrap()).unwrap();
    let m1 = model_set_lti(&b1, &concat_noise(&zw, 8).unwrap()).unwrap();
    let refined = refine(&m0, &m1).unwrap();
    assert_eq!(refined.provenance, vec![0, 1]);
    let mut sigmas = first.sigmas();
    sigmas.extend(second.sigmas());
    let sigma = noise_witness(&refined, &sigmas).unwrap();
    assert!(refined.set.constraint_residual(&sigma).unwrap() < 1e-9);
    assert!((refined.set.eval_matrix(&sigma).unwrap() - lti_true_model()).amax() < 1e-8);
    // every unconstrained point of the refined set is a point of the first model set
    for _ in 0..100 {
        let s = random_assignment(refined.set.id(), &mut rng);
        let restricted = m0.set.eval_matrix(&s).unwrap();
        assert_eq!(refined.set.eval_matrix(&s).unwrap(), restricted);
    }
}
