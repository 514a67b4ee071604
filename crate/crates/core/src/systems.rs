//! Benchmark systems: a five-dimensional LTI system and a two-dimensional
//! polynomial system, with their initial, input and noise sets.
//!
//! Every set constructor allocates fresh factor ids.

use nalgebra::{DMatrix, DVector};

use rand::Rng;

use crate::cpz::Cpz;
use crate::error::Result;
use crate::id::fresh_ids;
use crate::learning::{monomial_basis_custom, MonomialBasis};
use crate::oracle::{record_trajectories, RecordedData};

pub fn lti_phi() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        5,
        5,
        &[
            0.9323, -0.1890, 0.0, 0.0, 0.0, //
            0.1890, 0.9323, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.8596, 0.0430, 0.0, //
            0.0, 0.0, -0.0430, 0.8596, 0.0, //
            0.0, 0.0, 0.0, 0.0, 0.9048,
        ],
    )
}

pub fn lti_gamma() -> DMatrix<f64> {
    DMatrix::from_column_slice(5, 1, &[0.0436, 0.0533, 0.0475, 0.0453, 0.0476])
}

/// `[Φ Γ]`.
pub fn lti_true_model() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(5, 6);
    m.view_mut((0, 0), (5, 5)).copy_from(&lti_phi());
    m.view_mut((0, 5), (5, 1)).copy_from(&lti_gamma());
    m
}

/// Nonconvex initial set with center `1`, generators `0.1 I` and coupled exponents.
pub fn lti_initial_nonconvex() -> Cpz {
    let e = DMatrix::from_row_slice(
        5,
        5,
        &[
            2, 1, 0, 0, 0, //
            1, 2, 0, 0, 0, //
            0, 0, 2, 1, 0, //
            0, 0, 1, 2, 1, //
            0, 0, 0, 1, 2,
        ],
    );
    Cpz::polynomial(
        DVector::from_element(5, 1.0),
        DMatrix::identity(5, 5) * 0.1,
        e,
        fresh_ids(5),
    )
    .expect("valid initial set")
}

pub fn lti_initial_convex() -> Cpz {
    Cpz::zonotope(DVector::from_element(5, 1.0), DMatrix::identity(5, 5) * 0.1)
        .expect("valid initial set")
}

pub fn lti_input_set() -> Cpz {
    Cpz::zonotope(
        DVector::from_element(1, 10.0),
        DMatrix::from_element(1, 1, 0.25),
    )
    .expect("valid input set")
}

/// `⟨0, r·1⟩`: a single generator along the all-ones direction.
pub fn segment_noise(n: usize, radius: f64) -> Cpz {
    Cpz::zonotope(DVector::zeros(n), DMatrix::from_element(n, 1, radius)).expect("valid noise set")
}

pub const LTI_NOISE_RADIUS: f64 = 0.005;

pub fn lti_noise_set() -> Cpz {
    segment_noise(5, LTI_NOISE_RADIUS)
}

pub const POLY_NOISE_MODEL: f64 = 0.7e-4;
pub const POLY_NOISE_SMALL: f64 = 0.7e-5;
pub const POLY_NOISE_LARGE: f64 = 7e-3;

/// Monomials `{x₁, u₁, x₁², x₂², u₂x₁}` over `z = (x₁, x₂, u₁, u₂)`.
pub fn poly_basis() -> MonomialBasis {
    monomial_basis_custom(
        4,
        vec![
            vec![1, 0, 0, 0],
            vec![0, 0, 1, 0],
            vec![2, 0, 0, 0],
            vec![0, 2, 0, 0],
            vec![1, 0, 0, 1],
        ],
    )
    .expect("distinct monomials")
}

/// Coefficients of `f₁ = 0.7x₁ + u₁ + 0.32x₁²`, `f₂ = 0.09x₁ + 0.32u₂x₁ + 0.4x₂²` in [`poly_basis`] order.
pub fn poly_theta() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 5, &[0.7, 1.0, 0.32, 0.0, 0.0, 0.09, 0.0, 0.0, 0.4, 0.32])
}

pub fn poly_dynamics(x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![
        0.7 * x[0] + u[0] + 0.32 * x[0] * x[0],
        0.09 * x[0] + 0.32 * u[1] * x[0] + 0.4 * x[1] * x[1],
    ])
}

pub fn poly_input_set() -> Cpz {
    Cpz::zonotope(
        DVector::from_vec(vec![0.2, 0.3]),
        DMatrix::from_diagonal(&DVector::from_vec(vec![0.01, 0.02])),
    )
    .expect("valid input set")
}

pub fn poly_initial_convex() -> Cpz {
    Cpz::zonotope(
        DVector::from_vec(vec![1.0, 1.6]),
        DMatrix::from_diagonal(&DVector::from_vec(vec![0.1, 0.2])),
    )
    .expect("valid initial set")
}

pub fn poly_initial_nonconvex() -> Cpz {
    Cpz::polynomial(
        DVector::from_vec(vec![1.0, 2.2]),
        DMatrix::identity(2, 2) * 0.1,
        DMatrix::from_row_slice(2, 2, &[2, 1, 1, 2]),
        fresh_ids(2),
    )
    .expect("valid initial set")
}

pub fn poly_noise_set(radius: f64) -> Cpz {
    segment_noise(2, radius)
}

fn random_starts<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<DVector<f64>> {
    (0..count)
        .map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0)))
        .collect()
}

/// `count` trajectories of the LTI system with `length` transitions each, starts
/// uniform in `[−1, 1]⁵`, inputs from [`lti_input_set`] and noise from `zw`.
pub fn lti_recorded<R: Rng + ?Sized>(
    count: usize,
    length: usize,
    zw: &Cpz,
    rng: &mut R,
) -> Result<RecordedData> {
    let (phi, gamma) = (lti_phi(), lti_gamma());
    let starts = random_starts(5, count, rng);
    record_trajectories(
        |x, u| &phi * x + &gamma * u,
        &starts,
        &lti_input_set(),
        zw,
        length,
        rng,
    )
}

/// Polynomial-system analogue of [`lti_recorded`], starts uniform in `[−1, 1]²`.
pub fn poly_recorded<R: Rng + ?Sized>(
    count: usize,
    length: usize,
    zw: &Cpz,
    rng: &mut R,
) -> Result<RecordedData> {
    let starts = random_starts(2, count, rng);
    record_trajectories(poly_dynamics, &starts, &poly_input_set(), zw, length, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_matches_dynamics() {
        let basis = poly_basis();
        let x = DVector::from_vec(vec![0.3, -1.2]);
        let u = DVector::from_vec(vec![0.21, 0.28]);
        let z = [x[0], x[1], u[0], u[1]];
        let via_theta = poly_theta() * basis.eval(&z);
        assert!((via_theta - poly_dynamics(&x, &u)).norm() < 1e-15);
    }

    #[test]
    fn phi_entry() {
        assert_eq!(lti_phi()[(0, 0)], 0.9323);
        assert_eq!(lti_true_model()[(4, 5)], 0.0476);
    }
}
