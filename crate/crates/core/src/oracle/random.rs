use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::cpmz::Cpmz;
use crate::cpz::Cpz;
use crate::id::{FactorAssignment, FactorId};
use crate::linalg::monomial;

/// Size limits of random instances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceSpec {
    pub max_generators: usize,
    pub max_constraints: usize,
    pub max_terms: usize,
    pub max_exponent: u32,
    pub max_factors: usize,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            max_generators: 6,
            max_constraints: 3,
            max_terms: 3,
            max_exponent: 3,
            max_factors: 4,
        }
    }
}

/// Values in `[−1, 1]` for every id of `pool`.
pub fn random_assignment<R: Rng + ?Sized>(pool: &[FactorId], rng: &mut R) -> FactorAssignment {
    let values: Vec<f64> = pool.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
    FactorAssignment::zip(pool, &values).expect("values in range")
}

fn pick_ids<R: Rng + ?Sized>(pool: &[FactorId], max: usize, rng: &mut R) -> Vec<FactorId> {
    let mut ids: Vec<FactorId> = pool
        .iter()
        .copied()
        .filter(|_| rng.random_bool(0.6))
        .collect();
    while ids.len() > max {
        ids.remove(rng.random_range(0..ids.len()));
    }
    ids
}

fn exponents<R: Rng + ?Sized>(p: usize, cols: usize, max: u32, rng: &mut R) -> DMatrix<u32> {
    DMatrix::from_fn(p, cols, |_, _| {
        if rng.random_bool(0.5) {
            0
        } else {
            rng.random_range(0..=max)
        }
    })
}

fn uniform<R: Rng + ?Sized>(r: usize, c: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-2.0..=2.0))
}

/// Constraint data over `ids` that `sigma` satisfies exactly up to rounding.
fn constraints<R: Rng + ?Sized>(
    ids: &[FactorId],
    sigma: &FactorAssignment,
    spec: &InstanceSpec,
    rng: &mut R,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<u32>) {
    let nc = if ids.is_empty() {
        0
    } else {
        rng.random_range(0..=spec.max_constraints)
    };
    let q = if nc == 0 {
        0
    } else {
        rng.random_range(1..=spec.max_terms)
    };
    let a = uniform(nc, q, rng);
    let r = exponents(ids.len(), q, spec.max_exponent, rng);
    let alpha = sigma.values_for(ids).expect("pool covers ids");
    let mut b = DVector::zeros(nc);
    for j in 0..q {
        let col: Vec<u32> = r.column(j).iter().copied().collect();
        b.axpy(monomial(&col, &alpha), &a.column(j), 1.0);
    }
    (a, DMatrix::from_column_slice(nc, 1, b.as_slice()), r)
}

/// A random CPZ of dimension `n` over a subset of `pool`, feasible at `sigma`.
pub fn random_cpz<R: Rng + ?Sized>(
    n: usize,
    pool: &[FactorId],
    sigma: &FactorAssignment,
    spec: &InstanceSpec,
    rng: &mut R,
) -> Cpz {
    let ids = pick_ids(pool, spec.max_factors, rng);
    let h = rng.random_range(0..=spec.max_generators);
    let e = exponents(ids.len(), h, spec.max_exponent, rng);
    let (a, b, r) = constraints(&ids, sigma, spec, rng);
    let c = DVector::from_fn(n, |_, _| rng.random_range(-2.0..=2.0));
    Cpz::new(
        c,
        uniform(n, h, rng),
        e,
        a,
        DVector::from_column_slice(b.as_slice()),
        r,
        ids,
    )
    .expect("valid random set")
}

/// A random `m × n` CPMZ over a subset of `pool`, feasible at `sigma`.
pub fn random_cpmz<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    pool: &[FactorId],
    sigma: &FactorAssignment,
    spec: &InstanceSpec,
    rng: &mut R,
) -> Cpmz {
    let ids = pick_ids(pool, spec.max_factors, rng);
    let gamma = rng.random_range(0..=spec.max_generators);
    let e = exponents(ids.len(), gamma, spec.max_exponent, rng);
    let (a, b, r) = constraints(&ids, sigma, spec, rng);
    let a_list: Vec<DMatrix<f64>> = (0..a.ncols())
        .map(|j| DMatrix::from_column_slice(a.nrows(), 1, a.column(j).as_slice()))
        .collect();
    let g: Vec<DMatrix<f64>> = (0..gamma).map(|_| uniform(m, n, rng)).collect();
    Cpmz::new(uniform(m, n, rng), g, e, a_list, b, r, ids).expect("valid random matrix set")
}
