use rand::Rng;

use crate::cpz::{ConstraintSystem, FactorSpace};
use crate::error::{Error, Result};
use crate::id::{FactorAssignment, FactorId};
use crate::linalg::pinv;
use crate::FEASIBILITY_TOL;

use nalgebra::DMatrix;

/// Budget of the constrained sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub restarts: usize,
    /// Gauss-Newton iterations per restart.
    pub iterations: usize,
    /// Step-length factor of the backtracking line search.
    pub shrink: f64,
    pub tol: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            restarts: 1000,
            iterations: 200,
            shrink: 0.5,
            tol: FEASIBILITY_TOL,
        }
    }
}

pub fn sample_uniform<R: Rng + ?Sized>(ids: &[FactorId], rng: &mut R) -> FactorAssignment {
    let values: Vec<f64> = ids.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
    FactorAssignment::zip(ids, &values).expect("values in range")
}

/// Draws factor values satisfying the constraints of `s`.
pub fn sample_feasible<S: FactorSpace + ?Sized, R: Rng + ?Sized>(
    s: &S,
    rng: &mut R,
) -> Result<FactorAssignment> {
    sample_feasible_with(s, &SamplerConfig::default(), rng)
}

/// Uniform draws for unconstrained sets. Otherwise uniform starts refined by a
/// Gauss-Newton descent on the constraint residual, clipped to the unit box.
/// [`Error::Infeasible`] is inconclusive: the set may be empty or just hard to hit.
pub fn sample_feasible_with<S: FactorSpace + ?Sized, R: Rng + ?Sized>(
    s: &S,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<FactorAssignment> {
    let ids = s.ids();
    if !s.has_constraints() {
        return Ok(sample_uniform(ids, rng));
    }
    let sys = s.constraint_system();
    for _ in 0..cfg.restarts {
        let mut alpha: Vec<f64> = ids.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
        if descend(&sys, &mut alpha, cfg) {
            return FactorAssignment::zip(ids, &alpha);
        }
    }
    Err(Error::Infeasible {
        restarts: cfg.restarts,
    })
}

fn descend(sys: &ConstraintSystem, alpha: &mut [f64], cfg: &SamplerConfig) -> bool {
    let mut res = sys.residual(alpha);
    for _ in 0..cfg.iterations {
        if res <= cfg.tol {
            return true;
        }
        let r = sys.residual_vector(alpha);
        let step = -pinv(&jacobian(sys, alpha)) * r;
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = alpha
                .iter()
                .zip(step.iter())
                .map(|(a, d)| (a + t * d).clamp(-1.0, 1.0))
                .collect();
            let cres = sys.residual(&cand);
            if cres < res {
                alpha.copy_from_slice(&cand);
                res = cres;
                improved = true;
                break;
            }
            t *= cfg.shrink;
        }
        if !improved {
            break;
        }
    }
    res <= cfg.tol
}

fn jacobian(sys: &ConstraintSystem, alpha: &[f64]) -> DMatrix<f64> {
    let p = alpha.len();
    let mut jac = DMatrix::zeros(sys.a.nrows(), p);
    for j in 0..sys.a.ncols() {
        let col = sys.r.column(j);
        for k in 0..p {
            let ek = col[k];
            if ek == 0 {
                continue;
            }
            let mut d = f64::from(ek) * alpha[k].powi(ek as i32 - 1);
            for (l, &el) in col.iter().enumerate() {
                if l != k && el != 0 {
                    d *= alpha[l].powi(el as i32);
                }
            }
            if d != 0.0 {
                let mut target = jac.column_mut(k);
                target.axpy(d, &sys.a.column(j), 1.0);
            }
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpz::Cpz;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pinned_factor() {
        let s = Cpz::new(
            DVector::zeros(1),
            DMatrix::from_element(1, 2, 1.0),
            DMatrix::identity(2, 2),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            DMatrix::from_row_slice(2, 1, &[1, 0]),
            vec![FactorId(1), FactorId(2)],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sigma = sample_feasible(&s, &mut rng).unwrap();
        assert!((sigma.get(FactorId(1)).unwrap() - 1.0).abs() < 1e-9);
        assert!(s.constraint_residual(&sigma).unwrap() <= FEASIBILITY_TOL);
    }

    #[test]
    fn unconstrained_is_uniform() {
        let s = Cpz::zonotope(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sigma = sample_feasible(&s, &mut rng).unwrap();
        assert_eq!(sigma.len(), 2);
        assert_eq!(s.constraint_residual(&sigma).unwrap(), 0.0);
    }

    #[test]
    fn empty_set_is_infeasible() {
        // α = 2 has no solution in the unit box
        let s = Cpz::new(
            DVector::zeros(1),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::identity(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 2.0),
            DMatrix::identity(1, 1),
            vec![FactorId(1)],
        )
        .unwrap();
        let cfg = SamplerConfig {
            restarts: 20,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(
            sample_feasible_with(&s, &cfg, &mut rng),
            Err(Error::Infeasible { restarts: 20 })
        );
    }
}
