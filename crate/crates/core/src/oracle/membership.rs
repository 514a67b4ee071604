use nalgebra::{DMatrix, DVector};

use crate::cpmz::Cpmz;
use crate::cpz::{ConstraintSystem, Cpz, FactorSpace};
use crate::error::{shape, Error, Result};
use crate::FEASIBILITY_TOL;

/// Resolution and budget of the grid search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    pub per_axis: usize,
    /// Largest number of grid points visited before giving up.
    pub max_points: u64,
    pub feasibility_tol: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            per_axis: 201,
            max_points: 50_000_000,
            feasibility_tol: FEASIBILITY_TOL,
        }
    }
}

/// Whether some feasible grid point of `[−1, 1]^p` maps within `tol` (max norm)
/// of `point`. Resolution limited: `false` near a boundary is inconclusive.
pub fn membership_bruteforce(s: &Cpz, point: &DVector<f64>, tol: f64) -> Result<bool> {
    membership_bruteforce_with(s, point, tol, &GridConfig::default())
}

pub fn membership_bruteforce_with(
    s: &Cpz,
    point: &DVector<f64>,
    tol: f64,
    grid: &GridConfig,
) -> Result<bool> {
    if point.len() != s.dim() {
        return Err(shape(format!(
            "point has length {}, set has dimension {}",
            point.len(),
            s.dim()
        )));
    }
    let sys = s.constraint_system();
    search(s.num_factors(), &sys, grid, |alpha| {
        (s.eval_aligned(alpha) - point).amax() <= tol
    })
}

/// Matrix-set analogue of [`membership_bruteforce`].
pub fn membership_bruteforce_matrix(y: &Cpmz, point: &DMatrix<f64>, tol: f64) -> Result<bool> {
    if point.shape() != y.shape() {
        return Err(shape(format!(
            "point is {:?}, set is {:?}",
            point.shape(),
            y.shape()
        )));
    }
    let sys = y.constraint_system();
    search(y.num_factors(), &sys, &GridConfig::default(), |alpha| {
        (y.eval_aligned(alpha) - point).amax() <= tol
    })
}

fn search(
    p: usize,
    sys: &ConstraintSystem,
    grid: &GridConfig,
    hit: impl Fn(&[f64]) -> bool,
) -> Result<bool> {
    let n = grid.per_axis.max(2);
    let total = (n as u64)
        .checked_pow(p as u32)
        .filter(|t| *t <= grid.max_points)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!(
                "{n}^{p} grid points exceed the budget of {}",
                grid.max_points
            ))
        })?;
    let axis: Vec<f64> = (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .collect();
    let mut idx = vec![0usize; p];
    let mut alpha = vec![-1.0; p];
    let constrained = sys.a.nrows() > 0;
    for _ in 0..total {
        if (!constrained || sys.residual(&alpha) <= grid.feasibility_tol) && hit(&alpha) {
            return Ok(true);
        }
        for k in 0..p {
            idx[k] += 1;
            if idx[k] < n {
                alpha[k] = axis[idx[k]];
                break;
            }
            idx[k] = 0;
            alpha[k] = axis[0];
        }
    }
    Ok(false)
}
