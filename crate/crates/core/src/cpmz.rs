use nalgebra::{DMatrix, DVector};

use crate::cpz::{
    embed_rows, exponents_from_i64, permute_rows, row_map, sort_ids, ConstraintSystem, FactorSpace,
};
use crate::error::{shape, Result};
use crate::id::{FactorAssignment, FactorId};
use crate::linalg::monomial;

/// Constrained polynomial matrix zonotope
/// `{ C + Σᵢ (∏ₖ αₖ^{E(k,i)}) Gᵢ | Σⱼ (∏ₖ αₖ^{R(k,j)}) Aⱼ = B }`.
///
/// The number of constraint matrices `q` is independent of the number of
/// generator matrices `γ`; intersection produces `q ≠ γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpmz {
    c: DMatrix<f64>,
    g: Vec<DMatrix<f64>>,
    e: DMatrix<u32>,
    a: Vec<DMatrix<f64>>,
    b: DMatrix<f64>,
    r: DMatrix<u32>,
    id: Vec<FactorId>,
}

impl Cpmz {
    pub fn new(
        c: DMatrix<f64>,
        g: Vec<DMatrix<f64>>,
        e: DMatrix<u32>,
        a: Vec<DMatrix<f64>>,
        b: DMatrix<f64>,
        r: DMatrix<u32>,
        id: Vec<FactorId>,
    ) -> Result<Self> {
        if let Some(k) = g.iter().position(|gi| gi.shape() != c.shape()) {
            return Err(shape(format!(
                "generator {k} has shape {:?}, C has {:?}",
                g[k].shape(),
                c.shape()
            )));
        }
        if let Some(k) = a.iter().position(|ai| ai.shape() != b.shape()) {
            return Err(shape(format!(
                "constraint {k} has shape {:?}, B has {:?}",
                a[k].shape(),
                b.shape()
            )));
        }
        if e.ncols() != g.len() {
            return Err(shape(format!(
                "E has {} columns, {} generators",
                e.ncols(),
                g.len()
            )));
        }
        if r.ncols() != a.len() {
            return Err(shape(format!(
                "R has {} columns, {} constraint matrices",
                r.ncols(),
                a.len()
            )));
        }
        if e.nrows() != id.len() || r.nrows() != id.len() {
            return Err(shape(format!(
                "E has {} rows, R has {}, id has {}",
                e.nrows(),
                r.nrows(),
                id.len()
            )));
        }
        let mut out = Self {
            c,
            g,
            e,
            a,
            b,
            r,
            id,
        };
        if let Some(perm) = sort_ids(&out.id)? {
            out.e = permute_rows(&out.e, &perm);
            out.r = permute_rows(&out.r, &perm);
            out.id = perm.iter().map(|&k| out.id[k]).collect();
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_signed(
        c: DMatrix<f64>,
        g: Vec<DMatrix<f64>>,
        e: DMatrix<i64>,
        a: Vec<DMatrix<f64>>,
        b: DMatrix<f64>,
        r: DMatrix<i64>,
        id: Vec<FactorId>,
    ) -> Result<Self> {
        let e = exponents_from_i64(&e)?;
        let r = exponents_from_i64(&r)?;
        Self::new(c, g, e, a, b, r, id)
    }

    /// Unconstrained polynomial matrix zonotope.
    pub fn polynomial(
        c: DMatrix<f64>,
        g: Vec<DMatrix<f64>>,
        e: DMatrix<u32>,
        id: Vec<FactorId>,
    ) -> Result<Self> {
        let p = id.len();
        Self::new(
            c,
            g,
            e,
            Vec::new(),
            DMatrix::zeros(0, 0),
            DMatrix::zeros(p, 0),
            id,
        )
    }

    /// The singleton `{C}`.
    pub fn point(c: DMatrix<f64>) -> Self {
        Self {
            c,
            g: Vec::new(),
            e: DMatrix::zeros(0, 0),
            a: Vec::new(),
            b: DMatrix::zeros(0, 0),
            r: DMatrix::zeros(0, 0),
            id: Vec::new(),
        }
    }

    pub(crate) fn from_parts(
        c: DMatrix<f64>,
        g: Vec<DMatrix<f64>>,
        e: DMatrix<u32>,
        a: Vec<DMatrix<f64>>,
        b: DMatrix<f64>,
        r: DMatrix<u32>,
        id: Vec<FactorId>,
    ) -> Self {
        debug_assert!(g.iter().all(|gi| gi.shape() == c.shape()));
        debug_assert!(a.iter().all(|ai| ai.shape() == b.shape()));
        debug_assert_eq!(e.ncols(), g.len());
        debug_assert_eq!(r.ncols(), a.len());
        debug_assert_eq!(e.nrows(), id.len());
        debug_assert_eq!(r.nrows(), id.len());
        debug_assert!(id.windows(2).all(|w| w[0] < w[1]));
        Self {
            c,
            g,
            e,
            a,
            b,
            r,
            id,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.c.shape()
    }
    pub fn num_generators(&self) -> usize {
        self.g.len()
    }
    /// Number of constraint matrices `q`.
    pub fn num_constraint_terms(&self) -> usize {
        self.a.len()
    }
    /// Number of scalar constraint rows after vectorization.
    pub fn num_constraint_rows(&self) -> usize {
        self.b.len()
    }
    pub fn num_factors(&self) -> usize {
        self.id.len()
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn g(&self) -> &[DMatrix<f64>] {
        &self.g
    }
    pub fn e(&self) -> &DMatrix<u32> {
        &self.e
    }
    pub fn a(&self) -> &[DMatrix<f64>] {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn r(&self) -> &DMatrix<u32> {
        &self.r
    }
    pub fn id(&self) -> &[FactorId] {
        &self.id
    }

    pub fn exponent_column(&self, i: usize) -> &[u32] {
        let p = self.id.len();
        &self.e.as_slice()[i * p..(i + 1) * p]
    }

    pub fn eval_aligned(&self, alpha: &[f64]) -> DMatrix<f64> {
        assert_eq!(alpha.len(), self.id.len(), "factor vector length");
        let mut out = self.c.clone();
        for (i, gi) in self.g.iter().enumerate() {
            let m = monomial(self.exponent_column(i), alpha);
            if m != 0.0 {
                out += gi * m;
            }
        }
        out
    }

    pub fn eval_matrix(&self, sigma: &FactorAssignment) -> Result<DMatrix<f64>> {
        Ok(self.eval_aligned(&sigma.values_for(&self.id)?))
    }

    pub fn constraint_residual(&self, sigma: &FactorAssignment) -> Result<f64> {
        let alpha = sigma.values_for(&self.id)?;
        Ok(self.constraint_system().residual(&alpha))
    }

    pub fn with_ids(&self, ids: &[FactorId]) -> Result<Self> {
        let map = row_map(&self.id, ids)?;
        Ok(Self::from_parts(
            self.c.clone(),
            self.g.clone(),
            embed_rows(&self.e, &map, ids.len()),
            self.a.clone(),
            self.b.clone(),
            embed_rows(&self.r, &map, ids.len()),
            ids.to_vec(),
        ))
    }

    pub fn relabel(&self, map: &std::collections::HashMap<FactorId, FactorId>) -> Result<Self> {
        let id = self.id.iter().map(|k| *map.get(k).unwrap_or(k)).collect();
        Self::new(
            self.c.clone(),
            self.g.clone(),
            self.e.clone(),
            self.a.clone(),
            self.b.clone(),
            self.r.clone(),
            id,
        )
    }
}

impl FactorSpace for Cpmz {
    fn ids(&self) -> &[FactorId] {
        &self.id
    }
    fn constraint_system(&self) -> ConstraintSystem {
        let m = self.num_constraint_rows();
        let mut a = DMatrix::zeros(m, self.a.len());
        for (j, aj) in self.a.iter().enumerate() {
            a.column_mut(j).copy_from_slice(aj.as_slice());
        }
        let b = DVector::from_column_slice(self.b.as_slice());
        ConstraintSystem {
            a,
            b,
            r: self.r.clone(),
        }
    }
    fn has_constraints(&self) -> bool {
        self.num_constraint_rows() > 0
    }
}
