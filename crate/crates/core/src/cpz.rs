use nalgebra::{DMatrix, DVector};

use crate::error::{shape, Error, Result};
use crate::id::{fresh_ids, FactorAssignment, FactorId};
use crate::linalg::monomial;

/// Constrained polynomial zonotope
/// `{ c + Σᵢ (∏ₖ αₖ^{E(k,i)}) G(·,i) | Σⱼ (∏ₖ αₖ^{R(k,j)}) A(·,j) = b, α ∈ [−1,1]ᵖ }`.
///
/// The id list is kept sorted ascending; rows of `E` and `R` follow it.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpz {
    c: DVector<f64>,
    g: DMatrix<f64>,
    e: DMatrix<u32>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    r: DMatrix<u32>,
    id: Vec<FactorId>,
}

/// A polynomial equality system `Σⱼ (∏ₖ αₖ^{R(k,j)}) A(·,j) = b` over an id list.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub r: DMatrix<u32>,
}

impl ConstraintSystem {
    /// `Σⱼ mono(R(·,j)) A(·,j) − b` at factor values aligned with the id list.
    pub fn residual_vector(&self, alpha: &[f64]) -> DVector<f64> {
        let mut out = -self.b.clone();
        let p = self.r.nrows();
        let rs = self.r.as_slice();
        for j in 0..self.a.ncols() {
            let m = monomial(&rs[j * p..(j + 1) * p], alpha);
            if m != 0.0 {
                out.axpy(m, &self.a.column(j), 1.0);
            }
        }
        out
    }

    pub fn residual(&self, alpha: &[f64]) -> f64 {
        self.residual_vector(alpha).norm()
    }
}

/// Anything whose factors may be constrained: both set types implement it.
pub trait FactorSpace {
    fn ids(&self) -> &[FactorId];
    /// The constraints in vectorized form (one column per constraint term).
    fn constraint_system(&self) -> ConstraintSystem;
    fn has_constraints(&self) -> bool;
}

/// Validates an id list and returns the permutation that sorts it.
pub(crate) fn sort_ids(id: &[FactorId]) -> Result<Option<Vec<usize>>> {
    let mut perm: Vec<usize> = (0..id.len()).collect();
    perm.sort_by_key(|&k| id[k]);
    for w in perm.windows(2) {
        if id[w[0]] == id[w[1]] {
            return Err(Error::DuplicateId(id[w[0]]));
        }
    }
    if perm.iter().enumerate().all(|(i, &k)| i == k) {
        Ok(None)
    } else {
        Ok(Some(perm))
    }
}

pub(crate) fn permute_rows(m: &DMatrix<u32>, perm: &[usize]) -> DMatrix<u32> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(perm[i], j)])
}

/// Embeds exponent rows into a larger id list; `map[k]` is the target row of source row `k`.
pub(crate) fn embed_rows(m: &DMatrix<u32>, map: &[usize], rows: usize) -> DMatrix<u32> {
    let mut out = DMatrix::zeros(rows, m.ncols());
    for (k, &t) in map.iter().enumerate() {
        for j in 0..m.ncols() {
            out[(t, j)] = m[(k, j)];
        }
    }
    out
}

pub(crate) fn exponents_from_i64(m: &DMatrix<i64>) -> Result<DMatrix<u32>> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] < 0 {
                return Err(Error::NegativeExponent { row: i, col: j });
            }
        }
    }
    m.iter()
        .map(|v| {
            u32::try_from(*v).map_err(|_| Error::InvalidArgument(format!("exponent {v} too large")))
        })
        .collect::<Result<Vec<u32>>>()
        .map(|d| DMatrix::from_vec(m.nrows(), m.ncols(), d))
}

impl Cpz {
    /// Validated constructor; the id list may be given in any order.
    pub fn new(
        c: DVector<f64>,
        g: DMatrix<f64>,
        e: DMatrix<u32>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        r: DMatrix<u32>,
        id: Vec<FactorId>,
    ) -> Result<Self> {
        let n = c.len();
        if g.nrows() != n {
            return Err(shape(format!("G has {} rows, c has {n}", g.nrows())));
        }
        if g.ncols() != e.ncols() {
            return Err(shape(format!(
                "G has {} columns, E has {}",
                g.ncols(),
                e.ncols()
            )));
        }
        if a.ncols() != r.ncols() {
            return Err(shape(format!(
                "A has {} columns, R has {}",
                a.ncols(),
                r.ncols()
            )));
        }
        if a.nrows() != b.len() {
            return Err(shape(format!(
                "A has {} rows, b has {}",
                a.nrows(),
                b.len()
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

    /// Constructor taking signed exponents, rejecting negative entries.
    #[allow(clippy::too_many_arguments)]
    pub fn from_signed(
        c: DVector<f64>,
        g: DMatrix<f64>,
        e: DMatrix<i64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        r: DMatrix<i64>,
        id: Vec<FactorId>,
    ) -> Result<Self> {
        let e = exponents_from_i64(&e)?;
        let r = exponents_from_i64(&r)?;
        Self::new(c, g, e, a, b, r, id)
    }

    /// Unconstrained polynomial zonotope.
    pub fn polynomial(
        c: DVector<f64>,
        g: DMatrix<f64>,
        e: DMatrix<u32>,
        id: Vec<FactorId>,
    ) -> Result<Self> {
        let p = id.len();
        Self::new(
            c,
            g,
            e,
            DMatrix::zeros(0, 0),
            DVector::zeros(0),
            DMatrix::zeros(p, 0),
            id,
        )
    }

    /// The singleton `{c}`.
    pub fn point(c: DVector<f64>) -> Self {
        let n = c.len();
        Self {
            c,
            g: DMatrix::zeros(n, 0),
            e: DMatrix::zeros(0, 0),
            a: DMatrix::zeros(0, 0),
            b: DVector::zeros(0),
            r: DMatrix::zeros(0, 0),
            id: Vec::new(),
        }
    }

    /// Zonotope `⟨c, G⟩` with fresh ids, one per generator.
    pub fn zonotope(c: DVector<f64>, g: DMatrix<f64>) -> Result<Self> {
        let h = g.ncols();
        Self::polynomial(c, g, DMatrix::identity(h, h), fresh_ids(h))
    }

    /// Assembles a CPZ whose invariants the caller has already established.
    pub(crate) fn from_parts(
        c: DVector<f64>,
        g: DMatrix<f64>,
        e: DMatrix<u32>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        r: DMatrix<u32>,
        id: Vec<FactorId>,
    ) -> Self {
        debug_assert_eq!(g.nrows(), c.len());
        debug_assert_eq!(g.ncols(), e.ncols());
        debug_assert_eq!(a.ncols(), r.ncols());
        debug_assert_eq!(a.nrows(), b.len());
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

    pub fn dim(&self) -> usize {
        self.c.len()
    }
    pub fn num_generators(&self) -> usize {
        self.g.ncols()
    }
    /// Number of constraint rows `n_c`.
    pub fn num_constraints(&self) -> usize {
        self.a.nrows()
    }
    /// Number of constraint terms `q` (columns of `A` and `R`).
    pub fn num_constraint_terms(&self) -> usize {
        self.a.ncols()
    }
    pub fn num_factors(&self) -> usize {
        self.id.len()
    }
    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }
    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }
    pub fn e(&self) -> &DMatrix<u32> {
        &self.e
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }
    pub fn r(&self) -> &DMatrix<u32> {
        &self.r
    }
    pub fn id(&self) -> &[FactorId] {
        &self.id
    }

    /// Exponent column `i` as a slice.
    pub fn exponent_column(&self, i: usize) -> &[u32] {
        let p = self.id.len();
        &self.e.as_slice()[i * p..(i + 1) * p]
    }

    /// Evaluates the defining sum at factor values aligned with `self.id()`.
    pub fn eval_aligned(&self, alpha: &[f64]) -> DVector<f64> {
        assert_eq!(alpha.len(), self.id.len(), "factor vector length");
        let mut out = self.c.clone();
        for i in 0..self.g.ncols() {
            let m = monomial(self.exponent_column(i), alpha);
            if m != 0.0 {
                out.axpy(m, &self.g.column(i), 1.0);
            }
        }
        out
    }

    /// Evaluates the defining sum; constraints are not checked.
    pub fn eval_point(&self, sigma: &FactorAssignment) -> Result<DVector<f64>> {
        Ok(self.eval_aligned(&sigma.values_for(&self.id)?))
    }

    pub fn constraint_residual(&self, sigma: &FactorAssignment) -> Result<f64> {
        let alpha = sigma.values_for(&self.id)?;
        Ok(self.constraint_residual_aligned(&alpha))
    }

    pub fn constraint_residual_aligned(&self, alpha: &[f64]) -> f64 {
        self.constraint_system().residual(alpha)
    }

    /// Re-expresses the set over a larger sorted id list containing `self.id()`.
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

    /// Renames factors; ids not in `map` keep their name.
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

    /// Copy with every factor replaced by a fresh one. Returns the new ids in the
    /// order of the original id list, so `old[k]` became `new[k]`.
    pub fn with_fresh_ids(&self) -> (Self, Vec<FactorId>) {
        let fresh = fresh_ids(self.id.len());
        // fresh ids are increasing, so the sorted order is preserved
        let out = Self::from_parts(
            self.c.clone(),
            self.g.clone(),
            self.e.clone(),
            self.a.clone(),
            self.b.clone(),
            self.r.clone(),
            fresh.clone(),
        );
        (out, fresh)
    }

    /// `−S` sharing the factors of `S`.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.c = -out.c;
        out.g = -out.g;
        out
    }
}

/// Row positions of `src` ids within the sorted list `dst`.
pub(crate) fn row_map(src: &[FactorId], dst: &[FactorId]) -> Result<Vec<usize>> {
    src.iter()
        .map(|k| {
            dst.binary_search(k)
                .map_err(|_| Error::InvalidArgument(format!("target id list lacks {k}")))
        })
        .collect()
}

impl FactorSpace for Cpz {
    fn ids(&self) -> &[FactorId] {
        &self.id
    }
    fn constraint_system(&self) -> ConstraintSystem {
        ConstraintSystem {
            a: self.a.clone(),
            b: self.b.clone(),
            r: self.r.clone(),
        }
    }
    fn has_constraints(&self) -> bool {
        self.a.nrows() > 0
    }
}
