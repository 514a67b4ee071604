//! Data matrices, noise concatenation, data-consistent model sets and their refinement.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{affine_cpmz, intersect_cpmz_relabeled};
use crate::cpmz::Cpmz;
use crate::cpz::Cpz;
use crate::error::{shape, Error, Result};
use crate::id::{fresh_ids, FactorId};
use crate::linalg::{numerical_rank, pinv};

/// One recorded step `(x(k), u(k)) → x(k+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub x: DVector<f64>,
    pub u: DVector<f64>,
    pub x_next: DVector<f64>,
}

/// Stacked samples `X⁺ = [x(1) … x(T)]`, `X⁻ = [x(0) … x(T−1)]`, `U⁻ = [u(0) … u(T−1)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataBatch {
    pub xplus: DMatrix<f64>,
    pub xminus: DMatrix<f64>,
    pub uminus: DMatrix<f64>,
    /// Caller-chosen label recorded in the provenance of derived model sets.
    pub tag: u64,
}

fn columns_of(v: &[DVector<f64>], rows: usize) -> Result<DMatrix<f64>> {
    if v.iter().any(|x| x.len() != rows) {
        return Err(shape("samples have inconsistent dimensions"));
    }
    Ok(DMatrix::from_fn(rows, v.len(), |i, j| v[j][i]))
}

impl DataBatch {
    pub fn new(xplus: DMatrix<f64>, xminus: DMatrix<f64>, uminus: DMatrix<f64>) -> Result<Self> {
        let t = xplus.ncols();
        if t == 0 || xminus.ncols() != t || uminus.ncols() != t {
            return Err(shape("batch matrices need equal, nonzero column counts"));
        }
        if xplus.nrows() != xminus.nrows() {
            return Err(shape("X⁺ and X⁻ row counts differ"));
        }
        Ok(Self {
            xplus,
            xminus,
            uminus,
            tag: 0,
        })
    }

    pub fn from_transitions(tr: &[Transition]) -> Result<Self> {
        let first = tr.first().ok_or(Error::TooShort(tr.len()))?;
        let (nx, nu) = (first.x.len(), first.u.len());
        let xs: Vec<_> = tr.iter().map(|t| t.x.clone()).collect();
        let us: Vec<_> = tr.iter().map(|t| t.u.clone()).collect();
        let xn: Vec<_> = tr.iter().map(|t| t.x_next.clone()).collect();
        Self::new(
            columns_of(&xn, nx)?,
            columns_of(&xs, nx)?,
            columns_of(&us, nu)?,
        )
    }

    /// Column-wise concatenation; the tag of the first batch is kept.
    pub fn concat(batches: &[DataBatch]) -> Result<Self> {
        let first = batches.first().ok_or(Error::TooShort(0))?;
        let (nx, nu) = (first.n_x(), first.n_u());
        if batches.iter().any(|b| b.n_x() != nx || b.n_u() != nu) {
            return Err(shape("batches have different dimensions"));
        }
        let cat = |f: fn(&DataBatch) -> &DMatrix<f64>, rows: usize| {
            let cols: usize = batches.iter().map(|b| f(b).ncols()).sum();
            let data: Vec<f64> = batches
                .iter()
                .flat_map(|b| f(b).as_slice().iter().copied())
                .collect();
            DMatrix::from_vec(rows, cols, data)
        };
        let mut out = Self::new(
            cat(|b| &b.xplus, nx),
            cat(|b| &b.xminus, nx),
            cat(|b| &b.uminus, nu),
        )?;
        out.tag = first.tag;
        Ok(out)
    }

    pub fn with_tag(mut self, tag: u64) -> Self {
        self.tag = tag;
        self
    }

    pub fn len(&self) -> usize {
        self.xplus.ncols()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn n_x(&self) -> usize {
        self.xplus.nrows()
    }
    pub fn n_u(&self) -> usize {
        self.uminus.nrows()
    }

    /// `D⁻ = [X⁻; U⁻]`.
    pub fn stacked(&self) -> DMatrix<f64> {
        let t = self.len();
        let (nx, nu) = (self.n_x(), self.n_u());
        let mut d = DMatrix::zeros(nx + nu, t);
        d.rows_mut(0, nx).copy_from(&self.xminus);
        d.rows_mut(nx, nu).copy_from(&self.uminus);
        d
    }

    /// `z_t = [x(t); u(t)]` for column `t`.
    pub fn z(&self, t: usize) -> DVector<f64> {
        let mut z = DVector::zeros(self.n_x() + self.n_u());
        z.rows_mut(0, self.n_x()).copy_from(&self.xminus.column(t));
        z.rows_mut(self.n_x(), self.n_u())
            .copy_from(&self.uminus.column(t));
        z
    }
}

/// Builds a batch from one trajectory: `states[0..=T]`, `inputs[0..T]` (extra inputs ignored).
pub fn build_batch(states: &[DVector<f64>], inputs: &[DVector<f64>]) -> Result<DataBatch> {
    if states.len() < 2 {
        return Err(Error::TooShort(states.len()));
    }
    let t = states.len() - 1;
    if inputs.len() < t {
        return Err(shape(format!(
            "{} inputs for {t} transitions",
            inputs.len()
        )));
    }
    let nx = states[0].len();
    let nu = inputs[0].len();
    DataBatch::new(
        columns_of(&states[1..], nx)?,
        columns_of(&states[..t], nx)?,
        columns_of(&inputs[..t], nu)?,
    )
}

/// Ordered monomials `h(z) = [z^{α₁}, …, z^{α_{m_a}}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialBasis {
    n_z: usize,
    exponents: Vec<Vec<u32>>,
    degree_bound: u32,
}

fn compositions(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// All monomials in `n_z` variables of total degree at most `d`, graded lexicographic.
pub fn monomial_basis(n_z: usize, d: u32) -> MonomialBasis {
    let mut exponents = Vec::new();
    for k in 0..=d {
        if n_z == 0 {
            if k == 0 {
                exponents.push(Vec::new());
            }
            continue;
        }
        compositions(k, n_z, &mut Vec::new(), &mut exponents);
    }
    MonomialBasis {
        n_z,
        exponents,
        degree_bound: d,
    }
}

/// A caller-ordered basis; exponent vectors must be distinct and of length `n_z`.
pub fn monomial_basis_custom(n_z: usize, exponents: Vec<Vec<u32>>) -> Result<MonomialBasis> {
    let mut seen = HashSet::new();
    for e in &exponents {
        if e.len() != n_z {
            return Err(shape(format!(
                "exponent vector {e:?} has length {}, expected {n_z}",
                e.len()
            )));
        }
        if !seen.insert(e.clone()) {
            return Err(Error::DuplicateMonomial(e.clone()));
        }
    }
    let degree_bound = exponents.iter().map(|e| e.iter().sum()).max().unwrap_or(0);
    Ok(MonomialBasis {
        n_z,
        exponents,
        degree_bound,
    })
}

impl MonomialBasis {
    pub fn n_z(&self) -> usize {
        self.n_z
    }
    pub fn len(&self) -> usize {
        self.exponents.len()
    }
    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }
    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }
    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    /// `h(z)`.
    pub fn eval(&self, z: &[f64]) -> DVector<f64> {
        assert_eq!(z.len(), self.n_z, "basis variable count");
        DVector::from_iterator(
            self.len(),
            self.exponents.iter().map(|e| crate::linalg::monomial(e, z)),
        )
    }
}

/// `Ω = [h(z₀) … h(z_{T−1})]`.
pub fn regressor_matrix(batch: &DataBatch, basis: &MonomialBasis) -> Result<DMatrix<f64>> {
    if batch.n_x() + batch.n_u() != basis.n_z() {
        return Err(shape(format!(
            "basis has {} variables, batch has {} + {}",
            basis.n_z(),
            batch.n_x(),
            batch.n_u()
        )));
    }
    let mut out = DMatrix::zeros(basis.len(), batch.len());
    for t in 0..batch.len() {
        out.column_mut(t)
            .copy_from(&basis.eval(batch.z(t).as_slice()));
    }
    Ok(out)
}

/// The matrix set `[w(1) … w(T)]` with independent copies of the noise set per column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMatrix {
    pub set: Cpmz,
    /// `column_ids[j][k]` replaces the `k`-th factor of the noise set in column `j`.
    pub column_ids: Vec<Vec<FactorId>>,
}

/// Concatenates `t` independent copies of `zw` into an `n × t` matrix set.
///
/// Generator `i·t + j` (0-based) places `g_w⁽ⁱ⁾` in column `j`; constraint
/// matrices are placed the same way with `B = [b_w … b_w]`.
pub fn concat_noise(zw: &Cpz, t: usize) -> Result<NoiseMatrix> {
    if t == 0 {
        return Err(Error::InvalidArgument(
            "noise concatenation needs T ≥ 1".into(),
        ));
    }
    let (n, pw) = (zw.dim(), zw.num_factors());
    let (hw, qw, ncw) = (
        zw.num_generators(),
        zw.num_constraint_terms(),
        zw.num_constraints(),
    );
    let ids = fresh_ids(pw * t);
    let column_ids: Vec<Vec<FactorId>> = ids.chunks(pw.max(1)).take(t).map(<[_]>::to_vec).collect();
    let column_ids = if pw == 0 {
        vec![Vec::new(); t]
    } else {
        column_ids
    };
    let p = pw * t;

    let mut c = DMatrix::zeros(n, t);
    for j in 0..t {
        c.column_mut(j).copy_from(zw.c());
    }
    let mut g = Vec::with_capacity(hw * t);
    let mut e = DMatrix::<u32>::zeros(p, hw * t);
    for i in 0..hw {
        for j in 0..t {
            let mut gij = DMatrix::zeros(n, t);
            gij.column_mut(j).copy_from(&zw.g().column(i));
            g.push(gij);
            let col = i * t + j;
            for k in 0..pw {
                e[(j * pw + k, col)] = zw.e()[(k, i)];
            }
        }
    }
    let mut a = Vec::with_capacity(qw * t);
    let mut r = DMatrix::<u32>::zeros(p, qw * t);
    for i in 0..qw {
        for j in 0..t {
            let mut aij = DMatrix::zeros(ncw, t);
            aij.column_mut(j).copy_from(&zw.a().column(i));
            a.push(aij);
            let col = i * t + j;
            for k in 0..pw {
                r[(j * pw + k, col)] = zw.r()[(k, i)];
            }
        }
    }
    let mut b = DMatrix::zeros(ncw, t);
    for j in 0..t {
        b.column_mut(j).copy_from(zw.b());
    }
    Ok(NoiseMatrix {
        set: Cpmz::from_parts(c, g, e, a, b, r, ids),
        column_ids,
    })
}

/// Which factors carried the noise of each data column of one batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseColumns {
    pub batch: u64,
    pub column_ids: Vec<Vec<FactorId>>,
}

/// A set of system matrices consistent with recorded data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSet {
    pub set: Cpmz,
    pub provenance: Vec<u64>,
    pub noise_columns: Vec<NoiseColumns>,
}

fn model_set_from(
    batch: &DataBatch,
    regressor: &DMatrix<f64>,
    mw: &NoiseMatrix,
) -> Result<ModelSet> {
    if mw.set.shape() != batch.xplus.shape() {
        return Err(shape(format!(
            "noise matrix is {:?}, X⁺ is {:?}",
            mw.set.shape(),
            batch.xplus.shape()
        )));
    }
    let required = regressor.nrows();
    let rank = numerical_rank(regressor);
    if rank < required {
        return Err(Error::RankDeficient { rank, required });
    }
    let set = affine_cpmz(&batch.xplus, &mw.set, &pinv(regressor))?;
    Ok(ModelSet {
        set,
        provenance: vec![batch.tag],
        noise_columns: vec![NoiseColumns {
            batch: batch.tag,
            column_ids: mw.column_ids.clone(),
        }],
    })
}

/// `(X⁺ − M_w) [X⁻; U⁻]†`, the matrices `[Φ Γ]` consistent with the batch.
pub fn model_set_lti(batch: &DataBatch, mw: &NoiseMatrix) -> Result<ModelSet> {
    model_set_from(batch, &batch.stacked(), mw)
}

/// `(X⁺ − M_w) Ω†`, the coefficient matrices `Θ` consistent with the batch.
pub fn model_set_poly(
    batch: &DataBatch,
    basis: &MonomialBasis,
    mw: &NoiseMatrix,
) -> Result<ModelSet> {
    model_set_from(batch, &regressor_matrix(batch, basis)?, mw)
}

/// Intersects the current model set with one learned from new data.
///
/// The current set comes first so its generators, and the factors they use,
/// carry over unchanged.
pub fn refine(current: &ModelSet, incoming: &ModelSet) -> Result<ModelSet> {
    let (set, relabel) = intersect_cpmz_relabeled(&current.set, &incoming.set)?;
    let mut noise_columns = current.noise_columns.clone();
    noise_columns.extend(incoming.noise_columns.iter().map(|nc| {
        NoiseColumns {
            batch: nc.batch,
            column_ids: nc
                .column_ids
                .iter()
                .map(|col| col.iter().map(|k| *relabel.get(k).unwrap_or(k)).collect())
                .collect(),
        }
    }));
    let mut provenance = current.provenance.clone();
    provenance.extend_from_slice(&incoming.provenance);
    Ok(ModelSet {
        set,
        provenance,
        noise_columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn build_batch_slices() {
        let states = [dv(&[0.0]), dv(&[1.0]), dv(&[2.0])];
        let inputs = [dv(&[5.0]), dv(&[6.0])];
        let b = build_batch(&states, &inputs).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.xplus.as_slice(), &[1.0, 2.0]);
        assert_eq!(b.xminus.as_slice(), &[0.0, 1.0]);
        assert_eq!(build_batch(&states[..1], &inputs), Err(Error::TooShort(1)));
    }

    #[test]
    fn full_basis_order() {
        let b = monomial_basis(2, 2);
        let expect: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(b.exponents(), expect.as_slice());
        assert_eq!(monomial_basis(3, 0).len(), 1);
        assert_eq!(monomial_basis(4, 3).len(), 35);
    }

    #[test]
    fn custom_basis_rejects_duplicates() {
        let err = monomial_basis_custom(2, vec![vec![1, 0], vec![1, 0]]);
        assert_eq!(err, Err(Error::DuplicateMonomial(vec![1, 0])));
    }

    #[test]
    fn regressor_examples() {
        let states = [dv(&[1.0]), dv(&[2.0]), dv(&[3.0])];
        let inputs: Vec<DVector<f64>> = vec![DVector::zeros(0); 2];
        let b = build_batch(&states, &inputs).unwrap();
        let ones = regressor_matrix(&b, &monomial_basis(1, 0)).unwrap();
        assert_eq!(ones.as_slice(), &[1.0, 1.0]);
        let lin = regressor_matrix(&b, &monomial_basis_custom(1, vec![vec![1]]).unwrap()).unwrap();
        assert_eq!(lin.as_slice(), &[1.0, 2.0]);
        let single = build_batch(&[dv(&[2.0]), dv(&[0.0])], &inputs[..1]).unwrap();
        let quad = regressor_matrix(&single, &monomial_basis(1, 2)).unwrap();
        assert_eq!(quad.as_slice(), &[1.0, 2.0, 4.0]);
    }

    #[test]
    fn concat_noise_scalar() {
        let zw = Cpz::zonotope(dv(&[0.0]), DMatrix::from_element(1, 1, 0.005)).unwrap();
        let m = concat_noise(&zw, 2).unwrap();
        assert_eq!(m.set.num_generators(), 2);
        assert_eq!(m.set.g()[0].as_slice(), &[0.005, 0.0]);
        assert_eq!(m.set.g()[1].as_slice(), &[0.0, 0.005]);
        assert_eq!(m.column_ids.len(), 2);
        assert_ne!(m.column_ids[0], m.column_ids[1]);
        let z = concat_noise(&Cpz::point(dv(&[0.0, 0.0])), 3).unwrap();
        assert_eq!(z.set.num_generators(), 0);
        assert_eq!(z.set.c(), &DMatrix::zeros(2, 3));
    }

    #[test]
    fn too_few_columns_is_rank_deficient() {
        let states: Vec<_> = (0..3).map(|k| dv(&[k as f64, (k * k) as f64])).collect();
        let inputs: Vec<_> = (0..2).map(|k| dv(&[1.0 + k as f64])).collect();
        let b = build_batch(&states, &inputs).unwrap();
        let mw = concat_noise(&Cpz::point(DVector::zeros(2)), 2).unwrap();
        assert_eq!(
            model_set_lti(&b, &mw),
            Err(Error::RankDeficient {
                rank: 2,
                required: 3
            })
        );
    }
}
