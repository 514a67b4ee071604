//! Exact simplification: merges generators that share a monomial, folds constant
//! monomials into the center (or the right-hand side), drops zero terms and
//! duplicate constraint rows, and forgets factors that no longer occur.
//!
//! The fused products feed terms into the same accumulator in the order the
//! literal operation would emit them, so `hadamard_compact(a, b)` is bitwise
//! equal to `compact_cpz(&hadamard_exact(a, b)?)`.

use std::collections::{HashMap, HashSet};

use nalgebra::{DMatrix, DVector};

use super::merge_id;
use crate::cpmz::Cpmz;
use crate::cpz::{ConstraintSystem, Cpz, FactorSpace};
use crate::error::{shape, Result};
use crate::id::FactorId;

/// Sums vector-valued terms keyed by exponent column.
struct TermAccumulator {
    p: usize,
    n: usize,
    index: HashMap<Box<[u32]>, usize>,
    exps: Vec<u32>,
    vals: Vec<f64>,
    constant: Vec<f64>,
}

impl TermAccumulator {
    fn new(p: usize, n: usize, constant: &[f64]) -> Self {
        Self {
            p,
            n,
            index: HashMap::new(),
            exps: Vec::new(),
            vals: Vec::new(),
            constant: constant.to_vec(),
        }
    }

    fn add(&mut self, exp: &[u32], val: &[f64]) {
        if exp.iter().all(|e| *e == 0) {
            for (c, v) in self.constant.iter_mut().zip(val) {
                *c += v;
            }
            return;
        }
        let slot = match self.index.get(exp) {
            Some(&k) => k,
            None => {
                let k = self.index.len();
                self.index.insert(exp.into(), k);
                self.exps.extend_from_slice(exp);
                self.vals.resize(self.vals.len() + self.n, 0.0);
                k
            }
        };
        for (d, v) in self.vals[slot * self.n..(slot + 1) * self.n]
            .iter_mut()
            .zip(val)
        {
            *d += v;
        }
    }

    /// Constant part, values and exponents with all-zero value columns removed.
    fn finish(self) -> (Vec<f64>, DMatrix<f64>, DMatrix<u32>) {
        let (p, n) = (self.p, self.n);
        let count = self.index.len();
        let mut vals = Vec::with_capacity(self.vals.len());
        let mut exps = Vec::with_capacity(self.exps.len());
        for k in 0..count {
            let v = &self.vals[k * n..(k + 1) * n];
            if v.iter().any(|x| *x != 0.0) {
                vals.extend_from_slice(v);
                exps.extend_from_slice(&self.exps[k * p..(k + 1) * p]);
            }
        }
        let kept = vals.len().checked_div(n).unwrap_or(0);
        (
            self.constant,
            DMatrix::from_vec(n, kept, vals),
            DMatrix::from_vec(p, kept, exps),
        )
    }
}

fn columns(m: &DMatrix<f64>) -> impl Iterator<Item = &[f64]> {
    let n = m.nrows();
    (0..m.ncols()).map(move |j| &m.as_slice()[j * n..(j + 1) * n])
}

fn exp_columns(m: &DMatrix<u32>) -> impl Iterator<Item = &[u32]> {
    let p = m.nrows();
    (0..m.ncols()).map(move |j| &m.as_slice()[j * p..(j + 1) * p])
}

fn canonical_bits(x: f64) -> u64 {
    (x + 0.0).to_bits()
}

/// Compacts a vectorized constraint system: merges terms, moves constant terms
/// to the right-hand side, and removes trivial and duplicate rows.
fn compact_system(sys: &ConstraintSystem) -> (DMatrix<f64>, DVector<f64>, DMatrix<u32>) {
    let p = sys.r.nrows();
    let m = sys.a.nrows();
    let neg_b: Vec<f64> = sys.b.iter().map(|x| -x).collect();
    let mut acc = TermAccumulator::new(p, m, &neg_b);
    for (a, r) in columns(&sys.a).zip(exp_columns(&sys.r)) {
        acc.add(r, a);
    }
    let (neg_b, a, r) = acc.finish();
    let b: Vec<f64> = neg_b.iter().map(|x| -x).collect();

    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut keep_rows = Vec::new();
    for (i, &bi) in b.iter().enumerate().take(m) {
        let row: Vec<f64> = a.row(i).iter().copied().collect();
        if row.iter().all(|x| *x == 0.0) && bi == 0.0 {
            continue;
        }
        let mut key: Vec<u64> = row.iter().map(|x| canonical_bits(*x)).collect();
        key.push(canonical_bits(bi));
        if seen.insert(key) {
            keep_rows.push(i);
        }
    }
    let a = a.select_rows(&keep_rows);
    let b = DVector::from_iterator(keep_rows.len(), keep_rows.iter().map(|&i| b[i]));
    let live: Vec<usize> = (0..a.ncols())
        .filter(|&j| a.column(j).iter().any(|x| *x != 0.0))
        .collect();
    (a.select_columns(&live), b, r.select_columns(&live))
}

/// Removes factors whose rows are zero in every exponent matrix.
fn prune_ids(id: &[FactorId], mats: &[&DMatrix<u32>]) -> (Vec<usize>, Vec<FactorId>) {
    let used: Vec<usize> = (0..id.len())
        .filter(|&k| mats.iter().any(|m| m.row(k).iter().any(|e| *e != 0)))
        .collect();
    let ids = used.iter().map(|&k| id[k]).collect();
    (used, ids)
}

fn assemble(
    id: &[FactorId],
    center: Vec<f64>,
    g: DMatrix<f64>,
    e: DMatrix<u32>,
    sys: (DMatrix<f64>, DVector<f64>, DMatrix<u32>),
) -> Cpz {
    let (a, b, r) = sys;
    let (rows, ids) = prune_ids(id, &[&e, &r]);
    Cpz::from_parts(
        DVector::from_vec(center),
        g,
        e.select_rows(&rows),
        a,
        b,
        r.select_rows(&rows),
        ids,
    )
}

/// Exact compaction of a CPZ (same set, same evaluation at every assignment).
pub fn compact_cpz(s: &Cpz) -> Cpz {
    let mut acc = TermAccumulator::new(s.num_factors(), s.dim(), s.c().as_slice());
    for (g, e) in columns(s.g()).zip(exp_columns(s.e())) {
        acc.add(e, g);
    }
    let (c, g, e) = acc.finish();
    assemble(s.id(), c, g, e, compact_system(&s.constraint_system()))
}

fn stacked_system(s1: &Cpz, s2: &Cpz) -> ConstraintSystem {
    ConstraintSystem {
        a: crate::linalg::blkdiag(s1.a(), s2.a()),
        b: crate::linalg::vcat(&[s1.b(), s2.b()]),
        r: crate::linalg::hcat(s1.num_factors(), &[s1.r(), s2.r()]),
    }
}

fn add_exp(out: &mut [u32], a: &[u32], b: &[u32]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x + y;
    }
}

/// `compact_cpz(hadamard_exact(p1, p2))` without materializing the product.
pub fn hadamard_compact(p1: &Cpz, p2: &Cpz) -> Result<Cpz> {
    if p1.dim() != p2.dim() {
        return Err(shape(format!("dimensions {} and {}", p1.dim(), p2.dim())));
    }
    let mp = merge_id(p1, p2);
    let (p1, p2) = (&mp.first, &mp.second);
    let pf = mp.shared_id.len();
    let center = p1.c().component_mul(p2.c());
    let mut acc = TermAccumulator::new(pf, p1.dim(), center.as_slice());
    let mut buf = vec![0.0; p1.dim()];
    for (g, e) in columns(p1.g()).zip(exp_columns(p1.e())) {
        for ((b, x), y) in buf.iter_mut().zip(g).zip(p2.c().iter()) {
            *b = x * y;
        }
        acc.add(e, &buf);
    }
    for (g, e) in columns(p2.g()).zip(exp_columns(p2.e())) {
        for ((b, x), y) in buf.iter_mut().zip(p1.c().iter()).zip(g) {
            *b = x * y;
        }
        acc.add(e, &buf);
    }
    let mut ebuf = vec![0u32; pf];
    for (g1, e1) in columns(p1.g()).zip(exp_columns(p1.e())) {
        for (g2, e2) in columns(p2.g()).zip(exp_columns(p2.e())) {
            for ((b, x), y) in buf.iter_mut().zip(g1).zip(g2) {
                *b = x * y;
            }
            add_exp(&mut ebuf, e1, e2);
            acc.add(&ebuf, &buf);
        }
    }
    let (c, g, e) = acc.finish();
    Ok(assemble(
        &mp.shared_id,
        c,
        g,
        e,
        compact_system(&stacked_system(p1, p2)),
    ))
}

/// `compact_cpz(pow_exact(p, e))`, compacting after every fold.
pub fn pow_compact(p: &Cpz, e: u32) -> Cpz {
    if e == 0 {
        return Cpz::point(DVector::from_element(p.dim(), 1.0));
    }
    let base = compact_cpz(p);
    let mut acc = base.clone();
    for _ in 1..e {
        acc = hadamard_compact(&acc, &base).expect("equal dimensions");
    }
    acc
}

/// `compact_cpz(mul_cpmz_cpz(y, p))` without materializing the product.
pub fn mul_cpmz_cpz_compact(y: &Cpmz, p: &Cpz) -> Result<Cpz> {
    if y.shape().1 != p.dim() {
        return Err(shape(format!(
            "Y is {:?}, P has dimension {}",
            y.shape(),
            p.dim()
        )));
    }
    let mp = merge_id(y, p);
    let (y, p) = (&mp.first, &mp.second);
    let pf = mp.shared_id.len();
    let nx = y.shape().0;
    let center = y.c() * p.c();
    let mut acc = TermAccumulator::new(pf, nx, center.as_slice());
    for (i, gi) in y.g().iter().enumerate() {
        acc.add(y.exponent_column(i), (gi * p.c()).as_slice());
    }
    let cg = y.c() * p.g();
    for (g, e) in columns(&cg).zip(exp_columns(p.e())) {
        acc.add(e, g);
    }
    let mut ebuf = vec![0u32; pf];
    for (i, gi) in y.g().iter().enumerate() {
        let prod = gi * p.g();
        let ei = y.exponent_column(i);
        for (g, e) in columns(&prod).zip(exp_columns(p.e())) {
            add_exp(&mut ebuf, ei, e);
            acc.add(&ebuf, g);
        }
    }
    let (c, g, e) = acc.finish();
    let ys = y.constraint_system();
    let sys = ConstraintSystem {
        a: crate::linalg::blkdiag(&ys.a, p.a()),
        b: crate::linalg::vcat(&[&ys.b, p.b()]),
        r: crate::linalg::hcat(pf, &[y.r(), p.r()]),
    };
    Ok(assemble(&mp.shared_id, c, g, e, compact_system(&sys)))
}

/// Exact compaction of a CPMZ. Constraints come back vectorized (`n_a = 1`).
pub fn compact_cpmz(y: &Cpmz) -> Cpmz {
    let (m, n) = y.shape();
    let mut acc = TermAccumulator::new(y.num_factors(), m * n, y.c().as_slice());
    for (i, gi) in y.g().iter().enumerate() {
        acc.add(y.exponent_column(i), gi.as_slice());
    }
    let (c, g, e) = acc.finish();
    let (a, b, r) = compact_system(&y.constraint_system());
    let (rows, ids) = prune_ids(y.id(), &[&e, &r]);
    let nc = b.len();
    Cpmz::from_parts(
        DMatrix::from_vec(m, n, c),
        columns(&g)
            .map(|col| DMatrix::from_column_slice(m, n, col))
            .collect(),
        e.select_rows(&rows),
        columns(&a)
            .map(|col| DMatrix::from_column_slice(nc, 1, col))
            .collect(),
        DMatrix::from_column_slice(nc, 1, b.as_slice()),
        r.select_rows(&rows),
        ids,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{hadamard_exact, mul_cpmz_cpz};
    use crate::id::FactorAssignment;

    fn sample_cpz() -> Cpz {
        Cpz::new(
            DVector::from_vec(vec![1.0, -2.0]),
            DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.5, 3.0, 0.0, 1.0, -1.0, 0.0]),
            DMatrix::from_row_slice(3, 4, &[1, 1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]),
            DVector::from_vec(vec![0.5, 0.5]),
            DMatrix::from_row_slice(3, 2, &[1, 0, 1, 0, 0, 0]),
            vec![FactorId(1), FactorId(2), FactorId(3)],
        )
        .unwrap()
    }

    #[test]
    fn merges_folds_and_prunes() {
        let s = sample_cpz();
        let k = compact_cpz(&s);
        // columns 0 and 1 share α₁, column 3 is constant
        assert_eq!(k.num_generators(), 2);
        assert_eq!(k.c().as_slice(), &[4.0, -2.0]);
        // duplicate constraint row removed, zero column dropped, factor 3 unused
        assert_eq!(k.num_constraints(), 1);
        assert_eq!(k.num_constraint_terms(), 1);
        assert_eq!(k.id(), &[FactorId(1), FactorId(2)]);
        for (a, b) in [(0.3, -0.7), (1.0, 0.5), (-1.0, -1.0)] {
            let sig = FactorAssignment::zip(&[FactorId(1), FactorId(2), FactorId(3)], &[a, b, 0.2])
                .unwrap();
            assert!((k.eval_point(&sig).unwrap() - s.eval_point(&sig).unwrap()).norm() < 1e-14);
            assert!(
                (k.constraint_residual(&sig).unwrap()
                    - s.constraint_residual(&sig).unwrap() / 2f64.sqrt())
                .abs()
                    < 1e-14
            );
        }
    }

    #[test]
    fn fused_products_match_literal_then_compact() {
        let s = sample_cpz();
        let t = compact_cpz(&s);
        assert_eq!(
            hadamard_compact(&s, &t).unwrap(),
            compact_cpz(&hadamard_exact(&s, &t).unwrap())
        );
        let y = Cpmz::polynomial(
            DMatrix::from_row_slice(1, 2, &[1.0, 2.0]),
            vec![
                DMatrix::from_row_slice(1, 2, &[0.5, 0.0]),
                DMatrix::from_row_slice(1, 2, &[0.0, 0.25]),
            ],
            DMatrix::from_row_slice(2, 2, &[1, 0, 0, 1]),
            vec![FactorId(1), FactorId(9)],
        )
        .unwrap();
        assert_eq!(
            mul_cpmz_cpz_compact(&y, &s).unwrap(),
            compact_cpz(&mul_cpmz_cpz(&y, &s).unwrap())
        );
    }
}
