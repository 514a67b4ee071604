use nalgebra::{DMatrix, DVector};

use super::merge_id;
use crate::cpmz::Cpmz;
use crate::cpz::{Cpz, FactorSpace};
use crate::error::{shape, Error, Result};
use crate::linalg::{blkdiag, hcat, vcat};

/// Columns `Ē₁(·,i) + Ē₂(·,j)` for all pairs, `i` outer.
fn pairwise_sums(e1: &DMatrix<u32>, e2: &DMatrix<u32>) -> DMatrix<u32> {
    let p = e1.nrows();
    let (h1, h2) = (e1.ncols(), e2.ncols());
    let mut data = Vec::with_capacity(p * h1 * h2);
    for i in 0..h1 {
        let a = &e1.as_slice()[i * p..(i + 1) * p];
        for j in 0..h2 {
            let b = &e2.as_slice()[j * p..(j + 1) * p];
            data.extend(a.iter().zip(b).map(|(x, y)| x + y));
        }
    }
    DMatrix::from_vec(p, h1 * h2, data)
}

/// Exact product `Y ⊗ P` of a matrix set and a vector set.
///
/// Generators are `[G_Y⁽ⁱ⁾ c_P, C_Y G_P, G_f]` with `G_f` column `h_P·i + j`
/// equal to `G_Y⁽ⁱ⁾ G_P(·,j)`. Constraints stack the vectorized constraints of
/// `Y` over those of `P`.
pub fn mul_cpmz_cpz(y: &Cpmz, p: &Cpz) -> Result<Cpz> {
    if y.shape().1 != p.dim() {
        return Err(shape(format!(
            "Y is {:?}, P has dimension {}",
            y.shape(),
            p.dim()
        )));
    }
    let mp = merge_id(y, p);
    let (y, p) = (&mp.first, &mp.second);
    let nx = y.shape().0;
    let (gamma, hp) = (y.num_generators(), p.num_generators());
    let mut g = DMatrix::zeros(nx, gamma + hp + gamma * hp);
    for (i, gi) in y.g().iter().enumerate() {
        g.column_mut(i).copy_from(&(gi * p.c()));
    }
    g.columns_mut(gamma, hp).copy_from(&(y.c() * p.g()));
    for (i, gi) in y.g().iter().enumerate() {
        g.columns_mut(gamma + hp + i * hp, hp)
            .copy_from(&(gi * p.g()));
    }
    let pf = mp.shared_id.len();
    let e = hcat(pf, &[y.e(), p.e(), &pairwise_sums(y.e(), p.e())]);
    let ys = y.constraint_system();
    let a = blkdiag(&ys.a, p.a());
    let b = vcat(&[&ys.b, p.b()]);
    let r = hcat(pf, &[y.r(), p.r()]);
    Ok(Cpz::from_parts(y.c() * p.c(), g, e, a, b, r, mp.shared_id))
}

/// Exact sum with dependencies: `{x₁ + x₂}` evaluated at common factors.
pub fn add_exact(p1: &Cpz, p2: &Cpz) -> Result<Cpz> {
    if p1.dim() != p2.dim() {
        return Err(shape(format!("dimensions {} and {}", p1.dim(), p2.dim())));
    }
    let mp = merge_id(p1, p2);
    let (p1, p2) = (&mp.first, &mp.second);
    let pf = mp.shared_id.len();
    Ok(Cpz::from_parts(
        p1.c() + p2.c(),
        hcat(p1.dim(), &[p1.g(), p2.g()]),
        hcat(pf, &[p1.e(), p2.e()]),
        blkdiag(p1.a(), p2.a()),
        vcat(&[p1.b(), p2.b()]),
        hcat(pf, &[p1.r(), p2.r()]),
        mp.shared_id,
    ))
}

/// Exact Cartesian product `{[x₁; x₂]}`.
pub fn cartesian_exact(p1: &Cpz, p2: &Cpz) -> Cpz {
    let mp = merge_id(p1, p2);
    let (p1, p2) = (&mp.first, &mp.second);
    let pf = mp.shared_id.len();
    Cpz::from_parts(
        vcat(&[p1.c(), p2.c()]),
        blkdiag(p1.g(), p2.g()),
        hcat(pf, &[p1.e(), p2.e()]),
        blkdiag(p1.a(), p2.a()),
        vcat(&[p1.b(), p2.b()]),
        hcat(pf, &[p1.r(), p2.r()]),
        mp.shared_id,
    )
}

/// Exact elementwise product `{x₁ ⊙ x₂}`.
pub fn hadamard_exact(p1: &Cpz, p2: &Cpz) -> Result<Cpz> {
    if p1.dim() != p2.dim() {
        return Err(shape(format!("dimensions {} and {}", p1.dim(), p2.dim())));
    }
    let mp = merge_id(p1, p2);
    let (p1, p2) = (&mp.first, &mp.second);
    let n = p1.dim();
    let (h1, h2) = (p1.num_generators(), p2.num_generators());
    let mut g = DMatrix::zeros(n, h1 + h2 + h1 * h2);
    for i in 0..h1 {
        g.column_mut(i)
            .copy_from(&p1.g().column(i).component_mul(p2.c()));
    }
    for j in 0..h2 {
        g.column_mut(h1 + j)
            .copy_from(&p1.c().component_mul(&p2.g().column(j)));
    }
    for i in 0..h1 {
        for j in 0..h2 {
            g.column_mut(h1 + h2 + i * h2 + j)
                .copy_from(&p1.g().column(i).component_mul(&p2.g().column(j)));
        }
    }
    let pf = mp.shared_id.len();
    Ok(Cpz::from_parts(
        p1.c().component_mul(p2.c()),
        g,
        hcat(pf, &[p1.e(), p2.e(), &pairwise_sums(p1.e(), p2.e())]),
        blkdiag(p1.a(), p2.a()),
        vcat(&[p1.b(), p2.b()]),
        hcat(pf, &[p1.r(), p2.r()]),
        mp.shared_id,
    ))
}

/// `{x^⊙e}` by repeated [`hadamard_exact`] with shared factors; `e = 0` gives the ones vector.
pub fn pow_exact(p: &Cpz, e: u32) -> Cpz {
    if e == 0 {
        return Cpz::point(DVector::from_element(p.dim(), 1.0));
    }
    let mut acc = p.clone();
    for _ in 1..e {
        acc = hadamard_exact(&acc, p).expect("equal dimensions");
    }
    acc
}

/// Rows `idx` (0-based, distinct) of the set; constraints and factors unchanged.
pub fn project(s: &Cpz, idx: &[usize]) -> Result<Cpz> {
    let n = s.dim();
    for (k, &i) in idx.iter().enumerate() {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        if idx[..k].contains(&i) {
            return Err(Error::InvalidArgument(format!("index {i} repeated")));
        }
    }
    Ok(Cpz::from_parts(
        s.c().select_rows(idx),
        s.g().select_rows(idx),
        s.e().clone(),
        s.a().clone(),
        s.b().clone(),
        s.r().clone(),
        s.id().to_vec(),
    ))
}

/// Image `{M x}` under a constant matrix.
pub fn map_linear(m: &DMatrix<f64>, s: &Cpz) -> Result<Cpz> {
    if m.ncols() != s.dim() {
        return Err(shape(format!(
            "M is {:?}, set has dimension {}",
            m.shape(),
            s.dim()
        )));
    }
    Ok(Cpz::from_parts(
        m * s.c(),
        m * s.g(),
        s.e().clone(),
        s.a().clone(),
        s.b().clone(),
        s.r().clone(),
        s.id().to_vec(),
    ))
}

/// `(K − Y) L`: center `(K − C)L`, generators `−Gᵢ L`, everything else unchanged.
pub fn affine_cpmz(k: &DMatrix<f64>, y: &Cpmz, l: &DMatrix<f64>) -> Result<Cpmz> {
    if k.shape() != y.shape() {
        return Err(shape(format!("K is {:?}, Y is {:?}", k.shape(), y.shape())));
    }
    if l.nrows() != k.ncols() {
        return Err(shape(format!(
            "L has {} rows, K has {} columns",
            l.nrows(),
            k.ncols()
        )));
    }
    Ok(Cpmz::from_parts(
        (k - y.c()) * l,
        y.g().iter().map(|gi| -(gi * l)).collect(),
        y.e().clone(),
        y.a().to_vec(),
        y.b().clone(),
        y.r().clone(),
        y.id().to_vec(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::{FactorAssignment, FactorId};

    fn interval(c: f64, r: f64, id: u64) -> Cpz {
        Cpz::polynomial(
            DVector::from_element(1, c),
            DMatrix::from_element(1, 1, r),
            DMatrix::from_element(1, 1, 1),
            vec![FactorId(id)],
        )
        .unwrap()
    }

    #[test]
    fn shared_square_is_nonnegative() {
        let x = interval(0.0, 1.0, 1);
        let sq = hadamard_exact(&x, &x).unwrap();
        assert_eq!(sq.num_generators(), 3);
        for k in -10..=10 {
            let a = k as f64 / 10.0;
            let s = FactorAssignment::zip(&[FactorId(1)], &[a]).unwrap();
            assert!((sq.eval_point(&s).unwrap()[0] - a * a).abs() < 1e-15);
        }
    }

    #[test]
    fn cube_at_half() {
        let x = interval(0.0, 1.0, 1);
        let cube = pow_exact(&x, 3);
        let s = FactorAssignment::zip(&[FactorId(1)], &[0.5]).unwrap();
        assert!((cube.eval_point(&s).unwrap()[0] - 0.125).abs() < 1e-15);
        assert_eq!(pow_exact(&x, 0).c()[0], 1.0);
        assert_eq!(pow_exact(&x, 1), x);
    }

    #[test]
    fn self_subtraction_cancels() {
        let x = interval(0.3, 1.0, 1);
        let z = add_exact(&x, &x.negated()).unwrap();
        for a in [-1.0, 0.2, 1.0] {
            let s = FactorAssignment::zip(&[FactorId(1)], &[a]).unwrap();
            assert_eq!(z.eval_point(&s).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn projection_of_p1_row() {
        let p = crate::cpz::tests::p1();
        let q = project(&p, &[1]).unwrap();
        assert_eq!(q.c()[0], 2.0);
        assert_eq!(
            q.g().row(0).iter().copied().collect::<Vec<_>>(),
            vec![3.0, 2.0]
        );
        assert_eq!(q.e(), p.e());
        assert_eq!(q.a(), p.a());
        assert_eq!(
            project(&p, &[3]),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        );
    }

    #[test]
    fn affine_degenerate_cases() {
        let k = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let l = DMatrix::from_row_slice(2, 1, &[3.0, 4.0]);
        let y = Cpmz::point(DMatrix::zeros(1, 2));
        let out = affine_cpmz(&k, &y, &l).unwrap();
        assert_eq!(out.c()[(0, 0)], 11.0);
        assert_eq!(out.num_generators(), 0);
    }
}
