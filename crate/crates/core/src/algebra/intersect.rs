use std::collections::HashMap;

use nalgebra::DMatrix;

use super::union_ids;
use crate::cpmz::Cpmz;
use crate::cpz::{embed_rows, row_map, FactorSpace};
use crate::error::{shape, Result};
use crate::id::{fresh_ids, FactorId};
use crate::linalg::hcat;

fn vec_generators(y: &Cpmz) -> DMatrix<f64> {
    let len = y.shape().0 * y.shape().1;
    let mut out = DMatrix::zeros(len, y.num_generators());
    for (i, gi) in y.g().iter().enumerate() {
        out.column_mut(i).copy_from_slice(gi.as_slice());
    }
    out
}

/// Exact intersection `Y₁ ∩ Y₂`; see [`intersect_cpmz_relabeled`].
pub fn intersect_cpmz(y1: &Cpmz, y2: &Cpmz) -> Result<Cpmz> {
    intersect_cpmz_relabeled(y1, y2).map(|(y, _)| y)
}

/// Exact intersection of two matrix sets with independent factor spaces.
///
/// Ids of `y2` that also occur in `y1` are renamed to fresh ids first; the
/// returned map lists those renamings. The result keeps the generators of
/// `y1` and stacks three vectorized constraint blocks: the constraints of
/// `y1`, those of `y2`, and `vec(C₁ + ΣG₁) = vec(C₂ + ΣG₂)`.
pub fn intersect_cpmz_relabeled(
    y1: &Cpmz,
    y2: &Cpmz,
) -> Result<(Cpmz, HashMap<FactorId, FactorId>)> {
    if y1.shape() != y2.shape() {
        return Err(shape(format!(
            "shapes {:?} and {:?}",
            y1.shape(),
            y2.shape()
        )));
    }
    let collisions: Vec<FactorId> = y2
        .id()
        .iter()
        .copied()
        .filter(|k| y1.id().binary_search(k).is_ok())
        .collect();
    let relabel: HashMap<FactorId, FactorId> = collisions
        .iter()
        .copied()
        .zip(fresh_ids(collisions.len()))
        .collect();
    let y2 = if relabel.is_empty() {
        y2.clone()
    } else {
        y2.relabel(&relabel)?
    };

    let ids = union_ids(y1.id(), y2.id());
    let p = ids.len();
    let map1 = row_map(y1.id(), &ids)?;
    let map2 = row_map(y2.id(), &ids)?;

    let s1 = y1.constraint_system();
    let s2 = y2.constraint_system();
    let g1 = vec_generators(y1);
    let g2 = vec_generators(&y2);
    let (m1, q1) = s1.a.shape();
    let (m2, q2) = s2.a.shape();
    let mn = g1.nrows();
    let (gam1, gam2) = (g1.ncols(), g2.ncols());

    let rows = m1 + m2 + mn;
    let cols = q1 + q2 + gam1 + gam2;
    let mut a = DMatrix::zeros(rows, cols);
    a.view_mut((0, 0), (m1, q1)).copy_from(&s1.a);
    a.view_mut((m1, q1), (m2, q2)).copy_from(&s2.a);
    a.view_mut((m1 + m2, q1 + q2), (mn, gam1)).copy_from(&g1);
    a.view_mut((m1 + m2, q1 + q2 + gam1), (mn, gam2))
        .copy_from(&(-&g2));

    let mut b = DMatrix::zeros(rows, 1);
    b.view_mut((0, 0), (m1, 1)).copy_from(&s1.b);
    b.view_mut((m1, 0), (m2, 1)).copy_from(&s2.b);
    let dc = y2.c() - y1.c();
    b.view_mut((m1 + m2, 0), (mn, 1))
        .copy_from_slice(dc.as_slice());

    let r = hcat(
        p,
        &[
            &embed_rows(&s1.r, &map1, p),
            &embed_rows(&s2.r, &map2, p),
            &embed_rows(y1.e(), &map1, p),
            &embed_rows(y2.e(), &map2, p),
        ],
    );
    let a_list = (0..cols)
        .map(|j| DMatrix::from_column_slice(rows, 1, a.column(j).as_slice()))
        .collect();
    let out = Cpmz::from_parts(
        y1.c().clone(),
        y1.g().to_vec(),
        embed_rows(y1.e(), &map1, p),
        a_list,
        b,
        r,
        ids,
    );
    Ok((out, relabel))
}
