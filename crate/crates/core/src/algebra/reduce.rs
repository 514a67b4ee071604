use nalgebra::{DMatrix, DVector};

use crate::cpz::{embed_rows, Cpz};
use crate::error::{Error, Result};
use crate::id::fresh_ids;
use crate::linalg::hcat;

/// Over-approximates `s` by a CPZ with at most `max_generators` generators.
///
/// Generators are ranked by Euclidean norm, ascending, ties by lower index; the
/// lowest-ranked ones are replaced by an axis-aligned box carried by `n` fresh
/// independent factors. A removed term whose monomial has only even exponents
/// ranges over `[0, 1]` and contributes half its generator to the center.
/// Constraints are kept as they are, which only removes points from the relaxation.
pub fn reduce(s: &Cpz, max_generators: usize) -> Result<Cpz> {
    let (n, h) = (s.dim(), s.num_generators());
    if h <= max_generators {
        return Ok(s.clone());
    }
    if max_generators < n {
        return Err(Error::InvalidArgument(format!(
            "max_generators {max_generators} is below the dimension {n}"
        )));
    }
    let keep = max_generators - n;
    let mut order: Vec<usize> = (0..h).collect();
    let norms: Vec<f64> = (0..h).map(|i| s.g().column(i).norm()).collect();
    order.sort_by(|&i, &j| norms[i].total_cmp(&norms[j]).then(i.cmp(&j)));
    let (dropped, kept) = order.split_at(h - keep);
    let mut kept = kept.to_vec();
    kept.sort_unstable();

    let mut center = s.c().clone();
    let mut radius = DVector::<f64>::zeros(n);
    for &i in dropped {
        let g = s.g().column(i);
        let e = s.exponent_column(i);
        if e.iter().all(|x| x % 2 == 0) {
            center += g / 2.0;
            radius += g.abs() / 2.0;
        } else {
            radius += g.abs();
        }
    }

    let boxed = fresh_ids(n);
    let mut ids = s.id().to_vec();
    ids.extend_from_slice(&boxed);
    let p = ids.len();
    let map: Vec<usize> = (0..s.num_factors()).collect();
    let old_e = embed_rows(&s.e().select_columns(&kept), &map, p);
    let mut box_e = DMatrix::<u32>::zeros(p, n);
    for k in 0..n {
        box_e[(s.num_factors() + k, k)] = 1;
    }
    let g = hcat(
        n,
        &[
            &s.g().select_columns(&kept),
            &DMatrix::from_diagonal(&radius),
        ],
    );
    let e = hcat(p, &[&old_e, &box_e]);
    let r = embed_rows(s.r(), &map, p);
    let used: Vec<usize> = (0..p)
        .filter(|&k| e.row(k).iter().chain(r.row(k).iter()).any(|x| *x != 0))
        .collect();
    let out_ids = used.iter().map(|&k| ids[k]).collect();
    Cpz::new(
        center,
        g,
        e.select_rows(&used),
        s.a().clone(),
        s.b().clone(),
        r.select_rows(&used),
        out_ids,
    )
}
