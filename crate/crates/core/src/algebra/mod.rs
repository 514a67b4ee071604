//! Exact set operations on CPZ and CPMZ.

mod compact;
mod intersect;
mod ops;
mod reduce;

pub use compact::{compact_cpmz, compact_cpz, hadamard_compact, mul_cpmz_cpz_compact, pow_compact};
pub use intersect::{intersect_cpmz, intersect_cpmz_relabeled};
pub use ops::{
    add_exact, affine_cpmz, cartesian_exact, hadamard_exact, map_linear, mul_cpmz_cpz, pow_exact,
    project,
};
pub use reduce::reduce;

use crate::cpmz::Cpmz;
use crate::cpz::Cpz;
use crate::error::Result;
use crate::id::FactorId;

/// Sets that can be re-expressed over a larger id list.
pub trait Reindex: Sized {
    fn factor_ids(&self) -> &[FactorId];
    fn over_ids(&self, ids: &[FactorId]) -> Result<Self>;
}

impl Reindex for Cpz {
    fn factor_ids(&self) -> &[FactorId] {
        self.id()
    }
    fn over_ids(&self, ids: &[FactorId]) -> Result<Self> {
        self.with_ids(ids)
    }
}

impl Reindex for Cpmz {
    fn factor_ids(&self) -> &[FactorId] {
        self.id()
    }
    fn over_ids(&self, ids: &[FactorId]) -> Result<Self> {
        self.with_ids(ids)
    }
}

/// Two sets expressed over a common id list.
#[derive(Clone, Debug, PartialEq)]
pub struct MergedPair<A, B> {
    pub first: A,
    pub second: B,
    pub shared_id: Vec<FactorId>,
}

/// Sorted union of two sorted id lists.
pub fn union_ids(a: &[FactorId], b: &[FactorId]) -> Vec<FactorId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Aligns the factor lists of two sets; exponent rows of absent factors are zero.
pub fn merge_id<A: Reindex, B: Reindex>(s1: &A, s2: &B) -> MergedPair<A, B> {
    let shared_id = union_ids(s1.factor_ids(), s2.factor_ids());
    MergedPair {
        first: s1
            .over_ids(&shared_id)
            .expect("union contains both id lists"),
        second: s2
            .over_ids(&shared_id)
            .expect("union contains both id lists"),
        shared_id,
    }
}
