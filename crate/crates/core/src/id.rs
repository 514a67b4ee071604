use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of an independent factor α ∈ [−1, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactorId(pub u64);

impl fmt::Display for FactorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl TryFrom<BTreeMap<FactorId, f64>> for FactorAssignment {
    type Error = Error;
    fn try_from(m: BTreeMap<FactorId, f64>) -> Result<Self> {
        Self::from_pairs(m)
    }
}

impl From<FactorAssignment> for BTreeMap<FactorId, f64> {
    fn from(a: FactorAssignment) -> Self {
        a.entries
    }
}

/// Allocated ids start far above the small literal ids used in hand-written sets.
const FIRST_ALLOCATED: u64 = 1 << 32;

static NEXT: AtomicU64 = AtomicU64::new(FIRST_ALLOCATED);

/// Returns `count` ids never handed out before in this process.
pub fn fresh_ids(count: usize) -> Vec<FactorId> {
    let start = NEXT.fetch_add(count as u64, Ordering::Relaxed);
    (start..start + count as u64).map(FactorId).collect()
}

/// Values for a set of factors, each in [−1, 1].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<FactorId, f64>", into = "BTreeMap<FactorId, f64>")]
pub struct FactorAssignment {
    entries: BTreeMap<FactorId, f64>,
}

impl FactorAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FactorId, f64)>,
    {
        let mut out = Self::new();
        for (id, v) in pairs {
            out.insert(id, v)?;
        }
        Ok(out)
    }

    /// Zips ids with values.
    pub fn zip(ids: &[FactorId], values: &[f64]) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ids but {} values",
                ids.len(),
                values.len()
            )));
        }
        Self::from_pairs(ids.iter().copied().zip(values.iter().copied()))
    }

    pub fn insert(&mut self, id: FactorId, value: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange { id, value });
        }
        self.entries.insert(id, value);
        Ok(())
    }

    pub fn get(&self, id: FactorId) -> Option<f64> {
        self.entries.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FactorId, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// Adds every entry of `other`, overwriting on collision.
    pub fn extend(&mut self, other: &FactorAssignment) {
        self.entries.extend(other.entries.iter());
    }

    /// Values in the order of `ids`.
    pub fn values_for(&self, ids: &[FactorId]) -> Result<Vec<f64>> {
        ids.iter()
            .map(|id| self.get(*id).ok_or(Error::MissingFactor(*id)))
            .collect()
    }
}
