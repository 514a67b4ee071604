//! JSON form of sets: row-major nested arrays plus explicit dimensions so
//! that empty matrices keep their shape.

use nalgebra::{DMatrix, DVector, Scalar};
use serde::{Deserialize, Serialize};

use crate::cpmz::Cpmz;
use crate::cpz::Cpz;
use crate::error::{shape, Error};
use crate::id::FactorId;

fn rows<T: Scalar + Copy>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn from_rows<T: Scalar + Copy>(
    name: &str,
    data: &[Vec<T>],
    nrows: usize,
    ncols: usize,
) -> Result<DMatrix<T>, Error> {
    if data.len() != nrows || data.iter().any(|r| r.len() != ncols) {
        return Err(shape(format!(
            "{name} does not match declared shape {nrows}x{ncols}"
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| data[i][j]))
}

fn to_signed(m: &DMatrix<u32>) -> DMatrix<i64> {
    m.map(i64::from)
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct CpzDims {
    pub n: usize,
    pub h: usize,
    pub p: usize,
    pub nc: usize,
    pub q: usize,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CpzJson {
    c: Vec<f64>,
    G: Vec<Vec<f64>>,
    E: Vec<Vec<i64>>,
    A: Vec<Vec<f64>>,
    b: Vec<f64>,
    R: Vec<Vec<i64>>,
    id: Vec<FactorId>,
    #[serde(default)]
    dims: Option<CpzDims>,
}

impl From<Cpz> for CpzJson {
    fn from(s: Cpz) -> Self {
        Self {
            c: s.c().iter().copied().collect(),
            G: rows(s.g()),
            E: rows(&to_signed(s.e())),
            A: rows(s.a()),
            b: s.b().iter().copied().collect(),
            R: rows(&to_signed(s.r())),
            id: s.id().to_vec(),
            dims: Some(CpzDims {
                n: s.dim(),
                h: s.num_generators(),
                p: s.num_factors(),
                nc: s.num_constraints(),
                q: s.num_constraint_terms(),
            }),
        }
    }
}

fn inferred_cols<T>(m: &[Vec<T>]) -> usize {
    m.first().map_or(0, Vec::len)
}

impl TryFrom<CpzJson> for Cpz {
    type Error = Error;
    fn try_from(j: CpzJson) -> Result<Self, Error> {
        let d = j.dims.unwrap_or(CpzDims {
            n: j.c.len(),
            h: inferred_cols(&j.G).max(inferred_cols(&j.E)),
            p: j.id.len(),
            nc: j.b.len(),
            q: inferred_cols(&j.A).max(inferred_cols(&j.R)),
        });
        Cpz::from_signed(
            DVector::from_vec(j.c),
            from_rows("G", &j.G, d.n, d.h)?,
            from_rows("E", &j.E, d.p, d.h)?,
            from_rows("A", &j.A, d.nc, d.q)?,
            DVector::from_vec(j.b),
            from_rows("R", &j.R, d.p, d.q)?,
            j.id,
        )
    }
}

impl Serialize for Cpz {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CpzJson::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cpz {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = CpzJson::deserialize(d)?;
        Cpz::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct CpmzDims {
    pub m: usize,
    pub n: usize,
    pub gamma: usize,
    pub p: usize,
    pub nc: usize,
    pub na: usize,
    pub q: usize,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CpmzJson {
    C: Vec<Vec<f64>>,
    Glist: Vec<Vec<Vec<f64>>>,
    E: Vec<Vec<i64>>,
    Alist: Vec<Vec<Vec<f64>>>,
    B: Vec<Vec<f64>>,
    R: Vec<Vec<i64>>,
    id: Vec<FactorId>,
    #[serde(default)]
    dims: Option<CpmzDims>,
}

impl From<Cpmz> for CpmzJson {
    fn from(s: Cpmz) -> Self {
        let (m, n) = s.shape();
        Self {
            C: rows(s.c()),
            Glist: s.g().iter().map(rows).collect(),
            E: rows(&to_signed(s.e())),
            Alist: s.a().iter().map(rows).collect(),
            B: rows(s.b()),
            R: rows(&to_signed(s.r())),
            id: s.id().to_vec(),
            dims: Some(CpmzDims {
                m,
                n,
                gamma: s.num_generators(),
                p: s.num_factors(),
                nc: s.b().nrows(),
                na: s.b().ncols(),
                q: s.num_constraint_terms(),
            }),
        }
    }
}

impl TryFrom<CpmzJson> for Cpmz {
    type Error = Error;
    fn try_from(j: CpmzJson) -> Result<Self, Error> {
        let d = j.dims.unwrap_or(CpmzDims {
            m: j.C.len(),
            n: inferred_cols(&j.C),
            gamma: j.Glist.len(),
            p: j.id.len(),
            nc: j.B.len(),
            na: inferred_cols(&j.B),
            q: j.Alist.len(),
        });
        if j.Glist.len() != d.gamma || j.Alist.len() != d.q {
            return Err(shape("matrix list lengths do not match declared dims"));
        }
        let g = j
            .Glist
            .iter()
            .map(|gi| from_rows("Glist", gi, d.m, d.n))
            .collect::<Result<Vec<_>, _>>()?;
        let a = j
            .Alist
            .iter()
            .map(|ai| from_rows("Alist", ai, d.nc, d.na))
            .collect::<Result<Vec<_>, _>>()?;
        Cpmz::from_signed(
            from_rows("C", &j.C, d.m, d.n)?,
            g,
            from_rows("E", &j.E, d.p, d.gamma)?,
            a,
            from_rows("B", &j.B, d.nc, d.na)?,
            from_rows("R", &j.R, d.p, d.q)?,
            j.id,
        )
    }
}

impl Serialize for Cpmz {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CpmzJson::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cpmz {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = CpmzJson::deserialize(d)?;
        Cpmz::try_from(j).map_err(serde::de::Error::custom)
    }
}
