//! Classical representations and their lossless embedding into CPZ/CPMZ.

use nalgebra::{DMatrix, DVector};

use crate::cpmz::Cpmz;
use crate::cpz::Cpz;
use crate::error::{shape, Result};
use crate::id::{fresh_ids, FactorId};

fn ids_or_fresh(id: Option<Vec<FactorId>>, count: usize) -> Result<Vec<FactorId>> {
    match id {
        Some(v) if v.len() != count => {
            Err(shape(format!("{} ids for {count} generators", v.len())))
        }
        Some(v) => Ok(v),
        None => Ok(fresh_ids(count)),
    }
}

/// Zonotope `⟨c, G⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Zonotope {
    c: DVector<f64>,
    g: DMatrix<f64>,
    id: Vec<FactorId>,
}

impl Zonotope {
    pub fn new(c: DVector<f64>, g: DMatrix<f64>, id: Option<Vec<FactorId>>) -> Result<Self> {
        if g.nrows() != c.len() {
            return Err(shape("zonotope generator rows"));
        }
        let id = ids_or_fresh(id, g.ncols())?;
        Ok(Self { c, g, id })
    }

    pub fn lift(&self) -> Cpz {
        let h = self.g.ncols();
        Cpz::polynomial(
            self.c.clone(),
            self.g.clone(),
            DMatrix::identity(h, h),
            self.id.clone(),
        )
        .expect("validated zonotope")
    }
}

/// Constrained zonotope `⟨c, G, A, b⟩` with `A ∈ R^{n_c × h}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedZonotope {
    c: DVector<f64>,
    g: DMatrix<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    id: Vec<FactorId>,
}

impl ConstrainedZonotope {
    pub fn new(
        c: DVector<f64>,
        g: DMatrix<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        id: Option<Vec<FactorId>>,
    ) -> Result<Self> {
        if g.nrows() != c.len() || a.ncols() != g.ncols() || a.nrows() != b.len() {
            return Err(shape("constrained zonotope dimensions"));
        }
        let id = ids_or_fresh(id, g.ncols())?;
        Ok(Self { c, g, a, b, id })
    }

    pub fn lift(&self) -> Cpz {
        let h = self.g.ncols();
        Cpz::new(
            self.c.clone(),
            self.g.clone(),
            DMatrix::identity(h, h),
            self.a.clone(),
            self.b.clone(),
            DMatrix::identity(h, h),
            self.id.clone(),
        )
        .expect("validated constrained zonotope")
    }
}

/// Matrix zonotope `⟨C, G₁..G_γ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixZonotope {
    c: DMatrix<f64>,
    g: Vec<DMatrix<f64>>,
    id: Vec<FactorId>,
}

impl MatrixZonotope {
    pub fn new(c: DMatrix<f64>, g: Vec<DMatrix<f64>>, id: Option<Vec<FactorId>>) -> Result<Self> {
        if g.iter().any(|gi| gi.shape() != c.shape()) {
            return Err(shape("matrix zonotope generator shape"));
        }
        let id = ids_or_fresh(id, g.len())?;
        Ok(Self { c, g, id })
    }

    pub fn lift(&self) -> Cpmz {
        let k = self.g.len();
        Cpmz::polynomial(
            self.c.clone(),
            self.g.clone(),
            DMatrix::identity(k, k),
            self.id.clone(),
        )
        .expect("validated matrix zonotope")
    }
}

/// Constrained matrix zonotope with one constraint matrix per generator.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedMatrixZonotope {
    c: DMatrix<f64>,
    g: Vec<DMatrix<f64>>,
    a: Vec<DMatrix<f64>>,
    b: DMatrix<f64>,
    id: Vec<FactorId>,
}

impl ConstrainedMatrixZonotope {
    pub fn new(
        c: DMatrix<f64>,
        g: Vec<DMatrix<f64>>,
        a: Vec<DMatrix<f64>>,
        b: DMatrix<f64>,
        id: Option<Vec<FactorId>>,
    ) -> Result<Self> {
        if g.iter().any(|gi| gi.shape() != c.shape()) {
            return Err(shape("CMZ generator shape"));
        }
        if a.len() != g.len() || a.iter().any(|ai| ai.shape() != b.shape()) {
            return Err(shape("CMZ constraint shape"));
        }
        let id = ids_or_fresh(id, g.len())?;
        Ok(Self { c, g, a, b, id })
    }

    pub fn lift(&self) -> Cpmz {
        let k = self.g.len();
        Cpmz::new(
            self.c.clone(),
            self.g.clone(),
            DMatrix::identity(k, k),
            self.a.clone(),
            self.b.clone(),
            DMatrix::identity(k, k),
            self.id.clone(),
        )
        .expect("validated CMZ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id::FactorAssignment;

    #[test]
    fn convex_initial_set_lifts_to_identity_exponents() {
        let z = Zonotope::new(
            DVector::from_element(5, 1.0),
            DMatrix::identity(5, 5) * 0.1,
            None,
        )
        .unwrap();
        let p = z.lift();
        assert_eq!(p.e(), &DMatrix::<u32>::identity(5, 5));
        assert_eq!(p.num_constraints(), 0);
        let s = FactorAssignment::zip(p.id(), &[0.5, -1.0, 0.0, 1.0, 0.2]).unwrap();
        let expect = DVector::from_vec(vec![1.05, 0.9, 1.0, 1.1, 1.02]);
        assert!((p.eval_point(&s).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn cmz_lifts_with_identity_patterns() {
        let cmz = ConstrainedMatrixZonotope::new(
            DMatrix::zeros(1, 2),
            vec![
                DMatrix::from_element(1, 2, 1.0),
                DMatrix::from_element(1, 2, 2.0),
            ],
            vec![
                DMatrix::from_element(1, 1, 1.0),
                DMatrix::from_element(1, 1, -1.0),
            ],
            DMatrix::zeros(1, 1),
            None,
        )
        .unwrap();
        let y = cmz.lift();
        assert_eq!(y.e(), &DMatrix::<u32>::identity(2, 2));
        assert_eq!(y.r(), &DMatrix::<u32>::identity(2, 2));
    }

    #[test]
    fn generator_free_zonotope_is_singleton() {
        let p = Zonotope::new(DVector::from_vec(vec![3.0]), DMatrix::zeros(1, 0), None)
            .unwrap()
            .lift();
        assert_eq!(p.num_generators(), 0);
        assert_eq!(p.eval_point(&FactorAssignment::new()).unwrap()[0], 3.0);
    }
}
