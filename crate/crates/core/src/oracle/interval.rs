use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::cpmz::Cpmz;
use crate::cpz::Cpz;
use crate::error::{shape, Result};
use crate::learning::MonomialBasis;

/// A closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// `c ± r`.
    pub fn centered(c: f64, r: f64) -> Self {
        Self::new(c - r.abs(), c + r.abs())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn contains_interval(&self, other: &Interval, tol: f64) -> bool {
        other.lo >= self.lo - tol && other.hi <= self.hi + tol
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn scale(&self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval::new(k * self.lo, k * self.hi)
        } else {
            Interval::new(k * self.hi, k * self.lo)
        }
    }

    /// `[x^e : x ∈ self]`, tight for every `e`.
    pub fn powi(&self, e: u32) -> Interval {
        if e == 0 {
            return Interval::point(1.0);
        }
        let (a, b) = (self.lo.powi(e as i32), self.hi.powi(e as i32));
        if e % 2 == 1 || self.lo >= 0.0 {
            Interval::new(a, b)
        } else if self.hi <= 0.0 {
            Interval::new(b, a)
        } else {
            Interval::new(0.0, a.max(b))
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let p = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        Interval::new(
            p.iter().copied().fold(f64::INFINITY, f64::min),
            p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Range of `∏ αₖ^{eₖ}` over the unit box.
fn monomial_range(e: &[u32]) -> Interval {
    if e.iter().all(|x| *x == 0) {
        Interval::point(1.0)
    } else if e.iter().all(|x| x % 2 == 0) {
        Interval::new(0.0, 1.0)
    } else {
        Interval::new(-1.0, 1.0)
    }
}

/// Per-coordinate box containing `s`; constraints are ignored.
pub fn interval_enclosure(s: &Cpz) -> Vec<Interval> {
    let mut out: Vec<Interval> = s.c().iter().map(|c| Interval::point(*c)).collect();
    for i in 0..s.num_generators() {
        let m = monomial_range(s.exponent_column(i));
        for (r, o) in out.iter_mut().enumerate() {
            *o = *o + m.scale(s.g()[(r, i)]);
        }
    }
    out
}

/// Entrywise interval hull of a matrix set, row-major; constraints are ignored.
pub fn interval_matrix(y: &Cpmz) -> Vec<Vec<Interval>> {
    let (rows, cols) = y.shape();
    let mut out: Vec<Vec<Interval>> = (0..rows)
        .map(|r| (0..cols).map(|c| Interval::point(y.c()[(r, c)])).collect())
        .collect();
    for (i, g) in y.g().iter().enumerate() {
        let m = monomial_range(y.exponent_column(i));
        for (r, row) in out.iter_mut().enumerate() {
            for (c, o) in row.iter_mut().enumerate() {
                *o = *o + m.scale(g[(r, c)]);
            }
        }
    }
    out
}

/// One interval-arithmetic step `Θ h(z) + w` with `Θ`, `z` and `w` given as boxes.
pub fn interval_baseline_poly(
    theta: &[Vec<Interval>],
    zk: &[Interval],
    basis: &MonomialBasis,
    zw: &[Interval],
) -> Result<Vec<Interval>> {
    if zk.len() != basis.n_z()
        || theta.len() != zw.len()
        || theta.iter().any(|r| r.len() != basis.len())
    {
        return Err(shape("Θ, state box, basis and noise box do not conform"));
    }
    let h: Vec<Interval> = basis
        .exponents()
        .iter()
        .map(|alpha| {
            alpha
                .iter()
                .zip(zk)
                .fold(Interval::point(1.0), |acc, (e, z)| acc * z.powi(*e))
        })
        .collect();
    Ok(theta
        .iter()
        .zip(zw)
        .map(|(row, w)| row.iter().zip(&h).fold(*w, |acc, (t, hj)| acc + *t * *hj))
        .collect())
}

/// Area of the projection of a box onto two coordinates.
pub fn box_area(b: &[Interval], dims: [usize; 2]) -> f64 {
    b[dims[0]].width() * b[dims[1]].width()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::monomial_basis_custom;

    #[test]
    fn power_rules() {
        let unit = Interval::new(-1.0, 1.0);
        assert_eq!(unit.powi(2), Interval::new(0.0, 1.0));
        assert_eq!(unit.powi(3), unit);
        assert_eq!(Interval::new(-3.0, -2.0).powi(2), Interval::new(4.0, 9.0));
        assert_eq!(unit * unit, unit);
        assert_eq!(Interval::new(1.0, 3.0) * unit, Interval::new(-3.0, 3.0));
    }

    #[test]
    fn baseline_products() {
        let unit = Interval::new(-1.0, 1.0);
        let basis = monomial_basis_custom(2, vec![vec![2, 0], vec![1, 1]]).unwrap();
        let one = Interval::point(1.0);
        let zero = Interval::point(0.0);
        let out = interval_baseline_poly(
            &[vec![one, zero], vec![zero, one]],
            &[unit, unit],
            &basis,
            &[zero, zero],
        )
        .unwrap();
        assert_eq!(out, vec![Interval::new(0.0, 1.0), unit]);
    }

    #[test]
    fn enclosure_uses_even_monomials() {
        let s = Cpz::polynomial(
            nalgebra::DVector::zeros(1),
            nalgebra::DMatrix::from_row_slice(1, 2, &[1.0, 0.5]),
            nalgebra::DMatrix::from_row_slice(1, 2, &[1, 2]),
            vec![crate::FactorId(1)],
        )
        .unwrap();
        assert_eq!(interval_enclosure(&s), vec![Interval::new(-1.0, 1.5)]);
    }
}
