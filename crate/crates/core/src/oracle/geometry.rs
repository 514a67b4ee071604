use rand::Rng;

use super::sample::sample_feasible;
use crate::cpz::{Cpz, FactorSpace};
use crate::error::{Error, Result};

/// Points of `s` projected onto `dims` (0-based). Unconstrained sets are
/// sampled with half the factors pushed to ±1 to reach the boundary; the
/// cloud is a visual aid, never a soundness argument.
pub fn boundary_cloud<R: Rng + ?Sized>(
    s: &Cpz,
    dims: [usize; 2],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "boundary cloud needs at least 100 samples, got {samples}"
        )));
    }
    for d in dims {
        if d >= s.dim() {
            return Err(Error::IndexOutOfRange {
                index: d,
                dim: s.dim(),
            });
        }
    }
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let alpha = if s.has_constraints() {
            sample_feasible(s, rng)?.values_for(s.id())?
        } else {
            biased(s.num_factors(), rng)
        };
        let x = s.eval_aligned(&alpha);
        out.push([x[dims[0]], x[dims[1]]]);
    }
    Ok(out)
}

fn biased<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<f64> {
    (0..p)
        .map(|_| {
            if rng.random_bool(0.5) {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            } else {
                rng.random_range(-1.0..=1.0)
            }
        })
        .collect()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull in counter-clockwise order (monotone chain), collinear points dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice.abs()
}

pub fn hull_area(points: &[[f64; 2]]) -> f64 {
    polygon_area(&convex_hull(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_hull() {
        let pts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [0.5, 0.5],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.0],
        ];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert_eq!(polygon_area(&h), 1.0);
    }

    #[test]
    fn unit_square_cloud() {
        let s = Cpz::zonotope(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cloud = boundary_cloud(&s, [0, 1], 2000, &mut rng).unwrap();
        assert!(cloud.iter().all(|p| p[0].abs() <= 1.0 && p[1].abs() <= 1.0));
        assert!((hull_area(&cloud) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_cloud() {
        let s = Cpz::point(DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cloud = boundary_cloud(&s, [2, 0], 100, &mut rng).unwrap();
        assert!(cloud.iter().all(|p| *p == [3.0, 1.0]));
        assert!(boundary_cloud(&s, [0, 1], 99, &mut rng).is_err());
    }
}
