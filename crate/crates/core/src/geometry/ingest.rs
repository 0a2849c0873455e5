use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{monomial_to_cheb, Boundary, RationalSection, DEFAULT_CLOSURE_TOL};
use crate::error::{Error, Result};

/// Spline degree used when fitting sampled contours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothness {
    #[default]
    Cubic,
    Quintic,
}

impl Smoothness {
    fn degree(self) -> usize {
        match self {
            Smoothness::Cubic => 3,
            Smoothness::Quintic => 5,
        }
    }
}

fn check_points(j: usize, pts: &[Complex64]) -> Result<()> {
    if pts.len() < 4 {
        return Err(Error::TooFewPoints { contour: j, count: pts.len() });
    }
    let scale = pts.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for i in 0..pts.len() {
        if (pts[(i + 1) % pts.len()] - pts[i]).norm() <= 1e-14 * scale {
            return Err(Error::DuplicatePoints { contour: j, index: i });
        }
    }
    Ok(())
}

/// `d`-th derivative of `t^k` at `t = x` (x = +-1).
fn mono_deriv(k: usize, d: usize, x: f64) -> f64 {
    if d > k {
        return 0.0;
    }
    let falling: f64 = (k - d + 1..=k).map(|v| v as f64).product();
    falling * x.powi((k - d) as i32)
}

/// Periodic spline through `pts` with chord-length knots; one polynomial
/// piece per pair of consecutive points, in the local variable t.
fn periodic_spline(pts: &[Complex64], degree: usize) -> Result<Vec<Vec<Complex64>>> {
    let m = pts.len();
    let p = degree;
    let nc = p + 1;
    let n = nc * m;
    let chord: Vec<f64> = (0..m).map(|i| (pts[(i + 1) % m] - pts[i]).norm()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, 2);
    let mut row = 0;
    for i in 0..m {
        for k in 0..nc {
            a[(row, i * nc + k)] = mono_deriv(k, 0, -1.0);
            a[(row + 1, i * nc + k)] = mono_deriv(k, 0, 1.0);
        }
        let (z0, z1) = (pts[i], pts[(i + 1) % m]);
        rhs[(row, 0)] = z0.re;
        rhs[(row, 1)] = z0.im;
        rhs[(row + 1, 0)] = z1.re;
        rhs[(row + 1, 1)] = z1.im;
        row += 2;
    }
    for i in 0..m {
        let next = (i + 1) % m;
        let avg = 0.5 * (chord[i] + chord[next]);
        for d in 1..p {
            // Derivatives with respect to arclength-like knot variable u,
            // du = (chord / 2) dt, scaled by a common factor.
            let si = (avg / chord[i]).powi(d as i32);
            let sn = (avg / chord[next]).powi(d as i32);
            for k in 0..nc {
                a[(row, i * nc + k)] = si * mono_deriv(k, d, 1.0);
                a[(row, next * nc + k)] = -sn * mono_deriv(k, d, -1.0);
            }
            row += 1;
        }
    }
    debug_assert_eq!(row, n);
    let sol = a.lu().solve(&rhs).ok_or_else(|| Error::InvalidInput("singular spline system".into()))?;
    Ok((0..m)
        .map(|i| (0..nc).map(|k| Complex64::new(sol[(i * nc + k, 0)], sol[(i * nc + k, 1)])).collect())
        .collect())
}

/// Fits a periodic piecewise-polynomial interpolant through each contour's
/// samples. The closing segment from the last point back to the first is
/// implied. Self-intersections are not detected.
pub fn ingest_samples(points_per_contour: &[Vec<Complex64>], smoothness: Smoothness) -> Result<Boundary> {
    let mut contours = Vec::with_capacity(points_per_contour.len());
    for (j, pts) in points_per_contour.iter().enumerate() {
        check_points(j, pts)?;
        let pieces = periodic_spline(pts, smoothness.degree())?;
        let secs = pieces
            .iter()
            .map(|c| RationalSection::new(monomial_to_cheb(c), vec![Complex64::new(1.0, 0.0)], (0.0, 1.0)))
            .collect::<Result<Vec<_>>>()?;
        contours.push(secs);
    }
    Boundary::with_closure_tol(contours, DEFAULT_CLOSURE_TOL)
}

/// Closed polygons, one straight section per edge.
pub fn ingest_polygon(vertices_per_contour: &[Vec<Complex64>]) -> Result<Boundary> {
    let mut contours = Vec::with_capacity(vertices_per_contour.len());
    for (j, v) in vertices_per_contour.iter().enumerate() {
        if v.len() < 3 {
            return Err(Error::TooFewPoints { contour: j, count: v.len() });
        }
        for i in 0..v.len() {
            if v[(i + 1) % v.len()] == v[i] {
                return Err(Error::DuplicatePoints { contour: j, index: i });
            }
        }
        contours.push((0..v.len()).map(|i| RationalSection::line(v[i], v[(i + 1) % v.len()], (0.0, 1.0))).collect());
    }
    Boundary::new(contours)
}
