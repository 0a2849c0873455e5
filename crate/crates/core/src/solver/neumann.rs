//! Exterior Neumann preprocessing: log strengths from the net flux of each
//! contour and the stream-function samples `F_j` up to per-contour
//! constants.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::data::{BoundaryData, BoundaryPoint};
use crate::basis::ProblemKind;
use crate::error::{Error, Result};
use crate::geometry::Boundary;
use crate::numerics::cheb;
use crate::numerics::integrate::integrate_real;

/// Relative tolerance for the zero-net-flux condition.
pub const COMPAT_TOL: f64 = 1e-10;

/// Result of [`neumann_preprocess`].
#[derive(Debug, Clone)]
pub struct NeumannPrep {
    pub log_coeffs: Vec<f64>,
    pub log_centers: Vec<Complex64>,
    /// `|sum_j A_j|` relative to the total absolute flux.
    pub compat_residual: f64,
    /// Chebyshev coefficients (local parameter) of `F` on each section.
    pieces: Vec<Vec<Complex64>>,
    /// `F` at the start of each section.
    offsets: Vec<f64>,
    /// `F` at the end of each contour: zero up to rounding.
    pub closure: Vec<f64>,
}

fn point_at(b: &Boundary, m: usize, t: f64, kind: ProblemKind) -> BoundaryPoint {
    let sec = &b.sections()[m];
    let dz = sec.deriv_local(t) * (2.0 / sec.width());
    BoundaryPoint::new(sec.to_global(t), sec.eval_local(t), dz, b.contour_of_section(m), kind)
}

/// Normal derivative of `log|z - c|` along `n`.
pub fn log_normal_derivative(z: Complex64, n: Complex64, c: Complex64) -> f64 {
    let d = z - c;
    (d * n.conj()).re / d.norm_sqr()
}

/// Computes `A_j = -(1/2 pi) int_j f |dz|`, checks `sum A_j = 0`, and builds
/// `F_j(s) = -int f~ |dz|` from the start of each contour, where `f~` is the
/// data minus the normal derivative of the log terms.
pub fn neumann_preprocess(b: &Boundary, data: &BoundaryData, log_centers: &[Complex64]) -> Result<NeumannPrep> {
    let kind = ProblemKind::ExteriorNeumann;
    let j_count = b.contour_count();
    if log_centers.len() != j_count {
        return Err(Error::DimensionMismatch(format!("{} log centers for {j_count} contours", log_centers.len())));
    }
    let mut flux = vec![0.0; j_count];
    let mut abs_flux = 0.0;
    for m in 0..b.section_count() {
        let sec = &b.sections()[m];
        let j = b.contour_of_section(m);
        let g = |t: f64| data.eval(&point_at(b, m, t, kind)) * sec.deriv_local(t).norm();
        flux[j] += integrate_real(g, -1.0, 1.0, 1e-15, 1e-13);
        abs_flux += integrate_real(|t| g(t).abs(), -1.0, 1.0, 1e-15, 1e-10);
    }
    let log_coeffs: Vec<f64> = flux.iter().map(|q| -q / (2.0 * PI)).collect();
    let total: f64 = flux.iter().sum();
    let compat_residual = total.abs() / abs_flux.max(f64::MIN_POSITIVE);
    if abs_flux > 0.0 && compat_residual > COMPAT_TOL {
        return Err(Error::Incompatible(compat_residual));
    }
    let mut pieces = Vec::with_capacity(b.section_count());
    let mut offsets = Vec::with_capacity(b.section_count());
    let mut closure = vec![0.0; j_count];
    for j in 0..j_count {
        let mut acc = 0.0;
        for m in b.contour_sections(j) {
            let sec = &b.sections()[m];
            let g = |t: f64| {
                let p = point_at(b, m, t, kind);
                let mut v = data.eval(&p);
                for (c, a) in log_centers.iter().zip(&log_coeffs) {
                    v -= a * log_normal_derivative(p.z, p.normal, *c);
                }
                Complex64::new(-v * sec.deriv_local(t).norm(), 0.0)
            };
            let c = cheb::antiderivative(&cheb::adaptive_interpolant(g, 1e-15, 1 << 14));
            offsets.push(acc);
            acc += cheb::clenshaw_real(&c, 1.0).re;
            pieces.push(c);
        }
        closure[j] = acc;
    }
    Ok(NeumannPrep { log_coeffs, log_centers: log_centers.to_vec(), compat_residual, pieces, offsets, closure })
}

impl NeumannPrep {
    /// `F` at global parameter `s`.
    pub fn eval(&self, b: &Boundary, s: f64) -> Result<f64> {
        let m = b.section_at(s)?;
        let t = b.sections()[m].to_local(s);
        Ok(self.offsets[m] + cheb::clenshaw_real(&self.pieces[m], t).re)
    }
}
