use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Boundary, RationalSection};
use crate::error::Result;

/// Tolerance on the winding number (the Cauchy integral divided by 2 pi i).
pub const ON_BOUNDARY_TOL: f64 = 1e-6;

/// Position of a point relative to the region enclosed by the contours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainSide {
    Inside,
    Outside,
    OnBoundary,
}

/// Contribution `sum_l Log((1 - r_l) / (-1 - r_l))` of the roots `r_l` of a
/// factor of the integrand's denominator.
fn log_sum(roots: &[Complex64]) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    roots.iter().map(|r| ((one - r) / (-one - r)).ln()).sum()
}

/// A root of `zp q - p` this close to [-1, 1] puts `zp` on the curve up to
/// rounding; the principal logarithm would then pick an arbitrary side.
const ON_CURVE_ROOT_TOL: f64 = 1e-12;

/// Returns the section's share of the Cauchy integral and whether `zp` lies
/// on the section.
fn section_integral(sec: &RationalSection, zp: Complex64) -> Result<(Complex64, bool)> {
    // (dz/dt) / (z - zp) = d/dt [log(p - zp q) - log q]
    let (g_roots, _) = sec.shifted_roots(zp)?;
    let q_roots = sec.den_roots()?;
    let on = g_roots.iter().any(|r| r.im.abs() <= ON_CURVE_ROOT_TOL && r.re.abs() <= 1.0 + ON_CURVE_ROOT_TOL);
    Ok((log_sum(&g_roots) - log_sum(&q_roots), on))
}

fn cauchy_integral(b: &Boundary, zp: Complex64) -> Result<(f64, bool)> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut on = false;
    for sec in b.sections() {
        let (v, o) = section_integral(sec, zp)?;
        total += v;
        on |= o;
    }
    Ok((total.im / (2.0 * PI), on))
}

/// Winding number of the boundary (all contours summed) around `zp`,
/// computed from the partial-fraction form of the Cauchy integral.
pub fn winding_number(b: &Boundary, zp: Complex64) -> Result<f64> {
    Ok(cauchy_integral(b, zp)?.0)
}

/// Classifies `zp` relative to the region enclosed by `b`.
pub fn point_in_domain(b: &Boundary, zp: Complex64) -> Result<DomainSide> {
    let (w, on) = cauchy_integral(b, zp)?;
    let k = w.round();
    if on || (w - k).abs() > ON_BOUNDARY_TOL {
        return Ok(DomainSide::OnBoundary);
    }
    Ok(if k != 0.0 { DomainSide::Inside } else { DomainSide::Outside })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate::integrate;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_circle() -> Boundary {
        // z = ((1 - t^2) + 2 i t) / (1 + t^2) covers the right half for
        // t in [-1, 1]; its negative covers the left half.
        let num = [c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.0)];
        let den = [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let right = RationalSection::from_monomial(&num, &den, (0.0, 0.5)).unwrap();
        let neg: Vec<_> = num.iter().map(|v| -v).collect();
        let left = RationalSection::from_monomial(&neg, &den, (0.5, 1.0)).unwrap();
        Boundary::new(vec![vec![right, left]]).unwrap()
    }

    /// Winding number by adaptive quadrature of the Cauchy integral.
    fn sampled_winding(b: &Boundary, zp: Complex64) -> f64 {
        let mut total = 0.0;
        for sec in b.sections() {
            total += integrate(|t| sec.deriv_local(t) / (sec.eval_local(t) - zp), -1.0, 1.0, 1e-13, 1e-12, 20000)
                .value
                .im;
        }
        total / (2.0 * PI)
    }

    #[test]
    fn circle_center_and_outside() {
        let b = unit_circle();
        assert_eq!(point_in_domain(&b, c(0.0, 0.0)).unwrap(), DomainSide::Inside);
        assert_eq!(point_in_domain(&b, c(2.0, 0.0)).unwrap(), DomainSide::Outside);
    }

    #[test]
    fn just_outside_matches_sampling() {
        let b = unit_circle();
        let zp = c(1.0 + 1e-8, 0.0);
        assert_eq!(point_in_domain(&b, zp).unwrap(), DomainSide::Outside);
        assert!(sampled_winding(&b, zp).abs() < 1e-3);
        let zi = c(1.0 - 1e-8, 0.0);
        assert_eq!(point_in_domain(&b, zi).unwrap(), DomainSide::Inside);
    }

    #[test]
    fn point_on_curve_is_on_boundary() {
        let b = unit_circle();
        let z = c((0.3f64).cos(), (0.3f64).sin());
        assert_eq!(point_in_domain(&b, z).unwrap(), DomainSide::OnBoundary);
    }

    #[test]
    fn analytic_matches_sampled_at_random_points() {
        let b = unit_circle();
        for k in 0..20 {
            let r = 0.25 + 0.1 * k as f64;
            let zp = Complex64::from_polar(r, 0.7 * k as f64);
            let a = winding_number(&b, zp).unwrap();
            let s = sampled_winding(&b, zp);
            assert!((a - s).abs() < 1e-8, "{zp}: {a} vs {s}");
        }
    }
}
