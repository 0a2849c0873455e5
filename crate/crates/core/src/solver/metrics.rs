//! Boundary error measures and field evaluation.

use num_complex::Complex64;
use rayon::prelude::*;

use super::data::BoundaryData;
use super::neumann::NeumannPrep;
use crate::basis::{side_in_domain, PotentialModel};
use crate::error::Result;
use crate::geometry::{Boundary, DomainSide};
use crate::numerics::integrate::integrate_real;
use crate::quadrature::QuadratureRule;

/// Default number of boundary points for [`delta_e_max`].
pub const DENSE_SAMPLES: usize = 20_000;

/// A relative error, or the absolute one when the reference norm vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorValue {
    pub value: f64,
    pub absolute: bool,
}

/// `||u - f||_w / ||f||_w` with the rule's weights.
pub fn relative_error(rule: &QuadratureRule, u: &[f64], f: &[f64]) -> ErrorValue {
    let num: f64 = rule.weights.iter().zip(u).zip(f).map(|((w, a), b)| w * (a - b) * (a - b)).sum();
    let den: f64 = rule.weights.iter().zip(f).map(|(w, b)| w * b * b).sum();
    if den > 0.0 {
        ErrorValue { value: (num / den).sqrt(), absolute: false }
    } else {
        ErrorValue { value: num.sqrt(), absolute: true }
    }
}

/// Dirichlet `Delta E` of a model against data samples at the rule nodes.
pub fn delta_e(model: &PotentialModel, rule: &QuadratureRule, f: &[f64]) -> Result<ErrorValue> {
    let u: Vec<f64> = rule.points.iter().map(|&z| model.eval(z).map(|w| w.re)).collect::<Result<_>>()?;
    Ok(relative_error(rule, &u, f))
}

/// `sqrt(int |g|^2 |dz|)` and `sqrt(length)` by adaptive quadrature.
pub fn l2_norm(b: &Boundary, g: impl Fn(f64, Complex64) -> f64 + Sync) -> (f64, f64) {
    let mut total = 0.0;
    for sec in b.sections() {
        total += integrate_real(
            |t| {
                let v = g(sec.to_global(t), sec.eval_local(t));
                v * v * sec.deriv_local(t).norm()
            },
            -1.0,
            1.0,
            1e-300,
            1e-10,
        );
    }
    (total.sqrt(), b.total_length().sqrt())
}

/// Maximum error over `n` uniform boundary samples, divided by the RMS of
/// the data. For Neumann problems the comparison is on the stream
/// function `F_j + v_j`.
pub fn delta_e_max(
    model: &PotentialModel,
    b: &Boundary,
    data: &BoundaryData,
    neumann: Option<&NeumannPrep>,
    n: usize,
) -> Result<ErrorValue> {
    let kind = model.kind;
    let samples = b.sample_uniform(n);
    let reference = |s: f64, z: Complex64| -> f64 {
        match neumann {
            Some(prep) => {
                let m = b.section_at(s).expect("s in range");
                prep.eval(b, s).expect("s in range") + model.v_consts.get(b.contour_of_section(m)).copied().unwrap_or(0.0)
            }
            None => {
                let p = super::data::BoundaryPoint::at(b, s, kind).expect("s in range");
                debug_assert!((p.z - z).norm() < 1e-12 * (1.0 + z.norm()));
                data.eval(&p)
            }
        }
    };
    let errs: Vec<f64> = samples
        .par_iter()
        .map(|&(s, z)| {
            let w = model.eval(z)?;
            let approx = if neumann.is_some() { model.eval_rational(z).im } else { w.re };
            Ok((approx - reference(s, z)).abs())
        })
        .collect::<Result<_>>()?;
    let max = errs.iter().cloned().fold(0.0, f64::max);
    let (nf, n1) = l2_norm(b, reference);
    if nf > 0.0 {
        Ok(ErrorValue { value: max / (nf / n1), absolute: false })
    } else {
        Ok(ErrorValue { value: max, absolute: true })
    }
}

/// `W` at each point in the solution domain; `None` for masked points
/// (outside the domain, on the boundary, or at a singularity).
pub fn eval_field(model: &PotentialModel, b: &Boundary, grid: &[Complex64]) -> Vec<Option<Complex64>> {
    grid.par_iter()
        .map(|&z| match side_in_domain(b, z, model.kind) {
            Ok(DomainSide::Inside) => model.eval(z).ok().filter(|w| w.re.is_finite() && w.im.is_finite()),
            _ => None,
        })
        .collect()
}
