//! Pole relocation by linearized rational fitting of boundary samples.
//!
//! Both fitters minimize `|| (P - Q W) / Qhat ||` in the quadrature norm,
//! where `Qhat` has the current poles as zeros. Vector fitting uses the
//! partial-fraction basis on the current poles; iterated rational fitting
//! uses Arnoldi-orthonormalized polynomial bases.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{PoleSet, ProblemKind};
use crate::error::{Error, Result};
use crate::geometry::{Boundary, DomainSide};
use crate::numerics::{eigenvalues, hessenberg_eigs, lsq_colpivot, LsqOptions};
use crate::quadrature::QuadratureRule;

/// Reciprocal condition below which vector fitting hands over to IRF.
pub const DEFAULT_SWITCH_RCOND: f64 = 1.490_116_119_384_765_6e-8;

/// Samples to fit.
#[derive(Debug, Clone, Copy)]
pub struct FitInput<'a> {
    pub points: &'a [Complex64],
    pub weights: &'a [f64],
    pub samples: &'a [Complex64],
    /// Zeros of `Qhat`: all current poles, inside and outside.
    pub poles: &'a [Complex64],
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitMethod {
    #[serde(rename = "VF")]
    Vf,
    #[serde(rename = "IRF")]
    Irf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub new_poles: Vec<Complex64>,
    pub method: FitMethod,
    pub cond_estimate: f64,
    pub residual_norm: f64,
    /// Order actually used (IRF reduces it on Arnoldi breakdown).
    pub effective_order: usize,
    /// Non-finite zeros removed.
    pub dropped_infinite: usize,
}

/// Outcome of a vector-fitting attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum VfOutcome {
    Fit(FitResult),
    UseIrf { rcond: f64 },
}

impl FitInput<'_> {
    fn validate(&self) -> Result<()> {
        let k = self.points.len();
        if self.weights.len() != k || self.samples.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} points, {} weights, {} samples",
                k,
                self.weights.len(),
                self.samples.len()
            )));
        }
        if k < 2 * self.order + 2 {
            return Err(Error::InvalidInput(format!("{k} samples cannot determine an order-{} fit", self.order)));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidInput("fit weights must be positive".into()));
        }
        if let Some(i) = self.samples.iter().position(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    /// True when the samples are constant in the weighted norm; no finite
    /// pole is then needed.
    fn is_constant(&self) -> bool {
        let tw: f64 = self.weights.iter().sum();
        let mean: Complex64 = self.weights.iter().zip(self.samples).map(|(w, s)| s * *w).sum::<Complex64>() / tw;
        let dev: f64 = self.weights.iter().zip(self.samples).map(|(w, s)| w * (s - mean).norm_sqr()).sum();
        let tot: f64 = self.weights.iter().zip(self.samples).map(|(w, s)| w * s.norm_sqr()).sum();
        dev <= 1e-26 * tot || tot == 0.0
    }

    fn empty_result(&self, method: FitMethod) -> FitResult {
        FitResult { new_poles: Vec::new(), method, cond_estimate: 1.0, residual_norm: 0.0, effective_order: 0, dropped_infinite: 0 }
    }
}

fn finite_only(v: Vec<Complex64>) -> (Vec<Complex64>, usize) {
    let n = v.len();
    let kept: Vec<Complex64> = v.into_iter().filter(|z| z.re.is_finite() && z.im.is_finite()).collect();
    let d = n - kept.len();
    (kept, d)
}

/// One vector-fitting step. The order is the number of current poles.
pub fn vf_step(inp: &FitInput, switch_rcond: f64) -> Result<VfOutcome> {
    inp.validate()?;
    let n = inp.poles.len();
    if n != inp.order {
        return Err(Error::DimensionMismatch(format!("vector fitting needs {} poles, got {n}", inp.order)));
    }
    if inp.is_constant() {
        return Ok(VfOutcome::Fit(inp.empty_result(FitMethod::Vf)));
    }
    let scale = inp.points.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (inp.poles[i] - inp.poles[j]).norm() <= 1e-10 * scale {
                return Ok(VfOutcome::UseIrf { rcond: 0.0 });
            }
        }
    }
    let k = inp.points.len();
    let mut a = DMatrix::<Complex64>::zeros(k, 2 * n + 1);
    let mut b = DVector::<Complex64>::zeros(k);
    for r in 0..k {
        let w = inp.weights[r].sqrt();
        let z = inp.points[r];
        let f = inp.samples[r];
        a[(r, 0)] = Complex64::new(w, 0.0);
        for (i, &p) in inp.poles.iter().enumerate() {
            let phi = 1.0 / (p - z);
            a[(r, 1 + i)] = phi * w;
            a[(r, 1 + n + i)] = -f * phi * w;
        }
        b[r] = f * w;
    }
    let sol = lsq_colpivot(&a, &b, LsqOptions::default())?;
    let rcond = sol.rcond();
    if rcond < switch_rcond {
        return Ok(VfOutcome::UseIrf { rcond });
    }
    // Zeros of 1 + sum d_n / (p_n - z) are the eigenvalues of diag(p) + 1 d^T.
    let mut c = DMatrix::<Complex64>::from_diagonal(&DVector::from_column_slice(inp.poles));
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] += sol.x[1 + n + j];
        }
    }
    let (new_poles, dropped) = finite_only(eigenvalues(&c)?);
    Ok(VfOutcome::Fit(FitResult {
        new_poles,
        method: FitMethod::Vf,
        cond_estimate: sol.cond_estimate,
        residual_norm: sol.residual_norm,
        effective_order: n,
        dropped_infinite: dropped,
    }))
}

/// Orthonormal Krylov basis of `span[d, Z d, ..., Z^n d]` and its
/// `(m+1) x m` Hessenberg matrix, `m <= n` after breakdown.
pub struct Arnoldi {
    pub basis: DMatrix<Complex64>,
    pub h: DMatrix<Complex64>,
    /// Norm of the start vector.
    pub start_norm: f64,
}

/// Arnoldi with classical Gram-Schmidt applied twice.
pub fn arnoldi(z: &[Complex64], d: &[Complex64], n: usize) -> Arnoldi {
    let k = z.len();
    let zmax = z.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let start_norm = d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut q = DMatrix::<Complex64>::zeros(k, n + 1);
    let mut h = DMatrix::<Complex64>::zeros(n + 1, n);
    if start_norm == 0.0 {
        return Arnoldi { basis: DMatrix::zeros(k, 0), h: DMatrix::zeros(0, 0), start_norm };
    }
    for r in 0..k {
        q[(r, 0)] = d[r] / start_norm;
    }
    let mut m = n;
    for j in 0..n {
        let mut v: DVector<Complex64> = DVector::from_fn(k, |r, _| z[r] * q[(r, j)]);
        for _ in 0..2 {
            for i in 0..=j {
                let col = q.column(i);
                let c = col.dotc(&v);
                h[(i, j)] += c;
                v.axpy(-c, &col.into_owned(), Complex64::new(1.0, 0.0));
            }
        }
        let nv = v.norm();
        if nv <= 1e-13 * zmax {
            m = j;
            break;
        }
        h[(j + 1, j)] = Complex64::new(nv, 0.0);
        q.set_column(j + 1, &(v / Complex64::new(nv, 0.0)));
    }
    Arnoldi { basis: q.columns(0, m + 1).into_owned(), h: h.view((0, 0), (m + 1, m)).into_owned(), start_norm }
}

impl Arnoldi {
    pub fn order(&self) -> usize {
        self.h.ncols()
    }

    /// Values and derivatives of the basis polynomials at `z`, normalized
    /// so that the basis column j equals `start * pi_j(Z)`.
    pub fn eval(&self, z: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
        let m = self.order();
        let mut p = vec![Complex64::new(0.0, 0.0); m + 1];
        let mut dp = p.clone();
        p[0] = Complex64::new(1.0 / self.start_norm, 0.0);
        for j in 0..m {
            let mut v = z * p[j];
            let mut dv = p[j] + z * dp[j];
            for i in 0..=j {
                v -= self.h[(i, j)] * p[i];
                dv -= self.h[(i, j)] * dp[i];
            }
            p[j + 1] = v / self.h[(j + 1, j)];
            dp[j + 1] = dv / self.h[(j + 1, j)];
        }
        (p, dp)
    }
}

/// Start vector `sqrt(lambda) / Qhat`, computed in log space and scaled to
/// unit maximum.
fn start_vector(inp: &FitInput) -> Vec<Complex64> {
    let logs: Vec<Complex64> = inp
        .points
        .iter()
        .zip(inp.weights)
        .map(|(&z, &w)| Complex64::new(0.5 * w.ln(), 0.0) - inp.poles.iter().map(|&p| (p - z).ln()).sum::<Complex64>())
        .collect();
    let top = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|l| (l - top).exp()).collect()
}

/// IRF solution with enough state to evaluate `P` and `Q`.
pub struct IrfFit {
    pub result: FitResult,
    pub p_basis: Arnoldi,
    pub q_basis: Arnoldi,
    /// Coefficients of `P` in the P basis.
    pub p_coef: Vec<Complex64>,
    /// Coefficients of `Q` in the Q basis (last one is 1).
    pub q_coef: Vec<Complex64>,
}

impl IrfFit {
    /// `P(z) / Q'(z)`, the residue of `P/Q` at a simple zero of `Q`.
    pub fn residue_at(&self, z: Complex64) -> Complex64 {
        let (pp, _) = self.p_basis.eval(z);
        let (_, dq) = self.q_basis.eval(z);
        let p: Complex64 = pp.iter().zip(&self.p_coef).map(|(a, b)| a * b).sum();
        let q: Complex64 = dq.iter().zip(&self.q_coef).map(|(a, b)| a * b).sum();
        p / q
    }
}

/// One iterated-rational-fitting step with full state.
pub fn irf_fit(inp: &FitInput) -> Result<Option<IrfFit>> {
    inp.validate()?;
    if inp.order == 0 || inp.is_constant() {
        return Ok(None);
    }
    let d = start_vector(inp);
    let dw: Vec<Complex64> = d.iter().zip(inp.samples).map(|(a, b)| a * b).collect();
    let pa = arnoldi(inp.points, &d, inp.order);
    let qa = arnoldi(inp.points, &dw, inp.order);
    let n = pa.order().min(qa.order());
    if n == 0 {
        return Ok(None);
    }
    let k = inp.points.len();
    let cols = (n + 1) + n;
    let mut a = DMatrix::<Complex64>::zeros(k, cols);
    for j in 0..=n {
        a.set_column(j, &pa.basis.column(j));
    }
    for j in 0..n {
        a.set_column(n + 1 + j, &(-qa.basis.column(j)));
    }
    let rhs: DVector<Complex64> = qa.basis.column(n).into_owned();
    let sol = lsq_colpivot(&a, &rhs, LsqOptions { rtol: None, equilibrate: false })?;
    let qc: DVector<Complex64> = sol.x.rows(n + 1, n).into_owned();
    let h = qa.h.view((0, 0), (n + 1, n)).into_owned();
    let (new_poles, dropped) = finite_only(hessenberg_eigs(&h, Some(&qc))?);
    let mut q_coef: Vec<Complex64> = qc.iter().copied().collect();
    q_coef.push(Complex64::new(1.0, 0.0));
    let p_coef = sol.x.rows(0, n + 1).iter().copied().collect();
    Ok(Some(IrfFit {
        result: FitResult {
            new_poles,
            method: FitMethod::Irf,
            cond_estimate: sol.cond_estimate,
            residual_norm: sol.residual_norm,
            effective_order: n,
            dropped_infinite: dropped,
        },
        p_basis: pa,
        q_basis: qa,
        p_coef,
        q_coef,
    }))
}

/// One iterated-rational-fitting step.
pub fn irf_step(inp: &FitInput) -> Result<FitResult> {
    Ok(match irf_fit(inp)? {
        Some(f) => f.result,
        None => inp.empty_result(FitMethod::Irf),
    })
}

/// Vector fitting with fallback to IRF when the poles are clustered or the
/// system is ill-conditioned.
pub fn relocate(inp: &FitInput, switch_rcond: f64) -> Result<FitResult> {
    if inp.order == inp.poles.len() && inp.order > 0 {
        match vf_step(inp, switch_rcond) {
            Ok(VfOutcome::Fit(r)) => return Ok(r),
            Ok(VfOutcome::UseIrf { .. }) | Err(Error::EigenFailure) => {}
            Err(e) => return Err(e),
        }
    }
    irf_step(inp)
}

/// Initial pole guess with diagnostics.
#[derive(Debug, Clone)]
pub struct InitialPoles {
    pub poles: PoleSet,
    /// Zeros of the doubled-order fit, before selection.
    pub candidates: Vec<Complex64>,
    /// Poles added on the fallback circle (or inside obstacles).
    pub padded: usize,
}

/// Fits the real data with order `2n` and `Qhat = 1`, then keeps `n` zeros,
/// preferring those outside the domain and, within each side, those with
/// larger residues. The rule should be pole-free with at least `2n + 1`
/// poles at infinity per section.
pub fn initial_poles(b: &Boundary, rule: &QuadratureRule, f: &[f64], n: usize, kind: ProblemKind) -> Result<InitialPoles> {
    let samples: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let inp = FitInput { points: &rule.points, weights: &rule.weights, samples: &samples, poles: &[], order: 2 * n };
    let diam = b.diameter();
    let mut ranked: Vec<(Complex64, f64, DomainSide)> = Vec::new();
    let mut candidates = Vec::new();
    if n > 0 {
        if let Some(fit) = irf_fit(&inp)? {
            for &z in &fit.result.new_poles {
                candidates.push(z);
                if z.norm() > 1e6 * diam.max(1.0) {
                    continue;
                }
                let side = crate::basis::side_in_domain(b, z, kind)?;
                if side == DomainSide::OnBoundary {
                    continue;
                }
                let r = fit.residue_at(z).norm();
                ranked.push((z, if r.is_finite() { r } else { 0.0 }, side));
            }
        }
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut chosen: Vec<Complex64> = ranked.iter().filter(|r| r.2 == DomainSide::Outside).map(|r| r.0).take(n).collect();
    let more: Vec<Complex64> = ranked.iter().filter(|r| r.2 == DomainSide::Inside).map(|r| r.0).take(n - chosen.len()).collect();
    chosen.extend(more);
    let padded = n - chosen.len();
    chosen.extend(fallback_poles(b, kind, padded)?);
    Ok(InitialPoles { poles: PoleSet::classify(b, chosen, kind)?, candidates, padded })
}

/// Fallback pole placement outside the solution domain: a circle of radius
/// twice the diameter for interior problems, small circles inside the
/// obstacles for exterior ones.
pub fn fallback_poles(b: &Boundary, kind: ProblemKind, count: usize) -> Result<Vec<Complex64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    if !kind.is_exterior() {
        let pts = b.sample_uniform(256);
        let c = pts.iter().map(|p| p.1).sum::<Complex64>() / pts.len() as f64;
        let r = 2.0 * b.diameter();
        return Ok((0..count).map(|k| c + Complex64::from_polar(r, 0.3 + golden * k as f64)).collect());
    }
    let j_count = b.contour_count();
    let mut centers = Vec::with_capacity(j_count);
    for j in 0..j_count {
        let c = b.interior_point(j)?;
        let dist = b.contour_polyline(j, 32).iter().map(|p| (p - c).norm()).fold(f64::INFINITY, f64::min);
        centers.push((c, 0.25 * dist));
    }
    Ok((0..count)
        .map(|k| {
            let (c, r) = centers[k % j_count];
            let ring = (k / j_count) as f64;
            if ring == 0.0 {
                c
            } else {
                c + Complex64::from_polar(r * (1.0 - 0.5 / ring), golden * ring)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Unit-circle samples with trapezoid weights.
    fn circle_samples(k: usize, w: impl Fn(Complex64) -> Complex64) -> (Vec<Complex64>, Vec<f64>, Vec<Complex64>) {
        let z: Vec<Complex64> = (0..k).map(|i| Complex64::from_polar(1.0, 2.0 * PI * (i as f64 + 0.5) / k as f64)).collect();
        let wts = vec![2.0 * PI / k as f64; k];
        let f = z.iter().map(|&z| w(z)).collect();
        (z, wts, f)
    }

    fn closest(v: &[Complex64], t: Complex64) -> f64 {
        v.iter().map(|z| (z - t).norm()).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn vf_recovers_single_pole() {
        let (z, w, f) = circle_samples(40, |z| 1.0 / (2.0 - z) + 5.0);
        let inp = FitInput { points: &z, weights: &w, samples: &f, poles: &[c(-3.0, 1.0)], order: 1 };
        match vf_step(&inp, DEFAULT_SWITCH_RCOND).unwrap() {
            VfOutcome::Fit(r) => assert!((r.new_poles[0] - c(2.0, 0.0)).norm() < 1e-10, "{:?}", r.new_poles),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn irf_recovers_single_pole() {
        let (z, w, f) = circle_samples(40, |z| 1.0 / (2.0 - z) + 5.0);
        let inp = FitInput { points: &z, weights: &w, samples: &f, poles: &[c(0.1, 3.0)], order: 1 };
        let r = irf_step(&inp).unwrap();
        assert!((r.new_poles[0] - c(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn irf_three_poles() {
        let truth = [c(1.8, 0.4), c(-1.5, -1.1), c(0.2, 2.5)];
        let res = [c(1.0, 0.5), c(-0.7, 0.0), c(0.3, -0.2)];
        let (z, w, f) = circle_samples(64, |z| truth.iter().zip(&res).map(|(p, a)| a / (p - z)).sum());
        let start = [c(3.0, 0.0), c(0.0, -3.0), c(-2.0, 2.0)];
        let inp = FitInput { points: &z, weights: &w, samples: &f, poles: &start, order: 3 };
        let r = irf_step(&inp).unwrap();
        for t in truth {
            assert!(closest(&r.new_poles, t) < 1e-8);
        }
    }

    #[test]
    fn arnoldi_orthonormal() {
        let (z, _, _) = circle_samples(50, |_| c(0.0, 0.0));
        let d: Vec<Complex64> = (0..50).map(|i| c(1.0 + 0.01 * i as f64, 0.0)).collect();
        let a = arnoldi(&z, &d, 10);
        let g = a.basis.adjoint() * &a.basis;
        assert!((g - DMatrix::identity(11, 11)).norm() < 1e-12);
        let (p, _) = a.eval(z[7]);
        assert!((p[4] * d[7] - a.basis[(7, 4)]).norm() < 1e-12);
    }

    #[test]
    fn constant_data_has_no_poles() {
        let (z, w, f) = circle_samples(30, |_| c(2.5, 0.0));
        let inp = FitInput { points: &z, weights: &w, samples: &f, poles: &[c(2.0, 0.0), c(-2.0, 0.0)], order: 2 };
        match vf_step(&inp, DEFAULT_SWITCH_RCOND).unwrap() {
            VfOutcome::Fit(r) => assert!(r.new_poles.is_empty()),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn coincident_poles_switch() {
        let (z, w, f) = circle_samples(30, |z| 1.0 / (2.0 - z));
        let p = [c(3.0, 0.0), c(3.0 + 1e-13, 0.0)];
        let inp = FitInput { points: &z, weights: &w, samples: &f, poles: &p, order: 2 };
        assert!(matches!(vf_step(&inp, DEFAULT_SWITCH_RCOND).unwrap(), VfOutcome::UseIrf { .. }));
        let r = relocate(&inp, DEFAULT_SWITCH_RCOND).unwrap();
        assert_eq!(r.method, FitMethod::Irf);
        assert!(closest(&r.new_poles, c(2.0, 0.0)) < 1e-8);
    }

    #[test]
    fn scale_invariance() {
        let (z, w, f) = circle_samples(48, |z| 1.0 / (1.7 - z) + c(0.5, 0.2) / (c(0.0, -1.9) - z));
        let g: Vec<Complex64> = f.iter().map(|v| v * -3.5).collect();
        let p = [c(2.5, 1.0), c(-2.0, -1.5)];
        let a = relocate(&FitInput { points: &z, weights: &w, samples: &f, poles: &p, order: 2 }, DEFAULT_SWITCH_RCOND).unwrap();
        let b = relocate(&FitInput { points: &z, weights: &w, samples: &g, poles: &p, order: 2 }, DEFAULT_SWITCH_RCOND).unwrap();
        for q in &a.new_poles {
            assert!(closest(&b.new_poles, *q) < 1e-10);
        }
    }
}
