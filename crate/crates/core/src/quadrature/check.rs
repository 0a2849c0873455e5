//! Exactness checks of the rational Gauss-Chebyshev rule against adaptive
//! quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::rule::rational_chebyshev_rule;
use crate::error::Result;
use crate::numerics::integrate::integrate;

/// One random trial.
#[derive(Debug, Clone, Serialize)]
pub struct ExactnessCase {
    pub poles: Vec<Complex64>,
    pub n_inf: usize,
    pub nodes: usize,
    /// `|Q - I| / int |f|`, both against the Chebyshev weight.
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessReport {
    pub cases: Vec<ExactnessCase>,
    pub worst: f64,
    /// Relative error of the rule on `(2 - s)^-2` (closed form `2 pi / 3^1.5`).
    pub closed_form_error: f64,
}

/// A point whose elliptical radius is `rho`, at a random angle.
fn point_at_radius(rng: &mut ChaCha8Rng, rho: f64) -> Complex64 {
    let w = Complex64::from_polar(rho, rng.random_range(0.0..2.0 * PI));
    0.5 * (w + 1.0 / w)
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

/// `sum c_k / (s - p_k) + polynomial` with the polynomial coefficients
/// following the pole ones.
fn eval_basis(c: &[Complex64], poles: &[Complex64], s: f64) -> Complex64 {
    let z = Complex64::new(s, 0.0);
    let mut v: Complex64 = poles.iter().zip(c).map(|(p, a)| a / (z - p)).sum();
    let mut pw = Complex64::new(1.0, 0.0);
    for a in &c[poles.len()..] {
        v += a * pw;
        pw *= z;
    }
    v
}

/// Runs `trials` random cases: conjugate-closed pole lists with elliptical
/// radii in `[rho_min, 4 rho_min]`, random `n_inf`, and integrands
/// `R(s) conj(T(s))` with `R`, `T` random combinations of the simple
/// fractions and polynomials of degree `n_inf`.
pub fn exactness_suite(trials: usize, rho_min: f64, seed: u64) -> Result<ExactnessReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(trials);
    for _ in 0..trials {
        let roots = rng.random_range(1..=4);
        let mut poles = Vec::new();
        for _ in 0..roots {
            let rho = rng.random_range(rho_min..4.0 * rho_min);
            let b = point_at_radius(&mut rng, rho);
            poles.push(b);
            poles.push(b.conj());
        }
        let n_inf = rng.random_range(0..=5);
        let (x, w) = rational_chebyshev_rule(&poles, n_inf)?;
        let r = random_coeffs(&mut rng, poles.len() + n_inf + 1);
        let t = random_coeffs(&mut rng, poles.len() + n_inf + 1);
        let f = |s: f64| eval_basis(&r, &poles, s) * eval_basis(&t, &poles, s).conj();
        let q: Complex64 = x.iter().zip(&w).map(|(&s, &w)| f(s) * w).sum();
        let exact = integrate(|th| f(th.cos()), 0.0, PI, 1e-16, 1e-15, 20_000).value;
        let scale = integrate(|th| Complex64::new(f(th.cos()).norm(), 0.0), 0.0, PI, 1e-16, 1e-12, 20_000).value.re;
        cases.push(ExactnessCase { poles, n_inf, nodes: x.len(), rel_error: (q - exact).norm() / scale });
    }
    let worst = cases.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    let (x, w) = rational_chebyshev_rule(&[Complex64::new(2.0, 0.0)], 0)?;
    let q: f64 = x.iter().zip(&w).map(|(x, w)| w / ((2.0 - x) * (2.0 - x))).sum();
    let exact = 2.0 * PI / 3f64.powf(1.5);
    Ok(ExactnessReport { cases, worst, closed_form_error: (q - exact).abs() / exact })
}
