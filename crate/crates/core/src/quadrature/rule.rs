//! Rational Gauss-Chebyshev rules on [-1, 1].
//!
//! With `x = cos(theta)` a pole `beta` of the integrand maps to the pair
//! `a, 1/a` on the unit circle, where `a` is the inverse Joukowski image of
//! `beta` with `|a| < 1`. The rule nodes are the points where the phase of a
//! finite Blaschke product with zeros at the `a`'s (and at the origin, for
//! polynomial exactness) crosses odd multiples of pi.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Inverse Joukowski map: the `a` with `|a| <= 1` and `(a + 1/a) / 2 = beta`.
pub fn joukowski_inv(beta: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let r = (beta - one).sqrt() * (beta + one).sqrt();
    let (p, m) = (beta + r, beta - r);
    if p.norm() >= m.norm() {
        one / p
    } else {
        one / m
    }
}

/// Elliptical radius of `beta` relative to [-1, 1].
pub fn elliptical_radius(beta: Complex64) -> f64 {
    1.0 / joukowski_inv(beta).norm()
}

/// A Blaschke zero pair `(a, conj a)` repeated `mult` times.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    pub a: Complex64,
    pub mult: usize,
}

struct Phase<'a> {
    entries: &'a [Entry],
    base: f64,
    n: usize,
}

impl Phase<'_> {
    fn new(entries: &[Entry], n_inf: usize) -> Phase<'_> {
        let total: usize = entries.iter().map(|e| e.mult).sum();
        Phase { entries, base: 2.0 * (1 + n_inf) as f64, n: 1 + n_inf + total }
    }

    /// psi(theta) and psi'(theta).
    fn eval(&self, theta: f64) -> (f64, f64) {
        let e = Complex64::from_polar(1.0, -theta);
        let w = Complex64::from_polar(1.0, theta);
        let one = Complex64::new(1.0, 0.0);
        let mut psi = 2.0 * self.n as f64 * theta;
        let mut dpsi = self.base;
        for en in self.entries {
            let m = en.mult as f64;
            let a = en.a;
            let ac = a.conj();
            let k = 1.0 - a.norm_sqr();
            psi += 2.0 * m * ((one - a * e).arg() + (one - ac * e).arg());
            dpsi += m * k * (1.0 / (w - a).norm_sqr() + 1.0 / (w - ac).norm_sqr());
        }
        (psi, dpsi)
    }
}

/// Safeguarded Newton for psi(theta) = target on (lo, hi), psi increasing.
fn solve_phase(ph: &Phase, target: f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let (plo, dlo) = ph.eval(lo);
    let mut x = (lo + (target - plo) / dlo).clamp(lo, hi);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    let mut last = (x, 1.0);
    for _ in 0..200 {
        let (f, df) = ph.eval(x);
        let g = f - target;
        last = (x, df);
        if g == 0.0 {
            break;
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut xn = x - g / df;
        if !(xn > lo && xn < hi) {
            xn = 0.5 * (lo + hi);
        }
        let step = (xn - x).abs();
        x = xn;
        if step <= 2.0 * f64::EPSILON * x.abs().max(1e-300) || hi - lo <= 2.0 * f64::EPSILON * hi {
            let (_, df) = ph.eval(x);
            last = (x, df);
            break;
        }
    }
    last
}

/// Nodes (ascending) and weights from Blaschke zero pairs.
pub(crate) fn rule_from_entries(entries: &[Entry], n_inf: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    for e in entries {
        if !(e.a.norm() < 1.0 - 2.0 * f64::EPSILON) {
            return Err(Error::PoleOnInterval);
        }
    }
    let ph = Phase::new(entries, n_inf);
    let n = ph.n;
    let mut thetas = Vec::with_capacity(n);
    let mut lo = 0.0;
    for j in 1..=n {
        let target = (2 * j - 1) as f64 * PI;
        let (t, d) = solve_phase(&ph, target, lo, PI);
        thetas.push((t, d));
        lo = t;
    }
    // theta increasing -> x decreasing; emit ascending x.
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(t, d) in thetas.iter().rev() {
        nodes.push(t.cos());
        weights.push(2.0 * PI / d);
    }
    Ok((nodes, weights))
}

/// Rational Gauss-Chebyshev rule for the weight `(1 - x^2)^{-1/2}`.
///
/// Every listed pole adds one node and `n_inf` adds polynomial exactness;
/// the rule has `poles.len() + n_inf + 1` nodes. It integrates
/// `R(x) conj(T(x))` exactly when `R` and `T` are rational with poles in the
/// list (repeat a pole to raise its allowed order) and polynomial parts of
/// degree up to `n_inf`. A conjugate-closed list gives exactness for real
/// rational functions with those poles.
pub fn rational_chebyshev_rule(poles: &[Complex64], n_inf: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let entries: Vec<Entry> = poles.iter().map(|&p| Entry { a: joukowski_inv(p), mult: 1 }).collect();
    rule_from_entries(&entries, n_inf)
}
