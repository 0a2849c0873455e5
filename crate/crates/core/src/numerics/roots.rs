//! Polynomial roots through companion and colleague matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::cheb;
use super::eig::{eigenvalues, sort_roots};
use crate::error::{Error, Result};

/// Roots of `sum_k coeffs[k] s^k` (ascending coefficients).
///
/// Trailing zero coefficients are trimmed; an all-zero polynomial is an error.
/// A constant polynomial has no roots.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut end = coeffs.len();
    while end > 0 && coeffs[end - 1] == Complex64::new(0.0, 0.0) {
        end -= 1;
    }
    if end == 0 {
        return Err(Error::ZeroPolynomial);
    }
    let c = &coeffs[..end];
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    let mut roots = eigenvalues(&m)?;
    for r in roots.iter_mut() {
        *r = polish(|x| horner(c, x), *r);
    }
    sort_roots(&mut roots);
    Ok(roots)
}

fn horner(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

/// A few guarded Newton steps; a step is kept only if it reduces |p|.
fn polish<F: Fn(Complex64) -> (Complex64, Complex64)>(f: F, x0: Complex64) -> Complex64 {
    let mut x = x0;
    let (mut px, mut dpx) = f(x);
    for _ in 0..3 {
        if dpx.norm() == 0.0 || !px.norm().is_finite() {
            break;
        }
        let xn = x - px / dpx;
        let (pn, dpn) = f(xn);
        if pn.norm() < px.norm() {
            x = xn;
            px = pn;
            dpx = dpn;
        } else {
            break;
        }
    }
    x
}

/// Roots of `sum_k c[k] T_k(x)` from the colleague matrix.
///
/// Leading coefficients below `trim_rel * max|c|` are dropped first; the
/// number of dropped degrees is returned as roots at infinity.
pub fn cheb_roots(c: &[Complex64], trim_rel: f64) -> Result<(Vec<Complex64>, usize)> {
    if c.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroPolynomial);
    }
    let t = cheb::trim(c, trim_rel);
    let at_infinity = c.len() - t.len();
    let n = t.len() - 1;
    if n == 0 {
        return Ok((Vec::new(), at_infinity));
    }
    let half = Complex64::new(0.5, 0.0);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    if n == 1 {
        return Ok((vec![-t[0] / t[1]], at_infinity));
    }
    m[(0, 1)] = Complex64::new(1.0, 0.0);
    for k in 1..n - 1 {
        m[(k, k - 1)] = half;
        m[(k, k + 1)] = half;
    }
    m[(n - 1, n - 2)] = half;
    let lead = t[n];
    for k in 0..n {
        m[(n - 1, k)] -= t[k] / (2.0 * lead);
    }
    let mut roots = eigenvalues(&m)?;
    let d = cheb::derivative(&t);
    for r in roots.iter_mut() {
        *r = polish(|x| (cheb::clenshaw(&t, x), cheb::clenshaw(&d, x)), *r);
    }
    sort_roots(&mut roots);
    Ok((roots, at_infinity))
}

/// Snaps near-conjugate pairs onto exact conjugates.
///
/// Two values p, q pair when `|q - conj(p)| <= tol * scale`; a value that
/// pairs with itself becomes real. Unpaired values are left unchanged.
pub fn pair_conjugates(v: &mut [Complex64], tol: f64, scale: f64) {
    let n = v.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let target = v[i].conj();
        let mut best: Option<(usize, f64)> = None;
        for j in i..n {
            if done[j] {
                continue;
            }
            let d = (v[j] - target).norm();
            if d <= tol * scale && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            if j == i {
                v[i] = Complex64::new(v[i].re, 0.0);
            } else {
                let avg = 0.5 * (v[i] + v[j].conj());
                v[i] = avg;
                v[j] = avg.conj();
                done[j] = true;
            }
        }
        done[i] = true;
    }
}
