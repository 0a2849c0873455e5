//! Chebyshev series on [-1, 1] with complex coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Chebyshev points of the second kind, `x_j = cos(pi j / n)`, `j = 0..=n`.
pub fn cheb_points(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    // sin form keeps the points exactly symmetric.
    (0..=n)
        .map(|j| (PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin())
        .collect()
}

/// Coefficients of the degree-n interpolant through values sampled at
/// [`cheb_points`]`(n)`.
pub fn coeffs_from_values(values: &[Complex64]) -> Vec<Complex64> {
    let np = values.len();
    if np == 1 {
        return vec![values[0]];
    }
    let n = np - 1;
    // cos(pi j k / n) only depends on j k mod 2n.
    let table: Vec<f64> = (0..2 * n).map(|m| (PI * m as f64 / n as f64).cos()).collect();
    let mut out = Vec::with_capacity(np);
    for k in 0..=n {
        let mut s = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            s += v * (w * table[(j * k) % (2 * n)]);
        }
        let scale = if k == 0 || k == n { 1.0 / n as f64 } else { 2.0 / n as f64 };
        out.push(s * scale);
    }
    out
}

/// Clenshaw evaluation of `sum c_k T_k(x)` at a complex argument.
pub fn clenshaw(c: &[Complex64], x: Complex64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match c.first() {
        Some(c0) => c0 + x * b1 - b2,
        None => Complex64::new(0.0, 0.0),
    }
}

pub fn clenshaw_real(c: &[Complex64], x: f64) -> Complex64 {
    clenshaw(c, Complex64::new(x, 0.0))
}

/// Coefficients of the derivative series.
pub fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    if n <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + c[k] * (2.0 * k as f64);
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// Coefficients of the antiderivative that vanishes at x = -1.
pub fn antiderivative(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    let get = |k: usize| if k < n { c[k] } else { Complex64::new(0.0, 0.0) };
    if n == 0 {
        return out;
    }
    out[1] = get(0) - get(2) * 0.5;
    for k in 2..=n {
        out[k] = (get(k - 1) - get(k + 1)) / (2.0 * k as f64);
    }
    // Fix the constant so that F(-1) = 0, T_k(-1) = (-1)^k.
    let at_minus1: Complex64 = out
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
        .sum();
    out[0] = -at_minus1;
    out
}

/// Drops trailing coefficients with modulus at most `rel * max|c|`.
pub fn trim(c: &[Complex64], rel: f64) -> Vec<Complex64> {
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut end = c.len();
    while end > 1 && c[end - 1].norm() <= rel * scale {
        end -= 1;
    }
    c[..end].to_vec()
}

/// A Chebyshev interpolant of `f` on [-1, 1], refined by doubling until the
/// tail coefficients fall below `tol` relative to the largest coefficient.
pub fn adaptive_interpolant<F: Fn(f64) -> Complex64>(f: F, tol: f64, max_degree: usize) -> Vec<Complex64> {
    let mut n = 16;
    loop {
        let vals: Vec<Complex64> = cheb_points(n).into_iter().map(&f).collect();
        let c = coeffs_from_values(&vals);
        let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tail = c[n.saturating_sub(3)..].iter().map(|v| v.norm()).fold(0.0, f64::max);
        if tail <= tol * scale.max(f64::MIN_POSITIVE) || n >= max_degree {
            return trim(&c, tol * 0.1);
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn interpolates_polynomial_exactly() {
        // x^3 = (3 T1 + T3) / 4
        let vals: Vec<Complex64> = cheb_points(5).iter().map(|&x| r(x * x * x)).collect();
        let c = coeffs_from_values(&vals);
        assert!((c[1] - r(0.75)).norm() < 1e-15);
        assert!((c[3] - r(0.25)).norm() < 1e-15);
        assert!(c[0].norm() < 1e-15 && c[2].norm() < 1e-15 && c[4].norm() < 1e-15);
    }

    #[test]
    fn derivative_and_antiderivative() {
        let c = adaptive_interpolant(|x| r((2.0 * x).exp()), 1e-15, 256);
        let d = derivative(&c);
        let a = antiderivative(&c);
        for &x in &[-0.9, -0.1, 0.3, 0.99] {
            assert!((clenshaw_real(&d, x) - r(2.0 * (2.0 * x).exp())).norm() < 1e-12);
            let exact = 0.5 * ((2.0 * x).exp() - (-2.0f64).exp());
            assert!((clenshaw_real(&a, x) - r(exact)).norm() < 1e-13);
        }
    }
}
