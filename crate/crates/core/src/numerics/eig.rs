//! Eigenvalues of small dense complex matrices.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Parlett-Reinsch balancing with power-of-two scale factors.
pub fn balance(a: &mut DMatrix<Complex64>) {
    let n = a.nrows();
    const RADIX: f64 = 2.0;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Orders eigenvalues by real part, then imaginary part.
pub fn sort_roots(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// All eigenvalues of a general complex matrix (balanced, then Schur).
pub fn eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, a.ncols())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let mut b = a.clone();
    balance(&mut b);
    // The shifted QR without exceptional shifts can cycle; retry on
    // equivalent matrices before giving up.
    let attempts = [
        (b.clone(), f64::EPSILON, 100 * n.max(10)),
        (a.clone(), f64::EPSILON, 1000 * n.max(10)),
        (scramble(&b), 4.0 * f64::EPSILON, 1000 * n.max(10)),
    ];
    for (m, eps, iters) in attempts {
        if let Some(schur) = Schur::try_new(m, eps, iters) {
            let (_, t) = schur.unpack();
            let mut ev: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
            sort_roots(&mut ev);
            return Ok(ev);
        }
    }
    Err(Error::EigenFailure)
}

/// A unitary similarity `Q A Q^H` by a fixed Householder reflector, used to
/// break the structure that makes the shifted QR cycle.
fn scramble(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let v = DVector::from_fn(n, |i, _| Complex64::from_polar(1.0, 0.7 + 1.3 * i as f64) * (1.0 + 0.1 * i as f64));
    let v = v.unscale(v.norm());
    let q = DMatrix::<Complex64>::identity(n, n) - (&v * v.adjoint()) * Complex64::new(2.0, 0.0);
    &q * a * q.adjoint()
}

/// Eigenvalues of `H[0..n, 0..n] - h_{n,n-1} * c * e_n^T`, where `H` is the
/// `(n+1) x n` Hessenberg matrix of an Arnoldi process and `c` has length n.
///
/// Without an update vector the square leading block is used as is.
pub fn hessenberg_eigs(h: &DMatrix<Complex64>, update: Option<&DVector<Complex64>>) -> Result<Vec<Complex64>> {
    let n = h.ncols();
    if h.nrows() != n && h.nrows() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "Hessenberg matrix must be (n+1) x n or n x n, got {}x{}",
            h.nrows(),
            n
        )));
    }
    let mut c = h.view((0, 0), (n, n)).into_owned();
    if let Some(u) = update {
        if u.len() != n {
            return Err(Error::DimensionMismatch(format!("update has {} entries, expected {n}", u.len())));
        }
        if h.nrows() != n + 1 {
            return Err(Error::DimensionMismatch("rank-one update needs the (n+1) x n matrix".into()));
        }
        let sub = h[(n, n - 1)];
        for i in 0..n {
            c[(i, n - 1)] -= sub * u[i];
        }
    }
    eigenvalues(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_returns_entries() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 2.0), c(0.5, 0.0)]));
        let ev = hessenberg_eigs(&h, None).unwrap();
        assert_eq!(ev, vec![c(-1.0, 2.0), c(0.5, 0.0), c(3.0, 0.0)]);
    }

    #[test]
    fn companion_of_s2_minus_1() {
        // s^2 - 1: companion [[0, 1], [1, 0]] is already Hessenberg.
        let h = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let ev = hessenberg_eigs(&h, None).unwrap();
        assert!((ev[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((ev[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rank_one_update_shape_checked() {
        let h = DMatrix::<Complex64>::zeros(3, 2);
        let u = DVector::<Complex64>::zeros(3);
        assert!(hessenberg_eigs(&h, Some(&u)).is_err());
    }
}
