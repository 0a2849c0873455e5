//! Least squares by Householder QR with column pivoting.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

/// Options for [`lsq_colpivot`].
#[derive(Debug, Clone, Copy)]
pub struct LsqOptions {
    /// Relative pivot tolerance for the rank decision. `None` uses
    /// `eps * max(rows, cols)`.
    pub rtol: Option<f64>,
    /// Scale every column to unit 2-norm before factoring. Makes the rank
    /// decision independent of column scaling.
    pub equilibrate: bool,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self { rtol: None, equilibrate: true }
    }
}

#[derive(Debug, Clone)]
pub struct LsqSolution<T: ComplexField<RealField = f64>> {
    pub x: DVector<T>,
    pub residual_norm: f64,
    pub rank: usize,
    /// Ratio of the largest to the smallest retained pivot of R.
    pub cond_estimate: f64,
}

impl<T: ComplexField<RealField = f64>> LsqSolution<T> {
    pub fn rcond(&self) -> f64 {
        1.0 / self.cond_estimate
    }
}

/// A pivoted QR factorization `A P = Q R`, kept in compact Householder form.
pub struct ColPivQr<T: ComplexField<RealField = f64>> {
    qr: DMatrix<T>,
    /// Householder vectors are stored below the diagonal; `tau[k]` is the
    /// scaling `2 / (v^H v)` of reflector k with `v[k] = beta[k]`.
    heads: Vec<T>,
    taus: Vec<f64>,
    perm: Vec<usize>,
    col_scale: Vec<f64>,
    rank: usize,
}

impl<T: ComplexField<RealField = f64>> ColPivQr<T> {
    pub fn new(a: &DMatrix<T>, opts: LsqOptions) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if a.iter().any(|v| !v.clone().is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let mut qr = a.clone();
        let mut col_scale = vec![1.0; n];
        if opts.equilibrate {
            for j in 0..n {
                let nrm = qr.column(j).norm();
                if nrm > 0.0 {
                    col_scale[j] = 1.0 / nrm;
                    qr.column_mut(j).scale_mut(1.0 / nrm);
                }
            }
        }
        let kmax = m.min(n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut heads = Vec::with_capacity(kmax);
        let mut taus = Vec::with_capacity(kmax);
        let mut norms: Vec<f64> = (0..n).map(|j| qr.column(j).norm_squared()).collect();
        let rtol = opts.rtol.unwrap_or(f64::EPSILON * m.max(n) as f64);
        let mut r00 = 0.0;
        let mut rank = 0;

        for k in 0..kmax {
            // Recompute remaining column norms; downdating loses accuracy
            // exactly when pivots get small.
            for j in k..n {
                norms[j] = qr.view((k, j), (m - k, 1)).norm_squared();
            }
            let (piv, &best) = norms[k..n]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, v)| (i + k, v))
                .unwrap();
            if piv != k {
                qr.swap_columns(k, piv);
                perm.swap(k, piv);
                norms.swap(k, piv);
            }
            let xnorm = best.sqrt();
            if k == 0 {
                r00 = xnorm;
            }
            if xnorm <= rtol * r00 || xnorm == 0.0 {
                break;
            }
            // Householder reflector mapping column k (rows k..) onto e_k.
            let x0 = qr[(k, k)].clone();
            let x0abs = x0.clone().modulus();
            let phase = if x0abs > 0.0 {
                x0.clone().unscale(x0abs)
            } else {
                T::one()
            };
            let alpha = -phase.scale(xnorm);
            let v0 = x0 - alpha.clone();
            // v = [v0, x_{k+1..}]; v^H v = |v0|^2 + xnorm^2 - |x0|^2
            let vnorm2 = v0.clone().modulus_squared() + xnorm * xnorm - x0abs * x0abs;
            let tau = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
            for j in (k + 1)..n {
                let mut dot = v0.clone().conjugate() * qr[(k, j)].clone();
                for i in (k + 1)..m {
                    dot += qr[(i, k)].clone().conjugate() * qr[(i, j)].clone();
                }
                let f = dot.scale(tau);
                qr[(k, j)] -= v0.clone() * f.clone();
                for i in (k + 1)..m {
                    let vi = qr[(i, k)].clone();
                    qr[(i, j)] -= vi * f.clone();
                }
            }
            qr[(k, k)] = alpha;
            heads.push(v0);
            taus.push(tau);
            rank = k + 1;
        }

        Ok(Self { qr, heads, taus, perm, col_scale, rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// |R_00| / |R_{r-1,r-1}|.
    pub fn cond_estimate(&self) -> f64 {
        if self.rank == 0 {
            return f64::INFINITY;
        }
        let first = self.qr[(0, 0)].clone().modulus();
        let last = self.qr[(self.rank - 1, self.rank - 1)].clone().modulus();
        first / last
    }

    /// Applies Q^H to `b` in place.
    fn apply_qh(&self, b: &mut DVector<T>) {
        let m = self.qr.nrows();
        for k in 0..self.rank {
            let v0 = &self.heads[k];
            let mut dot = v0.clone().conjugate() * b[k].clone();
            for i in (k + 1)..m {
                dot += self.qr[(i, k)].clone().conjugate() * b[i].clone();
            }
            let f = dot.scale(self.taus[k]);
            b[k] -= v0.clone() * f.clone();
            for i in (k + 1)..m {
                b[i] -= self.qr[(i, k)].clone() * f.clone();
            }
        }
    }

    pub fn solve(&self, b: &DVector<T>) -> Result<(DVector<T>, f64)> {
        let (m, n) = self.qr.shape();
        if b.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} rows, matrix has {m}",
                b.len()
            )));
        }
        let mut qtb = b.clone();
        self.apply_qh(&mut qtb);
        let r = self.rank;
        let mut y = DVector::<T>::zeros(n);
        for i in (0..r).rev() {
            let mut s = qtb[i].clone();
            for j in (i + 1)..r {
                s -= self.qr[(i, j)].clone() * y[j].clone();
            }
            y[i] = s / self.qr[(i, i)].clone();
        }
        let residual = qtb.rows(r, m - r).norm();
        let mut x = DVector::<T>::zeros(n);
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k].clone().scale(self.col_scale[p]);
        }
        Ok((x, residual))
    }
}

/// Minimizes `||A x - b||_2` with a rank-revealing pivoted QR.
///
/// Columns whose pivots fall below `rtol` times the leading pivot get zero
/// coefficients. Deterministic for a fixed input.
pub fn lsq_colpivot<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    b: &DVector<T>,
    opts: LsqOptions,
) -> Result<LsqSolution<T>> {
    if a.nrows() < a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "least squares needs rows >= cols, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let qr = ColPivQr::new(a, opts)?;
    let (x, residual_norm) = qr.solve(b)?;
    Ok(LsqSolution { x, residual_norm, rank: qr.rank(), cond_estimate: qr.cond_estimate() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn identity_stack_returns_rhs() {
        let a = DMatrix::<f64>::identity(4, 4);
        let b = DVector::from_vec(vec![1.0, -2.0, 3.5, 0.25]);
        let sol = lsq_colpivot(&a, &b, LsqOptions::default()).unwrap();
        assert!((sol.x - b).norm() < 1e-15);
        assert_eq!(sol.rank, 4);
    }

    #[test]
    fn duplicated_column_reduces_rank() {
        let a = DMatrix::from_row_slice(4, 3, &[
            1.0, 2.0, 1.0, //
            0.0, 1.0, 0.0, //
            3.0, -1.0, 3.0, //
            1.0, 1.0, 1.0,
        ]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let sol = lsq_colpivot(&a, &b, LsqOptions::default()).unwrap();
        assert_eq!(sol.rank, 2);
        assert!(sol.x.iter().all(|v| v.is_finite()));
        // Residual must be orthogonal to the column space.
        let r = &a * &sol.x - &b;
        assert!((a.transpose() * r).norm() < 1e-12);
    }

    #[test]
    fn complex_overdetermined_exact() {
        let a = DMatrix::from_fn(6, 2, |i, j| Complex64::new(i as f64 + 1.0, (j as f64) * (i as f64)));
        let x0 = DVector::from_vec(vec![Complex64::new(1.0, -1.0), Complex64::new(0.5, 2.0)]);
        let b = &a * &x0;
        let sol = lsq_colpivot(&a, &b, LsqOptions::default()).unwrap();
        assert!((sol.x - x0).norm() < 1e-13);
        assert!(sol.residual_norm < 1e-12);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let a = DMatrix::<f64>::zeros(0, 0);
        let b = DVector::<f64>::zeros(0);
        assert_eq!(lsq_colpivot(&a, &b, LsqOptions::default()).unwrap_err(), Error::EmptyMatrix);
    }
}
