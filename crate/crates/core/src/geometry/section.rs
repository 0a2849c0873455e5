use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{cheb, cheb_roots};

/// One piece `r_m = p_m / q_m` of a piecewise-rational boundary.
///
/// Numerator and denominator are stored as Chebyshev series in the local
/// variable `t in [-1, 1]`; the global parameter is
/// `s = (h0 + h1) / 2 + t (h1 - h0) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSection {
    pub num: Vec<Complex64>,
    pub den: Vec<Complex64>,
    pub interval: (f64, f64),
}

impl RationalSection {
    /// Builds a section from Chebyshev coefficients, validating that the
    /// denominator does not vanish on [-1, 1].
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>, interval: (f64, f64)) -> Result<Self> {
        if num.is_empty() || den.is_empty() {
            return Err(Error::InvalidInput("empty coefficient list".into()));
        }
        if !(interval.1 > interval.0) {
            return Err(Error::InvalidInput(format!("interval {interval:?} has non-positive width")));
        }
        let sec = Self { num: cheb::trim(&num, 0.0), den: cheb::trim(&den, 0.0), interval };
        if sec.den.len() > 1 {
            let (roots, _) = cheb_roots(&sec.den, f64::EPSILON)?;
            if roots.iter().any(|r| r.im.abs() < 1e-12 && r.re.abs() <= 1.0 + 1e-12) {
                return Err(Error::DenominatorZero(0));
            }
        } else if sec.den[0].norm() == 0.0 {
            return Err(Error::DenominatorZero(0));
        }
        if sec.degree() < 1 {
            return Err(Error::InvalidInput("section is a single point".into()));
        }
        Ok(sec)
    }

    /// Polynomial section from monomial coefficients in `t` (ascending).
    pub fn from_monomial(num: &[Complex64], den: &[Complex64], interval: (f64, f64)) -> Result<Self> {
        Self::new(monomial_to_cheb(num), monomial_to_cheb(den), interval)
    }

    /// Straight segment from `a` (t = -1) to `b` (t = 1).
    pub fn line(a: Complex64, b: Complex64, interval: (f64, f64)) -> Self {
        Self { num: vec![(a + b) * 0.5, (b - a) * 0.5], den: vec![Complex64::new(1.0, 0.0)], interval }
    }

    /// `L_m`: the larger of the numerator and denominator degrees.
    pub fn degree(&self) -> usize {
        (self.num.len().max(self.den.len())).saturating_sub(1)
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.len() == 1
    }

    pub fn width(&self) -> f64 {
        self.interval.1 - self.interval.0
    }

    pub fn to_local(&self, s: f64) -> f64 {
        (2.0 * s - self.interval.0 - self.interval.1) / self.width()
    }

    pub fn to_global(&self, t: f64) -> f64 {
        0.5 * (self.interval.0 + self.interval.1) + 0.5 * t * self.width()
    }

    /// Maps a complex local root to the global parameter plane.
    pub fn to_global_complex(&self, t: Complex64) -> Complex64 {
        0.5 * (self.interval.0 + self.interval.1) + 0.5 * t * self.width()
    }

    pub fn eval_local(&self, t: f64) -> Complex64 {
        let p = cheb::clenshaw_real(&self.num, t);
        if self.is_polynomial() {
            p / self.den[0]
        } else {
            p / cheb::clenshaw_real(&self.den, t)
        }
    }

    /// Evaluation at a complex local argument.
    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        cheb::clenshaw(&self.num, t) / cheb::clenshaw(&self.den, t)
    }

    /// dz/dt.
    pub fn deriv_local(&self, t: f64) -> Complex64 {
        let dp = cheb::derivative(&self.num);
        let p = cheb::clenshaw_real(&self.num, t);
        if self.is_polynomial() {
            return cheb::clenshaw_real(&dp, t) / self.den[0];
        }
        let dq = cheb::derivative(&self.den);
        let q = cheb::clenshaw_real(&self.den, t);
        (cheb::clenshaw_real(&dp, t) * q - p * cheb::clenshaw_real(&dq, t)) / (q * q)
    }

    /// d^2z/dt^2.
    pub fn deriv2_local(&self, t: f64) -> Complex64 {
        let dp = cheb::derivative(&self.num);
        let ddp = cheb::derivative(&dp);
        if self.is_polynomial() {
            return cheb::clenshaw_real(&ddp, t) / self.den[0];
        }
        let dq = cheb::derivative(&self.den);
        let ddq = cheb::derivative(&dq);
        let (p, p1, p2) = (
            cheb::clenshaw_real(&self.num, t),
            cheb::clenshaw_real(&dp, t),
            cheb::clenshaw_real(&ddp, t),
        );
        let (q, q1, q2) = (
            cheb::clenshaw_real(&self.den, t),
            cheb::clenshaw_real(&dq, t),
            cheb::clenshaw_real(&ddq, t),
        );
        // z = p/q; z'' = (p'' - 2 z' q' - z q'') / q
        let z = p / q;
        let z1 = (p1 - z * q1) / q;
        (p2 - 2.0 * z1 * q1 - z * q2) / q
    }

    /// Chebyshev coefficients of `zp * q(t) - p(t)`.
    fn shifted(&self, zp: Complex64) -> Vec<Complex64> {
        let n = self.num.len().max(self.den.len());
        (0..n)
            .map(|k| {
                let q = self.den.get(k).copied().unwrap_or_default();
                let p = self.num.get(k).copied().unwrap_or_default();
                zp * q - p
            })
            .collect()
    }

    /// All local-parameter zeros of `zp * q(t) - p(t)`, and the number of
    /// roots lost to infinity when leading coefficients cancel.
    pub fn shifted_roots(&self, zp: Complex64) -> Result<(Vec<Complex64>, usize)> {
        let g = self.shifted(zp);
        if g.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::InvalidInput("pole coincides with a degenerate section".into()));
        }
        cheb_roots(&g, 4.0 * f64::EPSILON)
    }

    /// Roots of the denominator in the local variable.
    pub fn den_roots(&self) -> Result<Vec<Complex64>> {
        if self.is_polynomial() {
            return Ok(Vec::new());
        }
        Ok(cheb_roots(&self.den, 0.0)?.0)
    }

    /// Reverses the direction of traversal (t -> -t).
    pub fn reversed(&self) -> Self {
        let flip = |c: &[Complex64]| {
            c.iter().enumerate().map(|(k, v)| if k % 2 == 1 { -*v } else { *v }).collect::<Vec<_>>()
        };
        Self { num: flip(&self.num), den: flip(&self.den), interval: self.interval }
    }
}

/// Converts ascending monomial coefficients on [-1, 1] to Chebyshev ones.
pub fn monomial_to_cheb(c: &[Complex64]) -> Vec<Complex64> {
    if c.len() <= 1 {
        return c.to_vec();
    }
    let n = c.len() - 1;
    let vals: Vec<Complex64> = cheb::cheb_points(n)
        .into_iter()
        .map(|x| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, ck| acc * x + ck))
        .collect();
    cheb::coeffs_from_values(&vals)
}
