//! Polynomial degree needed to replace a third-order pole by a polynomial.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const SHIPPED: &str = include_str!("../../data/prune_table.csv");

/// Default tolerance grid of the shipped table.
pub fn default_epsilons() -> Vec<f64> {
    (2..=16).map(|k| 10f64.powi(-k)).collect()
}

/// Default elliptical-radius grid: log-spaced on [1.001, 1000].
pub fn default_rhos() -> Vec<f64> {
    let n = 241;
    let (lo, hi) = (1.001f64.ln(), 1000f64.ln());
    (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Tabulated `d(rho, eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneTable {
    /// Increasing.
    rhos: Vec<f64>,
    /// Decreasing.
    epsilons: Vec<f64>,
    /// `degrees[e][r]`.
    degrees: Vec<Vec<f64>>,
}

/// Smallest degree whose Chebyshev interpolant of `(s - s0)^{-3}`,
/// `s0 = (rho + 1/rho) / 2`, has max error below `eps * max|.|` on [-1, 1],
/// for each `eps`. Uses the closed-form Chebyshev coefficients and the
/// aliasing bound `|f - p_d| <= 2 sum_{k>d} |c_k|`.
fn degrees_for_rho(rho: f64, epsilons: &[f64]) -> Vec<f64> {
    let a = 1.0 / rho;
    let s0 = 0.5 * (rho + a);
    let q = 0.5 * (rho - a);
    let fmax = (s0 - 1.0).powi(-3);
    let q5 = q.powi(5);
    let smallest = epsilons.iter().cloned().fold(f64::INFINITY, f64::min) * fmax;
    let mut coef = Vec::new();
    let mut ak = 1.0;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let c = ak * ((kf * kf - 1.0) * q * q + 3.0 * kf * s0 * q + 3.0 * s0 * s0) / q5;
        coef.push(c.abs());
        // Terms decay geometrically once k^2 a^k starts falling.
        if k > 8 && c.abs() < 1e-6 * smallest * (1.0 - a) && kf * (1.0 - a) > 2.0 {
            break;
        }
        ak *= a;
        k += 1;
    }
    let mut tail = vec![0.0; coef.len() + 1];
    for i in (0..coef.len()).rev() {
        tail[i] = tail[i + 1] + coef[i];
    }
    epsilons
        .iter()
        .map(|&eps| {
            let target = eps * fmax;
            // tail[d + 1] = sum_{k > d}
            (0..coef.len()).find(|&d| 2.0 * tail[d + 1] <= target).unwrap_or(coef.len()) as f64
        })
        .collect()
}

impl PruneTable {
    /// Computes the table on the given tolerance grid and the default
    /// radius grid, then enforces monotonicity.
    pub fn build(epsilons: &[f64]) -> Result<Self> {
        Self::build_on(default_rhos(), epsilons)
    }

    pub fn build_on(rhos: Vec<f64>, epsilons: &[f64]) -> Result<Self> {
        if epsilons.iter().any(|&e| !(e > 1e-16 * 0.999 && e < 1e-2 * 1.001)) {
            return Err(Error::InvalidInput("prune tolerances must lie in [1e-16, 1e-2]".into()));
        }
        if rhos.iter().any(|&r| !(r > 1.0)) || rhos.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("radii must exceed 1 and increase".into()));
        }
        let mut eps = epsilons.to_vec();
        eps.sort_by(|a, b| b.total_cmp(a));
        let per_rho: Vec<Vec<f64>> = rhos.iter().map(|&r| degrees_for_rho(r, &eps)).collect();
        let mut degrees: Vec<Vec<f64>> = (0..eps.len()).map(|e| per_rho.iter().map(|v| v[e]).collect()).collect();
        Self::isotonic(&mut degrees);
        Ok(Self { rhos, epsilons: eps, degrees })
    }

    fn isotonic(d: &mut [Vec<f64>]) {
        for row in d.iter_mut() {
            for r in (0..row.len().saturating_sub(1)).rev() {
                row[r] = row[r].max(row[r + 1]);
            }
        }
        for e in 1..d.len() {
            for r in 0..d[e].len() {
                d[e][r] = d[e][r].max(d[e - 1][r]);
            }
        }
    }

    /// The table shipped with the crate.
    pub fn shipped() -> &'static PruneTable {
        use std::sync::OnceLock;
        static T: OnceLock<PruneTable> = OnceLock::new();
        T.get_or_init(|| PruneTable::from_csv(SHIPPED).expect("shipped prune table parses"))
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    /// Raw grid value.
    pub fn at(&self, eps_index: usize, rho_index: usize) -> f64 {
        self.degrees[eps_index][rho_index]
    }

    /// Bilinear interpolation in `(ln rho, ln eps)`, clamped to the grid.
    /// Radii below the grid return infinity: such poles are always kept.
    pub fn degree(&self, rho: f64, eps: f64) -> f64 {
        if !(rho >= self.rhos[0]) {
            return f64::INFINITY;
        }
        let (ri, rt) = locate(&self.rhos, rho.min(self.rhos[self.rhos.len() - 1]), false);
        let (ei, et) = if self.epsilons.len() == 1 {
            (0, 0.0)
        } else {
            let e = eps.clamp(self.epsilons[self.epsilons.len() - 1], self.epsilons[0]);
            locate(&self.epsilons, e, true)
        };
        let e1 = (ei + 1).min(self.epsilons.len() - 1);
        let r1 = (ri + 1).min(self.rhos.len() - 1);
        let d00 = self.degrees[ei][ri];
        let d01 = self.degrees[ei][r1];
        let d10 = self.degrees[e1][ri];
        let d11 = self.degrees[e1][r1];
        (1.0 - et) * ((1.0 - rt) * d00 + rt * d01) + et * ((1.0 - rt) * d10 + rt * d11)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho,epsilon,degree\n");
        for (e, &eps) in self.epsilons.iter().enumerate() {
            for (r, &rho) in self.rhos.iter().enumerate() {
                let _ = writeln!(s, "{rho:.17e},{eps:.17e},{}", self.degrees[e][r]);
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("prune table line {}: {e}", i + 1)))?;
            if f.len() != 3 {
                return Err(Error::Parse(format!("prune table line {}: expected 3 fields", i + 1)));
            }
            rows.push((f[0], f[1], f[2]));
        }
        let mut rhos: Vec<f64> = rows.iter().map(|r| r.0).collect();
        rhos.sort_by(f64::total_cmp);
        rhos.dedup();
        let mut eps: Vec<f64> = rows.iter().map(|r| r.1).collect();
        eps.sort_by(|a, b| b.total_cmp(a));
        eps.dedup();
        if rhos.len() * eps.len() != rows.len() {
            return Err(Error::Parse("prune table is not a full grid".into()));
        }
        let mut degrees = vec![vec![0.0; rhos.len()]; eps.len()];
        for (rho, e, d) in rows {
            let ri = rhos.iter().position(|&x| x == rho).unwrap();
            let ei = eps.iter().position(|&x| x == e).unwrap();
            degrees[ei][ri] = d;
        }
        Ok(Self { rhos, epsilons: eps, degrees })
    }
}

/// Cell index and fractional position of `x` on a grid in log coordinates.
fn locate(grid: &[f64], x: f64, decreasing: bool) -> (usize, f64) {
    let n = grid.len();
    let lx = x.ln();
    let pos = if decreasing { grid.partition_point(|&g| g > x) } else { grid.partition_point(|&g| g < x) };
    if pos == 0 {
        return (0, 0.0);
    }
    if pos >= n {
        return (n - 2, 1.0);
    }
    let (g0, g1) = (grid[pos - 1].ln(), grid[pos].ln());
    (pos - 1, ((lx - g0) / (g1 - g0)).clamp(0.0, 1.0))
}

/// Pruning tolerance from the previous iteration's error: min(1e-4, ΔE/100).
pub fn epsilon_from_error(prev_delta_e: Option<f64>) -> f64 {
    match prev_delta_e {
        Some(d) if d.is_finite() => (0.01 * d).clamp(1e-16, 1e-4),
        _ => 1e-4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cheb;
    use num_complex::Complex64;

    #[test]
    fn shipped_matches_recomputed() {
        let fresh = PruneTable::build(&default_epsilons()).unwrap();
        assert_eq!(PruneTable::shipped(), &fresh);
    }

    #[test]
    fn rho_ten_needs_under_twenty() {
        let t = PruneTable::shipped();
        assert!(t.degree(10.0, 1e-14) < 20.0);
    }

    #[test]
    fn monotone() {
        let t = PruneTable::shipped();
        for &rho in &[1.01, 1.1, 2.0, 10.0, 500.0] {
            assert!(t.degree(rho, 1e-4) <= t.degree(rho, 1e-14));
        }
        assert!(t.degree(1.0005, 1e-4).is_infinite());
        assert!(t.degree(1.01, 1e-8) > t.degree(1.5, 1e-8));
    }

    #[test]
    fn degree_achieves_tolerance() {
        // Interpolate at the tabulated degree and measure the max error.
        for &rho in &[1.2, 3.0, 20.0] {
            for &eps in &[1e-4, 1e-10] {
                let d = PruneTable::build_on(vec![rho], &[eps]).unwrap().at(0, 0) as usize;
                let s0 = 0.5 * (rho + 1.0 / rho);
                let f = |x: f64| (x - s0).powi(-3);
                let vals: Vec<Complex64> = cheb::cheb_points(d).iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
                let c = cheb::coeffs_from_values(&vals);
                let fmax = (s0 - 1.0).powi(-3);
                let err = (0..2001)
                    .map(|i| {
                        let x = -1.0 + i as f64 / 1000.0;
                        (cheb::clenshaw_real(&c, x).re - f(x)).abs()
                    })
                    .fold(0.0, f64::max);
                assert!(err <= eps * fmax, "rho {rho} eps {eps}: d {d} err {}", err / fmax);
            }
        }
    }

    #[test]
    fn epsilon_rule() {
        assert_eq!(epsilon_from_error(Some(1e-1)), 1e-4);
        assert!((epsilon_from_error(Some(1e-8)) - 1e-10).abs() < 1e-25);
        assert_eq!(epsilon_from_error(None), 1e-4);
    }

    #[test]
    #[ignore]
    fn regenerate_shipped_table() {
        let t = PruneTable::build(&default_epsilons()).unwrap();
        std::fs::write(concat!(env!("CARGO_MANIFEST_DIR"), "/data/prune_table.csv"), t.to_csv()).unwrap();
    }
}
