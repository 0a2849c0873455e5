//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use laplace_rf::gallery::{ellipse, ellipse_six_poles, pole_data};
use laplace_rf::basis::ProblemKind;
use laplace_rf::solver::{ProblemSpec, SolverOptions};
use laplace_rf::Complex64;

/// `n` conjugate pairs at elliptical radius `rho` around `[-1, 1]`.
pub fn conjugate_poles(n: usize, rho: f64) -> Vec<Complex64> {
    (0..n)
        .flat_map(|k| {
            let w = Complex64::from_polar(rho, PI * (k as f64 + 0.5) / n as f64);
            let z = 0.5 * (w + 1.0 / w);
            [z, z.conj()]
        })
        .collect()
}

/// The six-pole ellipse problem with `n` poles.
pub fn ellipse_problem(n: usize) -> ProblemSpec {
    let (p, a) = ellipse_six_poles();
    ProblemSpec {
        kind: ProblemKind::InteriorDirichlet,
        boundary: ellipse(1.0, 0.5).expect("ellipse"),
        data: pole_data(p, a),
        options: SolverOptions { n_poles: n, dense_samples: 0, ..Default::default() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poles_come_in_conjugate_pairs() {
        let p = conjugate_poles(3, 1.2);
        assert_eq!(p.len(), 6);
        assert!(p.chunks(2).all(|c| c[0] == c[1].conj()));
    }
}
