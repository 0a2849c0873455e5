//! Dipole, constant and logarithmic basis functions and the weighted
//! least-squares systems built from them.

use std::fmt::Write as _;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_in_domain, Boundary, DomainSide};
use crate::numerics::{lsq_colpivot, LsqOptions};
use crate::quadrature::QuadratureRule;

/// Which boundary-value problem is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    InteriorDirichlet,
    ExteriorDirichlet,
    ExteriorNeumann,
}

impl ProblemKind {
    pub fn is_exterior(self) -> bool {
        !matches!(self, ProblemKind::InteriorDirichlet)
    }
}

/// Position of `z` relative to the solution domain of a problem.
pub fn side_in_domain(b: &Boundary, z: Complex64, kind: ProblemKind) -> Result<DomainSide> {
    let s = point_in_domain(b, z)?;
    Ok(match (kind.is_exterior(), s) {
        (_, DomainSide::OnBoundary) => DomainSide::OnBoundary,
        (false, s) => s,
        (true, DomainSide::Inside) => DomainSide::Outside,
        (true, DomainSide::Outside) => DomainSide::Inside,
    })
}

/// Candidate poles with their side relative to the solution domain.
/// Only `Outside` poles carry basis functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub poles: Vec<Complex64>,
    pub side: Vec<DomainSide>,
}

impl PoleSet {
    pub fn classify(b: &Boundary, poles: Vec<Complex64>, kind: ProblemKind) -> Result<Self> {
        let side = poles.par_iter().map(|&z| side_in_domain(b, z, kind)).collect::<Result<_>>()?;
        Ok(Self { poles, side })
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn n_out(&self) -> usize {
        self.side.iter().filter(|s| **s == DomainSide::Outside).count()
    }

    /// Poles in the domain or on its boundary.
    pub fn n_in(&self) -> usize {
        self.len() - self.n_out()
    }

    pub fn outside(&self) -> Vec<Complex64> {
        self.select(|s| s == DomainSide::Outside)
    }

    pub fn inside(&self) -> Vec<Complex64> {
        self.select(|s| s == DomainSide::Inside)
    }

    fn select(&self, keep: impl Fn(DomainSide) -> bool) -> Vec<Complex64> {
        self.poles.iter().zip(&self.side).filter(|(_, s)| keep(**s)).map(|(p, _)| *p).collect()
    }
}

/// `1/(zp - z)` split into real and imaginary parts.
pub fn dipole_parts(z: Complex64, zp: Complex64) -> Result<(f64, f64)> {
    let d = zp - z;
    if d.norm() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let v = 1.0 / d;
    Ok((v.re, v.im))
}

/// A solved complex potential
/// `W = a0 + sum a_n / (z'_n - z) + sum A_j log(z - c_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    pub kind: ProblemKind,
    pub a0: f64,
    pub poles: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub log_coeffs: Vec<f64>,
    pub log_centers: Vec<Complex64>,
    /// Per-contour constants of the stream function (Neumann only).
    pub v_consts: Vec<f64>,
}

impl PotentialModel {
    pub fn empty(kind: ProblemKind) -> Self {
        Self {
            kind,
            a0: 0.0,
            poles: Vec::new(),
            residues: Vec::new(),
            log_coeffs: Vec::new(),
            log_centers: Vec::new(),
            v_consts: Vec::new(),
        }
    }

    /// W(z). The logarithms use the principal branch, so Im W jumps across
    /// a horizontal cut to the left of each center with a nonzero
    /// coefficient.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut w = Complex64::new(self.a0, 0.0);
        for (&p, &a) in self.poles.iter().zip(&self.residues) {
            let d = p - z;
            if d.norm() == 0.0 {
                return Err(Error::CoincidentPoints);
            }
            w += a / d;
        }
        w += self.log_part(z)?;
        Ok(w)
    }

    /// The single-valued part (constant plus partial fractions).
    pub fn eval_rational(&self, z: Complex64) -> Complex64 {
        let mut w = Complex64::new(self.a0, 0.0);
        for (&p, &a) in self.poles.iter().zip(&self.residues) {
            w += a / (p - z);
        }
        w
    }

    pub fn log_part(&self, z: Complex64) -> Result<Complex64> {
        let mut w = Complex64::new(0.0, 0.0);
        for (&c, &a) in self.log_centers.iter().zip(&self.log_coeffs) {
            if a == 0.0 {
                continue;
            }
            let d = z - c;
            if d.norm() == 0.0 {
                return Err(Error::CoincidentPoints);
            }
            w += a * d.ln();
        }
        Ok(w)
    }

    /// dW/dz.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let mut w = Complex64::new(0.0, 0.0);
        for (&p, &a) in self.poles.iter().zip(&self.residues) {
            let d = p - z;
            w += a / (d * d);
        }
        for (&c, &a) in self.log_centers.iter().zip(&self.log_coeffs) {
            w += a / (z - c);
        }
        w
    }

    /// CSV dump of poles, residues and log terms.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,index,re,im,coef_re,coef_im\n");
        let _ = writeln!(s, "constant,0,0,0,{:.17e},0", self.a0);
        for (n, (p, a)) in self.poles.iter().zip(&self.residues).enumerate() {
            let _ = writeln!(s, "pole,{n},{:.17e},{:.17e},{:.17e},{:.17e}", p.re, p.im, a.re, a.im);
        }
        for (j, (c, a)) in self.log_centers.iter().zip(&self.log_coeffs).enumerate() {
            let _ = writeln!(s, "log,{j},{:.17e},{:.17e},{:.17e},0", c.re, c.im, a);
        }
        for (j, v) in self.v_consts.iter().enumerate() {
            let _ = writeln!(s, "v,{j},0,0,{:.17e},0", v);
        }
        s
    }
}

/// Where each unknown lives in the real column layout.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColumnMap {
    pub constant: Option<usize>,
    /// Coefficients multiplying the real parts of the dipoles.
    pub dipole_re: Range<usize>,
    /// Coefficients multiplying the imaginary parts of the dipoles.
    pub dipole_im: Range<usize>,
    /// Log differences `log|(z - c_j)/(z - c_J)|`, j < J.
    pub logs: Range<usize>,
    /// Per-contour constants.
    pub v: Range<usize>,
    pub cols: usize,
}

/// A weighted, overdetermined real system `A x ~ b`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub map: ColumnMap,
}

/// Solution of a [`LinearSystem`].
#[derive(Debug, Clone)]
pub struct SystemSolution {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub rank: usize,
    pub cond_estimate: f64,
}

impl LinearSystem {
    pub fn solve(&self, opts: LsqOptions) -> Result<SystemSolution> {
        let s = lsq_colpivot(&self.a, &self.b, opts)?;
        Ok(SystemSolution { x: s.x, residual_norm: s.residual_norm, rank: s.rank, cond_estimate: s.cond_estimate })
    }

    /// Matrix-market text of the matrix followed by the right-hand side.
    pub fn to_matrix_market(&self) -> String {
        let mut s = matrix_market(&self.a);
        s.push_str(&matrix_market(&DMatrix::from_column_slice(self.b.len(), 1, self.b.as_slice())));
        s
    }
}

/// Dense matrix-market (array, real, general) text.
pub fn matrix_market(a: &DMatrix<f64>) -> String {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} {}", a.nrows(), a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let _ = writeln!(s, "{:.17e}", a[(i, j)]);
        }
    }
    s
}

/// Assembles the Dirichlet system: columns `[1, phiR_n, -phiI_n]` plus, when
/// `log_centers` has `J >= 2` entries, `log|(z - c_j)/(z - c_J)|` for j < J.
/// `f` holds the boundary data at the rule nodes.
pub fn assemble_dirichlet(rule: &QuadratureRule, poles: &[Complex64], f: &[f64], log_centers: &[Complex64]) -> Result<LinearSystem> {
    let k = rule.len();
    if f.len() != k {
        return Err(Error::DimensionMismatch(format!("{} data values for {} nodes", f.len(), k)));
    }
    let n = poles.len();
    let nl = log_centers.len().saturating_sub(1);
    let cols = 1 + 2 * n + nl;
    let map = ColumnMap {
        constant: Some(0),
        dipole_re: 1..1 + n,
        dipole_im: 1 + n..1 + 2 * n,
        logs: 1 + 2 * n..cols,
        v: cols..cols,
        cols,
    };
    let sw = rule.sqrt_weights();
    let mut a = DMatrix::<f64>::zeros(k, cols);
    let mut b = DVector::<f64>::zeros(k);
    for r in 0..k {
        let z = rule.points[r];
        let w = sw[r];
        a[(r, 0)] = w;
        for (i, &p) in poles.iter().enumerate() {
            let (pr, pi) = dipole_parts(z, p)?;
            a[(r, 1 + i)] = w * pr;
            a[(r, 1 + n + i)] = -w * pi;
        }
        if nl > 0 {
            let last = (z - log_centers[nl]).norm().ln();
            for (j, &c) in log_centers[..nl].iter().enumerate() {
                a[(r, 1 + 2 * n + j)] = w * ((z - c).norm().ln() - last);
            }
        }
        b[r] = w * f[r];
    }
    Ok(LinearSystem { a, b, map })
}

/// Assembles the Neumann system for the stream function: columns
/// `[phiI_n, phiR_n]` (coefficients `aR_n`, `aI_n`) and `-1` on the rows of
/// each contour for the constants `v_j`. No constant column.
pub fn assemble_neumann(rule: &QuadratureRule, poles: &[Complex64], big_f: &[f64], contour_of_node: &[usize], n_contours: usize) -> Result<LinearSystem> {
    let k = rule.len();
    if big_f.len() != k || contour_of_node.len() != k {
        return Err(Error::DimensionMismatch(format!("{} data values for {} nodes", big_f.len(), k)));
    }
    let n = poles.len();
    if n == 0 && n_contours == 0 {
        return Err(Error::EmptyBasis);
    }
    let cols = 2 * n + n_contours;
    let map = ColumnMap { constant: None, dipole_re: 0..n, dipole_im: n..2 * n, logs: 2 * n..2 * n, v: 2 * n..cols, cols };
    let sw = rule.sqrt_weights();
    let mut a = DMatrix::<f64>::zeros(k, cols);
    let mut b = DVector::<f64>::zeros(k);
    for r in 0..k {
        let z = rule.points[r];
        let w = sw[r];
        for (i, &p) in poles.iter().enumerate() {
            let (pr, pi) = dipole_parts(z, p)?;
            a[(r, i)] = w * pi;
            a[(r, n + i)] = w * pr;
        }
        a[(r, 2 * n + contour_of_node[r])] = -w;
        b[r] = w * big_f[r];
    }
    Ok(LinearSystem { a, b, map })
}

/// Builds the model from a Dirichlet solution vector. With `J >= 2` log
/// centers the last coefficient is `-sum` of the others.
pub fn dirichlet_model(kind: ProblemKind, poles: &[Complex64], log_centers: &[Complex64], x: &DVector<f64>, map: &ColumnMap) -> PotentialModel {
    let residues = map.dipole_re.clone().zip(map.dipole_im.clone()).map(|(r, i)| Complex64::new(x[r], x[i])).collect();
    let mut log_coeffs: Vec<f64> = map.logs.clone().map(|j| x[j]).collect();
    if !log_centers.is_empty() {
        let s: f64 = log_coeffs.iter().sum();
        log_coeffs.push(-s);
    }
    PotentialModel {
        kind,
        a0: map.constant.map(|c| x[c]).unwrap_or(0.0),
        poles: poles.to_vec(),
        residues,
        log_coeffs,
        log_centers: log_centers.to_vec(),
        v_consts: Vec::new(),
    }
}

/// Builds the model from a Neumann solution vector and the known log terms.
pub fn neumann_model(poles: &[Complex64], x: &DVector<f64>, map: &ColumnMap, log_coeffs: &[f64], log_centers: &[Complex64]) -> PotentialModel {
    let residues = map.dipole_re.clone().zip(map.dipole_im.clone()).map(|(r, i)| Complex64::new(x[r], x[i])).collect();
    PotentialModel {
        kind: ProblemKind::ExteriorNeumann,
        a0: 0.0,
        poles: poles.to_vec(),
        residues,
        log_coeffs: log_coeffs.to_vec(),
        log_centers: log_centers.to_vec(),
        v_consts: map.v.clone().map(|j| x[j]).collect(),
    }
}
