//! Double-layer Nystrom baseline on smooth closed curves.
//!
//! The density is discretized with the trapezoidal rule in a periodic
//! parameter; the diagonal of the double-layer kernel is replaced by its
//! smooth limit `kappa / 4 pi`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::basis::ProblemKind;
use crate::error::{Error, Result};
use crate::geometry::Boundary;
use crate::solver::{BoundaryData, BoundaryPoint};

type CurveFn = dyn Fn(f64) -> [Complex64; 3] + Send + Sync;

/// A closed counterclockwise curve `z(u)`, `u` in `[0, 1)`, smooth and
/// periodic. `eval` returns `z`, `dz/du` and `d2z/du2`.
#[derive(Clone)]
pub struct SmoothContour {
    f: Arc<CurveFn>,
    /// Value handed to the boundary data as `s` is `s0 + u * ds`.
    s0: f64,
    ds: f64,
}

impl std::fmt::Debug for SmoothContour {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothContour").field("s0", &self.s0).field("ds", &self.ds).finish()
    }
}

impl SmoothContour {
    pub fn new(f: impl Fn(f64) -> [Complex64; 3] + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), s0: 0.0, ds: 1.0 }
    }

    /// `center + R(a cos 2 pi u + i b sin 2 pi u)` with `R` a rotation.
    pub fn ellipse(center: Complex64, a: f64, b: f64, angle: f64) -> Self {
        let rot = Complex64::from_polar(1.0, angle);
        let w = 2.0 * PI;
        Self::new(move |u| {
            let (s, c) = (w * u).sin_cos();
            [
                center + rot * Complex64::new(a * c, b * s),
                rot * Complex64::new(-a * s, b * c) * w,
                rot * Complex64::new(-a * c, -b * s) * (w * w),
            ]
        })
    }

    /// The trigonometric-polynomial curve of the gallery, in its own
    /// parameter.
    pub fn trigpoly(gamma: f64, nu: u32) -> Self {
        let w = 2.0 * PI;
        let k = w * nu as f64;
        let g = 1.0 / gamma;
        Self::new(move |u| {
            let r = g + (g - 1.0) * (k * u).cos();
            let dr = -(g - 1.0) * k * (k * u).sin();
            let d2r = -(g - 1.0) * k * k * (k * u).cos();
            let e = Complex64::from_polar(1.0, w * u);
            let i = Complex64::i();
            [e * r, e * (dr + i * w * r), e * (d2r + 2.0 * i * w * dr - w * w * r)]
        })
    }

    /// Contour `j` of a boundary in the boundary's own parameter. Fails if
    /// the tangent or the speed jumps between sections, since the
    /// trapezoidal rule would then lose its spectral accuracy.
    pub fn from_boundary(b: &Boundary, j: usize) -> Result<Self> {
        if j >= b.contour_count() {
            return Err(Error::InvalidInput(format!("no contour {j}")));
        }
        let (s0, s1) = b.contour_interval(j);
        let range = b.contour_sections(j);
        let secs: Vec<_> = b.sections()[range.clone()].to_vec();
        for (k, sec) in secs.iter().enumerate() {
            let next = &secs[(k + 1) % secs.len()];
            let d0 = sec.deriv_local(1.0) * (2.0 / sec.width());
            let d1 = next.deriv_local(-1.0) * (2.0 / next.width());
            if (d0 - d1).norm() > 1e-8 * d0.norm().max(d1.norm()) {
                return Err(Error::NonSmooth(format!("contour {j}: derivative jumps after section {}", range.start + k)));
            }
        }
        let ds = s1 - s0;
        let f = move |u: f64| {
            let s = s0 + u.rem_euclid(1.0) * ds;
            let m = secs.iter().position(|c| s < c.interval.1).unwrap_or(secs.len() - 1);
            let sec = &secs[m];
            let t = sec.to_local(s);
            let k = 2.0 / sec.width() * ds;
            [sec.eval_local(t), sec.deriv_local(t) * k, sec.deriv2_local(t) * (k * k)]
        };
        Ok(Self { f: Arc::new(f), s0, ds })
    }

    pub fn eval(&self, u: f64) -> [Complex64; 3] {
        (self.f)(u)
    }

    fn s_of(&self, u: f64) -> f64 {
        self.s0 + u * self.ds
    }
}

/// Nodes of one contour: position, speed-weighted outward normal (pointing
/// out of the region the contour encloses) and the diagonal kernel value.
#[derive(Debug, Clone)]
struct Panel {
    z: Vec<Complex64>,
    dz: Vec<Complex64>,
    /// `|z'| / n`.
    w: Vec<f64>,
    /// `kappa / 4 pi`.
    diag: Vec<f64>,
}

impl Panel {
    fn new(c: &SmoothContour, n: usize) -> Self {
        let mut p = Panel { z: Vec::with_capacity(n), dz: Vec::with_capacity(n), w: Vec::with_capacity(n), diag: Vec::with_capacity(n) };
        for k in 0..n {
            let [z, d1, d2] = c.eval(k as f64 / n as f64);
            let sp = d1.norm();
            p.z.push(z);
            p.dz.push(d1);
            p.w.push(sp / n as f64);
            p.diag.push((d1.conj() * d2).im / (sp * sp * sp) / (4.0 * PI));
        }
        p
    }

    fn len(&self) -> usize {
        self.z.len()
    }

    /// Kernel `(1/2 pi) (y - x).n_y / |y - x|^2` times the weight of node `k`.
    fn kernel(&self, x: Complex64, k: usize) -> f64 {
        let d = self.z[k] - x;
        let n = -Complex64::i() * self.dz[k] / self.dz[k].norm();
        (d * n.conj()).re / d.norm_sqr() / (2.0 * PI) * self.w[k]
    }

    fn centroid(&self) -> Complex64 {
        // Area centroid of the node polygon.
        let n = self.len();
        let (mut a, mut c) = (0.0, Complex64::new(0.0, 0.0));
        for k in 0..n {
            let (p, q) = (self.z[k], self.z[(k + 1) % n]);
            let cr = p.re * q.im - q.re * p.im;
            a += cr;
            c += (p + q) * cr;
        }
        c / (3.0 * a)
    }
}

/// A solved Nystrom discretization.
#[derive(Debug, Clone)]
pub struct NystromSolution {
    pub kind: ProblemKind,
    pub contours: Vec<SmoothContour>,
    /// Nodes per contour (uniform in the contour parameter).
    pub n: usize,
    /// Density per contour at `u_k = k / n`.
    pub density: Vec<Vec<f64>>,
    /// Log-source strengths and centers (exterior only).
    pub log_coeffs: Vec<f64>,
    pub log_centers: Vec<Complex64>,
    /// Constant at infinity (exterior only).
    pub a0: f64,
}

fn check_n(n: usize) -> Result<()> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidInput(format!("Nystrom node count must be even and at least 4, got {n}")));
    }
    Ok(())
}

fn data_at(c: &SmoothContour, data: &BoundaryData, u: f64, j: usize, kind: ProblemKind) -> f64 {
    let [z, dz, _] = c.eval(u);
    data.eval(&BoundaryPoint::new(c.s_of(u), z, dz, j, kind))
}

/// Solves `mu/2 + K mu = f` on one smooth contour with `n` nodes.
pub fn nystrom_interior_dirichlet(c: &SmoothContour, data: &BoundaryData, n: usize) -> Result<NystromSolution> {
    check_n(n)?;
    let p = Panel::new(c, n);
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            a[(i, k)] = if i == k { 0.5 + p.diag[k] * p.w[k] } else { p.kernel(p.z[i], k) };
        }
    }
    let rhs = DVector::from_fn(n, |i, _| data_at(c, data, i as f64 / n as f64, 0, ProblemKind::InteriorDirichlet));
    let mu = a.lu().solve(&rhs).ok_or_else(|| Error::InvalidInput("singular Nystrom matrix".into()))?;
    Ok(NystromSolution {
        kind: ProblemKind::InteriorDirichlet,
        contours: vec![c.clone()],
        n,
        density: vec![mu.iter().copied().collect()],
        log_coeffs: Vec::new(),
        log_centers: Vec::new(),
        a0: 0.0,
    })
}

/// Exterior Dirichlet problem on several smooth contours: double layer plus
/// one log source per contour (summing to zero) and a constant at infinity.
/// The constant-per-contour null space of `-mu/2 + K mu` is removed by
/// requiring each contour's density to integrate to zero.
pub fn nystrom_exterior_dirichlet(contours: &[SmoothContour], data: &BoundaryData, n: usize) -> Result<NystromSolution> {
    check_n(n)?;
    if contours.is_empty() {
        return Err(Error::InvalidInput("no contours".into()));
    }
    let panels: Vec<Panel> = contours.iter().map(|c| Panel::new(c, n)).collect();
    let centers: Vec<Complex64> = panels.iter().map(Panel::centroid).collect();
    let jn = contours.len();
    let rows = jn * n + jn;
    // Unknowns: densities, A_0..A_{J-2} (A_{J-1} eliminated), a0.
    let cols = jn * n + jn;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (ji, pi) in panels.iter().enumerate() {
        for i in 0..n {
            let r = ji * n + i;
            let x = pi.z[i];
            for (jk, pk) in panels.iter().enumerate() {
                for k in 0..n {
                    a[(r, jk * n + k)] = if ji == jk && i == k { pk.diag[k] * pk.w[k] - 0.5 } else { pk.kernel(x, k) };
                }
            }
            let last = (x - centers[jn - 1]).norm().ln();
            for (j, &cj) in centers.iter().enumerate().take(jn - 1) {
                a[(r, jn * n + j)] = (x - cj).norm().ln() - last;
            }
            a[(r, jn * n + jn - 1)] = 1.0;
            rhs[r] = data_at(&contours[ji], data, i as f64 / n as f64, ji, ProblemKind::ExteriorDirichlet);
        }
        for k in 0..n {
            a[(jn * n + ji, ji * n + k)] = pi.w[k];
        }
    }
    let x = a.lu().solve(&rhs).ok_or_else(|| Error::InvalidInput("singular Nystrom matrix".into()))?;
    let mut log_coeffs: Vec<f64> = (0..jn - 1).map(|j| x[jn * n + j]).collect();
    log_coeffs.push(-log_coeffs.iter().sum::<f64>());
    Ok(NystromSolution {
        kind: ProblemKind::ExteriorDirichlet,
        contours: contours.to_vec(),
        n,
        density: (0..jn).map(|j| x.rows(j * n, n).iter().copied().collect()).collect(),
        log_coeffs,
        log_centers: centers,
        a0: x[jn * n + jn - 1],
    })
}

/// Trigonometric interpolation of periodic samples onto `m >= n` uniform
/// points.
pub fn upsample(v: &[f64], m: usize) -> Vec<f64> {
    let n = v.len();
    if m == n {
        return v.to_vec();
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut big = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    for k in 0..half {
        big[k] = spec[k];
    }
    for k in 1..half {
        big[m - k] = spec[n - k];
    }
    if n % 2 == 0 {
        // Split the Nyquist term to keep the interpolant real.
        big[half] = spec[half] * 0.5;
        big[m - half] = spec[half] * 0.5;
    } else {
        big[half] = spec[half];
        big[m - half] = spec[n - half];
    }
    planner.plan_fft_inverse(m).process(&mut big);
    big.iter().map(|c| c.re / n as f64).collect()
}

impl NystromSolution {
    fn refined(&self, refine: usize) -> (Vec<Panel>, Vec<Vec<f64>>) {
        let m = self.n * refine.max(1);
        let panels = self.contours.iter().map(|c| Panel::new(c, m)).collect();
        let dens = self.density.iter().map(|d| upsample(d, m)).collect();
        (panels, dens)
    }

    fn far_terms(&self, x: Complex64) -> f64 {
        self.a0 + self.log_coeffs.iter().zip(&self.log_centers).map(|(a, c)| a * (x - c).norm().ln()).sum::<f64>()
    }

    /// The potential at points off the boundary, with the density upsampled
    /// to `refine * n` points. Accuracy degrades within a few node spacings
    /// of the curve.
    pub fn eval(&self, points: &[Complex64], refine: usize) -> Vec<f64> {
        let (panels, dens) = self.refined(refine);
        points
            .par_iter()
            .map(|&x| {
                let mut u = self.far_terms(x);
                for (p, d) in panels.iter().zip(&dens) {
                    u += (0..p.len()).map(|k| p.kernel(x, k) * d[k]).sum::<f64>();
                }
                u
            })
            .collect()
    }

    /// Boundary values at `refine * n` points per contour:
    /// `(contour, u, z, value)`.
    pub fn boundary_values(&self, refine: usize) -> Vec<(usize, f64, Complex64, f64)> {
        let (panels, dens) = self.refined(refine);
        let jump = if self.kind.is_exterior() { -0.5 } else { 0.5 };
        let m = self.n * refine.max(1);
        let idx: Vec<(usize, usize)> = (0..panels.len()).flat_map(|j| (0..m).map(move |i| (j, i))).collect();
        idx.par_iter()
            .map(|&(j, i)| {
                let x = panels[j].z[i];
                let mut u = self.far_terms(x) + jump * dens[j][i];
                for (jk, (p, d)) in panels.iter().zip(&dens).enumerate() {
                    for k in 0..p.len() {
                        u += d[k] * if jk == j && k == i { p.diag[k] * p.w[k] } else { p.kernel(x, k) };
                    }
                }
                (j, i as f64 / m as f64, x, u)
            })
            .collect()
    }

    /// `(Delta E, Delta E_max)` against the data on `refine * n` points per
    /// contour: the weighted relative L2 error, and the maximum error over
    /// the RMS of the data.
    pub fn errors(&self, data: &BoundaryData, refine: usize) -> (f64, f64) {
        let vals = self.boundary_values(refine);
        let m = self.n * refine.max(1);
        let (mut num, mut den, mut len, mut max) = (0.0, 0.0, 0.0, 0.0f64);
        for &(j, u, _, v) in &vals {
            let c = &self.contours[j];
            let f = data_at(c, data, u, j, self.kind);
            let w = c.eval(u)[1].norm() / m as f64;
            num += w * (v - f) * (v - f);
            den += w * f * f;
            len += w;
            max = max.max((v - f).abs());
        }
        let rms = (den / len).sqrt();
        let de = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
        (de, if rms > 0.0 { max / rms } else { max })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn constant_data_is_reproduced() {
        let c = SmoothContour::ellipse(Complex64::new(0.3, -0.2), 1.0, 0.6, 0.4);
        let sol = nystrom_interior_dirichlet(&c, &BoundaryData::from_position("one", |_| 1.0), 64).unwrap();
        let u = sol.eval(&[Complex64::new(0.3, -0.2), Complex64::new(0.6, 0.0)], 4);
        for v in u {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn mean_value_at_disk_center() {
        let c = SmoothContour::ellipse(Complex64::new(0.0, 0.0), 1.0, 1.0, 0.0);
        let sol = nystrom_interior_dirichlet(&c, &BoundaryData::from_position("x", |z| z.re), 32).unwrap();
        assert!(sol.eval(&[Complex64::new(0.0, 0.0)], 8)[0].abs() < 1e-13);
    }

    #[test]
    fn upsampling_is_exact_for_band_limited_data() {
        let f = |u: f64| (2.0 * PI * u).cos() + 0.5 * (6.0 * PI * u).sin();
        let v: Vec<f64> = (0..16).map(|k| f(k as f64 / 16.0)).collect();
        let big = upsample(&v, 64);
        for (k, x) in big.iter().enumerate() {
            assert!((x - f(k as f64 / 64.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn curve_derivatives_match_differences() {
        for c in [SmoothContour::trigpoly(1.75, 2), SmoothContour::ellipse(Complex64::new(1.0, 2.0), 2.0, 1.0, 0.3)] {
            let h = 1e-5;
            let [_, d1, d2] = c.eval(0.3);
            let fd1 = (c.eval(0.3 + h)[0] - c.eval(0.3 - h)[0]) / (2.0 * h);
            let fd2 = (c.eval(0.3 + h)[1] - c.eval(0.3 - h)[1]) / (2.0 * h);
            assert!((d1 - fd1).norm() < 1e-6 * d1.norm());
            assert!((d2 - fd2).norm() < 1e-6 * d2.norm());
        }
    }

    #[test]
    fn corners_are_refused() {
        let b = gallery::lshape().unwrap();
        assert!(matches!(SmoothContour::from_boundary(&b, 0), Err(Error::NonSmooth(_))));
    }

    #[test]
    fn two_circle_capacitance() {
        let (r, d) = (1.0, 0.5);
        let h = r + 0.5 * d;
        let cs = [
            SmoothContour::ellipse(Complex64::new(0.0, -h), r, r, 0.0),
            SmoothContour::ellipse(Complex64::new(0.0, h), r, r, 0.0),
        ];
        let data = gallery::contour_constants(vec![-1.0, 1.0]);
        let sol = nystrom_exterior_dirichlet(&cs, &data, 128).unwrap();
        let exact = gallery::two_circle_log_coefficient(r, d);
        assert!((sol.log_coeffs[1].abs() - exact).abs() < 1e-6 * exact, "{:?} vs {exact}", sol.log_coeffs);
    }
}
