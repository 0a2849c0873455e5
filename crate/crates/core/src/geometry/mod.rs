//! Closed boundaries made of piecewise-rational sections.

mod ingest;
mod io;
mod section;
mod winding;

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::integrate::{integrate, integrate_real};

pub use ingest::{ingest_polygon, ingest_samples, Smoothness};
pub use io::{boundary_from_json, boundary_to_json, load_boundary, GeometryFile};
pub use section::{monomial_to_cheb, RationalSection};
pub use winding::{point_in_domain, winding_number, DomainSide, ON_BOUNDARY_TOL};

/// Relative closure tolerance used when none is given.
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-10;

/// One or more closed, counterclockwise contours sharing the global
/// parameter `s in [0, 1]`.
#[derive(Debug, Clone)]
pub struct Boundary {
    sections: Vec<RationalSection>,
    contour_map: Vec<usize>,
    contours: Vec<Range<usize>>,
    /// +1 for every contour once normalized; kept for callers that inspect
    /// the input orientation.
    input_orientation: Vec<f64>,
    closure_tol: f64,
    lengths: Vec<f64>,
}

impl Boundary {
    /// Builds a boundary from contours given as ordered section lists.
    /// Intervals stored in the sections are discarded and replaced by
    /// arclength-proportional breakpoints over all contours.
    pub fn new(contours: Vec<Vec<RationalSection>>) -> Result<Self> {
        Self::build(contours, DEFAULT_CLOSURE_TOL, false)
    }

    pub fn with_closure_tol(contours: Vec<Vec<RationalSection>>, closure_tol: f64) -> Result<Self> {
        Self::build(contours, closure_tol, false)
    }

    /// Keeps the intervals already stored in the sections. They must tile
    /// [0, 1] in order.
    pub fn with_intervals(contours: Vec<Vec<RationalSection>>, closure_tol: f64) -> Result<Self> {
        Self::build(contours, closure_tol, true)
    }

    fn build(contours: Vec<Vec<RationalSection>>, closure_tol: f64, keep_intervals: bool) -> Result<Self> {
        if contours.is_empty() || contours.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidInput("boundary needs at least one non-empty contour".into()));
        }
        let mut sections = Vec::new();
        let mut contour_map = Vec::new();
        let mut ranges = Vec::new();
        let mut input_orientation = Vec::new();
        for (j, mut c) in contours.into_iter().enumerate() {
            let area: f64 = c.iter().map(signed_area_part).sum();
            if area < 0.0 {
                // Reverse traversal; intervals are reassigned below anyway
                // unless kept, in which case the caller's tiling is reused.
                let ivs: Vec<_> = c.iter().map(|s| s.interval).collect();
                c = c.iter().rev().map(|s| s.reversed()).collect();
                for (s, iv) in c.iter_mut().zip(ivs) {
                    s.interval = iv;
                }
                input_orientation.push(-1.0);
            } else {
                input_orientation.push(1.0);
            }
            let start = sections.len();
            for s in c {
                sections.push(s);
                contour_map.push(j);
            }
            ranges.push(start..sections.len());
        }
        let lengths: Vec<f64> = sections.iter().map(section_length).collect();
        for (m, &l) in lengths.iter().enumerate() {
            if !(l > 0.0) {
                return Err(Error::ZeroLengthSection(m));
            }
        }
        if keep_intervals {
            let mut prev = 0.0;
            for s in &sections {
                if (s.interval.0 - prev).abs() > 1e-14 {
                    return Err(Error::InvalidInput("section intervals do not tile [0, 1]".into()));
                }
                prev = s.interval.1;
            }
            if (prev - 1.0).abs() > 1e-14 {
                return Err(Error::InvalidInput("section intervals do not end at 1".into()));
            }
        } else {
            let h = breakpoints_from_lengths(&lengths)?;
            for (m, s) in sections.iter_mut().enumerate() {
                s.interval = (h[m], h[m + 1]);
            }
        }
        let b = Self { sections, contour_map, contours: ranges, input_orientation, closure_tol, lengths };
        b.check_closure()?;
        Ok(b)
    }

    fn check_closure(&self) -> Result<()> {
        for (j, r) in self.contours.iter().enumerate() {
            let len: f64 = self.lengths[r.clone()].iter().sum();
            let n = r.len();
            for i in 0..n {
                let a = &self.sections[r.start + i];
                let b = &self.sections[r.start + (i + 1) % n];
                let gap = (a.eval_local(1.0) - b.eval_local(-1.0)).norm();
                if gap > self.closure_tol * len.max(1.0) {
                    return Err(Error::OpenContour { contour: j, gap });
                }
            }
        }
        Ok(())
    }

    pub fn sections(&self) -> &[RationalSection] {
        &self.sections
    }

    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    pub fn contour_count(&self) -> usize {
        self.contours.len()
    }

    /// Section index range of contour `j`.
    pub fn contour_sections(&self, j: usize) -> Range<usize> {
        self.contours[j].clone()
    }

    pub fn contour_of_section(&self, m: usize) -> usize {
        self.contour_map[m]
    }

    pub fn input_orientation(&self) -> &[f64] {
        &self.input_orientation
    }

    pub fn closure_tol(&self) -> f64 {
        self.closure_tol
    }

    /// Breakpoints `h_0 = 0 < h_1 < ... < h_M = 1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut h: Vec<f64> = self.sections.iter().map(|s| s.interval.0).collect();
        h.push(1.0);
        h
    }

    pub fn section_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn contour_length(&self, j: usize) -> f64 {
        self.lengths[self.contours[j].clone()].iter().sum()
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Parameter interval covered by contour `j`.
    pub fn contour_interval(&self, j: usize) -> (f64, f64) {
        let r = &self.contours[j];
        (self.sections[r.start].interval.0, self.sections[r.end - 1].interval.1)
    }

    /// Index of the section containing `s`.
    pub fn section_at(&self, s: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ParameterOutOfRange { name: "s", value: s });
        }
        let idx = self.sections.partition_point(|sec| sec.interval.1 <= s);
        Ok(idx.min(self.sections.len() - 1))
    }

    pub fn eval(&self, s: f64) -> Result<Complex64> {
        let m = self.section_at(s)?;
        let sec = &self.sections[m];
        Ok(sec.eval_local(sec.to_local(s)))
    }

    /// dz/ds.
    pub fn eval_deriv(&self, s: f64) -> Result<Complex64> {
        let m = self.section_at(s)?;
        let sec = &self.sections[m];
        Ok(sec.deriv_local(sec.to_local(s)) * (2.0 / sec.width()))
    }

    /// Uniform samples in `s`, excluding `s = 1` (same point as `s = 0` on
    /// single-contour boundaries).
    pub fn sample_uniform(&self, n: usize) -> Vec<(f64, Complex64)> {
        (0..n)
            .map(|i| {
                let s = (i as f64 + 0.5) / n as f64;
                (s, self.eval(s).expect("s in range"))
            })
            .collect()
    }

    /// Dense polyline of one contour, `per_section` points per section.
    pub fn contour_polyline(&self, j: usize, per_section: usize) -> Vec<Complex64> {
        let mut pts = Vec::new();
        for sec in &self.sections[self.contours[j].clone()] {
            for i in 0..per_section {
                let t = -1.0 + 2.0 * i as f64 / per_section as f64;
                pts.push(sec.eval_local(t));
            }
        }
        pts
    }

    /// Bounding-box diagonal, used as the geometric length scale.
    pub fn diameter(&self) -> f64 {
        let (mut lo, mut hi) = (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for j in 0..self.contour_count() {
            for z in self.contour_polyline(j, 64) {
                lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
                hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
            }
        }
        (hi - lo).norm()
    }

    /// Signed area enclosed by contour `j` (positive once normalized).
    pub fn contour_area(&self, j: usize) -> f64 {
        self.sections[self.contours[j].clone()].iter().map(signed_area_part).sum()
    }

    /// Area centroid of the region enclosed by contour `j`.
    pub fn contour_centroid(&self, j: usize) -> Complex64 {
        let area = self.contour_area(j);
        let mut cx = 0.0;
        let mut cy = 0.0;
        for sec in &self.sections[self.contours[j].clone()] {
            // Cx = (1/2A) int x^2 dy, Cy = -(1/2A) int y^2 dx
            let v = integrate(
                |t| {
                    let z = sec.eval_local(t);
                    let dz = sec.deriv_local(t);
                    Complex64::new(z.re * z.re * dz.im, -z.im * z.im * dz.re)
                },
                -1.0,
                1.0,
                1e-15,
                1e-14,
                2000,
            )
            .value;
            cx += v.re;
            cy += v.im;
        }
        Complex64::new(cx, cy) / (2.0 * area)
    }

    /// A point strictly inside contour `j`: the centroid if it is inside,
    /// otherwise the midpoint of the longest chord cut by the horizontal
    /// line through the centroid.
    pub fn interior_point(&self, j: usize) -> Result<Complex64> {
        let single = self.single_contour(j)?;
        let c = self.contour_centroid(j);
        if point_in_domain(&single, c)? == DomainSide::Inside {
            return Ok(c);
        }
        let poly = self.contour_polyline(j, 400);
        let n = poly.len();
        let mut xs = Vec::new();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if (a.im - c.im) * (b.im - c.im) < 0.0 {
                let t = (c.im - a.im) / (b.im - a.im);
                xs.push(a.re + t * (b.re - a.re));
            }
        }
        xs.sort_by(f64::total_cmp);
        let best = xs
            .chunks_exact(2)
            .max_by(|u, v| (u[1] - u[0]).total_cmp(&(v[1] - v[0])))
            .ok_or_else(|| Error::InvalidInput(format!("no interior point found for contour {j}")))?;
        let p = Complex64::new(0.5 * (best[0] + best[1]), c.im);
        if point_in_domain(&single, p)? != DomainSide::Inside {
            return Err(Error::InvalidInput(format!("no interior point found for contour {j}")));
        }
        Ok(p)
    }

    /// Boundary made of contour `j` alone (reparametrized over [0, 1]).
    pub fn single_contour(&self, j: usize) -> Result<Boundary> {
        self.subset(&[j])
    }

    /// Boundary made of the listed contours, in the given order.
    pub fn subset(&self, ids: &[usize]) -> Result<Boundary> {
        let contours = ids.iter().map(|&j| self.sections[self.contours[j].clone()].to_vec()).collect();
        Self::with_closure_tol(contours, self.closure_tol)
    }

    /// Section lists per contour, for rebuilding or serializing.
    pub fn contour_section_lists(&self) -> Vec<Vec<RationalSection>> {
        self.contours.iter().map(|r| self.sections[r.clone()].to_vec()).collect()
    }

    /// Same point set with new breakpoints (one entry per section plus the
    /// final 1).
    pub fn reparametrized(&self, h: &[f64]) -> Result<Boundary> {
        if h.len() != self.sections.len() + 1 || h[0] != 0.0 || h[h.len() - 1] != 1.0 {
            return Err(Error::InvalidInput("breakpoints must run from 0 to 1, one per section".into()));
        }
        if h.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
        }
        let mut lists = self.contour_section_lists();
        let mut m = 0;
        for c in lists.iter_mut() {
            for s in c.iter_mut() {
                s.interval = (h[m], h[m + 1]);
                m += 1;
            }
        }
        Self::with_intervals(lists, self.closure_tol)
    }
}

fn signed_area_part(sec: &RationalSection) -> f64 {
    integrate(
        |t| {
            let z = sec.eval_local(t);
            let dz = sec.deriv_local(t);
            Complex64::new(0.5 * (z.conj() * dz).im, 0.0)
        },
        -1.0,
        1.0,
        1e-15,
        1e-13,
        2000,
    )
    .value
    .re
}

fn section_length(sec: &RationalSection) -> f64 {
    integrate_real(|t| sec.deriv_local(t).norm(), -1.0, 1.0, 1e-15, 1e-13)
}

fn breakpoints_from_lengths(lengths: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = lengths.iter().sum();
    let mut h = Vec::with_capacity(lengths.len() + 1);
    let mut acc = 0.0;
    h.push(0.0);
    for (m, &l) in lengths.iter().enumerate() {
        if !(l > 0.0) {
            return Err(Error::ZeroLengthSection(m));
        }
        acc += l;
        h.push(acc / total);
    }
    *h.last_mut().unwrap() = 1.0;
    Ok(h)
}

/// Breakpoints with widths proportional to section arc lengths.
pub fn breakpoints_by_arclength(sections: &[RationalSection]) -> Result<Vec<f64>> {
    let lengths: Vec<f64> = sections.iter().map(section_length).collect();
    breakpoints_from_lengths(&lengths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn polygon(v: &[Complex64]) -> Vec<RationalSection> {
        (0..v.len()).map(|i| RationalSection::line(v[i], v[(i + 1) % v.len()], (0.0, 1.0))).collect()
    }

    #[test]
    fn proportional_breakpoints() {
        let secs = vec![RationalSection::line(c(0.0, 0.0), c(1.0, 0.0), (0.0, 1.0)), RationalSection::line(c(1.0, 0.0), c(4.0, 0.0), (0.0, 1.0))];
        let h = breakpoints_by_arclength(&secs).unwrap();
        assert!((h[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn lshape_widths() {
        let v = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(2.0, 1.0), c(2.0, 2.0), c(0.0, 2.0)];
        let b = Boundary::new(vec![polygon(&v)]).unwrap();
        let h = b.breakpoints();
        let w: Vec<f64> = h.windows(2).map(|p| p[1] - p[0]).collect();
        let expect = [0.125, 0.125, 0.125, 0.125, 0.25, 0.25];
        for (a, e) in w.iter().zip(expect) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn clockwise_input_is_reversed() {
        let v = [c(0.0, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(1.0, 0.0)];
        let b = Boundary::new(vec![polygon(&v)]).unwrap();
        assert_eq!(b.input_orientation(), &[-1.0]);
        assert!((b.contour_area(0) - 1.0).abs() < 1e-13);
        assert!((b.contour_centroid(0) - c(0.5, 0.5)).norm() < 1e-13);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let v = [c(0.0, 0.0), c(2.0, 0.0), c(2.0, 1.0), c(0.0, 1.0)];
        let b = Boundary::new(vec![polygon(&v)]).unwrap();
        let h = 1e-5;
        for &s in &[0.1, 0.4, 0.77] {
            let fd = (b.eval(s + h).unwrap() - b.eval(s - h).unwrap()) / (2.0 * h);
            assert!((fd - b.eval_deriv(s).unwrap()).norm() < 1e-8);
        }
        assert!(b.eval(1.5).is_err());
    }

    #[test]
    fn open_contour_rejected() {
        let secs = vec![
            RationalSection::line(c(0.0, 0.0), c(1.0, 0.0), (0.0, 1.0)),
            RationalSection::line(c(1.0, 0.0), c(0.0, 1.0), (0.0, 1.0)),
            RationalSection::line(c(0.0, 1.0), c(0.0, 0.1), (0.0, 1.0)),
        ];
        assert!(matches!(Boundary::new(vec![secs]), Err(Error::OpenContour { .. })));
    }

    #[test]
    fn reparametrization_keeps_point_set() {
        let v = [c(0.0, 0.0), c(2.0, 0.0), c(2.0, 1.0), c(0.0, 1.0)];
        let b = Boundary::new(vec![polygon(&v)]).unwrap();
        let b2 = b.reparametrized(&[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        for m in 0..4 {
            for &t in &[-1.0, -0.3, 0.6] {
                let s1 = b.sections()[m].to_global(t);
                let s2 = b2.sections()[m].to_global(t);
                assert!((b.eval(s1).unwrap() - b2.eval(s2).unwrap()).norm() < 1e-15);
            }
        }
    }
}
