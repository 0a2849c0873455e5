//! Boundary data sources.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::ProblemKind;
use crate::error::{Error, Result};
use crate::geometry::Boundary;

/// A boundary point with its local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub s: f64,
    pub z: Complex64,
    /// Unit tangent in the direction of increasing `s` (counterclockwise).
    pub tangent: Complex64,
    /// Unit normal pointing away from the solution domain.
    pub normal: Complex64,
    pub contour: usize,
}

impl BoundaryPoint {
    /// Frame at `z` with derivative `dz` on `contour`.
    pub fn new(s: f64, z: Complex64, dz: Complex64, contour: usize, kind: ProblemKind) -> Self {
        let tangent = dz / dz.norm();
        // Counterclockwise contours: the enclosed region is on the left.
        let normal = if kind.is_exterior() { Complex64::i() * tangent } else { -Complex64::i() * tangent };
        Self { s, z, tangent, normal, contour }
    }

    pub fn at(b: &Boundary, s: f64, kind: ProblemKind) -> Result<Self> {
        let m = b.section_at(s)?;
        Ok(Self::new(s, b.eval(s)?, b.eval_deriv(s)?, b.contour_of_section(m), kind))
    }
}

type DataFn = dyn Fn(&BoundaryPoint) -> f64 + Send + Sync;

/// Boundary values `f` (Dirichlet) or normal derivatives `dU/dn` along the
/// normal of [`BoundaryPoint`] (Neumann).
#[derive(Clone)]
pub struct BoundaryData {
    f: Arc<DataFn>,
    label: String,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("BoundaryData").field("label", &self.label).finish()
    }
}

impl BoundaryData {
    pub fn from_fn(label: impl Into<String>, f: impl Fn(&BoundaryPoint) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), label: label.into() }
    }

    /// Data depending on the position only.
    pub fn from_position(label: impl Into<String>, f: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_fn(label, move |p| f(p.z))
    }

    /// Piecewise-linear interpolation of `(s, value)` samples, periodic on
    /// each contour's parameter interval.
    pub fn from_table(b: &Boundary, mut rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("empty data table".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut per: Vec<Vec<(f64, f64)>> = vec![Vec::new(); b.contour_count()];
        for &(s, v) in &rows {
            let m = b.section_at(s)?;
            per[b.contour_of_section(m)].push((s, v));
        }
        let intervals: Vec<(f64, f64)> = (0..b.contour_count()).map(|j| b.contour_interval(j)).collect();
        for (j, t) in per.iter().enumerate() {
            if t.is_empty() {
                return Err(Error::InvalidInput(format!("data table has no rows on contour {j}")));
            }
        }
        Ok(Self::from_fn("table", move |p| {
            let t = &per[p.contour];
            let (lo, hi) = intervals[p.contour];
            let period = hi - lo;
            let i = t.partition_point(|r| r.0 <= p.s);
            let (a, c) = if i == 0 {
                let l = t[t.len() - 1];
                ((l.0 - period, l.1), t[0])
            } else if i == t.len() {
                let f = t[0];
                (t[i - 1], (f.0 + period, f.1))
            } else {
                (t[i - 1], t[i])
            };
            if c.0 == a.0 {
                return a.1;
            }
            a.1 + (c.1 - a.1) * (p.s - a.0) / (c.0 - a.0)
        }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, p: &BoundaryPoint) -> f64 {
        (self.f)(p)
    }
}
