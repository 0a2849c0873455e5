use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ingest_polygon, ingest_samples, Boundary, RationalSection, Smoothness, DEFAULT_CLOSURE_TOL};
use crate::error::{Error, Result};
use crate::numerics::cheb;

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Coef> for Complex64 {
    fn from(c: Coef) -> Self {
        match c {
            Coef::Real(x) => Complex64::new(x, 0.0),
            Coef::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for Coef {
    fn from(z: Complex64) -> Self {
        if z.im == 0.0 {
            Coef::Real(z.re)
        } else {
            Coef::Complex([z.re, z.im])
        }
    }
}

/// Coefficient basis of a section in a geometry file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefBasis {
    /// Powers of the section parameter, which runs over `interval`
    /// (or [0, 1] when no interval is given).
    #[default]
    Monomial,
    /// Chebyshev polynomials of the local variable `t in [-1, 1]`.
    Chebyshev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub num: Vec<Coef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<Coef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub basis: CoefBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ContourSpec {
    Points {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        smoothness: Smoothness,
    },
    Polygon {
        polygon: Vec<[f64; 2]>,
    },
    Sections {
        sections: Vec<SectionSpec>,
    },
}

/// Top-level layout of a geometry (or scene) file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryFile {
    pub contours: Vec<ContourSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure_tol: Option<f64>,
}

fn to_points(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Local-variable Chebyshev coefficients from monomials in `u in [a, b]`.
fn monomial_on_interval(c: &[Complex64], a: f64, b: f64) -> Vec<Complex64> {
    if c.len() <= 1 {
        return c.to_vec();
    }
    let n = c.len() - 1;
    let vals: Vec<Complex64> = cheb::cheb_points(n)
        .into_iter()
        .map(|t| {
            let u = 0.5 * (a + b) + 0.5 * (b - a) * t;
            c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, ck| acc * u + ck)
        })
        .collect();
    cheb::coeffs_from_values(&vals)
}

fn build_section(spec: &SectionSpec) -> Result<RationalSection> {
    let num: Vec<Complex64> = spec.num.iter().map(|&c| c.into()).collect();
    let den: Vec<Complex64> = match &spec.den {
        Some(d) => d.iter().map(|&c| c.into()).collect(),
        None => vec![Complex64::new(1.0, 0.0)],
    };
    let iv = spec.interval.unwrap_or([0.0, 1.0]);
    let (num, den) = match spec.basis {
        CoefBasis::Chebyshev => (num, den),
        CoefBasis::Monomial if spec.interval.is_some() => {
            (monomial_on_interval(&num, iv[0], iv[1]), monomial_on_interval(&den, iv[0], iv[1]))
        }
        CoefBasis::Monomial => (monomial_on_interval(&num, 0.0, 1.0), monomial_on_interval(&den, 0.0, 1.0)),
    };
    RationalSection::new(num, den, (iv[0], iv[1]))
}

/// Builds a boundary from a parsed geometry file. Point and polygon contours
/// get arclength breakpoints; if every contour is given as sections with
/// explicit intervals that tile [0, 1], those intervals are kept.
pub fn boundary_from_json(file: &GeometryFile) -> Result<Boundary> {
    if file.contours.is_empty() {
        return Err(Error::InvalidInput("geometry has no contours".into()));
    }
    let tol = file.closure_tol.unwrap_or(DEFAULT_CLOSURE_TOL);
    let mut lists = Vec::new();
    let mut all_intervals = true;
    for c in &file.contours {
        let secs = match c {
            ContourSpec::Points { points, smoothness } => {
                all_intervals = false;
                ingest_samples(&[to_points(points)], *smoothness)?.contour_section_lists().remove(0)
            }
            ContourSpec::Polygon { polygon } => {
                all_intervals = false;
                ingest_polygon(&[to_points(polygon)])?.contour_section_lists().remove(0)
            }
            ContourSpec::Sections { sections } => {
                all_intervals &= sections.iter().all(|s| s.interval.is_some());
                sections.iter().map(build_section).collect::<Result<Vec<_>>>()?
            }
        };
        lists.push(secs);
    }
    if all_intervals {
        Boundary::with_intervals(lists.clone(), tol).or_else(|_| Boundary::with_closure_tol(lists, tol))
    } else {
        Boundary::with_closure_tol(lists, tol)
    }
}

/// Serializes a boundary as Chebyshev-basis sections with explicit
/// intervals, so that reading it back reproduces the same parametrization.
pub fn boundary_to_json(b: &Boundary) -> GeometryFile {
    let contours = b
        .contour_section_lists()
        .into_iter()
        .map(|secs| ContourSpec::Sections {
            sections: secs
                .iter()
                .map(|s| SectionSpec {
                    num: s.num.iter().map(|&z| z.into()).collect(),
                    den: if s.is_polynomial() && s.den[0] == Complex64::new(1.0, 0.0) {
                        None
                    } else {
                        Some(s.den.iter().map(|&z| z.into()).collect())
                    },
                    interval: Some([s.interval.0, s.interval.1]),
                    basis: CoefBasis::Chebyshev,
                })
                .collect(),
        })
        .collect();
    GeometryFile { contours, closure_tol: Some(b.closure_tol()) }
}

/// Reads a geometry file from disk.
pub fn load_boundary(path: &Path) -> Result<Boundary> {
    let text = std::fs::read_to_string(path)?;
    let file: GeometryFile = serde_json::from_str(&text)?;
    boundary_from_json(&file)
}
