//! Built-in geometries, boundary data and complete test problems.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::basis::ProblemKind;
use crate::error::{Error, Result};
use crate::geometry::{ingest_polygon, Boundary, RationalSection};
use crate::numerics::cheb;
use crate::solver::{BoundaryData, BoundaryPoint};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Two rational sections tracing `center + R(a cos th + i b sin th)`
/// counterclockwise, `R` a rotation by `angle`.
pub fn ellipse_sections(center: Complex64, a: f64, b: f64, angle: f64) -> Vec<RationalSection> {
    // ((1 - t^2) a + 2 i b t) / (1 + t^2) covers the half with x > 0 for
    // t in [-1, 1]; the negation covers the other half.
    let rot = Complex64::from_polar(1.0, angle);
    let num = [c(a, 0.0) * rot, c(0.0, 2.0 * b) * rot, c(-a, 0.0) * rot];
    let den = [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    let mut right = RationalSection::from_monomial(&num, &den, (0.0, 0.5)).expect("valid ellipse section");
    let neg: Vec<Complex64> = num.iter().map(|v| -v).collect();
    let mut left = RationalSection::from_monomial(&neg, &den, (0.5, 1.0)).expect("valid ellipse section");
    // Adding center * q to the numerator shifts the curve.
    for (i, d) in right.den.clone().iter().enumerate() {
        right.num[i] += center * d;
        left.num[i] += center * d;
    }
    vec![right, left]
}

/// Ellipse with semi-axes `a` (along x) and `b` (along y) centered at 0.
pub fn ellipse(a: f64, b: f64) -> Result<Boundary> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    Boundary::new(vec![ellipse_sections(c(0.0, 0.0), a, b, 0.0)])
}

pub fn circle(r: f64, center: Complex64) -> Result<Boundary> {
    check_positive("radius", r)?;
    Boundary::new(vec![ellipse_sections(center, r, r, 0.0)])
}

/// `z(s) = [1/g + (1/g - 1) cos(2 pi nu s)] exp(2 pi i s)` as one
/// polynomial section, interpolated to rounding level.
pub fn trigpoly(gamma: f64, nu: u32) -> Result<Boundary> {
    if !(gamma > 1.0 && gamma < 2.0) {
        return Err(Error::ParameterOutOfRange { name: "gamma", value: gamma });
    }
    let z = |t: f64| {
        let s = 0.5 * (t + 1.0);
        let r = 1.0 / gamma + (1.0 / gamma - 1.0) * (2.0 * PI * nu as f64 * s).cos();
        Complex64::from_polar(r, 2.0 * PI * s)
    };
    let coef = cheb::adaptive_interpolant(z, 1e-15, 1024);
    let sec = RationalSection::new(coef, vec![c(1.0, 0.0)], (0.0, 1.0))?;
    Boundary::new(vec![vec![sec]])
}

/// The L-shaped hexagon with the reentrant corner at `(0.5, 0.5)`; the
/// origin lies inside.
pub fn lshape() -> Result<Boundary> {
    let v = vec![c(-0.5, -0.5), c(1.5, -0.5), c(1.5, 0.5), c(0.5, 0.5), c(0.5, 1.5), c(-0.5, 1.5)];
    ingest_polygon(&[v])
}

/// Reentrant corner of [`lshape`].
pub const LSHAPE_CORNER: Complex64 = Complex64 { re: 0.5, im: 0.5 };

/// Two circles of radius `r` centered at `+-i (r + gap/2)`.
pub fn two_circles(r: f64, gap: f64) -> Result<Boundary> {
    check_positive("radius", r)?;
    check_positive("gap", gap)?;
    let h = r + 0.5 * gap;
    Boundary::new(vec![ellipse_sections(c(0.0, -h), r, r, 0.0), ellipse_sections(c(0.0, h), r, r, 0.0)])
}

/// `1 / arccosh(D / 2r)`: the log-coefficient magnitude of the two-circle
/// problem with potentials -1 and +1, `D` the center distance.
pub fn two_circle_log_coefficient(r: f64, gap: f64) -> f64 {
    let x: f64 = (2.0 * r + gap) / (2.0 * r);
    1.0 / x.acosh()
}

/// A random ellipse in a scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneEllipse {
    pub center: Complex64,
    pub a: f64,
    pub b: f64,
    pub angle: f64,
}

/// Non-overlapping random ellipses with random size, eccentricity and
/// orientation. Bounding circles are kept `min_gap` apart, so neighbours
/// can come close.
pub fn random_ellipses(count: usize, seed: u64) -> Result<Vec<SceneEllipse>> {
    if count == 0 {
        return Err(Error::InvalidInput("scene needs at least one ellipse".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Packing fraction of bounding disks around 0.35.
    let mean_area = PI * 0.75f64.powi(2);
    let side = (count as f64 * mean_area / 0.35).sqrt();
    let min_gap = 0.02;
    let mut out: Vec<SceneEllipse> = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 200_000 {
            return Err(Error::InvalidInput(format!("could not place {count} ellipses")));
        }
        let a = rng.random_range(0.5..1.0);
        let b = a * rng.random_range(0.3..1.0);
        let angle = rng.random_range(0.0..PI);
        let center = c(rng.random_range(a..side - a), rng.random_range(a..side - a));
        if out.iter().all(|e| (e.center - center).norm() > e.a + a + min_gap) {
            out.push(SceneEllipse { center, a, b, angle });
        }
    }
    Ok(out)
}

pub fn scene_boundary(scene: &[SceneEllipse]) -> Result<Boundary> {
    Boundary::new(scene.iter().map(|e| ellipse_sections(e.center, e.a, e.b, e.angle)).collect())
}

/// `Re sum a_k / (p_k - z)`.
pub fn pole_data(poles: Vec<Complex64>, residues: Vec<Complex64>) -> BoundaryData {
    BoundaryData::from_position("poles", move |z| poles.iter().zip(&residues).map(|(p, a)| (a / (p - z)).re).sum())
}

/// Poles `1.5 exp(i pi (2k+1) / 6)` with residues `k/6`, k = 1..6.
pub fn ellipse_six_poles() -> (Vec<Complex64>, Vec<Complex64>) {
    (1..=6).map(|k| (Complex64::from_polar(1.5, PI * (2 * k + 1) as f64 / 6.0), c(k as f64 / 6.0, 0.0))).unzip()
}

/// Ten poles on a circle of radius `r`: angles `pi (2k+1) / 10`, residues
/// `k / 10`, k = 1..10.
pub fn ring_poles(r: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    (1..=10).map(|k| (Complex64::from_polar(r, PI * (2 * k + 1) as f64 / 10.0), c(k as f64 / 10.0, 0.0))).unzip()
}

/// `log|z - source|`.
pub fn monopole_data(source: Complex64) -> BoundaryData {
    BoundaryData::from_position("monopole", move |z| (z - source).norm().ln())
}

/// `Re exp(1 / (z - center))`.
pub fn essential_data(center: Complex64) -> BoundaryData {
    BoundaryData::from_position("essential", move |z| (1.0 / (z - center)).exp().re)
}

/// Normal derivative of the disturbance potential for unit flow along x
/// past impenetrable obstacles: `-n_x`.
pub fn uniform_flow_data() -> BoundaryData {
    BoundaryData::from_fn("uniform-flow", |p: &BoundaryPoint| -p.normal.re)
}

/// A constant value per contour.
pub fn contour_constants(values: Vec<f64>) -> BoundaryData {
    BoundaryData::from_fn("contour-constants", move |p: &BoundaryPoint| values.get(p.contour).copied().unwrap_or(0.0))
}

/// A complete gallery problem.
#[derive(Debug, Clone)]
pub struct GalleryProblem {
    pub kind: ProblemKind,
    pub boundary: Boundary,
    pub data: BoundaryData,
    /// Suggested pole count.
    pub n_poles: usize,
}

/// Name and one-line description of every gallery entry.
pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        ("ellipse-poles", "ellipse (1, 0.5), data from six poles on radius 1.5"),
        ("trigpoly-poles", "trigpoly curve (gamma, nu), data from ten poles on radius R"),
        ("essential", "ellipse (1, 2), Re exp(1/(z - 1.01))"),
        ("trigpoly-monopole", "trigpoly curve, log|z|"),
        ("lshape-monopole", "L-shaped hexagon, log|z|"),
        ("two-circles", "exterior Dirichlet, circles at -1 and +1 with gap d"),
        ("random-ellipses", "exterior Neumann, uniform flow past random ellipses"),
        ("geometry:ellipse", "params a, b"),
        ("geometry:circle", "params r, cx, cy"),
        ("geometry:trigpoly", "params gamma, nu"),
        ("geometry:lshape", "no params"),
        ("geometry:two-circles", "params r, d"),
        ("geometry:random-ellipses", "params count, seed"),
        ("data:poles", "params poles [[re, im], ...], residues [[re, im], ...]; or radius for the ring of ten"),
        ("data:monopole", "params x, y"),
        ("data:essential", "params x, y"),
        ("data:uniform-flow", "no params"),
        ("data:plusminus", "-1 on the first contour, +1 on the second"),
        ("data:constants", "params values [...] per contour"),
    ]
}

fn num(params: &Map<String, Value>, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v.as_f64().ok_or_else(|| Error::Parse(format!("parameter {key} must be a number"))),
    }
}

fn complex_list(params: &Map<String, Value>, key: &str) -> Result<Option<Vec<Complex64>>> {
    let Some(v) = params.get(key) else { return Ok(None) };
    let arr = v.as_array().ok_or_else(|| Error::Parse(format!("parameter {key} must be a list")))?;
    arr.iter()
        .map(|e| match e {
            Value::Number(n) => Ok(c(n.as_f64().unwrap_or(f64::NAN), 0.0)),
            Value::Array(p) if p.len() == 2 => {
                let re = p[0].as_f64().ok_or_else(|| Error::Parse(format!("bad entry in {key}")))?;
                let im = p[1].as_f64().ok_or_else(|| Error::Parse(format!("bad entry in {key}")))?;
                Ok(c(re, im))
            }
            _ => Err(Error::Parse(format!("bad entry in {key}"))),
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value: v })
    }
}

pub fn geometry_by_name(name: &str, params: &Map<String, Value>) -> Result<Boundary> {
    match name {
        "ellipse" => ellipse(num(params, "a", 1.0)?, num(params, "b", 0.5)?),
        "circle" => circle(num(params, "r", 1.0)?, c(num(params, "cx", 0.0)?, num(params, "cy", 0.0)?)),
        "trigpoly" => trigpoly(num(params, "gamma", 1.75)?, num(params, "nu", 2.0)? as u32),
        "lshape" => lshape(),
        "two-circles" => two_circles(num(params, "r", 1.0)?, num(params, "d", 0.1)?),
        "random-ellipses" => scene_boundary(&random_ellipses(num(params, "count", 100.0)? as usize, num(params, "seed", 1.0)? as u64)?),
        _ => Err(Error::UnknownGallery(name.to_string())),
    }
}

pub fn data_by_name(name: &str, params: &Map<String, Value>) -> Result<BoundaryData> {
    match name {
        "poles" => {
            if !params.contains_key("poles") {
                let r = num(params, "radius", 1.1)?;
                check_positive("radius", r)?;
                let (p, a) = ring_poles(r);
                return Ok(pole_data(p, a));
            }
            let poles = complex_list(params, "poles")?.ok_or_else(|| Error::Parse("poles data needs a poles list".into()))?;
            let residues = complex_list(params, "residues")?.unwrap_or_else(|| vec![c(1.0, 0.0); poles.len()]);
            if residues.len() != poles.len() {
                return Err(Error::DimensionMismatch(format!("{} residues for {} poles", residues.len(), poles.len())));
            }
            Ok(pole_data(poles, residues))
        }
        "monopole" => Ok(monopole_data(c(num(params, "x", 0.0)?, num(params, "y", 0.0)?))),
        "essential" => Ok(essential_data(c(num(params, "x", 1.01)?, num(params, "y", 0.0)?))),
        "uniform-flow" => Ok(uniform_flow_data()),
        "plusminus" => Ok(contour_constants(vec![-1.0, 1.0])),
        "constants" => {
            let v = complex_list(params, "values")?.ok_or_else(|| Error::Parse("constants data needs values".into()))?;
            Ok(contour_constants(v.iter().map(|z| z.re).collect()))
        }
        _ => Err(Error::UnknownGallery(name.to_string())),
    }
}

/// A complete problem by name.
pub fn problem_by_name(name: &str, params: &Map<String, Value>) -> Result<GalleryProblem> {
    use ProblemKind::*;
    let (kind, boundary, data, n_poles) = match name {
        "ellipse-poles" => {
            let (p, a) = ellipse_six_poles();
            (InteriorDirichlet, ellipse(1.0, 0.5)?, pole_data(p, a), 7)
        }
        "trigpoly-poles" => {
            let (p, a) = ring_poles(num(params, "radius", 1.1)?);
            (InteriorDirichlet, trigpoly(num(params, "gamma", 1.75)?, num(params, "nu", 2.0)? as u32)?, pole_data(p, a), 12)
        }
        "essential" => (InteriorDirichlet, ellipse(1.0, 2.0)?, essential_data(c(1.01, 0.0)), 25),
        "trigpoly-monopole" => (InteriorDirichlet, trigpoly(num(params, "gamma", 1.9)?, num(params, "nu", 2.0)? as u32)?, monopole_data(c(0.0, 0.0)), 35),
        "lshape-monopole" => (InteriorDirichlet, lshape()?, monopole_data(c(0.0, 0.0)), 30),
        "two-circles" => (ExteriorDirichlet, two_circles(num(params, "r", 1.0)?, num(params, "d", 0.1)?)?, contour_constants(vec![-1.0, 1.0]), 20),
        "random-ellipses" => {
            let count = num(params, "count", 100.0)? as usize;
            let b = scene_boundary(&random_ellipses(count, num(params, "seed", 1.0)? as u64)?)?;
            (ExteriorNeumann, b, uniform_flow_data(), 3 * count)
        }
        _ => return Err(Error::UnknownGallery(name.to_string())),
    };
    let n_poles = num(params, "n", n_poles as f64)? as usize;
    Ok(GalleryProblem { kind, boundary, data, n_poles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point_in_domain, DomainSide};

    #[test]
    fn ellipse_points_on_curve() {
        let b = ellipse(1.0, 0.5).unwrap();
        for (_, z) in b.sample_uniform(50) {
            assert!((z.re * z.re + 4.0 * z.im * z.im - 1.0).abs() < 1e-13);
        }
        assert!((b.contour_area(0) - PI * 0.5).abs() < 1e-12);
    }

    #[test]
    fn shifted_rotated_ellipse() {
        let b = Boundary::new(vec![ellipse_sections(c(3.0, -1.0), 2.0, 1.0, 0.7)]).unwrap();
        let rot = Complex64::from_polar(1.0, -0.7);
        for (_, z) in b.sample_uniform(40) {
            let w = (z - c(3.0, -1.0)) * rot;
            assert!((w.re * w.re / 4.0 + w.im * w.im - 1.0).abs() < 1e-12);
        }
        assert_eq!(point_in_domain(&b, c(3.0, -1.0)).unwrap(), DomainSide::Inside);
    }

    #[test]
    fn trigpoly_matches_formula() {
        let b = trigpoly(1.75, 2).unwrap();
        let sec = &b.sections()[0];
        for i in 0..=20 {
            let t = -1.0 + 0.1 * i as f64;
            let s = 0.5 * (t + 1.0);
            let r = 1.0 / 1.75 + (1.0 / 1.75 - 1.0) * (4.0 * PI * s).cos();
            assert!((sec.eval_local(t) - Complex64::from_polar(r, 2.0 * PI * s)).norm() < 1e-14);
        }
        assert_eq!(point_in_domain(&b, c(0.0, 0.0)).unwrap(), DomainSide::Inside);
    }

    #[test]
    fn scene_is_deterministic_and_disjoint() {
        let a = random_ellipses(30, 7).unwrap();
        assert_eq!(a, random_ellipses(30, 7).unwrap());
        for i in 0..a.len() {
            for j in 0..i {
                assert!((a[i].center - a[j].center).norm() > a[i].a + a[j].a);
            }
        }
        let b = scene_boundary(&a).unwrap();
        assert_eq!(b.contour_count(), 30);
    }

    #[test]
    fn two_circle_formula() {
        // arccosh(1.05) for gap 0.1
        let v = two_circle_log_coefficient(1.0, 0.1);
        assert!((v - 1.0 / (1.05f64 + (1.05f64 * 1.05 - 1.0).sqrt()).ln()).abs() < 1e-14);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(problem_by_name("nope", &Map::new()), Err(Error::UnknownGallery(_))));
    }
}
