use std::path::{Path, PathBuf};

use laplace_rf::basis::ProblemKind;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// A run described in JSON.
///
/// The problem is either a complete gallery entry (`problem` + `params`) or
/// an explicit `kind`, `geometry` and `data`. Explicit fields override the
/// gallery entry. Relative paths are taken from the config file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: Option<String>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub kind: Option<ProblemKind>,
    #[serde(default)]
    pub geometry: Option<GeometrySource>,
    #[serde(default)]
    pub data: Option<DataSource>,
    #[serde(default)]
    pub n_poles: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub adaptive: bool,
    /// Feeds scene generation and clustering.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub comparison: Comparison,
    #[serde(default)]
    pub cluster: Option<ClusterConfig>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_tol() -> f64 {
    1e-13
}

fn default_max_iter() -> usize {
    100
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySource {
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub gallery: Option<String>,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    #[serde(default)]
    pub gallery: Option<String>,
    #[serde(default)]
    pub params: Map<String, Value>,
    /// CSV of `s,value` node samples.
    #[serde(default)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Rational,
    Nystrom,
    Both,
}

/// Sweeps written to the comparison CSV.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    /// Pole counts for the rational sweep; defaults to the run's `n_poles`.
    #[serde(default)]
    pub rational_n: Vec<usize>,
    /// Node counts per contour for the Nystrom sweep; defaults to 200.
    #[serde(default)]
    pub nystrom_n: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_poles_per_curve")]
    pub poles_per_curve: usize,
    #[serde(default = "default_cluster_tol")]
    pub tol: f64,
}

fn default_k() -> usize {
    10
}

fn default_poles_per_curve() -> usize {
    3
}

fn default_cluster_tol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_poles")]
    pub poles: String,
    #[serde(default = "default_comparison")]
    pub comparison: String,
    #[serde(default)]
    pub field: Option<FieldGrid>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { dir: default_dir(), report: default_report(), poles: default_poles(), comparison: default_comparison(), field: None }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_report() -> String {
    "report.json".into()
}

fn default_poles() -> String {
    "poles.csv".into()
}

fn default_comparison() -> String {
    "comparison.csv".into()
}

/// Rectangular evaluation grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldGrid {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "default_field")]
    pub file: String,
}

fn default_field() -> String {
    "field.csv".into()
}

impl FieldGrid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let step = |r: [f64; 2], n: usize, i: usize| if n == 1 { r[0] } else { r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64 };
        (0..self.ny).flat_map(|j| (0..self.nx).map(move |i| (step(self.x, self.nx, i), step(self.y, self.ny, j)))).collect()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigNotFound(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.outputs.dir);
        if let Some(f) = cfg.geometry.as_mut().and_then(|g| g.file.as_mut()) {
            rebase(f);
        }
        if let Some(f) = cfg.data.as_mut().and_then(|d| d.table.as_mut()) {
            rebase(f);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that do not need the geometry.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.problem.is_none() && (self.kind.is_none() || self.geometry.is_none() || self.data.is_none()) {
            return bad("either problem or all of kind, geometry and data are required".into());
        }
        if let Some(g) = &self.geometry {
            if g.file.is_some() == g.gallery.is_some() {
                return bad("geometry needs exactly one of file and gallery".into());
            }
        }
        if let Some(d) = &self.data {
            if d.table.is_some() == d.gallery.is_some() {
                return bad("data needs exactly one of gallery and table".into());
            }
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tol must be positive and max_iter at least 1".into());
        }
        if self.n_poles == Some(0) || self.comparison.rational_n.contains(&0) {
            return bad("pole counts must be positive".into());
        }
        if let Some(f) = &self.outputs.field {
            if f.nx == 0 || f.ny == 0 || !f.x.iter().chain(&f.y).all(|v| v.is_finite()) {
                return bad("field grid needs positive resolution and finite bounds".into());
            }
        }
        if let Some(c) = &self.cluster {
            if c.k == 0 || c.poles_per_curve == 0 {
                return bad("cluster k and poles_per_curve must be positive".into());
            }
        }
        Ok(())
    }
}

/// Rejects data that cannot serve the problem kind.
pub fn check_pairing(kind: ProblemKind, data_name: Option<&str>, method: Method, cluster: bool) -> Result<(), CliError> {
    let bad = |m: &str| Err(CliError::Config(m.into()));
    match (kind, data_name) {
        (ProblemKind::ExteriorNeumann, Some("monopole" | "essential" | "poles" | "plusminus" | "constants")) => {
            return bad("Neumann problems need flux data such as uniform-flow or a table")
        }
        (ProblemKind::InteriorDirichlet | ProblemKind::ExteriorDirichlet, Some("uniform-flow")) => {
            return bad("uniform-flow data is a Neumann condition")
        }
        (ProblemKind::InteriorDirichlet, Some("plusminus")) => return bad("plusminus data needs an exterior problem"),
        _ => {}
    }
    if method != Method::Rational && kind == ProblemKind::ExteriorNeumann {
        return bad("the Nystrom baseline handles Dirichlet problems only");
    }
    if cluster && kind != ProblemKind::ExteriorNeumann {
        return bad("clustered solves are for exterior Neumann scenes");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn gallery_problem_is_enough() {
        let c = parse(r#"{"problem": "ellipse-poles"}"#).unwrap();
        assert_eq!(c.method, Method::Rational);
        assert_eq!(c.outputs.report, "report.json");
    }

    #[test]
    fn explicit_problem_needs_all_parts() {
        assert!(parse(r#"{"kind": "interior-dirichlet", "geometry": {"gallery": "ellipse"}}"#).is_err());
        assert!(parse(r#"{"kind": "interior-dirichlet", "geometry": {"gallery": "ellipse"}, "data": {"gallery": "monopole"}}"#).is_ok());
    }

    #[test]
    fn zero_resolution_grid_is_rejected() {
        let e = parse(r#"{"problem": "lshape-monopole", "outputs": {"field": {"x": [0, 1], "y": [0, 1], "nx": 0, "ny": 3}}}"#);
        assert!(matches!(e, Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse(r#"{"problem": "ellipse-poles", "poles": 3}"#).is_err());
    }

    #[test]
    fn pairing() {
        assert!(check_pairing(ProblemKind::ExteriorNeumann, Some("monopole"), Method::Rational, false).is_err());
        assert!(check_pairing(ProblemKind::InteriorDirichlet, Some("uniform-flow"), Method::Rational, false).is_err());
        assert!(check_pairing(ProblemKind::ExteriorNeumann, Some("uniform-flow"), Method::Both, false).is_err());
        assert!(check_pairing(ProblemKind::ExteriorNeumann, Some("uniform-flow"), Method::Rational, true).is_ok());
    }

    #[test]
    fn shipped_configs_load() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        let mut count = 0;
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {:?}", path.display(), e));
            count += 1;
        }
        assert!(count >= 5);
    }

    #[test]
    fn grid_points_cover_corners() {
        let g = FieldGrid { x: [0.0, 1.0], y: [-1.0, 1.0], nx: 3, ny: 2, file: "f".into() };
        let p = g.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], (0.0, -1.0));
        assert_eq!(p[5], (1.0, 1.0));
    }
}
