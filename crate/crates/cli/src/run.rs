use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use laplace_rf::basis::{side_in_domain, PotentialModel, ProblemKind};
use laplace_rf::cluster::{solve_large, ClusterOptions, LargeSolution};
use laplace_rf::gallery;
use laplace_rf::geometry::{load_boundary, Boundary, DomainSide};
use laplace_rf::nystrom::{nystrom_exterior_dirichlet, nystrom_interior_dirichlet, NystromSolution, SmoothContour};
use laplace_rf::solver::{eval_field, solve, AdaptiveOptions, BoundaryData, ProblemSpec, Solution, SolverOptions};
use laplace_rf::{Complex64, Error};
use serde_json::{json, Map, Value};

use crate::config::{check_pairing, FieldGrid, Method, RunConfig};
use crate::error::CliError;

/// Oversampling of the Nystrom density for error measurement.
const NYSTROM_REFINE: usize = 8;

/// Geometry by gallery name and parameters, when known.
struct Named {
    name: String,
    params: Map<String, Value>,
}

struct Problem {
    spec: ProblemSpec,
    geometry: Option<Named>,
}

/// One row of the comparison file.
#[derive(Clone, Copy)]
struct Row {
    method: &'static str,
    n: usize,
    basis_count: usize,
    delta_e: f64,
    delta_e_max: f64,
}

fn param_or(params: &Map<String, Value>, key: &str, v: Value) -> Map<String, Value> {
    let mut p = params.clone();
    p.entry(key).or_insert(v);
    p
}

/// Geometry behind each complete gallery problem, for the Nystrom contours.
fn problem_geometry(problem: &str, params: &Map<String, Value>) -> Option<Named> {
    let named = |name: &str, params: Map<String, Value>| Some(Named { name: name.into(), params });
    match problem {
        "ellipse-poles" => named("ellipse", json!({"a": 1.0, "b": 0.5}).as_object().cloned().unwrap_or_default()),
        "essential" => named("ellipse", json!({"a": 1.0, "b": 2.0}).as_object().cloned().unwrap_or_default()),
        "trigpoly-poles" => named("trigpoly", param_or(params, "gamma", json!(1.75))),
        "trigpoly-monopole" => named("trigpoly", param_or(params, "gamma", json!(1.9))),
        "lshape-monopole" => named("lshape", Map::new()),
        "two-circles" => named("two-circles", params.clone()),
        "random-ellipses" => named("random-ellipses", params.clone()),
        _ => None,
    }
}

fn read_table(path: &Path, b: &Boundary) -> Result<BoundaryData, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::DataNotFound(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',').map(|t| t.trim().parse::<f64>());
        match (it.next(), it.next()) {
            (Some(Ok(s)), Some(Ok(v))) => rows.push((s, v)),
            _ if i == 0 => continue,
            _ => return Err(CliError::Config(format!("{} line {}: expected s,value", path.display(), i + 1))),
        }
    }
    Ok(BoundaryData::from_table(b, rows)?)
}

fn solver_options(cfg: &RunConfig, n: usize) -> SolverOptions {
    SolverOptions {
        n_poles: n,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        adaptive: cfg.adaptive.then(AdaptiveOptions::default),
        ..Default::default()
    }
}

fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let seeded = |p: &Map<String, Value>| param_or(p, "seed", json!(cfg.seed));
    let mut kind = None;
    let mut boundary = None;
    let mut data = None;
    let mut data_name = None;
    let mut n_default = 10;
    let mut geometry = None;
    if let Some(name) = &cfg.problem {
        let params = seeded(&cfg.params);
        let g = gallery::problem_by_name(name, &params).map_err(|e| CliError::Config(e.to_string()))?;
        kind = Some(g.kind);
        boundary = Some(g.boundary);
        data = Some(g.data);
        n_default = g.n_poles;
        geometry = problem_geometry(name, &params);
    }
    if let Some(k) = cfg.kind {
        kind = Some(k);
    }
    if let Some(g) = &cfg.geometry {
        if let Some(path) = &g.file {
            if !path.exists() {
                return Err(CliError::GeometryNotFound(path.display().to_string()));
            }
            boundary = Some(load_boundary(path).map_err(|e| match e {
                Error::Io(m) => CliError::GeometryNotFound(format!("{}: {m}", path.display())),
                e => CliError::Config(format!("{}: {e}", path.display())),
            })?);
            geometry = None;
        } else if let Some(name) = &g.gallery {
            let params = seeded(&g.params);
            boundary = Some(gallery::geometry_by_name(name, &params).map_err(|e| CliError::Config(e.to_string()))?);
            geometry = Some(Named { name: name.clone(), params });
        }
    }
    let (Some(kind), Some(boundary)) = (kind, boundary) else {
        return Err(CliError::Config("problem kind and geometry are required".into()));
    };
    if let Some(d) = &cfg.data {
        if let Some(path) = &d.table {
            data = Some(read_table(path, &boundary)?);
        } else if let Some(name) = &d.gallery {
            data = Some(gallery::data_by_name(name, &d.params).map_err(|e| CliError::Config(e.to_string()))?);
            data_name = Some(name.as_str());
        }
    }
    let Some(data) = data else {
        return Err(CliError::Config("boundary data is required".into()));
    };
    check_pairing(kind, data_name, cfg.method, cfg.cluster.is_some())?;
    let options = solver_options(cfg, cfg.n_poles.unwrap_or(n_default));
    Ok(Problem { spec: ProblemSpec { kind, boundary, data, options }, geometry })
}

fn num(p: &Map<String, Value>, key: &str, default: f64) -> f64 {
    p.get(key).and_then(Value::as_f64).unwrap_or(default)
}

/// Smooth parametrizations for the Nystrom baseline.
fn smooth_contours(p: &Problem) -> Result<Vec<SmoothContour>, CliError> {
    let zero = Complex64::new(0.0, 0.0);
    let contours = match &p.geometry {
        Some(Named { name, params }) if name == "ellipse" => vec![SmoothContour::ellipse(zero, num(params, "a", 1.0), num(params, "b", 0.5), 0.0)],
        Some(Named { name, params }) if name == "circle" => {
            let r = num(params, "r", 1.0);
            vec![SmoothContour::ellipse(Complex64::new(num(params, "cx", 0.0), num(params, "cy", 0.0)), r, r, 0.0)]
        }
        Some(Named { name, params }) if name == "trigpoly" => vec![SmoothContour::trigpoly(num(params, "gamma", 1.75), num(params, "nu", 2.0) as u32)],
        Some(Named { name, params }) if name == "two-circles" => {
            let r = num(params, "r", 1.0);
            let h = r + 0.5 * num(params, "d", 0.1);
            vec![SmoothContour::ellipse(Complex64::new(0.0, -h), r, r, 0.0), SmoothContour::ellipse(Complex64::new(0.0, h), r, r, 0.0)]
        }
        _ => {
            let b = &p.spec.boundary;
            (0..b.contour_count()).map(|j| SmoothContour::from_boundary(b, j)).collect::<laplace_rf::Result<_>>()?
        }
    };
    Ok(contours)
}

fn nystrom(p: &Problem, n: usize) -> Result<(NystromSolution, Row), CliError> {
    let contours = smooth_contours(p)?;
    let sol = match p.spec.kind {
        ProblemKind::InteriorDirichlet => {
            if contours.len() != 1 {
                return Err(CliError::Config("interior Nystrom needs a single contour".into()));
            }
            nystrom_interior_dirichlet(&contours[0], &p.spec.data, n)?
        }
        ProblemKind::ExteriorDirichlet => nystrom_exterior_dirichlet(&contours, &p.spec.data, n)?,
        ProblemKind::ExteriorNeumann => return Err(CliError::Config("the Nystrom baseline handles Dirichlet problems only".into())),
    };
    let (delta_e, delta_e_max) = sol.errors(&p.spec.data, NYSTROM_REFINE);
    let extra = if sol.kind.is_exterior() { sol.log_coeffs.len() + 1 } else { 0 };
    let basis_count = n * contours.len() + extra;
    Ok((sol, Row { method: "nystrom", n, basis_count, delta_e, delta_e_max }))
}

/// Real unknowns of a rational model.
fn basis_count(m: &PotentialModel) -> usize {
    2 * m.poles.len() + m.log_coeffs.len() + m.v_consts.len() + 1
}

fn rational_row(s: &Solution, n: usize) -> Row {
    Row {
        method: "rational",
        n,
        basis_count: basis_count(&s.model),
        delta_e: s.report.delta_e,
        delta_e_max: s.report.delta_e_max.unwrap_or(f64::NAN),
    }
}

enum Main {
    Single(Solution),
    Large(Box<LargeSolution>),
}

impl Main {
    fn solution(&self) -> &Solution {
        match self {
            Main::Single(s) => s,
            Main::Large(l) => &l.global,
        }
    }
}

fn rational(cfg: &RunConfig, p: &Problem) -> Result<(Main, Vec<Row>), CliError> {
    let n = p.spec.options.n_poles;
    let main = match &cfg.cluster {
        Some(c) => {
            let opts = ClusterOptions {
                k: c.k,
                seed: cfg.seed,
                poles_per_curve: c.poles_per_curve,
                tol: c.tol,
                max_iter: cfg.max_iter,
                solver: p.spec.options.clone(),
            };
            Main::Large(Box::new(solve_large(&p.spec, &opts)?))
        }
        None => Main::Single(solve(&p.spec)?),
    };
    let mut rows = Vec::new();
    if cfg.method == Method::Both || !cfg.comparison.rational_n.is_empty() {
        let sweep = if cfg.comparison.rational_n.is_empty() { vec![n] } else { cfg.comparison.rational_n.clone() };
        for m in sweep {
            if m == n && cfg.cluster.is_none() {
                rows.push(rational_row(main.solution(), m));
            } else {
                let spec = ProblemSpec { options: solver_options(cfg, m), ..p.spec.clone() };
                rows.push(rational_row(&solve(&spec)?, m));
            }
        }
    }
    Ok((main, rows))
}

fn nystrom_sweep(cfg: &RunConfig, p: &Problem) -> Result<(Option<NystromSolution>, Vec<Row>), CliError> {
    let sweep = if cfg.comparison.nystrom_n.is_empty() { vec![200] } else { cfg.comparison.nystrom_n.clone() };
    let mut rows = Vec::new();
    let mut last = None;
    for n in sweep {
        let (sol, row) = nystrom(p, n)?;
        rows.push(row);
        last = Some(sol);
    }
    Ok((last, rows))
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.17e}")
    } else {
        "nan".into()
    }
}

fn comparison_csv(rows: &[Row]) -> String {
    let mut s = String::from("method,n,basis_count,delta_e,delta_e_max\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.method, r.n, r.basis_count, fmt(r.delta_e), fmt(r.delta_e_max));
    }
    s
}

/// `x,y,in_domain,u,v`; points outside the domain keep their row with
/// `in_domain = 0` and `nan` values.
fn field_csv(grid: &FieldGrid, p: &Problem, rational: Option<&Solution>, nys: Option<&NystromSolution>) -> String {
    let pts: Vec<Complex64> = grid.points().into_iter().map(|(x, y)| Complex64::new(x, y)).collect();
    let values: Vec<Option<(f64, f64)>> = match (rational, nys) {
        (Some(s), _) => eval_field(&s.model, &p.spec.boundary, &pts).into_iter().map(|w| w.map(|w| (w.re, w.im))).collect(),
        (None, Some(n)) => {
            let inside: Vec<bool> = pts.iter().map(|&z| side_in_domain(&p.spec.boundary, z, p.spec.kind).ok() == Some(DomainSide::Inside)).collect();
            let sel: Vec<Complex64> = pts.iter().zip(&inside).filter(|(_, &k)| k).map(|(z, _)| *z).collect();
            let mut u = n.eval(&sel, NYSTROM_REFINE).into_iter();
            inside.iter().map(|&k| if k { u.next().map(|v| (v, f64::NAN)) } else { None }).collect()
        }
        (None, None) => vec![None; pts.len()],
    };
    let mut s = String::from("x,y,in_domain,u,v\n");
    for (z, v) in pts.iter().zip(values) {
        match v {
            Some((u, w)) => {
                let _ = writeln!(s, "{},{},1,{},{}", fmt(z.re), fmt(z.im), fmt(u), fmt(w));
            }
            None => {
                let _ = writeln!(s, "{},{},0,nan,nan", fmt(z.re), fmt(z.im));
            }
        }
    }
    s
}

fn write(dir: &Path, name: &str, text: &str, written: &mut Vec<String>) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    written.push(name.to_string());
    Ok(())
}

/// Runs a config; returns the report path.
pub fn run(cfg: &RunConfig, config_path: &Path) -> Result<PathBuf, CliError> {
    let p = build_problem(cfg)?;
    let want_rational = cfg.method != Method::Nystrom;
    let want_nystrom = cfg.method != Method::Rational;
    let (rat, nys) = rayon::join(
        || want_rational.then(|| rational(cfg, &p)).transpose(),
        || want_nystrom.then(|| nystrom_sweep(cfg, &p)).transpose(),
    );
    let (rat, nys) = (rat?, nys?);

    let dir = &cfg.outputs.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut report = Map::new();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    report.insert("timestamp".into(), json!(timestamp));
    report.insert("config".into(), json!(config_path.display().to_string()));
    report.insert("kind".into(), json!(p.spec.kind));
    report.insert("data".into(), json!(p.spec.data.label()));
    report.insert("method".into(), json!(format!("{:?}", cfg.method).to_lowercase()));
    report.insert("seed".into(), json!(cfg.seed));

    let mut rows = Vec::new();
    if let Some((main, r)) = &rat {
        let s = main.solution();
        let best = s.report.iterations.iter().find(|r| r.iteration == s.report.best_iteration);
        report.insert(
            "rational".into(),
            json!({
                "n_poles": p.spec.options.n_poles,
                "delta_e": s.report.delta_e,
                "delta_e_max": s.report.delta_e_max,
                "k": best.map(|r| r.k),
                "basis_count": basis_count(&s.model),
                "solve": s.report,
            }),
        );
        write(dir, &cfg.outputs.poles, &s.model.to_csv(), &mut written)?;
        if let Main::Large(l) = main {
            write(dir, "plan.csv", &l.plan.to_csv(), &mut written)?;
            report.insert(
                "cluster".into(),
                json!({
                    "k": l.plan.k,
                    "local": l.local,
                    "worst_local_delta_e": l.worst_local_delta_e(),
                    "system_shape": [l.system_shape.0, l.system_shape.1],
                    "wall_time_s": l.wall_time_s,
                }),
            );
        }
        rows.extend(r.iter().copied());
    }
    if let Some((_, r)) = &nys {
        report.insert(
            "nystrom".into(),
            Value::Array(r.iter().map(|r| json!({"n": r.n, "basis_count": r.basis_count, "delta_e": r.delta_e, "delta_e_max": r.delta_e_max})).collect()),
        );
        rows.extend(r.iter().copied());
    }
    if !rows.is_empty() {
        write(dir, &cfg.outputs.comparison, &comparison_csv(&rows), &mut written)?;
    }
    if let Some(grid) = &cfg.outputs.field {
        let text = field_csv(grid, &p, rat.as_ref().map(|(m, _)| m.solution()), nys.as_ref().and_then(|(s, _)| s.as_ref()));
        write(dir, &grid.file, &text, &mut written)?;
    }
    written.push(cfg.outputs.report.clone());
    report.insert("outputs".into(), json!(written));
    let text = serde_json::to_string_pretty(&Value::Object(report)).map_err(|e| CliError::Output(e.to_string()))?;
    let path = dir.join(&cfg.outputs.report);
    fs::write(&path, text + "\n").map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    Ok(path)
}
