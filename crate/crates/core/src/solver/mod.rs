//! The outer iteration: solve for residues with the current poles, build the
//! complex boundary function, refit it to move the poles, repeat.

mod data;
mod metrics;
mod neumann;

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{assemble_dirichlet, assemble_neumann, dirichlet_model, neumann_model, PoleSet, PotentialModel, ProblemKind};
use crate::error::{Error, Result};
use crate::geometry::{Boundary, DomainSide};
use crate::numerics::{pair_conjugates, LsqOptions};
use crate::quadrature::{build_boundary_rule, epsilon_from_error, polynomial_rule, PruneTable, QuadratureRule, RuleOptions};
use crate::ratfit::{initial_poles, relocate, FitInput, FitMethod, DEFAULT_SWITCH_RCOND};

pub use data::{BoundaryData, BoundaryPoint};
pub use metrics::{delta_e, delta_e_max, eval_field, l2_norm, relative_error, ErrorValue, DENSE_SAMPLES};
pub use neumann::{log_normal_derivative, neumann_preprocess, NeumannPrep, COMPAT_TOL};

/// Adaptive pole addition: add a pole when the spread of the last `window`
/// errors drops below `threshold` times their mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveOptions {
    pub window: usize,
    pub threshold: f64,
    pub max_poles: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { window: 5, threshold: 0.5e-2, max_poles: 200 }
    }
}

/// Where the first poles come from.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialGuess {
    /// Doubled-order rational fit of the data.
    #[default]
    Fit,
    Given(Vec<Complex64>),
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub n_poles: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub adaptive: Option<AdaptiveOptions>,
    pub initial: InitialGuess,
    /// Log centers per contour (exterior problems); defaults to an interior
    /// point of each contour.
    pub log_centers: Option<Vec<Complex64>>,
    pub rule: RuleOptions,
    /// Prune tolerance follows the previous error when set; otherwise
    /// `rule.epsilon` is used throughout.
    pub epsilon_from_error: bool,
    pub lsq: LsqOptions,
    pub switch_rcond: f64,
    /// Relative tolerance for snapping near-conjugate pole pairs.
    pub conj_tol: f64,
    /// Dense boundary samples for the maximum error; 0 skips it.
    pub dense_samples: usize,
    /// Also record the maximum error of every iterate (costly).
    pub track_max_error: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n_poles: 10,
            tol: 1e-13,
            max_iter: 100,
            adaptive: None,
            initial: InitialGuess::Fit,
            log_centers: None,
            rule: RuleOptions::default(),
            epsilon_from_error: true,
            lsq: LsqOptions::default(),
            switch_rcond: DEFAULT_SWITCH_RCOND,
            conj_tol: 1e-9,
            dense_samples: DENSE_SAMPLES,
            track_max_error: false,
        }
    }
}

/// A boundary-value problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub boundary: Boundary,
    pub data: BoundaryData,
    pub options: SolverOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    PolesStationary,
    MaxIter,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub delta_e: f64,
    pub n_out: usize,
    pub n_in: usize,
    /// Testing points.
    pub k: usize,
    pub epsilon: f64,
    /// Fitter that produced this iteration's poles (none for the initial
    /// guess).
    pub method: Option<FitMethod>,
    pub rank: usize,
    pub cond_estimate: f64,
    /// Only with `track_max_error`.
    pub delta_e_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub kind: ProblemKind,
    pub data: String,
    pub iterations: Vec<IterationRecord>,
    pub best_iteration: usize,
    pub delta_e: f64,
    pub delta_e_absolute: bool,
    pub delta_e_max: Option<f64>,
    pub stop_reason: StopReason,
    pub stall_message: Option<String>,
    /// Initial poles placed by the fallback rule.
    pub padded_initial: usize,
    /// Poles dropped as being at infinity or on the boundary.
    pub dropped_poles: usize,
    pub poles_added: usize,
    pub log_coeffs: Vec<f64>,
    pub neumann_compat_residual: Option<f64>,
    pub wall_time_s: f64,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub model: PotentialModel,
    /// Pole set of the returned iterate (inside poles have no residues).
    pub poles: PoleSet,
    pub report: SolveReport,
    /// Testing rule of the returned iterate.
    pub rule: QuadratureRule,
    pub neumann: Option<NeumannPrep>,
}

/// Everything one iteration produces.
struct Step {
    model: PotentialModel,
    poles: PoleSet,
    rule: QuadratureRule,
    /// Real data at the nodes: `f` (Dirichlet) or `F` (Neumann).
    target: Vec<f64>,
    /// Model values compared with `target`.
    approx: Vec<f64>,
    delta_e: metrics::ErrorValue,
    rank: usize,
    cond: f64,
}

struct Ctx<'a> {
    spec: &'a ProblemSpec,
    table: &'a PruneTable,
    log_centers: Vec<Complex64>,
    neumann: Option<NeumannPrep>,
}

fn boundary_points(b: &Boundary, rule: &QuadratureRule, kind: ProblemKind) -> Vec<BoundaryPoint> {
    (0..rule.len())
        .map(|k| BoundaryPoint::new(rule.nodes[k], rule.points[k], rule.tangents[k], b.contour_of_section(rule.section_of_node[k]), kind))
        .collect()
}

impl Ctx<'_> {
    fn kind(&self) -> ProblemKind {
        self.spec.kind
    }

    fn b(&self) -> &Boundary {
        &self.spec.boundary
    }

    /// Data the solver fits at the rule nodes.
    fn targets(&self, rule: &QuadratureRule) -> Result<Vec<f64>> {
        match &self.neumann {
            Some(prep) => rule.nodes.iter().map(|&s| prep.eval(self.b(), s)).collect(),
            None => {
                let pts = boundary_points(self.b(), rule, self.kind());
                let f: Vec<f64> = pts.iter().map(|p| self.spec.data.eval(p)).collect();
                if let Some(i) = f.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(i));
                }
                Ok(f)
            }
        }
    }

    fn step(&self, poles: PoleSet, epsilon: f64) -> Result<Step> {
        let opts = RuleOptions { epsilon, ..self.spec.options.rule };
        let outside = poles.outside();
        let rule_logs: &[Complex64] = if self.kind() == ProblemKind::ExteriorDirichlet { &self.log_centers } else { &[] };
        let rule = build_boundary_rule(self.b(), &outside, &poles.inside(), rule_logs, self.table, &opts)?;
        let target = self.targets(&rule)?;
        let lsq = self.spec.options.lsq;
        let (model, rank, cond) = match self.kind() {
            ProblemKind::ExteriorNeumann => {
                let prep = self.neumann.as_ref().expect("neumann prep");
                let con = rule.contour_of_node(self.b());
                let sys = assemble_neumann(&rule, &outside, &target, &con, self.b().contour_count())?;
                let sol = sys.solve(lsq)?;
                (neumann_model(&outside, &sol.x, &sys.map, &prep.log_coeffs, &prep.log_centers), sol.rank, sol.cond_estimate)
            }
            kind => {
                let logs: &[Complex64] = if kind == ProblemKind::ExteriorDirichlet { &self.log_centers } else { &[] };
                let sys = assemble_dirichlet(&rule, &outside, &target, logs)?;
                let sol = sys.solve(lsq)?;
                (dirichlet_model(kind, &outside, logs, &sol.x, &sys.map), sol.rank, sol.cond_estimate)
            }
        };
        let approx: Vec<f64> = match self.kind() {
            ProblemKind::ExteriorNeumann => {
                let con = rule.contour_of_node(self.b());
                rule.points.iter().zip(&con).map(|(&z, &j)| model.eval_rational(z).im - model.v_consts[j]).collect()
            }
            _ => rule.points.iter().map(|&z| model.eval(z).map(|w| w.re)).collect::<Result<_>>()?,
        };
        if let Some(i) = approx.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let delta_e = metrics::relative_error(&rule, &approx, &target);
        if !delta_e.value.is_finite() {
            return Err(Error::NonFinite(0));
        }
        Ok(Step { model, poles, rule, target, approx, delta_e, rank, cond })
    }

    /// Samples of the complex function whose poles are refitted.
    fn w_hat(&self, st: &Step) -> Vec<Complex64> {
        let m = &st.model;
        match self.kind() {
            ProblemKind::ExteriorNeumann => {
                let con = st.rule.contour_of_node(self.b());
                st.rule
                    .points
                    .iter()
                    .zip(&st.target)
                    .zip(&con)
                    .map(|((&z, &f), &j)| Complex64::new(m.eval_rational(z).re, f + m.v_consts[j]))
                    .collect()
            }
            _ => st
                .rule
                .points
                .iter()
                .zip(&st.target)
                .map(|(&z, &f)| {
                    let logs = m.log_part(z).map(|l| l.re).unwrap_or(0.0);
                    Complex64::new(f - logs, m.eval_rational(z).im)
                })
                .collect(),
        }
    }

    /// A new pole across the tangent from the worst-fit node.
    fn extra_pole(&self, st: &Step) -> Result<Option<Complex64>> {
        let r = &st.rule;
        let k = (0..r.len())
            .max_by(|&a, &b| (st.approx[a] - st.target[a]).abs().total_cmp(&(st.approx[b] - st.target[b]).abs()))
            .ok_or(Error::EmptyBasis)?;
        let diam = self.b().diameter();
        let prev = if k > 0 && r.section_of_node[k - 1] == r.section_of_node[k] { r.points[k - 1] } else { r.points[k] };
        let next = if k + 1 < r.len() && r.section_of_node[k + 1] == r.section_of_node[k] { r.points[k + 1] } else { r.points[k] };
        let mut h = (0.5 * (next - prev).norm()).max(1e-3 * diam);
        let p = BoundaryPoint::new(r.nodes[k], r.points[k], r.tangents[k], 0, self.kind());
        for _ in 0..20 {
            let z = p.z + p.normal * h;
            if crate::basis::side_in_domain(self.b(), z, self.kind())? == DomainSide::Outside {
                return Ok(Some(z));
            }
            h *= 0.5;
        }
        Ok(None)
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mu = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
    (mu, var.sqrt())
}

/// Largest distance from a new pole to the nearest old one (both ways).
fn pole_motion(old: &[Complex64], new: &[Complex64]) -> f64 {
    if old.len() != new.len() {
        return f64::INFINITY;
    }
    let d = |a: &[Complex64], b: &[Complex64]| {
        a.iter().map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    d(old, new).max(d(new, old))
}

/// Default log centers: an interior point of each contour.
pub fn default_log_centers(b: &Boundary) -> Result<Vec<Complex64>> {
    (0..b.contour_count()).map(|j| b.interior_point(j)).collect()
}

/// Drops poles at infinity or on the boundary; returns the count dropped.
fn sanitize(b: &Boundary, kind: ProblemKind, poles: Vec<Complex64>, diam: f64, conj_tol: f64) -> Result<(PoleSet, usize)> {
    let n0 = poles.len();
    let mut kept: Vec<Complex64> = poles.into_iter().filter(|z| z.norm() <= 1e6 * diam.max(1e-300) && z.re.is_finite() && z.im.is_finite()).collect();
    pair_conjugates(&mut kept, conj_tol, diam);
    let ps = PoleSet::classify(b, kept, kind)?;
    let (poles, side): (Vec<_>, Vec<_>) = ps.poles.into_iter().zip(ps.side).filter(|(_, s)| *s != DomainSide::OnBoundary).unzip();
    let dropped = n0 - poles.len();
    Ok((PoleSet { poles, side }, dropped))
}

/// Runs the pole-relocation iteration and returns the best iterate.
pub fn solve(spec: &ProblemSpec) -> Result<Solution> {
    solve_with_table(spec, PruneTable::shipped())
}

pub fn solve_with_table(spec: &ProblemSpec, table: &PruneTable) -> Result<Solution> {
    let t0 = Instant::now();
    let b = &spec.boundary;
    let o = &spec.options;
    let kind = spec.kind;
    let diam = b.diameter();
    let log_centers = if kind.is_exterior() {
        match &o.log_centers {
            Some(c) if c.len() == b.contour_count() => c.clone(),
            Some(c) => return Err(Error::DimensionMismatch(format!("{} log centers for {} contours", c.len(), b.contour_count()))),
            None => default_log_centers(b)?,
        }
    } else {
        Vec::new()
    };
    let neumann = if kind == ProblemKind::ExteriorNeumann { Some(neumann_preprocess(b, &spec.data, &log_centers)?) } else { None };
    let ctx = Ctx { spec, table, log_centers, neumann };

    let mut padded = 0;
    let first = match &o.initial {
        InitialGuess::Given(p) => p.clone(),
        InitialGuess::Fit if o.n_poles == 0 => Vec::new(),
        InitialGuess::Fit => {
            let rule = polynomial_rule(b, initial_rule_order(o.n_poles, b.section_count()).max(o.rule.min_n_inf))?;
            let f = ctx.targets(&rule)?;
            let init = initial_poles(b, &rule, &f, o.n_poles, kind)?;
            padded = init.padded;
            init.poles.poles
        }
    };
    let (mut poles, mut dropped) = sanitize(b, kind, first, diam, o.conj_tol)?;
    let mut records = Vec::new();
    let mut best: Option<(usize, Step)> = None;
    let mut history: Vec<f64> = Vec::new();
    let mut added = 0;
    let mut method = None;
    let mut stall = None;
    let mut prev_de = None;
    let mut stop = StopReason::MaxIter;
    for it in 0..o.max_iter.max(1) {
        let eps = if o.epsilon_from_error { epsilon_from_error(prev_de).min(o.rule.epsilon) } else { o.rule.epsilon };
        let st = ctx.step(poles.clone(), eps)?;
        let de = st.delta_e.value;
        records.push(IterationRecord {
            iteration: it,
            delta_e: de,
            n_out: st.poles.n_out(),
            n_in: st.poles.n_in(),
            k: st.rule.len(),
            epsilon: eps,
            method,
            rank: st.rank,
            cond_estimate: st.cond,
            delta_e_max: if o.track_max_error && o.dense_samples > 0 {
                Some(delta_e_max(&st.model, b, &spec.data, ctx.neumann.as_ref(), o.dense_samples)?.value)
            } else {
                None
            },
        });
        log::debug!("iteration {it}: dE {de:.3e}, {} out, {} in, K {}", st.poles.n_out(), st.poles.n_in(), st.rule.len());
        prev_de = Some(de);
        if de <= o.tol {
            stop = StopReason::Converged;
        }
        let last = it + 1 >= o.max_iter;
        let mut next = None;
        if stop != StopReason::Converged && !last && !st.poles.is_empty() {
            let samples = ctx.w_hat(&st);
            let inp = FitInput { points: &st.rule.points, weights: &st.rule.weights, samples: &samples, poles: &st.poles.poles, order: st.poles.len() };
            match relocate(&inp, o.switch_rcond) {
                Ok(fit) => {
                    method = Some(fit.method);
                    next = Some(fit.new_poles);
                }
                Err(e) => {
                    stall = Some(e.to_string());
                    stop = StopReason::Stalled;
                }
            }
        }
        let mut new_poles = next.unwrap_or_else(|| st.poles.poles.clone());
        if let Some(ad) = o.adaptive {
            history.push(de);
            if history.len() >= ad.window && stop != StopReason::Converged {
                let (mu, sd) = mean_std(&history[history.len() - ad.window..]);
                if sd < mu * ad.threshold && new_poles.len() < ad.max_poles {
                    if let Some(z) = ctx.extra_pole(&st)? {
                        new_poles.push(z);
                        added += 1;
                        history.clear();
                    }
                }
            }
        }
        let moved = pole_motion(&st.poles.poles, &new_poles);
        if best.as_ref().is_none_or(|(_, b)| de < b.delta_e.value) {
            best = Some((it, st));
        }
        if stop != StopReason::MaxIter || last {
            break;
        }
        if moved < 1e-12 * diam {
            stop = StopReason::PolesStationary;
            break;
        }
        let (p, d) = sanitize(b, kind, new_poles, diam, o.conj_tol)?;
        poles = p;
        dropped += d;
    }
    let (best_it, st) = best.expect("at least one iteration");
    let dem = if o.dense_samples > 0 {
        Some(delta_e_max(&st.model, b, &spec.data, ctx.neumann.as_ref(), o.dense_samples)?.value)
    } else {
        None
    };
    let report = SolveReport {
        kind,
        data: spec.data.label().to_string(),
        iterations: records,
        best_iteration: best_it,
        delta_e: st.delta_e.value,
        delta_e_absolute: st.delta_e.absolute,
        delta_e_max: dem,
        stop_reason: stop,
        stall_message: stall,
        padded_initial: padded,
        dropped_poles: dropped,
        poles_added: added,
        log_coeffs: st.model.log_coeffs.clone(),
        neumann_compat_residual: ctx.neumann.as_ref().map(|n| n.compat_residual),
        wall_time_s: t0.elapsed().as_secs_f64(),
    };
    Ok(Solution { model: st.model, poles: st.poles, report, rule: st.rule, neumann: ctx.neumann })
}

/// Poles at infinity per section for the rule of the initial doubled-order
/// fit: about `8n` nodes in total (twice the unknowns of the fit), and at
/// least 32 per section.
pub fn initial_rule_order(n: usize, sections: usize) -> usize {
    (8 * n + 2).div_ceil(sections.max(1)).max(32)
}
