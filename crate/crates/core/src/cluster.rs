//! Large-scale driver: cluster the curves, optimize poles locally per
//! cluster (with a buffer of nearby curves), then solve once globally.

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{point_in_domain, Boundary, DomainSide};
use crate::quadrature::PruneTable;
use crate::solver::{solve_with_table, BoundaryData, BoundaryPoint, InitialGuess, ProblemSpec, Solution, SolverOptions};

/// Result of Lloyd's algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Complex64>,
    /// Within-cluster sum of squares after each iteration.
    pub sse: Vec<f64>,
}

fn nearest(z: Complex64, centers: &[Complex64]) -> (usize, f64) {
    centers.iter().enumerate().map(|(i, c)| (i, (z - c).norm_sqr())).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

/// k-means with k-means++ seeding. An empty cluster is reseeded at the
/// point farthest from its current centroid.
pub fn kmeans(points: &[Complex64], k: usize, seed: u64, max_iter: usize) -> Result<KMeans> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("cannot form {k} clusters from {n} points")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![points[rng.random_range(0..n)]];
    while centers.len() < k {
        let d: Vec<f64> = points.iter().map(|&z| nearest(z, &centers).1).collect();
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random_range(0.0..total);
            d.iter().position(|&v| {
                r -= v;
                r < 0.0
            })
            .unwrap_or(n - 1)
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[pick]);
    }
    let mut assignment = vec![usize::MAX; n];
    let mut sse = Vec::new();
    for _ in 0..max_iter.max(1) {
        let next: Vec<usize> = points.iter().map(|&z| nearest(z, &centers).0).collect();
        let changed = next != assignment;
        assignment = next;
        for c in 0..k {
            let members: Vec<Complex64> = (0..n).filter(|&i| assignment[i] == c).map(|i| points[i]).collect();
            if members.is_empty() {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = (points[a] - centers[assignment[a]]).norm_sqr();
                        let db = (points[b] - centers[assignment[b]]).norm_sqr();
                        da.total_cmp(&db)
                    })
                    .expect("points not empty");
                centers[c] = points[far];
                assignment[far] = c;
            } else {
                centers[c] = members.iter().sum::<Complex64>() / members.len() as f64;
            }
        }
        sse.push((0..n).map(|i| (points[i] - centers[assignment[i]]).norm_sqr()).sum());
        if !changed {
            break;
        }
    }
    Ok(KMeans { assignment, centroids: centers, sse })
}

/// Partition of the curves into clusters, each with a buffer region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPlan {
    pub k: usize,
    /// Cluster id per curve.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Complex64>,
    /// Buffer curves per cluster (never members of it).
    pub buffers: Vec<Vec<usize>>,
    /// Per curve: twice the distance to the nearest other curve centroid.
    pub buffer_radius: Vec<f64>,
}

impl ClusterPlan {
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == c).collect()
    }

    /// One row per curve: `curve,cluster,buffer_of` with the buffering
    /// clusters separated by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("curve,cluster,buffer_of\n");
        for (i, &c) in self.assignment.iter().enumerate() {
            let of: Vec<String> = (0..self.k).filter(|&q| self.buffers[q].contains(&i)).map(|q| q.to_string()).collect();
            let _ = writeln!(out, "{i},{c},{}", of.join(";"));
        }
        out
    }
}

/// Clusters the curve centroids and adds to each cluster every other curve
/// whose centroid lies within the buffer radius of a member's centroid.
pub fn plan_with_buffers(curves: &[Complex64], k: usize, seed: u64) -> Result<ClusterPlan> {
    let km = kmeans(curves, k, seed, 300)?;
    let n = curves.len();
    let buffer_radius: Vec<f64> = (0..n)
        .map(|i| {
            let d = (0..n).filter(|&j| j != i).map(|j| (curves[i] - curves[j]).norm()).fold(f64::INFINITY, f64::min);
            if d.is_finite() {
                2.0 * d
            } else {
                0.0
            }
        })
        .collect();
    let buffers = (0..k)
        .map(|c| {
            (0..n)
                .filter(|&j| km.assignment[j] != c)
                .filter(|&j| (0..n).any(|m| km.assignment[m] == c && (curves[j] - curves[m]).norm() <= buffer_radius[m]))
                .collect()
        })
        .collect();
    Ok(ClusterPlan { k, assignment: km.assignment, centroids: km.centroids, buffers, buffer_radius })
}

/// Settings of [`solve_large`].
#[derive(Debug, Clone)]
pub struct ClusterOptions {
    pub k: usize,
    pub seed: u64,
    pub poles_per_curve: usize,
    /// Local stopping tolerance on Delta E.
    pub tol: f64,
    pub max_iter: usize,
    /// Options for the local and global solves; pole count, tolerance,
    /// iteration limit and initial guess are overridden.
    pub solver: SolverOptions,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self { k: 10, seed: 1, poles_per_curve: 3, tol: 1e-2, max_iter: 100, solver: SolverOptions::default() }
    }
}

/// Outcome of one cluster's local solve.
#[derive(Debug, Clone, Serialize)]
pub struct LocalReport {
    pub cluster: usize,
    pub members: usize,
    pub buffers: usize,
    pub delta_e: f64,
    pub iterations: usize,
    /// Poles kept for the global solve.
    pub kept_poles: usize,
}

/// Result of [`solve_large`]. `global` is a one-iteration solve with the
/// merged poles.
#[derive(Debug, Clone)]
pub struct LargeSolution {
    pub plan: ClusterPlan,
    pub local: Vec<LocalReport>,
    pub poles: Vec<Complex64>,
    pub global: Solution,
    /// Rows and columns of the global least-squares system.
    pub system_shape: (usize, usize),
    pub wall_time_s: f64,
}

impl LargeSolution {
    pub fn worst_local_delta_e(&self) -> f64 {
        self.local.iter().map(|l| l.delta_e).fold(0.0, f64::max)
    }
}

/// Data on a sub-boundary, evaluated through the parent's contour ids and
/// parameter.
fn restricted_data(parent: &Boundary, sub: &Boundary, ids: &[usize], data: &BoundaryData) -> BoundaryData {
    let parent_secs: Vec<usize> = ids.iter().flat_map(|&j| parent.contour_sections(j)).collect();
    let parent = parent.clone();
    let sub = sub.clone();
    let ids = ids.to_vec();
    let data = data.clone();
    BoundaryData::from_fn(data.label().to_string(), move |p: &BoundaryPoint| {
        let mut q = *p;
        q.contour = ids[p.contour];
        if let Ok(m) = sub.section_at(p.s) {
            let t = sub.sections()[m].to_local(p.s);
            q.s = parent.sections()[parent_secs[m]].to_global(t);
        }
        data.eval(&q)
    })
}

/// Curve of `ids` enclosing `z`, if any.
fn owner(singles: &[(usize, Boundary)], z: Complex64) -> Option<usize> {
    singles.iter().find(|(_, b)| matches!(point_in_domain(b, z), Ok(DomainSide::Inside))).map(|(j, _)| *j)
}

/// Clustered solve of an exterior problem over many curves.
pub fn solve_large(spec: &ProblemSpec, opts: &ClusterOptions) -> Result<LargeSolution> {
    solve_large_with_table(spec, opts, PruneTable::shipped())
}

pub fn solve_large_with_table(spec: &ProblemSpec, opts: &ClusterOptions, table: &PruneTable) -> Result<LargeSolution> {
    let t0 = Instant::now();
    if !spec.kind.is_exterior() {
        return Err(Error::InvalidInput("clustered solves need an exterior problem".into()));
    }
    let b = &spec.boundary;
    let n = b.contour_count();
    let centroids: Vec<Complex64> = (0..n).map(|j| b.contour_centroid(j)).collect();
    let plan = plan_with_buffers(&centroids, opts.k.min(n), opts.seed)?;
    let singles: Vec<Boundary> = (0..n).map(|j| b.single_contour(j)).collect::<Result<_>>()?;

    let local: Vec<(LocalReport, Vec<Complex64>)> = (0..plan.k)
        .into_par_iter()
        .map(|c| {
            let members = plan.members(c);
            let ids: Vec<usize> = members.iter().chain(&plan.buffers[c]).copied().collect();
            let run = || -> Result<(LocalReport, Vec<Complex64>)> {
                let sub = b.subset(&ids)?;
                let data = restricted_data(b, &sub, &ids, &spec.data);
                let options = SolverOptions {
                    n_poles: opts.poles_per_curve * ids.len(),
                    tol: opts.tol,
                    max_iter: opts.max_iter,
                    initial: InitialGuess::Fit,
                    dense_samples: 0,
                    log_centers: None,
                    ..opts.solver.clone()
                };
                let sol = solve_with_table(&ProblemSpec { kind: spec.kind, boundary: sub, data, options }, table)?;
                let mine: Vec<(usize, Boundary)> = members.iter().map(|&j| (j, singles[j].clone())).collect();
                let kept: Vec<Complex64> = sol.poles.poles.iter().copied().filter(|&z| owner(&mine, z).is_some()).collect();
                let report = LocalReport {
                    cluster: c,
                    members: members.len(),
                    buffers: plan.buffers[c].len(),
                    delta_e: sol.report.delta_e,
                    iterations: sol.report.iterations.len(),
                    kept_poles: kept.len(),
                };
                Ok((report, kept))
            };
            run().map_err(|e| Error::Cluster { cluster: c, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(local.len());
    let mut poles = Vec::new();
    for (r, p) in local {
        reports.push(r);
        poles.extend(p);
    }
    let options = SolverOptions { initial: InitialGuess::Given(poles.clone()), max_iter: 1, adaptive: None, ..opts.solver.clone() };
    let global = solve_with_table(&ProblemSpec { kind: spec.kind, boundary: b.clone(), data: spec.data.clone(), options }, table)?;
    let rows = global.rule.len();
    // Neumann: one v_j per curve. Dirichlet: a0 and J - 1 log columns.
    let cols = 2 * global.poles.n_out() + n;
    Ok(LargeSolution { plan, local: reports, poles, global, system_shape: (rows, cols), wall_time_s: t0.elapsed().as_secs_f64() })
}
