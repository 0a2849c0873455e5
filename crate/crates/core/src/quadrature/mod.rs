//! Testing points and weights for the boundary inner product.

mod check;
mod prune;
mod rule;

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Boundary;

pub use check::{exactness_suite, ExactnessCase, ExactnessReport};
pub use prune::{default_epsilons, default_rhos, epsilon_from_error, PruneTable};
pub use rule::{elliptical_radius, joukowski_inv, rational_chebyshev_rule};
pub(crate) use rule::{rule_from_entries, Entry};

/// Knobs for [`build_boundary_rule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleOptions {
    /// Pruning tolerance.
    pub epsilon: f64,
    /// Lower bound on the number of poles at infinity per section.
    pub min_n_inf: usize,
    /// Poles whose tabulated degree is at most this are replaced by poles
    /// at infinity.
    pub max_prune_degree: f64,
    pub prune: bool,
}

impl Default for RuleOptions {
    fn default() -> Self {
        Self { epsilon: 1e-4, min_n_inf: 4, max_prune_degree: 32.0, prune: true }
    }
}

/// Concatenated per-section rules over the global parameter.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub section_of_node: Vec<usize>,
    /// `z(s_k)`.
    pub points: Vec<Complex64>,
    /// `dz/ds` at the nodes.
    pub tangents: Vec<Complex64>,
    /// Poles the rule was built for (basis poles first).
    pub pole_signature: Vec<Complex64>,
    /// Poles at infinity used on each section.
    pub n_inf: Vec<usize>,
    /// Parameter-plane poles kept (after pruning) on each section,
    /// counted with multiplicity.
    pub kept: Vec<usize>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }

    /// Contour index of each node.
    pub fn contour_of_node(&self, b: &Boundary) -> Vec<usize> {
        self.section_of_node.iter().map(|&m| b.contour_of_section(m)).collect()
    }

    /// Weighted inner product `sum_k w_k f_k g_k`.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    /// Debug dump: `section,s,weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("section,s,weight\n");
        for k in 0..self.len() {
            let _ = writeln!(s, "{},{:.17e},{:.17e}", self.section_of_node[k], self.nodes[k], self.weights[k]);
        }
        s
    }
}

struct SectionRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    n_inf: usize,
    kept: usize,
}

/// Tabulated degree for one parameter-plane root, or infinity when pruning
/// is off.
fn root_degree(table: &PruneTable, opts: &RuleOptions, rho: f64) -> f64 {
    if opts.prune {
        table.degree(rho, opts.epsilon)
    } else {
        f64::INFINITY
    }
}

fn section_rule(
    b: &Boundary,
    m: usize,
    active: &[Complex64],
    inactive: &[Complex64],
    log_centers: &[Complex64],
    table: &PruneTable,
    opts: &RuleOptions,
) -> Result<SectionRule> {
    let sec = &b.sections()[m];
    let mut entries = Vec::new();
    let mut dropped: f64 = 0.0;
    let poles: Vec<(Complex64, usize)> = active.iter().map(|&p| (p, 3)).chain(inactive.iter().map(|&p| (p, 1))).collect();
    let roots: Vec<Vec<Complex64>> = poles.par_iter().map(|&(zp, _)| Ok(sec.shifted_roots(zp)?.0)).collect::<Result<_>>()?;
    for (idx, (&(_, mult), roots)) in poles.iter().zip(roots).enumerate() {
        for alpha in roots {
            let a = joukowski_inv(alpha);
            let rho = 1.0 / a.norm();
            if !(rho - 1.0 > 1e-13) {
                return Err(Error::PoleOnBoundary { pole: idx, section: m });
            }
            let d = root_degree(table, opts, rho);
            if d <= opts.max_prune_degree {
                dropped = dropped.max(d);
            } else {
                entries.push(Entry { a, mult });
            }
        }
    }
    for &c in log_centers {
        let (roots, _) = sec.shifted_roots(c)?;
        for alpha in roots {
            let rho = elliptical_radius(alpha);
            if rho > 1.0 {
                let d = table.degree(rho, opts.epsilon).min(opts.max_prune_degree);
                dropped = dropped.max(d);
            }
        }
    }
    let n_inf = opts.min_n_inf.max(((dropped + 1.0) / 2.0).ceil() as usize);
    let kept = entries.iter().map(|e| e.mult).sum();
    let (x, w) = rule_from_entries(&entries, n_inf)?;
    let half = 0.5 * sec.width();
    Ok(SectionRule {
        nodes: x.iter().map(|&t| sec.to_global(t)).collect(),
        weights: w.iter().map(|&v| v * half).collect(),
        n_inf,
        kept,
    })
}

/// Builds the testing rule for the current poles.
///
/// `active` poles are the ones carrying basis functions (three parameter
/// poles per root: the basis function, its product with `1/Q`, and the
/// conjugate); `inactive` poles only enter through `1/Q` (one per root).
/// Log centers raise the number of poles at infinity as needed.
pub fn build_boundary_rule(
    b: &Boundary,
    active: &[Complex64],
    inactive: &[Complex64],
    log_centers: &[Complex64],
    table: &PruneTable,
    opts: &RuleOptions,
) -> Result<QuadratureRule> {
    let parts: Vec<SectionRule> = (0..b.section_count())
        .into_par_iter()
        .map(|m| section_rule(b, m, active, inactive, log_centers, table, opts))
        .collect::<Result<_>>()?;
    let mut rule = QuadratureRule {
        nodes: Vec::new(),
        weights: Vec::new(),
        section_of_node: Vec::new(),
        points: Vec::new(),
        tangents: Vec::new(),
        pole_signature: active.iter().chain(inactive).copied().collect(),
        n_inf: Vec::new(),
        kept: Vec::new(),
    };
    for (m, p) in parts.into_iter().enumerate() {
        let sec = &b.sections()[m];
        for (&s, &w) in p.nodes.iter().zip(&p.weights) {
            let t = sec.to_local(s);
            rule.nodes.push(s);
            rule.weights.push(w);
            rule.section_of_node.push(m);
            rule.points.push(sec.eval_local(t));
            rule.tangents.push(sec.deriv_local(t) * (2.0 / sec.width()));
        }
        rule.n_inf.push(p.n_inf);
        rule.kept.push(p.kept);
    }
    Ok(rule)
}

/// Pole-free rule with exactly `n_inf` poles at infinity on every section.
pub fn polynomial_rule(b: &Boundary, n_inf: usize) -> Result<QuadratureRule> {
    let opts = RuleOptions { min_n_inf: n_inf, prune: false, ..RuleOptions::default() };
    build_boundary_rule(b, &[], &[], &[], PruneTable::shipped(), &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RationalSection;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> Boundary {
        let v = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        Boundary::new(vec![(0..4).map(|i| RationalSection::line(v[i], v[(i + 1) % 4], (0.0, 1.0))).collect()]).unwrap()
    }

    #[test]
    fn section_weights_sum() {
        let b = square();
        let r = polynomial_rule(&b, 5).unwrap();
        assert_eq!(r.len(), 4 * 6);
        for m in 0..4 {
            let s: f64 = (0..r.len()).filter(|&k| r.section_of_node[k] == m).map(|k| r.weights[k]).sum();
            assert!((s - PI * 0.125).abs() < 1e-14);
        }
        assert!(r.nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn node_count_without_pruning() {
        let b = square();
        let opts = RuleOptions { min_n_inf: 3, prune: false, ..RuleOptions::default() };
        let act = [c(2.0, 0.5), c(-0.5, 0.5)];
        let ina = [c(0.5, 0.5)];
        let r = build_boundary_rule(&b, &act, &ina, &[], PruneTable::shipped(), &opts).unwrap();
        // K = M (N_inf + 1) + (3 N_out + N_in) sum L_m
        assert_eq!(r.len(), 4 * 4 + (3 * 2 + 1) * 4);
    }

    #[test]
    fn far_pole_is_pruned() {
        let b = square();
        let r = build_boundary_rule(&b, &[c(1e6, 0.0)], &[], &[], PruneTable::shipped(), &RuleOptions::default()).unwrap();
        assert!(r.kept.iter().all(|&k| k == 0));
        let near = build_boundary_rule(&b, &[c(0.5, -0.005)], &[], &[], PruneTable::shipped(), &RuleOptions::default()).unwrap();
        assert_eq!(near.kept[0], 3);
    }

    #[test]
    fn pole_on_boundary_rejected() {
        let b = square();
        let r = build_boundary_rule(&b, &[c(0.5, 0.0)], &[], &[], PruneTable::shipped(), &RuleOptions::default());
        assert!(matches!(r, Err(Error::PoleOnBoundary { .. })));
    }
}
