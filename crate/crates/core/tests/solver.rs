use laplace_rf::basis::ProblemKind;
use laplace_rf::gallery::{self, circle, ellipse, pole_data};
use laplace_rf::geometry::DomainSide;
use laplace_rf::ratfit::{irf_step, vf_step, FitInput, VfOutcome};
use laplace_rf::solver::*;
use laplace_rf::Complex64;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn spec(kind: ProblemKind, boundary: laplace_rf::geometry::Boundary, data: BoundaryData, options: SolverOptions) -> ProblemSpec {
    ProblemSpec { kind, boundary, data, options }
}

fn ellipse_problem(n: usize) -> ProblemSpec {
    let g = gallery::problem_by_name("ellipse-poles", &Default::default()).unwrap();
    spec(g.kind, g.boundary, g.data, SolverOptions { n_poles: n, ..Default::default() })
}

#[test]
fn constant_data_is_exact() {
    let b = ellipse(1.0, 0.5).unwrap();
    let s = solve(&spec(ProblemKind::InteriorDirichlet, b, BoundaryData::from_position("one", |_| 1.0), SolverOptions { n_poles: 4, ..Default::default() }))
        .unwrap();
    assert!(s.report.delta_e < 1e-13);
    let w = s.model.eval(c(0.2, 0.1)).unwrap();
    assert!((w.re - 1.0).abs() < 1e-12);
}

#[test]
fn neumann_source_sink_pair() {
    // Flux 1/R out of one circle and into the other: unit source and sink,
    // A_j = -(1/2 pi) int_j f.
    let r = 0.7;
    let b = laplace_rf::geometry::Boundary::new(vec![
        gallery::ellipse_sections(c(-1.0, 0.0), r, r, 0.0),
        gallery::ellipse_sections(c(1.0, 0.2), r, r, 0.0),
    ])
    .unwrap();
    let data = BoundaryData::from_fn("pair", move |p: &BoundaryPoint| if p.contour == 0 { 1.0 / r } else { -1.0 / r });
    let s = solve(&spec(ProblemKind::ExteriorNeumann, b, data, SolverOptions { n_poles: 6, ..Default::default() })).unwrap();
    assert!((s.model.log_coeffs[0] + 1.0).abs() < 1e-12, "{:?}", s.model.log_coeffs);
    assert!((s.model.log_coeffs[1] - 1.0).abs() < 1e-12, "{:?}", s.model.log_coeffs);
}

#[test]
fn net_flux_is_rejected() {
    let b = circle(0.7, c(0.0, 0.0)).unwrap();
    let r = solve(&spec(ProblemKind::ExteriorNeumann, b, BoundaryData::from_position("flux", |_| 1.0), SolverOptions::default()));
    assert!(matches!(r, Err(laplace_rf::Error::Incompatible(_))));
}

#[test]
fn uniform_flow_past_cylinder() {
    let r = 1.3;
    let b = circle(r, c(0.0, 0.0)).unwrap();
    let s = solve(&spec(ProblemKind::ExteriorNeumann, b, gallery::uniform_flow_data(), SolverOptions { n_poles: 4, ..Default::default() })).unwrap();
    assert!(s.model.log_coeffs[0].abs() < 1e-12);
    assert!(s.report.delta_e < 1e-10, "{}", s.report.delta_e);
    // Disturbance potential R^2 Re(1/z), up to a constant.
    let exact = |z: Complex64| (r * r / z).re;
    let (z1, z2) = (c(2.0, 0.5), c(-1.0, 3.0));
    let u = |z| s.model.eval(z).unwrap().re;
    assert!(((u(z1) - u(z2)) - (exact(z1) - exact(z2))).abs() < 1e-9);
}

#[test]
fn cauchy_riemann_by_differences() {
    let s = solve(&ellipse_problem(7)).unwrap();
    let h = 1e-5;
    for z in [c(0.1, 0.1), c(-0.5, 0.2), c(0.7, -0.2)] {
        let w = |z: Complex64| s.model.eval(z).unwrap();
        let dx = (w(z + h) - w(z - h)) / (2.0 * h);
        let dy = (w(z + c(0.0, h)) - w(z - c(0.0, h))) / (2.0 * h);
        assert!((dx.re - dy.im).abs() < 1e-6, "{dx} {dy}");
        assert!((dx.im + dy.re).abs() < 1e-6, "{dx} {dy}");
        // And W' from the model agrees.
        let d = s.model.derivative(z);
        assert!((d - dx).norm() < 1e-6);
    }
}

#[test]
fn maximum_principle() {
    let p = ellipse_problem(7);
    let s = solve(&p).unwrap();
    let fmax = p.boundary.sample_uniform(4000).iter().map(|&(sv, _)| p.data.eval(&BoundaryPoint::at(&p.boundary, sv, p.kind).unwrap())).fold(f64::NEG_INFINITY, f64::max);
    let fmin = p.boundary.sample_uniform(4000).iter().map(|&(sv, _)| p.data.eval(&BoundaryPoint::at(&p.boundary, sv, p.kind).unwrap())).fold(f64::INFINITY, f64::min);
    let grid: Vec<Complex64> = (0..41).flat_map(|i| (0..41).map(move |j| c(-1.0 + 0.05 * i as f64, -0.5 + 0.025 * j as f64))).collect();
    let vals = eval_field(&s.model, &p.boundary, &grid);
    let inside: Vec<f64> = vals.iter().flatten().map(|w| w.re).collect();
    assert!(inside.len() > 500);
    let slack = 1e-10 * (fmax - fmin);
    assert!(inside.iter().all(|&u| u <= fmax + slack && u >= fmin - slack));
}

#[test]
fn field_masks_points_outside() {
    let p = ellipse_problem(7);
    let s = solve(&p).unwrap();
    let v = eval_field(&s.model, &p.boundary, &[c(0.0, 0.0), c(3.0, 0.0), c(1.0, 0.0)]);
    assert!(v[0].is_some());
    assert!(v[1].is_none());
    assert!(v[2].is_none());
}

#[test]
fn reruns_are_identical() {
    let a = solve(&ellipse_problem(6)).unwrap();
    let b = solve(&ellipse_problem(6)).unwrap();
    assert_eq!(a.poles.poles, b.poles.poles);
    assert_eq!(a.model.residues, b.model.residues);
    let strip = |r: &SolveReport| SolveReport { wall_time_s: 0.0, ..r.clone() }.to_json();
    assert_eq!(strip(&a.report), strip(&b.report));
}

#[test]
fn pole_order_does_not_matter() {
    let p = ellipse_problem(7);
    let first = solve(&spec(p.kind, p.boundary.clone(), p.data.clone(), SolverOptions { max_iter: 5, ..p.options.clone() })).unwrap();
    let mut rev = first.poles.poles.clone();
    rev.reverse();
    let run = |poles: Vec<Complex64>| {
        let o = SolverOptions { initial: InitialGuess::Given(poles), max_iter: 1, ..p.options.clone() };
        solve(&spec(p.kind, p.boundary.clone(), p.data.clone(), o)).unwrap()
    };
    let a = run(first.poles.poles.clone());
    let b = run(rev);
    assert!((a.report.delta_e - b.report.delta_e).abs() <= 1e-10 * a.report.delta_e.max(1e-16));
    for z in [c(0.1, 0.2), c(-0.4, -0.1)] {
        assert!((a.model.eval(z).unwrap() - b.model.eval(z).unwrap()).norm() < 1e-10);
    }
}

#[test]
fn symmetric_problem_gives_conjugate_closed_poles() {
    let b = ellipse(1.0, 0.6).unwrap();
    let src = vec![c(1.6, 0.9), c(1.6, -0.9), c(-1.4, 0.5), c(-1.4, -0.5)];
    let data = pole_data(src, vec![c(1.0, 0.0); 4]);
    let s = solve(&spec(ProblemKind::InteriorDirichlet, b, data, SolverOptions { n_poles: 6, ..Default::default() })).unwrap();
    // Inside poles carry no basis function and are only loosely determined.
    let out = s.poles.outside();
    assert!(!out.is_empty());
    for &z in &out {
        let d = out.iter().map(|&w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-8, "{z} has no conjugate partner");
    }
}

#[test]
fn pole_sides_are_consistent() {
    let p = ellipse_problem(6);
    let s = solve(&p).unwrap();
    assert_eq!(s.poles.n_out() + s.poles.n_in(), s.poles.len());
    for (&z, &side) in s.poles.poles.iter().zip(&s.poles.side) {
        assert_eq!(laplace_rf::basis::side_in_domain(&p.boundary, z, ProblemKind::InteriorDirichlet).unwrap(), side);
        assert_ne!(side, DomainSide::OnBoundary);
    }
}

/// Samples of `sum a_k / (z - p_k)` on a circle.
fn exact_rational(poles: &[Complex64], res: &[Complex64]) -> (Vec<Complex64>, Vec<f64>, Vec<Complex64>) {
    let n = 80;
    let pts: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.3) / n as f64)).collect();
    let w = vec![2.0 * PI / n as f64; n];
    let f = pts.iter().map(|&z| poles.iter().zip(res).map(|(p, a)| a / (z - p)).sum()).collect();
    (pts, w, f)
}

#[test]
fn exact_poles_are_fixed_points_of_both_fitters() {
    let poles = vec![c(1.5, 0.3), c(-0.4, 1.8), c(0.2, -2.2), c(-1.9, -0.7)];
    let res = vec![c(1.0, 0.5), c(-0.3, 1.0), c(0.7, 0.0), c(0.2, -0.4)];
    let (pts, w, f) = exact_rational(&poles, &res);
    let inp = FitInput { points: &pts, weights: &w, samples: &f, poles: &poles, order: poles.len() };
    let close = |new: &[Complex64]| {
        poles.iter().all(|p| new.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min) < 1e-8)
    };
    match vf_step(&inp, 1e-14).unwrap() {
        VfOutcome::Fit(r) => assert!(close(&r.new_poles), "{:?}", r.new_poles),
        VfOutcome::UseIrf { .. } => panic!("well-conditioned fit should stay in VF"),
    }
    let r = irf_step(&inp).unwrap();
    assert!(close(&r.new_poles), "{:?}", r.new_poles);
}

#[test]
fn neumann_normal_derivative_matches_data() {
    let b = laplace_rf::geometry::Boundary::new(vec![
        gallery::ellipse_sections(c(0.0, 0.0), 1.0, 0.4, 0.5),
        gallery::ellipse_sections(c(2.5, 0.3), 0.6, 0.5, 0.0),
    ])
    .unwrap();
    let data = gallery::uniform_flow_data();
    let s = solve(&spec(ProblemKind::ExteriorNeumann, b.clone(), data.clone(), SolverOptions { n_poles: 16, ..Default::default() })).unwrap();
    let prep = s.neumann.as_ref().unwrap();
    assert!(prep.closure.iter().all(|v| v.abs() < 1e-10));
    let de = s.report.delta_e;
    // Relative RMS of dU/dn - f over the boundary, with dU/dn = Re(W' n).
    // Differentiating the stream-function residual costs a roughly constant
    // factor (20-50 on this scene for N = 8..32).
    let (mut num, mut den, mut emax) = (0.0, 0.0, 0.0f64);
    for (sv, _) in b.sample_uniform(2000) {
        let p = BoundaryPoint::at(&b, sv, ProblemKind::ExteriorNeumann).unwrap();
        let dn = (s.model.derivative(p.z) * p.normal).re;
        let w = p.tangent.norm();
        let f = data.eval(&p);
        // Finite differences agree with the analytic derivative.
        let h = 1e-6;
        let u = |z: Complex64| s.model.eval(z).unwrap().re;
        emax = emax.max(((u(p.z) - u(p.z - p.normal * h)) / h - dn).abs());
        num += w * (dn - f) * (dn - f);
        den += w * f * f;
    }
    let rel = (num / den).sqrt();
    assert!(rel <= 100.0 * de, "{rel:e} vs dE {de:e}");
    assert!(emax < 1e-4);
}
