use std::sync::OnceLock;

use nehari::branches::solve_nplus;
use nehari::eigensolve::{lambda1, EigenResult};
use nehari::extremal::{
    c_mu_estimate, lambda_star, mu_lambda, n0_probe, restricted_min, separation_mu0, t0_rescale, ExtremeResult, Landmarks,
};
use nehari::functionals::{f_gamma, h_lambda, nehari_test, pde_residual};
use nehari::weights::preset;
use nehari::{build_domain, Domain, Field, NehariClass, ProblemData, Profile, SolverError, SolverOptions};

struct Setup {
    data: ProblemData,
    eig: EigenResult,
    ex: ExtremeResult,
    marks: Landmarks,
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let data = preset(build_domain(1, 10.0, 201).unwrap()).unwrap();
        let opts = SolverOptions::default();
        let eig = lambda1(&data, None, &opts).unwrap();
        let ex = lambda_star(&data, &eig, &opts).unwrap();
        let marks = Landmarks::new(&eig, Some(&ex));
        Setup { data, eig, ex, marks }
    })
}

fn problem(d: Domain, h: Profile, f: Profile) -> ProblemData {
    ProblemData::new(2.0, 4.0, h.build(d, 1e-12).unwrap(), f.build(d, 1e-12).unwrap(), 1e-10).unwrap()
}

#[test]
fn preset_star_above_lambda1() {
    let s = setup();
    assert!(s.ex.lambda_star >= s.eig.lambda1 * 1.05, "{} vs {}", s.ex.lambda_star, s.eig.lambda1);
    assert!(f_gamma(&s.ex.u_star, &s.data).abs() <= 1e-6);
    assert!(s.ex.u_star.min_value() >= 0.0);
    assert!(h_lambda(&s.ex.u_star, 0.0, &s.data) - h_lambda(&s.ex.u_star, 1.0, &s.data) > 0.0);
}

#[test]
fn star_dominates_lambda1_on_varied_weights() {
    let d = build_domain(1, 6.0, 81).unwrap();
    let opts = SolverOptions { restarts: 4, ..SolverOptions::default() };
    for (w, far) in [(1.0, -2.0), (0.5, -1.0), (1.5, -4.0)] {
        let data = problem(d, Profile::Gaussian { peak: 1.0, far: -0.5, width: 2.5 }, Profile::Gaussian { peak: 1.0, far, width: w });
        let eig = lambda1(&data, None, &opts).unwrap();
        let ex = lambda_star(&data, &eig, &opts).unwrap();
        assert!(ex.lambda_star >= eig.lambda1 - 1e-8, "{} < {}", ex.lambda_star, eig.lambda1);
    }
}

#[test]
fn inactive_constraint_returns_lambda1() {
    let d = build_domain(1, 1.0, 61).unwrap();
    let data = problem(d, Profile::Constant { value: 1.0 }, Profile::Constant { value: 1.0 });
    let opts = SolverOptions::default();
    let eig = lambda1(&data, None, &opts).unwrap();
    let ex = lambda_star(&data, &eig, &opts).unwrap();
    assert_eq!(ex.lambda_star, eig.lambda1);
    assert!(ex.u_star.relative_distance(&eig.phi1.scaled(ex.u_star.norm2() / eig.phi1.norm2())) < 1e-12);
}

#[test]
fn negative_f_is_infeasible() {
    let d = build_domain(1, 1.0, 41).unwrap();
    let data = problem(d, Profile::Constant { value: 1.0 }, Profile::Constant { value: -1.0 });
    let opts = SolverOptions::default();
    let eig = lambda1(&data, None, &opts).unwrap();
    assert_eq!(lambda_star(&data, &eig, &opts), Err(SolverError::InfeasibleConstraint));
}

#[test]
fn t0_scale_covariance_and_zero_class() {
    let s = setup();
    let ls = s.ex.lambda_star;
    let (t0, w) = t0_rescale(&s.ex.u_star, ls, &s.data).unwrap();
    let (t1, w1) = t0_rescale(&s.ex.u_star.scaled(2.0), ls, &s.data).unwrap();
    assert!((t1 - 0.5 * t0).abs() < 1e-12 * t0);
    assert!(w.relative_distance(&w1) < 1e-12);
    assert_eq!(nehari_test(&w, ls, &s.data, 1e-6).unwrap(), NehariClass::Zero);
    let r = pde_residual(&w, ls, &s.data).unwrap();
    assert!(r <= 1e-5, "residual {r}");
}

#[test]
fn separation_examples() {
    let s = setup();
    let opts = SolverOptions::default();
    let (l1, ls) = (s.eig.lambda1, s.ex.lambda_star);
    assert!(matches!(separation_mu0(&s.data, l1, ls, &[], &opts), Err(SolverError::SeparationFailed(_))));
    assert!(matches!(separation_mu0(&s.data, l1, ls, std::slice::from_ref(&s.eig.phi1), &opts), Err(SolverError::SeparationFailed(_))));
    let lam = 0.5 * (l1 + ls);
    let v = solve_nplus(lam, &s.data, &s.marks, None, &opts).unwrap().u;
    let a = h_lambda(&v, 0.0, &s.data);
    let q = a / (a - h_lambda(&v, 1.0, &s.data));
    let mu0 = separation_mu0(&s.data, l1, ls, std::slice::from_ref(&v), &opts).unwrap();
    assert!(mu0 > q && mu0 < ls);
    assert!(h_lambda(&v, mu0, &s.data) < 0.0);
}

#[test]
fn restricted_min_monotone_in_lambda() {
    let s = setup();
    let opts = SolverOptions::default();
    let (l1, ls) = (s.eig.lambda1, s.ex.lambda_star);
    let mu = l1 + 0.6 * (ls - l1);
    let starts = [s.eig.phi1.clone()];
    let mut last = f64::INFINITY;
    for k in 0..4 {
        let lam = mu + 0.05 * k as f64 * (ls - l1);
        let r = restricted_min(lam, mu, &s.data, &s.marks, &starts, &opts).unwrap();
        assert!(r.value < 0.0);
        assert!(r.value <= last + 1e-10 * r.value.abs(), "{} after {last}", r.value);
        last = r.value;
    }
}

#[test]
fn c_mu_negative_and_ordered() {
    let s = setup();
    let opts = SolverOptions::default();
    let (l1, ls) = (s.eig.lambda1, s.ex.lambda_star);
    let lo = c_mu_estimate(l1 + 0.3 * (ls - l1), &s.data, &s.marks, &opts).unwrap();
    let hi = c_mu_estimate(l1 + 0.8 * (ls - l1), &s.data, &s.marks, &opts).unwrap();
    assert!(hi < 0.0);
    assert!(lo <= hi + 1e-9, "{lo} vs {hi}");
}

#[test]
fn n0_probe_finds_nothing_below_star() {
    let s = setup();
    let opts = SolverOptions::default();
    let (l1, ls) = (s.eig.lambda1, s.ex.lambda_star);
    for k in 1..=3 {
        let target = l1 + 0.2 * k as f64 * (ls - l1);
        let probe = n0_probe(target, &s.data, &s.marks, &opts).unwrap();
        assert!(!probe.found, "target {target}: quotient {}", probe.best_quotient);
        assert!(probe.best_quotient >= ls - 1e-3);
    }
}

#[test]
fn mu_lambda_rejects_lambda_below_star() {
    let s = setup();
    let opts = SolverOptions::default();
    let ls = s.ex.lambda_star;
    let first = Field::zeros(*s.data.domain());
    let r = mu_lambda(ls, 0.5 * ls, -1.0, &s.data, &s.marks, &first, &opts);
    assert!(matches!(r, Err(SolverError::Precondition(_))));
}

#[test]
fn restricted_min_requires_finite_star() {
    let s = setup();
    let opts = SolverOptions::default();
    let marks = Landmarks::new(&s.eig, None);
    let r = restricted_min(0.5, 0.4, &s.data, &marks, std::slice::from_ref(&s.eig.phi1), &opts);
    assert!(matches!(r, Err(SolverError::Precondition(_))));
}
