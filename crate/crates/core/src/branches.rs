//! Solution branches: N⁺ and N⁻ minimizers below λ*, continuation to λ*, the first
//! solution past λ*, and the sweep driver that assembles bifurcation rows.

use serde::{Deserialize, Serialize};

use crate::common::{self, abs_vec, largest_component, local_bump, normalized, sphere};
use crate::domain::{Field, Sign};
use crate::error::{Result, SolverError};
use crate::extremal::{j_cone, restricted_min, separation_mu0, Landmarks};
use crate::functionals::{energy_report, fiber_scale_from, EnergyReport, NehariClass, ProblemData};
use crate::mountainpass::{mountain_pass, MountainPassReport};
use crate::optim::{lbfgs, LbfgsOptions};
use crate::options::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BranchKind {
    Nplus,
    Nminus,
    Restricted,
    MountainPass,
}

impl BranchKind {
    pub fn label(self) -> &'static str {
        match self {
            BranchKind::Nplus => "NPLUS",
            BranchKind::Nminus => "NMINUS",
            BranchKind::Restricted => "RESTRICTED",
            BranchKind::MountainPass => "MOUNTAIN_PASS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub branch: BranchKind,
    pub u: Field,
    pub report: EnergyReport,
    pub iterations: usize,
    pub warm_started: bool,
}

/// Fiber, symmetrize and polish a cone minimizer into a critical point of Φ_λ.
pub(crate) fn finish_point(
    data: &ProblemData,
    lambda: f64,
    v: &[f64],
    branch: BranchKind,
    expect: Option<NehariClass>,
    iterations: usize,
    warm_started: bool,
    opts: &SolverOptions,
) -> Result<BranchPoint> {
    let v = abs_vec(v);
    let t = data.terms(&v);
    let s = fiber_scale_from(t.h(lambda), t.f, data.p(), data.gamma())?;
    let u: Vec<f64> = v.iter().map(|x| s * x).collect();
    let pol = common::polish(data, lambda, &u, 0.05, opts);
    let u = Field::new(*data.domain(), abs_vec(&pol.x))?;
    let report = energy_report(&u, lambda, data, opts.class_tol);
    let iterations = iterations + pol.iterations;
    if !(report.residual <= opts.tol) {
        return Err(SolverError::NoConvergence { iterations, residual: report.residual });
    }
    if let Some(c) = expect {
        // sign test, since small-amplitude branch points fall inside the absolute ZERO band
        let (h, f) = (report.h, report.f);
        let matches = match c {
            NehariClass::Plus => h < 0.0 && f < 0.0,
            NehariClass::Minus => h > 0.0 && f > 0.0,
            _ => report.nehari_class == c,
        };
        if !matches {
            return Err(SolverError::NoConvergence { iterations, residual: report.residual });
        }
    }
    Ok(BranchPoint { lambda, branch, u, report, iterations, warm_started })
}

fn cone_options(opts: &SolverOptions) -> LbfgsOptions {
    LbfgsOptions { max_iter: opts.max_iter, gtol: 1e-14, ftol: 1e-16, stall_iters: 10, ..Default::default() }
}

/// Minimize the reduced functional on the cone sign·H > 0, sign·F > 0 from each start; best value wins.
fn cone_min(
    data: &ProblemData,
    lambda: f64,
    sign: f64,
    starts: &[(Vec<f64>, bool)],
    opts: &SolverOptions,
) -> Option<(Vec<f64>, f64, usize, bool)> {
    let pc = common::precond(data, opts);
    let mut best: Option<(Vec<f64>, f64, usize, bool)> = None;
    let mut g = vec![0.0; data.domain().interior_len()];
    for (x0, warm) in starts {
        let x0 = normalized(data, &abs_vec(x0));
        if j_cone(data, lambda, sign, &x0, &mut g).is_none() {
            continue;
        }
        let Some(m) = lbfgs(&x0, |x, g| j_cone(data, lambda, sign, x, g), &pc, Some(sphere(data)), &cone_options(opts)) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| m.f < b.1) {
            best = Some((m.x, m.f, m.iterations, *warm));
        }
    }
    best
}

/// Minimizer of Φ_λ over N_λ⁺ (H, F < 0), returned as a nonnegative critical point.
pub fn solve_nplus(lambda: f64, data: &ProblemData, marks: &Landmarks, warm: Option<&Field>, opts: &SolverOptions) -> Result<BranchPoint> {
    if let Some(ls) = marks.lambda_star {
        if lambda > ls {
            return Err(SolverError::Precondition(format!("lambda = {lambda} exceeds lambda* = {ls}")));
        }
    }
    let mut starts = Vec::new();
    if let Some(w) = warm {
        data.check(w)?;
        starts.push((w.values().to_vec(), true));
    }
    starts.push((marks.phi1.values().to_vec(), false));
    let minus = data.f().interior_mask(Sign::Minus);
    let masked: Vec<f64> = marks.phi1.values().iter().zip(&minus).map(|(v, &m)| if m { *v } else { 0.0 }).collect();
    if masked.iter().any(|&v| v != 0.0) {
        starts.push((masked, false));
    }
    let mut g = vec![0.0; marks.phi1.len()];
    let feasible: Vec<(Vec<f64>, bool)> =
        starts.into_iter().filter(|(x, _)| j_cone(data, lambda, -1.0, &normalized(data, &abs_vec(x)), &mut g).is_some()).take(2).collect();
    if feasible.is_empty() {
        return Err(SolverError::EmptyCone { lambda });
    }
    let (v, _, it, warm) = cone_min(data, lambda, -1.0, &feasible, opts).ok_or(SolverError::EmptyCone { lambda })?;
    finish_point(data, lambda, &v, BranchKind::Nplus, Some(NehariClass::Plus), it, warm, opts)
}

/// Minimizer of Φ_λ over N_λ⁻ (H, F > 0).
pub fn solve_nminus(lambda: f64, data: &ProblemData, marks: &Landmarks, warm: Option<&Field>, opts: &SolverOptions) -> Result<BranchPoint> {
    let _ = marks;
    let mut starts = Vec::new();
    if let Some(w) = warm {
        data.check(w)?;
        starts.push((w.values().to_vec(), true));
    }
    if let Some((c, r)) = largest_component(data, Sign::Plus) {
        starts.push((local_bump(data.domain(), c, r), false));
    }
    let mut g = vec![0.0; data.domain().interior_len()];
    let feasible: Vec<(Vec<f64>, bool)> = starts
        .into_iter()
        .filter(|(x, _)| x.iter().any(|&v| v != 0.0) && j_cone(data, lambda, 1.0, &normalized(data, &abs_vec(x)), &mut g).is_some())
        .collect();
    if feasible.is_empty() {
        return Err(SolverError::EmptyCone { lambda });
    }
    let (v, _, it, warm) = cone_min(data, lambda, 1.0, &feasible, opts).ok_or(SolverError::EmptyCone { lambda })?;
    finish_point(data, lambda, &v, BranchKind::Nminus, Some(NehariClass::Minus), it, warm, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarContinuation {
    pub point: BranchPoint,
    pub lambdas: Vec<f64>,
    /// Ĵ_λ⁺ along the continuation, ending at λ*.
    pub values: Vec<f64>,
}

/// Continuation λ_n = λ* − (λ* − λ₁)2^{−n} up to λ*, warm-started along the chain.
pub fn solve_at_star(data: &ProblemData, marks: &Landmarks, steps: usize, opts: &SolverOptions) -> Result<StarContinuation> {
    let ls = marks.lambda_star.ok_or_else(|| SolverError::Precondition("lambda* is not finite".into()))?;
    let l1 = marks.lambda1;
    let mut lambdas: Vec<f64> = (1..=steps).map(|n| ls - (ls - l1) * 0.5f64.powi(n as i32)).collect();
    lambdas.push(ls);
    let mut warm: Option<BranchPoint> = None;
    let mut values = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let bp = solve_nplus(lambda, data, marks, warm.as_ref().map(|b| &b.u), opts)?;
        if let Some(prev) = &warm {
            let a = normalized(data, prev.u.values());
            let b = normalized(data, bp.u.values());
            let fa = Field::new(*data.domain(), a)?;
            let fb = Field::new(*data.domain(), b)?;
            if fa.relative_distance(&fb) > opts.drift_factor {
                return Err(SolverError::ContinuationStall { lambda });
            }
        }
        values.push(bp.report.phi);
        warm = Some(bp);
    }
    Ok(StarContinuation { point: warm.expect("at least one step"), lambdas, values })
}

/// First solution for λ > λ*: the interior minimizer of Ĵ_λ⁺(μ₀).
pub fn solve_past_star(
    lambda: f64,
    mu0: f64,
    data: &ProblemData,
    marks: &Landmarks,
    warm: &Field,
    opts: &SolverOptions,
) -> Result<BranchPoint> {
    let ls = marks.lambda_star.ok_or_else(|| SolverError::Precondition("lambda* is not finite".into()))?;
    if !(lambda > ls) {
        return Err(SolverError::Precondition(format!("lambda = {lambda} must exceed lambda* = {ls}")));
    }
    data.check(warm)?;
    let rm = restricted_min(lambda, mu0, data, marks, std::slice::from_ref(warm), opts)?;
    if rm.on_boundary || rm.h_mu_hat >= 0.0 {
        return Err(SolverError::BoundaryHit { lambda });
    }
    let bp = finish_point(data, lambda, rm.minimizer.values(), BranchKind::Restricted, Some(NehariClass::Plus), rm.iterations, true, opts)?;
    if crate::functionals::h_lambda(&bp.u, mu0, data) >= 0.0 {
        return Err(SolverError::BoundaryHit { lambda });
    }
    Ok(bp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonScan {
    /// (λ, status) for each probe; status is "ok" or an error code.
    pub probes: Vec<(f64, String)>,
    /// Largest probed λ − λ* with a first solution strictly inside the cone.
    pub epsilon: Option<f64>,
    pub boundary_hit: bool,
}

/// Advance λ = λ*(1 + k·step) until the restricted minimizer reaches the face or the solve fails.
pub fn empirical_epsilon(data: &ProblemData, marks: &Landmarks, mu0: f64, start: &Field, opts: &SolverOptions) -> Result<EpsilonScan> {
    let ls = marks.lambda_star.ok_or_else(|| SolverError::Precondition("lambda* is not finite".into()))?;
    let mut warm = start.clone();
    let mut probes = Vec::new();
    let mut epsilon = None;
    let mut boundary_hit = false;
    for k in 1..=opts.epsilon_max_steps {
        let lambda = ls * (1.0 + opts.epsilon_step * k as f64);
        match solve_past_star(lambda, mu0, data, marks, &warm, opts) {
            Ok(bp) => {
                probes.push((lambda, "ok".to_string()));
                epsilon = Some(lambda - ls);
                warm = bp.u;
            }
            Err(e) => {
                boundary_hit = matches!(e, SolverError::BoundaryHit { .. });
                probes.push((lambda, e.code().to_string()));
                break;
            }
        }
    }
    Ok(EpsilonScan { probes, epsilon, boundary_hit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub branch: BranchKind,
    pub outcome: std::result::Result<BranchPoint, SolverError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PastStar {
    pub mu0: f64,
    pub star: StarContinuation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Setup for λ > λ*, when any such λ was requested.
    pub past_star: Option<std::result::Result<PastStar, SolverError>>,
    pub passes: Vec<(f64, std::result::Result<MountainPassReport, SolverError>)>,
}

fn chain<F>(lambdas: &[f64], mut solve: F) -> Vec<Result<BranchPoint>>
where
    F: FnMut(f64, Option<&Field>) -> Result<BranchPoint>,
{
    let mut warm: Option<Field> = None;
    lambdas
        .iter()
        .map(|&l| {
            let r = solve(l, warm.as_ref());
            if let Ok(bp) = &r {
                warm = Some(bp.u.clone());
            }
            r
        })
        .collect()
}

pub fn past_star_setup(data: &ProblemData, marks: &Landmarks, opts: &SolverOptions) -> Result<PastStar> {
    let ls = marks.lambda_star.ok_or_else(|| SolverError::Precondition("lambda* is not finite".into()))?;
    let star = solve_at_star(data, marks, opts.continuation_steps, opts)?;
    let v = Field::new(*data.domain(), normalized(data, star.point.u.values()))?;
    let mu0 = separation_mu0(data, marks.lambda1, ls, &[v], opts)?;
    Ok(PastStar { mu0, star })
}

/// Solve every grid value with the applicable solvers. Errors are recorded per row.
pub fn sweep(grid: &[f64], data: &ProblemData, marks: &Landmarks, opts: &SolverOptions) -> SweepOutput {
    let mut uniq: Vec<f64> = grid.to_vec();
    uniq.sort_by(|a, b| a.total_cmp(b));
    uniq.dedup_by(|a, b| a.to_bits() == b.to_bits());
    let ls = marks.lambda_star;
    let below: Vec<f64> = uniq.iter().copied().filter(|&l| ls.is_none_or(|s| l <= s)).collect();
    let above: Vec<f64> = uniq.iter().copied().filter(|&l| ls.is_some_and(|s| l > s)).collect();

    let (plus, minus) = opts.exec.join(
        || chain(&below, |l, w| solve_nplus(l, data, marks, w, opts)),
        || chain(&below, |l, w| solve_nminus(l, data, marks, w, opts)),
    );
    let mut solved: Vec<(f64, BranchKind, Result<BranchPoint>)> = Vec::new();
    for ((l, p), m) in below.iter().zip(plus).zip(minus) {
        solved.push((*l, BranchKind::Nplus, p));
        solved.push((*l, BranchKind::Nminus, m));
    }

    let mut past_star = None;
    let mut passes = Vec::new();
    if !above.is_empty() {
        let setup = past_star_setup(data, marks, opts);
        match &setup {
            Ok(ps) => {
                let first = chain(&above, |l, w| {
                    let warm = w.unwrap_or(&ps.star.point.u);
                    solve_past_star(l, ps.mu0, data, marks, warm, opts)
                });
                let mp: Vec<Option<Result<MountainPassReport>>> = if opts.skip_mountain_pass {
                    vec![None; above.len()]
                } else {
                    let jobs: Vec<(f64, Result<BranchPoint>)> = above.iter().copied().zip(first.iter().cloned()).collect();
                    opts.exec.map(&jobs, |(l, f)| {
                        Some(match f {
                            Ok(bp) => mountain_pass(*l, bp, ps.mu0, data, marks, opts),
                            Err(e) => Err(e.clone()),
                        })
                    })
                };
                for ((l, f), m) in above.iter().zip(first).zip(mp) {
                    solved.push((*l, BranchKind::Restricted, f));
                    if let Some(m) = m {
                        solved.push((*l, BranchKind::MountainPass, m.clone().map(|r| r.saddle)));
                        passes.push((*l, m));
                    }
                }
            }
            Err(e) => {
                for l in &above {
                    solved.push((*l, BranchKind::Restricted, Err(e.clone())));
                    if !opts.skip_mountain_pass {
                        solved.push((*l, BranchKind::MountainPass, Err(e.clone())));
                    }
                }
            }
        }
        past_star = Some(setup);
    }

    let mut rows = Vec::new();
    for &l in grid {
        for (sl, kind, r) in &solved {
            if sl.to_bits() == l.to_bits() {
                rows.push(SweepRow { lambda: l, branch: *kind, outcome: r.clone() });
            }
        }
    }
    SweepOutput { rows, past_star, passes }
}
