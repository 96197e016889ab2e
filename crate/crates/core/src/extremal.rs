//! The extreme value λ*, its t₀-rescaling, and the μ-restricted problems used past λ*.

use serde::{Deserialize, Serialize};

use crate::common::{self, abs_vec, jitter, largest_component, local_bump, normalized, sphere};
use crate::domain::{Field, Sign};
use crate::eigensolve::EigenResult;
use crate::error::{Result, SolverError};
use crate::functionals::{fiber_scale_from, reduced_from, ProblemData};
use crate::linalg::dot;
use crate::optim::{augmented_lagrangian, lbfgs, AlOptions, ConstraintKind, LbfgsOptions};
use crate::options::SolverOptions;

/// λ₁, φ₁ and (when finite) λ*, u*: the reference points every later stage needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub lambda1: f64,
    pub phi1: Field,
    pub lambda_star: Option<f64>,
    pub u_star: Option<Field>,
}

impl Landmarks {
    pub fn new(eig: &EigenResult, extreme: Option<&ExtremeResult>) -> Self {
        Self {
            lambda1: eig.lambda1,
            phi1: eig.phi1.clone(),
            lambda_star: extreme.map(|e| e.lambda_star),
            u_star: extreme.map(|e| e.u_star.clone()),
        }
    }

    fn star(&self) -> Result<(f64, &Field)> {
        match (self.lambda_star, self.u_star.as_ref()) {
            (Some(l), Some(u)) => Ok((l, u)),
            _ => Err(SolverError::Precondition("lambda* is not finite".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeResult {
    pub lambda_star: f64,
    /// Nonnegative, unit E-norm. F(u*) = 0 up to round-off when λ* > λ₁, otherwise u* is φ₁.
    pub u_star: Field,
    pub f_at_min: f64,
    pub t0: Option<f64>,
    /// |F(u*)| / ∫|u*|^γ
    pub constraint_residual: f64,
    pub best_start: usize,
    pub starts: usize,
}

fn quotient(data: &ProblemData, x: &[f64], g: &mut [f64]) -> Option<f64> {
    let (t, tg) = data.terms_grad(x);
    if !(t.b > 0.0) {
        return None;
    }
    let r = t.a / t.b;
    for i in 0..x.len() {
        g[i] = (tg.a[i] - r * tg.b[i]) / t.b;
    }
    Some(r)
}

/// F / ∫|u|^γ, which is 0-homogeneous.
fn f_hat(data: &ProblemData, x: &[f64], g: &mut [f64]) -> Option<f64> {
    let (t, tg) = data.terms_grad(x);
    if !(t.l > 0.0) {
        return None;
    }
    let c = t.f / t.l;
    for i in 0..x.len() {
        g[i] = (tg.f[i] - c * tg.l[i]) / t.l;
    }
    Some(c)
}

/// H_μ / ∫|∇u|^p = 1 − μ/R.
fn h_hat(data: &ProblemData, mu: f64, x: &[f64], g: &mut [f64]) -> Option<f64> {
    let (t, tg) = data.terms_grad(x);
    if !(t.a > 0.0) {
        return None;
    }
    let q = t.b / t.a;
    for i in 0..x.len() {
        g[i] = -mu * (tg.b[i] - q * tg.a[i]) / t.a;
    }
    Some(1.0 - mu * q)
}

/// Reduced functional on the cone with the given sign of H and F, and its gradient.
pub(crate) fn j_cone(data: &ProblemData, lambda: f64, sign: f64, x: &[f64], g: &mut [f64]) -> Option<f64> {
    let (t, tg) = data.terms_grad(x);
    let (h, f) = (t.h(lambda), t.f);
    if !(h * sign > 0.0 && f * sign > 0.0) {
        return None;
    }
    let (p, gm) = (data.p(), data.gamma());
    let s = fiber_scale_from(h, f, p, gm).ok()?;
    let (sp, sg) = (s.powf(p), s.powf(gm));
    for i in 0..x.len() {
        g[i] = sp * (tg.a[i] - lambda * tg.b[i]) / p - sg * tg.f[i] / gm;
    }
    reduced_from(h, f, p, gm).ok()
}

fn al_options(opts: &SolverOptions, rho0: f64) -> AlOptions {
    AlOptions {
        outer_max: 60,
        rho0,
        rho_growth: 10.0,
        rho_max: 1e12,
        ctol: 1e-11,
        inner: LbfgsOptions { max_iter: opts.max_iter, gtol: 1e-13, ftol: 1e-15, stall_iters: 6, ..Default::default() },
    }
}

fn inner_options(opts: &SolverOptions) -> LbfgsOptions {
    LbfgsOptions { max_iter: opts.max_iter, gtol: 1e-14, ftol: 1e-16, stall_iters: 10, ..Default::default() }
}

/// Starting fields φ₁ + a·(bump on the largest Ω_f⁺ component), jittered per seed.
fn plus_starts(data: &ProblemData, phi1: &Field, opts: &SolverOptions) -> Option<Vec<Vec<f64>>> {
    let d = data.domain();
    let (c, r) = largest_component(data, Sign::Plus)?;
    let bump = normalized(data, &local_bump(d, c, r));
    let phi = normalized(data, phi1.values());
    let starts = (0..opts.restarts.max(1))
        .map(|k| {
            let a = [1.0, 3.0, 0.3, 10.0][k % 4] * (1.0 + 0.5 * (k / 4) as f64);
            let mut x: Vec<f64> = phi.iter().zip(&bump).map(|(p, b)| p + a * b).collect();
            if k > 0 {
                jitter(&mut x, 0.1, opts.seed, 100 + k as u64);
            }
            x
        })
        .collect();
    Some(starts)
}

/// Scale the part of u on {f > 0} so that F(u) = 0 exactly.
fn project_f_zero(data: &ProblemData, u: &mut [f64]) -> Option<()> {
    let wf = data.wf();
    let g = data.gamma();
    let (mut fp, mut fm) = (0.0, 0.0);
    for (x, w) in u.iter().zip(wf) {
        let v = w * x.abs().powf(g);
        if *w > 0.0 {
            fp += v;
        } else {
            fm += v;
        }
    }
    if !(fp > 0.0) {
        return None;
    }
    let theta = (-fm / fp).powf(1.0 / g);
    for (x, w) in u.iter_mut().zip(wf) {
        if *w > 0.0 {
            *x *= theta;
        }
    }
    Some(())
}

/// inf{∫|∇u|^p / ∫h|u|^p : ∫f|u|^γ ≥ 0, ∫h|u|^p > 0} via multistart augmented Lagrangian on F = 0.
pub fn lambda_star(data: &ProblemData, eig: &EigenResult, opts: &SolverOptions) -> Result<ExtremeResult> {
    data.check(&eig.phi1)?;
    let d = *data.domain();
    let t_phi = data.terms(eig.phi1.values());
    if t_phi.f >= 0.0 {
        let u = normalized(data, eig.phi1.values());
        let t = data.terms(&u);
        return Ok(ExtremeResult {
            lambda_star: eig.lambda1,
            u_star: Field::new(d, u)?,
            f_at_min: t.f,
            t0: None,
            constraint_residual: 0.0,
            best_start: 0,
            starts: 0,
        });
    }
    let starts = plus_starts(data, &eig.phi1, opts).ok_or(SolverError::InfeasibleConstraint)?;
    let runs = opts.exec.map(&starts, |x0| {
        let mut g = vec![0.0; x0.len()];
        let r0 = quotient(data, x0, &mut g)?;
        let al = al_options(opts, 10.0 * r0.abs().max(1e-3));
        augmented_lagrangian(
            x0,
            |x, g| quotient(data, x, g),
            |x, g| f_hat(data, x, g),
            ConstraintKind::Equality,
            &common::precond(data, opts),
            Some(sphere(data)),
            &al,
        )
    });
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for (k, run) in runs.into_iter().enumerate() {
        let Some(r) = run else { continue };
        if !(r.c.abs() <= 1e-6) || !r.f.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(v, _, _)| r.f < *v) {
            best = Some((r.f, k, r.x));
        }
    }
    let (_, best_start, x) = best.ok_or(SolverError::InfeasibleConstraint)?;
    let mut u = abs_vec(&x);
    project_f_zero(data, &mut u).ok_or(SolverError::InfeasibleConstraint)?;
    sphere(data)(&mut u);
    let t = data.terms(&u);
    if !(t.b > 0.0) {
        return Err(SolverError::InfeasibleConstraint);
    }
    let u_star = Field::new(d, u)?;
    let lambda_star = t.quotient();
    let t0 = t0_rescale(&u_star, lambda_star, data).ok().map(|(t0, _)| t0);
    Ok(ExtremeResult { lambda_star, f_at_min: t.f, constraint_residual: t.f.abs() / t.l, u_star, t0, best_start, starts: starts.len() })
}

/// Pick t₀ minimizing ‖a − t^{γ−p} b‖ with a = ∇H_λ*(u*)/p and b = ∇F(u*)/γ, so that
/// ∇Φ_λ*(t u*) = t^{p−1}(a − t^{γ−p} b) is as small as the direction allows.
pub fn t0_rescale(u_star: &Field, lambda_star: f64, data: &ProblemData) -> Result<(f64, Field)> {
    data.check(u_star)?;
    let (_, tg) = data.terms_grad(u_star.values());
    let (p, g) = (data.p(), data.gamma());
    let a: Vec<f64> = tg.a.iter().zip(&tg.b).map(|(x, y)| (x - lambda_star * y) / p).collect();
    let b: Vec<f64> = tg.f.iter().map(|x| x / g).collect();
    let ab = dot(&a, &b);
    let bb = dot(&b, &b);
    if !(ab > 0.0) || !(bb > 0.0) {
        return Err(SolverError::DegenerateScaling(format!("<a, b> = {ab:e}")));
    }
    let t0 = (ab / bb).powf(1.0 / (g - p));
    if !(1e-6..=1e6).contains(&t0) {
        return Err(SolverError::DegenerateScaling(format!("t0 = {t0:e} outside [1e-6, 1e6]")));
    }
    Ok((t0, u_star.scaled(t0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct N0Probe {
    pub target: f64,
    pub best_quotient: f64,
    pub constraint_residual: f64,
    /// True when some field with F = 0 reached a quotient below λ* − 10⁻³.
    pub found: bool,
}

/// Search for a field with F = 0, ∫h|u|^p > 0 and Rayleigh quotient equal to `target`.
pub fn n0_probe(target: f64, data: &ProblemData, marks: &Landmarks, opts: &SolverOptions) -> Result<N0Probe> {
    let (lambda_star, _) = marks.star()?;
    let starts = plus_starts(data, &marks.phi1, opts).ok_or(SolverError::InfeasibleConstraint)?;
    let runs = opts.exec.map(&starts, |x0| {
        augmented_lagrangian(
            x0,
            |x, g| {
                let r = quotient(data, x, g)?;
                let e = r - target;
                g.iter_mut().for_each(|v| *v *= e);
                Some(0.5 * e * e)
            },
            |x, g| f_hat(data, x, g),
            ConstraintKind::Equality,
            &common::precond(data, opts),
            Some(sphere(data)),
            &al_options(opts, 10.0),
        )
    });
    let mut best: Option<(f64, f64)> = None;
    for r in runs.into_iter().flatten() {
        if !(r.c.abs() <= 1e-6) {
            continue;
        }
        let mut g = vec![0.0; r.x.len()];
        let Some(q) = quotient(data, &r.x, &mut g) else { continue };
        if best.is_none_or(|(bq, _)| q < bq) {
            best = Some((q, r.c.abs()));
        }
    }
    let (best_quotient, constraint_residual) = best.ok_or(SolverError::InfeasibleConstraint)?;
    Ok(N0Probe { target, best_quotient, constraint_residual, found: best_quotient < lambda_star - 1e-3 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedMin {
    pub lambda: f64,
    pub mu: f64,
    pub value: f64,
    /// Unit E-norm, nonnegative.
    pub minimizer: Field,
    pub on_boundary: bool,
    pub h_mu: f64,
    /// H_μ / ∫|∇v|^p
    pub h_mu_hat: f64,
    pub quotient: f64,
    pub iterations: usize,
    pub samples: usize,
}

fn restricted_record(
    data: &ProblemData,
    lambda: f64,
    mu: f64,
    x: Vec<f64>,
    iterations: usize,
    opts: &SolverOptions,
) -> Option<RestrictedMin> {
    let mut v = abs_vec(&x);
    sphere(data)(&mut v);
    let t = data.terms(&v);
    let value = reduced_from(t.h(lambda), t.f, data.p(), data.gamma()).ok()?;
    if value >= 0.0 {
        return None;
    }
    let h_mu_hat = 1.0 - mu * t.b / t.a;
    Some(RestrictedMin {
        lambda,
        mu,
        value,
        on_boundary: h_mu_hat.abs() <= opts.boundary_tol,
        h_mu: t.h(mu),
        h_mu_hat,
        quotient: t.quotient(),
        minimizer: Field::from_vec_unchecked(*data.domain(), v),
        iterations,
        samples: 1,
    })
}

fn wall(lambda_star: f64, mu: f64) -> f64 {
    mu + 0.5 * (lambda_star - mu)
}

/// Minimize J_λ⁺ over the unit sphere with H_μ = 0 (the boundary face of the cone).
fn face_run(data: &ProblemData, lambda: f64, mu: f64, cap: f64, x0: &[f64], opts: &SolverOptions) -> Option<RestrictedMin> {
    let mut g = vec![0.0; x0.len()];
    let x0 = abs_vec(x0);
    let j0 = j_cone(data, lambda, -1.0, &x0, &mut g)?;
    let scale = 1.0 / j0.abs();
    let obj = |x: &[f64], g: &mut [f64]| {
        let t = data.terms(x);
        if !(t.b > 0.0) || t.a / t.b > cap {
            return None;
        }
        let j = j_cone(data, lambda, -1.0, x, g)?;
        g.iter_mut().for_each(|v| *v *= scale);
        Some(j * scale)
    };
    let r = augmented_lagrangian(
        &x0,
        obj,
        |x, g| h_hat(data, mu, x, g),
        ConstraintKind::Equality,
        &common::precond(data, opts),
        Some(sphere(data)),
        &al_options(opts, 10.0),
    )?;
    let rec = restricted_record(data, lambda, mu, r.x, r.inner_iterations, opts)?;
    (rec.h_mu_hat.abs() <= opts.boundary_tol).then_some(rec)
}

/// Interior descent on J_λ⁺ with a hard wall at R = μ.
fn interior_run(data: &ProblemData, lambda: f64, mu: f64, x0: &[f64], opts: &SolverOptions) -> Option<(RestrictedMin, bool)> {
    let obj = |x: &[f64], g: &mut [f64]| {
        let t = data.terms(x);
        if !(t.b > 0.0) || t.a / t.b > mu {
            return None;
        }
        j_cone(data, lambda, -1.0, x, g)
    };
    let m = lbfgs(x0, obj, &common::precond(data, opts), Some(sphere(data)), &inner_options(opts))?;
    let near_wall = {
        let t = data.terms(&m.x);
        1.0 - mu * t.b / t.a > -1e-4
    };
    let mut rec = restricted_record(data, lambda, mu, m.x, m.iterations, opts)?;
    if !near_wall {
        let t = data.terms(rec.minimizer.values());
        let s = fiber_scale_from(t.h(lambda), t.f, data.p(), data.gamma()).ok()?;
        let u: Vec<f64> = rec.minimizer.values().iter().map(|v| s * v).collect();
        let pol = common::polish(data, lambda, &u, 0.05, opts);
        if pol.iterations > 0 {
            if let Some(r2) = restricted_record(data, lambda, mu, pol.x, rec.iterations + pol.iterations, opts) {
                if r2.h_mu_hat < 0.0 && r2.value <= rec.value + 1e-12 * rec.value.abs() {
                    rec = r2;
                }
            }
        }
    }
    Some((rec, near_wall))
}

fn pick_best(cands: Vec<Option<RestrictedMin>>) -> Option<RestrictedMin> {
    let samples = cands.len();
    let mut best: Option<RestrictedMin> = None;
    for c in cands.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| c.value < b.value) {
            best = Some(c);
        }
    }
    best.map(|mut b| {
        b.samples = samples;
        b
    })
}

fn check_restricted(lambda: f64, mu: f64, marks: &Landmarks) -> Result<f64> {
    let (lambda_star, _) = marks.star()?;
    if !(mu > marks.lambda1 && mu < lambda_star) {
        return Err(SolverError::Precondition(format!("mu = {mu} outside (lambda1, lambda*)")));
    }
    if lambda < marks.lambda1 {
        return Err(SolverError::Precondition(format!("lambda = {lambda} below lambda1")));
    }
    Ok(lambda_star)
}

/// Ĵ_λ⁺(μ) = inf{J_λ⁺(v) : H_μ(v) ≤ 0, F(v) < 0, ‖v‖ = 1}, multistart over `starts`.
pub fn restricted_min(
    lambda: f64,
    mu: f64,
    data: &ProblemData,
    marks: &Landmarks,
    starts: &[Field],
    opts: &SolverOptions,
) -> Result<RestrictedMin> {
    let lambda_star = check_restricted(lambda, mu, marks)?;
    let cap = wall(lambda_star, mu);
    let cands = opts.exec.map(starts, |s| {
        let x0 = normalized(data, &abs_vec(s.values()));
        let t = data.terms(&x0);
        if !(t.b > 0.0) || !(t.f < 0.0) {
            return vec![];
        }
        if t.a / t.b < mu {
            match interior_run(data, lambda, mu, &x0, opts) {
                Some((rec, false)) => vec![Some(rec)],
                Some((rec, true)) => {
                    let face = face_run(data, lambda, mu, cap, rec.minimizer.values(), opts);
                    vec![Some(rec), face]
                }
                None => vec![],
            }
        } else {
            vec![face_run(data, lambda, mu, cap, &x0, opts)]
        }
    });
    let n = starts.len();
    let mut best = pick_best(cands.into_iter().flatten().collect()).ok_or(SolverError::EmptyCone { lambda })?;
    best.samples = n;
    Ok(best)
}

/// Minimum of J_λ⁺ on the face H_μ = 0 only.
pub fn face_min(
    lambda: f64,
    mu: f64,
    data: &ProblemData,
    marks: &Landmarks,
    starts: &[Field],
    opts: &SolverOptions,
) -> Result<RestrictedMin> {
    let lambda_star = check_restricted(lambda, mu, marks)?;
    let cap = wall(lambda_star, mu);
    let cands = opts.exec.map(starts, |s| face_run(data, lambda, mu, cap, s.values(), opts));
    pick_best(cands).ok_or(SolverError::BoundaryMinimizerNotFound { mu })
}

/// normalize((1 − s)v + s·u*) with s chosen by bisection so the quotient equals μ.
pub fn face_start(data: &ProblemData, v: &Field, marks: &Landmarks, mu: f64) -> Option<Field> {
    let (_, u_star) = marks.star().ok()?;
    let a = normalized(data, &abs_vec(v.values()));
    let b = u_star.values();
    let q = |s: f64| {
        let x: Vec<f64> = a.iter().zip(b).map(|(x, y)| (1.0 - s) * x + s * y).collect();
        let t = data.terms(&x);
        (t.a / t.b, x)
    };
    if !(q(0.0).0 < mu && q(1.0).0 > mu) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if q(mid).0 < mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, x) = q(0.5 * (lo + hi));
    Some(Field::from_vec_unchecked(*data.domain(), normalized(data, &x)))
}

/// μ₀ = q + θ(λ* − q) with q the largest Rayleigh quotient among the minimizers.
pub fn separation_mu0(data: &ProblemData, lambda1: f64, lambda_star: f64, minimizers: &[Field], opts: &SolverOptions) -> Result<f64> {
    if minimizers.is_empty() {
        return Err(SolverError::SeparationFailed("no minimizers supplied".into()));
    }
    let mut q_max = f64::NEG_INFINITY;
    for v in minimizers {
        data.check(v)?;
        let t = data.terms(v.values());
        if !(t.b > 0.0) {
            return Err(SolverError::SeparationFailed("minimizer with nonpositive h-mass".into()));
        }
        let q = t.quotient();
        if q <= lambda1 + 1e-8 * lambda1.abs().max(1.0) {
            return Err(SolverError::SeparationFailed(format!("quotient {q} does not exceed lambda1 = {lambda1}")));
        }
        q_max = q_max.max(q);
    }
    if q_max >= lambda_star * (1.0 - opts.separation_margin) {
        return Err(SolverError::SeparationFailed(format!("quotient {q_max} too close to lambda* = {lambda_star}")));
    }
    Ok(q_max + opts.separation_theta * (lambda_star - q_max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuLambda {
    pub mu: f64,
    pub value: f64,
    /// Face minimizer at μ^λ.
    pub endpoint: RestrictedMin,
    /// Face minimum at μ₀, the barrier level j_λ.
    pub j_lambda: f64,
    pub j_samples: usize,
    /// (μ, face minimum) pairs visited.
    pub profile: Vec<(f64, f64)>,
}

/// μ^λ = sup{μ ∈ (μ₀, λ*) : Ĵ_λ⁺(μ) = Ĵ_λ⁺(μ₀)}: the first μ where the face minimum drops to Ĵ_λ⁺(μ₀).
pub fn mu_lambda(
    lambda: f64,
    mu0: f64,
    j_mu0: f64,
    data: &ProblemData,
    marks: &Landmarks,
    first: &Field,
    opts: &SolverOptions,
) -> Result<MuLambda> {
    let (lambda_star, _) = marks.star()?;
    if !(lambda > lambda_star) {
        return Err(SolverError::Precondition(format!("lambda = {lambda} must exceed lambda* = {lambda_star}")));
    }
    let tol = opts.plateau_tol * j_mu0.abs();
    let mut profile = Vec::new();
    let mut eval = |mu: f64, warm: Option<&Field>| -> Result<RestrictedMin> {
        let mut starts: Vec<Field> = Vec::new();
        if let Some(w) = warm {
            starts.push(w.clone());
        }
        if let Some(s) = face_start(data, first, marks, mu) {
            starts.push(s);
        }
        if let Some(s) = face_start(data, &marks.phi1, marks, mu) {
            starts.push(s);
        }
        let r = face_min(lambda, mu, data, marks, &starts, opts)?;
        profile.push((mu, r.value));
        Ok(r)
    };
    let at0 = eval(mu0, None)?;
    if at0.value - j_mu0 <= tol {
        return Err(SolverError::PlateauNotFound(format!("face minimum {} at mu0 is not above {}", at0.value, j_mu0)));
    }
    let (j_lambda, j_samples) = (at0.value, at0.samples);
    let mut lo = (mu0, at0.value - j_mu0, at0.minimizer.clone());
    let mut hi = None;
    for k in 1..48 {
        let mu = lambda_star - (lambda_star - mu0) * 0.5f64.powi(k);
        let r = eval(mu, Some(&lo.2))?;
        if r.value - j_mu0 < 0.0 {
            hi = Some((mu, r.value - j_mu0, r));
            break;
        }
        lo = (mu, r.value - j_mu0, r.minimizer);
    }
    let Some(mut hi) = hi else {
        return Err(SolverError::PlateauNotFound("face minimum never reaches the first-solution level".into()));
    };
    // the face minimum behaves like −K/(λ* − μ) near λ*, so the secant runs in 1/(λ* − μ)
    let mut side = 0i32;
    for _ in 0..80 {
        if hi.1.abs() <= tol {
            break;
        }
        let (a, fa) = (lo.0, lo.1);
        let (b, fb) = (hi.0, hi.1);
        let wa = if side == -1 { 0.5 } else { 1.0 };
        let wb = if side == 1 { 0.5 } else { 1.0 };
        let (ya, yb) = (1.0 / (lambda_star - a), 1.0 / (lambda_star - b));
        let y = (ya * fb * wb - yb * fa * wa) / (fb * wb - fa * wa);
        let mut mu = lambda_star - 1.0 / y;
        if !(mu > a && mu < b) {
            mu = 0.5 * (a + b);
        }
        if b - a <= 1e-11 * b {
            break;
        }
        let r = eval(mu, Some(&hi.2.minimizer))?;
        let fm = r.value - j_mu0;
        if fm.abs() <= tol {
            hi = (mu, fm, r);
            break;
        }
        if fm > 0.0 {
            lo = (mu, fm, r.minimizer);
            side = 1;
        } else {
            hi = (mu, fm, r);
            side = -1;
        }
    }
    let (mu, _, endpoint) = hi;
    Ok(MuLambda { mu, value: endpoint.value, endpoint, j_lambda, j_samples, profile })
}

/// Largest F/∫|v|^γ within the cone closure {H_μ ≤ 0}; strictly negative under the hypotheses.
pub fn c_mu_estimate(mu: f64, data: &ProblemData, marks: &Landmarks, opts: &SolverOptions) -> Result<f64> {
    let starts: Vec<Vec<f64>> = vec![normalized(data, marks.phi1.values())];
    let runs = opts.exec.map(&starts, |x0| {
        augmented_lagrangian(
            x0,
            |x, g| {
                let v = f_hat(data, x, g)?;
                g.iter_mut().for_each(|gi| *gi = -*gi);
                Some(-v)
            },
            |x, g| h_hat(data, mu, x, g),
            ConstraintKind::Inequality,
            &common::precond(data, opts),
            Some(sphere(data)),
            &al_options(opts, 10.0),
        )
    });
    let best = runs.into_iter().flatten().filter(|r| r.c <= 1e-6).map(|r| -r.f).fold(f64::NEG_INFINITY, f64::max);
    if best.is_finite() {
        Ok(best)
    } else {
        Err(SolverError::EmptyCone { lambda: mu })
    }
}
