//! Second solution past λ*: boundary endpoint at μ^λ, string-method estimate of the
//! mountain-pass level c_λ, Newton refinement of the saddle knot and the geometry checklist.

use serde::{Deserialize, Serialize};

use crate::branches::{BranchKind, BranchPoint};
use crate::common::{self, abs_vec, face_jitter, normalized};
use crate::domain::{self, Field};
use crate::error::{Result, SolverError};
use crate::extremal::{face_min, face_start, mu_lambda, Landmarks, MuLambda};
use crate::functionals::{energy_report, fiber_scale_from, h_lambda, residual_of, ProblemData};
use crate::linalg::dot;
use crate::optim::Precond;
use crate::options::SolverOptions;

/// Discrete path η(t_i), t_i uniform in [0, 1]; the endpoints are never moved.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Path {
    knots: Vec<Field>,
}

impl Path {
    pub const MIN_KNOTS: usize = 8;

    pub fn new(knots: Vec<Field>) -> Result<Self> {
        if knots.len() < Self::MIN_KNOTS {
            return Err(SolverError::Precondition(format!("path needs at least {} knots, got {}", Self::MIN_KNOTS, knots.len())));
        }
        let d = *knots[0].domain();
        if knots.iter().any(|k| *k.domain() != d) {
            return Err(SolverError::Precondition("knots live on different domains".into()));
        }
        Ok(Self { knots })
    }

    /// Straight segment from `a` to `b`.
    pub fn straight(a: &Field, b: &Field, knots: usize) -> Result<Self> {
        if a.domain() != b.domain() {
            return Err(SolverError::Precondition("endpoints live on different domains".into()));
        }
        let k = knots.max(2);
        let fields = (0..k)
            .map(|i| {
                let t = i as f64 / (k - 1) as f64;
                let v = a.values().iter().zip(b.values()).map(|(x, y)| (1.0 - t) * x + t * y).collect();
                Field::from_vec_unchecked(*a.domain(), v)
            })
            .collect();
        Self::new(fields)
    }

    pub fn knots(&self) -> &[Field] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn first(&self) -> &Field {
        &self.knots[0]
    }

    pub fn last(&self) -> &Field {
        &self.knots[self.knots.len() - 1]
    }
}

/// Items (i) to (vi) of the mountain-pass geometry. `None` means not applicable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryChecks {
    /// μ₀ < μ^λ < λ*.
    pub mu_order: Option<bool>,
    /// Face minimum at μ^λ equals Ĵ_λ⁺(μ₀) and the face is nonempty.
    pub plateau: Option<bool>,
    /// Φ on ∂Θ_{μ₀}⁺ stays above j_λ > Ĵ_λ⁺(μ₀).
    pub barrier: Option<bool>,
    /// H_{μ₀} changes sign along the optimized path.
    pub crossing: Option<bool>,
    /// H_{λ*} < 0 along the optimized path or along the segment between the endpoint directions.
    pub negative_path: Option<bool>,
    /// Ĵ_λ⁺(μ₀) < c_λ < 0.
    pub level_order: Option<bool>,
}

impl GeometryChecks {
    pub fn items(&self) -> [Option<bool>; 6] {
        [self.mu_order, self.plateau, self.barrier, self.crossing, self.negative_path, self.level_order]
    }

    pub fn all_pass(&self) -> bool {
        self.items().iter().all(|i| *i == Some(true))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassResult {
    pub c_lambda: f64,
    /// Highest knot of the optimized path.
    pub saddle: Field,
    pub residual: f64,
    pub geometry: GeometryChecks,
    #[serde(skip)]
    pub path: Path,
    pub sweeps: usize,
    /// Max knot energy of the initial straight path.
    pub initial_max: f64,
    /// Φ_λ at each knot of the final path.
    pub profile: Vec<f64>,
    /// Max knot energy after each sweep.
    #[serde(skip)]
    pub history: Vec<f64>,
}

fn e_norm2(data: &ProblemData, sigma: f64, x: &[f64]) -> f64 {
    let d = data.domain();
    domain::dirichlet_energy(d, x, 2.0, 0.0) + sigma * d.node_weight() * dot(x, x)
}

fn e_dist(data: &ProblemData, sigma: f64, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    e_norm2(data, sigma, &diff).sqrt()
}

/// Redistribute knots to equal E-arc length, keeping the endpoints.
fn reparametrize(data: &ProblemData, sigma: f64, knots: &mut [Vec<f64>]) -> Result<()> {
    let k = knots.len();
    let mut s = vec![0.0; k];
    for i in 1..k {
        s[i] = s[i - 1] + e_dist(data, sigma, &knots[i], &knots[i - 1]);
    }
    let total = s[k - 1];
    let scale = e_norm2(data, sigma, &knots[0]).sqrt() + e_norm2(data, sigma, &knots[k - 1]).sqrt();
    if !(total > 1e-10 * scale) {
        return Err(SolverError::PathCollapse);
    }
    let old = knots.to_vec();
    let mut seg = 0;
    for (i, knot) in knots.iter_mut().enumerate().take(k - 1).skip(1) {
        let target = total * i as f64 / (k - 1) as f64;
        while seg + 1 < k - 1 && s[seg + 1] < target {
            seg += 1;
        }
        let w = if s[seg + 1] > s[seg] { (target - s[seg]) / (s[seg + 1] - s[seg]) } else { 0.0 };
        for (j, x) in knot.iter_mut().enumerate() {
            *x = (1.0 - w) * old[seg][j] + w * old[seg + 1][j];
        }
    }
    Ok(())
}

struct KnotState {
    energy: f64,
    grad: Vec<f64>,
    pgrad: Vec<f64>,
}

fn knot_state(data: &ProblemData, lambda: f64, pc: &dyn Precond, x: &[f64]) -> KnotState {
    let mut grad = vec![0.0; x.len()];
    let energy = data.phi_and_grad(x, lambda, &mut grad);
    let mut pgrad = vec![0.0; x.len()];
    pc.apply(&grad, &mut pgrad);
    KnotState { energy, grad, pgrad }
}

/// Unit (E-metric) tangent at interior knot i, upwind towards the higher neighbour.
fn tangent(data: &ProblemData, sigma: f64, knots: &[Vec<f64>], energies: &[f64], i: usize) -> Vec<f64> {
    let (prev, next) = (&knots[i - 1], &knots[i + 1]);
    let fwd: Vec<f64> = next.iter().zip(&knots[i]).map(|(a, b)| a - b).collect();
    let bwd: Vec<f64> = knots[i].iter().zip(prev).map(|(a, b)| a - b).collect();
    let (ep, e, en) = (energies[i - 1], energies[i], energies[i + 1]);
    let mut t: Vec<f64> = if en > e && e > ep {
        fwd
    } else if en < e && e < ep {
        bwd
    } else {
        let (dmax, dmin) = ((en - e).abs().max((ep - e).abs()), (en - e).abs().min((ep - e).abs()));
        let (wf, wb) = if en > ep { (dmax, dmin) } else { (dmin, dmax) };
        fwd.iter().zip(&bwd).map(|(a, b)| wf * a + wb * b).collect()
    };
    let n = e_norm2(data, sigma, &t).sqrt();
    if n > 0.0 {
        t.iter_mut().for_each(|v| *v /= n);
    }
    t
}

fn phi_at(data: &ProblemData, lambda: f64, x: &[f64]) -> f64 {
    let t = data.terms(x);
    t.h(lambda) / data.p() - t.f / data.gamma()
}

fn straight_knots(a: &[f64], b: &[f64], k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let t = i as f64 / (k - 1) as f64;
            a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
        })
        .collect()
}

struct StringRun {
    sweeps: usize,
    converged: bool,
}

/// Sweeps of the string method on `xs` with both ends fixed. Knots at or below `floor` are frozen.
#[allow(clippy::too_many_arguments)]
fn run_string(
    data: &ProblemData,
    lambda: f64,
    xs: &mut [Vec<f64>],
    floor: f64,
    climb: bool,
    budget: usize,
    history: &mut Vec<f64>,
    opts: &SolverOptions,
) -> Result<StringRun> {
    let k = xs.len();
    let sigma = opts.sigma;
    let pc = common::precond(data, opts);
    let end_e = [phi_at(data, lambda, &xs[0]), phi_at(data, lambda, &xs[k - 1])];
    let mut dt = vec![0.5; k];
    let mut climb_dt = 0.2;
    let mut prev_force = f64::INFINITY;
    let (mut best, mut best_at) = (f64::INFINITY, 0);
    let mut sweeps = 0;
    while sweeps < budget {
        sweeps += 1;
        let states = opts.exec.map_range(k - 2, |j| knot_state(data, lambda, &pc, &xs[j + 1]));
        let mut energies = vec![0.0; k];
        energies[0] = end_e[0];
        energies[k - 1] = end_e[1];
        for (j, s) in states.iter().enumerate() {
            energies[j + 1] = s.energy;
        }
        let imax = (1..k - 1).max_by(|&a, &b| energies[a].total_cmp(&energies[b])).unwrap_or(1);
        let cmax = energies[imax];
        let taus: Vec<Vec<f64>> = (1..k - 1).map(|i| tangent(data, sigma, xs, &energies, i)).collect();
        let snapshot = xs.to_vec();
        let dts = dt.clone();
        let moved: Vec<(Vec<f64>, f64)> = opts.exec.map_range(k - 2, |j| {
            let i = j + 1;
            let st = &states[j];
            let tau = &taus[j];
            let gt = dot(&st.grad, tau);
            let x = &snapshot[i];
            if climb && i == imax {
                let dir: Vec<f64> = st.pgrad.iter().zip(tau).map(|(p, t)| p - 2.0 * gt * t).collect();
                return (x.iter().zip(&dir).map(|(a, d)| a - climb_dt * d).collect(), dts[i]);
            }
            if st.energy <= floor {
                return (x.clone(), dts[i]);
            }
            let dir: Vec<f64> = st.pgrad.iter().zip(tau).map(|(p, t)| p - gt * t).collect();
            let slope = dot(&st.grad, &dir);
            let mut h = dts[i];
            for _ in 0..30 {
                let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a - h * d).collect();
                let e = phi_at(data, lambda, &xn);
                if e.is_finite() && e <= st.energy - 1e-4 * h * slope {
                    return (xn, (1.5 * h).min(2.0));
                }
                h *= 0.5;
            }
            (x.clone(), h)
        });
        for (j, (xn, h)) in moved.into_iter().enumerate() {
            xs[j + 1] = xn;
            dt[j + 1] = h;
        }
        if climb {
            reparametrize(data, sigma, &mut xs[..=imax])?;
            reparametrize(data, sigma, &mut xs[imax..])?;
        } else {
            reparametrize(data, sigma, xs)?;
        }
        history.push(cmax);
        if climb {
            let r = residual_of(&xs[imax], lambda, data);
            if r <= 1e-4 {
                return Ok(StringRun { sweeps, converged: true });
            }
            if r > prev_force * 1.5 {
                climb_dt *= 0.5;
            }
            prev_force = r;
        } else {
            if cmax < best - 1e-6 * cmax.abs() {
                best = cmax;
                best_at = sweeps;
            } else if sweeps - best_at >= 50 {
                return Ok(StringRun { sweeps, converged: true });
            }
        }
    }
    Ok(StringRun { sweeps, converged: false })
}

/// String method on Φ_λ between fixed endpoints: a descent phase on the interior knots with the
/// tangential part of the Sobolev gradient removed, then a climbing phase on the highest knot.
/// Between the phases the string is restarted on the stretch around the maximum bounded by the
/// nearest knots at or below the endpoint level.
pub fn optimize_path(
    lambda: f64,
    endpoints: (&Field, &Field),
    knots: usize,
    data: &ProblemData,
    opts: &SolverOptions,
) -> Result<PassResult> {
    data.check(endpoints.0)?;
    data.check(endpoints.1)?;
    if endpoints.0.relative_distance(endpoints.1) <= opts.distinct_tol {
        return Err(SolverError::PathCollapse);
    }
    let path = Path::straight(endpoints.0, endpoints.1, knots)?;
    let k = path.len();
    let (a, b) = (endpoints.0.values(), endpoints.1.values());
    let floor = phi_at(data, lambda, a).max(phi_at(data, lambda, b));
    let mut xs = straight_knots(a, b, k);
    let initial_max = xs.iter().map(|x| phi_at(data, lambda, x)).fold(f64::NEG_INFINITY, f64::max);
    let mut history = Vec::new();
    let mut sweeps = 0;
    let mut prefix: Vec<Vec<f64>> = Vec::new();
    let mut suffix: Vec<Vec<f64>> = Vec::new();
    for _ in 0..3 {
        let run = run_string(data, lambda, &mut xs, floor, false, opts.max_sweeps.saturating_sub(sweeps), &mut history, opts)?;
        sweeps += run.sweeps;
        if !run.converged {
            return Err(SolverError::MaxSweepsExceeded(sweeps));
        }
        let e: Vec<f64> = xs.iter().map(|x| phi_at(data, lambda, x)).collect();
        let imax = (1..k - 1).max_by(|&a, &b| e[a].total_cmp(&e[b])).unwrap_or(1);
        let lo = (0..imax).rev().find(|&i| e[i] <= floor).unwrap_or(0);
        let hi = (imax + 1..k).find(|&i| e[i] <= floor).unwrap_or(k - 1);
        if hi - lo >= k / 2 {
            break;
        }
        let mut pre = prefix.clone();
        pre.extend_from_slice(&xs[..lo]);
        let mut suf = xs[hi + 1..].to_vec();
        suf.append(&mut suffix);
        prefix = pre;
        suffix = suf;
        xs = straight_knots(&xs[lo].clone(), &xs[hi].clone(), k);
    }
    let run = run_string(data, lambda, &mut xs, floor, true, opts.max_sweeps.saturating_sub(sweeps), &mut history, opts)?;
    sweeps += run.sweeps;
    if !run.converged {
        return Err(SolverError::MaxSweepsExceeded(sweeps));
    }
    let top = (1..k - 1).max_by(|&a, &b| phi_at(data, lambda, &xs[a]).total_cmp(&phi_at(data, lambda, &xs[b]))).unwrap_or(1);
    xs[top] = common::polish(data, lambda, &xs[top], 0.05, opts).x;
    let mut all = prefix;
    all.extend(xs);
    all.extend(suffix);
    let energies: Vec<f64> = all.iter().map(|x| phi_at(data, lambda, x)).collect();
    let n = all.len();
    let imax = (1..n - 1).max_by(|&a, &b| energies[a].total_cmp(&energies[b])).unwrap_or(1);
    let d = *data.domain();
    let saddle = Field::from_vec_unchecked(d, all[imax].clone());
    let residual = residual_of(saddle.values(), lambda, data);
    let path = Path::new(all.into_iter().map(|x| Field::from_vec_unchecked(d, x)).collect())?;
    Ok(PassResult {
        c_lambda: energies[imax],
        saddle,
        residual,
        geometry: GeometryChecks::default(),
        path,
        sweeps,
        initial_max,
        profile: energies,
        history,
    })
}

/// Face minimizer of Ĵ_λ⁺(μ) on H_μ = 0, nonnegative and on the unit E-sphere.
pub fn boundary_endpoint(
    lambda: f64,
    mu: f64,
    data: &ProblemData,
    marks: &Landmarks,
    starts: &[Field],
    opts: &SolverOptions,
) -> Result<Field> {
    let face: Vec<Field> = starts.iter().filter_map(|s| face_start(data, s, marks, mu)).collect();
    if face.is_empty() {
        return Err(SolverError::BoundaryMinimizerNotFound { mu });
    }
    let r = face_min(lambda, mu, data, marks, &face, opts)?;
    let v = Field::new(*data.domain(), normalized(data, &abs_vec(r.minimizer.values())))?;
    let t = data.terms(v.values());
    if (t.a - mu * t.b).abs() > 1e-6 * t.a || !(t.f < 0.0) {
        return Err(SolverError::BoundaryMinimizerNotFound { mu });
    }
    Ok(v)
}

/// Newton polish of the saddle knot; rejects collapse onto the first solution.
pub fn refine_saddle(
    candidate: &Field,
    lambda: f64,
    c_lambda: f64,
    first: &Field,
    data: &ProblemData,
    opts: &SolverOptions,
) -> Result<BranchPoint> {
    data.check(candidate)?;
    let pol = common::polish(data, lambda, candidate.values(), 0.5, opts);
    let u = Field::new(*data.domain(), abs_vec(&pol.x))?;
    let report = energy_report(&u, lambda, data, opts.class_tol);
    if u.relative_distance(first) <= opts.distinct_tol {
        return Err(SolverError::ConvergedToFirstSolution);
    }
    if !(report.residual <= opts.tol) || (report.phi - c_lambda).abs() > 1e-4 * c_lambda.abs() {
        return Err(SolverError::NoConvergence { iterations: pol.iterations, residual: report.residual });
    }
    Ok(BranchPoint { lambda, branch: BranchKind::MountainPass, u, report, iterations: pol.iterations, warm_started: false })
}

/// Sampled version of the six geometric items.
#[allow(clippy::too_many_arguments)]
pub fn geometry_checklist(
    lambda: f64,
    lambda_star: f64,
    mu0: f64,
    ml: &MuLambda,
    j_first: f64,
    c_lambda: f64,
    path: &Path,
    data: &ProblemData,
    opts: &SolverOptions,
) -> GeometryChecks {
    if !(lambda > lambda_star) || path.is_empty() {
        return GeometryChecks::default();
    }
    let mu = ml.mu;
    let scale = j_first.abs().max(f64::MIN_POSITIVE);
    let hmu0: Vec<f64> = path.knots().iter().map(|k| h_lambda(k, mu0, data)).collect();
    let mut barrier = ml.j_lambda > j_first;
    for i in 1..path.len() {
        let (a, b) = (hmu0[i - 1], hmu0[i]);
        if a < 0.0 && b >= 0.0 || a >= 0.0 && b < 0.0 {
            let (x0, x1) = (path.knots()[i - 1].values(), path.knots()[i].values());
            let (mut lo, mut hi) = (0.0, 1.0);
            let at = |w: f64| -> Vec<f64> { x0.iter().zip(x1).map(|(p, q)| (1.0 - w) * p + w * q).collect() };
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let t = data.terms(&at(mid));
                if (t.a - mu0 * t.b < 0.0) == (a < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let e = phi_at(data, lambda, &at(0.5 * (lo + hi)));
            barrier &= e >= ml.j_lambda - 1e-8 * scale;
        }
    }
    let crossing = hmu0[0] < 0.0 && hmu0[path.len() - 1] > 0.0;
    let on_path = path.knots().iter().all(|k| h_lambda(k, lambda_star, data) < 0.0);
    let (ua, vb) = (normalized(data, path.first().values()), normalized(data, path.last().values()));
    let witness = (0..=64).all(|i| {
        let t = i as f64 / 64.0;
        let w: Vec<f64> = ua.iter().zip(&vb).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        data.terms(&w).h(lambda_star) < 0.0
    });
    let negative_path = on_path || witness;
    let plateau = (ml.value - j_first).abs() <= 10.0 * opts.plateau_tol * scale;
    GeometryChecks {
        mu_order: Some(mu0 < mu && mu < lambda_star),
        plateau: Some(plateau),
        barrier: Some(barrier),
        crossing: Some(crossing),
        negative_path: Some(negative_path),
        level_order: Some(j_first < c_lambda && c_lambda < 0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondEndpoint {
    pub c_lambda: Option<f64>,
    /// |c_λ(second) − c_λ(first)|.
    pub spread: Option<f64>,
    pub endpoint_distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MountainPassReport {
    pub lambda: f64,
    pub mu0: f64,
    pub mu_lambda: f64,
    /// Ĵ_λ⁺(μ₀), the level of the first solution.
    pub j_first: f64,
    pub j_lambda: f64,
    pub j_samples: usize,
    pub pass: PassResult,
    pub saddle: BranchPoint,
    /// Relative distance between the saddle and the first solution.
    pub distance: f64,
    pub second: Option<SecondEndpoint>,
    pub warnings: Vec<String>,
}

/// Fibered endpoint s(v)·v at level J_λ⁺(v).
fn fibered(data: &ProblemData, lambda: f64, v: &Field) -> Result<Field> {
    let t = data.terms(v.values());
    let s = fiber_scale_from(t.h(lambda), t.f, data.p(), data.gamma())?;
    Ok(v.scaled(s))
}

/// Full second-solution pipeline at λ > λ* from the first solution.
pub fn mountain_pass(
    lambda: f64,
    first: &BranchPoint,
    mu0: f64,
    data: &ProblemData,
    marks: &Landmarks,
    opts: &SolverOptions,
) -> Result<MountainPassReport> {
    let lambda_star = marks.lambda_star.ok_or_else(|| SolverError::Precondition("lambda* is not finite".into()))?;
    if !(lambda > lambda_star) {
        return Err(SolverError::Precondition(format!("lambda = {lambda} must exceed lambda* = {lambda_star}")));
    }
    let j_first = first.report.phi;
    let ml = mu_lambda(lambda, mu0, j_first, data, marks, &first.u, opts)?;
    let v = Field::new(*data.domain(), normalized(data, &abs_vec(ml.endpoint.minimizer.values())))?;
    let end = fibered(data, lambda, &v)?;
    let mut pass = optimize_path(lambda, (&first.u, &end), opts.knots, data, opts)?;
    let saddle = refine_saddle(&pass.saddle, lambda, pass.c_lambda, &first.u, data, opts)?;
    pass.geometry = geometry_checklist(lambda, lambda_star, mu0, &ml, j_first, pass.c_lambda, &pass.path, data, opts);
    let mut warnings = Vec::new();
    if !(saddle.report.tail_fraction < 0.01) {
        warnings.push(format!("saddle tail fraction {:.3e} at 0.8L exceeds 1%", saddle.report.tail_fraction));
    }
    if !pass.geometry.all_pass() {
        warnings.push("geometry checklist incomplete".to_string());
    }
    let second = opts.second_endpoint.then(|| second_run(lambda, &ml, &v, first, data, marks, pass.c_lambda, opts));
    Ok(MountainPassReport {
        lambda,
        mu0,
        mu_lambda: ml.mu,
        j_first,
        j_lambda: ml.j_lambda,
        j_samples: ml.j_samples,
        distance: saddle.u.relative_distance(&first.u),
        pass,
        saddle,
        second,
        warnings,
    })
}

#[allow(clippy::too_many_arguments)]
fn second_run(
    lambda: f64,
    ml: &MuLambda,
    v: &Field,
    first: &BranchPoint,
    data: &ProblemData,
    marks: &Landmarks,
    c: f64,
    opts: &SolverOptions,
) -> SecondEndpoint {
    let fail = |e: SolverError| SecondEndpoint { c_lambda: None, spread: None, endpoint_distance: None, error: Some(e.to_string()) };
    let mut starts = vec![marks.phi1.clone()];
    starts.push(face_jitter(data, &marks.phi1, 0.3, opts.seed, 7));
    starts.push(face_jitter(data, &first.u, 0.3, opts.seed, 8));
    let w = match boundary_endpoint(lambda, ml.mu, data, marks, &starts, opts) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    let dist = w.relative_distance(v);
    let end = match fibered(data, lambda, &w) {
        Ok(e) => e,
        Err(e) => return fail(e),
    };
    match optimize_path(lambda, (&first.u, &end), opts.knots, data, opts) {
        Ok(p) => {
            SecondEndpoint { c_lambda: Some(p.c_lambda), spread: Some((p.c_lambda - c).abs()), endpoint_distance: Some(dist), error: None }
        }
        Err(e) => SecondEndpoint { endpoint_distance: Some(dist), ..fail(e) },
    }
}
