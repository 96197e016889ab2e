//! Shared pieces for the solvers: preconditioners, sphere projection, starts, polish.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{self, Domain, Sign};
use crate::functionals::{residual_of, ProblemData};
use crate::linalg::{dist, norm};
use crate::optim::{self, MinresOptions, NewtonOptions};
use crate::options::SolverOptions;
use crate::precond::Sobolev;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub(crate) fn precond(data: &ProblemData, opts: &SolverOptions) -> Sobolev {
    Sobolev::new(*data.domain(), opts.sigma)
}

pub(crate) fn e_norm_of(data: &ProblemData, x: &[f64]) -> f64 {
    let d = data.domain();
    let a = domain::dirichlet_energy(d, x, data.p(), 0.0);
    let l = domain::lq_integral(d, x, data.gamma());
    (a + l.powf(data.p() / data.gamma())).powf(1.0 / data.p())
}

/// Projection onto the unit E-sphere; returns the applied factor.
pub(crate) fn sphere(data: &ProblemData) -> impl FnMut(&mut [f64]) -> f64 + '_ {
    move |x: &mut [f64]| {
        let n = e_norm_of(data, x);
        if !(n > 0.0) || !n.is_finite() {
            return 1.0;
        }
        let t = 1.0 / n;
        x.iter_mut().for_each(|v| *v *= t);
        t
    }
}

pub(crate) fn normalized(data: &ProblemData, x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    sphere(data)(&mut v);
    v
}

/// Product cosine bump vanishing on the box boundary.
pub(crate) fn box_bump(d: &Domain, x: [f64; 2]) -> f64 {
    let l = d.half_width();
    let c = |t: f64| (std::f64::consts::FRAC_PI_2 * t / l).cos().max(0.0);
    match d.dim() {
        1 => c(x[0]),
        _ => c(x[0]) * c(x[1]),
    }
}

/// cos² bump of the given radius around `center`.
pub(crate) fn local_bump(d: &Domain, center: [f64; 2], radius: f64) -> Vec<f64> {
    (0..d.interior_len())
        .map(|k| {
            let x = d.interior_position(k);
            let r = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt();
            if r < radius {
                (std::f64::consts::FRAC_PI_2 * r / radius).cos().powi(2)
            } else {
                0.0
            }
        })
        .collect()
}

/// Largest connected set of interior nodes with the given sign of f, as (center, radius).
pub(crate) fn largest_component(data: &ProblemData, sign: Sign) -> Option<([f64; 2], f64)> {
    let d = data.domain();
    let mask = data.f().interior_mask(sign);
    let mut seen = vec![false; mask.len()];
    let mut best: Option<Vec<usize>> = None;
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < comp.len() {
            let k = comp[head];
            head += 1;
            for nb in d.interior_neighbors(k) {
                if mask[nb] && !seen[nb] {
                    seen[nb] = true;
                    comp.push(nb);
                }
            }
        }
        if best.as_ref().is_none_or(|b| comp.len() > b.len()) {
            best = Some(comp);
        }
    }
    let comp = best?;
    let mut c = [0.0; 2];
    for &k in &comp {
        let x = d.interior_position(k);
        c[0] += x[0];
        c[1] += x[1];
    }
    c[0] /= comp.len() as f64;
    c[1] /= comp.len() as f64;
    let r = comp
        .iter()
        .map(|&k| {
            let x = d.interior_position(k);
            ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    Some((c, r + d.spacing()))
}

pub(crate) fn jitter(values: &mut [f64], amount: f64, seed: u64, stream: u64) {
    let mut r = rng(seed, stream);
    for v in values.iter_mut() {
        *v *= 1.0 + amount * (2.0 * r.random::<f64>() - 1.0);
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Polished {
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// Newton polish of a near-critical point of Φ_λ. Rejected when it drifts
/// further than `max_drift` (relative) from the start or ends worse.
pub(crate) fn polish(data: &ProblemData, lambda: f64, x0: &[f64], max_drift: f64, opts: &SolverOptions) -> Polished {
    let r0 = residual_of(x0, lambda, data);
    let start = Polished { x: x0.to_vec(), iterations: 0 };
    let m = x0.len();
    let pc = precond(data, opts);
    let nopts = NewtonOptions {
        gtol: 1e-3 * opts.tol.min(1e-6) * norm(x0).max(1.0) * 1e-4,
        max_iter: 60,
        linear: MinresOptions { rtol: 1e-12, max_iter: 4 * m + 50 },
    };
    let res = optim::newton(
        x0,
        |x, g| {
            data.phi_and_grad(x, lambda, g);
        },
        |x, d, out| data.phi_hess_vec(x, lambda, d, out),
        &pc,
        &nopts,
    );
    let drift = dist(&res.x, x0) / norm(x0).max(f64::MIN_POSITIVE);
    let r1 = residual_of(&res.x, lambda, data);
    if drift <= max_drift && r1 < r0 && res.x.iter().all(|v| v.is_finite()) {
        Polished { x: res.x, iterations: res.iterations }
    } else {
        start
    }
}

pub(crate) fn abs_vec(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.abs()).collect()
}

/// Nonnegative multiplicative perturbation of a start field.
pub(crate) fn face_jitter(data: &ProblemData, v: &crate::domain::Field, amount: f64, seed: u64, stream: u64) -> crate::domain::Field {
    let mut x = abs_vec(v.values());
    jitter(&mut x, amount, seed, stream);
    crate::domain::Field::from_vec_unchecked(*data.domain(), x)
}
