//! Preconditioned L-BFGS, augmented Lagrangian outer loop and a Newton–MINRES polish.
//!
//! Objectives return `None` outside their domain of definition; the line
//! search treats such points as rejected trial steps.

use crate::linalg::{axpy, dot, norm};

pub trait Precond: Sync {
    fn apply(&self, r: &[f64], out: &mut [f64]);
}

impl Precond for crate::precond::Sobolev {
    fn apply(&self, r: &[f64], out: &mut [f64]) {
        crate::precond::Sobolev::apply(self, r, out)
    }
}

pub struct Identity;

impl Precond for Identity {
    fn apply(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub max_iter: usize,
    pub memory: usize,
    pub gtol: f64,
    pub ftol: f64,
    pub stall_iters: usize,
    /// Upper bound on a single step relative to ‖x‖.
    pub max_step: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { max_iter: 2000, memory: 12, gtol: 1e-10, ftol: 1e-15, stall_iters: 8, max_step: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub gnorm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize `obj` from `x0`. `normalize` (for 0-homogeneous objectives) rescales
/// the iterate in place and returns the factor it applied.
pub fn lbfgs<F, N>(x0: &[f64], mut obj: F, precond: &dyn Precond, mut normalize: Option<N>, opts: &LbfgsOptions) -> Option<Minimum>
where
    F: FnMut(&[f64], &mut [f64]) -> Option<f64>,
    N: FnMut(&mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    if let Some(nz) = normalize.as_mut() {
        nz(&mut x);
    }
    let mut g = vec![0.0; n];
    let mut f = obj(&x, &mut g)?;
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut d = vec![0.0; n];
    let mut pg = vec![0.0; n];
    let mut xt = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut stall = 0;
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..opts.max_iter {
        iterations = it;
        let gnorm = norm(&g);
        if gnorm <= opts.gtol {
            converged = true;
            break;
        }
        // two-loop recursion with H0 = γ P
        let mut q = g.clone();
        let k = s_hist.len();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            alpha[i] = rho * dot(&s_hist[i], &q);
            axpy(-alpha[i], &y_hist[i], &mut q);
        }
        precond.apply(&q, &mut pg);
        if k > 0 {
            let mut py = vec![0.0; n];
            precond.apply(&y_hist[k - 1], &mut py);
            let scale = dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &py);
            pg.iter_mut().for_each(|v| *v *= scale);
        }
        for i in 0..k {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            let beta = rho * dot(&y_hist[i], &pg);
            axpy(alpha[i] - beta, &s_hist[i], &mut pg);
        }
        d.iter_mut().zip(&pg).for_each(|(di, v)| *di = -v);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            s_hist.clear();
            y_hist.clear();
            precond.apply(&g, &mut pg);
            d.iter_mut().zip(&pg).for_each(|(di, v)| *di = -v);
            slope = dot(&g, &d);
            if !(slope < 0.0) {
                break;
            }
        }
        let xn = norm(&x);
        let dn = norm(&d);
        let mut step = 1.0;
        if xn > 0.0 && dn * step > opts.max_step * xn {
            step = opts.max_step * xn / dn;
        }
        if k == 0 && it == 0 && dn > 0.0 {
            step = step.min(0.1 * xn.max(1e-3) / dn);
        }
        let mut accepted = None;
        for _ in 0..60 {
            xt.iter_mut().zip(x.iter().zip(&d)).for_each(|(t, (xi, di))| *t = xi + step * di);
            if let Some(ft) = obj(&xt, &mut gt) {
                if ft <= f + 1e-4 * step * slope {
                    accepted = Some(ft);
                    break;
                }
                if ft <= f + 1e-13 * f.abs() && norm(&gt) < gnorm {
                    accepted = Some(ft);
                    break;
                }
            }
            step *= 0.5;
        }
        let Some(mut ft) = accepted else {
            if s_hist.is_empty() {
                break;
            }
            s_hist.clear();
            y_hist.clear();
            continue;
        };
        let mut s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let mut y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        std::mem::swap(&mut x, &mut xt);
        std::mem::swap(&mut g, &mut gt);
        if let Some(nz) = normalize.as_mut() {
            let t = nz(&mut x);
            if t != 1.0 {
                match obj(&x, &mut g) {
                    Some(v) => ft = v,
                    None => {
                        std::mem::swap(&mut x, &mut xt);
                        std::mem::swap(&mut g, &mut gt);
                        if s_hist.is_empty() {
                            break;
                        }
                        s_hist.clear();
                        y_hist.clear();
                        continue;
                    }
                }
                s.iter_mut().for_each(|v| *v *= t);
                y.iter_mut().for_each(|v| *v /= t);
                for sh in s_hist.iter_mut() {
                    sh.iter_mut().for_each(|v| *v *= t);
                }
                for yh in y_hist.iter_mut() {
                    yh.iter_mut().for_each(|v| *v /= t);
                }
            }
        }
        let sy = dot(&s, &y);
        if sy > 1e-14 * norm(&s) * norm(&y) && sy > 0.0 {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        let decrease = f - ft;
        f = ft;
        if decrease.abs() <= opts.ftol * f.abs().max(1e-300) {
            stall += 1;
            if stall >= opts.stall_iters {
                converged = true;
                iterations = it + 1;
                break;
            }
        } else {
            stall = 0;
        }
        iterations = it + 1;
    }
    let gnorm = norm(&g);
    if gnorm <= opts.gtol {
        converged = true;
    }
    Some(Minimum { x, f, gnorm, iterations, converged })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// c(x) = 0
    Equality,
    /// c(x) ≤ 0
    Inequality,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlOptions {
    pub outer_max: usize,
    pub rho0: f64,
    pub rho_growth: f64,
    pub rho_max: f64,
    pub ctol: f64,
    pub inner: LbfgsOptions,
}

impl Default for AlOptions {
    fn default() -> Self {
        Self { outer_max: 40, rho0: 10.0, rho_growth: 10.0, rho_max: 1e10, ctol: 1e-10, inner: LbfgsOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub c: f64,
    pub multiplier: f64,
    pub outer: usize,
    pub inner_iterations: usize,
    pub converged: bool,
}

/// PHR augmented Lagrangian for a single scalar constraint.
pub fn augmented_lagrangian<F, C, N>(
    x0: &[f64],
    obj: F,
    con: C,
    kind: ConstraintKind,
    precond: &dyn Precond,
    mut normalize: Option<N>,
    opts: &AlOptions,
) -> Option<AlResult>
where
    F: Fn(&[f64], &mut [f64]) -> Option<f64>,
    C: Fn(&[f64], &mut [f64]) -> Option<f64>,
    N: FnMut(&mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut nu = 0.0;
    let mut rho = opts.rho0;
    let mut gc = vec![0.0; n];
    let violation = |c: f64, nu: f64, rho: f64| match kind {
        ConstraintKind::Equality => c.abs(),
        ConstraintKind::Inequality => c.max(-nu / rho).abs(),
    };
    let mut last_v = f64::INFINITY;
    let mut inner_total = 0;
    let mut result = None;
    for outer in 0..opts.outer_max {
        let (nu_k, rho_k) = (nu, rho);
        let aug = |x: &[f64], g: &mut [f64]| -> Option<f64> {
            let mut gcl = vec![0.0; x.len()];
            let f = obj(x, g)?;
            let c = con(x, &mut gcl)?;
            let (val, w) = match kind {
                ConstraintKind::Equality => (nu_k * c + 0.5 * rho_k * c * c, nu_k + rho_k * c),
                ConstraintKind::Inequality => {
                    let t = (nu_k + rho_k * c).max(0.0);
                    ((t * t - nu_k * nu_k) / (2.0 * rho_k), t)
                }
            };
            axpy(w, &gcl, g);
            Some(f + val)
        };
        let Some(m) = lbfgs(&x, aug, precond, normalize.as_mut(), &opts.inner) else {
            break;
        };
        inner_total += m.iterations;
        x = m.x;
        let mut gf = vec![0.0; n];
        let f = obj(&x, &mut gf)?;
        let c = con(&x, &mut gc)?;
        let v = violation(c, nu, rho);
        nu = match kind {
            ConstraintKind::Equality => nu + rho * c,
            ConstraintKind::Inequality => (nu + rho * c).max(0.0),
        };
        let done = v <= opts.ctol && m.converged;
        result = Some(AlResult { x: x.clone(), f, c, multiplier: nu, outer: outer + 1, inner_iterations: inner_total, converged: done });
        if done {
            break;
        }
        if v > 0.25 * last_v {
            rho = (rho * opts.rho_growth).min(opts.rho_max);
        }
        last_v = v;
    }
    result
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinresOptions {
    pub rtol: f64,
    pub max_iter: usize,
}

/// Preconditioned MINRES for symmetric (possibly indefinite) A with SPD preconditioner.
pub fn minres<A>(apply: A, b: &[f64], precond: &dyn Precond, opts: &MinresOptions) -> (Vec<f64>, usize)
where
    A: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut v_prev = vec![0.0; n];
    let mut v = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&v, &mut z);
    let mut gamma = dot(&z, &v);
    if !(gamma > 0.0) {
        return (x, 0);
    }
    gamma = gamma.sqrt();
    let gamma1 = gamma;
    let mut gamma_prev = 1.0;
    let mut eta = gamma;
    let (mut s0, mut s1, mut c0, mut c1) = (0.0, 0.0, 1.0, 1.0);
    let mut w0 = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut az = vec![0.0; n];
    let mut z_next = vec![0.0; n];
    let mut iters = 0;
    for it in 0..opts.max_iter {
        iters = it + 1;
        z.iter_mut().for_each(|t| *t /= gamma);
        apply(&z, &mut az);
        let delta = dot(&az, &z);
        let v_next: Vec<f64> = (0..n).map(|i| az[i] - (delta / gamma) * v[i] - (gamma / gamma_prev) * v_prev[i]).collect();
        precond.apply(&v_next, &mut z_next);
        let gamma_next = dot(&z_next, &v_next).max(0.0).sqrt();
        let a0 = c1 * delta - c0 * s1 * gamma;
        let a1 = (a0 * a0 + gamma_next * gamma_next).sqrt();
        let a2 = s1 * delta + c0 * c1 * gamma;
        let a3 = s0 * gamma;
        if a1 == 0.0 {
            break;
        }
        let c2 = a0 / a1;
        let s2 = gamma_next / a1;
        let w2: Vec<f64> = (0..n).map(|i| (z[i] - a3 * w0[i] - a2 * w1[i]) / a1).collect();
        axpy(c2 * eta, &w2, &mut x);
        eta *= -s2;
        w0 = std::mem::replace(&mut w1, w2);
        v_prev = std::mem::replace(&mut v, v_next);
        std::mem::swap(&mut z, &mut z_next);
        gamma_prev = gamma;
        gamma = gamma_next;
        c0 = c1;
        c1 = c2;
        s0 = s1;
        s1 = s2;
        if eta.abs() <= opts.rtol * gamma1 || gamma == 0.0 {
            break;
        }
    }
    (x, iters)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub gtol: f64,
    pub max_iter: usize,
    pub linear: MinresOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    pub gnorm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Newton iteration on grad(x) = 0 with merit ‖grad‖².
pub fn newton<G, H>(x0: &[f64], grad: G, hess_vec: H, precond: &dyn Precond, opts: &NewtonOptions) -> NewtonResult
where
    G: Fn(&[f64], &mut [f64]),
    H: Fn(&[f64], &[f64], &mut [f64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    grad(&x, &mut g);
    let mut gnorm = norm(&g);
    let mut gt = vec![0.0; n];
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        if gnorm <= opts.gtol {
            return NewtonResult { x, gnorm, iterations: it, converged: true };
        }
        iterations = it + 1;
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let (d, _) = minres(|v, out| hess_vec(&x, v, out), &rhs, precond, &opts.linear);
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            grad(&xt, &mut gt);
            let gn = norm(&gt);
            if gn.is_finite() && gn < (1.0 - 1e-4 * step) * gnorm {
                x = xt;
                std::mem::swap(&mut g, &mut gt);
                gnorm = gn;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    NewtonResult { converged: gnorm <= opts.gtol, x, gnorm, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lbfgs_rosenbrock() {
        let obj = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            Some((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2))
        };
        let opts = LbfgsOptions { max_step: 10.0, ..Default::default() };
        let m = lbfgs(&[-1.2, 1.0], obj, &Identity, None::<fn(&mut [f64]) -> f64>, &opts).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m);
    }

    #[test]
    fn minres_indefinite() {
        let a = [[4.0, 1.0, 0.0], [1.0, -3.0, 2.0], [0.0, 2.0, 1.0]];
        let b = [1.0, 2.0, 3.0];
        let apply = |v: &[f64], out: &mut [f64]| {
            for i in 0..3 {
                out[i] = (0..3).map(|j| a[i][j] * v[j]).sum();
            }
        };
        let (x, _) = minres(apply, &b, &Identity, &MinresOptions { rtol: 1e-14, max_iter: 50 });
        let mut r = [0.0; 3];
        apply(&x, &mut r);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn equality_constrained_quadratic() {
        // min x² + 2y² s.t. x + y = 1 → (2/3, 1/3)
        let obj = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            g[1] = 4.0 * x[1];
            Some(x[0] * x[0] + 2.0 * x[1] * x[1])
        };
        let con = |x: &[f64], g: &mut [f64]| {
            g[0] = 1.0;
            g[1] = 1.0;
            Some(x[0] + x[1] - 1.0)
        };
        let opts = AlOptions { inner: LbfgsOptions { max_step: 100.0, ..Default::default() }, ..Default::default() };
        let r =
            augmented_lagrangian(&[0.0, 0.0], obj, con, ConstraintKind::Equality, &Identity, None::<fn(&mut [f64]) -> f64>, &opts).unwrap();
        assert!((r.x[0] - 2.0 / 3.0).abs() < 1e-7 && (r.x[1] - 1.0 / 3.0).abs() < 1e-7, "{:?}", r);
    }

    #[test]
    fn inequality_inactive_and_active() {
        let obj = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 2.0);
            Some((x[0] - 2.0).powi(2))
        };
        let con = |x: &[f64], g: &mut [f64]| {
            g[0] = 1.0;
            Some(x[0] - 1.0)
        };
        let opts = AlOptions { inner: LbfgsOptions { max_step: 100.0, ..Default::default() }, ..Default::default() };
        let r =
            augmented_lagrangian(&[0.0], obj, con, ConstraintKind::Inequality, &Identity, None::<fn(&mut [f64]) -> f64>, &opts).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-7, "{:?}", r);
        let con2 = |x: &[f64], g: &mut [f64]| {
            g[0] = 1.0;
            Some(x[0] - 3.0)
        };
        let r =
            augmented_lagrangian(&[0.0], obj, con2, ConstraintKind::Inequality, &Identity, None::<fn(&mut [f64]) -> f64>, &opts).unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-7, "{:?}", r);
    }
}
