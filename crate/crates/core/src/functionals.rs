//! Energy functionals, Nehari classification and the fibering reduction.
//!
//! With A = ∫|∇u|^p, B = ∫h|u|^p and F = ∫f|u|^γ:
//! H_λ = A − λB, Φ_λ = H_λ/p − F/γ, and along a ray s·u the energy is
//! stationary at s = (H/F)^{1/(γ−p)} whenever H and F share a strict sign.

use serde::{Deserialize, Serialize};

use crate::domain::{self, abs_pow, Domain, Field, WeightField};
use crate::error::{Result, SolverError};
use crate::linalg::norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemData {
    domain: Domain,
    p: f64,
    gamma: f64,
    h: WeightField,
    f: WeightField,
    eps_reg: f64,
    wh: Vec<f64>,
    wf: Vec<f64>,
}

pub const DEFAULT_EPS_REG: f64 = 1e-10;

impl ProblemData {
    pub fn new(p: f64, gamma: f64, h: WeightField, f: WeightField, eps_reg: f64) -> Result<Self> {
        let domain = *h.domain();
        if *f.domain() != domain {
            return Err(SolverError::InvalidProblem("h and f live on different domains".into()));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(SolverError::InvalidProblem(format!("p = {p} must exceed 1")));
        }
        if !(gamma > p) || !gamma.is_finite() {
            return Err(SolverError::InvalidProblem(format!("gamma = {gamma} must exceed p = {p}")));
        }
        let dim = domain.dim() as f64;
        if p < dim {
            let crit = dim * p / (dim - p);
            if gamma >= crit {
                return Err(SolverError::InvalidProblem(format!("gamma = {gamma} must stay below the critical exponent {crit}")));
            }
        }
        if !(eps_reg >= 0.0) || !eps_reg.is_finite() {
            return Err(SolverError::InvalidProblem("eps_reg must be finite and nonnegative".into()));
        }
        let w = domain.node_weight();
        let wh = h.interior_values().iter().map(|v| v * w).collect();
        let wf = f.interior_values().iter().map(|v| v * w).collect();
        Ok(Self { domain, p, gamma, h, f, eps_reg, wh, wf })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn h(&self) -> &WeightField {
        &self.h
    }

    pub fn f(&self) -> &WeightField {
        &self.f
    }

    pub fn eps_reg(&self) -> f64 {
        self.eps_reg
    }

    pub fn with_eps_reg(&self, eps_reg: f64) -> Result<Self> {
        Self::new(self.p, self.gamma, self.h.clone(), self.f.clone(), eps_reg)
    }

    pub fn with_weights(&self, h: WeightField, f: WeightField) -> Result<Self> {
        Self::new(self.p, self.gamma, h, f, self.eps_reg)
    }

    /// (γ − p)/(pγ)
    pub fn fiber_constant(&self) -> f64 {
        (self.gamma - self.p) / (self.p * self.gamma)
    }

    pub fn terms(&self, u: &[f64]) -> Terms {
        let (p, g) = (self.p, self.gamma);
        let a = domain::dirichlet_energy(&self.domain, u, p, self.eps_reg);
        let mut b = 0.0;
        let mut f = 0.0;
        let mut l = 0.0;
        for i in 0..u.len() {
            let up = abs_pow(u[i], p);
            let ug = abs_pow(u[i], g);
            b += self.wh[i] * up;
            f += self.wf[i] * ug;
            l += ug;
        }
        Terms { a, b, f, l: l * self.domain.node_weight() }
    }

    /// Values and gradients of A, B, F and L = ∫|u|^γ.
    pub fn terms_grad(&self, u: &[f64]) -> (Terms, TermGrads) {
        let (p, g) = (self.p, self.gamma);
        let n = u.len();
        let mut ga = vec![0.0; n];
        let a = domain::dirichlet_energy_grad(&self.domain, u, p, self.eps_reg, &mut ga);
        let w = self.domain.node_weight();
        let mut gb = vec![0.0; n];
        let mut gf = vec![0.0; n];
        let mut gl = vec![0.0; n];
        let (mut b, mut f, mut l) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let x = u[i];
            let dp = p * signed_pow(x, p - 1.0);
            let dg = g * signed_pow(x, g - 1.0);
            let up = abs_pow(x, p);
            let ug = abs_pow(x, g);
            b += self.wh[i] * up;
            f += self.wf[i] * ug;
            l += ug;
            gb[i] = self.wh[i] * dp;
            gf[i] = self.wf[i] * dg;
            gl[i] = w * dg;
        }
        (Terms { a, b, f, l: l * w }, TermGrads { a: ga, b: gb, f: gf, l: gl })
    }

    /// Hessian of Φ_λ at `u` applied to `d`.
    pub fn phi_hess_vec(&self, u: &[f64], lambda: f64, d: &[f64], out: &mut [f64]) {
        let (p, g) = (self.p, self.gamma);
        domain::dirichlet_hess_vec(&self.domain, u, p, self.eps_reg, d, out);
        for i in 0..u.len() {
            let x = u[i];
            let mp = if p == 2.0 {
                1.0
            } else if x == 0.0 {
                0.0
            } else {
                (p - 1.0) * x.abs().powf(p - 2.0)
            };
            let mg = (g - 1.0) * abs_pow(x, g - 2.0);
            out[i] = out[i] / p - lambda * self.wh[i] * mp * d[i] - self.wf[i] * mg * d[i];
        }
    }

    /// Nodal gradient of Φ_λ; returns Φ_λ.
    pub fn phi_and_grad(&self, u: &[f64], lambda: f64, grad: &mut [f64]) -> f64 {
        let (t, tg) = self.terms_grad(u);
        let (p, g) = (self.p, self.gamma);
        for i in 0..u.len() {
            grad[i] = (tg.a[i] - lambda * tg.b[i]) / p - tg.f[i] / g;
        }
        (t.a - lambda * t.b) / p - t.f / g
    }

    pub(crate) fn wf(&self) -> &[f64] {
        &self.wf
    }

    pub fn check(&self, u: &Field) -> Result<()> {
        if *u.domain() != self.domain {
            return Err(SolverError::Precondition("field lives on a different domain".into()));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn signed_pow(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        x
    } else if q == 3.0 {
        x * x * x
    } else if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terms {
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub l: f64,
}

impl Terms {
    pub fn h(&self, lambda: f64) -> f64 {
        self.a - lambda * self.b
    }

    pub fn quotient(&self) -> f64 {
        self.a / self.b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermGrads {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub f: Vec<f64>,
    pub l: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NehariClass {
    Plus,
    Minus,
    Zero,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub lambda: f64,
    pub h: f64,
    pub f: f64,
    pub phi: f64,
    pub nehari_class: NehariClass,
    pub residual: f64,
    pub tail_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeFlags {
    pub in_l_minus: bool,
    pub in_b_plus: bool,
    pub in_theta_plus: bool,
}

/// H_λ(u) = ∫|∇u|^p − λ∫h|u|^p
pub fn h_lambda(u: &Field, lambda: f64, data: &ProblemData) -> f64 {
    data.terms(u.values()).h(lambda)
}

/// F(u) = ∫f|u|^γ
pub fn f_gamma(u: &Field, data: &ProblemData) -> f64 {
    data.terms(u.values()).f
}

pub fn phi(u: &Field, lambda: f64, data: &ProblemData) -> f64 {
    let t = data.terms(u.values());
    t.h(lambda) / data.p - t.f / data.gamma
}

pub fn phi_grad(u: &Field, lambda: f64, data: &ProblemData) -> Field {
    let mut g = vec![0.0; u.len()];
    data.phi_and_grad(u.values(), lambda, &mut g);
    Field::from_vec_unchecked(*u.domain(), g)
}

pub fn classify(h: f64, f: f64, tol: f64) -> NehariClass {
    if (h - f).abs() > tol * (h.abs() + f.abs() + 1.0) {
        NehariClass::Off
    } else if h.abs() <= tol && f.abs() <= tol {
        NehariClass::Zero
    } else if h < -tol {
        NehariClass::Plus
    } else if h > tol {
        NehariClass::Minus
    } else {
        NehariClass::Off
    }
}

pub fn nehari_test(u: &Field, lambda: f64, data: &ProblemData, tol: f64) -> Result<NehariClass> {
    if u.is_zero() {
        return Err(SolverError::ZeroField);
    }
    let t = data.terms(u.values());
    Ok(classify(t.h(lambda), t.f, tol))
}

/// (H/F)^{1/(γ−p)} from precomputed H and F.
pub fn fiber_scale_from(h: f64, f: f64, p: f64, gamma: f64) -> Result<f64> {
    if !(h * f > 0.0) {
        return Err(SolverError::SignMismatch { h, f });
    }
    Ok((h / f).powf(1.0 / (gamma - p)))
}

/// ∓c|H|^{γ/(γ−p)}/|F|^{p/(γ−p)}: negative on the H, F < 0 cone and positive on H, F > 0.
pub fn reduced_from(h: f64, f: f64, p: f64, gamma: f64) -> Result<f64> {
    if !(h * f > 0.0) {
        return Err(SolverError::SignMismatch { h, f });
    }
    let c = (gamma - p) / (p * gamma);
    let q = gamma - p;
    let mag = c * h.abs().powf(gamma / q) / f.abs().powf(p / q);
    Ok(if h < 0.0 { -mag } else { mag })
}

pub fn fiber_scale(u: &Field, lambda: f64, data: &ProblemData) -> Result<f64> {
    let t = data.terms(u.values());
    fiber_scale_from(t.h(lambda), t.f, data.p, data.gamma)
}

pub fn reduced_j(u: &Field, lambda: f64, data: &ProblemData) -> Result<f64> {
    let t = data.terms(u.values());
    reduced_from(t.h(lambda), t.f, data.p, data.gamma)
}

/// ‖∇Φ_λ(u)‖₂ / max(1, ‖u‖₂)
pub fn pde_residual(u: &Field, lambda: f64, data: &ProblemData) -> Result<f64> {
    if u.is_zero() {
        return Err(SolverError::ZeroField);
    }
    Ok(residual_of(u.values(), lambda, data))
}

pub(crate) fn residual_of(u: &[f64], lambda: f64, data: &ProblemData) -> f64 {
    let mut g = vec![0.0; u.len()];
    data.phi_and_grad(u, lambda, &mut g);
    norm(&g) / norm(u).max(1.0)
}

/// Share of ∫|u|^γ + ∫|∇u|^p carried outside the radius `r`.
pub fn tail_fraction(u: &Field, r: f64, p: f64, gamma: f64) -> f64 {
    let d = u.domain();
    let radius = |x: [f64; 2]| (x[0] * x[0] + x[1] * x[1]).sqrt();
    let (mut total, mut tail) = (0.0, 0.0);
    for (k, &v) in u.values().iter().enumerate() {
        let m = abs_pow(v, gamma) * d.node_weight();
        total += m;
        if radius(d.interior_position(k)) > r {
            tail += m;
        }
    }
    let vol = d.cell_volume();
    d.for_each_gradient(u.values(), |e, g| {
        let m = domain::pow_half(g[0] * g[0] + g[1] * g[1], p) * vol;
        total += m;
        if radius(d.cell_centroid(e)) > r {
            tail += m;
        }
    });
    if total == 0.0 {
        0.0
    } else {
        (tail / total).clamp(0.0, 1.0)
    }
}

pub fn cone_membership(u: &Field, lambda: f64, mu: f64, data: &ProblemData) -> Result<ConeFlags> {
    if u.is_zero() {
        return Err(SolverError::ZeroField);
    }
    let t = data.terms(u.values());
    if t.a <= 0.0 {
        return Err(SolverError::ZeroField);
    }
    let s = t.a.powf(-1.0 / data.p);
    let v = u.scaled(s);
    let tv = data.terms(v.values());
    Ok(ConeFlags { in_l_minus: tv.h(lambda) < 0.0, in_b_plus: tv.f > 0.0, in_theta_plus: tv.h(mu) < 0.0 && tv.f < 0.0 })
}

pub fn energy_report(u: &Field, lambda: f64, data: &ProblemData, class_tol: f64) -> EnergyReport {
    let t = data.terms(u.values());
    let h = t.h(lambda);
    EnergyReport {
        lambda,
        h,
        f: t.f,
        phi: h / data.p - t.f / data.gamma,
        nehari_class: classify(h, t.f, class_tol),
        residual: residual_of(u.values(), lambda, data),
        tail_fraction: tail_fraction(u, 0.8 * data.domain.half_width(), data.p, data.gamma),
    }
}

/// ⟨A(u) − A(v), u − v⟩ for the discrete p-Laplacian A.
pub fn monotonicity_gap(u: &Field, v: &Field, p: f64) -> f64 {
    let au = domain::p_laplacian(u, p);
    let av = domain::p_laplacian(v, p);
    au.values().iter().zip(av.values()).zip(u.values().iter().zip(v.values())).map(|((a, b), (x, y))| (a - b) * (x - y)).sum()
}
