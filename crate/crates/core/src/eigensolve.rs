//! First eigenpair of −Δ_p with weight h, optionally on a node mask, and the hypothesis report.

use serde::{Deserialize, Serialize};

use crate::common::{self, box_bump, jitter};
use crate::domain::{Field, Sign};
use crate::error::{Result, SolverError};
use crate::functionals::ProblemData;
use crate::linalg::norm;
use crate::optim::{lbfgs, LbfgsOptions};
use crate::options::SolverOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Nonnegative, normalized to ∫h|φ₁|^p = 1.
    pub phi1: Field,
    pub iterations: usize,
    /// ‖∇R(φ₁)‖₂ with R the Rayleigh quotient.
    pub residual: f64,
}

fn quotient_grad(data: &ProblemData, x: &[f64], mask: &[bool], g: &mut [f64]) -> Option<f64> {
    let (t, tg) = data.terms_grad(x);
    if !(t.b > 0.0) {
        return None;
    }
    let r = t.a / t.b;
    for i in 0..x.len() {
        g[i] = if mask[i] { (tg.a[i] - r * tg.b[i]) / t.b } else { 0.0 };
    }
    Some(r)
}

/// Minimize ∫|∇u|^p / ∫h|u|^p over fields vanishing outside `mask`.
pub fn lambda1(data: &ProblemData, mask: Option<&[bool]>, opts: &SolverOptions) -> Result<EigenResult> {
    let d = *data.domain();
    let n = d.interior_len();
    let full = vec![true; n];
    let mask = match mask {
        Some(m) if m.len() != n => return Err(SolverError::Precondition(format!("mask has {} entries, expected {n}", m.len()))),
        Some(m) => m.to_vec(),
        None => full,
    };
    let h = data.h().interior_values();
    if !(0..n).any(|i| mask[i] && h[i] > 0.0) {
        return Err(SolverError::NoAdmissibleField);
    }
    let mut x0: Vec<f64> = (0..n).map(|k| if mask[k] { h[k].max(0.0) * box_bump(&d, d.interior_position(k)) } else { 0.0 }).collect();
    if x0.iter().all(|&v| v == 0.0) {
        x0 = (0..n).map(|k| if mask[k] && h[k] > 0.0 { 1.0 } else { 0.0 }).collect();
    }
    jitter(&mut x0, 0.05, opts.seed, 0);
    let p = data.p();
    let pc = common::precond(data, opts).with_mask(mask.clone());
    let lopts = LbfgsOptions { max_iter: opts.max_iter, gtol: 1e-13, ftol: 1e-16, stall_iters: 10, ..Default::default() };
    let normalize = |x: &mut [f64]| {
        let b = data.terms(x).b;
        if !(b > 0.0) {
            return 1.0;
        }
        let t = b.powf(-1.0 / p);
        x.iter_mut().for_each(|v| *v *= t);
        t
    };
    let m = lbfgs(&x0, |x, g| quotient_grad(data, x, &mask, g), &pc, Some(normalize), &lopts).ok_or(SolverError::NoAdmissibleField)?;
    let mut phi: Vec<f64> = common::abs_vec(&m.x);
    let b = data.terms(&phi).b;
    if !(b > 0.0) {
        return Err(SolverError::NoAdmissibleField);
    }
    let t = b.powf(-1.0 / p);
    phi.iter_mut().for_each(|v| *v *= t);
    let mut g = vec![0.0; n];
    let lambda1 = quotient_grad(data, &phi, &mask, &mut g).ok_or(SolverError::NoAdmissibleField)?;
    Ok(EigenResult { lambda1, phi1: Field::new(d, phi)?, iterations: m.iterations, residual: norm(&g) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessDetail {
    /// λ₁ on Ω_f⁺ ∪ Ω_f⁰ and on Ω_f⁰; `None` means no admissible field (+∞).
    pub lambda_plus_zero: Option<f64>,
    pub lambda_zero: Option<f64>,
    pub eroded_lambda_plus_zero: Option<f64>,
    pub eroded_lambda_zero: Option<f64>,
    /// Set when erosion moves either eigenvalue by more than 5%.
    pub erosion_differs: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesesReport {
    pub f1: bool,
    /// `None` when Ω_f⁰ has no interior nodes.
    pub f2: Option<bool>,
    pub f_inf: bool,
    pub f_phi1: bool,
    pub f_at_phi1: f64,
    pub nodes_plus: usize,
    pub nodes_minus: usize,
    pub nodes_zero: usize,
    pub thickness: Option<ThicknessDetail>,
    pub warnings: Vec<String>,
}

fn erode(data: &ProblemData, mask: &[bool]) -> Vec<bool> {
    let d = data.domain();
    let full = 2 * d.dim();
    (0..mask.len())
        .map(|k| {
            let nb = d.interior_neighbors(k);
            mask[k] && nb.len() == full && nb.iter().all(|&j| mask[j])
        })
        .collect()
}

fn masked_lambda(data: &ProblemData, mask: &[bool], opts: &SolverOptions) -> Result<Option<f64>> {
    if !mask.iter().any(|&m| m) {
        return Ok(None);
    }
    match lambda1(data, Some(mask), opts) {
        Ok(r) => Ok(Some(r.lambda1)),
        Err(SolverError::NoAdmissibleField) => Ok(None),
        Err(e) => Err(e),
    }
}

fn lt(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

fn rel_gap(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() > 0.05 * x.abs().max(y.abs()),
        (None, None) => false,
        _ => true,
    }
}

pub fn validate_hypotheses(data: &ProblemData, eig: &EigenResult, opts: &SolverOptions) -> Result<HypothesesReport> {
    let f = data.f();
    let (np, nm, nz) = (f.count(Sign::Plus), f.count(Sign::Minus), f.count(Sign::Zero));
    let f1 = np > 0 && nm > 0;
    let f_inf = f.boundary_values().iter().all(|&v| v < -f.tau_sign());
    let f_at_phi1 = data.terms(eig.phi1.values()).f;
    let f_phi1 = f_at_phi1 < 0.0;
    let zero = f.interior_mask(Sign::Zero);
    let plus = f.interior_mask(Sign::Plus);
    let mut warnings = Vec::new();
    let thickness = if zero.iter().any(|&z| z) {
        let plus_zero: Vec<bool> = zero.iter().zip(&plus).map(|(a, b)| *a || *b).collect();
        let (ez, epz) = (erode(data, &zero), erode(data, &plus_zero));
        let masks = [plus_zero, zero, epz, ez];
        let vals = opts.exec.map(&masks, |m| masked_lambda(data, m, opts));
        let mut out = [None; 4];
        for (o, v) in out.iter_mut().zip(vals) {
            *o = v?;
        }
        let erosion_differs = rel_gap(out[0], out[2]) || rel_gap(out[1], out[3]);
        warnings.push("Omega_f^0 has interior nodes: the spectrum of -Delta_p on balls inside it is not excluded".to_string());
        Some(ThicknessDetail {
            lambda_plus_zero: out[0],
            lambda_zero: out[1],
            eroded_lambda_plus_zero: out[2],
            eroded_lambda_zero: out[3],
            erosion_differs,
        })
    } else {
        None
    };
    let f2 = thickness.as_ref().map(|t| lt(t.lambda_plus_zero, t.lambda_zero));
    if !f1 {
        warnings.push("Omega_f^+ or Omega_f^- is empty".to_string());
    }
    if !f_phi1 {
        warnings.push("int f |phi_1|^gamma >= 0".to_string());
    }
    Ok(HypothesesReport { f1, f2, f_inf, f_phi1, f_at_phi1, nodes_plus: np, nodes_minus: nm, nodes_zero: nz, thickness, warnings })
}
