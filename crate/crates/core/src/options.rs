use serde::{Deserialize, Serialize};

use crate::exec::Exec;

/// Tolerances and knobs shared by every solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Target for the PDE residual of returned solutions.
    pub tol: f64,
    /// Tolerance for the Nehari classification.
    pub class_tol: f64,
    pub max_iter: usize,
    /// Multistart count for λ* and the restricted problems.
    pub restarts: usize,
    pub seed: u64,
    pub exec: Exec,
    /// Shift σ in the (K + σM)⁻¹ preconditioner.
    pub sigma: f64,
    pub continuation_steps: usize,
    /// Largest relative drift allowed between consecutive continuation minimizers.
    pub drift_factor: f64,
    /// μ₀ = q + θ(λ* − q) with q the largest minimizer quotient.
    pub separation_theta: f64,
    pub separation_margin: f64,
    pub plateau_tol: f64,
    /// |H_μ/∫|∇v|^p| below this puts a restricted minimizer on the face.
    pub boundary_tol: f64,
    pub knots: usize,
    pub max_sweeps: usize,
    pub distinct_tol: f64,
    pub second_endpoint: bool,
    pub skip_mountain_pass: bool,
    /// Relative λ increment and step cap for the empirical ε search.
    pub epsilon_step: f64,
    pub epsilon_max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            class_tol: 1e-6,
            max_iter: 5000,
            restarts: 8,
            seed: 0,
            exec: Exec::Parallel,
            sigma: 1.0,
            continuation_steps: 6,
            drift_factor: 0.5,
            separation_theta: 0.5,
            separation_margin: 1e-3,
            plateau_tol: 1e-6,
            boundary_tol: 1e-6,
            knots: 16,
            max_sweeps: 3000,
            distinct_tol: 1e-2,
            second_endpoint: false,
            skip_mountain_pass: false,
            epsilon_step: 0.01,
            epsilon_max_steps: 20,
        }
    }
}
