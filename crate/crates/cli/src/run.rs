//! Orchestration: validate → λ₁ → λ* → sweep → mountain pass, writing one file per stage.

use std::fs;

use nehari::branches::{empirical_epsilon, past_star_setup, sweep, EpsilonScan, PastStar};
use nehari::eigensolve::{lambda1, validate_hypotheses};
use nehari::extremal::{lambda_star, t0_rescale, ExtremeResult, Landmarks};
use nehari::functionals::{nehari_test, pde_residual};
use nehari::{SolverError, SolverOptions};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{emit_diagram, envelope, to_value, write_json};
use crate::CliError;

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    Partial,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Complete => 0,
            Status::Partial => 2,
        }
    }
}

fn error_value(e: &SolverError) -> Value {
    json!({ "error": e.code(), "message": e.to_string() })
}

pub fn auto_grid(cfg: &RunConfig, l1: f64, ls: Option<f64>) -> Vec<f64> {
    let spec = &cfg.lambda;
    let top = ls.unwrap_or(2.0 * l1);
    let mut grid: Vec<f64> = (1..=spec.below).map(|i| l1 + (top - l1) * i as f64 / (spec.below + 1) as f64).collect();
    if let Some(ls) = ls {
        grid.extend((1..=spec.above).map(|j| ls * (1.0 + spec.past_star * j as f64 / spec.above as f64)));
    }
    grid
}

fn extreme_report(ex: &ExtremeResult, data: &nehari::ProblemData, opts: &SolverOptions) -> Value {
    let zero = t0_rescale(&ex.u_star, ex.lambda_star, data).ok().map(|(t0, w)| {
        json!({
            "t0": t0,
            "class": nehari_test(&w, ex.lambda_star, data, opts.class_tol).ok(),
            "residual": pde_residual(&w, ex.lambda_star, data).ok(),
        })
    });
    json!({
        "infeasible": false,
        "lambda_star": ex.lambda_star,
        "f_at_min": ex.f_at_min,
        "constraint_residual": ex.constraint_residual,
        "t0": ex.t0,
        "best_start": ex.best_start,
        "starts": ex.starts,
        "zero_witness": zero,
        "u_star": ex.u_star.values(),
    })
}

fn past_star_value(ps: &Result<PastStar, SolverError>, scan: Option<&Result<EpsilonScan, SolverError>>) -> Value {
    let setup = match ps {
        Ok(ps) => json!({
            "mu0": ps.mu0,
            "continuation_lambdas": ps.star.lambdas,
            "continuation_values": ps.star.values,
            "phi_at_star": ps.star.point.report.phi,
        }),
        Err(e) => error_value(e),
    };
    let scan = match scan {
        Some(Ok(s)) => json!({
            "probes": s.probes.iter().map(|(l, st)| json!({ "lambda": l, "status": st })).collect::<Vec<_>>(),
            "epsilon": s.epsilon,
            "boundary_hit": s.boundary_hit,
        }),
        Some(Err(e)) => error_value(e),
        None => Value::Null,
    };
    json!({ "setup": setup, "epsilon_scan": scan })
}

/// Run the whole pipeline. Errors are configuration or I/O failures; solver failures give `Partial`.
pub fn run(cfg: &RunConfig) -> Result<Status, CliError> {
    cfg.validate()?;
    let data = cfg.build()?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let hash = cfg.hash();
    let seed = cfg.seed();
    let cfg_value = to_value(cfg);
    let wrap = |body: Value| envelope(&cfg_value, &hash, seed, body);
    fs::write(dir.join("config.toml"), cfg.to_toml()).map_err(|e| CliError::Io(format!("config.toml: {e}")))?;
    let opts = &cfg.solver;

    let eig = match lambda1(&data, None, opts) {
        Ok(e) => e,
        Err(e) => {
            write_json(dir, "eigen.json", &wrap(error_value(&e)))?;
            eprintln!("first eigenpair failed: {e}");
            return Ok(Status::Partial);
        }
    };
    write_json(dir, "eigen.json", &wrap(to_value(&eig)))?;
    let hyp = validate_hypotheses(&data, &eig, opts);
    match &hyp {
        Ok(h) => write_json(dir, "hypotheses.json", &wrap(to_value(h)))?,
        Err(e) => write_json(dir, "hypotheses.json", &wrap(error_value(e)))?,
    }
    match hyp {
        Ok(h) if !h.f1 => {
            eprintln!("hypothesis F1 fails: f must take both signs (nodes with f > 0: {}, f < 0: {})", h.nodes_plus, h.nodes_minus);
            return Ok(Status::Partial);
        }
        Err(e) => {
            eprintln!("hypothesis validation failed: {e}");
            return Ok(Status::Partial);
        }
        Ok(_) => {}
    }

    let mut partial = false;
    let extreme = lambda_star(&data, &eig, opts);
    let ex_value = match &extreme {
        Ok(ex) => extreme_report(ex, &data, opts),
        Err(SolverError::InfeasibleConstraint) => json!({ "infeasible": true, "lambda_star": "infeasible" }),
        Err(e) => {
            partial = true;
            error_value(e)
        }
    };
    let marks = Landmarks::new(&eig, extreme.as_ref().ok());

    let mut past = Value::Null;
    if extreme.is_ok() && cfg.lambda.epsilon_scan {
        let ps = past_star_setup(&data, &marks, opts);
        let scan = ps.as_ref().ok().map(|p| empirical_epsilon(&data, &marks, p.mu0, &p.star.point.u, opts));
        past = past_star_value(&ps, scan.as_ref());
    }
    let mut ex_value = ex_value;
    if let Value::Object(m) = &mut ex_value {
        m.insert("past_star".into(), past);
    }
    write_json(dir, "extreme.json", &wrap(to_value(&ex_value)))?;

    let grid = match &cfg.lambda.grid {
        Some(g) => g.clone(),
        None => auto_grid(cfg, eig.lambda1, marks.lambda_star),
    };
    let out = sweep(&grid, &data, &marks, opts);
    emit_diagram(dir, &out.rows, cfg.output.format, &hash, seed)?;
    partial |= out.rows.iter().any(|r| r.outcome.is_err());

    let passes: Vec<Value> = out
        .passes
        .iter()
        .map(|(l, r)| match r {
            Ok(rep) => json!({ "lambda": l, "status": "ok", "result": to_value(rep) }),
            Err(e) => json!({ "lambda": l, "status": e.code(), "message": e.to_string() }),
        })
        .collect();
    let setup = out.past_star.as_ref().map(|ps| past_star_value(ps, None));
    let mp = json!({ "past_star": setup, "runs": passes });
    write_json(dir, "mountainpass.json", &wrap(to_value(&mp)))?;
    partial |= out.passes.iter().any(|(_, r)| r.is_err());

    Ok(if partial { Status::Partial } else { Status::Complete })
}
