//! Run configuration: a TOML file, fully defaulted, with command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use nehari::weights::{preset_f, preset_h, PRESET_GAMMA, PRESET_HALF_WIDTH, PRESET_NODES, PRESET_P};
use nehari::{Domain, ProblemData, Profile, SolverOptions, WeightField};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub problem: ProblemSpec,
    pub lambda: LambdaSpec,
    pub solver: SolverOptions,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSpec {
    pub dim: usize,
    pub half_width: f64,
    pub nodes: usize,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self { dim: 1, half_width: PRESET_HALF_WIDTH, nodes: PRESET_NODES }
    }
}

/// A built-in profile, or whitespace-separated nodal values read from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    File { file: PathBuf },
    Profile(Profile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSpec {
    pub p: f64,
    pub gamma: f64,
    pub eps_reg: f64,
    pub tau_sign: f64,
    pub h: WeightSpec,
    pub f: WeightSpec,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            p: PRESET_P,
            gamma: PRESET_GAMMA,
            eps_reg: nehari::functionals::DEFAULT_EPS_REG,
            tau_sign: nehari::weights::DEFAULT_TAU_SIGN,
            h: WeightSpec::Profile(preset_h()),
            f: WeightSpec::Profile(preset_f()),
        }
    }
}

/// Explicit grid, or `below` points spread evenly over (λ₁, λ*) plus `above`
/// points λ*(1 + past_star·j/above), j = 1..above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    pub below: usize,
    pub above: usize,
    pub past_star: f64,
    /// Advance λ past λ* until the first-solution solve hits the cone face.
    pub epsilon_scan: bool,
}

impl Default for LambdaSpec {
    fn default() -> Self {
        Self { grid: None, below: 6, above: 2, past_star: 0.02, epsilon_scan: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: Format::Csv }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for w in [&mut cfg.problem.h, &mut cfg.problem.f] {
            if let WeightSpec::File { file } = w {
                if file.is_relative() {
                    *file = base.join(&*file);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form, output section excluded.
    pub fn hash(&self) -> String {
        let bare = Self { output: OutputSpec::default(), ..self.clone() };
        hex::encode(Sha256::digest(bare.to_toml().as_bytes()))
    }

    pub fn seed(&self) -> u64 {
        self.solver.seed
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(g) = &self.lambda.grid {
            if g.is_empty() {
                return Err(CliError::Config("lambda grid is empty".into()));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config("lambda grid has non-finite entries".into()));
            }
            if g.windows(2).any(|w| w[1] < w[0]) {
                return Err(CliError::Config("lambda grid must be sorted ascending".into()));
            }
        } else if self.lambda.below + self.lambda.above == 0 {
            return Err(CliError::Config("automatic lambda grid needs at least one point".into()));
        }
        if self.lambda.past_star.is_nan() || self.lambda.past_star <= 0.0 {
            return Err(CliError::Config("lambda.past_star must be positive".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ProblemData, CliError> {
        let d = Domain::new(self.domain.dim, self.domain.half_width, self.domain.nodes).map_err(CliError::from_solver)?;
        let p = &self.problem;
        let h = weight(&p.h, d, p.tau_sign)?;
        let f = weight(&p.f, d, p.tau_sign)?;
        ProblemData::new(p.p, p.gamma, h, f, p.eps_reg).map_err(CliError::from_solver)
    }
}

fn weight(spec: &WeightSpec, d: Domain, tau: f64) -> Result<WeightField, CliError> {
    let profile = match spec {
        WeightSpec::Profile(p) => p.clone(),
        WeightSpec::File { file } => {
            let text = fs::read_to_string(file).map_err(|e| CliError::Config(format!("{}: {e}", file.display())))?;
            let values = text
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| CliError::Config(format!("{}: {s}: {e}", file.display()))))
                .collect::<Result<Vec<_>, _>>()?;
            Profile::Nodal { values }
        }
    };
    profile.build(d, tau).map_err(CliError::from_solver)
}
