//! Built-in coefficient profiles and the reference preset.

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, WeightField};
use crate::error::Result;
use crate::functionals::{ProblemData, DEFAULT_EPS_REG};

pub const DEFAULT_TAU_SIGN: f64 = 1e-12;

/// Radial profiles in |x| (Euclidean), or raw nodal values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// far + (peak − far)·exp(−(|x|/width)²)
    Gaussian {
        peak: f64,
        far: f64,
        width: f64,
    },
    /// `inner` on |x| < radius, 0 on radius ≤ |x| ≤ radius + gap, `far` beyond.
    Annulus {
        inner: f64,
        radius: f64,
        gap: f64,
        far: f64,
    },
    /// One value per node, row-major with x fastest.
    Nodal {
        values: Vec<f64>,
    },
}

impl Profile {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        match self {
            Profile::Constant { value } => *value,
            Profile::Gaussian { peak, far, width } => far + (peak - far) * (-(r / width).powi(2)).exp(),
            Profile::Annulus { inner, radius, gap, far } => {
                if r < *radius {
                    *inner
                } else if r <= radius + gap {
                    0.0
                } else {
                    *far
                }
            }
            Profile::Nodal { .. } => f64::NAN,
        }
    }

    pub fn build(&self, domain: Domain, tau_sign: f64) -> Result<WeightField> {
        match self {
            Profile::Nodal { values } => WeightField::new(domain, values.clone(), tau_sign),
            _ => WeightField::from_fn(domain, tau_sign, |x| self.eval(x)),
        }
    }
}

pub fn preset_h() -> Profile {
    Profile::Gaussian { peak: 1.0, far: -1.0, width: 2.0 }
}

pub fn preset_f() -> Profile {
    Profile::Gaussian { peak: 1.0, far: -3.0, width: 0.7 }
}

pub const PRESET_P: f64 = 2.0;
pub const PRESET_GAMMA: f64 = 4.0;
pub const PRESET_HALF_WIDTH: f64 = 10.0;
pub const PRESET_NODES: usize = 201;

/// Localized h with a negative far field, f positive near the origin and negative outside.
pub fn preset(domain: Domain) -> Result<ProblemData> {
    let h = preset_h().build(domain, DEFAULT_TAU_SIGN)?;
    let f = preset_f().build(domain, DEFAULT_TAU_SIGN)?;
    ProblemData::new(PRESET_P, PRESET_GAMMA, h, f, DEFAULT_EPS_REG)
}
