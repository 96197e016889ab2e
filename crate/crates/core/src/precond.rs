//! Sobolev preconditioner (K + σM)⁻¹ with K the p = 2 stiffness matrix.
//!
//! 1D uses a tridiagonal solve. 2D diagonalizes one axis with a DST-I and
//! solves a tridiagonal system per mode along the other.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::domain::Domain;

#[derive(Clone)]
pub struct Sobolev {
    domain: Domain,
    sigma: f64,
    fft: Option<Arc<dyn Fft<f64>>>,
    mask: Option<Vec<bool>>,
}

impl fmt::Debug for Sobolev {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sobolev").field("domain", &self.domain).field("sigma", &self.sigma).finish()
    }
}

fn thomas(diag: f64, rhs: &mut [f64], scratch: &mut [f64]) {
    let n = rhs.len();
    if n == 0 {
        return;
    }
    let mut b = diag;
    rhs[0] /= b;
    for i in 1..n {
        scratch[i] = -1.0 / b;
        b = diag + scratch[i];
        rhs[i] = (rhs[i] + rhs[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}

impl Sobolev {
    pub fn new(domain: Domain, sigma: f64) -> Self {
        let fft = (domain.dim() == 2).then(|| FftPlanner::new().plan_fft_forward(2 * (domain.interior_per_axis() + 1)));
        Self { domain, sigma, fft, mask: None }
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), self.domain.interior_len());
        self.mask = Some(mask);
        self
    }

    fn dst(&self, x: &mut [f64], buf: &mut [Complex<f64>]) {
        let m = x.len();
        let n = 2 * (m + 1);
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for i in 0..m {
            buf[i + 1].re = x[i];
            buf[n - 1 - i].re = -x[i];
        }
        self.fft.as_ref().expect("2D plan").process(buf);
        for k in 0..m {
            x[k] = -0.5 * buf[k + 1].im;
        }
    }

    pub fn apply(&self, r: &[f64], out: &mut [f64]) {
        let d = &self.domain;
        let m = d.interior_per_axis();
        let dx = d.spacing();
        out.copy_from_slice(r);
        if let Some(mask) = &self.mask {
            out.iter_mut().zip(mask).for_each(|(v, &keep)| {
                if !keep {
                    *v = 0.0
                }
            });
        }
        let mut scratch = vec![0.0; m];
        match d.dim() {
            1 => {
                // (tridiag(-1, 2, -1)/dx + σ dx) z = r
                out.iter_mut().for_each(|v| *v *= dx);
                thomas(2.0 + self.sigma * dx * dx, out, &mut scratch);
            }
            _ => {
                let mut buf = vec![Complex::new(0.0, 0.0); 2 * (m + 1)];
                for row in out.chunks_mut(m) {
                    self.dst(row, &mut buf);
                }
                let shift = self.sigma * dx * dx;
                let mut col = vec![0.0; m];
                for k in 0..m {
                    let theta = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (m + 1) as f64).cos();
                    for j in 0..m {
                        col[j] = out[j * m + k];
                    }
                    thomas(2.0 + theta + shift, &mut col, &mut scratch);
                    for j in 0..m {
                        out[j * m + k] = col[j];
                    }
                }
                let norm = 2.0 / (m + 1) as f64;
                for row in out.chunks_mut(m) {
                    self.dst(row, &mut buf);
                    row.iter_mut().for_each(|v| *v *= norm);
                }
            }
        }
        if let Some(mask) = &self.mask {
            out.iter_mut().zip(mask).for_each(|(v, &keep)| {
                if !keep {
                    *v = 0.0
                }
            });
        }
    }
}
