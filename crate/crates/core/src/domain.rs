//! Truncated box grids, nodal fields and the discrete p-Dirichlet energy.
//!
//! Fields live on interior nodes only; boundary nodes are implicitly zero.
//! In 1D each cell carries one gradient. In 2D every square cell is split
//! into two P1 triangles along the anti-diagonal, which keeps the energy free
//! of checkerboard null modes and reduces to the 5-point Laplacian at p = 2.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    dim: usize,
    half_width: f64,
    n: usize,
    dx: f64,
}

pub fn build_domain(dim: usize, half_width: f64, n: usize) -> Result<Domain> {
    if dim != 1 && dim != 2 {
        return Err(SolverError::InvalidDomain(format!("dimension {dim} not in {{1, 2}}")));
    }
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(SolverError::InvalidDomain(format!("half width {half_width} must be positive")));
    }
    if n < 3 {
        return Err(SolverError::InvalidDomain(format!("need at least 3 nodes per axis, got {n}")));
    }
    Ok(Domain { dim, half_width, n, dx: 2.0 * half_width / (n - 1) as f64 })
}

impl Domain {
    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        build_domain(dim, half_width, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.dx
    }

    /// Coordinate of grid line `i` along any axis; exactly antisymmetric about the center.
    pub fn coord(&self, i: usize) -> f64 {
        let n1 = (self.n - 1) as f64;
        self.half_width * (2.0 * i as f64 - n1) / n1
    }

    pub fn interior_per_axis(&self) -> usize {
        self.n - 2
    }

    pub fn interior_len(&self) -> usize {
        self.interior_per_axis().pow(self.dim as u32)
    }

    pub fn node_len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Number of gradient elements: cells in 1D, triangles in 2D.
    pub fn cell_len(&self) -> usize {
        match self.dim {
            1 => self.n - 1,
            _ => 2 * (self.n - 1) * (self.n - 1),
        }
    }

    pub fn cell_volume(&self) -> f64 {
        match self.dim {
            1 => self.dx,
            _ => 0.5 * self.dx * self.dx,
        }
    }

    /// Lumped quadrature weight of an interior node.
    pub fn node_weight(&self) -> f64 {
        self.dx.powi(self.dim as i32)
    }

    pub fn interior_position(&self, k: usize) -> [f64; 2] {
        let m = self.interior_per_axis();
        match self.dim {
            1 => [self.coord(k + 1), 0.0],
            _ => [self.coord(k % m + 1), self.coord(k / m + 1)],
        }
    }

    pub fn node_position(&self, k: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.coord(k), 0.0],
            _ => [self.coord(k % self.n), self.coord(k / self.n)],
        }
    }

    /// Full-grid index of interior node `k`.
    pub fn interior_to_node(&self, k: usize) -> usize {
        let m = self.interior_per_axis();
        match self.dim {
            1 => k + 1,
            _ => (k / m + 1) * self.n + k % m + 1,
        }
    }

    pub fn is_boundary_node(&self, k: usize) -> bool {
        let last = self.n - 1;
        match self.dim {
            1 => k == 0 || k == last,
            _ => {
                let (i, j) = (k % self.n, k / self.n);
                i == 0 || j == 0 || i == last || j == last
            }
        }
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 2] {
        let h = 0.5 * self.dx;
        match self.dim {
            1 => [self.coord(c) + h, 0.0],
            _ => {
                let cell = c / 2;
                let (i, j) = (cell % (self.n - 1), cell / (self.n - 1));
                let (x, y) = (self.coord(i), self.coord(j));
                let t = self.dx / 3.0;
                if c.is_multiple_of(2) {
                    [x + t, y + t]
                } else {
                    [x + 2.0 * t, y + 2.0 * t]
                }
            }
        }
    }

    /// Interior neighbours of interior node `k` along the axes.
    pub fn interior_neighbors(&self, k: usize) -> Vec<usize> {
        let m = self.interior_per_axis();
        let mut out = Vec::with_capacity(4);
        match self.dim {
            1 => {
                if k > 0 {
                    out.push(k - 1);
                }
                if k + 1 < m {
                    out.push(k + 1);
                }
            }
            _ => {
                let (i, j) = (k % m, k / m);
                if i > 0 {
                    out.push(k - 1);
                }
                if i + 1 < m {
                    out.push(k + 1);
                }
                if j > 0 {
                    out.push(k - m);
                }
                if j + 1 < m {
                    out.push(k + m);
                }
            }
        }
        out
    }

    fn value_at(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let last = self.n - 1;
        if i == 0 || j == 0 || i == last || j == last {
            0.0
        } else {
            u[(j - 1) * (self.n - 2) + i - 1]
        }
    }

    /// Visit every gradient element with its index and gradient vector.
    pub fn for_each_gradient(&self, u: &[f64], mut visit: impl FnMut(usize, [f64; 2])) {
        assert_eq!(u.len(), self.interior_len(), "field length does not match domain");
        let r = 1.0 / self.dx;
        match self.dim {
            1 => {
                let m = self.n - 2;
                for c in 0..self.n - 1 {
                    let left = if c == 0 { 0.0 } else { u[c - 1] };
                    let right = if c == m { 0.0 } else { u[c] };
                    visit(c, [(right - left) * r, 0.0]);
                }
            }
            _ => {
                let nc = self.n - 1;
                for j in 0..nc {
                    for i in 0..nc {
                        let a = self.value_at(u, i, j);
                        let b = self.value_at(u, i + 1, j);
                        let c = self.value_at(u, i, j + 1);
                        let d = self.value_at(u, i + 1, j + 1);
                        let e = 2 * (j * nc + i);
                        visit(e, [(b - a) * r, (c - a) * r]);
                        visit(e + 1, [(d - c) * r, (d - b) * r]);
                    }
                }
            }
        }
    }

    pub fn gradients(&self, u: &[f64]) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.cell_len()];
        self.for_each_gradient(u, |e, g| out[e] = g);
        out
    }

    /// Accumulate the transpose of the discrete gradient: out += Gᵀ q.
    pub fn gradient_transpose(&self, q: &[[f64; 2]], out: &mut [f64]) {
        assert_eq!(q.len(), self.cell_len());
        assert_eq!(out.len(), self.interior_len());
        let r = 1.0 / self.dx;
        match self.dim {
            1 => {
                let m = self.n - 2;
                for (c, qc) in q.iter().enumerate() {
                    let v = qc[0] * r;
                    if c > 0 {
                        out[c - 1] -= v;
                    }
                    if c < m {
                        out[c] += v;
                    }
                }
            }
            _ => {
                let nc = self.n - 1;
                let m = self.n - 2;
                let last = self.n - 1;
                let mut add = |i: usize, j: usize, v: f64| {
                    if i != 0 && j != 0 && i != last && j != last {
                        out[(j - 1) * m + i - 1] += v;
                    }
                };
                for j in 0..nc {
                    for i in 0..nc {
                        let e = 2 * (j * nc + i);
                        let [qx, qy] = q[e];
                        add(i, j, -(qx + qy) * r);
                        add(i + 1, j, qx * r);
                        add(i, j + 1, qy * r);
                        let [qx, qy] = q[e + 1];
                        add(i, j + 1, -qx * r);
                        add(i + 1, j, -qy * r);
                        add(i + 1, j + 1, (qx + qy) * r);
                    }
                }
            }
        }
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.interior_len() {
            return Err(SolverError::Precondition(format!("field has {len} values, domain has {} interior nodes", self.interior_len())));
        }
        Ok(())
    }
}

/// Nodal values on the interior nodes of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    domain: Domain,
    values: Vec<f64>,
}

impl Field {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self> {
        domain.check_len(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Precondition("field has non-finite entries".into()));
        }
        Ok(Self { domain, values })
    }

    pub fn zeros(domain: Domain) -> Self {
        Self { domain, values: vec![0.0; domain.interior_len()] }
    }

    pub fn from_fn(domain: Domain, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        let values = (0..domain.interior_len()).map(|k| f(domain.interior_position(k))).collect();
        Self { domain, values }
    }

    pub(crate) fn from_vec_unchecked(domain: Domain, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), domain.interior_len());
        Self { domain, values }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn norm2(&self) -> f64 {
        crate::linalg::norm(&self.values)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { domain: self.domain, values: self.values.iter().map(|v| t * v).collect() }
    }

    pub fn abs(&self) -> Self {
        Self { domain: self.domain, values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Relative distance ‖a − b‖₂ / max(‖a‖₂, ‖b‖₂).
    pub fn relative_distance(&self, other: &Field) -> f64 {
        let d = crate::linalg::dist(&self.values, &other.values);
        let s = self.norm2().max(other.norm2());
        if s == 0.0 {
            0.0
        } else {
            d / s
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
    Zero,
}

/// Coefficient values on every node with a cached sign partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightField {
    domain: Domain,
    values: Vec<f64>,
    tau_sign: f64,
    signs: Vec<Sign>,
}

impl WeightField {
    pub fn new(domain: Domain, values: Vec<f64>, tau_sign: f64) -> Result<Self> {
        if values.len() != domain.node_len() {
            return Err(SolverError::InvalidProblem(format!("weight has {} values, domain has {} nodes", values.len(), domain.node_len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::InvalidProblem("weight has non-finite entries".into()));
        }
        if !(tau_sign >= 0.0) {
            return Err(SolverError::InvalidProblem("sign tolerance must be nonnegative".into()));
        }
        let signs = values
            .iter()
            .map(|&v| {
                if v.abs() <= tau_sign {
                    Sign::Zero
                } else if v > 0.0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            })
            .collect();
        Ok(Self { domain, values, tau_sign, signs })
    }

    pub fn from_fn(domain: Domain, tau_sign: f64, mut f: impl FnMut([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..domain.node_len()).map(|k| f(domain.node_position(k))).collect();
        Self::new(domain, values, tau_sign)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tau_sign(&self) -> f64 {
        self.tau_sign
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn count(&self, sign: Sign) -> usize {
        self.signs.iter().filter(|&&s| s == sign).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn interior_values(&self) -> Vec<f64> {
        (0..self.domain.interior_len()).map(|k| self.values[self.domain.interior_to_node(k)]).collect()
    }

    pub fn interior_mask(&self, sign: Sign) -> Vec<bool> {
        (0..self.domain.interior_len()).map(|k| self.signs[self.domain.interior_to_node(k)] == sign).collect()
    }

    /// Values on the outermost node shell.
    pub fn boundary_values(&self) -> Vec<f64> {
        (0..self.domain.node_len()).filter(|&k| self.domain.is_boundary_node(k)).map(|k| self.values[k]).collect()
    }
}

#[inline]
pub(crate) fn pow_half(s: f64, p: f64) -> f64 {
    if p == 2.0 {
        s
    } else {
        s.powf(0.5 * p)
    }
}

/// Per-element (ε² + |∇u|²)^{p/2}.
pub fn grad_norm_powers(u: &Field, p: f64, eps_reg: f64) -> Vec<f64> {
    let d = u.domain();
    let e2 = eps_reg * eps_reg;
    let mut out = vec![0.0; d.cell_len()];
    d.for_each_gradient(u.values(), |e, g| out[e] = pow_half(e2 + g[0] * g[0] + g[1] * g[1], p));
    out
}

/// Quadrature of per-element values.
pub fn integrate_cells(domain: &Domain, values: &[f64]) -> f64 {
    assert_eq!(values.len(), domain.cell_len());
    values.iter().sum::<f64>() * domain.cell_volume()
}

/// Trapezoid quadrature of values on every node.
pub fn integrate_nodes(domain: &Domain, values: &[f64]) -> f64 {
    assert_eq!(values.len(), domain.node_len());
    let n = domain.nodes_per_axis();
    let axis = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(k, v)| match domain.dim() {
            1 => axis(k) * v,
            _ => axis(k % n) * axis(k / n) * v,
        })
        .sum();
    sum * domain.node_weight()
}

/// Lumped quadrature of values on interior nodes.
pub fn integrate_interior(domain: &Domain, values: &[f64]) -> f64 {
    assert_eq!(values.len(), domain.interior_len());
    values.iter().sum::<f64>() * domain.node_weight()
}

/// ∫ [(ε² + |∇u|²)^{p/2} − ε^p], shifted so the zero field has zero energy.
pub fn dirichlet_energy(domain: &Domain, u: &[f64], p: f64, eps_reg: f64) -> f64 {
    let e2 = eps_reg * eps_reg;
    let shift = pow_half(e2, p);
    let mut sum = 0.0;
    domain.for_each_gradient(u, |_, g| sum += pow_half(e2 + g[0] * g[0] + g[1] * g[1], p) - shift);
    sum * domain.cell_volume()
}

/// Energy and its nodal gradient; `grad` is overwritten.
pub fn dirichlet_energy_grad(domain: &Domain, u: &[f64], p: f64, eps_reg: f64, grad: &mut [f64]) -> f64 {
    let e2 = eps_reg * eps_reg;
    let shift = pow_half(e2, p);
    let vol = domain.cell_volume();
    let mut q = vec![[0.0; 2]; domain.cell_len()];
    let mut sum = 0.0;
    domain.for_each_gradient(u, |e, g| {
        let s = e2 + g[0] * g[0] + g[1] * g[1];
        let w = if p == 2.0 { 1.0 } else { s.powf(0.5 * p - 1.0) };
        sum += pow_half(s, p) - shift;
        let c = vol * p * w;
        q[e] = [c * g[0], c * g[1]];
    });
    grad.iter_mut().for_each(|v| *v = 0.0);
    domain.gradient_transpose(&q, grad);
    sum * vol
}

/// Hessian of the energy applied to `d`; `out` is overwritten.
pub fn dirichlet_hess_vec(domain: &Domain, u: &[f64], p: f64, eps_reg: f64, d: &[f64], out: &mut [f64]) {
    let e2 = eps_reg * eps_reg;
    let vol = domain.cell_volume();
    let gu = domain.gradients(u);
    let mut q = vec![[0.0; 2]; domain.cell_len()];
    domain.for_each_gradient(d, |e, dg| {
        let g = gu[e];
        if p == 2.0 {
            q[e] = [2.0 * vol * dg[0], 2.0 * vol * dg[1]];
            return;
        }
        let s = e2 + g[0] * g[0] + g[1] * g[1];
        if s == 0.0 {
            return;
        }
        let w = s.powf(0.5 * p - 1.0);
        let gd = g[0] * dg[0] + g[1] * dg[1];
        let k = (p - 2.0) * gd / s;
        let c = vol * p * w;
        q[e] = [c * (dg[0] + k * g[0]), c * (dg[1] + k * g[1])];
    });
    out.iter_mut().for_each(|v| *v = 0.0);
    domain.gradient_transpose(&q, out);
}

/// Discrete p-Laplacian Gᵀ(|∇u|^{p−2}∇u), the derivative of ∫|∇u|^p / p at ε = 0.
pub fn p_laplacian(u: &Field, p: f64) -> Field {
    let d = *u.domain();
    let mut out = vec![0.0; d.interior_len()];
    dirichlet_energy_grad(&d, u.values(), p, 0.0, &mut out);
    out.iter_mut().for_each(|v| *v /= p);
    Field::from_vec_unchecked(d, out)
}

pub(crate) fn abs_pow(x: f64, q: f64) -> f64 {
    if q == 2.0 {
        x * x
    } else if q == 4.0 {
        let s = x * x;
        s * s
    } else {
        x.abs().powf(q)
    }
}

/// ∫|u|^q by lumped quadrature.
pub fn lq_integral(domain: &Domain, u: &[f64], q: f64) -> f64 {
    u.iter().map(|&v| abs_pow(v, q)).sum::<f64>() * domain.node_weight()
}

/// [∫|∇u|^p + (∫|u|^γ)^{p/γ}]^{1/p}.
pub fn e_norm(u: &Field, p: f64, gamma: f64) -> f64 {
    let d = u.domain();
    let a = dirichlet_energy(d, u.values(), p, 0.0);
    let l = lq_integral(d, u.values(), gamma);
    (a + l.powf(p / gamma)).powf(1.0 / p)
}
