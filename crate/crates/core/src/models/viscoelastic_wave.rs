//! Wave equation with memory in the history formulation
//!
//! ```text
//! u_tt = -(1 - mu~) K u - sum_j w_j K eta_j - b(t) u_t(t - tau)
//! eta_t = -eta_s + u_t,   eta(s = 0) = 0
//! ```
//!
//! with state `(u, v, eta_1 .. eta_{n_s})`, `eta_j` sampled at
//! `s_j = j ds`, `w_j = mu(s_j) ds`, first-order upwind differences in `s`
//! and the energy Gram `diag((1 - mu~) dx K, dx I, w_1 dx K, ..)`.

use faer::{Col, Mat};
use serde::{Deserialize, Serialize};

use super::{dirichlet_laplacian, grid, laplacian_eigenvalues, laplacian_modes};
use crate::error::{Error, Result};
use crate::semigroup::{estimate_envelope_decoupled, EnvelopeStrategy, SemigroupEnvelope};
use crate::system::{DelaySystem, FeedbackMode, InnerProduct};

/// Largest admissible `e^{-delta s_max}`.
pub const TRUNCATION_TOL: f64 = 1e-8;

/// `mu(s) = mu0 e^{-delta s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryKernel {
    pub mu0: f64,
    pub delta: f64,
}

impl MemoryKernel {
    pub fn new(mu0: f64, delta: f64) -> Result<Self> {
        if !(mu0 > 0.0) || !mu0.is_finite() {
            return Err(Error::InvalidParameter(format!("mu0 must be positive, got {mu0}")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::NonPositiveDecay(delta));
        }
        let kernel = MemoryKernel { mu0, delta };
        if kernel.mass() >= 1.0 {
            return Err(Error::KernelMassExceedsOne(kernel.mass()));
        }
        Ok(kernel)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.mu0 * (-self.delta * s).exp()
    }

    /// `mu~ = int_0^inf mu = mu0 / delta`.
    pub fn mass(&self) -> f64 {
        self.mu0 / self.delta
    }
}

#[derive(Debug, Clone)]
pub struct ViscoelasticWaveModel {
    pub n_x: usize,
    pub n_s: usize,
    pub s_max: f64,
    pub kernel: MemoryKernel,
    pub dx: f64,
    pub ds: f64,
    /// Quadrature weights `w_j = mu(s_j) ds`.
    pub weights: Vec<f64>,
    pub system: DelaySystem,
}

pub fn build_viscoelastic_wave(
    n_x: usize,
    n_s: usize,
    s_max: f64,
    kernel: MemoryKernel,
    b_values: &[f64],
    cyclic: bool,
) -> Result<ViscoelasticWaveModel> {
    let kernel = MemoryKernel::new(kernel.mu0, kernel.delta)?;
    if n_x < 2 || n_s < 2 {
        return Err(Error::InvalidParameter(format!("need n_x, n_s >= 2 (got {n_x}, {n_s})")));
    }
    if !(s_max > 0.0) {
        return Err(Error::InvalidParameter(format!("s_max must be positive, got {s_max}")));
    }
    let tail = (-kernel.delta * s_max).exp();
    if tail > TRUNCATION_TOL {
        return Err(Error::TruncationTooShort(tail));
    }

    let (dx, _) = grid(n_x);
    let ds = s_max / n_s as f64;
    let weights: Vec<f64> = (1..=n_s).map(|j| kernel.eval(j as f64 * ds) * ds).collect();
    let elastic = 1.0 - kernel.mass();
    let k = dirichlet_laplacian(n_x);
    let dim = n_x * (2 + n_s);
    let (u, v) = (0, n_x);
    let eta = |j: usize| (2 + j) * n_x;

    let mut a = Mat::<f64>::zeros(dim, dim);
    let mut gram = Mat::<f64>::zeros(dim, dim);
    for i in 0..n_x {
        a[(u + i, v + i)] = 1.0;
        gram[(v + i, v + i)] = dx;
        for l in 0..n_x {
            let kil = k[(i, l)];
            if kil == 0.0 {
                continue;
            }
            a[(v + i, u + l)] = -elastic * kil;
            gram[(u + i, u + l)] = elastic * dx * kil;
            for (j, &w) in weights.iter().enumerate() {
                a[(v + i, eta(j) + l)] = -w * kil;
                gram[(eta(j) + i, eta(j) + l)] = w * dx * kil;
            }
        }
        for j in 0..n_s {
            a[(eta(j) + i, eta(j) + i)] = -1.0 / ds;
            if j > 0 {
                a[(eta(j) + i, eta(j - 1) + i)] = 1.0 / ds;
            }
            a[(eta(j) + i, v + i)] = 1.0;
        }
    }

    let ops = b_values.iter().map(|&b| feedback_operator(n_x, n_s, b)).collect();
    let system = DelaySystem::new(a, ops, FeedbackMode::Delayed, InnerProduct::new(gram)?, cyclic)?;
    Ok(ViscoelasticWaveModel {
        n_x,
        n_s,
        s_max,
        kernel,
        dx,
        ds,
        weights,
        system,
    })
}

/// `B(u, v, eta) = (0, -b v, 0)`.
fn feedback_operator(n_x: usize, n_s: usize, b: f64) -> Mat<f64> {
    let dim = n_x * (2 + n_s);
    Mat::from_fn(dim, dim, |i, j| if i == j && (n_x..2 * n_x).contains(&i) { -b } else { 0.0 })
}

impl ViscoelasticWaveModel {
    pub fn dim(&self) -> usize {
        self.n_x * (2 + self.n_s)
    }

    /// `sum_j w_j`, the discrete counterpart of `mu~`.
    pub fn discrete_kernel_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Generator blocks of the `n_x` Laplacian modes, each of size
    /// `2 + n_s` and expressed in coordinates orthonormal for the Gram.
    /// The full semigroup norm is the largest block norm.
    pub fn modal_blocks(&self) -> Vec<Mat<f64>> {
        let elastic = 1.0 - self.kernel.mass();
        let n = 2 + self.n_s;
        laplacian_eigenvalues(self.n_x)
            .into_iter()
            .map(|lam| {
                let mut weight = vec![elastic * self.dx * lam, self.dx];
                weight.extend(self.weights.iter().map(|w| w * self.dx * lam));
                let mut a = Mat::<f64>::zeros(n, n);
                a[(0, 1)] = 1.0;
                a[(1, 0)] = -elastic * lam;
                for j in 0..self.n_s {
                    a[(1, 2 + j)] = -self.weights[j] * lam;
                    a[(2 + j, 2 + j)] = -1.0 / self.ds;
                    if j > 0 {
                        a[(2 + j, 1 + j)] = 1.0 / self.ds;
                    }
                    a[(2 + j, 1)] = 1.0;
                }
                let sqrt: Vec<f64> = weight.iter().map(|w| w.sqrt()).collect();
                Mat::from_fn(n, n, |i, j| sqrt[i] * a[(i, j)] / sqrt[j])
            })
            .collect()
    }

    /// Envelope from the modal blocks.
    pub fn envelope(&self, strategy: EnvelopeStrategy) -> Result<SemigroupEnvelope> {
        estimate_envelope_decoupled(&self.modal_blocks(), strategy)
    }

    /// State from `u(x, 0)`, `u_t(x, 0)` and the past `u(x, -s)`:
    /// `eta_0(x, s) = u(x, 0) - u(x, -s)`.
    pub fn initial_state(
        &self,
        u0: impl Fn(f64) -> f64,
        u1: impl Fn(f64) -> f64,
        past: impl Fn(f64, f64) -> f64,
    ) -> Col<f64> {
        let (_, x) = grid(self.n_x);
        let n_x = self.n_x;
        Col::from_fn(self.dim(), |idx| {
            let (block, i) = (idx / n_x, idx % n_x);
            match block {
                0 => u0(x[i]),
                1 => u1(x[i]),
                b => {
                    let s = (b - 1) as f64 * self.ds;
                    u0(x[i]) - past(x[i], s)
                }
            }
        })
    }

    /// Modal transform check helper: `Phi` of the spatial Laplacian.
    pub fn spatial_modes(&self) -> Mat<f64> {
        laplacian_modes(self.n_x)
    }
}
