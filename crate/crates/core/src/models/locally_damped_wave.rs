//! Wave equation with internal damping on `omega1 = (l1, 1)` and switched
//! delayed feedback on `omega2 = (l2, r2)`:
//!
//! ```text
//! u_tt = -K u - a chi1 u_t - b(t) chi2 u_t(t - tau)
//! ```
//!
//! State `(u, v)`, Gram `diag(dx K, dx I)`.

use faer::{Col, Mat};

use super::{dirichlet_laplacian, grid};
use crate::error::{Error, Result};
use crate::semigroup::{estimate_envelope, EnvelopeStrategy, SemigroupEnvelope};
use crate::system::{DelaySystem, FeedbackMode, InnerProduct};

#[derive(Debug, Clone)]
pub struct LocallyDampedWaveModel {
    pub n_x: usize,
    pub a: f64,
    pub omega1: (f64, f64),
    pub omega2: (f64, f64),
    pub dx: f64,
    /// Indicator of `omega1` on the grid.
    pub chi1: Vec<bool>,
    /// Indicator of `omega2` on the grid.
    pub chi2: Vec<bool>,
    pub system: DelaySystem,
}

fn indicator(x: &[f64], (l, r): (f64, f64), name: &str) -> Result<Vec<bool>> {
    if !(0.0..1.0).contains(&l) || !(r > l && r <= 1.0) {
        return Err(Error::BadSubinterval(format!("{name} = ({l}, {r}) is not a subinterval of (0, 1)")));
    }
    let chi: Vec<bool> = x.iter().map(|&xi| xi > l && xi < r).collect();
    if !chi.iter().any(|&c| c) {
        return Err(Error::BadSubinterval(format!("{name} = ({l}, {r}) contains no grid node")));
    }
    Ok(chi)
}

/// `omega1 = (l1, 1)` must touch the right end of the domain.
pub fn build_locally_damped_wave(
    n_x: usize,
    a: f64,
    omega1: (f64, f64),
    omega2: (f64, f64),
    b_values: &[f64],
    cyclic: bool,
) -> Result<LocallyDampedWaveModel> {
    if n_x < 2 {
        return Err(Error::InvalidParameter(format!("need n_x >= 2, got {n_x}")));
    }
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("damping coefficient must be >= 0, got {a}")));
    }
    if omega1.1 != 1.0 {
        return Err(Error::BadSubinterval(format!(
            "omega1 = ({}, {}) must end at 1",
            omega1.0, omega1.1
        )));
    }
    let (dx, x) = grid(n_x);
    let chi1 = indicator(&x, omega1, "omega1")?;
    let chi2 = indicator(&x, omega2, "omega2")?;

    let k = dirichlet_laplacian(n_x);
    let dim = 2 * n_x;
    let mut gen = Mat::<f64>::zeros(dim, dim);
    let mut gram = Mat::<f64>::zeros(dim, dim);
    for i in 0..n_x {
        gen[(i, n_x + i)] = 1.0;
        if chi1[i] {
            gen[(n_x + i, n_x + i)] = -a;
        }
        gram[(n_x + i, n_x + i)] = dx;
        for j in 0..n_x {
            gen[(n_x + i, j)] = -k[(i, j)];
            gram[(i, j)] = dx * k[(i, j)];
        }
    }
    let ops = b_values
        .iter()
        .map(|&b| {
            Mat::from_fn(dim, dim, |i, j| {
                if i == j && i >= n_x && chi2[i - n_x] {
                    -b
                } else {
                    0.0
                }
            })
        })
        .collect();
    let system = DelaySystem::new(gen, ops, FeedbackMode::Delayed, InnerProduct::new(gram)?, cyclic)?;
    Ok(LocallyDampedWaveModel {
        n_x,
        a,
        omega1,
        omega2,
        dx,
        chi1,
        chi2,
        system,
    })
}

impl LocallyDampedWaveModel {
    pub fn dim(&self) -> usize {
        2 * self.n_x
    }

    pub fn envelope(&self, strategy: EnvelopeStrategy) -> Result<SemigroupEnvelope> {
        estimate_envelope(self.system.generator(), self.system.inner_product(), strategy)
    }

    pub fn initial_state(&self, u0: impl Fn(f64) -> f64, u1: impl Fn(f64) -> f64) -> Col<f64> {
        let (_, x) = grid(self.n_x);
        let n = self.n_x;
        Col::from_fn(2 * n, |i| if i < n { u0(x[i]) } else { u1(x[i - n]) })
    }
}
