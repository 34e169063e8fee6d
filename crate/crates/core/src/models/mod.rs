//! Concrete systems: scalar toys and 1-D finite-difference discretizations
//! of a viscoelastic wave equation with memory and of a wave equation with
//! localized damping.
//!
//! Both PDE models use the Dirichlet Laplacian on `(0, 1)` with `n_x`
//! interior nodes and the energy inner product built from the stiffness
//! matrix, so `x^T K x` approximates `|A^{1/2} u|^2`. The Petrovsky plate
//! with memory has the same abstract structure with the clamped
//! biharmonic operator in place of `K` and is not assembled here.

pub mod locally_damped_wave;
pub mod scalar;
pub mod viscoelastic_wave;

pub use locally_damped_wave::{build_locally_damped_wave, LocallyDampedWaveModel};
pub use scalar::build_scalar;
pub use viscoelastic_wave::{build_viscoelastic_wave, MemoryKernel, ViscoelasticWaveModel};

use faer::Mat;

/// Mesh width and interior nodes `x_i = (i + 1) dx` of `(0, 1)`.
pub fn grid(n_x: usize) -> (f64, Vec<f64>) {
    let dx = 1.0 / (n_x + 1) as f64;
    (dx, (0..n_x).map(|i| (i + 1) as f64 * dx).collect())
}

/// `K = tridiag(-1, 2, -1) / dx^2`.
pub fn dirichlet_laplacian(n_x: usize) -> Mat<f64> {
    let (dx, _) = grid(n_x);
    let s = 1.0 / (dx * dx);
    Mat::from_fn(n_x, n_x, |i, j| {
        if i == j {
            2.0 * s
        } else if i.abs_diff(j) == 1 {
            -s
        } else {
            0.0
        }
    })
}

/// Eigenvalues `(4 / dx^2) sin^2(k pi dx / 2)` of `K`, `k = 1..n_x`.
pub fn laplacian_eigenvalues(n_x: usize) -> Vec<f64> {
    let (dx, _) = grid(n_x);
    (1..=n_x)
        .map(|k| {
            let s = (k as f64 * std::f64::consts::PI * dx / 2.0).sin();
            4.0 / (dx * dx) * s * s
        })
        .collect()
}

/// Orthonormal eigenvectors `Phi[i][k] = sqrt(2 dx) sin(k pi x_i)` of `K`.
pub fn laplacian_modes(n_x: usize) -> Mat<f64> {
    let (dx, x) = grid(n_x);
    let scale = (2.0 * dx).sqrt();
    Mat::from_fn(n_x, n_x, |i, k| scale * ((k + 1) as f64 * std::f64::consts::PI * x[i]).sin())
}
