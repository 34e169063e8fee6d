//! Finite-dimensional evolution problems `U' = A U + B(t) U(t - tau)` (or
//! `U' = A U + B(t) U(t)` in anti-damping mode) on `R^d` with a weighted
//! inner product `<x, y> = x^T G y`.
//!
//! All norms, dissipativity checks and operator norms are taken in the
//! weighted sense. Internally this is done through the Cholesky factor
//! `G = L L^T`: the map `x -> L^T x` is an isometry onto Euclidean `R^d`,
//! and an operator `M` becomes `L^T M L^{-T}` in those coordinates.

use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Col, ColRef, Mat, MatRef, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

const SYMMETRY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct InnerProduct {
    gram: Mat<f64>,
    factor: Mat<f64>,
    identity: bool,
}

impl InnerProduct {
    pub fn identity(dim: usize) -> Self {
        InnerProduct {
            gram: Mat::identity(dim, dim),
            factor: Mat::identity(dim, dim),
            identity: true,
        }
    }

    pub fn new(gram: Mat<f64>) -> Result<Self> {
        let d = gram.nrows();
        if gram.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix is {}x{}",
                d,
                gram.ncols()
            )));
        }
        let scale = gram.norm_max();
        for j in 0..d {
            for i in 0..j {
                if (gram[(i, j)] - gram[(j, i)]).abs() > SYMMETRY_RTOL * scale {
                    return Err(Error::GramNotPositiveDefinite);
                }
            }
        }
        let llt = gram
            .llt(Side::Lower)
            .map_err(|_| Error::GramNotPositiveDefinite)?;
        let factor = llt.L().to_owned();
        let identity = (0..d).all(|j| (0..d).all(|i| gram[(i, j)] == if i == j { 1.0 } else { 0.0 }));
        Ok(InnerProduct {
            gram,
            factor,
            identity,
        })
    }

    /// Block-diagonal Gram matrix from per-block diagonal weights.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let d = weights.len();
        InnerProduct::new(Mat::from_fn(d, d, |i, j| if i == j { weights[i] } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> MatRef<'_, f64> {
        self.gram.as_ref()
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn inner(&self, x: ColRef<'_, f64>, y: ColRef<'_, f64>) -> f64 {
        if self.identity {
            return dot(x, y);
        }
        let gy = &self.gram * y;
        dot(x, gy.as_ref())
    }

    pub fn norm_sq(&self, x: ColRef<'_, f64>) -> f64 {
        self.inner(x, x)
    }

    pub fn norm(&self, x: ColRef<'_, f64>) -> f64 {
        self.norm_sq(x).max(0.0).sqrt()
    }

    /// `L^T x`: coordinates in which the weighted norm is Euclidean.
    pub fn to_orthonormal_vec(&self, x: ColRef<'_, f64>) -> Col<f64> {
        if self.identity {
            return x.to_owned();
        }
        self.factor.transpose() * x
    }

    /// `L^{-T} y`, inverse of [`Self::to_orthonormal_vec`].
    pub fn from_orthonormal_vec(&self, y: ColRef<'_, f64>) -> Col<f64> {
        let mut x = y.to_owned();
        if !self.identity {
            solve_upper_triangular_in_place(self.factor.transpose(), x.as_mat_mut(), Par::Seq);
        }
        x
    }

    /// `L^T M L^{-T}`: the operator `M` expressed in orthonormal coordinates.
    pub fn to_orthonormal(&self, m: MatRef<'_, f64>) -> Result<Mat<f64>> {
        self.check_square(m, "operator")?;
        if self.identity {
            return Ok(m.to_owned());
        }
        // X = M L^{-T}  <=>  X^T = L^{-1} M^T
        let mut xt = m.transpose().to_owned();
        solve_lower_triangular_in_place(self.factor.as_ref(), xt.as_mut(), Par::Seq);
        Ok(self.factor.transpose() * xt.transpose())
    }

    fn check_square(&self, m: MatRef<'_, f64>, what: &str) -> Result<()> {
        let d = self.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{what} is {}x{}, inner product has dimension {d}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }
}

pub(crate) fn dot(x: ColRef<'_, f64>, y: ColRef<'_, f64>) -> f64 {
    (0..x.nrows()).map(|i| x[i] * y[i]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    /// `B(t) U(t - tau)`
    Delayed,
    /// `B(t) U(t)` with `<B x, x> >= 0`
    AntiDamping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipativityCheck {
    pub dissipative: bool,
    /// Largest eigenvalue of the weighted symmetric part, i.e. the largest
    /// Rayleigh quotient `<A x, x> / |x|^2`.
    pub worst_quotient: f64,
    pub tolerance: f64,
}

/// Tests `<A x, x> <= tol |x|^2` through the largest eigenvalue of the
/// symmetric pencil `(G A + A^T G) / 2` against `G`.
pub fn check_dissipative(a: MatRef<'_, f64>, g: &InnerProduct, tol: f64) -> Result<DissipativityCheck> {
    let a_orth = g.to_orthonormal(a)?;
    let worst = linalg::numerical_abscissa(a_orth.as_ref())?;
    Ok(DissipativityCheck {
        dissipative: worst <= tol,
        worst_quotient: worst,
        tolerance: tol,
    })
}

/// `max_{x != 0} |B x|_G / |x|_G`.
pub fn induced_operator_norm(b: MatRef<'_, f64>, g: &InnerProduct) -> Result<f64> {
    let b_orth = g.to_orthonormal(b)?;
    linalg::largest_singular_value(b_orth.as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignCheck {
    pub nonnegative: bool,
    pub min_eigenvalue: f64,
}

/// Tests `<D x, x> >= -tol |x|^2`.
pub fn check_antidamping_sign(d: MatRef<'_, f64>, g: &InnerProduct, tol: f64) -> Result<SignCheck> {
    let d_orth = g.to_orthonormal(d)?;
    let eig = linalg::symmetric_eigenvalues(linalg::symmetric_part(d_orth.as_ref()).as_ref())?;
    let min = eig.first().copied().unwrap_or(0.0);
    Ok(SignCheck {
        nonnegative: min >= -tol,
        min_eigenvalue: min,
    })
}

/// Generator, on–off feedback operators and inner product of one problem.
///
/// `feedback_ops[k]` acts on the k-th feedback-active interval `I_{2k+1}`;
/// with `cyclic` the list is reused modulo its length.
#[derive(Debug, Clone)]
pub struct DelaySystem {
    generator: Mat<f64>,
    feedback_ops: Vec<Mat<f64>>,
    cyclic: bool,
    mode: FeedbackMode,
    inner_product: InnerProduct,
    op_norms: Vec<f64>,
    dissipativity: DissipativityCheck,
}

impl DelaySystem {
    /// Validates and assembles a system with the default dissipativity
    /// tolerance `1e-9 * |A|` (Frobenius norm in orthonormal coordinates).
    pub fn new(
        generator: Mat<f64>,
        feedback_ops: Vec<Mat<f64>>,
        mode: FeedbackMode,
        inner_product: InnerProduct,
        cyclic: bool,
    ) -> Result<Self> {
        Self::with_tolerance(generator, feedback_ops, mode, inner_product, cyclic, None)
    }

    pub fn with_tolerance(
        generator: Mat<f64>,
        feedback_ops: Vec<Mat<f64>>,
        mode: FeedbackMode,
        inner_product: InnerProduct,
        cyclic: bool,
        tol: Option<f64>,
    ) -> Result<Self> {
        let d = inner_product.dim();
        if generator.nrows() != d || generator.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "generator is {}x{}, inner product has dimension {d}",
                generator.nrows(),
                generator.ncols()
            )));
        }
        let a_orth = inner_product.to_orthonormal(generator.as_ref())?;
        let tol = tol.unwrap_or_else(|| 1e-9 * a_orth.norm_l2());
        let worst = linalg::numerical_abscissa(a_orth.as_ref())?;
        if worst > tol {
            return Err(Error::NotDissipative { worst, tol });
        }
        let dissipativity = DissipativityCheck {
            dissipative: true,
            worst_quotient: worst,
            tolerance: tol,
        };

        let mut op_norms = Vec::with_capacity(feedback_ops.len());
        for (index, op) in feedback_ops.iter().enumerate() {
            op_norms.push(induced_operator_norm(op.as_ref(), &inner_product)?);
            if mode == FeedbackMode::AntiDamping {
                let sign = check_antidamping_sign(op.as_ref(), &inner_product, 1e-9 * op_norms[index].max(1.0))?;
                if !sign.nonnegative {
                    return Err(Error::AntiDampingSignViolated {
                        index,
                        min_eig: sign.min_eigenvalue,
                    });
                }
            }
        }

        Ok(DelaySystem {
            generator,
            feedback_ops,
            cyclic,
            mode,
            inner_product,
            op_norms,
            dissipativity,
        })
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn generator(&self) -> MatRef<'_, f64> {
        self.generator.as_ref()
    }

    pub fn mode(&self) -> FeedbackMode {
        self.mode
    }

    pub fn inner_product(&self) -> &InnerProduct {
        &self.inner_product
    }

    pub fn feedback_ops(&self) -> &[Mat<f64>] {
        &self.feedback_ops
    }

    pub fn op_norms(&self) -> &[f64] {
        &self.op_norms
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn dissipativity(&self) -> DissipativityCheck {
        self.dissipativity
    }

    /// Index into `feedback_ops` for interval `n`; `None` for even intervals.
    pub fn feedback_index(&self, interval: usize) -> Result<Option<usize>> {
        if interval % 2 == 0 {
            return Ok(None);
        }
        let k = interval / 2;
        if k < self.feedback_ops.len() {
            Ok(Some(k))
        } else if self.cyclic && !self.feedback_ops.is_empty() {
            Ok(Some(k % self.feedback_ops.len()))
        } else {
            Err(Error::MissingFeedbackOperator(interval))
        }
    }

    pub fn feedback_op(&self, interval: usize) -> Result<Option<&Mat<f64>>> {
        Ok(self.feedback_index(interval)?.map(|k| &self.feedback_ops[k]))
    }

    /// `|B(t)|` on interval `n` (zero on even intervals).
    pub fn feedback_norm(&self, interval: usize) -> Result<f64> {
        Ok(self.feedback_index(interval)?.map_or(0.0, |k| self.op_norms[k]))
    }

    /// Operator norms `B_{2n+1}` for the first `n_cycles` odd intervals.
    pub fn odd_norms(&self, n_cycles: usize) -> Result<Vec<f64>> {
        (0..n_cycles).map(|n| self.feedback_norm(2 * n + 1)).collect()
    }
}
