//! Exponential envelopes `|exp(tA)|_G <= M exp(-mu t)` for concrete
//! generators, the crossover time `T* = ln(M) / mu`, and the
//! per-interval contraction factors derived from them.

use faer::{c64, Mat, MatRef};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::system::InnerProduct;

/// Number of log-spaced times in the verification grid.
pub const GRID_POINTS: usize = 200;
/// Relative slack allowed when checking the envelope on the grid.
pub const GRID_RTOL: f64 = 1e-8;
/// Eigenvector condition numbers above this are treated as defective.
pub const DEFECTIVE_COND: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeStrategy {
    /// `M = 1`, `mu` = minus the largest eigenvalue of the weighted
    /// symmetric part.
    NumericalAbscissa,
    /// `mu` from the spectral abscissa, `M` from the eigenvector
    /// condition number.
    EigenConditioning,
    /// Least-squares fit of `ln|exp(tA)|` followed by inflation of `M`.
    SampledFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSource {
    Pinned,
    NumericalAbscissa,
    EigenConditioning,
    SampledFit,
}

impl From<EnvelopeStrategy> for EnvelopeSource {
    fn from(s: EnvelopeStrategy) -> Self {
        match s {
            EnvelopeStrategy::NumericalAbscissa => EnvelopeSource::NumericalAbscissa,
            EnvelopeStrategy::EigenConditioning => EnvelopeSource::EigenConditioning,
            EnvelopeStrategy::SampledFit => EnvelopeSource::SampledFit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemigroupEnvelope {
    #[serde(rename = "M")]
    pub m: f64,
    pub mu: f64,
    pub strategy: EnvelopeSource,
    /// Whether the bound was checked on the log-spaced verification grid.
    pub certified: bool,
}

impl SemigroupEnvelope {
    /// User-supplied constants, taken on trust (`certified = false`).
    pub fn pinned(m: f64, mu: f64) -> Result<Self> {
        if !(m >= 1.0) || !(mu > 0.0) || !m.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidEnvelope { m, mu });
        }
        Ok(SemigroupEnvelope {
            m,
            mu,
            strategy: EnvelopeSource::Pinned,
            certified: false,
        })
    }

    pub fn bound(&self, t: f64) -> f64 {
        self.m * (-self.mu * t).exp()
    }

    pub fn t_star(&self) -> f64 {
        t_star(self)
    }

    /// `c_n = (M exp(-mu T))^2`, the squared-norm reduction over a
    /// feedback-free interval of length `T`.
    pub fn contraction_factor(&self, length: f64) -> Result<f64> {
        contraction_factor(self, length)
    }

    /// `c = M exp(-mu T0)`, the unsquared constant used by the
    /// exponential-stability conditions.
    pub fn envelope_factor(&self, length: f64) -> Result<f64> {
        let t_star = self.t_star();
        if length <= t_star {
            return Err(Error::IntervalTooShort { length, t_star });
        }
        Ok(self.bound(length))
    }
}

pub fn t_star(env: &SemigroupEnvelope) -> f64 {
    env.m.ln() / env.mu
}

pub fn contraction_factor(env: &SemigroupEnvelope, length: f64) -> Result<f64> {
    let t_star = env.t_star();
    if length <= t_star {
        return Err(Error::IntervalTooShort { length, t_star });
    }
    let root = env.bound(length);
    Ok(root * root)
}

/// Estimates `(M, mu)` for `exp(tA)` in the norm induced by `g`.
pub fn estimate_envelope(
    a: MatRef<'_, f64>,
    g: &InnerProduct,
    strategy: EnvelopeStrategy,
) -> Result<SemigroupEnvelope> {
    let a_orth = g.to_orthonormal(a)?;
    estimate_envelope_decoupled(&[a_orth], strategy)
}

/// Envelope for a generator that is block diagonal in an orthonormal basis
/// of the weighted space. Each entry of `blocks` is one diagonal block
/// already expressed in orthonormal coordinates, so the semigroup norm is
/// the maximum of the block norms.
pub fn estimate_envelope_decoupled(
    blocks: &[Mat<f64>],
    strategy: EnvelopeStrategy,
) -> Result<SemigroupEnvelope> {
    let blocks = BlockGenerator::new(blocks)?;
    let (m, mu) = match strategy {
        EnvelopeStrategy::NumericalAbscissa => {
            let omega = blocks.numerical_abscissa()?;
            if omega >= 0.0 {
                let alpha = blocks.spectral_abscissa()?;
                if alpha >= -blocks.stability_tol() {
                    return Err(Error::NotExponentiallyStable(alpha));
                }
                return Err(Error::NonNegativeNumericalAbscissa(omega));
            }
            (1.0, -omega)
        }
        EnvelopeStrategy::EigenConditioning => {
            let alpha = blocks.stable_abscissa()?;
            let cond = blocks.eigenvector_condition()?;
            (cond.max(1.0), -alpha * (1.0 - 1e-6))
        }
        EnvelopeStrategy::SampledFit => sampled_fit(&blocks)?,
    };
    let certified = blocks.verify(m, mu)?;
    Ok(SemigroupEnvelope {
        m,
        mu,
        strategy: strategy.into(),
        certified,
    })
}

/// Checks `|exp(tA)|_G <= M exp(-mu t) (1 + 1e-8)` on the verification grid.
pub fn verify_envelope(a: MatRef<'_, f64>, g: &InnerProduct, env: &SemigroupEnvelope) -> Result<bool> {
    let a_orth = g.to_orthonormal(a)?;
    BlockGenerator::new(&[a_orth])?.verify(env.m, env.mu)
}

/// `GRID_POINTS` log-spaced times on `[1e-3 / mu, 5 / mu]`.
pub fn verification_grid(mu: f64) -> Vec<f64> {
    log_grid(1e-3 / mu, 5.0 / mu, GRID_POINTS)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

struct BlockGenerator<'a> {
    blocks: &'a [Mat<f64>],
}

impl<'a> BlockGenerator<'a> {
    fn new(blocks: &'a [Mat<f64>]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::DimensionMismatch("no generator blocks".into()));
        }
        for b in blocks {
            if b.nrows() != b.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "generator block is {}x{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(BlockGenerator { blocks })
    }

    fn stability_tol(&self) -> f64 {
        let fro = self
            .blocks
            .iter()
            .map(|b| b.norm_l2().powi(2))
            .sum::<f64>()
            .sqrt();
        1e-10 * fro.max(1.0)
    }

    fn numerical_abscissa(&self) -> Result<f64> {
        self.blocks
            .iter()
            .map(|b| linalg::numerical_abscissa(b.as_ref()))
            .try_fold(f64::NEG_INFINITY, |acc, x| Ok(acc.max(x?)))
    }

    fn spectral_abscissa(&self) -> Result<f64> {
        self.blocks
            .iter()
            .map(|b| linalg::spectral_abscissa(b.as_ref()))
            .try_fold(f64::NEG_INFINITY, |acc, x| Ok(acc.max(x?)))
    }

    /// Spectral abscissa, failing unless it is safely negative.
    fn stable_abscissa(&self) -> Result<f64> {
        let alpha = self.spectral_abscissa()?;
        if alpha >= -self.stability_tol() {
            return Err(Error::NotExponentiallyStable(alpha));
        }
        Ok(alpha)
    }

    fn eigenvector_condition(&self) -> Result<f64> {
        let mut worst = 1.0f64;
        for b in self.blocks {
            let eig = b.eigen().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
            let u = eig.U();
            let n = u.nrows();
            let normalized = Mat::<c64>::from_fn(n, n, |i, j| {
                let col_norm = (0..n).map(|k| u[(k, j)].norm_sqr()).sum::<f64>().sqrt();
                u[(i, j)] / col_norm
            });
            let s = normalized
                .singular_values()
                .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
            let cond = s[0] / s[n - 1];
            if !cond.is_finite() || cond > DEFECTIVE_COND {
                return Err(Error::DefectiveEigenbasis(cond));
            }
            worst = worst.max(cond);
        }
        Ok(worst)
    }

    /// `max_k |exp(t A_k)|_2` for increasing times, built by chaining
    /// short-step exponentials.
    fn norms(&self, times: &[f64]) -> Result<Vec<f64>> {
        let per_block: Vec<Vec<f64>> = self
            .blocks
            .par_iter()
            .map(|b| block_norms(b, times))
            .collect::<Result<_>>()?;
        let mut out = vec![0.0f64; times.len()];
        for norms in per_block {
            for (o, n) in out.iter_mut().zip(norms) {
                *o = o.max(n);
            }
        }
        Ok(out)
    }

    fn verify(&self, m: f64, mu: f64) -> Result<bool> {
        let grid = verification_grid(mu);
        let norms = self.norms(&grid)?;
        Ok(grid
            .iter()
            .zip(&norms)
            .all(|(&t, &n)| n <= m * (-mu * t).exp() * (1.0 + GRID_RTOL)))
    }
}

fn block_norms(b: &Mat<f64>, times: &[f64]) -> Result<Vec<f64>> {
    let n = b.nrows();
    let mut prev_t = 0.0;
    let mut e = Mat::<f64>::identity(n, n);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        debug_assert!(t >= prev_t);
        if t > prev_t {
            let step = linalg::expm(linalg::scaled(b.as_ref(), t - prev_t).as_ref());
            e = &step * &e;
            prev_t = t;
        }
        out.push(linalg::largest_singular_value(e.as_ref())?);
    }
    Ok(out)
}

fn sampled_fit(blocks: &BlockGenerator<'_>) -> Result<(f64, f64)> {
    let alpha = blocks.stable_abscissa()?;
    let omega = blocks.numerical_abscissa()?;
    let rate = -alpha;

    let fit_grid = verification_grid(rate);
    let fit_norms = blocks.norms(&fit_grid)?;
    let mu_fit = -least_squares_slope(&fit_grid, &fit_norms.iter().map(|n| n.ln()).collect::<Vec<_>>());
    let cap = rate * (1.0 - 1e-6);
    let mu = if mu_fit.is_finite() && mu_fit > 0.0 {
        mu_fit.min(cap)
    } else {
        0.5 * rate
    };

    // Between consecutive grid times s < t, |exp(tA)| <= |exp(sA)| e^{omega (t - s)},
    // so inflating each sample by e^{max(0, omega + mu)(t - s)} bounds the
    // whole segment, not only its endpoints.
    let mut grid = vec![0.0];
    grid.extend(verification_grid(mu));
    let norms = blocks.norms(&grid)?;
    let growth = (omega + mu).max(0.0);
    let mut m = 1.0f64;
    for i in 0..grid.len() {
        let next = grid.get(i + 1).copied().unwrap_or(grid[i]);
        m = m.max(norms[i] * (mu * grid[i]).exp() * (growth * (next - grid[i])).exp());
    }
    for (&t, &n) in fit_grid.iter().zip(&fit_norms) {
        m = m.max(n * (mu * t).exp());
    }
    Ok((m, mu))
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
