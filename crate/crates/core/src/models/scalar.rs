use faer::Mat;

use crate::error::{Error, Result};
use crate::system::{DelaySystem, FeedbackMode, InnerProduct};

/// `u' = -a u + b(t) u(t - tau)` (or `+ b(t) u(t)`), with `b_values[k]`
/// acting on the k-th feedback-active interval. The list is reused
/// cyclically.
pub fn build_scalar(a: f64, b_values: &[f64], mode: FeedbackMode) -> Result<DelaySystem> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonPositiveDecay(a));
    }
    if b_values.is_empty() {
        return Err(Error::InvalidParameter("at least one feedback coefficient is needed".into()));
    }
    DelaySystem::new(
        Mat::from_fn(1, 1, |_, _| -a),
        b_values.iter().map(|&b| Mat::from_fn(1, 1, |_, _| b)).collect(),
        mode,
        InnerProduct::identity(1),
        true,
    )
}
