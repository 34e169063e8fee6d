//! Stability certificates built from per-cycle factors.
//!
//! Two constants are kept apart throughout:
//!
//! * `c_squared_factor = (M e^{-mu T_{2n}})^2`, the squared-norm
//!   contraction over one feedback-free interval;
//! * `c_envelope = M e^{-mu T0}`, the unsquared constant of the
//!   exponential conditions. Since it is below one whenever `T0 > T*`, it
//!   is a weaker (still valid) substitute for the squared factor.
//!
//! Series certificates never claim divergence from finitely many terms:
//! they either bound a finite horizon or rely on a declared pattern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monitor::CycleVariant;
use crate::schedule::SwitchingSchedule;
use crate::semigroup::SemigroupEnvelope;
use crate::system::FeedbackMode;

/// Number of terms probed against a declared tail bound.
pub const TAIL_PROBE_TERMS: usize = 1000;
const TAIL_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// `sum ln[e^{2BT}(c_n + BT)] = -inf`
    SeriesGeneral,
    /// `sum ln[e^{BT}(c_n + 1 - e^{-BT})] = -inf`, odd intervals `<= tau`
    SeriesSmallDelay,
    /// `sum ln[e^{2DT} c_n] = -inf`
    SeriesAntiDamping,
    /// `sum B T < inf` and `sum ln c_n = -inf`
    SummableFeedback,
    /// `sup e^{2BT~}(c + BT~) = d < 1`
    ExponentialGeneral,
    /// `sup e^{BT~}(c + 1 - e^{-BT~}) = d < 1`
    ExponentialSmallDelay,
    /// `sup e^{2DT~} c = d < 1`
    ExponentialAntiDamping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedFiniteHorizon,
    CertifiedAsymptoticPattern,
    NotCertified,
    Inapplicable,
}

impl Verdict {
    pub fn is_certified(self) -> bool {
        matches!(self, Verdict::CertifiedFiniteHorizon | Verdict::CertifiedAsymptoticPattern)
    }
}

/// Which constant plays the role of `c` in the exponential conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CReading {
    /// `c = M e^{-mu T0}`
    AsStated,
    /// `c = (M e^{-mu T0})^2`
    SquaredVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Predicted {
    pub d: f64,
    pub alpha: f64,
    /// Cycle period `T0 + T~`.
    pub period: f64,
    /// `C` in `|U(t)| <= C e^{-alpha t} |U0|`: the within-cycle
    /// amplification `e^{B T~} max(1, M)` times `d^{-1/2}`, which absorbs
    /// the offset between `t` and the last cycle end.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub certificate: Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reading: Option<CReading>,
    pub applicable: bool,
    pub unmet: Vec<String>,
    /// Per-cycle factors (series certificates).
    pub factors: Vec<f64>,
    /// Partial sums of the log factors.
    pub partial_sums: Vec<f64>,
    /// Proven bound on `|U(t_{2n+2})|^2 / |U0|^2` per cycle.
    pub bound_curve: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_squared_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_envelope: Option<f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Predicted>,
}

impl CertificateReport {
    fn new(certificate: Certificate) -> Self {
        CertificateReport {
            certificate,
            reading: None,
            applicable: true,
            unmet: Vec::new(),
            factors: Vec::new(),
            partial_sums: Vec::new(),
            bound_curve: Vec::new(),
            d: None,
            c_squared_factor: None,
            c_envelope: None,
            verdict: Verdict::NotCertified,
            predicted: None,
        }
    }

    fn inapplicable(mut self, unmet: Vec<String>) -> Self {
        self.applicable = false;
        self.unmet = unmet;
        self.verdict = Verdict::Inapplicable;
        self
    }

    /// Inapplicable report for a certificate whose inputs are absent.
    pub fn unavailable(certificate: Certificate, reading: Option<CReading>, unmet: Vec<String>) -> Self {
        let mut report = Self::new(certificate).inapplicable(unmet);
        report.reading = reading;
        report
    }

    /// `Err(PreconditionUnmet)` for inapplicable reports.
    pub fn require_applicable(self) -> Result<Self> {
        if self.applicable {
            Ok(self)
        } else {
            Err(Error::PreconditionUnmet(self.unmet.join("; ")))
        }
    }
}

/// Declared bound on the feedback terms `a_n = B_{2n+1} T_{2n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TailDeclaration {
    /// `a_n <= first * ratio^n` with `ratio < 1`.
    Geometric { first: f64, ratio: f64 },
    /// `a_n = 0` for `n >= index`.
    ZeroAfter { index: usize },
}

impl TailDeclaration {
    pub fn bound(&self, n: usize) -> f64 {
        match *self {
            TailDeclaration::Geometric { first, ratio } => first * ratio.powi(n as i32),
            TailDeclaration::ZeroAfter { index } => {
                if n >= index {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Upper bound on `sum_n a_n` implied by the declaration, given the
    /// terms before the tail starts.
    pub fn total(&self, head: &[f64]) -> f64 {
        match *self {
            TailDeclaration::Geometric { first, ratio } => first / (1.0 - ratio),
            TailDeclaration::ZeroAfter { index } => head.iter().take(index).sum(),
        }
    }

    fn valid(&self) -> bool {
        match *self {
            TailDeclaration::Geometric { first, ratio } => first >= 0.0 && (0.0..1.0).contains(&ratio),
            TailDeclaration::ZeroAfter { .. } => true,
        }
    }
}

/// Asymptotic structure declared for a series certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SeriesPattern {
    /// Periodic lengths and a constant feedback norm: every term of the
    /// series is the same, so it diverges iff that term is negative.
    Periodic,
    /// Summable feedback with feedback-free intervals at least `t_bar`.
    SummableTail { tail: TailDeclaration, t_bar: f64 },
}

/// Cycle data `(T_{2n}, T_{2n+1}, T_{2n+2})` and norm `B_{2n+1}`, extended
/// beyond the listed schedule by its periodic pattern and beyond the norm
/// list cyclically when `cyclic`.
fn cycle(schedule: &SwitchingSchedule, norms: &[f64], cyclic: bool, n: usize) -> Option<(f64, f64, Option<f64>, f64)> {
    let pattern = schedule.pattern();
    let len = |i: usize| {
        schedule.length(i).or_else(|| {
            pattern.map(|p| if i % 2 == 0 { p.even_length } else { p.odd_length })
        })
    };
    let b = if n < norms.len() {
        norms[n]
    } else if cyclic && !norms.is_empty() {
        norms[n % norms.len()]
    } else {
        return None;
    };
    Some((len(2 * n)?, len(2 * n + 1)?, len(2 * n + 2), b))
}

fn variant_certificate(variant: CycleVariant) -> Certificate {
    match variant {
        CycleVariant::General => Certificate::SeriesGeneral,
        CycleVariant::SmallDelay => Certificate::SeriesSmallDelay,
        CycleVariant::AntiDamping => Certificate::SeriesAntiDamping,
    }
}

fn variant_mode(variant: CycleVariant) -> FeedbackMode {
    match variant {
        CycleVariant::AntiDamping => FeedbackMode::AntiDamping,
        _ => FeedbackMode::Delayed,
    }
}

/// Partial sums of `ln factor_n` over `n_cycles` cycles.
///
/// `op_norms[n]` is `B_{2n+1}` (or `D_{2n+1}`); with `cyclic` the list is
/// reused. `target` is the finite-horizon goal for `exp(S_N)` (default 1).
#[allow(clippy::too_many_arguments)]
pub fn series_certificate(
    schedule: &SwitchingSchedule,
    op_norms: &[f64],
    cyclic: bool,
    env: &SemigroupEnvelope,
    variant: CycleVariant,
    n_cycles: usize,
    pattern: Option<SeriesPattern>,
    target: Option<f64>,
) -> Result<CertificateReport> {
    let report = CertificateReport::new(variant_certificate(variant));
    if n_cycles == 0 {
        return Ok(report.inapplicable(vec!["at least one cycle is needed".into()]));
    }
    let tau = schedule.delay();
    let t_star = env.t_star();
    let mode = variant_mode(variant);
    let mut unmet = Vec::new();
    let mut data = Vec::with_capacity(n_cycles);
    for n in 0..n_cycles {
        match cycle(schedule, op_norms, cyclic, n) {
            None => unmet.push(format!("cycle {n} is not covered by the schedule or operator list")),
            Some((even, odd, next, b)) => {
                if let Some(why) = variant.unmet((even, odd, next), tau, t_star, mode) {
                    unmet.push(format!("cycle {n}: {why}"));
                }
                data.push((even, odd, b));
            }
        }
    }
    if !unmet.is_empty() {
        return Ok(report.inapplicable(unmet));
    }

    let mut report = report;
    let mut sum = 0.0;
    for &(even, odd, b) in &data {
        let c = env.contraction_factor(even)?;
        let factor = variant.factor(c, b, odd);
        sum += factor.ln();
        report.factors.push(factor);
        report.partial_sums.push(sum);
        report.bound_curve.push(sum.exp());
    }
    report.c_squared_factor = data.first().and_then(|&(even, _, _)| env.contraction_factor(even).ok());

    let target = target.unwrap_or(1.0);
    let finite = *report.bound_curve.last().unwrap() <= target;
    report.verdict = match pattern {
        Some(SeriesPattern::Periodic) => {
            let periodic = schedule.pattern().is_some();
            let constant = op_norms_constant(op_norms, cyclic, n_cycles);
            if periodic && constant && report.factors[0].ln() < 0.0 {
                Verdict::CertifiedAsymptoticPattern
            } else if finite {
                Verdict::CertifiedFiniteHorizon
            } else {
                Verdict::NotCertified
            }
        }
        Some(SeriesPattern::SummableTail { tail, t_bar }) => {
            let remark = remark_sufficient_test(schedule, op_norms, cyclic, env, &tail, Some(t_bar), mode)?;
            if remark.verdict == Verdict::CertifiedAsymptoticPattern {
                Verdict::CertifiedAsymptoticPattern
            } else if finite {
                Verdict::CertifiedFiniteHorizon
            } else {
                Verdict::NotCertified
            }
        }
        None if finite => Verdict::CertifiedFiniteHorizon,
        None => Verdict::NotCertified,
    };
    Ok(report)
}

fn op_norms_constant(norms: &[f64], cyclic: bool, n_cycles: usize) -> bool {
    let Some(&first) = norms.first() else { return false };
    let all_equal = norms.iter().all(|&b| (b - first).abs() <= 1e-12 * first.abs().max(b.abs()));
    all_equal && (cyclic || norms.len() >= n_cycles)
}

/// Sufficient route: `sum B_{2n+1} T_{2n+1} < inf` through a declared tail
/// bound, and `T_{2n} >= t_bar > T*` so that `c_n <= c_bar < 1`.
///
/// The declaration is probed against up to [`TAIL_PROBE_TERMS`] terms; a
/// listed term above the declared bound is an error.
pub fn remark_sufficient_test(
    schedule: &SwitchingSchedule,
    op_norms: &[f64],
    cyclic: bool,
    env: &SemigroupEnvelope,
    tail: &TailDeclaration,
    t_bar: Option<f64>,
    mode: FeedbackMode,
) -> Result<CertificateReport> {
    let mut report = CertificateReport::new(Certificate::SummableFeedback);
    if !tail.valid() {
        return Ok(report.inapplicable(vec![format!("invalid tail declaration {tail:?}")]));
    }
    let tau = schedule.delay();
    let t_star = env.t_star();

    let mut terms = Vec::new();
    let mut cycles = Vec::new();
    for n in 0..TAIL_PROBE_TERMS {
        let Some((even, odd, _, b)) = cycle(schedule, op_norms, cyclic, n) else { break };
        let term = b * odd;
        let bound = tail.bound(n);
        if term > bound * (1.0 + TAIL_RTOL) {
            return Err(Error::InconsistentTailDeclaration { index: n, term, bound });
        }
        terms.push(term);
        cycles.push((even, odd, b));
    }
    if terms.is_empty() {
        return Ok(report.inapplicable(vec!["no cycles listed".into()]));
    }

    let mut unmet = Vec::new();
    match t_bar {
        None => unmet.push("no uniform lower bound on feedback-free lengths declared".to_string()),
        Some(t_bar) => {
            if t_bar <= t_star {
                unmet.push(format!("t_bar = {t_bar} <= T* = {t_star}"));
            }
            if mode == FeedbackMode::Delayed && t_bar < tau {
                unmet.push(format!("t_bar = {t_bar} < tau = {tau}"));
            }
            if let Some((n, &(even, _, _))) = cycles.iter().enumerate().find(|(_, c)| c.0 < t_bar) {
                unmet.push(format!("T_{} = {even} < t_bar = {t_bar}", 2 * n));
            }
        }
    }

    let variant = match mode {
        FeedbackMode::Delayed => CycleVariant::General,
        FeedbackMode::AntiDamping => CycleVariant::AntiDamping,
    };
    let mut sum = 0.0;
    for (n, &(even, odd, b)) in cycles.iter().enumerate() {
        let Ok(c) = env.contraction_factor(even) else {
            unmet.push(format!("T_{} = {even} <= T*", 2 * n));
            break;
        };
        let factor = variant.factor(c, b, odd);
        sum += factor.ln();
        report.factors.push(factor);
        report.partial_sums.push(sum);
        report.bound_curve.push(sum.exp());
    }
    if let Some(t_bar) = t_bar {
        report.c_squared_factor = env.contraction_factor(t_bar).ok();
    }
    if unmet.is_empty() {
        report.verdict = Verdict::CertifiedAsymptoticPattern;
    } else {
        report.unmet = unmet;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentialVariant {
    DelayedGeneral,
    DelayedSmall,
    AntiDamping,
}

impl ExponentialVariant {
    fn cycle(self) -> CycleVariant {
        match self {
            ExponentialVariant::DelayedGeneral => CycleVariant::General,
            ExponentialVariant::DelayedSmall => CycleVariant::SmallDelay,
            ExponentialVariant::AntiDamping => CycleVariant::AntiDamping,
        }
    }

    fn certificate(self) -> Certificate {
        match self {
            ExponentialVariant::DelayedGeneral => Certificate::ExponentialGeneral,
            ExponentialVariant::DelayedSmall => Certificate::ExponentialSmallDelay,
            ExponentialVariant::AntiDamping => Certificate::ExponentialAntiDamping,
        }
    }

    /// `d` for a given `c`, sup norm and odd length.
    pub fn d(self, c: f64, sup_norm: f64, t_tilde: f64) -> f64 {
        self.cycle().factor(c, sup_norm, t_tilde)
    }
}

/// Periodic exponential condition `d < 1` with decay rate
/// `alpha = ln(1/d) / (2 (T0 + T~))`. `n_cycles` sets the length of the
/// returned bound curve `d^n`.
#[allow(clippy::too_many_arguments)]
pub fn exponential_certificate(
    t0: f64,
    t_tilde: f64,
    tau: f64,
    sup_norm: f64,
    env: &SemigroupEnvelope,
    variant: ExponentialVariant,
    reading: CReading,
    n_cycles: usize,
) -> Result<CertificateReport> {
    let mut report = CertificateReport::new(variant.certificate());
    report.reading = Some(reading);
    if !(t0 > 0.0) || !(t_tilde > 0.0) || !(sup_norm >= 0.0) || !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "T0 = {t0}, T~ = {t_tilde}, tau = {tau}, sup norm = {sup_norm}"
        )));
    }
    let t_star = env.t_star();
    let mut unmet = Vec::new();
    if t0 <= t_star {
        unmet.push(format!("T0 = {t0} <= T* = {t_star}"));
    }
    if variant != ExponentialVariant::AntiDamping && t0 < tau {
        unmet.push(format!("T0 = {t0} < tau = {tau}"));
    }
    if variant == ExponentialVariant::DelayedSmall && t_tilde > tau {
        unmet.push(format!("T~ = {t_tilde} > tau = {tau}"));
    }
    if !unmet.is_empty() {
        return Ok(report.inapplicable(unmet));
    }

    let c_env = env.envelope_factor(t0)?;
    let c_sq = c_env * c_env;
    report.c_envelope = Some(c_env);
    report.c_squared_factor = Some(c_sq);
    let c = match reading {
        CReading::AsStated => c_env,
        CReading::SquaredVariant => c_sq,
    };
    let d = variant.d(c, sup_norm, t_tilde);
    report.d = Some(d);
    report.factors = vec![d];
    report.bound_curve = (1..=n_cycles).map(|n| d.powi(n as i32)).collect();
    report.partial_sums = (1..=n_cycles).map(|n| n as f64 * d.ln()).collect();
    if d < 1.0 {
        let period = t0 + t_tilde;
        let alpha = (1.0 / d).ln() / (2.0 * period);
        let amplification = (sup_norm * t_tilde).exp() * env.m.max(1.0);
        report.predicted = Some(Predicted {
            d,
            alpha,
            period,
            constant: amplification / d.sqrt(),
        });
        report.verdict = Verdict::CertifiedAsymptoticPattern;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorComparison {
    pub small_delay: f64,
    pub general: f64,
    pub small_below_general: bool,
}

/// Both per-cycle factors for the same `(B, T, c)`.
pub fn compare_small_delay_vs_general(b: f64, t: f64, c: f64) -> Result<FactorComparison> {
    if !(b > 0.0) || !(t > 0.0) || !(c > 0.0 && c < 1.0) {
        return Err(Error::PreconditionUnmet(format!(
            "need B > 0, T > 0, 0 < c < 1 (got {b}, {t}, {c})"
        )));
    }
    let small_delay = CycleVariant::SmallDelay.factor(c, b, t);
    let general = CycleVariant::General.factor(c, b, t);
    Ok(FactorComparison {
        small_delay,
        general,
        small_below_general: small_delay < general,
    })
}
