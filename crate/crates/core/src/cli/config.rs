//! Run configuration (JSON, unknown keys rejected).

use std::path::Path;

use faer::Col;
use serde::Deserialize;

use crate::certificates::{CReading, SeriesPattern, TailDeclaration};
use crate::error::Error;
use crate::models::{
    build_locally_damped_wave, build_scalar, build_viscoelastic_wave, LocallyDampedWaveModel, MemoryKernel,
    ViscoelasticWaveModel,
};
use crate::schedule::SwitchingSchedule;
use crate::semigroup::{EnvelopeStrategy, SemigroupEnvelope};
use crate::system::{DelaySystem, FeedbackMode};

use super::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelConfig>,
    pub schedule: Option<ScheduleConfig>,
    pub envelope: Option<EnvelopeConfig>,
    pub feedback: Option<FeedbackConfig>,
    pub run: Option<RunSection>,
    pub certify: Option<CertifyConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Scalar {
        a: f64,
    },
    ViscoelasticWave {
        n_x: usize,
        n_s: usize,
        s_max: f64,
        mu0: f64,
        delta: f64,
    },
    LocallyDampedWave {
        n_x: usize,
        a: f64,
        omega1: (f64, f64),
        omega2: (f64, f64),
    },
}

/// Either `{switch_times, delay, periodic?, horizon?}` or
/// `{T0, T_tilde, n_cycles, delay}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScheduleConfig {
    Explicit(ExplicitSchedule),
    Periodic(PeriodicSchedule),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSchedule {
    pub switch_times: Vec<f64>,
    pub delay: f64,
    /// Cycle the listed lengths beyond the last switch time.
    #[serde(default)]
    pub periodic: bool,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicSchedule {
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "T_tilde")]
    pub t_tilde: f64,
    pub n_cycles: usize,
    pub delay: f64,
}

/// Either `{M, mu}` or `{strategy}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EnvelopeConfig {
    Pinned(PinnedEnvelope),
    Estimated(EstimatedEnvelope),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinnedEnvelope {
    #[serde(rename = "M")]
    pub m: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatedEnvelope {
    pub strategy: EnvelopeStrategy,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackConfig {
    #[serde(default = "default_mode")]
    pub mode: FeedbackMode,
    pub b_values: Vec<f64>,
    #[serde(default = "default_true")]
    pub cyclic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryConfig {
    None,
    Constant,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub h: f64,
    pub t_end: f64,
    /// Full initial state; defaults to `1` for the scalar model and to
    /// `u = sin(pi x)`, `u_t = 0`, zero history variable for the waves.
    pub initial: Option<Vec<f64>>,
    #[serde(default = "default_history")]
    pub history: HistoryConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremName {
    SeriesGeneral,
    SeriesSmallDelay,
    SeriesAntiDamping,
    SummableFeedback,
    ExponentialGeneral,
    ExponentialSmallDelay,
    ExponentialAntiDamping,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub theorems: Vec<TheoremName>,
    #[serde(default = "default_cycles")]
    pub n_cycles: usize,
    pub pattern: Option<SeriesPattern>,
    pub tail: Option<TailDeclaration>,
    pub t_bar: Option<f64>,
    pub target: Option<f64>,
    #[serde(default = "default_readings")]
    pub readings: Vec<CReading>,
}

fn default_mode() -> FeedbackMode {
    FeedbackMode::Delayed
}
fn default_true() -> bool {
    true
}
fn default_history() -> HistoryConfig {
    HistoryConfig::Constant
}
fn default_cycles() -> usize {
    10
}
fn default_readings() -> Vec<CReading> {
    vec![CReading::AsStated, CReading::SquaredVariant]
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn missing(section: &str) -> CliError {
    CliError::Config(format!("missing `{section}` section"))
}

/// Config-stage errors exit with code 2, the rest with code 5.
pub fn classify(e: Error) -> CliError {
    match e {
        Error::EmptySchedule
        | Error::FirstTimeNotZero(_)
        | Error::NonIncreasingTimes { .. }
        | Error::NonPositiveDelay(_)
        | Error::HorizonBeyondSchedule { .. }
        | Error::OddCyclePattern(_)
        | Error::TimeOutOfRange { .. }
        | Error::DimensionMismatch(_)
        | Error::MissingFeedbackOperator(_)
        | Error::AntiDampingSignViolated { .. }
        | Error::InvalidEnvelope { .. }
        | Error::StepNotAligned { .. }
        | Error::HorizonExceeded { .. }
        | Error::MissingHistory(_)
        | Error::HistoryLength { .. }
        | Error::InconsistentTailDeclaration { .. }
        | Error::NonPositiveDecay(_)
        | Error::KernelMassExceedsOne(_)
        | Error::TruncationTooShort(_)
        | Error::BadSubinterval(_)
        | Error::InvalidParameter(_) => CliError::Config(e.to_string()),
        _ => CliError::Numerical(e),
    }
}

impl RunConfig {
    /// Fails on the first absent section, in the given order.
    pub fn require(&self, sections: &[&str]) -> Result<(), CliError> {
        for &name in sections {
            let present = match name {
                "model" => self.model.is_some(),
                "schedule" => self.schedule.is_some(),
                "envelope" => self.envelope.is_some(),
                "feedback" => self.feedback.is_some(),
                "run" => self.run.is_some(),
                "certify" => self.certify.is_some(),
                _ => true,
            };
            if !present {
                return Err(missing(name));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<&ModelConfig, CliError> {
        self.model.as_ref().ok_or_else(|| missing("model"))
    }
    pub fn schedule_section(&self) -> Result<&ScheduleConfig, CliError> {
        self.schedule.as_ref().ok_or_else(|| missing("schedule"))
    }
    pub fn envelope_section(&self) -> Result<&EnvelopeConfig, CliError> {
        self.envelope.as_ref().ok_or_else(|| missing("envelope"))
    }
    pub fn feedback(&self) -> Result<&FeedbackConfig, CliError> {
        self.feedback.as_ref().ok_or_else(|| missing("feedback"))
    }
    pub fn run(&self) -> Result<&RunSection, CliError> {
        self.run.as_ref().ok_or_else(|| missing("run"))
    }
    pub fn certify(&self) -> Result<&CertifyConfig, CliError> {
        self.certify.as_ref().ok_or_else(|| missing("certify"))
    }

    /// Schedule with horizon `run.t_end` for explicit lists (or the last
    /// switch time when there is no run section).
    pub fn schedule(&self) -> Result<SwitchingSchedule, CliError> {
        let s = match self.schedule_section()? {
            ScheduleConfig::Explicit(ExplicitSchedule {
                switch_times,
                delay,
                periodic,
                horizon,
            }) => {
                let horizon = horizon
                    .or_else(|| self.run.as_ref().map(|r| r.t_end))
                    .or_else(|| switch_times.last().copied())
                    .unwrap_or(0.0);
                SwitchingSchedule::new(switch_times.clone(), *delay, horizon, *periodic)
            }
            ScheduleConfig::Periodic(PeriodicSchedule {
                t0,
                t_tilde,
                n_cycles,
                delay,
            }) => SwitchingSchedule::periodic(*t0, *t_tilde, *delay, *n_cycles),
        };
        s.map_err(classify)
    }

    /// Cross-checks between sections that do not need any numerics.
    pub fn cross_validate(&self, schedule: &SwitchingSchedule) -> Result<(), CliError> {
        let fb = self.feedback()?;
        if fb.b_values.is_empty() {
            return Err(CliError::Config("feedback.b_values must not be empty".into()));
        }
        if !fb.cyclic {
            let odd = schedule.n_intervals() / 2;
            if fb.b_values.len() < odd {
                return Err(CliError::Config(format!(
                    "feedback.b_values has {} entries but the schedule has {odd} odd intervals and cyclic is false",
                    fb.b_values.len()
                )));
            }
        }
        if fb.mode == FeedbackMode::AntiDamping && !matches!(self.model()?, ModelConfig::Scalar { .. }) {
            return Err(CliError::Config(
                "anti_damping feedback is only available for the scalar model".into(),
            ));
        }
        Ok(())
    }

    /// Assembles the model with the feedback values of the config.
    pub fn build(&self) -> Result<BuiltModel, CliError> {
        let fb = self.feedback()?;
        self.build_with(self.model()?, fb)
    }

    pub fn build_with(&self, model: &ModelConfig, fb: &FeedbackConfig) -> Result<BuiltModel, CliError> {
        let built = match *model {
            ModelConfig::Scalar { a } => BuiltModel::Scalar(build_scalar(a, &fb.b_values, fb.mode).map_err(classify)?),
            ModelConfig::ViscoelasticWave {
                n_x,
                n_s,
                s_max,
                mu0,
                delta,
            } => {
                let kernel = MemoryKernel::new(mu0, delta).map_err(classify)?;
                BuiltModel::Viscoelastic(Box::new(
                    build_viscoelastic_wave(n_x, n_s, s_max, kernel, &fb.b_values, fb.cyclic).map_err(classify)?,
                ))
            }
            ModelConfig::LocallyDampedWave {
                n_x,
                a,
                omega1,
                omega2,
            } => BuiltModel::LocallyDamped(Box::new(
                build_locally_damped_wave(n_x, a, omega1, omega2, &fb.b_values, fb.cyclic).map_err(classify)?,
            )),
        };
        Ok(built)
    }

    pub fn envelope(&self, model: &BuiltModel) -> Result<SemigroupEnvelope, CliError> {
        match *self.envelope_section()? {
            EnvelopeConfig::Pinned(PinnedEnvelope { m, mu }) => SemigroupEnvelope::pinned(m, mu).map_err(classify),
            EnvelopeConfig::Estimated(EstimatedEnvelope { strategy }) => model.envelope(strategy).map_err(CliError::Numerical),
        }
    }
}

pub enum BuiltModel {
    Scalar(DelaySystem),
    Viscoelastic(Box<ViscoelasticWaveModel>),
    LocallyDamped(Box<LocallyDampedWaveModel>),
}

impl BuiltModel {
    pub fn system(&self) -> &DelaySystem {
        match self {
            BuiltModel::Scalar(s) => s,
            BuiltModel::Viscoelastic(m) => &m.system,
            BuiltModel::LocallyDamped(m) => &m.system,
        }
    }

    pub fn envelope(&self, strategy: EnvelopeStrategy) -> crate::Result<SemigroupEnvelope> {
        match self {
            BuiltModel::Scalar(s) => crate::semigroup::estimate_envelope(s.generator(), s.inner_product(), strategy),
            BuiltModel::Viscoelastic(m) => m.envelope(strategy),
            BuiltModel::LocallyDamped(m) => m.envelope(strategy),
        }
    }

    pub fn default_initial(&self) -> Col<f64> {
        let bump = |x: f64| (std::f64::consts::PI * x).sin();
        match self {
            BuiltModel::Scalar(_) => Col::from_fn(1, |_| 1.0),
            BuiltModel::Viscoelastic(m) => m.initial_state(bump, |_| 0.0, |x, _| bump(x)),
            BuiltModel::LocallyDamped(m) => m.initial_state(bump, |_| 0.0),
        }
    }
}
