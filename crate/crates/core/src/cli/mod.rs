//! Command line driver: `simulate`, `certify`, `sweep`, `validate`.
//!
//! Exit codes: 0 success (or certified), 2 configuration error,
//! 3 not certified, 4 inapplicable, 5 numerical failure.

pub mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{
    exponential_certificate, remark_sufficient_test, series_certificate, CReading, Certificate, CertificateReport,
    ExponentialVariant, Verdict,
};
use crate::error::Error;
use crate::integrator::{align_step, simulate, History};
use crate::monitor::{monitor_all, CycleVariant, InequalityReport, MonitorOptions};
use crate::schedule::{HypothesisReport, SwitchingSchedule};
use crate::semigroup::SemigroupEnvelope;
use crate::system::{DissipativityCheck, FeedbackMode};

use config::{classify, HistoryConfig, ModelConfig, RunConfig, ScheduleConfig, TheoremName};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CERTIFIED: i32 = 3;
pub const EXIT_INAPPLICABLE: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown sweep axis `{0}` (expected one of B_bar, T0, T_tilde, tau, a, mu0, delta)")]
    UnknownAxis(String),
    #[error("numerical error: {0}")]
    Numerical(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownAxis(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON writer that prints every float with 17 significant digits.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Compact JSON with [`fmt17`] floats; non-finite values become `null`.
pub fn to_json17<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

#[derive(Debug, Parser)]
#[command(name = "onoff-delay", version, about = "Simulate and certify systems with on-off delayed feedback")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Add one column per state component to the trajectory CSV.
    #[arg(long, global = true)]
    pub emit_states: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the system and check the inequalities along the trajectory.
    Simulate,
    /// Evaluate the stability certificates listed in the config.
    Certify,
    /// Evaluate the exponential certificate along one parameter axis.
    Sweep {
        #[arg(long)]
        axis: String,
        /// Comma separated values; may be empty.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        values: String,
    },
    /// Report schedule hypotheses, dissipativity and the envelope.
    Validate,
}

/// Parses the arguments, runs the command and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = config::load(path)?;
    if let Some(out) = &cli.out {
        std::fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Simulate => {
            let summary = run_simulate(&cfg, out, cli.emit_states)?;
            emit(&format!("{}\n", summary.line()));
            Ok(EXIT_OK)
        }
        Command::Certify => {
            let outcome = run_certify(&cfg)?;
            let json = to_json17(&outcome.reports);
            if let Some(dir) = out {
                let p = dir.join("certificate.json");
                std::fs::write(&p, &json).map_err(|e| io_error(&p, e))?;
            }
            emit(&format!("{json}\n"));
            Ok(outcome.exit_code)
        }
        Command::Sweep { axis, values } => {
            let values = parse_values(values)?;
            let rows = run_sweep(&cfg, axis, &values, cli.threads)?;
            let csv = sweep_csv(&rows);
            if let Some(dir) = out {
                let p = dir.join("sweep.csv");
                std::fs::write(&p, &csv).map_err(|e| io_error(&p, e))?;
            }
            emit(&csv);
            if let Some((lo, hi)) = crossing(&rows) {
                eprintln!("d crosses 1 between {} and {}", fmt17(lo), fmt17(hi));
            }
            Ok(EXIT_OK)
        }
        Command::Validate => {
            let report = run_validate(&cfg)?;
            let json = to_json17(&report);
            if let Some(dir) = out {
                let p = dir.join("validate.json");
                std::fs::write(&p, &json).map_err(|e| io_error(&p, e))?;
            }
            emit(&format!("{json}\n"));
            Ok(EXIT_OK)
        }
    }
}

fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| CliError::Config(format!("bad sweep value `{s}`: {e}"))))
        .collect()
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub h: f64,
    pub h_requested: f64,
    pub rows: usize,
    pub final_norm: f64,
    pub worst_slack: f64,
    pub checks: usize,
    pub failures: usize,
    pub report: InequalityReport,
}

impl SimulateSummary {
    pub fn line(&self) -> String {
        format!(
            "final_norm={} worst_slack={} checks={} failures={}",
            fmt17(self.final_norm),
            fmt17(self.worst_slack),
            self.checks,
            self.failures
        )
    }
}

/// Writes `trajectory.csv` and `monitor.json` into `out` when given.
pub fn run_simulate(cfg: &RunConfig, out: Option<&Path>, emit_states: bool) -> Result<SimulateSummary, CliError> {
    cfg.require(&["model", "schedule", "envelope", "feedback", "run"])?;
    let schedule = cfg.schedule()?;
    cfg.cross_validate(&schedule)?;
    let run = cfg.run()?;
    let model = cfg.build()?;
    let env = cfg.envelope(&model)?;
    let system = model.system();

    let h = align_step(run.h, &schedule, run.t_end).map_err(classify)?;
    if h != run.h {
        eprintln!("note: step adjusted from {} to {} to align with tau and the switch times", run.h, h);
    }
    let u0 = match &run.initial {
        Some(v) if v.len() != system.dim() => {
            return Err(CliError::Config(format!(
                "run.initial has {} entries, the model has dimension {}",
                v.len(),
                system.dim()
            )))
        }
        Some(v) => faer::Col::from_fn(v.len(), |i| v[i]),
        None => model.default_initial(),
    };
    let history = match run.history {
        HistoryConfig::None => History::Unreachable,
        HistoryConfig::Constant => History::Constant,
    };
    let traj = simulate(system, &schedule, u0.as_ref(), h, run.t_end, history).map_err(classify)?;
    let report = monitor_all(&traj, system, &env, &MonitorOptions::default()).map_err(CliError::Numerical)?;

    if let Some(dir) = out {
        let p = dir.join("trajectory.csv");
        let file = File::create(&p).map_err(|e| io_error(&p, e))?;
        let mut w = BufWriter::new(file);
        traj.write_csv(&mut w, emit_states).map_err(|e| io_error(&p, e))?;
        w.flush().map_err(|e| io_error(&p, e))?;
        let p = dir.join("monitor.json");
        std::fs::write(&p, to_json17(&report)).map_err(|e| io_error(&p, e))?;
    }
    Ok(SimulateSummary {
        h,
        h_requested: run.h,
        rows: traj.len(),
        final_norm: *traj.norms().last().unwrap(),
        worst_slack: report.worst_slack(),
        checks: report.applicable().count(),
        failures: report.failures().count(),
        report,
    })
}

// ----------------------------------------------------------------- certify

#[derive(Debug, Clone)]
pub struct CertifyOutcome {
    pub reports: Vec<CertificateReport>,
    pub exit_code: i32,
}

/// 0 if any report certifies, else 3 if any applies, else 4.
pub fn certify_exit_code(reports: &[CertificateReport]) -> i32 {
    if reports.iter().any(|r| r.verdict.is_certified()) {
        EXIT_OK
    } else if reports.iter().any(|r| r.applicable) {
        EXIT_NOT_CERTIFIED
    } else {
        EXIT_INAPPLICABLE
    }
}

fn sup(norms: &[f64]) -> f64 {
    norms.iter().fold(0.0, |a, &b| a.max(b))
}

/// `(T0, T~)` of a periodic schedule.
fn periodic_lengths(schedule: &SwitchingSchedule) -> Option<(f64, f64)> {
    schedule.pattern().map(|p| (p.even_length, p.odd_length))
}

pub fn run_certify(cfg: &RunConfig) -> Result<CertifyOutcome, CliError> {
    cfg.require(&["model", "schedule", "envelope", "feedback", "certify"])?;
    let schedule = cfg.schedule()?;
    cfg.cross_validate(&schedule)?;
    let cert = cfg.certify()?;
    let model = cfg.build()?;
    let env = cfg.envelope(&model)?;
    let system = model.system();
    let norms = system.op_norms();
    let cyclic = system.is_cyclic();

    let mut reports = Vec::new();
    for &theorem in &cert.theorems {
        let series = |variant: CycleVariant| {
            series_certificate(&schedule, norms, cyclic, &env, variant, cert.n_cycles, cert.pattern, cert.target)
                .map_err(classify)
        };
        match theorem {
            TheoremName::SeriesGeneral => reports.push(series(CycleVariant::General)?),
            TheoremName::SeriesSmallDelay => reports.push(series(CycleVariant::SmallDelay)?),
            TheoremName::SeriesAntiDamping => reports.push(series(CycleVariant::AntiDamping)?),
            TheoremName::SummableFeedback => {
                let tail = cert
                    .tail
                    .as_ref()
                    .ok_or_else(|| CliError::Config("summable_feedback needs certify.tail".into()))?;
                reports.push(
                    remark_sufficient_test(&schedule, norms, cyclic, &env, tail, cert.t_bar, system.mode())
                        .map_err(classify)?,
                );
            }
            TheoremName::ExponentialGeneral => {
                exponential(&mut reports, &schedule, norms, &env, ExponentialVariant::DelayedGeneral, cert)?
            }
            TheoremName::ExponentialSmallDelay => {
                exponential(&mut reports, &schedule, norms, &env, ExponentialVariant::DelayedSmall, cert)?
            }
            TheoremName::ExponentialAntiDamping => {
                exponential(&mut reports, &schedule, norms, &env, ExponentialVariant::AntiDamping, cert)?
            }
        }
    }
    let exit_code = certify_exit_code(&reports);
    Ok(CertifyOutcome { reports, exit_code })
}

fn exponential_name(variant: ExponentialVariant) -> Certificate {
    match variant {
        ExponentialVariant::DelayedGeneral => Certificate::ExponentialGeneral,
        ExponentialVariant::DelayedSmall => Certificate::ExponentialSmallDelay,
        ExponentialVariant::AntiDamping => Certificate::ExponentialAntiDamping,
    }
}

fn exponential(
    reports: &mut Vec<CertificateReport>,
    schedule: &SwitchingSchedule,
    norms: &[f64],
    env: &SemigroupEnvelope,
    variant: ExponentialVariant,
    cert: &config::CertifyConfig,
) -> Result<(), CliError> {
    for &reading in &cert.readings {
        let report = match periodic_lengths(schedule) {
            None => CertificateReport::unavailable(
                exponential_name(variant),
                Some(reading),
                vec!["schedule is not periodic".into()],
            ),
            Some((t0, tt)) => {
                exponential_certificate(t0, tt, schedule.delay(), sup(norms), env, variant, reading, cert.n_cycles)
                    .map_err(classify)?
            }
        };
        reports.push(report);
    }
    Ok(())
}

// ------------------------------------------------------------------- sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    BBar,
    T0,
    TTilde,
    Tau,
    A,
    Mu0,
    Delta,
}

impl std::str::FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "B_bar" | "b_bar" | "B" => SweepAxis::BBar,
            "T0" | "t0" => SweepAxis::T0,
            "T_tilde" | "t_tilde" => SweepAxis::TTilde,
            "tau" => SweepAxis::Tau,
            "a" => SweepAxis::A,
            "mu0" => SweepAxis::Mu0,
            "delta" => SweepAxis::Delta,
            _ => return Err(CliError::UnknownAxis(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub d: Option<f64>,
    pub alpha: Option<f64>,
    pub verdict: Verdict,
}

/// Exponential certificate per value of `axis`, rows in input order.
///
/// The variant is the first exponential theorem of the certify section
/// (default: general, or anti-damping in that mode) and the reading its
/// first entry (default `as_stated`).
pub fn run_sweep(cfg: &RunConfig, axis: &str, values: &[f64], threads: Option<usize>) -> Result<Vec<SweepRow>, CliError> {
    let axis: SweepAxis = axis.parse()?;
    cfg.require(&["model", "schedule", "envelope", "feedback"])?;
    let schedule = cfg.schedule()?;
    let (t0, tt) = match cfg.schedule_section()? {
        ScheduleConfig::Periodic(p) => (p.t0, p.t_tilde),
        ScheduleConfig::Explicit(_) => periodic_lengths(&schedule)
            .ok_or_else(|| CliError::Config("sweeps need a periodic schedule".into()))?,
    };
    let tau = schedule.delay();
    let fb = cfg.feedback()?;
    cfg.envelope_section()?;
    let model_cfg = cfg.model()?.clone();
    let applies = match (axis, &model_cfg) {
        (SweepAxis::A, ModelConfig::Scalar { .. } | ModelConfig::LocallyDampedWave { .. }) => true,
        (SweepAxis::Mu0 | SweepAxis::Delta, ModelConfig::ViscoelasticWave { .. }) => true,
        (SweepAxis::A | SweepAxis::Mu0 | SweepAxis::Delta, _) => false,
        _ => true,
    };
    if !applies {
        return Err(CliError::Config(format!("axis {axis:?} does not apply to the configured model")));
    }
    let (variant, reading) = sweep_variant(cfg, fb.mode);

    let rebuilds = matches!(axis, SweepAxis::A | SweepAxis::Mu0 | SweepAxis::Delta);
    let base = if rebuilds {
        None
    } else {
        let model = cfg.build()?;
        let env = cfg.envelope(&model)?;
        Some((sup(model.system().op_norms()), env))
    };

    let point = |v: f64| -> Result<SweepRow, CliError> {
        let (sup_norm, env) = match &base {
            Some(b) => *b,
            None => {
                let mut m = model_cfg.clone();
                match &mut m {
                    ModelConfig::Scalar { a } | ModelConfig::LocallyDampedWave { a, .. } => *a = v,
                    ModelConfig::ViscoelasticWave { mu0, delta, .. } => match axis {
                        SweepAxis::Mu0 => *mu0 = v,
                        _ => *delta = v,
                    },
                }
                let model = cfg.build_with(&m, fb)?;
                let env = cfg.envelope(&model)?;
                (sup(model.system().op_norms()), env)
            }
        };
        let (mut t0, mut tt, mut tau, mut sup_norm) = (t0, tt, tau, sup_norm);
        match axis {
            SweepAxis::BBar => sup_norm = v,
            SweepAxis::T0 => t0 = v,
            SweepAxis::TTilde => tt = v,
            SweepAxis::Tau => tau = v,
            _ => {}
        }
        let r = exponential_certificate(t0, tt, tau, sup_norm, &env, variant, reading, 0).map_err(classify)?;
        Ok(SweepRow {
            value: v,
            d: r.d,
            alpha: r.predicted.map(|p| p.alpha),
            verdict: r.verdict,
        })
    };
    let eval = |v: f64| match point(v) {
        Ok(row) => row,
        Err(e) => {
            eprintln!("note: value {v}: {e}");
            SweepRow {
                value: v,
                d: None,
                alpha: None,
                verdict: Verdict::Inapplicable,
            }
        }
    };

    let rows = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            pool.install(|| values.par_iter().map(|&v| eval(v)).collect())
        }
        None => values.par_iter().map(|&v| eval(v)).collect(),
    };
    Ok(rows)
}

fn sweep_variant(cfg: &RunConfig, mode: FeedbackMode) -> (ExponentialVariant, CReading) {
    let fallback = match mode {
        FeedbackMode::Delayed => ExponentialVariant::DelayedGeneral,
        FeedbackMode::AntiDamping => ExponentialVariant::AntiDamping,
    };
    let Some(cert) = &cfg.certify else {
        return (fallback, CReading::AsStated);
    };
    let variant = cert
        .theorems
        .iter()
        .find_map(|t| match t {
            TheoremName::ExponentialGeneral => Some(ExponentialVariant::DelayedGeneral),
            TheoremName::ExponentialSmallDelay => Some(ExponentialVariant::DelayedSmall),
            TheoremName::ExponentialAntiDamping => Some(ExponentialVariant::AntiDamping),
            _ => None,
        })
        .unwrap_or(fallback);
    (variant, cert.readings.first().copied().unwrap_or(CReading::AsStated))
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::CertifiedFiniteHorizon => "certified_finite_horizon",
        Verdict::CertifiedAsymptoticPattern => "certified_asymptotic_pattern",
        Verdict::NotCertified => "not_certified",
        Verdict::Inapplicable => "inapplicable",
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |x: Option<f64>| x.map(fmt17).unwrap_or_default();
    let mut s = String::from("value,d,alpha,verdict\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", fmt17(r.value), opt(r.d), opt(r.alpha), verdict_str(r.verdict)));
    }
    s
}

/// First consecutive pair of rows whose `d` lies on opposite sides of 1.
pub fn crossing(rows: &[SweepRow]) -> Option<(f64, f64)> {
    rows.windows(2).find_map(|w| match (w[0].d, w[1].d) {
        (Some(a), Some(b)) if (a < 1.0) != (b < 1.0) => Some((w[0].value, w[1].value)),
        _ => None,
    })
}

// ---------------------------------------------------------------- validate

#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    pub switch_times: Vec<f64>,
    pub hypotheses: HypothesisReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<SemigroupEnvelope>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dissipativity: Option<DissipativityCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op_norms: Option<Vec<f64>>,
}

/// Schedule hypotheses against `T*` (0 without an envelope section) and,
/// when a model is configured, its dissipativity and operator norms.
pub fn run_validate(cfg: &RunConfig) -> Result<ValidateReport, CliError> {
    let schedule = cfg.schedule()?;
    let model = match (&cfg.model, &cfg.feedback) {
        (Some(_), Some(_)) => {
            cfg.cross_validate(&schedule)?;
            Some(cfg.build()?)
        }
        (Some(_), None) => return Err(CliError::Config("missing `feedback` section".into())),
        _ => None,
    };
    let envelope = match (&cfg.envelope, &model) {
        (Some(config::EnvelopeConfig::Pinned(p)), _) => {
            Some(SemigroupEnvelope::pinned(p.m, p.mu).map_err(classify)?)
        }
        (Some(_), Some(m)) => Some(cfg.envelope(m)?),
        (Some(_), None) => return Err(CliError::Config("envelope strategy needs a `model` section".into())),
        (None, _) => None,
    };
    let t_star = envelope.map(|e| e.t_star()).unwrap_or(0.0);
    Ok(ValidateReport {
        switch_times: schedule.switch_times().to_vec(),
        hypotheses: schedule.validate_hypotheses(t_star),
        envelope,
        dissipativity: model.as_ref().map(|m| m.system().dissipativity()),
        op_norms: model.as_ref().map(|m| m.system().op_norms().to_vec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        serde_json::from_str(text).unwrap()
    }

    const DEMO: &str = r#"{
        "model": {"type": "scalar", "a": 1.0},
        "schedule": {"switch_times": [0, 2, 3, 5], "delay": 1.0},
        "envelope": {"M": 1.0, "mu": 1.0},
        "feedback": {"b_values": [0.5]},
        "run": {"h": 0.001, "t_end": 5.0}
    }"#;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"modle": {}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(
            r#"{"schedule": {"switch_times": [0, 1], "delay": 1, "extra": 2}}"#
        )
        .is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"envelope": {"M": 1, "mu": 1, "x": 0}}"#).is_err());
    }

    #[test]
    fn simulate_demo() {
        let s = run_simulate(&cfg(DEMO), None, false).unwrap();
        assert_eq!(s.rows, 5001);
        let exact = (-5.0f64).exp() * (1.0 + 0.5 * std::f64::consts::E);
        assert!((s.final_norm - exact).abs() < 1e-6 * exact);
        assert_eq!(s.failures, 0);
    }

    #[test]
    fn missing_section_is_a_config_error() {
        let e = run_simulate(&cfg(r#"{"schedule": {"switch_times": [0, 2, 3, 5], "delay": 1.0}}"#), None, false)
            .unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        assert!(e.to_string().contains("`model`"), "{e}");
    }

    #[test]
    fn sweep_rejects_unknown_axis() {
        let c = cfg(DEMO);
        assert!(matches!(run_sweep(&c, "gamma", &[1.0], None), Err(CliError::UnknownAxis(_))));
    }

    #[test]
    fn json_floats_have_17_digits() {
        let s = to_json17(&serde_json::json!({"x": 0.1, "y": [1.0, f64::NAN], "n": 3}));
        assert_eq!(s, r#"{"n":3,"x":1.0000000000000001e-1,"y":[1.0000000000000000e0,null]}"#);
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn value_parsing() {
        assert_eq!(parse_values("").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_values("0, 0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_values("x").is_err());
    }

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, std::f64::consts::PI, 1e-300, -2.5e17] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
