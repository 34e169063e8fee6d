//! Lyapunov functional and per-interval inequality checks evaluated on
//! computed trajectories.
//!
//! Every check produces an [`InequalityCheck`] with `slack = rhs +
//! tolerance - lhs`, so `pass` is exactly `slack >= 0`. Checks whose
//! preconditions fail are kept in the report as not applicable, with
//! `pass = true` and no numbers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{History, Trajectory};
use crate::semigroup::SemigroupEnvelope;
use crate::system::{DelaySystem, FeedbackMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorOptions {
    /// Relative tolerance for inequalities between sampled values.
    pub rtol: f64,
    /// Safety factor `C` in the finite-difference slack `C h^2 (...)`.
    pub fd_factor: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        MonitorOptions {
            rtol: 1e-8,
            fd_factor: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    /// Cycle number: the check concerns `I_{2n}`, `I_{2n+1}` or the cycle
    /// `[t_{2n}, t_{2n+2})`.
    pub n: usize,
    pub interval: usize,
    /// Node time of the worst sample, for checks sampled along an interval.
    pub t: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityCheck {
    fn evaluated(name: &'static str, n: usize, interval: usize, t: Option<f64>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs + tol - lhs;
        InequalityCheck {
            name,
            n,
            interval,
            t,
            lhs: Some(lhs),
            rhs: Some(rhs),
            slack: Some(slack),
            tolerance: tol,
            pass: slack >= 0.0,
            applicable: true,
            note: None,
        }
    }

    fn skipped(name: &'static str, n: usize, interval: usize, note: String) -> Self {
        InequalityCheck {
            name,
            n,
            interval,
            t: None,
            lhs: None,
            rhs: None,
            slack: None,
            tolerance: 0.0,
            pass: true,
            applicable: false,
            note: Some(note),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn extend(&mut self, other: InequalityReport) {
        self.checks.extend(other.checks);
    }

    /// Smallest slack over applicable checks (`+inf` if there are none).
    pub fn worst_slack(&self) -> f64 {
        self.checks
            .iter()
            .filter_map(|c| c.slack)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn applicable(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| c.applicable)
    }

    pub fn named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a InequalityCheck> + 'a {
        self.checks.iter().filter(move |c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `F(t) = |U|^2 / 2 + 1/2 int_{t-tau}^t |B(s+tau)| |U(s)|^2 ds` on the
/// trajectory grid. Entries are `None` where `B(s + tau)` is not known,
/// i.e. where the window reaches past the listed schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovSeries {
    pub times: Vec<f64>,
    pub f_values: Vec<Option<f64>>,
    pub window_integrals: Vec<Option<f64>>,
}

impl LyapunovSeries {
    pub fn at(&self, k: usize) -> Option<f64> {
        self.f_values.get(k).copied().flatten()
    }
}

/// `|B|` on interval `n`, `None` where the schedule or operator list ends.
fn norm_on(system: &DelaySystem, traj: &Trajectory, n: usize) -> Result<Option<f64>> {
    if n >= traj.schedule().n_intervals() {
        return Ok(None);
    }
    match system.feedback_norm(n) {
        Ok(b) => Ok(Some(b)),
        Err(Error::MissingFeedbackOperator(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn lyapunov_series(traj: &Trajectory, system: &DelaySystem) -> Result<LyapunovSeries> {
    let h = traj.step();
    let m = traj.delay_steps() as isize;
    let len = traj.len() as isize;
    let sq: Vec<f64> = traj.norms().iter().map(|x| x * x).collect();
    let g = system.inner_product();
    let history_sq: Option<Vec<f64>> = match traj.history() {
        History::Unreachable => None,
        History::Constant => Some(vec![sq[0]; m as usize]),
        History::Table(values) => Some(values.iter().map(|v| g.norm_sq(v.as_ref())).collect()),
    };
    // squared norm at node j >= -m
    let node_sq = |j: isize| -> Option<f64> {
        if j >= 0 {
            Some(sq[j as usize])
        } else {
            history_sq.as_ref().map(|hs| hs[(m + j) as usize])
        }
    };

    // cell j spans nodes j..j+1 and carries |B(s + tau)| for s in the cell
    let schedule = traj.schedule();
    let mut cells: Vec<Option<f64>> = Vec::with_capacity((len + m) as usize);
    let mut underflow = vec![false; (len + m) as usize];
    for j in -m..(len - 1) {
        let mid = (j + m) as f64 * h + 0.5 * h;
        let n = schedule.locate(mid).index;
        let value = match norm_on(system, traj, n)? {
            None => None,
            Some(b) if b == 0.0 => Some(0.0),
            Some(b) => match (node_sq(j), node_sq(j + 1)) {
                (Some(a), Some(c)) => Some(b * 0.5 * h * (a + c)),
                _ => {
                    underflow[(j + m) as usize] = true;
                    None
                }
            },
        };
        cells.push(value);
    }

    let mut f_values = Vec::with_capacity(len as usize);
    let mut windows = Vec::with_capacity(len as usize);
    for k in 0..len {
        // cells k-m .. k-1 live at offsets 0 .. m in `cells`
        let lo = k as usize;
        let hi = (k + m) as usize;
        let mut sum = 0.0;
        let mut known = true;
        for c in lo..hi {
            if underflow[c] {
                return Err(Error::WindowUnderflow(k as f64 * h));
            }
            match cells[c] {
                Some(v) => sum += v,
                None => known = false,
            }
        }
        let w = known.then_some(0.5 * sum);
        windows.push(w);
        f_values.push(w.map(|w| 0.5 * sq[k as usize] + w));
    }
    Ok(LyapunovSeries {
        times: traj.times().to_vec(),
        f_values,
        window_integrals: windows,
    })
}

/// Node index range `[start, end]` of interval `n` inside the run.
fn interval_nodes(traj: &Trajectory, n: usize) -> Option<(usize, usize)> {
    Some((traj.switch_node(n)?, traj.switch_node(n + 1)?))
}

/// Nodes where a derivative along the trajectory may jump or kink: switch
/// nodes and their shifts by `+-tau`.
fn break_nodes(traj: &Trajectory) -> Vec<bool> {
    let len = traj.len();
    let m = traj.delay_steps();
    let mut marks = vec![false; len];
    let mut n = 1;
    while let Some(t) = traj.schedule().start(n) {
        let k = (t / traj.step()).round();
        for shifted in [k - m as f64, k, k + m as f64] {
            if shifted >= 0.0 && (shifted as usize) < len {
                marks[shifted as usize] = true;
            }
        }
        if k as usize >= len + m {
            break;
        }
        n += 1;
    }
    marks
}

/// Central-difference check of `v' <= rhs(k)` at interior nodes of
/// `[start, end]`; returns the worst node.
#[allow(clippy::too_many_arguments)]
fn derivative_check(
    name: &'static str,
    n: usize,
    interval: usize,
    values: &dyn Fn(usize) -> Option<f64>,
    rhs: &dyn Fn(usize) -> f64,
    range: (usize, usize),
    breaks: &[bool],
    traj: &Trajectory,
    opts: &MonitorOptions,
) -> InequalityCheck {
    let h = traj.step();
    let (start, end) = range;
    let mut worst: Option<InequalityCheck> = None;
    for k in (start + 1)..end {
        if breaks[k] {
            continue;
        }
        let (Some(prev), Some(cur), Some(next)) = (values(k - 1), values(k), values(k + 1)) else {
            continue;
        };
        let lhs = (next - prev) / (2.0 * h);
        let r = rhs(k);
        let mut third: f64 = 0.0;
        if k >= start + 2 {
            if let Some(pp) = values(k - 2) {
                third = third.max((next - 3.0 * cur + 3.0 * prev - pp).abs());
            }
        }
        if k + 2 <= end {
            if let Some(nn) = values(k + 2) {
                third = third.max((nn - 3.0 * next + 3.0 * cur - prev).abs());
            }
        }
        let scale = prev.abs().max(cur.abs()).max(next.abs());
        let tol = opts.fd_factor
            * (third / (6.0 * h) + h * h * (lhs.abs() + r.abs()) + 16.0 * f64::EPSILON * scale / h);
        let check = InequalityCheck::evaluated(name, n, interval, Some(traj.times()[k]), lhs, r, tol);
        if worst.as_ref().is_none_or(|w| check.slack < w.slack) {
            worst = Some(check);
        }
    }
    worst.unwrap_or_else(|| InequalityCheck::skipped(name, n, interval, "no interior nodes".into()))
}

fn length(traj: &Trajectory, n: usize) -> Option<f64> {
    traj.schedule().length(n)
}

/// `|U(t_{2n+1})|^2 <= c_n |U(t_{2n})|^2` on every even interval.
pub fn check_even_contraction(traj: &Trajectory, env: &SemigroupEnvelope, opts: &MonitorOptions) -> InequalityReport {
    let mut checks = Vec::new();
    let mut n = 0;
    while let Some((s, e)) = interval_nodes(traj, 2 * n) {
        let name = "even_contraction";
        let len = length(traj, 2 * n).unwrap();
        match env.contraction_factor(len) {
            Ok(c) => {
                let before = traj.norms()[s].powi(2);
                let after = traj.norms()[e].powi(2);
                let rhs = c * before;
                checks.push(InequalityCheck::evaluated(name, n, 2 * n, None, after, rhs, opts.rtol * rhs));
            }
            Err(err) => checks.push(InequalityCheck::skipped(name, n, 2 * n, err.to_string())),
        }
        n += 1;
    }
    InequalityReport { checks }
}

/// `|U(t)| <= |U(t_{2n})|` for every node of every even interval.
pub fn check_even_monotone(traj: &Trajectory, opts: &MonitorOptions) -> InequalityReport {
    let mut checks = Vec::new();
    let mut n = 0;
    loop {
        let Some(start) = traj.switch_node(2 * n) else { break };
        let end = traj.switch_node(2 * n + 1).unwrap_or(traj.len());
        let base = traj.norms()[start];
        let (k, worst) = (start..end.min(traj.len()))
            .map(|k| (k, traj.norms()[k]))
            .fold((start, base), |acc, x| if x.1 > acc.1 { x } else { acc });
        checks.push(InequalityCheck::evaluated(
            "even_monotone",
            n,
            2 * n,
            Some(traj.times()[k]),
            worst,
            base,
            opts.rtol * base,
        ));
        n += 1;
    }
    InequalityReport { checks }
}

fn feedback_gate(traj: &Trajectory, n: usize) -> Option<String> {
    let tau = traj.schedule().delay();
    let even_ok = |i: usize| length(traj, i).is_none_or(|t| t >= tau);
    if !even_ok(2 * n) || !even_ok(2 * n + 2) {
        return Some(format!("needs T_{} >= tau and T_{} >= tau", 2 * n, 2 * n + 2));
    }
    None
}

/// On feedback-active intervals: `F'(t) <= B |U(t)|^2` in delayed mode,
/// `d/dt |U|^2 <= 2 D |U|^2` in anti-damping mode.
pub fn check_f_derivative(
    traj: &Trajectory,
    series: &LyapunovSeries,
    system: &DelaySystem,
    opts: &MonitorOptions,
) -> Result<InequalityReport> {
    let breaks = break_nodes(traj);
    let sq: Vec<f64> = traj.norms().iter().map(|x| x * x).collect();
    let mut checks = Vec::new();
    let mut n = 0;
    while let Some(range) = interval_nodes(traj, 2 * n + 1) {
        let i = 2 * n + 1;
        let b = system.feedback_norm(i)?;
        match system.mode() {
            FeedbackMode::Delayed => {
                let name = "lyapunov_derivative";
                if let Some(note) = feedback_gate(traj, n) {
                    checks.push(InequalityCheck::skipped(name, n, i, note));
                } else {
                    checks.push(derivative_check(
                        name,
                        n,
                        i,
                        &|k| series.at(k),
                        &|k| b * sq[k],
                        range,
                        &breaks,
                        traj,
                        opts,
                    ));
                }
            }
            FeedbackMode::AntiDamping => checks.push(derivative_check(
                "antidamping_growth",
                n,
                i,
                &|k| Some(sq[k]),
                &|k| 2.0 * b * sq[k],
                range,
                &breaks,
                traj,
                opts,
            )),
        }
        n += 1;
    }
    Ok(InequalityReport { checks })
}

/// `d/dt |U|^2 <= B |U|^2 + B |U(t_{2n})|^2` on feedback-active intervals
/// with `T_{2n+1} <= tau <= T_{2n}`.
pub fn check_growth_bound(traj: &Trajectory, system: &DelaySystem, opts: &MonitorOptions) -> Result<InequalityReport> {
    let name = "growth_bound";
    let breaks = break_nodes(traj);
    let sq: Vec<f64> = traj.norms().iter().map(|x| x * x).collect();
    let tau = traj.schedule().delay();
    let mut checks = Vec::new();
    let mut n = 0;
    while let Some(range) = interval_nodes(traj, 2 * n + 1) {
        let i = 2 * n + 1;
        if system.mode() != FeedbackMode::Delayed {
            checks.push(InequalityCheck::skipped(name, n, i, "delayed mode only".into()));
        } else if !(length(traj, i).unwrap() <= tau && length(traj, 2 * n).unwrap() >= tau) {
            checks.push(InequalityCheck::skipped(
                name,
                n,
                i,
                format!("needs T_{i} <= tau <= T_{}", 2 * n),
            ));
        } else {
            let b = system.feedback_norm(i)?;
            let anchor = sq[traj.switch_node(2 * n).unwrap()];
            checks.push(derivative_check(
                name,
                n,
                i,
                &|k| Some(sq[k]),
                &|k| b * sq[k] + b * anchor,
                range,
                &breaks,
                traj,
                opts,
            ));
        }
        n += 1;
    }
    Ok(InequalityReport { checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleVariant {
    /// `e^{2BT} (c_n + BT)`
    General,
    /// `e^{BT} (c_n + 1 - e^{-BT})`, for `T_{2n+1} <= tau`
    SmallDelay,
    /// `e^{2DT} c_n`
    AntiDamping,
}

impl CycleVariant {
    pub fn factor(self, c: f64, b: f64, t: f64) -> f64 {
        match self {
            CycleVariant::General => (2.0 * b * t).exp() * (c + b * t),
            CycleVariant::SmallDelay => (b * t).exp() * (c + 1.0 - (-b * t).exp()),
            CycleVariant::AntiDamping => (2.0 * b * t).exp() * c,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CycleVariant::General => "cycle_general",
            CycleVariant::SmallDelay => "cycle_small_delay",
            CycleVariant::AntiDamping => "cycle_anti_damping",
        }
    }

    /// Why the variant does not apply to cycle `n`, if it does not.
    pub fn unmet(self, lengths: (f64, f64, Option<f64>), tau: f64, t_star: f64, mode: FeedbackMode) -> Option<String> {
        let (even, odd, next_even) = lengths;
        let mut unmet = Vec::new();
        let delayed = self != CycleVariant::AntiDamping;
        if delayed != (mode == FeedbackMode::Delayed) {
            unmet.push("feedback mode mismatch".to_string());
        }
        if even <= t_star {
            unmet.push(format!("T_2n = {even} <= T* = {t_star}"));
        }
        if delayed && (even < tau || next_even.is_some_and(|t| t < tau)) {
            unmet.push("even intervals shorter than tau".to_string());
        }
        if self == CycleVariant::SmallDelay && odd > tau {
            unmet.push(format!("T_2n+1 = {odd} > tau"));
        }
        (!unmet.is_empty()).then(|| unmet.join("; "))
    }
}

/// Per cycle: `|U(t_{2n+2})|^2 / |U(t_{2n})|^2` against the variant
/// factor. For the general variant, with a Lyapunov series, also checks
/// `F(t_{2n+2}) <= e^{2BT} F(t_{2n+1})` and
/// `2 F(t_{2n+2}) <= factor |U(t_{2n})|^2`.
pub fn check_cycle_bounds(
    traj: &Trajectory,
    series: Option<&LyapunovSeries>,
    env: &SemigroupEnvelope,
    system: &DelaySystem,
    variant: CycleVariant,
    opts: &MonitorOptions,
) -> Result<InequalityReport> {
    let tau = traj.schedule().delay();
    let t_star = env.t_star();
    let mut checks = Vec::new();
    let mut n = 0;
    while let (Some(s0), Some(s1), Some(s2)) = (
        traj.switch_node(2 * n),
        traj.switch_node(2 * n + 1),
        traj.switch_node(2 * n + 2),
    ) {
        let name = variant.as_str();
        let even = length(traj, 2 * n).unwrap();
        let odd = length(traj, 2 * n + 1).unwrap();
        let next_even = length(traj, 2 * n + 2);
        if let Some(note) = variant.unmet((even, odd, next_even), tau, t_star, system.mode()) {
            checks.push(InequalityCheck::skipped(name, n, 2 * n, note));
            n += 1;
            continue;
        }
        let c = env.contraction_factor(even)?;
        let b = system.feedback_norm(2 * n + 1)?;
        let factor = variant.factor(c, b, odd);
        let before = traj.norms()[s0].powi(2);
        let after = traj.norms()[s2].powi(2);
        let ratio = if before > 0.0 { after / before } else { 0.0 };
        checks.push(InequalityCheck::evaluated(name, n, 2 * n, None, ratio, factor, opts.rtol * factor));

        if variant == CycleVariant::General {
            if let Some(series) = series {
                match (series.at(s1), series.at(s2)) {
                    (Some(f1), Some(f2)) => {
                        let rhs = (2.0 * b * odd).exp() * f1;
                        checks.push(InequalityCheck::evaluated(
                            "lyapunov_odd_interval",
                            n,
                            2 * n + 1,
                            None,
                            f2,
                            rhs,
                            opts.rtol * rhs,
                        ));
                        let rhs = factor * before;
                        checks.push(InequalityCheck::evaluated(
                            "cycle_general_lyapunov",
                            n,
                            2 * n,
                            None,
                            2.0 * f2,
                            rhs,
                            opts.rtol * rhs,
                        ));
                    }
                    _ => checks.push(InequalityCheck::skipped(
                        "lyapunov_odd_interval",
                        n,
                        2 * n + 1,
                        "Lyapunov window reaches past the schedule".into(),
                    )),
                }
            }
        }
        n += 1;
    }
    Ok(InequalityReport { checks })
}

/// All checks relevant to the system's mode.
pub fn monitor_all(
    traj: &Trajectory,
    system: &DelaySystem,
    env: &SemigroupEnvelope,
    opts: &MonitorOptions,
) -> Result<InequalityReport> {
    let mut report = check_even_contraction(traj, env, opts);
    report.extend(check_even_monotone(traj, opts));
    match system.mode() {
        FeedbackMode::Delayed => {
            let series = lyapunov_series(traj, system)?;
            report.extend(check_f_derivative(traj, &series, system, opts)?);
            report.extend(check_growth_bound(traj, system, opts)?);
            report.extend(check_cycle_bounds(traj, Some(&series), env, system, CycleVariant::General, opts)?);
            report.extend(check_cycle_bounds(traj, None, env, system, CycleVariant::SmallDelay, opts)?);
        }
        FeedbackMode::AntiDamping => {
            let series = LyapunovSeries {
                times: Vec::new(),
                f_values: Vec::new(),
                window_integrals: Vec::new(),
            };
            report.extend(check_f_derivative(traj, &series, system, opts)?);
            report.extend(check_cycle_bounds(traj, None, env, system, CycleVariant::AntiDamping, opts)?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::simulate;
    use crate::schedule::SwitchingSchedule;
    use crate::system::InnerProduct;
    use faer::{Col, Mat};

    fn scalar(a: f64, b: &[f64], mode: FeedbackMode) -> DelaySystem {
        DelaySystem::new(
            Mat::from_fn(1, 1, |_, _| -a),
            b.iter().map(|&v| Mat::from_fn(1, 1, |_, _| v)).collect(),
            mode,
            InnerProduct::identity(1),
            true,
        )
        .unwrap()
    }

    fn demo(h: f64) -> (DelaySystem, Trajectory) {
        let s = SwitchingSchedule::new(vec![0.0, 2.0, 3.0, 5.0], 1.0, 5.0, false).unwrap();
        let sys = scalar(1.0, &[0.5], FeedbackMode::Delayed);
        let tr = simulate(&sys, &s, Col::from_fn(1, |_| 1.0).as_ref(), h, 5.0, History::Unreachable).unwrap();
        (sys, tr)
    }

    /// Closed-form demo solution.
    fn demo_exact(t: f64) -> f64 {
        let e = std::f64::consts::E;
        if t < 2.0 {
            (-t).exp()
        } else if t < 3.0 {
            (-t).exp() * (1.0 + 0.5 * e * (t - 2.0))
        } else {
            (-t).exp() * (1.0 + 0.5 * e)
        }
    }

    #[test]
    fn zero_feedback_gives_half_norm_squared() {
        let s = SwitchingSchedule::periodic(2.0, 1.0, 1.0, 2).unwrap();
        let sys = scalar(1.0, &[0.0], FeedbackMode::Delayed);
        let tr = simulate(&sys, &s, Col::from_fn(1, |_| 2.0).as_ref(), 0.01, 6.0, History::Unreachable).unwrap();
        let series = lyapunov_series(&tr, &sys).unwrap();
        for k in 0..tr.len() {
            assert_eq!(series.at(k).unwrap(), 0.5 * tr.norms()[k].powi(2));
        }
    }

    #[test]
    fn constant_state_window_closed_form() {
        // A = 0, constant history and state: F = |u|^2 (1 + B tau) / 2 when
        // the whole window sees |B| = B.
        let sys = DelaySystem::new(
            Mat::zeros(1, 1),
            vec![Mat::zeros(1, 1)],
            FeedbackMode::Delayed,
            InnerProduct::identity(1),
            true,
        )
        .unwrap();
        // dynamics without feedback, window weighted with |B| = 0.3
        let sys_b = DelaySystem::new(
            Mat::zeros(1, 1),
            vec![Mat::from_fn(1, 1, |_, _| 0.3)],
            FeedbackMode::Delayed,
            InnerProduct::identity(1),
            true,
        )
        .unwrap();
        let s = SwitchingSchedule::new(vec![0.0, 1.0, 4.0, 6.0], 1.0, 6.0, false).unwrap();
        let tr = simulate(&sys, &s, Col::from_fn(1, |_| 2.0).as_ref(), 0.1, 6.0, History::Unreachable).unwrap();
        let series = lyapunov_series(&tr, &sys_b).unwrap();
        // t = 2: window [1, 2], s + tau in [2, 3] inside I_1 = [1, 4)
        let f = series.at(20).unwrap();
        let expected = 0.5 * 4.0 * (1.0 + 0.3 * 1.0);
        assert!((f - expected).abs() < 1e-12, "{f} vs {expected}");
        assert!(series.at(59).is_none());
    }

    #[test]
    fn demo_series_matches_refined_quadrature() {
        let (sys, tr) = demo(1e-3);
        let series = lyapunov_series(&tr, &sys).unwrap();
        for &t in &[1.5, 2.0, 2.5, 3.0, 3.7] {
            let k = tr.node(t).unwrap();
            // oracle: trapezoid on 10x finer grid of the closed form, B(s+1) = 0.5 on [1, 2)
            let (lo, hi) = ((t - 1.0).max(1.0), t.min(2.0));
            let mut w = 0.0;
            if hi > lo {
                let n = ((hi - lo) / 1e-4).round() as usize;
                let dh = (hi - lo) / n as f64;
                for i in 0..n {
                    let (a, b) = (lo + i as f64 * dh, lo + (i + 1) as f64 * dh);
                    w += 0.5 * dh * (demo_exact(a).powi(2) + demo_exact(b).powi(2));
                }
            }
            let oracle = 0.5 * demo_exact(t).powi(2) + 0.5 * 0.5 * w;
            let got = series.at(k).unwrap();
            assert!((got - oracle).abs() < 1e-6 * oracle, "t={t}: {got} vs {oracle}");
            assert!(got >= 0.5 * tr.norms()[k].powi(2));
        }
    }

    #[test]
    fn window_underflow_without_history() {
        let s = SwitchingSchedule::new(vec![0.0, 0.5, 1.5, 3.0], 1.0, 3.0, false).unwrap();
        let sys = scalar(1.0, &[0.5], FeedbackMode::Delayed);
        let tr = simulate(&sys, &s, Col::from_fn(1, |_| 1.0).as_ref(), 0.1, 3.0, History::Constant).unwrap();
        assert!(lyapunov_series(&tr, &sys).is_ok());
        // anti-damping runs never read the past, so they carry no history
        let ad = scalar(1.0, &[0.5], FeedbackMode::AntiDamping);
        let tr2 = simulate(&ad, &s, Col::from_fn(1, |_| 1.0).as_ref(), 0.1, 3.0, History::Unreachable).unwrap();
        assert!(matches!(lyapunov_series(&tr2, &sys), Err(Error::WindowUnderflow(_))));
    }

    #[test]
    fn even_contraction_equality_case() {
        let (_, tr) = demo(1e-3);
        let env = SemigroupEnvelope::pinned(1.0, 1.0).unwrap();
        let report = check_even_contraction(&tr, &env, &MonitorOptions::default());
        let first = &report.checks[0];
        assert!(first.pass);
        assert!((first.lhs.unwrap() - first.rhs.unwrap()).abs() < 1e-14);
        assert!(report.all_pass());
        let optimistic = SemigroupEnvelope::pinned(1.0, 2.0).unwrap();
        let report = check_even_contraction(&tr, &optimistic, &MonitorOptions::default());
        assert!(report.failures().count() >= 1);
    }

    #[test]
    fn demo_derivative_and_growth_checks_pass() {
        let (sys, tr) = demo(1e-3);
        let opts = MonitorOptions::default();
        let series = lyapunov_series(&tr, &sys).unwrap();
        let r = check_f_derivative(&tr, &series, &sys, &opts).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert!(r.checks[0].applicable && r.checks[0].pass, "{:?}", r.checks[0]);
        let g = check_growth_bound(&tr, &sys, &opts).unwrap();
        assert!(g.checks[0].applicable && g.checks[0].pass);
    }

    #[test]
    fn growth_bound_gated_by_odd_length() {
        let s = SwitchingSchedule::new(vec![0.0, 2.0, 4.0, 6.0], 1.0, 6.0, false).unwrap();
        let sys = scalar(1.0, &[0.5], FeedbackMode::Delayed);
        let tr = simulate(&sys, &s, Col::from_fn(1, |_| 1.0).as_ref(), 0.01, 6.0, History::Unreachable).unwrap();
        let g = check_growth_bound(&tr, &sys, &MonitorOptions::default()).unwrap();
        assert!(!g.checks[0].applicable && g.checks[0].pass && g.checks[0].lhs.is_none());
    }

    #[test]
    fn demo_cycle_bounds_pass() {
        let (sys, tr) = demo(1e-3);
        let env = SemigroupEnvelope::pinned(1.0, 1.0).unwrap();
        let series = lyapunov_series(&tr, &sys).unwrap();
        let opts = MonitorOptions::default();
        for v in [CycleVariant::General, CycleVariant::SmallDelay] {
            let r = check_cycle_bounds(&tr, Some(&series), &env, &sys, v, &opts).unwrap();
            assert!(r.checks.iter().all(|c| c.applicable && c.pass), "{r:?}");
        }
        let ad = check_cycle_bounds(&tr, None, &env, &sys, CycleVariant::AntiDamping, &opts).unwrap();
        assert!(ad.checks.iter().all(|c| !c.applicable));
    }

    #[test]
    fn zero_feedback_cycle_equals_contraction() {
        let s = SwitchingSchedule::periodic(2.0, 1.0, 1.0, 3).unwrap();
        let sys = scalar(1.0, &[0.0], FeedbackMode::Delayed);
        let tr = simulate(&sys, &s, Col::from_fn(1, |_| 1.0).as_ref(), 0.01, 9.0, History::Unreachable).unwrap();
        let env = SemigroupEnvelope::pinned(1.0, 1.0).unwrap();
        let r = check_cycle_bounds(&tr, None, &env, &sys, CycleVariant::General, &MonitorOptions::default()).unwrap();
        for c in &r.checks {
            assert!((c.rhs.unwrap() - (-4.0f64).exp()).abs() < 1e-15);
            assert!(c.pass);
        }
    }

    #[test]
    fn antidamping_cycles_and_growth() {
        let s = SwitchingSchedule::periodic(2.0, 1.0, 1.0, 4).unwrap();
        let sys = scalar(1.0, &[0.5], FeedbackMode::AntiDamping);
        let tr = simulate(&sys, &s, Col::from_fn(1, |_| 1.0).as_ref(), 0.01, 12.0, History::Unreachable).unwrap();
        let env = SemigroupEnvelope::pinned(1.0, 1.0).unwrap();
        let report = monitor_all(&tr, &sys, &env, &MonitorOptions::default()).unwrap();
        assert!(report.all_pass(), "{report:?}");
        for c in report.named("cycle_anti_damping") {
            assert!((c.lhs.unwrap() - (-5.0f64).exp()).abs() < 1e-14);
            assert!((c.rhs.unwrap() - (-3.0f64).exp()).abs() < 1e-15);
        }
        assert_eq!(report.named("antidamping_growth").count(), 4);
    }

    #[test]
    fn json_is_an_array() {
        let (sys, tr) = demo(1e-2);
        let env = SemigroupEnvelope::pinned(1.0, 1.0).unwrap();
        let report = monitor_all(&tr, &sys, &env, &MonitorOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let arr = v.as_array().unwrap();
        assert!(!arr.is_empty());
        for key in ["name", "n", "lhs", "rhs", "slack", "pass", "applicable"] {
            assert!(arr[0].get(key).is_some(), "{key}");
        }
    }
}
