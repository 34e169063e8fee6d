//! Method-of-steps integration on a uniform grid aligned with the delay
//! and the switch times.
//!
//! Delayed mode uses the exponential trapezoid rule
//!
//! ```text
//! U_{k+1} = E (U_k + h/2 f_k) + h/2 f_{k+1},   E = exp(hA),
//! ```
//!
//! where `f_j = B_n U_{j-m}`, `m = tau / h` and `B_n` is the operator of
//! the interval containing `t_k`. Both delayed arguments are already known,
//! so no implicit solve is needed. In anti-damping mode the forcing
//! `B_n U(t)` is folded into the propagator `exp(h (A + B_n))`, which is
//! exact for piecewise-constant operators.

use std::collections::HashMap;
use std::io::Write;

use faer::{Col, ColRef, Mat};

use crate::error::{Error, Result};
use crate::linalg;
use crate::schedule::{IntervalKind, SwitchingSchedule};
use crate::system::{DelaySystem, FeedbackMode};

/// Relative tolerance for deciding that `x / h` is an integer.
const ALIGN_RTOL: f64 = 1e-9;
/// Largest number of steps per delay tried by [`align_step`].
const MAX_STEPS_PER_DELAY: u64 = 10_000_000;

/// Values of `U` on `[-tau, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum History {
    /// No pre-history. Valid when the first delay-free interval is at
    /// least `tau` long, so feedback never reads negative times.
    Unreachable,
    /// `U(s) = U0` for `s < 0`.
    Constant,
    /// Values at the nodes `-tau + j h`, `j = 0 .. tau/h - 1`.
    Table(Vec<Col<f64>>),
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    step: f64,
    delay_steps: usize,
    times: Vec<f64>,
    states: Vec<Col<f64>>,
    norms: Vec<f64>,
    intervals: Vec<usize>,
    schedule: SwitchingSchedule,
    history: History,
}

/// Integer ratio `x / h` if it is one within `ALIGN_RTOL`.
fn grid_ratio(x: f64, h: f64) -> Option<u64> {
    let r = x / h;
    let n = r.round();
    ((r - n).abs() <= ALIGN_RTOL * n.max(1.0)).then_some(n as u64)
}

fn aligned(h: f64, what: &str, x: f64) -> Result<u64> {
    grid_ratio(x, h).ok_or_else(|| Error::StepNotAligned {
        h,
        what: what.to_string(),
        ratio: x / h,
    })
}

/// Largest step `h <= requested` such that `tau`, `t_end` and every switch
/// time up to `t_end` are integer multiples of `h`.
pub fn align_step(requested: f64, schedule: &SwitchingSchedule, t_end: f64) -> Result<f64> {
    let tau = schedule.delay();
    if !(requested > 0.0) {
        return Err(Error::StepNotAligned {
            h: requested,
            what: "tau".into(),
            ratio: f64::NAN,
        });
    }
    let targets: Vec<f64> = schedule
        .switch_times()
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t <= t_end)
        .chain(std::iter::once(t_end))
        .collect();
    let first = ((tau / requested) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    for n in first..first.saturating_add(MAX_STEPS_PER_DELAY) {
        let h = tau / n as f64;
        if targets.iter().all(|&t| grid_ratio(t, h).is_some()) {
            return Ok(h);
        }
    }
    Err(Error::StepNotAligned {
        h: requested,
        what: "switch times".into(),
        ratio: f64::NAN,
    })
}

fn add_scaled(y: &mut Col<f64>, s: f64, x: ColRef<'_, f64>) {
    for i in 0..y.nrows() {
        y[i] += s * x[i];
    }
}

/// Integrates from `U(0) = u0` to `t_end` with step `h`.
pub fn simulate(
    system: &DelaySystem,
    schedule: &SwitchingSchedule,
    u0: ColRef<'_, f64>,
    h: f64,
    t_end: f64,
    history: History,
) -> Result<Trajectory> {
    let d = system.dim();
    if u0.nrows() != d {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, system dimension is {d}",
            u0.nrows()
        )));
    }
    if t_end > schedule.horizon() * (1.0 + 1e-12) {
        return Err(Error::HorizonExceeded {
            t_end,
            horizon: schedule.horizon(),
        });
    }
    if !(h > 0.0) {
        return Err(Error::StepNotAligned {
            h,
            what: "tau".into(),
            ratio: f64::NAN,
        });
    }
    let m = aligned(h, "tau", schedule.delay())? as usize;
    let n_steps = aligned(h, "t_end", t_end)? as usize;
    if m == 0 {
        return Err(Error::StepNotAligned {
            h,
            what: "tau".into(),
            ratio: schedule.delay() / h,
        });
    }
    if let History::Table(values) = &history {
        if values.len() != m {
            return Err(Error::HistoryLength {
                got: values.len(),
                expected: m,
            });
        }
        if values.iter().any(|v| v.nrows() != d) {
            return Err(Error::DimensionMismatch("history entry has wrong length".into()));
        }
    }

    // node index of every switch time inside the run
    let mut switch_nodes = Vec::new();
    for (n, &t) in schedule.switch_times().iter().enumerate() {
        if t > t_end {
            break;
        }
        if n > 0 {
            switch_nodes.push(aligned(h, &format!("t_{n}"), t)? as usize);
        }
    }
    let mut intervals = Vec::with_capacity(n_steps + 1);
    let mut current = 0usize;
    for k in 0..=n_steps {
        while current < switch_nodes.len() && switch_nodes[current] <= k {
            current += 1;
        }
        intervals.push(current);
    }

    let a = system.generator();
    let e = linalg::expm(linalg::scaled(a, h).as_ref());
    let mut antidamping: HashMap<usize, Mat<f64>> = HashMap::new();

    let mut states: Vec<Col<f64>> = Vec::with_capacity(n_steps + 1);
    states.push(u0.to_owned());
    for k in 0..n_steps {
        let n = intervals[k];
        let next = match (system.mode(), system.feedback_index(n)?) {
            (_, None) => &e * &states[k],
            (FeedbackMode::AntiDamping, Some(idx)) => {
                let prop = antidamping.entry(idx).or_insert_with(|| {
                    let sum = Mat::from_fn(d, d, |i, j| a[(i, j)] + system.feedback_ops()[idx][(i, j)]);
                    linalg::expm(linalg::scaled(sum.as_ref(), h).as_ref())
                });
                &*prop * &states[k]
            }
            (FeedbackMode::Delayed, Some(idx)) => {
                let b = &system.feedback_ops()[idx];
                let f0 = {
                    let past = past_state(&states, &history, u0, k as isize - m as isize, h)?;
                    b * past
                };
                let f1 = {
                    let past = past_state(&states, &history, u0, k as isize + 1 - m as isize, h)?;
                    b * past
                };
                let mut w = states[k].clone();
                add_scaled(&mut w, 0.5 * h, f0.as_ref());
                let mut next = &e * &w;
                add_scaled(&mut next, 0.5 * h, f1.as_ref());
                next
            }
        };
        states.push(next);
    }

    let g = system.inner_product();
    let norms = states.iter().map(|u| g.norm(u.as_ref())).collect();
    let times = (0..=n_steps).map(|k| k as f64 * h).collect();
    Ok(Trajectory {
        step: h,
        delay_steps: m,
        times,
        states,
        norms,
        intervals,
        schedule: schedule.clone(),
        history,
    })
}

fn past_state<'a>(
    states: &'a [Col<f64>],
    history: &'a History,
    u0: ColRef<'a, f64>,
    j: isize,
    h: f64,
) -> Result<ColRef<'a, f64>> {
    if j >= 0 {
        return Ok(states[j as usize].as_ref());
    }
    match history {
        History::Unreachable => Err(Error::MissingHistory(j as f64 * h)),
        History::Constant => Ok(u0),
        History::Table(values) => Ok(values[values.len() - (-j) as usize].as_ref()),
    }
}

impl Trajectory {
    pub fn step(&self) -> f64 {
        self.step
    }

    /// `tau / h`.
    pub fn delay_steps(&self) -> usize {
        self.delay_steps
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Col<f64>] {
        &self.states
    }

    /// `|U(t_k)|_G` per node.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Interval index of each node.
    pub fn intervals(&self) -> &[usize] {
        &self.intervals
    }

    pub fn schedule(&self) -> &SwitchingSchedule {
        &self.schedule
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Grid index of time `t`, which must be a node.
    pub fn node(&self, t: f64) -> Result<usize> {
        let k = aligned(self.step, "t", t)? as usize;
        if k >= self.states.len() {
            return Err(Error::TimeOutOfRange { t, horizon: self.t_end() });
        }
        Ok(k)
    }

    /// Node index of switch time `t_n`, if it lies within the run.
    pub fn switch_node(&self, n: usize) -> Option<usize> {
        let t = self.schedule.start(n)?;
        grid_ratio(t, self.step)
            .map(|k| k as usize)
            .filter(|&k| k < self.states.len())
    }

    /// `U(t - tau)` for a node `t`. Before `t = 0` the history is used;
    /// without one, `U0` is returned by convention (such values are never
    /// consumed by the integrator).
    pub fn delayed_lookup(&self, t: f64) -> Result<Col<f64>> {
        let k = aligned(self.step, "t", t.max(0.0))? as isize;
        if t < -ALIGN_RTOL * self.step {
            return Err(Error::LookupBeforeHistory(t - self.schedule.delay()));
        }
        if k as usize >= self.states.len() {
            return Err(Error::TimeOutOfRange { t, horizon: self.t_end() });
        }
        let j = k - self.delay_steps as isize;
        if j >= 0 {
            return Ok(self.states[j as usize].clone());
        }
        Ok(match &self.history {
            History::Unreachable | History::Constant => self.states[0].clone(),
            History::Table(values) => values[values.len() - (-j) as usize].clone(),
        })
    }

    /// Writes `t, interval_index, kind, norm[, state_0 ..]` rows.
    pub fn write_csv<W: Write>(&self, mut out: W, emit_states: bool) -> std::io::Result<()> {
        write!(out, "t,interval_index,kind,norm")?;
        if emit_states {
            for i in 0..self.states[0].nrows() {
                write!(out, ",state_{i}")?;
            }
        }
        writeln!(out)?;
        for k in 0..self.states.len() {
            let n = self.intervals[k];
            write!(
                out,
                "{:.16e},{},{},{:.16e}",
                self.times[k],
                n,
                IntervalKind::of_index(n).as_str(),
                self.norms[k]
            )?;
            if emit_states {
                let u = &self.states[k];
                for i in 0..u.nrows() {
                    write!(out, ",{:.16e}", u[i])?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
