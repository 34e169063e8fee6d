//! Switching schedules: the partition of time into feedback-free (even)
//! and feedback-active (odd) intervals.
//!
//! Intervals are half-open, `[t_n, t_{n+1})`, so a switch instant belongs
//! to the interval it opens. Past the last listed switch time the schedule
//! continues with one unbounded trailing interval whose parity follows the
//! count of listed intervals.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance used to decide that interval lengths are equal.
pub const PERIODICITY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    DelayFree,
    FeedbackActive,
}

impl IntervalKind {
    pub fn of_index(n: usize) -> Self {
        if n % 2 == 0 {
            IntervalKind::DelayFree
        } else {
            IntervalKind::FeedbackActive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IntervalKind::DelayFree => "delay_free",
            IntervalKind::FeedbackActive => "feedback_active",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPosition {
    pub index: usize,
    pub kind: IntervalKind,
    pub offset: f64,
}

/// Period `(T0, T_tilde)` of a schedule declared periodic at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicPattern {
    pub even_length: f64,
    pub odd_length: f64,
}

impl PeriodicPattern {
    pub fn period(&self) -> f64 {
        self.even_length + self.odd_length
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSchedule {
    switch_times: Vec<f64>,
    delay: f64,
    horizon: f64,
    pattern: Option<PeriodicPattern>,
}

impl SwitchingSchedule {
    /// Builds a schedule from explicit switch times.
    ///
    /// With `extend_periodically`, the listed interval lengths are cycled
    /// until the switch times cover `horizon + delay`; the listed pattern
    /// must then contain an even number of intervals so that parities are
    /// preserved.
    pub fn new(
        switch_times: Vec<f64>,
        delay: f64,
        horizon: f64,
        extend_periodically: bool,
    ) -> Result<Self> {
        let first = *switch_times.first().ok_or(Error::EmptySchedule)?;
        if first != 0.0 {
            return Err(Error::FirstTimeNotZero(first));
        }
        for (index, w) in switch_times.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::NonIncreasingTimes {
                    index: index + 1,
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        if !(delay > 0.0) || !delay.is_finite() {
            return Err(Error::NonPositiveDelay(delay));
        }
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::TimeOutOfRange { t: horizon, horizon });
        }

        let last = *switch_times.last().unwrap();
        let mut times = switch_times;
        if horizon > last {
            if !extend_periodically {
                return Err(Error::HorizonBeyondSchedule { horizon, last });
            }
            let lengths: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
            if lengths.is_empty() || lengths.len() % 2 != 0 {
                return Err(Error::OddCyclePattern(lengths.len()));
            }
            let mut t = last;
            'outer: loop {
                for len in &lengths {
                    t += len;
                    times.push(t);
                }
                if t >= horizon + delay {
                    break 'outer;
                }
            }
        }
        let mut schedule = SwitchingSchedule {
            switch_times: times,
            delay,
            horizon,
            pattern: None,
        };
        if extend_periodically {
            let report = schedule.validate_hypotheses(0.0);
            if let (Some(e), Some(o)) = (report.periodic_even, report.periodic_odd) {
                schedule.pattern = Some(PeriodicPattern {
                    even_length: e,
                    odd_length: o,
                });
            }
        }
        Ok(schedule)
    }

    /// Periodic on–off schedule with `T_{2n} = even_length`,
    /// `T_{2n+1} = odd_length` covering `n_cycles` full cycles. One extra
    /// cycle is listed so that lookups up to `horizon + delay` stay inside
    /// the listed intervals.
    pub fn periodic(even_length: f64, odd_length: f64, delay: f64, n_cycles: usize) -> Result<Self> {
        if !(even_length > 0.0) || !(odd_length > 0.0) {
            return Err(Error::NonIncreasingTimes {
                index: 1,
                prev: 0.0,
                next: even_length.min(odd_length),
            });
        }
        let period = even_length + odd_length;
        let horizon = n_cycles as f64 * period;
        let extra = ((delay / period).ceil() as usize).max(1);
        let mut times = Vec::with_capacity(2 * (n_cycles + extra) + 1);
        for k in 0..(n_cycles + extra) {
            let start = k as f64 * period;
            times.push(start);
            times.push(start + even_length);
        }
        times.push((n_cycles + extra) as f64 * period);
        let mut schedule = SwitchingSchedule::new(times, delay, horizon, false)?;
        schedule.pattern = Some(PeriodicPattern {
            even_length,
            odd_length,
        });
        Ok(schedule)
    }

    pub fn switch_times(&self) -> &[f64] {
        &self.switch_times
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn pattern(&self) -> Option<PeriodicPattern> {
        self.pattern
    }

    /// Number of listed (bounded) intervals.
    pub fn n_intervals(&self) -> usize {
        self.switch_times.len() - 1
    }

    /// Interval lengths `T_n` of the listed intervals.
    pub fn lengths(&self) -> Vec<f64> {
        self.switch_times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn length(&self, n: usize) -> Option<f64> {
        (n + 1 < self.switch_times.len()).then(|| self.switch_times[n + 1] - self.switch_times[n])
    }

    /// Start time `t_n`; `None` past the listed switch times.
    pub fn start(&self, n: usize) -> Option<f64> {
        self.switch_times.get(n).copied()
    }

    /// Number of complete (even, odd) cycles that end at or before `t`.
    pub fn complete_cycles_before(&self, t: f64) -> usize {
        let mut n = 0;
        while let Some(end) = self.start(2 * n + 2) {
            if end > t {
                break;
            }
            n += 1;
        }
        n
    }

    /// Locates `t` in `[t_n, t_{n+1})`; requires `0 <= t <= horizon`.
    pub fn interval_at(&self, t: f64) -> Result<IntervalPosition> {
        if !(t >= 0.0) || t > self.horizon {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.locate(t))
    }

    /// As [`interval_at`](Self::interval_at) without the horizon check;
    /// times past the last switch map to the trailing unbounded interval.
    pub(crate) fn locate(&self, t: f64) -> IntervalPosition {
        // index of the last switch time <= t
        let index = match self
            .switch_times
            .binary_search_by(|s| s.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        IntervalPosition {
            index,
            kind: IntervalKind::of_index(index),
            offset: t - self.switch_times[index],
        }
    }

    pub fn validate_hypotheses(&self, t_star: f64) -> HypothesisReport {
        let lengths = self.lengths();
        let even: Vec<f64> = lengths.iter().step_by(2).copied().collect();
        let odd: Vec<f64> = lengths.iter().skip(1).step_by(2).copied().collect();
        HypothesisReport {
            delay: self.delay,
            t_star,
            lengths: lengths.clone(),
            even_geq_tau: even.iter().map(|&t| t >= self.delay).collect(),
            even_gt_tstar: even.iter().map(|&t| t > t_star).collect(),
            odd_leq_tau: odd.iter().map(|&t| t <= self.delay).collect(),
            periodic_even: common_value(&even),
            periodic_odd: common_value(&odd),
        }
    }
}

fn common_value(values: &[f64]) -> Option<f64> {
    let first = *values.first()?;
    values
        .iter()
        .all(|&v| (v - first).abs() <= PERIODICITY_RTOL * first.abs().max(v.abs()))
        .then_some(first)
}

/// Per-interval evaluation of the structural conditions on the schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub delay: f64,
    pub t_star: f64,
    pub lengths: Vec<f64>,
    /// `T_{2n} >= tau`
    pub even_geq_tau: Vec<bool>,
    /// `T_{2n} > T*`
    pub even_gt_tstar: Vec<bool>,
    /// `T_{2n+1} <= tau`
    pub odd_leq_tau: Vec<bool>,
    pub periodic_even: Option<f64>,
    pub periodic_odd: Option<f64>,
}

impl HypothesisReport {
    pub fn all_even_geq_tau(&self) -> bool {
        self.even_geq_tau.iter().all(|&b| b)
    }

    pub fn all_even_gt_tstar(&self) -> bool {
        self.even_gt_tstar.iter().all(|&b| b)
    }

    pub fn all_odd_leq_tau(&self) -> bool {
        self.odd_leq_tau.iter().all(|&b| b)
    }
}
