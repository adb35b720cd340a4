//! Direct integration of the memory-kernel equation of motion
//!
//! ```text
//! (1/σ) x'' + x' = r ∫_{-∞}^{t} sin(x(t) − x(s)) e^{−(t−s)} ds + A sin(B x)
//! ```
//!
//! keeping the full sampled path. This is an independent check on the ODE
//! formulation, not a production integrator.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, TimeSeries};
use crate::model::{potential_sin, Params, State4};

pub const DEFAULT_KERNEL_CUTOFF: f64 = 1e-12;
pub const MAX_KERNEL_DT: f64 = 0.01;

/// Path before the first recorded sample, integrated in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreHistory {
    /// Nothing before the first sample.
    Empty,
    /// At rest at `x` forever.
    Rest { x: f64 },
    /// Moving in a straight line at speed `u`, reaching `x` at the first sample time.
    Walking { x: f64, u: f64 },
}

/// Rebase the kernel weights once they exceed `e^{REBASE_SPAN}`.
const REBASE_SPAN: f64 = 64.0;

/// Sampled past positions within a truncation horizon.
///
/// Each sample stores `w cos x` and `w sin x` with `w = e^{t − anchor}`, so
/// `sin(x_now − x)` expands by angle addition and a force evaluation is a
/// plain weighted sum.
#[derive(Debug, Clone)]
pub struct MemoryHistory {
    times: VecDeque<f64>,
    weighted: VecDeque<(f64, f64)>,
    anchor: f64,
    horizon: f64,
    pre: PreHistory,
    truncated: bool,
}

impl MemoryHistory {
    /// Empty history whose oldest kernel weight stays above `cutoff`.
    pub fn new(cutoff: f64, pre: PreHistory) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff < 1.0) {
            return Err(Error::InvalidArgument("kernel cutoff must be in (0, 1)".into()));
        }
        Ok(MemoryHistory {
            times: VecDeque::new(),
            weighted: VecDeque::new(),
            anchor: 0.0,
            horizon: -cutoff.ln(),
            pre,
            truncated: false,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Append a sample; samples older than the horizon are dropped.
    pub fn push(&mut self, t: f64, x: f64) -> Result<()> {
        if let Some(&last) = self.times.back() {
            if !(t > last) {
                return Err(Error::InvalidArgument("history times must increase".into()));
            }
        }
        if !(t.is_finite() && x.is_finite()) {
            return Err(Error::InvalidArgument("history samples must be finite".into()));
        }
        if self.times.is_empty() || t - self.anchor > REBASE_SPAN {
            let rescale = (self.anchor - t).exp();
            for (c, s) in self.weighted.iter_mut() {
                *c *= rescale;
                *s *= rescale;
            }
            self.anchor = t;
        }
        let w = (t - self.anchor).exp();
        self.times.push_back(t);
        self.weighted.push_back((w * x.cos(), w * x.sin()));
        while self.times.len() > 1 && t - self.times[1] >= self.horizon {
            self.times.pop_front();
            self.weighted.pop_front();
            self.truncated = true;
        }
        Ok(())
    }

    /// History spanning `[t_now − span, t_now]` sampled every `dt` from a path function.
    pub fn from_path(
        path: impl Fn(f64) -> f64,
        t_now: f64,
        span: f64,
        dt: f64,
        cutoff: f64,
    ) -> Result<Self> {
        let mut h = MemoryHistory::new(cutoff, PreHistory::Empty)?;
        let n = (span / dt).round() as usize;
        for j in 0..=n {
            let t = t_now - (n - j) as f64 * dt;
            h.push(t, path(t))?;
        }
        Ok(h)
    }

    fn pre_history_force(&self, x_now: f64, t_now: f64) -> f64 {
        // Once samples have been dropped the pre-history lies beyond the horizon.
        if self.truncated {
            return 0.0;
        }
        let age = t_now - self.times[0];
        match self.pre {
            PreHistory::Empty => 0.0,
            PreHistory::Rest { x } => (x_now - x).sin() * (-age).exp(),
            PreHistory::Walking { x, u } => {
                let phase = x_now - x;
                (-age).exp() * (phase.sin() + u * phase.cos()) / (1.0 + u * u)
            }
        }
    }
}

/// `r ∫ sin(x_now − x(s)) e^{−(t−s)} ds` by the trapezoidal rule over the
/// retained samples, plus the closed-form pre-history contribution. The
/// current time is the latest sample time.
pub fn memory_force(history: &MemoryHistory, x_now: f64, p: &Params) -> Result<f64> {
    let t_now = *history.times.back().ok_or(Error::EmptyHistory)?;
    let (mut sum_c, mut sum_s) = (0.0, 0.0);
    for j in 1..history.len() {
        let h = 0.5 * (history.times[j] - history.times[j - 1]);
        let (c0, s0) = history.weighted[j - 1];
        let (c1, s1) = history.weighted[j];
        sum_c += h * (c0 + c1);
        sum_s += h * (s0 + s1);
    }
    let scale = (history.anchor - t_now).exp();
    let mut integral = scale * (x_now.sin() * sum_c - x_now.cos() * sum_s);
    integral += history.pre_history_force(x_now, t_now);
    Ok(p.r() * integral)
}

/// Initial condition for [`integrate_memory`]: current position and
/// velocity with a consistent pre-history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryStart {
    pub x: f64,
    pub v: f64,
    pub pre: PreHistory,
}

impl MemoryStart {
    /// Particle that has always been at rest at `x`.
    pub fn at_rest(x: f64) -> Self {
        MemoryStart {
            x,
            v: 0.0,
            pre: PreHistory::Rest { x },
        }
    }

    /// Particle that has always walked at speed `u`, now at `x`.
    pub fn walking(x: f64, u: f64) -> Self {
        MemoryStart {
            x,
            v: u,
            pre: PreHistory::Walking { x, u },
        }
    }

    /// Match an ODE-system state. Supported: rest states `(x, 0, 0, 0)` and
    /// straight-line walking states `(x, u, u·r/(1+u²), r·u²/(1+u²))`.
    pub fn from_state(s: &State4, p: &Params) -> Result<Self> {
        let u = s.vel();
        if u == 0.0 && s.y() == 0.0 && s.z() == 0.0 {
            return Ok(MemoryStart::at_rest(s.x()));
        }
        let denom = 1.0 + u * u;
        let (y, z) = (p.r() * u / denom, p.r() * u * u / denom);
        let tol = 1e-9 * (1.0 + p.r());
        if (s.y() - y).abs() <= tol && (s.z() - z).abs() <= tol {
            return Ok(MemoryStart::walking(s.x(), u));
        }
        Err(Error::InvalidArgument(
            "only rest and straight-line walking states have a matched history".into(),
        ))
    }
}

/// Fixed-step integration of the memory equation with step `dt ≤ 0.01`.
///
/// Velocity-Verlet with the memory force treated explicitly and the drag
/// implicitly. The output is sampled on `cfg.sample_times()` (each sample
/// taken at the nearest step). An exact rest start gets
/// `cfg.initial_perturbation` on the velocity.
pub fn integrate_memory(
    start: MemoryStart,
    p: &Params,
    cfg: &IntegratorConfig,
    dt: f64,
) -> Result<TimeSeries<2>> {
    cfg.validate()?;
    if !(dt > 0.0 && dt <= MAX_KERNEL_DT) {
        return Err(Error::InvalidArgument(format!(
            "kernel step must be in (0, {MAX_KERNEL_DT}], got {dt}"
        )));
    }
    if !(start.x.is_finite() && start.v.is_finite()) {
        return Err(Error::NonFiniteIntegration { t: 0.0 });
    }
    let sigma = p.sigma();
    let external = |x: f64| p.a() * potential_sin(p.b(), x);

    let mut history = MemoryHistory::new(DEFAULT_KERNEL_CUTOFF, start.pre)?;
    history.push(0.0, start.x)?;
    let mut x = start.x;
    let mut v = start.v;
    let mut force = memory_force(&history, x, p)?;
    if v == 0.0 && force == 0.0 && external(x) == 0.0 {
        v += cfg.initial_perturbation;
    }

    let sample_times = cfg.sample_times();
    let n_steps = (cfg.t_end / dt).round() as usize;
    let mut next_sample = 0;
    let mut times = Vec::with_capacity(sample_times.len());
    let mut states = Vec::with_capacity(sample_times.len());
    let mut record = |step: usize, x: f64, v: f64, next: &mut usize| {
        let t = step as f64 * dt;
        while *next < sample_times.len() && sample_times[*next] <= t + 0.5 * dt {
            times.push(sample_times[*next]);
            states.push([x, v]);
            *next += 1;
        }
    };
    record(0, x, v, &mut next_sample);

    for step in 1..=n_steps {
        let acc = sigma * (force + external(x) - v);
        let x_new = x + dt * v + 0.5 * dt * dt * acc;
        let t_new = step as f64 * dt;
        history.push(t_new, x_new)?;
        let force_new = memory_force(&history, x_new, p)?;
        let v_new = (v + 0.5 * dt * (acc + sigma * (force_new + external(x_new))))
            / (1.0 + 0.5 * sigma * dt);
        if !(x_new.is_finite() && v_new.is_finite()) {
            return Err(Error::NonFiniteIntegration { t: t_new });
        }
        x = x_new;
        v = v_new;
        force = force_new;
        record(step, x, v, &mut next_sample);
    }
    while next_sample < sample_times.len() {
        times.push(sample_times[next_sample]);
        states.push([x, v]);
        next_sample += 1;
    }
    Ok(TimeSeries { times, states })
}
