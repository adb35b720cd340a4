//! Post-processing of trajectories: behaviour classes, average speed,
//! oscillation frequency and the largest Lyapunov exponent.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{rk4_step, seeded_start, OdeSystem};
use crate::model::{FullSystem, LowMemorySystem, Params, State4};
use crate::trajectory::Trajectory;

/// Long-time behaviour of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BehaviorClass {
    Stationary,
    BackAndForth,
    Runaway,
    Irregular,
}

impl BehaviorClass {
    pub const ALL: [BehaviorClass; 4] = [
        BehaviorClass::Stationary,
        BehaviorClass::BackAndForth,
        BehaviorClass::Runaway,
        BehaviorClass::Irregular,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BehaviorClass::Stationary => "stationary",
            BehaviorClass::BackAndForth => "back-and-forth",
            BehaviorClass::Runaway => "runaway",
            BehaviorClass::Irregular => "irregular",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

impl std::fmt::Display for BehaviorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BehaviorClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BehaviorClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown behavior class '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    /// Terminal fraction of the run that is classified.
    pub window_fraction: f64,
    /// `max |X|` below this is stationary.
    pub v_stationary: f64,
    /// Runaway threshold on `|mean X|` as a fraction of `√(r−1)` (r > 1).
    pub drift_fraction: f64,
    /// Runaway threshold on `|mean X|` when `r ≤ 1`.
    pub drift_absolute: f64,
    /// Autocorrelation peak at or above this counts as periodic.
    pub periodicity_threshold: f64,
    /// LLE above this counts as chaotic.
    pub lyapunov_threshold: f64,
    pub lyapunov_t_end: f64,
    pub lyapunov_renorm_dt: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            window_fraction: 0.5,
            v_stationary: 1e-3,
            drift_fraction: 0.1,
            drift_absolute: 0.05,
            periodicity_threshold: 0.98,
            lyapunov_threshold: 0.005,
            lyapunov_t_end: 500.0,
            lyapunov_renorm_dt: 1.0,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidClassifierConfig(m.to_string()));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return bad("window_fraction must be in (0, 1]");
        }
        for (name, v) in [
            ("v_stationary", self.v_stationary),
            ("drift_fraction", self.drift_fraction),
            ("drift_absolute", self.drift_absolute),
            ("periodicity_threshold", self.periodicity_threshold),
            ("lyapunov_threshold", self.lyapunov_threshold),
            ("lyapunov_renorm_dt", self.lyapunov_renorm_dt),
        ] {
            if !pos(v) {
                return Err(Error::InvalidClassifierConfig(format!("{name} must be > 0")));
            }
        }
        if !(self.lyapunov_t_end >= MIN_LYAPUNOV_T_END) {
            return bad("lyapunov_t_end must be >= 500");
        }
        Ok(())
    }

    pub fn drift_threshold(&self, p: &Params) -> f64 {
        match p.free_speed() {
            Some(u) => self.drift_fraction * u,
            None => self.drift_absolute,
        }
    }
}

/// Periodicity of a sampled signal from its normalized autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periodicity {
    /// Highest autocorrelation beyond the first decorrelation, in `[-1, 1]`.
    pub peak: f64,
    /// Lag of that peak in samples (sub-sample refined).
    pub period_samples: f64,
}

/// Normalized (Pearson) autocorrelation at lags `0..=max_lag`.
pub fn autocorrelation(signal: &[f64], max_lag: usize) -> Vec<f64> {
    let n = signal.len();
    let max_lag = max_lag.min(n.saturating_sub(2));
    if n < 2 {
        return vec![1.0];
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let a: Vec<f64> = signal.iter().map(|v| v - mean).collect();

    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex64> = a
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    fwd.process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex64::new(z.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    let scale = 1.0 / size as f64;

    let mut sum = vec![0.0; n + 1];
    let mut sq = vec![0.0; n + 1];
    for i in 0..n {
        sum[i + 1] = sum[i] + a[i];
        sq[i + 1] = sq[i] + a[i] * a[i];
    }
    (0..=max_lag)
        .map(|lag| {
            let m = (n - lag) as f64;
            let cross = buf[lag].re * scale / m;
            let mu = sum[n - lag] / m;
            let mw = (sum[n] - sum[lag]) / m;
            let vu = sq[n - lag] / m - mu * mu;
            let vw = (sq[n] - sq[lag]) / m - mw * mw;
            if vu <= 0.0 || vw <= 0.0 {
                0.0
            } else {
                ((cross - mu * mw) / (vu * vw).sqrt()).clamp(-1.0, 1.0)
            }
        })
        .collect()
}

/// Autocorrelation peak after the first decorrelation, or `None` when the
/// signal never decorrelates within half its length.
pub fn periodicity(signal: &[f64]) -> Option<Periodicity> {
    let n = signal.len();
    if n < 8 {
        return None;
    }
    let acf = autocorrelation(signal, n / 2);
    let start = acf.iter().position(|&c| c < 0.0).or_else(|| {
        (1..acf.len() - 1).find(|&i| acf[i] < acf[i - 1] && acf[i] <= acf[i + 1])
    })?;
    let top = acf[start..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // First local maximum that comes close to the global one: multiples of
    // the period score about as high as the period itself.
    let best = (start..acf.len())
        .find(|&i| {
            acf[i] >= top - 0.01
                && (i == 0 || acf[i] >= acf[i - 1])
                && (i + 1 == acf.len() || acf[i] >= acf[i + 1])
        })
        .unwrap_or(start);
    let mut refined = Periodicity {
        peak: top,
        period_samples: best as f64,
    };
    if best + 1 < acf.len() && best > start {
        let (y0, y1, y2) = (acf[best - 1], acf[best], acf[best + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        if denom < 0.0 {
            let shift = 0.5 * (y0 - y2) / denom;
            let vertex = (y1 - 0.25 * (y0 - y2) * shift).min(1.0);
            refined.peak = refined.peak.max(vertex);
            refined.period_samples = best as f64 + shift;
        }
    }
    Some(refined)
}

/// `|mean X|` over the terminal `window_fraction` of the run.
pub fn average_speed<const N: usize>(traj: &Trajectory<N>, window_fraction: f64) -> f64 {
    let w0 = traj.window_start(window_fraction);
    let v: Vec<f64> = traj.velocities().skip(w0).collect();
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().sum::<f64>() / v.len() as f64).abs()
}

/// Angular frequency from successive upward zero crossings of the
/// mean-removed velocity in the terminal window.
pub fn oscillation_frequency<const N: usize>(traj: &Trajectory<N>, window_fraction: f64) -> Result<f64> {
    let w0 = traj.window_start(window_fraction);
    let t = &traj.times()[w0..];
    let v: Vec<f64> = traj.velocities().skip(w0).collect();
    if v.len() < 2 {
        return Err(Error::NotOscillatory { crossings: 0 });
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let mut crossings = 0;
    let mut upward = Vec::new();
    for i in 0..v.len() - 1 {
        let (a, b) = (v[i] - mean, v[i + 1] - mean);
        if (a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0) {
            crossings += 1;
            if a < 0.0 {
                upward.push(t[i] + (t[i + 1] - t[i]) * (-a) / (b - a));
            }
        }
    }
    if crossings < 4 || upward.len() < 2 {
        return Err(Error::NotOscillatory { crossings });
    }
    let period = (upward[upward.len() - 1] - upward[0]) / (upward.len() - 1) as f64;
    Ok(2.0 * PI / period)
}

/// A system that can be rebuilt from [`Params`]; used for Lyapunov probes.
pub trait Dynamics<const N: usize>: OdeSystem<N> + Sized {
    fn from_params(p: &Params) -> Self;
}

impl Dynamics<4> for FullSystem {
    fn from_params(p: &Params) -> Self {
        FullSystem(*p)
    }
}

impl Dynamics<2> for LowMemorySystem {
    fn from_params(p: &Params) -> Self {
        LowMemorySystem(*p)
    }
}

pub const MIN_LYAPUNOV_T_END: f64 = 500.0;
pub const LYAPUNOV_SEPARATION: f64 = 1e-8;

/// Two-trajectory Benettin estimate of the largest Lyapunov exponent.
///
/// Both copies advance with the same fixed-step RK4 scheme; the separation is
/// rescaled to [`LYAPUNOV_SEPARATION`] every `renorm_dt` and the first 10% of
/// the run is discarded as transient. An exact fixed-point start is seeded the
/// same way as [`crate::integrator::integrate`], otherwise the reference copy
/// would sit on the equilibrium and the estimate would be its local growth
/// rate.
pub fn lyapunov_estimate_system<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    s0: [f64; N],
    t_end: f64,
    renorm_dt: f64,
    dt: f64,
) -> Result<f64> {
    if !(t_end >= MIN_LYAPUNOV_T_END) {
        return Err(Error::InvalidArgument(format!(
            "Lyapunov estimate needs t_end >= {MIN_LYAPUNOV_T_END}, got {t_end}"
        )));
    }
    if !(renorm_dt > 0.0 && dt > 0.0 && dt <= renorm_dt) {
        return Err(Error::InvalidArgument("need 0 < dt <= renorm_dt".into()));
    }
    let d0 = LYAPUNOV_SEPARATION;
    let dir = 1.0 / (N as f64).sqrt();
    let mut a = seeded_start(sys, s0, crate::integrator::IntegratorConfig::default().initial_perturbation);
    let mut b: [f64; N] = std::array::from_fn(|i| s0[i] + d0 * dir);
    let steps_per = (renorm_dt / dt).round().max(1.0) as usize;
    let h = renorm_dt / steps_per as f64;
    let intervals = (t_end / renorm_dt).round() as usize;
    let skip = intervals / 10;
    let mut log_sum = 0.0;
    for interval in 0..intervals {
        for _ in 0..steps_per {
            a = rk4_step(sys, &a, h);
            b = rk4_step(sys, &b, h);
        }
        let d = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (y - x).powi(2))
            .sum::<f64>()
            .sqrt();
        if !d.is_finite() || !a.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteIntegration {
                t: (interval + 1) as f64 * renorm_dt,
            });
        }
        if d == 0.0 {
            b = std::array::from_fn(|i| a[i] + d0 * dir);
            continue;
        }
        if interval >= skip {
            log_sum += (d / d0).ln();
        }
        b = std::array::from_fn(|i| a[i] + (b[i] - a[i]) * d0 / d);
    }
    Ok(log_sum / ((intervals - skip) as f64 * renorm_dt))
}

/// RK4 step used by Lyapunov probes for a given mass parameter.
pub fn lyapunov_step(p: &Params) -> f64 {
    (0.5 / (p.sigma() + 1.0)).min(0.01)
}

/// Largest Lyapunov exponent of the full system from `s0`.
pub fn lyapunov_estimate(p: &Params, s0: State4, t_end: f64, renorm_dt: f64) -> Result<f64> {
    lyapunov_estimate_system(&FullSystem(*p), s0.to_array(), t_end, renorm_dt, lyapunov_step(p))
}

/// Classification outcome with the observables the decision used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: BehaviorClass,
    pub mean_velocity: f64,
    pub average_speed: f64,
    pub max_speed: f64,
    pub periodicity: Option<Periodicity>,
    pub lle: Option<f64>,
}

fn too_short(msg: String) -> Error {
    Error::TrajectoryTooShort(msg)
}

/// Run the decision procedure on the terminal window of `traj`.
pub fn classify_detailed<S: Dynamics<N>, const N: usize>(
    traj: &Trajectory<N>,
    cfg: &ClassifierConfig,
) -> Result<Classification> {
    cfg.validate()?;
    let p = *traj.params();
    let w0 = traj.window_start(cfg.window_fraction);
    let times = &traj.times()[w0..];
    let vel: Vec<f64> = traj.velocities().skip(w0).collect();
    if vel.len() < 16 {
        return Err(too_short(format!("{} samples in window (need 16)", vel.len())));
    }
    let span = traj.t_end() - traj.times()[0];
    let duration = times[times.len() - 1] - times[0];
    let dt = duration / (times.len() - 1) as f64;

    let max_speed = vel.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mean_velocity = vel.iter().sum::<f64>() / vel.len() as f64;
    let mut out = Classification {
        class: BehaviorClass::Stationary,
        mean_velocity,
        average_speed: mean_velocity.abs(),
        max_speed,
        periodicity: None,
        lle: None,
    };
    if max_speed < cfg.v_stationary {
        return Ok(out);
    }

    let spread = vel.iter().map(|v| (v - mean_velocity).abs()).fold(0.0f64, f64::max);
    let constant = spread <= 1e-9 * max_speed.max(1.0);
    let per = if constant { None } else { periodicity(&vel) };
    out.periodicity = per;
    let periodic = constant || per.is_some_and(|q| q.peak >= cfg.periodicity_threshold);
    if span < 200.0 && !constant {
        match per {
            Some(q)
                if q.peak >= cfg.periodicity_threshold
                    && duration >= 2.0 * q.period_samples * dt => {}
            _ => {
                return Err(too_short(format!(
                    "window of {duration} covers fewer than two oscillation periods"
                )))
            }
        }
    }

    let drift = cfg.drift_threshold(&p);
    let drifting = mean_velocity.abs() > drift;
    if drifting && periodic {
        out.class = BehaviorClass::Runaway;
        return Ok(out);
    }
    if !periodic {
        out.class = BehaviorClass::Irregular;
        return Ok(out);
    }

    let (xmin, xmax) = traj
        .positions()
        .skip(w0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let peak_to_peak = match per {
        Some(q) => 2.0 * spread * q.period_samples * dt / (2.0 * PI),
        None => 0.0,
    };
    if xmax - xmin < 2.0 * p.potential_period() + peak_to_peak {
        out.class = BehaviorClass::BackAndForth;
        return Ok(out);
    }

    // Periodic velocity, sub-threshold drift, unbounded excursion.
    let sys = S::from_params(&p);
    let lle = lyapunov_estimate_system(
        &sys,
        traj.states()[w0],
        cfg.lyapunov_t_end,
        cfg.lyapunov_renorm_dt,
        lyapunov_step(&p),
    )?;
    out.lle = Some(lle);
    out.class = if lle > cfg.lyapunov_threshold {
        BehaviorClass::Irregular
    } else {
        BehaviorClass::BackAndForth
    };
    Ok(out)
}

/// Behaviour class of a full-system trajectory.
pub fn classify(traj: &Trajectory<4>, cfg: &ClassifierConfig) -> Result<BehaviorClass> {
    Ok(classify_detailed::<FullSystem, 4>(traj, cfg)?.class)
}

/// Behaviour class of a low-memory trajectory.
pub fn classify_lowmem(traj: &Trajectory<2>, cfg: &ClassifierConfig) -> Result<BehaviorClass> {
    Ok(classify_detailed::<LowMemorySystem, 2>(traj, cfg)?.class)
}
