//! Explicit Runge–Kutta integration for autonomous systems.
//!
//! [`integrate`] runs the Dormand–Prince 5(4) pair with PI step-size control
//! and samples the solution on a uniform grid through the pair's continuous
//! extension. [`integrate_fixed_rk4`] is the classical fixed-step method and
//! serves as a reference in tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Autonomous right-hand side `s' = f(s)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, s: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    fn rhs(&self, s: &[f64; N]) -> [f64; N] {
        self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    /// Defaults to `t_end / 10` when absent.
    pub max_step: Option<f64>,
    pub sample_dt: f64,
    /// Added to the velocity component when the start is an exact fixed point.
    pub initial_perturbation: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-3,
            abs_tol: 1e-6,
            t_end: 2000.0,
            max_step: None,
            sample_dt: 0.05,
            initial_perturbation: 1e-8,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn max_step(&self) -> f64 {
        self.max_step.unwrap_or(self.t_end / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidIntegratorConfig(msg.to_string()));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.rel_tol) {
            return bad("rel_tol must be > 0");
        }
        if !pos(self.abs_tol) {
            return bad("abs_tol must be > 0");
        }
        if !pos(self.t_end) {
            return bad("t_end must be > 0");
        }
        if !pos(self.max_step()) {
            return bad("max_step must be > 0");
        }
        if !pos(self.sample_dt) {
            return bad("sample_dt must be > 0");
        }
        if self.sample_dt > self.t_end {
            return bad("sample_dt must not exceed t_end");
        }
        if !(self.initial_perturbation.is_finite() && self.initial_perturbation >= 0.0) {
            return bad("initial_perturbation must be >= 0");
        }
        Ok(())
    }

    /// Output grid `{0, dt, 2dt, …}` closed with `t_end`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_end / self.sample_dt + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * self.sample_dt).collect();
        let last = *times.last().unwrap();
        if self.t_end - last > 1e-9 * self.t_end {
            times.push(self.t_end);
        } else {
            *times.last_mut().unwrap() = self.t_end;
        }
        times
    }
}

/// Sampled solution of an [`OdeSystem`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller constants.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN_INV: f64 = 1.0 / 0.2;
const FAC_MAX_INV: f64 = 1.0 / 10.0;

#[inline]
fn lincomb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Step-by-step Dormand–Prince driver with continuous output over the last step.
pub struct DormandPrince<'a, S, const N: usize> {
    sys: &'a S,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    t: f64,
    y: [f64; N],
    f: [f64; N],
    h: f64,
    err_old: f64,
    last_rejected: bool,
    t_old: f64,
    h_done: f64,
    cont: [[f64; N]; 5],
    accepted: usize,
    rejected: usize,
}

impl<'a, S: OdeSystem<N>, const N: usize> DormandPrince<'a, S, N> {
    pub fn new(sys: &'a S, y0: [f64; N], rel_tol: f64, abs_tol: f64, max_step: f64) -> Self {
        let f = sys.rhs(&y0);
        let mut dp = DormandPrince {
            sys,
            rel_tol,
            abs_tol,
            max_step,
            t: 0.0,
            y: y0,
            f,
            h: 0.0,
            err_old: 1e-4,
            last_rejected: false,
            t_old: 0.0,
            h_done: 0.0,
            cont: [y0, [0.0; N], [0.0; N], [0.0; N], [0.0; N]],
            accepted: 0,
            rejected: 0,
        };
        dp.h = dp.initial_step();
        dp
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    pub fn step_counts(&self) -> (usize, usize) {
        (self.accepted, self.rejected)
    }

    /// Replace the current state, keeping time and step size.
    pub fn reset_state(&mut self, y: [f64; N]) {
        self.y = y;
        self.f = self.sys.rhs(&y);
        self.t_old = self.t;
        self.h_done = 0.0;
        self.cont = [y, [0.0; N], [0.0; N], [0.0; N], [0.0; N]];
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.abs_tol + self.rel_tol * a.abs().max(b.abs())
    }

    fn initial_step(&self) -> f64 {
        let (mut dnf, mut dny) = (0.0, 0.0);
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            dnf += (self.f[i] / sk).powi(2);
            dny += (self.y[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(self.max_step);
        let y1 = lincomb(&self.y, h, &[(1.0, &self.f)]);
        let f1 = self.sys.rhs(&y1);
        let mut der2 = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            der2 += ((f1[i] - self.f[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(self.max_step)
    }

    /// Take one accepted step, never passing `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<()> {
        let sys = self.sys;
        loop {
            let mut h = self.h.min(self.max_step);
            let mut hits_limit = false;
            // Snap to the limit rather than leave a round-off sliver behind.
            if self.t + 1.01 * h >= t_limit {
                h = t_limit - self.t;
                hits_limit = true;
            }
            if h <= 10.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            let y = &self.y;
            let k1 = self.f;
            let k2 = sys.rhs(&lincomb(y, h, &[(A21, &k1)]));
            let k3 = sys.rhs(&lincomb(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = sys.rhs(&lincomb(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = sys.rhs(&lincomb(
                y,
                h,
                &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            ));
            let ys = lincomb(
                y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            let k6 = sys.rhs(&ys);
            let y_new = lincomb(
                y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = sys.rhs(&y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sk = self.scale(y[i], y_new[i]);
                err += (e / sk).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || !all_finite(&y_new) {
                // Shrink hard and retry; give up once the step underflows.
                self.h = h * 0.1;
                self.last_rejected = true;
                self.rejected += 1;
                if self.h <= 10.0 * f64::EPSILON * self.t.abs().max(1.0) {
                    return Err(Error::NonFiniteIntegration { t: self.t });
                }
                continue;
            }

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(FAC_MAX_INV, FAC_MIN_INV);
                let mut h_new = h / fac;
                if self.last_rejected {
                    h_new = h_new.min(h);
                }
                self.err_old = err.max(1e-4);
                self.last_rejected = false;
                self.accepted += 1;

                let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
                let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
                self.cont = [
                    *y,
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                    std::array::from_fn(|i| {
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i])
                    }),
                ];
                self.t_old = self.t;
                self.h_done = h;
                self.t = if hits_limit { t_limit } else { self.t + h };
                self.y = y_new;
                self.f = k7;
                if !hits_limit || h_new < self.h {
                    self.h = h_new;
                }
                return Ok(());
            } else {
                self.h = h / (fac11 / SAFETY).min(FAC_MIN_INV);
                self.last_rejected = true;
                self.rejected += 1;
            }
        }
    }

    /// Continuous output on the last accepted step `[t_old, t]`.
    pub fn dense(&self, t: f64) -> [f64; N] {
        if self.h_done == 0.0 {
            return self.cont[0];
        }
        let theta = (t - self.t_old) / self.h_done;
        let theta1 = 1.0 - theta;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])))
        })
    }

    /// Advance until `t_target` is reached exactly.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            self.step(t_target)?;
        }
        Ok(())
    }
}

/// Start-state seeding: an exact fixed point gets `initial_perturbation` on
/// the velocity component (index 1).
pub fn seeded_start<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    s0: [f64; N],
    perturbation: f64,
) -> [f64; N] {
    let mut s = s0;
    if N > 1 && sys.rhs(&s0).iter().all(|&d| d == 0.0) {
        s[1] += perturbation;
    }
    s
}

/// Adaptive integration on `[0, t_end]`, sampled every `sample_dt`.
pub fn integrate<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    s0: [f64; N],
    cfg: &IntegratorConfig,
) -> Result<TimeSeries<N>> {
    cfg.validate()?;
    if !all_finite(&s0) {
        return Err(Error::NonFiniteIntegration { t: 0.0 });
    }
    let s0 = seeded_start(sys, s0, cfg.initial_perturbation);
    let times = cfg.sample_times();
    let mut states = Vec::with_capacity(times.len());
    states.push(s0);
    let mut dp = DormandPrince::new(sys, s0, cfg.rel_tol, cfg.abs_tol, cfg.max_step());
    for &t in &times[1..] {
        while dp.t() < t {
            dp.step(cfg.t_end)?;
        }
        let s = if t == dp.t() { *dp.state() } else { dp.dense(t) };
        states.push(s);
    }
    Ok(TimeSeries { times, states })
}

/// Classical fixed-step RK4 on `[0, t_end]`; every step is recorded.
pub fn integrate_fixed_rk4<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    s0: [f64; N],
    dt: f64,
    t_end: f64,
) -> Result<TimeSeries<N>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidIntegratorConfig("dt must be > 0".into()));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidIntegratorConfig("t_end must be > 0".into()));
    }
    if !all_finite(&s0) {
        return Err(Error::NonFiniteIntegration { t: 0.0 });
    }
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut y = s0;
    times.push(0.0);
    states.push(y);
    for step in 1..=n {
        let t0 = (step - 1) as f64 * dt;
        let t1 = if step == n { t_end } else { step as f64 * dt };
        y = rk4_step(sys, &y, t1 - t0);
        if !all_finite(&y) {
            return Err(Error::NonFiniteIntegration { t: t1 });
        }
        times.push(t1);
        states.push(y);
    }
    Ok(TimeSeries { times, states })
}

pub(crate) fn rk4_step<S: OdeSystem<N>, const N: usize>(sys: &S, y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = sys.rhs(y);
    let k2 = sys.rhs(&lincomb(y, h, &[(0.5, &k1)]));
    let k3 = sys.rhs(&lincomb(y, h, &[(0.5, &k2)]));
    let k4 = sys.rhs(&lincomb(y, h, &[(1.0, &k3)]));
    lincomb(
        y,
        h,
        &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    )
}

/// One Dormand–Prince step of fixed size `h`: (fifth-order solution, embedded
/// fourth-order solution). Used for convergence studies of the pair itself.
pub fn dopri_fixed_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N]) {
    let k1 = sys.rhs(y);
    let k2 = sys.rhs(&lincomb(y, h, &[(A21, &k1)]));
    let k3 = sys.rhs(&lincomb(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = sys.rhs(&lincomb(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = sys.rhs(&lincomb(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = sys.rhs(&lincomb(
        y,
        h,
        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y5 = lincomb(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = sys.rhs(&y5);
    let y4: [f64; N] = std::array::from_fn(|i| {
        y5[i] - h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
    });
    (y5, y4)
}

/// Integrate with `dopri_fixed_step` at constant step (fifth-order solution).
pub fn integrate_fixed_dopri<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    s0: [f64; N],
    dt: f64,
    t_end: f64,
) -> [f64; N] {
    let n = (t_end / dt).round() as usize;
    let mut y = s0;
    for _ in 0..n {
        y = dopri_fixed_step(sys, &y, dt).0;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rotation plus decay: s' = [-0.3 s0 - s1, s0 - 0.3 s1].
    fn spiral(s: &[f64; 2]) -> [f64; 2] {
        [-0.3 * s[0] - s[1], s[0] - 0.3 * s[1]]
    }

    fn spiral_exact(t: f64) -> [f64; 2] {
        let d = (-0.3 * t).exp();
        [d * t.cos(), d * t.sin()]
    }

    #[test]
    fn sample_grid_is_exact() {
        let cfg = IntegratorConfig::default().with_t_end(10.0);
        let t = cfg.sample_times();
        assert_eq!(t.len(), 201);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[7], 7.0 * 0.05);
        assert_eq!(*t.last().unwrap(), 10.0);
        let cfg = IntegratorConfig {
            sample_dt: 0.3,
            ..cfg
        };
        let t = cfg.sample_times();
        assert_eq!(*t.last().unwrap(), 10.0);
        assert!((t[t.len() - 2] - 9.9).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        assert_eq!(IntegratorConfig::default().max_step(), 200.0);
        let bad = IntegratorConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig {
            sample_dt: 3000.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn adaptive_tracks_linear_spiral() {
        let cfg = IntegratorConfig {
            t_end: 10.0,
            sample_dt: 0.1,
            ..Default::default()
        }
        .with_tolerances(1e-9, 1e-12);
        let ts = integrate(&spiral, [1.0, 0.0], &cfg).unwrap();
        for (t, s) in ts.times.iter().zip(&ts.states) {
            let e = spiral_exact(*t);
            assert!((s[0] - e[0]).abs() < 1e-7 && (s[1] - e[1]).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn rk4_fourth_order() {
        let err = |dt: f64| {
            let ts = integrate_fixed_rk4(&spiral, [1.0, 0.0], dt, 5.0).unwrap();
            let s = ts.states.last().unwrap();
            let e = spiral_exact(5.0);
            ((s[0] - e[0]).powi(2) + (s[1] - e[1]).powi(2)).sqrt()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn perturbs_exact_fixed_point_only() {
        let sys = |s: &[f64; 2]| [s[1], -s[0]];
        assert_eq!(seeded_start(&sys, [0.0, 0.0], 1e-8), [0.0, 1e-8]);
        assert_eq!(seeded_start(&sys, [0.5, 0.0], 1e-8), [0.5, 0.0]);
    }

    #[test]
    fn blow_up_reports_failure() {
        let sys = |s: &[f64; 1]| [s[0] * s[0]];
        let cfg = IntegratorConfig {
            t_end: 2.0,
            sample_dt: 0.1,
            ..Default::default()
        };
        let err = integrate(&sys, [1.0], &cfg).unwrap_err();
        match err {
            Error::StepSizeUnderflow { t } | Error::NonFiniteIntegration { t } => {
                assert!(t > 0.9 && t <= 1.0, "t={t}")
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let cfg = IntegratorConfig {
            t_end: 20.0,
            ..Default::default()
        };
        let a = integrate(&spiral, [1.0, 0.5], &cfg).unwrap();
        let b = integrate(&spiral, [1.0, 0.5], &cfg).unwrap();
        assert_eq!(a, b);
    }
}
