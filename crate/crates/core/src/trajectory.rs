use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig, TimeSeries};
use crate::model::{FullSystem, LowMemorySystem, Params, State2, State4};

/// Time-stamped states from one run together with the parameters used.
///
/// Component 0 is always the position and component 1 the velocity, so the
/// same type serves the full (`N = 4`) and low-memory (`N = 2`) systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<const N: usize> {
    times: Vec<f64>,
    #[serde(with = "states_serde")]
    states: Vec<[f64; N]>,
    params: Params,
}

pub type FullTrajectory = Trajectory<4>;
pub type LowMemoryTrajectory = Trajectory<2>;

impl<const N: usize> Trajectory<N> {
    pub fn new(times: Vec<f64>, states: Vec<[f64; N]>, params: Params) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::TrajectoryTooShort("no samples".into()));
        }
        if times.len() != states.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        if times[0] < 0.0 {
            return Err(Error::InvalidArgument("first time must be >= 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        Ok(Trajectory {
            times,
            states,
            params,
        })
    }

    pub fn from_series(series: TimeSeries<N>, params: Params) -> Result<Self> {
        Trajectory::new(series.times, series.states, params)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }
    pub fn params(&self) -> &Params {
        &self.params
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }
    pub fn last(&self) -> &[f64; N] {
        self.states.last().unwrap()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s[0])
    }

    pub fn velocities(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s[1])
    }

    /// Index of the first sample in the terminal `fraction` of `[t0, t_end]`.
    pub fn window_start(&self, fraction: f64) -> usize {
        let t0 = self.times[0];
        let cut = self.t_end() - fraction.clamp(0.0, 1.0) * (self.t_end() - t0);
        self.times.partition_point(|&t| t < cut - 1e-9 * self.t_end().abs().max(1.0))
    }

    /// Parity image: position, velocity and (for the full system) `Y` negated.
    pub fn mirrored(&self) -> Self {
        let states = self
            .states
            .iter()
            .map(|s| {
                let mut m = *s;
                for c in m.iter_mut().take(N.min(3)) {
                    *c = -*c;
                }
                m
            })
            .collect();
        Trajectory {
            times: self.times.clone(),
            states,
            params: self.params,
        }
    }

    pub fn translated(&self, dx: f64) -> Self {
        let states = self
            .states
            .iter()
            .map(|s| {
                let mut m = *s;
                m[0] += dx;
                m
            })
            .collect();
        Trajectory {
            times: self.times.clone(),
            states,
            params: self.params,
        }
    }
}

/// Integrate the full system from `s0`.
pub fn simulate(p: &Params, s0: State4, cfg: &IntegratorConfig) -> Result<FullTrajectory> {
    let series = integrate(&FullSystem(*p), s0.to_array(), cfg)?;
    Trajectory::from_series(series, *p)
}

/// Integrate the low-memory system from `s0`.
pub fn simulate_lowmem(p: &Params, s0: State2, cfg: &IntegratorConfig) -> Result<LowMemoryTrajectory> {
    let series = integrate(&LowMemorySystem(*p), s0.to_array(), cfg)?;
    Trajectory::from_series(series, *p)
}

mod states_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(
        states: &[[f64; N]],
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = states.iter().map(|s| s.as_slice()).collect();
        rows.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(
        de: D,
    ) -> Result<Vec<[f64; N]>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(de)?;
        rows.into_iter()
            .map(|r| {
                <[f64; N]>::try_from(r.as_slice())
                    .map_err(|_| serde::de::Error::custom(format!("expected {N} components")))
            })
            .collect()
    }
}
