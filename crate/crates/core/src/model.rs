//! Dimensionless model: parameters, state types and the two right-hand sides.
//!
//! The full system is the Lorenz-like ODE for position `x`, velocity `X`,
//! wave-memory force `Y` and the memory variable `Z`:
//!
//! ```text
//! x' = X
//! X' = σ (Y − X + A sin(B x))
//! Y' = −X Z + r X − Y
//! Z' = X Y − Z
//! ```
//!
//! The low-memory reduction keeps only the most recent wave:
//! `x' = v`, `v' = σ ((r/e) sin v + A sin(B x) − v)`.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::OdeSystem;

/// The four dimensionless model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    sigma: f64,
    r: f64,
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    sigma: f64,
    r: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        Params::new(raw.sigma, raw.r, raw.a, raw.b)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams {
            sigma: p.sigma,
            r: p.r,
            a: p.a,
            b: p.b,
        }
    }
}

impl Params {
    pub fn new(sigma: f64, r: f64, a: f64, b: f64) -> Result<Self> {
        check(sigma.is_finite() && sigma > 0.0, "sigma", "> 0", sigma)?;
        check(r.is_finite() && r >= 0.0, "r", ">= 0", r)?;
        check(a.is_finite() && a >= 0.0, "A", ">= 0", a)?;
        check(b.is_finite() && b > 0.0, "B", "> 0", b)?;
        Ok(Params { sigma, r, a, b })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn with_sigma(self, sigma: f64) -> Result<Self> {
        Params::new(sigma, self.r, self.a, self.b)
    }
    pub fn with_r(self, r: f64) -> Result<Self> {
        Params::new(self.sigma, r, self.a, self.b)
    }
    pub fn with_a(self, a: f64) -> Result<Self> {
        Params::new(self.sigma, self.r, a, self.b)
    }
    pub fn with_b(self, b: f64) -> Result<Self> {
        Params::new(self.sigma, self.r, self.a, b)
    }

    /// Spatial period of the applied potential, `2π/B`.
    pub fn potential_period(&self) -> f64 {
        2.0 * PI / self.b
    }

    /// Free-space walking speed `√(r−1)`, if it exists.
    pub fn free_speed(&self) -> Option<f64> {
        (self.r > 1.0).then(|| (self.r - 1.0).sqrt())
    }
}

fn check(ok: bool, field: &'static str, requirement: &'static str, value: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            field,
            requirement,
            value,
        })
    }
}

fn finite(component: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteState { component, value })
    }
}

/// Full-system state `(x, X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State4 {
    x: f64,
    vel: f64,
    y: f64,
    z: f64,
}

impl State4 {
    pub fn new(x: f64, vel: f64, y: f64, z: f64) -> Result<Self> {
        Ok(State4 {
            x: finite("x", x)?,
            vel: finite("X", vel)?,
            y: finite("Y", y)?,
            z: finite("Z", z)?,
        })
    }

    pub fn at_rest(x: f64) -> Result<Self> {
        State4::new(x, 0.0, 0.0, 0.0)
    }

    pub fn from_array(s: [f64; 4]) -> Result<Self> {
        State4::new(s[0], s[1], s[2], s[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.vel, self.y, self.z]
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn vel(&self) -> f64 {
        self.vel
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Image under the parity map `(x, X, Y, Z) → (−x, −X, −Y, Z)`.
    pub fn mirror(self) -> Self {
        State4 {
            x: -self.x,
            vel: -self.vel,
            y: -self.y,
            z: self.z,
        }
    }
}

/// Low-memory state `(x, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State2 {
    x: f64,
    v: f64,
}

impl State2 {
    pub fn new(x: f64, v: f64) -> Result<Self> {
        Ok(State2 {
            x: finite("x", x)?,
            v: finite("v", v)?,
        })
    }

    pub fn from_array(s: [f64; 2]) -> Result<Self> {
        State2::new(s[0], s[1])
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.v]
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn v(&self) -> f64 {
        self.v
    }
}

/// `sin(B x)` with exact zeros at the equilibria `x = kπ/B`.
///
/// When `B x` lands within a few ulps of an integer multiple of π the result
/// is exactly zero, so `(kπ/B, 0, 0, 0)` is a fixed point in floating point.
pub fn potential_sin(b: f64, x: f64) -> f64 {
    let phase = b * x;
    let k = (phase / PI).round();
    let residual = phase - k * PI;
    if residual.abs() <= 4.0 * f64::EPSILON * phase.abs() {
        0.0
    } else {
        phase.sin()
    }
}

pub fn rhs_full(s: &[f64; 4], p: &Params) -> [f64; 4] {
    let [x, vel, y, z] = *s;
    [
        vel,
        p.sigma * (y - vel + p.a * potential_sin(p.b, x)),
        -vel * z + p.r * vel - y,
        vel * y - z,
    ]
}

pub fn rhs_lowmem(s: &[f64; 2], p: &Params) -> [f64; 2] {
    let [x, v] = *s;
    [
        v,
        p.sigma * ((p.r / E) * v.sin() + p.a * potential_sin(p.b, x) - v),
    ]
}

/// The full four-dimensional system as an [`OdeSystem`].
#[derive(Debug, Clone, Copy)]
pub struct FullSystem(pub Params);

impl OdeSystem<4> for FullSystem {
    fn rhs(&self, s: &[f64; 4]) -> [f64; 4] {
        rhs_full(s, &self.0)
    }
}

/// The two-dimensional low-memory system.
#[derive(Debug, Clone, Copy)]
pub struct LowMemorySystem(pub Params);

impl OdeSystem<2> for LowMemorySystem {
    fn rhs(&self, s: &[f64; 2]) -> [f64; 2] {
        rhs_lowmem(s, &self.0)
    }
}

/// Peak (even `k`) or trough (odd `k`) of the applied potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Peak,
    Trough,
}

impl Parity {
    pub fn of(k: i64) -> Parity {
        if k.rem_euclid(2) == 0 {
            Parity::Peak
        } else {
            Parity::Trough
        }
    }

    /// `(−1)^k`.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Peak => 1.0,
            Parity::Trough => -1.0,
        }
    }
}

/// A stationary state `x = kπ/B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub k: i64,
    pub x: f64,
    pub parity: Parity,
}

impl Equilibrium {
    pub fn state(&self) -> State4 {
        State4 {
            x: self.x,
            vel: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }
}

pub fn equilibrium_position(p: &Params, k: i64) -> f64 {
    k as f64 * PI / p.b
}

pub fn equilibria(p: &Params, k_min: i64, k_max: i64) -> Result<Vec<Equilibrium>> {
    if k_min > k_max {
        return Err(Error::InvalidArgument(format!(
            "k_min ({k_min}) must not exceed k_max ({k_max})"
        )));
    }
    Ok((k_min..=k_max)
        .map(|k| Equilibrium {
            k,
            x: equilibrium_position(p, k),
            parity: Parity::of(k),
        })
        .collect())
}

/// Steadily walking free-space state `(x0, ±√(r−1), ±√(r−1), r−1)`.
pub fn free_walking_state(p: &Params, sign: f64, x0: f64) -> Result<State4> {
    let speed = p.free_speed().ok_or(Error::NoFreeWalking { r: p.r })?;
    let u = speed.copysign(sign);
    State4::new(x0, u, u, p.r - 1.0)
}
