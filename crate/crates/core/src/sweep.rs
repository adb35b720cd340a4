//! Grid experiments over parameter planes and initial conditions.
//!
//! Every cell is an independent integrate-then-classify task. Cells are
//! evaluated on a worker pool and assembled in grid order, so results do not
//! depend on the worker count.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    classify_detailed, lyapunov_estimate_system, lyapunov_step, BehaviorClass, ClassifierConfig,
};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::model::{free_walking_state, FullSystem, LowMemorySystem, Params, State2, State4};
use crate::trajectory::{simulate, simulate_lowmem};

/// Which two quantities vary across the grid (first axis, second axis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    #[serde(rename = "sigma-r")]
    SigmaR,
    #[serde(rename = "A-B")]
    AB,
    /// Initial position and initial velocity.
    #[serde(rename = "x0-X0")]
    X0V0,
    /// Initial velocity and wavelength ratio.
    #[serde(rename = "X0-B")]
    V0B,
}

impl Plane {
    pub fn axis_names(self) -> (&'static str, &'static str) {
        match self {
            Plane::SigmaR => ("sigma", "r"),
            Plane::AB => ("A", "B"),
            Plane::X0V0 => ("x0", "X0"),
            Plane::V0B => ("X0", "B"),
        }
    }
}

/// `n` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Self {
        Axis { min, max, n }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    pub fn step(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.n - 1) as f64
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSweep(format!("axis {name}: n must be >= 2")));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max > self.min) {
            return Err(Error::InvalidSweep(format!(
                "axis {name}: need finite min < max"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitRule {
    /// `(π/B, 0, 0, 0)`.
    TroughRest,
    /// `(π/B, √(r−1), √(r−1), r−1)`.
    FreeWalking,
    /// `(x0, X0, X0, X0²)`; `x0` defaults to `π/B`.
    VelocitySeeded,
    /// A fixed state given in the spec.
    Explicit,
}

/// Initial-condition recipe shared by all cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub rule: InitRule,
    /// Initial position for `velocity-seeded`; `π/B` when absent.
    #[serde(default)]
    pub x0: Option<f64>,
    /// Initial velocity for `velocity-seeded`.
    #[serde(default, rename = "X0")]
    pub v0: f64,
    /// State for `explicit`.
    #[serde(default)]
    pub state: Option<[f64; 4]>,
}

impl InitSpec {
    pub fn rule(rule: InitRule) -> Self {
        InitSpec {
            rule,
            x0: None,
            v0: 0.0,
            state: None,
        }
    }

    pub fn velocity_seeded(x0: Option<f64>, v0: f64) -> Self {
        InitSpec {
            rule: InitRule::VelocitySeeded,
            x0,
            v0,
            state: None,
        }
    }
}

/// Per-cell overrides of the initial position and velocity.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellInit {
    pub x0: Option<f64>,
    pub v0: Option<f64>,
}

/// Initial state for one cell.
pub fn init_state(init: &InitSpec, cell: CellInit, p: &Params) -> Result<State4> {
    let trough = PI / p.b();
    match init.rule {
        InitRule::TroughRest => State4::at_rest(trough),
        InitRule::FreeWalking => free_walking_state(p, 1.0, trough),
        InitRule::VelocitySeeded => {
            let x0 = cell.x0.or(init.x0).unwrap_or(trough);
            let v0 = cell.v0.unwrap_or(init.v0);
            State4::new(x0, v0, v0, v0 * v0)
        }
        InitRule::Explicit => {
            let s = init
                .state
                .ok_or_else(|| Error::InvalidSweep("explicit init needs a state".into()))?;
            State4::from_array(s)
        }
    }
}

/// Low-memory initial state `(x0, v0)`.
pub fn init_state_lowmem(init: &InitSpec, cell: CellInit, p: &Params) -> Result<State2> {
    let trough = PI / p.b();
    match init.rule {
        InitRule::TroughRest => State2::new(trough, 0.0),
        InitRule::FreeWalking => Err(Error::InvalidSweep(
            "free-walking init is not defined for the low-memory system".into(),
        )),
        InitRule::VelocitySeeded => State2::new(
            cell.x0.or(init.x0).unwrap_or(trough),
            cell.v0.unwrap_or(init.v0),
        ),
        InitRule::Explicit => {
            let s = init
                .state
                .ok_or_else(|| Error::InvalidSweep("explicit init needs a state".into()))?;
            State2::new(s[0], s[1])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub plane: Plane,
    /// Values for the two swept quantities are overwritten per cell.
    pub fixed: Params,
    pub axis1: Axis,
    pub axis2: Axis,
    pub init: InitSpec,
    pub integrator: IntegratorConfig,
    pub classifier: ClassifierConfig,
    /// Also estimate the largest Lyapunov exponent of every cell.
    pub compute_lle: bool,
}

impl SweepSpec {
    pub fn new(plane: Plane, fixed: Params, axis1: Axis, axis2: Axis, init: InitSpec) -> Self {
        SweepSpec {
            plane,
            fixed,
            axis1,
            axis2,
            init,
            integrator: IntegratorConfig::default(),
            classifier: ClassifierConfig::default(),
            compute_lle: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n1, n2) = self.plane.axis_names();
        self.axis1.validate(n1)?;
        self.axis2.validate(n2)?;
        self.integrator.validate()?;
        self.classifier.validate()?;
        // Every corner must give valid parameters.
        for v1 in [self.axis1.min, self.axis1.max] {
            for v2 in [self.axis2.min, self.axis2.max] {
                self.cell_setup(v1, v2)
                    .map_err(|e| Error::InvalidSweep(format!("corner ({v1}, {v2}): {e}")))?;
            }
        }
        if self.init.rule == InitRule::Explicit && self.init.state.is_none() {
            return Err(Error::InvalidSweep("explicit init needs a state".into()));
        }
        Ok(())
    }

    /// Parameters and initial-condition overrides for the cell at `(v1, v2)`.
    pub fn cell_setup(&self, v1: f64, v2: f64) -> Result<(Params, CellInit)> {
        let f = self.fixed;
        Ok(match self.plane {
            Plane::SigmaR => (f.with_sigma(v1)?.with_r(v2)?, CellInit::default()),
            Plane::AB => (f.with_a(v1)?.with_b(v2)?, CellInit::default()),
            Plane::X0V0 => (
                f,
                CellInit {
                    x0: Some(v1),
                    v0: Some(v2),
                },
            ),
            Plane::V0B => (
                f.with_b(v2)?,
                CellInit {
                    x0: None,
                    v0: Some(v1),
                },
            ),
        })
    }

    pub fn cell_count(&self) -> usize {
        self.axis1.n * self.axis2.n
    }
}

/// Observables of one successfully evaluated cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub class: BehaviorClass,
    pub avg_speed: f64,
    pub lle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub axis1: f64,
    pub axis2: f64,
    pub outcome: std::result::Result<CellOutcome, String>,
}

/// Configuration and code version a result came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub system: String,
    pub integrator: IntegratorConfig,
    pub classifier: ClassifierConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Row-major: index `i * axis2.n + j`.
    pub cells: Vec<SweepCell>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn cell(&self, i: usize, j: usize) -> &SweepCell {
        &self.cells[i * self.spec.axis2.n + j]
    }

    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    pub fn count(&self, class: BehaviorClass) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(&c.outcome, Ok(o) if o.class == class))
            .count()
    }
}

#[cfg(feature = "parallel")]
fn map_cells<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if workers <= 1 {
        return Ok((0..n).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn map_cells<T, F>(n: usize, _workers: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> T,
{
    Ok((0..n).map(f).collect())
}

fn validate_workers(workers: usize) -> Result<()> {
    if workers == 0 {
        Err(Error::InvalidArgument("workers must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn full_cell(spec: &SweepSpec, v1: f64, v2: f64) -> Result<CellOutcome> {
    let (p, cell) = spec.cell_setup(v1, v2)?;
    let s0 = init_state(&spec.init, cell, &p)?;
    let traj = simulate(&p, s0, &spec.integrator)?;
    let c = classify_detailed::<FullSystem, 4>(&traj, &spec.classifier)?;
    let lle = match (spec.compute_lle, c.lle) {
        (true, None) => Some(lyapunov_estimate_system(
            &FullSystem(p),
            *traj.last(),
            spec.classifier.lyapunov_t_end,
            spec.classifier.lyapunov_renorm_dt,
            lyapunov_step(&p),
        )?),
        (_, lle) => lle,
    };
    Ok(CellOutcome {
        class: c.class,
        avg_speed: c.average_speed,
        lle,
    })
}

fn lowmem_cell(spec: &SweepSpec, v1: f64, v2: f64) -> Result<CellOutcome> {
    let (p, cell) = spec.cell_setup(v1, v2)?;
    let s0 = init_state_lowmem(&spec.init, cell, &p)?;
    let traj = simulate_lowmem(&p, s0, &spec.integrator)?;
    let c = classify_detailed::<LowMemorySystem, 2>(&traj, &spec.classifier)?;
    let lle = match (spec.compute_lle, c.lle) {
        (true, None) => Some(lyapunov_estimate_system(
            &LowMemorySystem(p),
            *traj.last(),
            spec.classifier.lyapunov_t_end,
            spec.classifier.lyapunov_renorm_dt,
            lyapunov_step(&p),
        )?),
        (_, lle) => lle,
    };
    Ok(CellOutcome {
        class: c.class,
        avg_speed: c.average_speed,
        lle,
    })
}

fn run_cells(
    spec: &SweepSpec,
    workers: usize,
    system: &str,
    eval: fn(&SweepSpec, f64, f64) -> Result<CellOutcome>,
) -> Result<SweepResult> {
    spec.validate()?;
    validate_workers(workers)?;
    let n2 = spec.axis2.n;
    let cells = map_cells(spec.cell_count(), workers, |idx| {
        let (v1, v2) = (spec.axis1.value(idx / n2), spec.axis2.value(idx % n2));
        SweepCell {
            axis1: v1,
            axis2: v2,
            outcome: eval(spec, v1, v2).map_err(|e| e.to_string()),
        }
    })?;
    Ok(SweepResult {
        spec: spec.clone(),
        cells,
        provenance: Provenance {
            version: crate::VERSION.to_string(),
            system: system.to_string(),
            integrator: spec.integrator,
            classifier: spec.classifier,
        },
    })
}

/// Classify the full system on every grid cell.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    run_cells(spec, workers, "full", full_cell)
}

/// Classify the low-memory system over an `(A, B)` grid.
pub fn run_lowmem_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    if spec.plane != Plane::AB {
        return Err(Error::InvalidSweep(
            "low-memory sweeps run over the A-B plane".into(),
        ));
    }
    run_cells(spec, workers, "low-memory", lowmem_cell)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityRow {
    pub b: f64,
    pub v0: f64,
    pub avg_speed: f64,
    /// `avg_speed / √(r−1)` when `r > 1`.
    pub avg_speed_normalized: Option<f64>,
    pub class: std::result::Result<BehaviorClass, String>,
}

/// `|⟨X⟩|` and class along `B` for each initial velocity, starting from
/// `(π/B, X0, X0, X0²)`. The `B` of `fixed` is ignored.
pub fn velocity_vs_b(
    fixed: &Params,
    b_axis: &Axis,
    v0_values: &[f64],
    integrator: &IntegratorConfig,
    classifier: &ClassifierConfig,
    workers: usize,
) -> Result<Vec<VelocityRow>> {
    b_axis.validate("B")?;
    if b_axis.min <= 0.0 {
        return Err(Error::InvalidSweep("B range must be positive".into()));
    }
    if v0_values.is_empty() {
        return Err(Error::InvalidSweep("need at least one X0".into()));
    }
    integrator.validate()?;
    classifier.validate()?;
    validate_workers(workers)?;
    let nv = v0_values.len();
    let speed = fixed.free_speed();
    map_cells(b_axis.n * nv, workers, |idx| {
        let b = b_axis.value(idx / nv);
        let v0 = v0_values[idx % nv];
        let run = || -> Result<(f64, BehaviorClass)> {
            let p = fixed.with_b(b)?;
            let s0 = init_state(&InitSpec::velocity_seeded(None, v0), CellInit::default(), &p)?;
            let traj = simulate(&p, s0, integrator)?;
            let c = classify_detailed::<FullSystem, 4>(&traj, classifier)?;
            Ok((c.average_speed, c.class))
        };
        match run() {
            Ok((avg, class)) => VelocityRow {
                b,
                v0,
                avg_speed: avg,
                avg_speed_normalized: speed.map(|u| avg / u),
                class: Ok(class),
            },
            Err(e) => VelocityRow {
                b,
                v0,
                avg_speed: f64::NAN,
                avg_speed_normalized: None,
                class: Err(e.to_string()),
            },
        }
    })
}
