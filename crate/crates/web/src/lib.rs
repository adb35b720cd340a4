//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export is a plain Rust function as well, so the crate builds and
//! tests natively.

use std::f64::consts::PI;

use wasm_bindgen::prelude::*;
use wpe_core::analysis::{average_speed, classify};
use wpe_core::stability::{omega_onset, r_critical, stability_report, EquilibriumReport, Verdict};
use wpe_core::sweep::{run_lowmem_sweep, Axis, InitRule, InitSpec, Plane, SweepSpec};
use wpe_core::{simulate as simulate_full, IntegratorConfig, Params, State4};

/// Class code stored for a sweep cell that failed.
pub const FAILED_CELL: u8 = 255;

/// Tolerances for the low-memory map; the default 1e-3 produces spurious
/// aperiodic cells there.
const LOWMEM_REL_TOL: f64 = 1e-6;
const LOWMEM_ABS_TOL: f64 = 1e-9;

fn params(sigma: f64, r: f64, a: f64, b: f64) -> Result<Params, String> {
    Params::new(sigma, r, a, b).map_err(|e| e.to_string())
}

fn verdict_str(v: Verdict) -> String {
    match v {
        Verdict::Stable => "stable",
        Verdict::Unstable => "unstable",
        Verdict::Marginal => "marginal",
    }
    .to_string()
}

fn interleave(rep: &EquilibriumReport) -> Vec<f64> {
    rep.eigenvalues.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Linear stability of the trough (k = 1) and peak (k = 0) rest states.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct StabilityView {
    r_critical: f64,
    omega_onset: f64,
    trough: EquilibriumReport,
    peak: EquilibriumReport,
}

#[wasm_bindgen]
impl StabilityView {
    #[wasm_bindgen(getter)]
    pub fn r_critical(&self) -> f64 {
        self.r_critical
    }

    #[wasm_bindgen(getter)]
    pub fn omega_onset(&self) -> f64 {
        self.omega_onset
    }

    #[wasm_bindgen(getter)]
    pub fn trough_verdict(&self) -> String {
        verdict_str(self.trough.verdict)
    }

    #[wasm_bindgen(getter)]
    pub fn peak_verdict(&self) -> String {
        verdict_str(self.peak.verdict)
    }

    /// Four eigenvalues as `[re0, im0, re1, im1, ...]`.
    pub fn trough_eigenvalues(&self) -> Vec<f64> {
        interleave(&self.trough)
    }

    pub fn peak_eigenvalues(&self) -> Vec<f64> {
        interleave(&self.peak)
    }
}

#[wasm_bindgen]
pub fn stability(sigma: f64, r: f64, a: f64, b: f64) -> Result<StabilityView, String> {
    let p = params(sigma, r, a, b)?;
    Ok(StabilityView {
        r_critical: r_critical(&p),
        omega_onset: omega_onset(&p),
        trough: stability_report(&p, 1),
        peak: stability_report(&p, 0),
    })
}

/// A sampled trajectory with its behavior class.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Run {
    times: Vec<f64>,
    positions: Vec<f64>,
    velocities: Vec<f64>,
    class: String,
    average_speed: f64,
}

#[wasm_bindgen]
impl Run {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.positions.clone()
    }

    pub fn velocities(&self) -> Vec<f64> {
        self.velocities.clone()
    }

    /// Behavior class, or `unclassified: <reason>`.
    #[wasm_bindgen(getter)]
    pub fn class(&self) -> String {
        self.class.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn average_speed(&self) -> f64 {
        self.average_speed
    }
}

/// Full-system run from `(x0, X0, X0, X0²)`; `x0 = NaN` means the trough
/// `π/B`.
#[wasm_bindgen]
pub fn simulate(sigma: f64, r: f64, a: f64, b: f64, x0: f64, v0: f64, t_end: f64) -> Result<Run, String> {
    let p = params(sigma, r, a, b)?;
    let x0 = if x0.is_nan() { PI / b } else { x0 };
    let s0 = State4::new(x0, v0, v0, v0 * v0).map_err(|e| e.to_string())?;
    let cfg = IntegratorConfig::default().with_t_end(t_end);
    let tr = simulate_full(&p, s0, &cfg).map_err(|e| e.to_string())?;
    let class = match classify(&tr, &Default::default()) {
        Ok(c) => c.as_str().to_string(),
        Err(e) => format!("unclassified: {e}"),
    };
    Ok(Run {
        times: tr.times().to_vec(),
        positions: tr.positions().collect(),
        velocities: tr.velocities().collect(),
        class,
        average_speed: average_speed(&tr, 0.5),
    })
}

/// Low-memory (A, B) map from the trough-rest start. Row-major class codes
/// (A outer, B inner): 0 stationary, 1 back-and-forth, 2 runaway,
/// 3 irregular, [`FAILED_CELL`] for a failed cell.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn lowmem_map(
    sigma: f64,
    r: f64,
    a_min: f64,
    a_max: f64,
    b_min: f64,
    b_max: f64,
    n: usize,
    t_end: f64,
) -> Result<Vec<u8>, String> {
    let fixed = params(sigma, r, a_min, b_min)?;
    let mut spec = SweepSpec::new(
        Plane::AB,
        fixed,
        Axis::new(a_min, a_max, n),
        Axis::new(b_min, b_max, n),
        InitSpec::rule(InitRule::TroughRest),
    );
    spec.integrator = spec.integrator.with_t_end(t_end).with_tolerances(LOWMEM_REL_TOL, LOWMEM_ABS_TOL);
    let res = run_lowmem_sweep(&spec, 1).map_err(|e| e.to_string())?;
    Ok(res
        .cells
        .iter()
        .map(|c| c.outcome.as_ref().map_or(FAILED_CELL, |o| o.class.code()))
        .collect())
}
