//! Command execution.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};
use wpe_core::analysis::{classify_detailed, Periodicity};
use wpe_core::model::{FullSystem, Parity};
use wpe_core::stability::{
    boundary_curve, descartes_classify, lowmem_eigenvalues, omega_onset, r_critical,
    stability_report, CubicCoeffs, DescartesPrediction, Mechanism, Verdict,
};
use wpe_core::sweep::{
    init_state, run_lowmem_sweep, run_sweep, velocity_vs_b, InitRule, InitSpec, Plane,
    SweepResult, VelocityRow,
};
use wpe_core::{simulate, BehaviorClass, Params, VERSION};

use crate::config::{Command, RunConfig};
use crate::output::{
    boundary_csv, boundary_path, json_bytes, sidecar_path, sweep_csv, trajectory_csv,
    velocity_csv, write_file,
};
use crate::CliError;

/// Files written by a command and a short machine-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    system: &'static str,
    config: Value,
    outputs: Vec<String>,
    summary: &'a Value,
}

#[derive(Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

impl From<wpe_core::Complex64> for ComplexJson {
    fn from(z: wpe_core::Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct EquilibriumJson {
    k: i64,
    x: f64,
    parity: Parity,
    verdict: Verdict,
    mechanism: Mechanism,
    cubic: CubicCoeffs,
    discriminant: f64,
    eigenvalues: Vec<ComplexJson>,
    descartes: Option<DescartesPrediction>,
    neutral_free_space: bool,
    lowmem_eigenvalues: Vec<ComplexJson>,
}

#[derive(Serialize)]
struct StabilityJson {
    params: Params,
    r_critical: f64,
    omega_onset: f64,
    lowmem_r_critical: f64,
    equilibria: Vec<EquilibriumJson>,
    boundary: Vec<[f64; 2]>,
}

/// Run `cfg` and write its output and provenance sidecar.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let out = &cfg.output_path;
    let mut files = vec![out.clone()];
    let (system, summary) = match cfg.command {
        Command::Simulate => {
            let init = cfg.initial.unwrap_or_else(|| InitSpec::rule(InitRule::TroughRest));
            let s0 = init_state(&init, Default::default(), &cfg.params)?;
            let traj = simulate(&cfg.params, s0, &cfg.integrator)?;
            write_file(out, &trajectory_csv(&traj)?)?;
            let summary = match classify_detailed::<FullSystem, 4>(&traj, &cfg.classifier) {
                Ok(c) => json!({
                    "class": c.class,
                    "average_speed": c.average_speed,
                    "max_speed": c.max_speed,
                    "periodicity_peak": c.periodicity.map(|q: Periodicity| q.peak),
                    "lle": c.lle,
                }),
                Err(e) => json!({ "class": Value::Null, "classification_error": e.to_string() }),
            };
            ("full", summary)
        }
        Command::Stability => {
            let opts = cfg.stability.unwrap_or_default();
            let p = cfg.params;
            let equilibria = (opts.k_min..=opts.k_max)
                .map(|k| {
                    let rep = stability_report(&p, k);
                    EquilibriumJson {
                        k,
                        x: rep.x_eq,
                        parity: rep.parity,
                        verdict: rep.verdict,
                        mechanism: rep.mechanism,
                        cubic: rep.cubic,
                        discriminant: rep.discriminant,
                        eigenvalues: rep.eigenvalues.iter().map(|&z| z.into()).collect(),
                        descartes: descartes_classify(&p, rep.parity).ok(),
                        neutral_free_space: rep.neutral_free_space,
                        lowmem_eigenvalues: lowmem_eigenvalues(&p, rep.parity)
                            .iter()
                            .map(|&z| z.into())
                            .collect(),
                    }
                })
                .collect::<Vec<_>>();
            let boundary = boundary_curve(
                &p,
                (opts.boundary_sigma[0], opts.boundary_sigma[1]),
                opts.boundary_points,
            )?
            .into_iter()
            .map(|(s, r)| [s, r])
            .collect();
            let report = StabilityJson {
                params: p,
                r_critical: r_critical(&p),
                omega_onset: omega_onset(&p),
                lowmem_r_critical: std::f64::consts::E,
                equilibria,
                boundary,
            };
            write_file(out, &json_bytes(&report))?;
            let verdicts: BTreeMap<String, Verdict> = report
                .equilibria
                .iter()
                .map(|e| (e.k.to_string(), e.verdict))
                .collect();
            ("full", json!({ "r_critical": report.r_critical, "verdicts": verdicts }))
        }
        Command::Sweep | Command::Basin | Command::LowmemSweep => {
            let spec = cfg
                .sweep
                .as_ref()
                .ok_or_else(|| CliError::Config(format!("[sweep] is required by `{}`", cfg.command)))?;
            let (res, system) = if cfg.command == Command::LowmemSweep {
                (run_lowmem_sweep(spec, cfg.workers)?, "low-memory")
            } else {
                (run_sweep(spec, cfg.workers)?, "full")
            };
            write_file(out, &sweep_csv(&res)?)?;
            if spec.plane == Plane::SigmaR {
                let path = boundary_path(out);
                let points: Vec<(f64, f64)> = spec
                    .axis1
                    .values()
                    .into_iter()
                    .map(|s| Ok((s, r_critical(&spec.fixed.with_sigma(s)?))))
                    .collect::<Result<_, wpe_core::Error>>()?;
                write_file(&path, &boundary_csv(&points)?)?;
                files.push(path);
            }
            (system, sweep_summary(&res))
        }
        Command::VelocityCurve => {
            let vc = cfg
                .velocity_curve
                .as_ref()
                .ok_or_else(|| CliError::Config("[velocity_curve] is required".into()))?;
            let rows = velocity_vs_b(&cfg.params, &vc.b, &vc.v0, &cfg.integrator, &cfg.classifier, cfg.workers)?;
            write_file(out, &velocity_csv(&rows)?)?;
            ("full", velocity_summary(&rows))
        }
    };

    let sidecar = sidecar_path(out);
    let provenance = Provenance {
        tool: "wpe",
        version: VERSION,
        command: cfg.command.as_str(),
        system,
        config: cfg.to_json_value(),
        outputs: files.iter().map(|p| p.display().to_string()).collect(),
        summary: &summary,
    };
    write_file(&sidecar, &json_bytes(&provenance))?;
    files.push(sidecar);
    Ok(Outcome { files, summary })
}

fn sweep_summary(res: &SweepResult) -> Value {
    let counts: BTreeMap<&str, usize> = BehaviorClass::ALL
        .iter()
        .map(|&c| (c.as_str(), res.count(c)))
        .collect();
    json!({ "cells": res.cells.len(), "failed": res.failed(), "classes": counts })
}

fn velocity_summary(rows: &[VelocityRow]) -> Value {
    let failed = rows.iter().filter(|r| r.class.is_err()).count();
    let min = rows
        .iter()
        .filter_map(|r| r.avg_speed_normalized)
        .fold(f64::INFINITY, f64::min);
    json!({
        "rows": rows.len(),
        "failed": failed,
        "min_avg_speed_normalized": if min.is_finite() { Some(min) } else { None },
    })
}
