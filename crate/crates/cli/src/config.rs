//! Run configuration: a TOML document per run.
//!
//! ```toml
//! command = "simulate"          # optional if given on the command line
//! output = "run.csv"            # optional
//! workers = 4                   # optional
//!
//! [params]                      # sigma, r, A, B
//! [integrator]                  # optional, defaults per field
//! [classifier]                  # optional, defaults per field
//! [initial]                     # simulate
//! [stability]                   # stability
//! [sweep]                       # sweep, basin, lowmem-sweep
//! [velocity_curve]              # velocity-curve
//! ```
//!
//! In `[params]` the quantities varied by a sweep (or `B` for a velocity
//! curve) may be omitted.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wpe_core::sweep::{Axis, InitRule, InitSpec, Plane, SweepSpec};
use wpe_core::{ClassifierConfig, Error as CoreError, IntegratorConfig, Params};

use crate::CliError;

/// Environment variable that sets the default worker count.
pub const WORKERS_ENV: &str = "WPE_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Stability,
    Sweep,
    Basin,
    VelocityCurve,
    LowmemSweep,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Simulate,
        Command::Stability,
        Command::Sweep,
        Command::Basin,
        Command::VelocityCurve,
        Command::LowmemSweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Stability => "stability",
            Command::Sweep => "sweep",
            Command::Basin => "basin",
            Command::VelocityCurve => "velocity-curve",
            Command::LowmemSweep => "lowmem-sweep",
        }
    }

    fn default_output(self) -> &'static str {
        match self {
            Command::Stability => "stability.json",
            Command::Simulate => "simulate.csv",
            Command::Sweep => "sweep.csv",
            Command::Basin => "basin.csv",
            Command::VelocityCurve => "velocity-curve.csv",
            Command::LowmemSweep => "lowmem-sweep.csv",
        }
    }

    fn uses_sweep(self) -> bool {
        matches!(self, Command::Sweep | Command::Basin | Command::LowmemSweep)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// Equilibria and boundary sampling for the `stability` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityOptions {
    pub k_min: i64,
    pub k_max: i64,
    /// σ range of the sampled `r_c(σ)` curve.
    pub boundary_sigma: [f64; 2],
    pub boundary_points: usize,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            k_min: 0,
            k_max: 1,
            boundary_sigma: [0.1, 25.0],
            boundary_points: 101,
        }
    }
}

/// `|⟨X⟩|` against `B` for a list of initial velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityCurve {
    #[serde(rename = "B")]
    pub b: Axis,
    #[serde(rename = "X0")]
    pub v0: Vec<f64>,
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub integrator: IntegratorConfig,
    pub classifier: ClassifierConfig,
    /// Start of a `simulate` run.
    pub initial: Option<InitSpec>,
    pub stability: Option<StabilityOptions>,
    pub sweep: Option<SweepSpec>,
    pub velocity_curve: Option<VelocityCurve>,
    pub output_path: PathBuf,
    pub workers: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
}

fn default_init() -> InitSpec {
    InitSpec::rule(InitRule::TroughRest)
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    plane: Plane,
    axis1: Axis,
    axis2: Axis,
    #[serde(default = "default_init")]
    init: InitSpec,
    #[serde(default, skip_serializing_if = "is_false")]
    compute_lle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    params: PartialParams,
    #[serde(default)]
    integrator: IntegratorConfig,
    #[serde(default)]
    classifier: ClassifierConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<InitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stability: Option<StabilityOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    velocity_curve: Option<VelocityCurve>,
}

fn semantic(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Field-path form of a core validation error.
fn core_semantic(err: CoreError) -> CliError {
    semantic(match err {
        CoreError::InvalidIntegratorConfig(m) => format!("integrator.{m}"),
        CoreError::InvalidClassifierConfig(m) => format!("classifier.{m}"),
        CoreError::InvalidSweep(m) => format!("sweep: {m}"),
        other => other.to_string(),
    })
}

fn syntax(text: &str, err: toml::de::Error) -> CliError {
    let line = err
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    let msg = err.message().trim().to_string();
    CliError::Config(match line {
        Some(l) => format!("line {l}: {msg}"),
        None => msg,
    })
}

/// Default worker count: `WPE_WORKERS` if set, otherwise the available
/// parallelism.
pub fn default_workers() -> Result<usize, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(semantic(format!("{WORKERS_ENV} must be a positive integer (got `{v}`)"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Parse a config that names its own `command`.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse_config_for(text, None)
}

/// Parse a config for `command`; a `command` key in the file must agree.
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<RunConfig, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| syntax(text, e))?;
    let command = match (command, file.command) {
        (Some(a), Some(b)) if a != b => {
            return Err(semantic(format!("config is for `{b}`, not `{a}`")))
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(semantic("command is required")),
    };
    resolve(command, file)
}

fn resolve(command: Command, file: ConfigFile) -> Result<RunConfig, CliError> {
    let unused = |name: &str| semantic(format!("[{name}] is not used by `{command}`"));
    if file.initial.is_some() && command != Command::Simulate {
        return Err(unused("initial"));
    }
    if file.stability.is_some() && command != Command::Stability {
        return Err(unused("stability"));
    }
    if file.sweep.is_some() && !command.uses_sweep() {
        return Err(unused("sweep"));
    }
    if file.velocity_curve.is_some() && command != Command::VelocityCurve {
        return Err(unused("velocity_curve"));
    }
    file.integrator.validate().map_err(core_semantic)?;
    file.classifier.validate().map_err(core_semantic)?;

    let workers = match file.workers {
        Some(0) => return Err(semantic("workers must be >= 1")),
        Some(n) => n,
        None => default_workers()?,
    };
    let output_path = file
        .output
        .unwrap_or_else(|| PathBuf::from(command.default_output()));

    // Swept quantities may be left out of [params]; fill from the axis minimum.
    let mut pp = file.params.clone();
    if let Some(s) = &file.sweep {
        let fill = |slot: &mut Option<f64>, v: f64| {
            slot.get_or_insert(v);
        };
        match s.plane {
            Plane::SigmaR => {
                fill(&mut pp.sigma, s.axis1.min);
                fill(&mut pp.r, s.axis2.min);
            }
            Plane::AB => {
                fill(&mut pp.a, s.axis1.min);
                fill(&mut pp.b, s.axis2.min);
            }
            Plane::V0B => fill(&mut pp.b, s.axis2.min),
            Plane::X0V0 => {}
        }
    }
    if let Some(v) = &file.velocity_curve {
        pp.b.get_or_insert(v.b.min);
    }
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| semantic(format!("params.{name} is required")));
    let params = Params::new(
        need(pp.sigma, "sigma")?,
        need(pp.r, "r")?,
        need(pp.a, "A")?,
        need(pp.b, "B")?,
    )
    .map_err(core_semantic)?;

    let mut cfg = RunConfig {
        command,
        params,
        integrator: file.integrator,
        classifier: file.classifier,
        initial: None,
        stability: None,
        sweep: None,
        velocity_curve: None,
        output_path,
        workers,
    };

    match command {
        Command::Simulate => {
            let init = file.initial.unwrap_or_else(default_init);
            wpe_core::sweep::init_state(&init, Default::default(), &params)
                .map_err(|e| semantic(format!("initial: {e}")))?;
            cfg.initial = Some(init);
        }
        Command::Stability => {
            let s = file.stability.unwrap_or_default();
            if s.k_min > s.k_max {
                return Err(semantic("stability.k_min must be <= stability.k_max"));
            }
            if s.k_max - s.k_min > 10_000 {
                return Err(semantic("stability: at most 10001 equilibria per report"));
            }
            wpe_core::stability::boundary_curve(
                &params,
                (s.boundary_sigma[0], s.boundary_sigma[1]),
                s.boundary_points,
            )
            .map_err(|e| semantic(format!("stability.boundary: {e}")))?;
            cfg.stability = Some(s);
        }
        Command::Sweep | Command::Basin | Command::LowmemSweep => {
            let s = file
                .sweep
                .ok_or_else(|| semantic(format!("[sweep] is required by `{command}`")))?;
            match (command, s.plane) {
                (Command::Sweep, Plane::SigmaR | Plane::AB) => {}
                (Command::Basin, Plane::X0V0 | Plane::V0B) => {}
                (Command::LowmemSweep, Plane::AB) => {}
                (_, plane) => {
                    let (a, b) = plane.axis_names();
                    return Err(semantic(format!(
                        "sweep.plane `{a}-{b}` is not valid for `{command}`"
                    )));
                }
            }
            if command == Command::Basin && s.init.rule != InitRule::VelocitySeeded {
                return Err(semantic("sweep.init.rule must be `velocity-seeded` for `basin`"));
            }
            if command == Command::LowmemSweep && s.init.rule == InitRule::FreeWalking {
                return Err(semantic("sweep.init.rule `free-walking` is not defined for `lowmem-sweep`"));
            }
            let spec = SweepSpec {
                plane: s.plane,
                fixed: params,
                axis1: s.axis1,
                axis2: s.axis2,
                init: s.init,
                integrator: cfg.integrator,
                classifier: cfg.classifier,
                compute_lle: s.compute_lle,
            };
            spec.validate().map_err(core_semantic)?;
            cfg.sweep = Some(spec);
        }
        Command::VelocityCurve => {
            let v = file
                .velocity_curve
                .ok_or_else(|| semantic("[velocity_curve] is required by `velocity-curve`"))?;
            if v.b.n < 2 || !(v.b.min > 0.0 && v.b.max > v.b.min && v.b.max.is_finite()) {
                return Err(semantic("velocity_curve.B must have 0 < min < max and n >= 2"));
            }
            if v.v0.is_empty() || v.v0.iter().any(|x| !x.is_finite()) {
                return Err(semantic("velocity_curve.X0 must be a non-empty list of finite values"));
            }
            cfg.velocity_curve = Some(v);
        }
    }
    Ok(cfg)
}

impl RunConfig {
    fn to_file(&self) -> ConfigFile {
        let p = self.params;
        ConfigFile {
            command: Some(self.command),
            output: Some(self.output_path.clone()),
            workers: Some(self.workers),
            params: PartialParams {
                sigma: Some(p.sigma()),
                r: Some(p.r()),
                a: Some(p.a()),
                b: Some(p.b()),
            },
            integrator: self.integrator,
            classifier: self.classifier,
            initial: self.initial,
            stability: self.stability,
            sweep: self.sweep.as_ref().map(|s| SweepSection {
                plane: s.plane,
                axis1: s.axis1,
                axis2: s.axis2,
                init: s.init,
                compute_lle: s.compute_lle,
            }),
            velocity_curve: self.velocity_curve.clone(),
        }
    }

    /// Complete TOML form; `parse_config` of the result gives back `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serializes")
    }

    /// JSON form used in provenance sidecars.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_file()).expect("config serializes")
    }
}

/// Annotated default config for `command`.
pub fn default_config_text(command: Command) -> &'static str {
    match command {
        Command::Simulate => include_str!("defaults/simulate.toml"),
        Command::Stability => include_str!("defaults/stability.toml"),
        Command::Sweep => include_str!("defaults/sweep.toml"),
        Command::Basin => include_str!("defaults/basin.toml"),
        Command::VelocityCurve => include_str!("defaults/velocity-curve.toml"),
        Command::LowmemSweep => include_str!("defaults/lowmem-sweep.toml"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        parse_config(&format!("workers = 1\n{text}"))
    }

    #[test]
    fn minimal_simulate_fills_defaults() {
        let cfg = parse("command = \"simulate\"\n[params]\nsigma = 10\nr = 10\nA = 1\nB = 5\n").unwrap();
        assert_eq!(cfg.integrator.t_end, 2000.0);
        assert_eq!(cfg.integrator, IntegratorConfig::default());
        assert_eq!(cfg.classifier, ClassifierConfig::default());
        assert_eq!(cfg.initial, Some(default_init()));
        assert_eq!(cfg.output_path, PathBuf::from("simulate.csv"));
    }

    #[test]
    fn zero_wavelength_ratio_is_rejected() {
        let err = parse("command = \"simulate\"\n[params]\nsigma = 10\nr = 10\nA = 1\nB = 0\n").unwrap_err();
        assert!(err.to_string().contains("params.B must be > 0"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_config("command = \"simulate\"\n[params]\nsigma = = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse("command = \"simulate\"\n[params]\nsigma = 10\nr = 10\nA = 1\nB = 5\nC = 1\n").unwrap_err();
        assert!(err.to_string().contains("unknown field `C`"), "{err}");
        let err = parse("command = \"simulate\"\n[params]\nsigma = 10\nr = 10\nA = 1\nB = 5\n[integrator]\nrtol = 1\n").unwrap_err();
        assert!(err.to_string().contains("rtol"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let err = parse("command = \"simulate\"\n[params]\nsigma = 10\nr = 10\nA = 1\nB = 5\n[integrator]\nrel_tol = -1\n").unwrap_err();
        assert!(err.to_string().contains("integrator.rel_tol must be > 0"), "{err}");
        let err = parse("command = \"simulate\"\n[params]\nsigma = 10\nr = 10\nA = 1\n").unwrap_err();
        assert!(err.to_string().contains("params.B is required"), "{err}");
    }

    #[test]
    fn sigma_r_sweep_may_omit_swept_params() {
        let cfg = parse(
            "command = \"sweep\"\n[params]\nA = 1\nB = 5\n[sweep]\nplane = \"sigma-r\"\n\
             axis1 = { min = 0.5, max = 25, n = 201 }\naxis2 = { min = 0.5, max = 25, n = 201 }\n\
             init = { rule = \"trough-rest\" }\n",
        )
        .unwrap();
        let s = cfg.sweep.unwrap();
        assert_eq!(s.plane, Plane::SigmaR);
        assert_eq!((s.fixed.a(), s.fixed.b()), (1.0, 5.0));
        assert_eq!(s.init.rule, InitRule::TroughRest);
    }

    #[test]
    fn command_must_match_file() {
        let text = "command = \"simulate\"\nworkers = 1\n[params]\nsigma = 10\nr = 10\nA = 1\nB = 5\n";
        assert!(parse_config_for(text, Some(Command::Simulate)).is_ok());
        assert!(parse_config_for(text, Some(Command::Stability)).is_err());
        assert!(parse_config("[params]\nsigma = 1\n").is_err());
    }

    #[test]
    fn sections_must_fit_the_command() {
        let base = "[params]\nsigma = 10\nr = 10\nA = 1\nB = 5\n";
        assert!(parse(&format!("command = \"simulate\"\n{base}[stability]\nk_min = 0\n")).is_err());
        assert!(parse(&format!("command = \"sweep\"\n{base}")).is_err());
        let basin = "[sweep]\nplane = \"sigma-r\"\naxis1 = { min = 1, max = 2, n = 2 }\naxis2 = { min = 1, max = 2, n = 2 }\n";
        assert!(parse(&format!("command = \"basin\"\n{base}{basin}")).is_err());
    }

    #[test]
    fn default_templates_parse() {
        for c in Command::ALL {
            let cfg = parse_config_for(default_config_text(c), Some(c)).unwrap_or_else(|e| panic!("{c}: {e}"));
            assert_eq!(cfg.command, c);
        }
    }

    #[test]
    fn round_trip() {
        for c in Command::ALL {
            let cfg = parse_config_for(default_config_text(c), Some(c)).unwrap();
            let again = parse_config(&cfg.to_toml()).unwrap();
            assert_eq!(again, cfg, "{c}");
        }
    }
}
