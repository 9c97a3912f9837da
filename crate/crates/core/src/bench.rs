//! Experiment configuration, parameter sweeps and tabular output.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{build_noise_model, presets, resolve_device, DeviceModel, NoiseModel};
use crate::codes::{build_code_circuit, evaluate_code, CodeSpec, InputState};
use crate::error::{Error, Result};
use crate::simulator::ExecutionOptions;
use crate::transpiler::{score_layout, transpile, TranspileResult};

pub const DEFAULT_T2: [f64; 6] = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6];
pub const DEFAULT_ALPHA: [f64; 3] = [0.5, 1.0, 10.0];
pub const DEFAULT_DEPOL: [f64; 6] = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05];
/// Shared duration (ms) of every non-virtual gate in a t2 sweep.
pub const DEFAULT_SWEEP_GATE_TIME: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("format: unknown `{other}` (csv, json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Sweep {
    /// Each platform with its own calibrated noise.
    #[default]
    None,
    /// Damping only: t2 = value, t1 = alpha * t2, zero gate and SPAM errors.
    T2 {
        #[serde(default = "default_t2")]
        values: Vec<f64>,
        #[serde(default = "default_alpha")]
        alphas: Vec<f64>,
    },
    /// Uniform depolarizing strength on every gate, no damping, no SPAM.
    Depol {
        #[serde(default = "default_depol")]
        values: Vec<f64>,
    },
}

fn default_t2() -> Vec<f64> {
    DEFAULT_T2.to_vec()
}

fn default_alpha() -> Vec<f64> {
    DEFAULT_ALPHA.to_vec()
}

fn default_depol() -> Vec<f64> {
    DEFAULT_DEPOL.to_vec()
}

fn default_devices() -> Vec<String> {
    presets::builtin_names().iter().map(|s| s.to_string()).collect()
}

fn default_seed() -> u64 {
    1
}

fn default_gate_time() -> f64 {
    DEFAULT_SWEEP_GATE_TIME
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Preset names or device file paths, one platform each.
    #[serde(default = "default_devices")]
    pub devices: Vec<String>,
    pub code: CodeSpec,
    #[serde(default)]
    pub sweep: Sweep,
    /// 0 selects exact probabilities.
    #[serde(default)]
    pub shots: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_gate_time")]
    pub gate_time: f64,
    /// Mean over the six Pauli eigenstates instead of `code.input_state`.
    #[serde(default = "default_true")]
    pub average_inputs: bool,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(code: CodeSpec, sweep: Sweep) -> Self {
        Self {
            devices: default_devices(),
            code,
            sweep,
            shots: 0,
            seed: default_seed(),
            output: None,
            format: Format::Csv,
            gate_time: DEFAULT_SWEEP_GATE_TIME,
            average_inputs: true,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.devices.is_empty() {
            return Err(Error::Config("devices: at least one platform required".into()));
        }
        self.code.validate()?;
        if !(self.gate_time.is_finite() && self.gate_time > 0.0) {
            return Err(Error::Config(format!("gate_time: {} must be positive", self.gate_time)));
        }
        let positive = |field: &str, v: &[f64]| match v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            Some(x) => Err(Error::Config(format!("sweep.{field}: {x} must be positive"))),
            None => Ok(()),
        };
        match &self.sweep {
            Sweep::None => Ok(()),
            Sweep::T2 { values, alphas } => {
                positive("values", values)?;
                positive("alphas", alphas)
            }
            Sweep::Depol { values } => match values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                Some(p) => Err(Error::Config(format!("sweep.values: {p} is not a probability"))),
                None => Ok(()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: String,
    pub value: Option<f64>,
    pub alpha: Option<f64>,
    pub platform: String,
    pub logical_error_rate: f64,
    pub p_av: f64,
    pub cnot_count: usize,
    pub total_ops: usize,
}

pub const COLUMNS: [&str; 8] = [
    "sweep_var",
    "value",
    "alpha",
    "platform",
    "logical_error_rate",
    "p_av",
    "cnot_count",
    "total_ops",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn platform_rows<'a>(&'a self, platform: &'a str) -> impl Iterator<Item = &'a SweepRow> {
        self.rows.iter().filter(move |r| r.platform == platform)
    }
}

/// Device with every qubit at `(t1, t2)`, error-free gates of one shared
/// duration and no SPAM.
pub fn damping_only_device(base: &DeviceModel, t1: f64, t2: f64, gate_time: f64) -> DeviceModel {
    let mut d = base.clone();
    for q in &mut d.qubits {
        q.t1 = t1;
        q.t2 = t2;
        q.p_spam = 0.0;
        q.single_gate_error = 0.0;
        q.single_gate_time = gate_time;
    }
    for e in &mut d.edge_cal {
        e.two_gate_error = 0.0;
        e.two_gate_time = gate_time;
    }
    if let Some(s) = &mut d.star {
        s.gate_error = 0.0;
        s.gate_time = gate_time;
    }
    d
}

struct Platform {
    name: String,
    device: DeviceModel,
    calibrated: NoiseModel,
    /// One transpilation per evaluated input state.
    variants: Vec<(CodeSpec, TranspileResult)>,
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    value: Option<f64>,
    alpha: Option<f64>,
}

impl Sweep {
    fn var(&self) -> &'static str {
        match self {
            Sweep::None => "none",
            Sweep::T2 { .. } => "t2",
            Sweep::Depol { .. } => "p_depol",
        }
    }

    fn grid(&self) -> Vec<GridPoint> {
        match self {
            Sweep::None => vec![GridPoint {
                value: None,
                alpha: None,
            }],
            Sweep::T2 { values, alphas } => alphas
                .iter()
                .flat_map(|&a| {
                    values.iter().map(move |&v| GridPoint {
                        value: Some(v),
                        alpha: Some(a),
                    })
                })
                .collect(),
            Sweep::Depol { values } => values
                .iter()
                .map(|&v| GridPoint {
                    value: Some(v),
                    alpha: None,
                })
                .collect(),
        }
    }
}

fn noise_at(cfg: &ExperimentConfig, p: &Platform, point: GridPoint) -> Result<NoiseModel> {
    match (&cfg.sweep, point.value) {
        (Sweep::T2 { .. }, Some(t2)) => {
            let t1 = point.alpha.unwrap_or(1.0) * t2;
            build_noise_model(&damping_only_device(&p.device, t1, t2, cfg.gate_time))
        }
        (Sweep::Depol { .. }, Some(pd)) => NoiseModel::uniform_depolarizing(&p.device, pd),
        _ => Ok(p.calibrated.clone()),
    }
}

fn evaluate_point(cfg: &ExperimentConfig, p: &Platform, point: GridPoint) -> Result<SweepRow> {
    let noise = noise_at(cfg, p, point)?;
    let opts = ExecutionOptions::sampled(cfg.shots, cfg.seed, Some(&noise));
    let n = p.variants.len() as f64;
    let (mut rate, mut p_av, mut cnots, mut ops) = (0.0, 0.0, 0, 0);
    for (spec, t) in &p.variants {
        rate += evaluate_code(&t.circuit, spec, &opts)?.logical_error_rate / n;
        p_av += score_layout(&t.circuit, &noise)? / n;
        cnots = cnots.max(t.multi_qubit_gates);
        ops = ops.max(t.gate_counts.values().sum());
    }
    Ok(SweepRow {
        sweep_var: cfg.sweep.var().to_string(),
        value: point.value,
        alpha: point.alpha,
        platform: p.name.clone(),
        logical_error_rate: rate,
        p_av,
        cnot_count: cnots,
        total_ops: ops,
    })
}

/// Input states evaluated per grid point.
pub fn evaluated_specs(cfg: &ExperimentConfig) -> Vec<CodeSpec> {
    if cfg.average_inputs {
        InputState::PAULI
            .iter()
            .map(|s| cfg.code.clone().with_input(*s))
            .collect()
    } else {
        vec![cfg.code.clone()]
    }
}

/// Transpiles the code per platform (and per input state) against the
/// calibrated noise, then evaluates every grid point. Rows come out
/// grid-major, platforms in configuration order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let specs = evaluated_specs(cfg);
    let platforms: Vec<Platform> = cfg
        .devices
        .iter()
        .map(|name| {
            let device = resolve_device(name)?;
            let calibrated = build_noise_model(&device)?;
            let variants = specs
                .iter()
                .map(|spec| {
                    let t = transpile(&build_code_circuit(spec)?, &device, &calibrated)?;
                    log::info!(
                        "{} {:?}: layout {:?}, {} multi-qubit gates",
                        device.name,
                        spec.input_state,
                        t.layout,
                        t.multi_qubit_gates
                    );
                    Ok((spec.clone(), t))
                })
                .collect::<Result<_>>()?;
            Ok(Platform {
                name: device.name.clone(),
                device,
                calibrated,
                variants,
            })
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(GridPoint, &Platform)> = cfg
        .sweep
        .grid()
        .into_iter()
        .flat_map(|pt| platforms.iter().map(move |p| (pt, p)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(pt, p)| evaluate_point(cfg, p, pt))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Execution(format!("csv output: {e}"));
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in &result.rows {
        w.write_record([
            r.sweep_var.clone(),
            fmt_opt(r.value),
            fmt_opt(r.alpha),
            r.platform.clone(),
            r.logical_error_rate.to_string(),
            r.p_av.to_string(),
            r.cnot_count.to_string(),
            r.total_ops.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Execution(format!("csv output: {e}")))
}

pub fn write_json<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, result).map_err(|e| Error::Execution(format!("json output: {e}")))?;
    writeln!(out).map_err(|e| Error::Execution(format!("json output: {e}")))
}

pub fn render(result: &SweepResult, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(result, &mut buf)?,
        Format::Json => write_json(result, &mut buf)?,
    }
    Ok(buf)
}

/// Writes `result` to `path`, creating parent directories.
pub fn emit(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let bytes = render(result, format)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
