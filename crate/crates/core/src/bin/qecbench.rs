use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qecbench::bench::{self, ExperimentConfig, Format};
use qecbench::calibration::{build_noise_model, presets, resolve_device, serialize_device};
use qecbench::circuit::{parse_circuit, Circuit};
use qecbench::codes::{build_code_circuit, CodeKind, CodeSpec, InputState, Recovery};
use qecbench::simulator::{run, ExecutionOptions, ShotResult};
use qecbench::transpiler::{transpile, validate_native};
use qecbench::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qecbench",
    version,
    about = "Transpile, simulate and benchmark small repetition codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

impl From<TableFormat> for Format {
    fn from(f: TableFormat) -> Self {
        match f {
            TableFormat::Csv => Format::Csv,
            TableFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Map a circuit file onto a device; writes the placed circuit and a report.
    Transpile {
        circuit: PathBuf,
        /// Preset name or device file.
        #[arg(long)]
        device: String,
        /// Destination of the transpiled circuit (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Output distribution of a circuit file, exact or sampled.
    Simulate {
        circuit: PathBuf,
        /// Apply this device's noise model; the circuit must already be placed.
        #[arg(long)]
        device: Option<String>,
        /// Transpile onto `--device` first.
        #[arg(long, requires = "device")]
        transpile: bool,
        /// 0 prints exact probabilities.
        #[arg(long, default_value_t = 0)]
        shots: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep described by a TOML experiment file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the configured platforms (repeatable).
        #[arg(long)]
        device: Vec<String>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<TableFormat>,
        /// Overrides the configured output path; `-` writes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List device presets, or print one as a device file.
    Presets {
        /// Print this preset in device-file form.
        #[arg(long)]
        device: Option<String>,
    },
    /// Write the virtual circuit of a repetition code.
    Code {
        #[arg(long, value_parser = parse_kind)]
        kind: CodeKind,
        #[arg(long, value_parser = parse_recovery, default_value = "post-processing")]
        recovery: Recovery,
        #[arg(long, value_parser = parse_input, default_value = "zero")]
        input: InputState,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(json!(s)).map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<CodeKind, String> {
    parse_enum(s)
}

fn parse_recovery(s: &str) -> std::result::Result<Recovery, String> {
    parse_enum(s)
}

fn parse_input(s: &str) -> std::result::Result<InputState, String> {
    parse_enum(s)
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    parse_circuit(&text)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) if p != Path::new("-") => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::Io {
                    path: parent.into(),
                    source: e,
                })?;
            }
            std::fs::write(p, bytes).map_err(|e| Error::Io {
                path: p.into(),
                source: e,
            })
        }
        _ => std::io::stdout().write_all(bytes).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn cmd_transpile(circuit: &Path, device: &str, out: Option<&Path>, format: ReportFormat) -> Result<()> {
    let c = read_circuit(circuit)?;
    let dev = resolve_device(device)?;
    let noise = build_noise_model(&dev)?;
    let t = transpile(&c, &dev, &noise)?;
    write_output(out, t.to_text(&dev.name).as_bytes())?;

    let report = match format {
        ReportFormat::Json => {
            let v = json!({
                "device": dev.name,
                "layout": t.layout,
                "final_layout": t.final_layout,
                "swaps": t.swaps_inserted,
                "multi_qubit_gates": t.multi_qubit_gates,
                "gate_counts": t.gate_counts,
                "p_av": t.p_av,
                "layouts_considered": t.layouts_considered,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("report serializes"))
        }
        ReportFormat::Text => {
            let counts: Vec<String> = t.gate_counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!(
                "device: {}\nlayout: {:?}\nfinal layout: {:?}\nswaps: {}\nCNOT-equivalents: {}\ngates: {}\np_av: {:.6}\nlayouts considered: {}\n",
                dev.name,
                t.layout,
                t.final_layout,
                t.swaps_inserted,
                t.multi_qubit_gates,
                counts.join(" "),
                t.p_av,
                t.layouts_considered
            )
        }
    };
    // keep stdout clean when it carries the circuit
    if out.is_some_and(|p| p != Path::new("-")) {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    Ok(())
}

fn distribution_table(r: &ShotResult, format: TableFormat) -> Result<Vec<u8>> {
    let dist = r.distribution();
    let counts = match r {
        ShotResult::Counts { counts, .. } => Some(counts),
        ShotResult::Exact { .. } => None,
    };
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Execution(format!("csv output: {e}"));
            w.write_record(["outcome", "probability", "count"]).map_err(csv_err)?;
            for (&k, &p) in &dist {
                let count = counts.map(|c| c[&k].to_string()).unwrap_or_default();
                w.write_record([r.bitstring(k), p.to_string(), count])
                    .map_err(csv_err)?;
            }
            w.into_inner().map_err(|e| Error::Execution(format!("csv output: {e}")))
        }
        TableFormat::Json => {
            let outcomes: Vec<_> = dist
                .iter()
                .map(|(&k, &p)| {
                    let mut o = json!({ "outcome": r.bitstring(k), "probability": p });
                    if let Some(c) = counts {
                        o["count"] = json!(c[&k]);
                    }
                    o
                })
                .collect();
            let mut v = json!({
                "mode": if r.is_exact() { "exact" } else { "counts" },
                "n_clbits": r.n_clbits(),
                "outcomes": outcomes,
            });
            if let ShotResult::Counts { shots, .. } = r {
                v["shots"] = json!(shots);
            }
            let mut s = serde_json::to_string_pretty(&v).expect("distribution serializes");
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    circuit: &Path,
    device: Option<&str>,
    do_transpile: bool,
    shots: usize,
    seed: u64,
    format: TableFormat,
    out: Option<&Path>,
) -> Result<()> {
    let mut c = read_circuit(circuit)?;
    let noise = match device {
        Some(name) => {
            let dev = resolve_device(name)?;
            let noise = build_noise_model(&dev)?;
            if do_transpile {
                c = transpile(&c, &dev, &noise)?.circuit;
            } else {
                validate_native(&c, &dev)
                    .map_err(|e| Error::Config(format!("{e}; pass --transpile or transpile the circuit first")))?;
            }
            Some(noise)
        }
        None => None,
    };
    let r = run(&c, &ExecutionOptions::sampled(shots, seed, noise.as_ref()))?;
    write_output(out, &distribution_table(&r, format)?)
}

fn cmd_bench(
    config: &Path,
    devices: Vec<String>,
    shots: Option<usize>,
    seed: Option<u64>,
    format: Option<TableFormat>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if !devices.is_empty() {
        cfg.devices = devices;
    }
    if let Some(s) = shots {
        cfg.shots = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(f) = format {
        cfg.format = f.into();
    }
    if out.is_some() {
        cfg.output = out;
    }
    let result = bench::run_experiment(&cfg)?;
    match cfg.output.as_deref().filter(|p| *p != Path::new("-")) {
        Some(path) => {
            bench::emit(&result, cfg.format, path)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), path.display());
            Ok(())
        }
        None => write_output(None, &bench::render(&result, cfg.format)?),
    }
}

fn cmd_presets(device: Option<&str>) -> Result<()> {
    if let Some(name) = device {
        let dev = resolve_device(name)?;
        print!("{}", serialize_device(&dev));
        return Ok(());
    }
    for name in presets::available_presets() {
        let dev = resolve_device(&name)?;
        println!("{name}\t{} qubits\t{} couplings", dev.n_qubits, dev.edges.len());
    }
    if let Some(dir) = std::env::var_os(presets::PRESET_DIR_ENV) {
        eprintln!("{} = {}", presets::PRESET_DIR_ENV, PathBuf::from(dir).display());
    }
    Ok(())
}

fn cmd_code(kind: CodeKind, recovery: Recovery, input: InputState, out: Option<&Path>) -> Result<()> {
    let c = build_code_circuit(&CodeSpec::new(kind, recovery).with_input(input))?;
    write_output(out, c.to_string().as_bytes())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Transpile {
            circuit,
            device,
            out,
            format,
        } => cmd_transpile(&circuit, &device, out.as_deref(), format),
        Command::Simulate {
            circuit,
            device,
            transpile,
            shots,
            seed,
            format,
            out,
        } => cmd_simulate(
            &circuit,
            device.as_deref(),
            transpile,
            shots,
            seed,
            format,
            out.as_deref(),
        ),
        Command::Bench {
            config,
            device,
            shots,
            seed,
            format,
            out,
        } => cmd_bench(&config, device, shots, seed, format, out),
        Command::Presets { device } => cmd_presets(device.as_deref()),
        Command::Code {
            kind,
            recovery,
            input,
            out,
        } => cmd_code(kind, recovery, input, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
