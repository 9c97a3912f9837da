//! C ABI over the qecbench library.
//!
//! Objects cross the boundary as opaque handles created by `qec_*_new`-style
//! constructors and released with the matching `qec_*_free`. Every fallible
//! call returns a [`QecStatus`]; on failure a message for the calling thread
//! is available from [`qec_last_error`]. Strings handed out by the library
//! must be released with [`qec_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qecbench::bench::{self, ExperimentConfig, Format};
use qecbench::calibration::{build_noise_model, load_device, resolve_device, DeviceModel, NoiseModel};
use qecbench::circuit::{parse_circuit, Circuit};
use qecbench::codes::{build_code_circuit, evaluate_code, CodeKind, CodeSpec, InputState, Recovery};
use qecbench::simulator::{run, ExecutionOptions};
use qecbench::transpiler::{transpile, TranspileResult};
use qecbench::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Config = 5,
    UnsupportedGate = 6,
    Routing = 7,
    Capacity = 8,
    Execution = 9,
    Io = 10,
    OutOfRange = 11,
    Panic = 99,
}

pub const QEC_CODE_BIT_FLIP: c_int = 0;
pub const QEC_CODE_PHASE_FLIP: c_int = 1;

pub const QEC_RECOVERY_POST_PROCESSING: c_int = 0;
pub const QEC_RECOVERY_UNITARY: c_int = 1;

pub const QEC_INPUT_ZERO: c_int = 0;
pub const QEC_INPUT_ONE: c_int = 1;
pub const QEC_INPUT_PLUS: c_int = 2;
pub const QEC_INPUT_MINUS: c_int = 3;
pub const QEC_INPUT_PLUS_I: c_int = 4;
pub const QEC_INPUT_MINUS_I: c_int = 5;

pub const QEC_FORMAT_CSV: c_int = 0;
pub const QEC_FORMAT_JSON: c_int = 1;

/// A device description (coupling graph, native gates, calibration).
pub struct QecDevice(DeviceModel);

/// Noise channels fitted to a device's calibration.
pub struct QecNoiseModel(NoiseModel);

/// A circuit, virtual or placed.
pub struct QecCircuit(Circuit);

/// Outcome of a transpilation.
pub struct QecTranspiled(TranspileResult);

/// Outcome probabilities keyed by the classical register value.
pub struct QecDistribution {
    entries: Vec<(u64, f64)>,
    n_clbits: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(QecStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parameter(_) | Error::Shape(_) => QecStatus::InvalidArgument,
            Error::IndexOutOfRange { .. } => QecStatus::OutOfRange,
            Error::Config(_) => QecStatus::Config,
            Error::Parse { .. } => QecStatus::Parse,
            Error::UnsupportedGate { .. } => QecStatus::UnsupportedGate,
            Error::Placement(_) | Error::Routing(_) => QecStatus::Routing,
            Error::Capacity { .. } => QecStatus::Capacity,
            Error::Execution(_) => QecStatus::Execution,
            Error::Io { .. } => QecStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: QecStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, mapping errors and panics to a status and the thread's message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            QecStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            QecStatus::Panic
        }
    }
}

unsafe fn arg_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(QecStatus::NullPointer, format!("{name} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(QecStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn arg_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .map_or_else(|| fail(QecStatus::NullPointer, format!("{name} is null")), Ok)
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return fail(QecStatus::NullPointer, format!("{name} is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    put(out, Box::into_raw(Box::new(value)), "out")
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).or_else(|_| fail(QecStatus::Execution, "output contains a nul byte"))?;
    put(out, c.into_raw(), "out")
}

unsafe fn drop_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn code_spec(kind: c_int, recovery: c_int, input: c_int) -> Result<CodeSpec, Failure> {
    let kind = match kind {
        QEC_CODE_BIT_FLIP => CodeKind::BitFlip,
        QEC_CODE_PHASE_FLIP => CodeKind::PhaseFlip,
        k => return fail(QecStatus::InvalidArgument, format!("unknown code kind {k}")),
    };
    let recovery = match recovery {
        QEC_RECOVERY_POST_PROCESSING => Recovery::PostProcessing,
        QEC_RECOVERY_UNITARY => Recovery::Unitary,
        r => return fail(QecStatus::InvalidArgument, format!("unknown recovery {r}")),
    };
    let input = match usize::try_from(input).ok().and_then(|i| InputState::PAULI.get(i)) {
        Some(s) => *s,
        None => return fail(QecStatus::InvalidArgument, format!("unknown input state {input}")),
    };
    Ok(CodeSpec::new(kind, recovery).with_input(input))
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn qec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Resolves a preset name (searching the preset directory first) or a device
/// file path.
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_device_resolve(name: *const c_char, out: *mut *mut QecDevice) -> QecStatus {
    guard(|| {
        let name = arg_str(name, "name")?;
        put_handle(out, QecDevice(resolve_device(name)?))
    })
}

/// Parses a device description in TOML form.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_device_from_toml(text: *const c_char, out: *mut *mut QecDevice) -> QecStatus {
    guard(|| {
        let text = arg_str(text, "text")?;
        put_handle(out, QecDevice(load_device(text)?))
    })
}

/// # Safety
/// `device` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_device_num_qubits(device: *const QecDevice, out: *mut usize) -> QecStatus {
    guard(|| put(out, arg_ref(device, "device")?.0.n_qubits, "out"))
}

/// # Safety
/// `device` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qec_device_free(device: *mut QecDevice) {
    drop_handle(device)
}

/// Fits the noise model for `device`.
///
/// # Safety
/// `device` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_noise_model_build(device: *const QecDevice, out: *mut *mut QecNoiseModel) -> QecStatus {
    guard(|| {
        let device = arg_ref(device, "device")?;
        put_handle(out, QecNoiseModel(build_noise_model(&device.0)?))
    })
}

/// Average gate fidelity of the single-qubit gate on `qubit`.
///
/// # Safety
/// `noise` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_noise_model_single_fidelity(
    noise: *const QecNoiseModel,
    qubit: usize,
    out: *mut f64,
) -> QecStatus {
    guard(|| {
        let noise = arg_ref(noise, "noise")?;
        match noise.0.single(qubit) {
            Some(g) => put(out, g.fidelity(), "out"),
            None => fail(QecStatus::OutOfRange, format!("qubit {qubit} out of range")),
        }
    })
}

/// # Safety
/// `noise` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qec_noise_model_free(noise: *mut QecNoiseModel) {
    drop_handle(noise)
}

/// Parses the line-oriented circuit text format.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_circuit_parse(text: *const c_char, out: *mut *mut QecCircuit) -> QecStatus {
    guard(|| {
        let text = arg_str(text, "text")?;
        put_handle(out, QecCircuit(parse_circuit(text)?))
    })
}

/// Virtual circuit of a repetition code (`QEC_CODE_*`, `QEC_RECOVERY_*`,
/// `QEC_INPUT_*`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_circuit_code(
    kind: c_int,
    recovery: c_int,
    input: c_int,
    out: *mut *mut QecCircuit,
) -> QecStatus {
    guard(|| {
        let spec = code_spec(kind, recovery, input)?;
        put_handle(out, QecCircuit(build_code_circuit(&spec)?))
    })
}

/// Circuit in text form; release with `qec_string_free`.
///
/// # Safety
/// `circuit` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_circuit_to_text(circuit: *const QecCircuit, out: *mut *mut c_char) -> QecStatus {
    guard(|| put_string(out, arg_ref(circuit, "circuit")?.0.to_string()))
}

/// # Safety
/// `circuit` must be a valid handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_circuit_size(
    circuit: *const QecCircuit,
    n_qubits: *mut usize,
    n_clbits: *mut usize,
) -> QecStatus {
    guard(|| {
        let c = &arg_ref(circuit, "circuit")?.0;
        put(n_qubits, c.n_qubits(), "n_qubits")?;
        put(n_clbits, c.n_clbits(), "n_clbits")
    })
}

/// # Safety
/// `circuit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qec_circuit_free(circuit: *mut QecCircuit) {
    drop_handle(circuit)
}

/// Layout search, routing and lowering onto `device`.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_transpile(
    circuit: *const QecCircuit,
    device: *const QecDevice,
    noise: *const QecNoiseModel,
    out: *mut *mut QecTranspiled,
) -> QecStatus {
    guard(|| {
        let c = arg_ref(circuit, "circuit")?;
        let d = arg_ref(device, "device")?;
        let n = arg_ref(noise, "noise")?;
        put_handle(out, QecTranspiled(transpile(&c.0, &d.0, &n.0)?))
    })
}

/// Copy of the placed circuit.
///
/// # Safety
/// `t` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_transpiled_circuit(t: *const QecTranspiled, out: *mut *mut QecCircuit) -> QecStatus {
    guard(|| put_handle(out, QecCircuit(arg_ref(t, "transpiled")?.0.circuit.clone())))
}

/// # Safety
/// `t` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_transpiled_p_av(t: *const QecTranspiled, out: *mut f64) -> QecStatus {
    guard(|| put(out, arg_ref(t, "transpiled")?.0.p_av, "out"))
}

/// Native gates acting on two or more qubits.
///
/// # Safety
/// `t` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_transpiled_multi_qubit_gates(t: *const QecTranspiled, out: *mut usize) -> QecStatus {
    guard(|| put(out, arg_ref(t, "transpiled")?.0.multi_qubit_gates, "out"))
}

/// Physical qubit of virtual qubit `v` at the start of the circuit.
///
/// # Safety
/// `t` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_transpiled_layout(t: *const QecTranspiled, v: usize, out: *mut usize) -> QecStatus {
    guard(|| {
        let layout = &arg_ref(t, "transpiled")?.0.layout;
        match layout.get(v) {
            Some(&p) => put(out, p, "out"),
            None => fail(QecStatus::OutOfRange, format!("virtual qubit {v} out of range")),
        }
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qec_transpiled_free(t: *mut QecTranspiled) {
    drop_handle(t)
}

/// Runs `circuit`; `noise` may be null for a noiseless run and `shots` = 0
/// gives exact probabilities.
///
/// # Safety
/// `circuit` must be valid, `noise` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qec_simulate(
    circuit: *const QecCircuit,
    noise: *const QecNoiseModel,
    shots: usize,
    seed: u64,
    out: *mut *mut QecDistribution,
) -> QecStatus {
    guard(|| {
        let c = arg_ref(circuit, "circuit")?;
        let noise = noise.as_ref().map(|n| &n.0);
        let r = run(&c.0, &ExecutionOptions::sampled(shots, seed, noise))?;
        put_handle(
            out,
            QecDistribution {
                entries: r.distribution().into_iter().collect(),
                n_clbits: r.n_clbits(),
            },
        )
    })
}

/// Number of outcomes with nonzero weight.
///
/// # Safety
/// `d` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_distribution_len(d: *const QecDistribution, out: *mut usize) -> QecStatus {
    guard(|| put(out, arg_ref(d, "distribution")?.entries.len(), "out"))
}

/// # Safety
/// `d` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_distribution_num_clbits(d: *const QecDistribution, out: *mut usize) -> QecStatus {
    guard(|| put(out, arg_ref(d, "distribution")?.n_clbits, "out"))
}

/// Entry `i` in increasing outcome order; clbit 0 is the least significant
/// bit of `outcome`.
///
/// # Safety
/// `d` must be a valid handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_distribution_get(
    d: *const QecDistribution,
    i: usize,
    outcome: *mut u64,
    probability: *mut f64,
) -> QecStatus {
    guard(|| {
        let d = arg_ref(d, "distribution")?;
        let Some(&(k, p)) = d.entries.get(i) else {
            return fail(QecStatus::OutOfRange, format!("entry {i} of {}", d.entries.len()));
        };
        put(outcome, k, "outcome")?;
        put(probability, p, "probability")
    })
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qec_distribution_free(d: *mut QecDistribution) {
    drop_handle(d)
}

/// Logical error rate of a (typically transpiled) code circuit under a
/// uniformly random correctable error.
///
/// # Safety
/// `circuit` must be valid, `noise` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qec_logical_error_rate(
    circuit: *const QecCircuit,
    kind: c_int,
    recovery: c_int,
    input: c_int,
    noise: *const QecNoiseModel,
    shots: usize,
    seed: u64,
    out: *mut f64,
) -> QecStatus {
    guard(|| {
        let c = arg_ref(circuit, "circuit")?;
        let spec = code_spec(kind, recovery, input)?;
        let noise = noise.as_ref().map(|n| &n.0);
        let r = evaluate_code(&c.0, &spec, &ExecutionOptions::sampled(shots, seed, noise))?;
        put(out, r.logical_error_rate, "out")
    })
}

/// Runs the experiment described by a TOML configuration and returns the
/// table (`QEC_FORMAT_CSV` or `QEC_FORMAT_JSON`); release with
/// `qec_string_free`. The configured output path is ignored.
///
/// # Safety
/// `config` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qec_bench_run(config: *const c_char, format: c_int, out: *mut *mut c_char) -> QecStatus {
    guard(|| {
        let format = match format {
            QEC_FORMAT_CSV => Format::Csv,
            QEC_FORMAT_JSON => Format::Json,
            f => return fail(QecStatus::InvalidArgument, format!("unknown format {f}")),
        };
        let cfg = ExperimentConfig::from_toml(arg_str(config, "config")?)?;
        let bytes = bench::render(&bench::run_experiment(&cfg)?, format)?;
        put_string(out, String::from_utf8(bytes).expect("tables are UTF-8"))
    })
}

/// Writes the experiment table to `path`.
///
/// # Safety
/// Both arguments must be nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn qec_bench_run_to_file(config: *const c_char, path: *const c_char) -> QecStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_toml(arg_str(config, "config")?)?;
        let path = Path::new(arg_str(path, "path")?);
        bench::emit(&bench::run_experiment(&cfg)?, cfg.format, path).map_err(Failure::from)
    })
}
