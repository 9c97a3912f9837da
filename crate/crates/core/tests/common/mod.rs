#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use qecbench::calibration::{build_noise_model, presets, DeviceModel, NoiseModel};
use qecbench::circuit::{Circuit, GateKind};
use qecbench::codes::{CodeKind, Recovery};
use qecbench::simulator::{run, ExecutionOptions};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Platform {
    pub device: DeviceModel,
    pub noise: NoiseModel,
}

fn load(name: &str) -> Platform {
    let device = presets::builtin(name).expect("built-in preset");
    let noise = build_noise_model(&device).expect("preset calibrations are valid");
    Platform { device, noise }
}

pub fn falcon() -> &'static Platform {
    static P: OnceLock<Platform> = OnceLock::new();
    P.get_or_init(|| load(presets::FALCON))
}

pub fn nv() -> &'static Platform {
    static P: OnceLock<Platform> = OnceLock::new();
    P.get_or_init(|| load(presets::NV_CENTER))
}

pub const CODE_VARIANTS: [(CodeKind, Recovery); 4] = [
    (CodeKind::BitFlip, Recovery::PostProcessing),
    (CodeKind::BitFlip, Recovery::Unitary),
    (CodeKind::PhaseFlip, Recovery::PostProcessing),
    (CodeKind::PhaseFlip, Recovery::Unitary),
];

pub fn noiseless(c: &Circuit) -> BTreeMap<u64, f64> {
    run(c, &ExecutionOptions::exact(None)).unwrap().distribution()
}

/// Largest absolute difference over the union of outcomes.
pub fn max_diff(a: &BTreeMap<u64, f64>, b: &BTreeMap<u64, f64>) -> f64 {
    a.keys()
        .chain(b.keys())
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}

fn distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut qs: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        qs.swap(i, j);
    }
    qs.truncate(k);
    qs
}

/// Random circuit on `n` qubits ending with a measurement of every qubit.
pub fn random_circuit(seed: u64, n: usize, depth: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n, n);
    for _ in 0..depth {
        let theta = rng.random_range(-3.2..3.2);
        let (kind, arity) = match rng.random_range(0..11) {
            0 => (GateKind::H, 1),
            1 => (GateKind::X, 1),
            2 => (GateKind::SX, 1),
            3 => (GateKind::RX(theta), 1),
            4 => (GateKind::RY(theta), 1),
            5 => (GateKind::RZ(theta), 1),
            6 | 7 => (GateKind::CNOT, 2),
            8 => (GateKind::CZ, 2),
            9 => (GateKind::Swap, 2),
            _ => (GateKind::CCZ, 3),
        };
        let qs = distinct(&mut rng, n, arity);
        c.gate(kind, &qs).unwrap();
    }
    for q in 0..n {
        c.measure(q, q).unwrap();
    }
    c
}
