//! Lowering of virtual circuits onto device connectivity and native gates.

mod decompose;
mod layout;
mod route;
mod score;
mod synth;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;

pub use decompose::{
    ccz_fragment, cnot_from_crot, cnot_from_crot_fragment, decompose_ccz_to_cnot, decompose_for_routing,
    decompose_swap, decompose_to_native, stage_for_router, swap_fragment,
};
pub use layout::{connected_subsets, enumerate_layouts, interaction_edges, Layout, MAX_VIRTUAL_QUBITS};
pub use route::{route, Routed};
pub use score::score_layout;
pub use synth::{fuse_single_qubit_runs, synthesize_single, wrap_angle, zyz_angles};

use crate::calibration::{DeviceModel, NoiseModel};
use crate::circuit::{
    cancel_adjacent_cnots, cancel_adjacent_self_inverse, count_ops, multi_qubit_count, Circuit, GateKind, Op,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TranspileResult {
    /// Physical circuit over the whole device register, native gates only.
    pub circuit: Circuit,
    pub layout: Layout,
    pub final_layout: Layout,
    pub swaps_inserted: usize,
    pub p_av: f64,
    pub gate_counts: BTreeMap<String, usize>,
    /// Native gates acting on two or more qubits.
    pub multi_qubit_gates: usize,
    pub layouts_considered: usize,
}

impl TranspileResult {
    /// Operations after the first measurement.
    pub fn post_measurement_ops(&self) -> usize {
        post_measurement_ops(&self.circuit)
    }

    /// Text form with a comment header describing the placement.
    pub fn to_text(&self, device: &str) -> String {
        let pairs = |l: &Layout| {
            l.iter()
                .enumerate()
                .map(|(v, p)| format!("{v}:{p}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "# device {device}\n# layout {}\n# final_layout {}\n# swaps {}\n# p_av {}\n{}",
            pairs(&self.layout),
            pairs(&self.final_layout),
            self.swaps_inserted,
            self.p_av,
            self.circuit
        )
    }
}

fn post_measurement_ops(c: &Circuit) -> usize {
    let first = c.instructions().iter().position(|i| matches!(i.op, Op::Measure { .. }));
    first.map_or(0, |at| {
        c.instructions()[at + 1..]
            .iter()
            .filter(|i| !matches!(i.op, Op::Barrier { .. }))
            .count()
    })
}

/// Checks that every gate is a native placement and nothing is
/// classically conditioned.
pub fn validate_native(c: &Circuit, device: &DeviceModel) -> Result<()> {
    if c.n_qubits() > device.n_qubits {
        return Err(Error::Capacity {
            needed: c.n_qubits(),
            available: device.n_qubits,
        });
    }
    for (i, inst) in c.instructions().iter().enumerate() {
        if let Op::Gate(kind) = &inst.op {
            if inst.condition.is_some() {
                return Err(Error::UnsupportedGate {
                    gate: format!("classically conditioned {kind} (instruction {i})"),
                    device: device.name.clone(),
                });
            }
            if !device.is_native(kind, &inst.qubits) {
                return Err(Error::Placement(format!(
                    "instruction {i}: {kind} on {:?} is not native on `{}`",
                    inst.qubits, device.name
                )));
            }
        }
    }
    Ok(())
}

/// Repeats single-qubit fusion and self-inverse cancellation until the
/// circuit stops shrinking.
fn cleanup(c: Circuit, device: &DeviceModel) -> Result<Circuit> {
    let mut c = cancel_adjacent_self_inverse(&fuse_single_qubit_runs(&c, device)?);
    loop {
        let next = cancel_adjacent_self_inverse(&fuse_single_qubit_runs(&c, device)?);
        if next.len() >= c.len() {
            return Ok(c);
        }
        c = next;
    }
}

/// Route, lower and score one layout.
pub fn transpile_with_layout(
    staged: &Circuit,
    layout: &Layout,
    device: &DeviceModel,
    noise: &NoiseModel,
) -> Result<TranspileResult> {
    let routed = route(staged, layout, device)?;
    let expanded = decompose_for_routing(&routed.circuit, device)?;
    let cancelled = cancel_adjacent_cnots(&expanded);
    let lowered = decompose::lower_placed(&cancelled, device)?;
    let circuit = cleanup(lowered, device)?;
    validate_native(&circuit, device)?;
    let p_av = score_layout(&circuit, noise)?;
    Ok(TranspileResult {
        gate_counts: count_ops(&circuit),
        multi_qubit_gates: multi_qubit_count(&circuit),
        circuit,
        layout: layout.clone(),
        final_layout: routed.final_layout,
        swaps_inserted: routed.swaps,
        p_av,
        layouts_considered: 1,
    })
}

const P_AV_TIE: f64 = 1e-12;

fn better(a: &TranspileResult, b: &TranspileResult) -> Ordering {
    if (a.p_av - b.p_av).abs() > P_AV_TIE {
        return a.p_av.total_cmp(&b.p_av);
    }
    a.multi_qubit_gates
        .cmp(&b.multi_qubit_gates)
        .then(a.post_measurement_ops().cmp(&b.post_measurement_ops()))
        .then(a.layout.cmp(&b.layout))
}

/// Full pipeline: decompose, then for every candidate layout route,
/// cancel, lower and score; the lowest `p_av` wins, ties going to fewer
/// multi-qubit gates, fewer operations after the first measurement, then
/// the lexicographically smallest layout.
pub fn transpile(c: &Circuit, device: &DeviceModel, noise: &NoiseModel) -> Result<TranspileResult> {
    if noise.n_qubits() != device.n_qubits {
        return Err(Error::Config(format!(
            "noise model covers {} qubits, device `{}` has {}",
            noise.n_qubits(),
            device.name,
            device.n_qubits
        )));
    }
    let staged = decompose::stage_for_router(c, device)?;
    let layouts = enumerate_layouts(&staged, device)?;
    let results: Vec<Result<TranspileResult>> = layouts
        .par_iter()
        .map(|l| transpile_with_layout(&staged, l, device, noise))
        .collect();
    let mut best: Option<TranspileResult> = None;
    for r in results {
        let r = r?;
        if best.as_ref().is_none_or(|b| better(&r, b) == Ordering::Less) {
            best = Some(r);
        }
    }
    let mut best = best.expect("enumerate_layouts never returns an empty list");
    best.layouts_considered = layouts.len();
    log::debug!(
        "transpiled onto `{}`: layout {:?}, p_av {:.6}, {} layouts",
        device.name,
        best.layout,
        best.p_av,
        layouts.len()
    );
    Ok(best)
}

/// Counts native gates of `kind` (by mnemonic).
pub fn count_kind(c: &Circuit, kind: &GateKind) -> usize {
    c.instructions()
        .iter()
        .filter(|i| i.gate_kind().is_some_and(|k| k.name() == kind.name()))
        .count()
}
