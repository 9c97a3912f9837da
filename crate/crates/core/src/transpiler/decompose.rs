//! Gate decompositions: routing basis and lowering to native placements.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::calibration::DeviceModel;
use crate::circuit::{Circuit, GateKind, Instruction, Op};
use crate::error::{Error, Result};

fn g(kind: GateKind, qubits: &[usize]) -> Instruction {
    Instruction::gate(kind, qubits)
}

pub fn swap_fragment(a: usize, b: usize) -> Vec<Instruction> {
    vec![
        g(GateKind::CNOT, &[a, b]),
        g(GateKind::CNOT, &[b, a]),
        g(GateKind::CNOT, &[a, b]),
    ]
}

/// CCZ on `(a, b, c)` from six CNOTs and T-type phase rotations.
pub fn ccz_fragment(a: usize, b: usize, c: usize) -> Vec<Instruction> {
    let t = GateKind::RZ(FRAC_PI_4);
    let tdg = GateKind::RZ(-FRAC_PI_4);
    vec![
        g(t, &[b]),
        g(t, &[c]),
        g(GateKind::CNOT, &[b, c]),
        g(tdg, &[c]),
        g(GateKind::CNOT, &[a, c]),
        g(t, &[c]),
        g(GateKind::CNOT, &[b, c]),
        g(tdg, &[c]),
        g(GateKind::CNOT, &[a, c]),
        g(GateKind::CNOT, &[a, b]),
        g(t, &[a]),
        g(tdg, &[b]),
        g(GateKind::CNOT, &[a, b]),
    ]
}

fn fragment_circuit(n: usize, insts: Vec<Instruction>) -> Circuit {
    let mut c = Circuit::new(n, 0);
    c.extend(insts).expect("fragment indices are in range");
    c
}

/// SWAP as three alternating CNOTs on qubits 0 and 1.
pub fn decompose_swap() -> Circuit {
    fragment_circuit(2, swap_fragment(0, 1))
}

/// CCZ on qubits 0, 1, 2 using six CNOTs.
pub fn decompose_ccz_to_cnot() -> Circuit {
    fragment_circuit(3, ccz_fragment(0, 1, 2))
}

/// CNOT on a coupled pair from the device's controlled rotations: a native
/// `CROT_X(π)` plus a phase fix on the control when the direction allows,
/// otherwise the controlled phase flip conjugated by `RY(∓π/2)` on the
/// target.
pub fn cnot_from_crot_fragment(device: &DeviceModel, control: usize, target: usize) -> Result<Vec<Instruction>> {
    if device.is_native(&GateKind::CrotX(PI), &[control, target]) {
        return Ok(vec![
            g(GateKind::CrotX(PI), &[control, target]),
            g(GateKind::RZ(FRAC_PI_2), &[control]),
        ]);
    }
    if device.is_native(&GateKind::CZ, &[control, target]) {
        return Ok(vec![
            g(GateKind::RY(-FRAC_PI_2), &[target]),
            g(GateKind::CZ, &[control, target]),
            g(GateKind::RY(FRAC_PI_2), &[target]),
        ]);
    }
    Err(Error::Placement(format!(
        "no native controlled rotation on [{control}, {target}] of `{}`",
        device.name
    )))
}

/// [`cnot_from_crot_fragment`] as a circuit over the whole device register.
pub fn cnot_from_crot(device: &DeviceModel, control: usize, target: usize) -> Result<Circuit> {
    let frag = cnot_from_crot_fragment(device, control, target)?;
    let mut c = Circuit::new(device.n_qubits, 0);
    c.extend(frag)?;
    Ok(c)
}

fn can_keep_star(device: &DeviceModel, n_controls: usize) -> bool {
    let name_ok = if n_controls == 2 {
        device.has_native_multi("ccz") || device.has_native_multi("mcz")
    } else {
        device.has_native_multi("mcz")
    };
    name_ok && device.max_star_arity() > n_controls
}

fn unsupported(kind: &GateKind, device: &DeviceModel) -> Error {
    Error::UnsupportedGate {
        gate: kind.to_string(),
        device: device.name.clone(),
    }
}

/// Rewrites into gates the router understands: single-qubit gates, CNOT,
/// CZ, controlled rotations, and multi-controlled phase gates the device
/// runs natively. Conditioned gates are rejected.
pub fn decompose_for_routing(c: &Circuit, device: &DeviceModel) -> Result<Circuit> {
    stage(c, device, false)
}

/// Like [`decompose_for_routing`], but a CCZ the device cannot run natively
/// is kept whole so the router can expand it once its operands sit on a path.
pub fn stage_for_router(c: &Circuit, device: &DeviceModel) -> Result<Circuit> {
    stage(c, device, true)
}

fn stage(c: &Circuit, device: &DeviceModel, keep_ccz: bool) -> Result<Circuit> {
    let mut out = Vec::with_capacity(c.len());
    for inst in c.instructions() {
        let Op::Gate(kind) = &inst.op else {
            out.push(inst.clone());
            continue;
        };
        if inst.condition.is_some() {
            return Err(Error::UnsupportedGate {
                gate: format!("classically conditioned {kind}"),
                device: device.name.clone(),
            });
        }
        expand(kind, &inst.qubits, device, keep_ccz, &mut out)?;
    }
    Ok(Circuit::from_parts_unchecked(c.n_qubits(), c.n_clbits(), out))
}

fn expand(
    kind: &GateKind,
    q: &[usize],
    device: &DeviceModel,
    keep_ccz: bool,
    out: &mut Vec<Instruction>,
) -> Result<()> {
    match *kind {
        GateKind::Swap => out.extend(swap_fragment(q[0], q[1])),
        GateKind::CCX | GateKind::Mcx(_) => {
            let t = *q.last().unwrap();
            let phase = match kind {
                GateKind::CCX => GateKind::CCZ,
                _ => GateKind::Mcz(q.len() - 1),
            };
            out.push(g(GateKind::H, &[t]));
            expand(&phase, q, device, keep_ccz, out)?;
            out.push(g(GateKind::H, &[t]));
        }
        GateKind::Mcz(1) => out.push(g(GateKind::CZ, q)),
        GateKind::CCZ | GateKind::Mcz(2) => {
            if device.native_multi.is_empty() {
                return Err(unsupported(kind, device));
            } else if can_keep_star(device, 2) || keep_ccz {
                out.push(g(GateKind::CCZ, q));
            } else {
                out.extend(ccz_fragment(q[0], q[1], q[2]));
            }
        }
        GateKind::Mcz(n) => {
            if can_keep_star(device, n) {
                out.push(g(GateKind::Mcz(n), q));
            } else {
                return Err(unsupported(kind, device));
            }
        }
        GateKind::CrotX(t) | GateKind::CrotY(t) if !device.has_native_multi(kind.name()) => {
            let (c, tq) = (q[0], q[1]);
            let x_axis = matches!(kind, GateKind::CrotX(_));
            if x_axis {
                out.push(g(GateKind::RZ(FRAC_PI_2), &[tq]));
            }
            out.push(g(GateKind::RY(t / 2.0), &[tq]));
            out.push(g(GateKind::CNOT, &[c, tq]));
            out.push(g(GateKind::RY(-t / 2.0), &[tq]));
            out.push(g(GateKind::CNOT, &[c, tq]));
            if x_axis {
                out.push(g(GateKind::RZ(-FRAC_PI_2), &[tq]));
            }
        }
        _ => out.push(g(*kind, q)),
    }
    Ok(())
}

fn lower_cnot(device: &DeviceModel, c: usize, t: usize, out: &mut Vec<Instruction>) -> Result<()> {
    if device.is_native(&GateKind::CNOT, &[c, t]) {
        out.push(g(GateKind::CNOT, &[c, t]));
    } else if device.is_native(&GateKind::CNOT, &[t, c]) {
        out.extend([
            g(GateKind::H, &[c]),
            g(GateKind::H, &[t]),
            g(GateKind::CNOT, &[t, c]),
            g(GateKind::H, &[c]),
            g(GateKind::H, &[t]),
        ]);
    } else {
        out.extend(cnot_from_crot_fragment(device, c, t)?);
    }
    Ok(())
}

fn lower_gate(kind: &GateKind, q: &[usize], device: &DeviceModel, out: &mut Vec<Instruction>) -> Result<()> {
    if kind.arity() == 1 || device.is_native(kind, q) {
        out.push(g(*kind, q));
        return Ok(());
    }
    match *kind {
        GateKind::CNOT => lower_cnot(device, q[0], q[1], out),
        GateKind::CZ => {
            out.push(g(GateKind::H, &[q[1]]));
            lower_cnot(device, q[0], q[1], out)?;
            out.push(g(GateKind::H, &[q[1]]));
            Ok(())
        }
        GateKind::Swap | GateKind::CrotX(_) | GateKind::CrotY(_) | GateKind::CCX | GateKind::Mcx(_) => {
            let mut staged = Vec::new();
            expand(kind, q, device, false, &mut staged)?;
            if staged.len() == 1 && staged[0].gate_kind() == Some(kind) {
                return Err(Error::Placement(format!(
                    "{kind} on {q:?} is not a native placement of `{}`",
                    device.name
                )));
            }
            for inst in staged {
                lower_gate(inst.gate_kind().unwrap(), &inst.qubits, device, out)?;
            }
            Ok(())
        }
        GateKind::CCZ | GateKind::Mcz(_) => {
            if !can_keep_star(device, q.len() - 1) && q.len() == 3 && !device.native_multi.is_empty() {
                for inst in ccz_fragment(q[0], q[1], q[2]) {
                    lower_gate(inst.gate_kind().unwrap(), &inst.qubits, device, out)?;
                }
                return Ok(());
            }
            if q.len() == 2 {
                return lower_gate(&GateKind::CZ, q, device, out);
            }
            Err(Error::Placement(format!(
                "{kind} on {q:?} is not a native placement of `{}`",
                device.name
            )))
        }
        _ => Err(unsupported(kind, device)),
    }
}

/// Lowers a circuit whose multi-qubit gates already sit on coupled
/// physical qubits into native gates only.
pub fn decompose_to_native(c: &Circuit, device: &DeviceModel) -> Result<Circuit> {
    let staged = decompose_for_routing(c, device)?;
    let lowered = lower_placed(&staged, device)?;
    super::synth::fuse_single_qubit_runs(&lowered, device)
}

/// Lowers multi-qubit gates of a placed circuit; single-qubit gates are
/// left for synthesis.
pub(crate) fn lower_placed(c: &Circuit, device: &DeviceModel) -> Result<Circuit> {
    let mut out = Vec::with_capacity(c.len());
    for inst in c.instructions() {
        match &inst.op {
            Op::Gate(kind) if inst.condition.is_none() => lower_gate(kind, &inst.qubits, device, &mut out)?,
            Op::Gate(kind) => {
                return Err(Error::UnsupportedGate {
                    gate: format!("classically conditioned {kind}"),
                    device: device.name.clone(),
                })
            }
            _ => out.push(inst.clone()),
        }
    }
    Ok(Circuit::from_parts_unchecked(c.n_qubits(), c.n_clbits(), out))
}
