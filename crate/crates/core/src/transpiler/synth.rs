//! Single-qubit synthesis into a device's native rotations, and fusion of
//! single-qubit runs.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::calibration::DeviceModel;
use crate::circuit::{gate_matrix, Circuit, GateKind, Instruction, Op};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

const ANGLE_TOL: f64 = 1e-10;
const MATCH_TOL: f64 = 1e-9;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(t: f64) -> f64 {
    let mut r = t.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

fn is_zero_angle(t: f64) -> bool {
    wrap_angle(t).abs() < ANGLE_TOL
}

/// `(θ, φ, λ)` with `u ≅ RZ(φ)·RY(θ)·RZ(λ)` up to global phase, `θ ∈ [0, π]`.
pub fn zyz_angles(u: &ComplexMatrix) -> (f64, f64, f64) {
    let (a, b, c, d) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let theta = 2.0 * c.norm().atan2(a.norm());
    if c.norm() < 1e-12 {
        (0.0, wrap_angle(d.arg() - a.arg()), 0.0)
    } else if a.norm() < 1e-12 {
        (PI, wrap_angle(c.arg() - (-b).arg()), 0.0)
    } else {
        let phi = c.arg() - a.arg();
        let lambda = d.arg() - c.arg();
        (theta, wrap_angle(phi), wrap_angle(lambda))
    }
}

fn unitary_of(seq: &[GateKind]) -> ComplexMatrix {
    seq.iter()
        .fold(ComplexMatrix::identity(2), |acc, k| &gate_matrix(k) * &acc)
}

fn rz_if_nonzero(out: &mut Vec<GateKind>, t: f64) {
    if !is_zero_angle(t) {
        out.push(GateKind::RZ(wrap_angle(t)));
    }
}

/// Native single-qubit sequence (in time order) equal to `u` up to global
/// phase. Tries the shortest forms first and verifies each numerically.
pub fn synthesize_single(u: &ComplexMatrix, device: &DeviceModel) -> Result<Vec<GateKind>> {
    let has = |name: &str| device.native_single.iter().any(|g| g == name);
    let mut candidates: Vec<Vec<GateKind>> = vec![vec![]];
    let (theta, phi, lambda) = zyz_angles(u);

    if has("rz") {
        let mut seq = Vec::new();
        rz_if_nonzero(&mut seq, phi + lambda);
        candidates.push(seq);
    }
    for (name, kind) in [
        ("x", GateKind::X),
        ("sx", GateKind::SX),
        ("h", GateKind::H),
        ("z", GateKind::Z),
    ] {
        if has(name) {
            candidates.push(vec![kind]);
        }
    }
    for t in [theta, -theta] {
        if has("rx") {
            candidates.push(vec![GateKind::RX(t)]);
        }
        if has("ry") {
            candidates.push(vec![GateKind::RY(t)]);
        }
    }
    if has("rz") {
        if has("x") {
            // RY(π) = X·Z, Z ≅ RZ(π)
            let mut seq = Vec::new();
            rz_if_nonzero(&mut seq, lambda + PI);
            seq.push(GateKind::X);
            rz_if_nonzero(&mut seq, phi);
            candidates.push(seq);
        }
        if has("sx") {
            // RY(π/2) ≅ RZ(π/2)·SX·RZ(−π/2)
            let mut seq = Vec::new();
            rz_if_nonzero(&mut seq, lambda - FRAC_PI_2);
            seq.push(GateKind::SX);
            rz_if_nonzero(&mut seq, phi + FRAC_PI_2);
            candidates.push(seq);

            let mut seq = Vec::new();
            rz_if_nonzero(&mut seq, lambda);
            seq.push(GateKind::SX);
            rz_if_nonzero(&mut seq, theta + PI);
            seq.push(GateKind::SX);
            rz_if_nonzero(&mut seq, phi + PI);
            candidates.push(seq);
        }
        if has("ry") {
            let mut seq = Vec::new();
            rz_if_nonzero(&mut seq, lambda);
            seq.push(GateKind::RY(theta));
            rz_if_nonzero(&mut seq, phi);
            candidates.push(seq);
        }
        if has("rx") {
            // RY(θ) = RZ(π/2)·RX(θ)·RZ(−π/2)
            let mut seq = Vec::new();
            rz_if_nonzero(&mut seq, lambda - FRAC_PI_2);
            seq.push(GateKind::RX(theta));
            rz_if_nonzero(&mut seq, phi + FRAC_PI_2);
            candidates.push(seq);
        }
    }

    candidates
        .into_iter()
        .find(|seq| unitary_of(seq).equal_up_to_phase(u, MATCH_TOL))
        .ok_or_else(|| Error::UnsupportedGate {
            gate: "single-qubit unitary".into(),
            device: device.name.clone(),
        })
}

/// Replaces every maximal run of unconditioned single-qubit gates on a
/// qubit by its synthesized native form. Barriers, measurements, injected
/// errors and conditioned gates end a run.
pub fn fuse_single_qubit_runs(c: &Circuit, device: &DeviceModel) -> Result<Circuit> {
    let n = c.n_qubits();
    let mut pending: Vec<Option<ComplexMatrix>> = vec![None; n];
    let mut out = Vec::with_capacity(c.len());

    let flush = |q: usize, pending: &mut Vec<Option<ComplexMatrix>>, out: &mut Vec<Instruction>| -> Result<()> {
        if let Some(u) = pending[q].take() {
            for kind in synthesize_single(&u, device)? {
                out.push(Instruction::gate(kind, &[q]));
            }
        }
        Ok(())
    };

    for inst in c.instructions() {
        match (&inst.op, inst.condition) {
            (Op::Gate(k), None) if k.arity() == 1 => {
                let q = inst.qubits[0];
                let u = gate_matrix(k);
                pending[q] = Some(match pending[q].take() {
                    Some(acc) => &u * &acc,
                    None => u,
                });
            }
            _ => {
                for &q in &inst.qubits {
                    flush(q, &mut pending, &mut out)?;
                }
                out.push(inst.clone());
            }
        }
    }
    for q in 0..n {
        flush(q, &mut pending, &mut out)?;
    }
    Ok(Circuit::from_parts_unchecked(n, c.n_clbits(), out))
}
