use std::collections::BTreeMap;

use super::{Circuit, GateKind, Instruction, Op};
use crate::channels::left_multiply_in_place;
use crate::circuit::gate_matrix;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Removes pairs of identical adjacent CNOTs until none remain. Two CNOTs
/// are adjacent when no instruction between them touches either qubit.
pub fn cancel_adjacent_cnots(c: &Circuit) -> Circuit {
    cancel_pairs(c, |k| matches!(k, GateKind::CNOT))
}

/// Like [`cancel_adjacent_cnots`] for every self-inverse multi-qubit gate
/// (CNOT, CZ, CCZ, CCX, multi-controlled X/Z, SWAP).
pub fn cancel_adjacent_self_inverse(c: &Circuit) -> Circuit {
    cancel_pairs(c, |k| {
        matches!(
            k,
            GateKind::CNOT
                | GateKind::CZ
                | GateKind::CCZ
                | GateKind::CCX
                | GateKind::Mcx(_)
                | GateKind::Mcz(_)
                | GateKind::Swap
        )
    })
}

fn cancel_pairs(c: &Circuit, eligible: impl Fn(&GateKind) -> bool) -> Circuit {
    let mut slots: Vec<Option<Instruction>> = c.instructions().iter().cloned().map(Some).collect();
    loop {
        let mut changed = false;
        for i in 0..slots.len() {
            let Some(first) = &slots[i] else { continue };
            if !first.is_unconditioned_gate() || !first.gate_kind().is_some_and(&eligible) {
                continue;
            }
            let next = (i + 1..slots.len()).find(|&j| {
                slots[j]
                    .as_ref()
                    .is_some_and(|inst| first.qubits.iter().any(|&q| inst.touches(q)))
            });
            if let Some(j) = next {
                if slots[j].as_ref().is_some_and(|inst| inst.same_action(first)) {
                    slots[i] = None;
                    slots[j] = None;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Circuit::from_parts_unchecked(c.n_qubits(), c.n_clbits(), slots.into_iter().flatten().collect())
}

/// Gate counts keyed by mnemonic; measurements, resets and injected errors
/// are counted under `measure`, `reset` and `error`. Barriers are skipped.
pub fn count_ops(c: &Circuit) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for inst in c.instructions() {
        let key = match &inst.op {
            Op::Gate(k) => k.name(),
            Op::Measure { .. } => "measure",
            Op::Reset => "reset",
            Op::Error(_) => "error",
            Op::Barrier { .. } => continue,
        };
        *counts.entry(key.to_string()).or_insert(0) += 1;
    }
    counts
}

/// Number of gates acting on two or more qubits.
pub fn multi_qubit_count(c: &Circuit) -> usize {
    multi_qubit_count_in(c.instructions())
}

/// Multi-qubit gates after the barrier labelled `label`; `None` when the
/// barrier is absent.
pub fn multi_qubit_count_after_label(c: &Circuit, label: &str) -> Option<usize> {
    let at = c.find_barrier(label)?;
    Some(multi_qubit_count_in(&c.instructions()[at + 1..]))
}

fn multi_qubit_count_in(insts: &[Instruction]) -> usize {
    insts
        .iter()
        .filter(|i| i.gate_kind().is_some_and(GateKind::is_multi_qubit))
        .count()
}

/// Full unitary of a circuit made only of unconditioned gates, barriers and
/// injected errors.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    let dim = 1usize << c.n_qubits();
    let mut u = ComplexMatrix::identity(dim);
    for inst in c.instructions() {
        if inst.condition.is_some() {
            return Err(Error::param("conditioned instructions have no unitary"));
        }
        match &inst.op {
            Op::Gate(k) => left_multiply_in_place(&mut u, &gate_matrix(k), &inst.qubits),
            Op::Error(p) => left_multiply_in_place(&mut u, &p.matrix(), &inst.qubits),
            Op::Barrier { .. } => {}
            Op::Measure { .. } | Op::Reset => {
                return Err(Error::param("measurements have no unitary"));
            }
        }
    }
    Ok(u)
}
