//! Circuit intermediate representation.

mod gate;
mod passes;
mod text;

use std::fmt;

pub use gate::{gate_matrix, GateKind};
pub use passes::{
    cancel_adjacent_cnots, cancel_adjacent_self_inverse, circuit_unitary, count_ops, multi_qubit_count,
    multi_qubit_count_after_label,
};
pub use text::{parse_circuit, write_circuit};

use crate::error::{Error, Result};

/// Label of the barrier that marks where injected errors are inserted.
pub const ERROR_SLOT: &str = "error";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn name(self) -> &'static str {
        match self {
            Pauli::X => "x",
            Pauli::Y => "y",
            Pauli::Z => "z",
        }
    }

    pub fn matrix(self) -> crate::matrix::ComplexMatrix {
        match self {
            Pauli::X => crate::matrix::pauli_x(),
            Pauli::Y => crate::matrix::pauli_y(),
            Pauli::Z => crate::matrix::pauli_z(),
        }
    }
}

/// Classical condition: the instruction runs when `clbits & mask == value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition {
    pub mask: u64,
    pub value: u64,
}

impl Condition {
    pub fn bit(clbit: usize, value: bool) -> Self {
        Self {
            mask: 1 << clbit,
            value: (value as u64) << clbit,
        }
    }

    pub fn holds(&self, clbits: u64) -> bool {
        clbits & self.mask == self.value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Gate(GateKind),
    Measure {
        clbit: usize,
    },
    Reset,
    /// Ordering marker over its qubits; no effect on the state.
    Barrier {
        label: String,
    },
    /// Ideal (noise-free) Pauli error, used for deliberate error injection.
    Error(Pauli),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub op: Op,
    pub qubits: Vec<usize>,
    pub condition: Option<Condition>,
}

impl Instruction {
    pub fn gate(kind: GateKind, qubits: &[usize]) -> Self {
        Self {
            op: Op::Gate(kind),
            qubits: qubits.to_vec(),
            condition: None,
        }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Self {
            op: Op::Measure { clbit },
            qubits: vec![qubit],
            condition: None,
        }
    }

    pub fn barrier(label: &str, qubits: &[usize]) -> Self {
        Self {
            op: Op::Barrier {
                label: label.to_string(),
            },
            qubits: qubits.to_vec(),
            condition: None,
        }
    }

    pub fn gate_kind(&self) -> Option<&GateKind> {
        match &self.op {
            Op::Gate(k) => Some(k),
            _ => None,
        }
    }

    pub fn touches(&self, qubit: usize) -> bool {
        self.qubits.contains(&qubit)
    }

    pub fn is_unconditioned_gate(&self) -> bool {
        self.condition.is_none() && matches!(self.op, Op::Gate(_))
    }

    /// Same operation on the same qubits, accounting for symmetric gates.
    pub fn same_action(&self, other: &Self) -> bool {
        if self.op != other.op || self.condition != other.condition {
            return false;
        }
        match &self.op {
            Op::Gate(k) if k.is_symmetric() => {
                let mut a = self.qubits.clone();
                let mut b = other.qubits.clone();
                a.sort_unstable();
                b.sort_unstable();
                a == b
            }
            _ => self.qubits == other.qubits,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_clbits: usize,
    instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_clbits: usize) -> Self {
        Self {
            n_qubits,
            n_clbits,
            instructions: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Same registers, no instructions.
    pub fn empty_like(&self) -> Self {
        Self::new(self.n_qubits, self.n_clbits)
    }

    pub fn validate_instruction(&self, inst: &Instruction) -> Result<()> {
        for (i, &q) in inst.qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    size: self.n_qubits,
                });
            }
            if inst.qubits[..i].contains(&q) {
                return Err(Error::param(format!("qubit {q} listed twice")));
            }
        }
        match &inst.op {
            Op::Gate(k) => {
                if inst.qubits.len() != k.arity() {
                    return Err(Error::param(format!(
                        "{k} acts on {} qubits, {} given",
                        k.arity(),
                        inst.qubits.len()
                    )));
                }
                if !k.is_finite() {
                    return Err(Error::param(format!("{k} has a non-finite angle")));
                }
            }
            Op::Measure { clbit } => {
                if inst.qubits.len() != 1 {
                    return Err(Error::param("measure acts on one qubit"));
                }
                if *clbit >= self.n_clbits {
                    return Err(Error::IndexOutOfRange {
                        index: *clbit,
                        size: self.n_clbits,
                    });
                }
            }
            Op::Reset | Op::Error(_) => {
                if inst.qubits.len() != 1 {
                    return Err(Error::param("reset/error act on one qubit"));
                }
            }
            Op::Barrier { .. } => {}
        }
        if let Some(cond) = inst.condition {
            let declared = if self.n_clbits >= 64 {
                u64::MAX
            } else {
                (1u64 << self.n_clbits) - 1
            };
            if cond.mask == 0 || cond.mask & !declared != 0 {
                return Err(Error::param(format!(
                    "condition mask {:#b} references undeclared classical bits",
                    cond.mask
                )));
            }
            if cond.value & !cond.mask != 0 {
                return Err(Error::param("condition value has bits outside its mask"));
            }
        }
        Ok(())
    }

    pub fn push(&mut self, inst: Instruction) -> Result<&mut Self> {
        self.validate_instruction(&inst)?;
        self.instructions.push(inst);
        Ok(self)
    }

    pub fn gate(&mut self, kind: GateKind, qubits: &[usize]) -> Result<&mut Self> {
        self.push(Instruction::gate(kind, qubits))
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<&mut Self> {
        self.push(Instruction::measure(qubit, clbit))
    }

    pub fn reset(&mut self, qubit: usize) -> Result<&mut Self> {
        self.push(Instruction {
            op: Op::Reset,
            qubits: vec![qubit],
            condition: None,
        })
    }

    pub fn barrier(&mut self, label: &str, qubits: &[usize]) -> Result<&mut Self> {
        self.push(Instruction::barrier(label, qubits))
    }

    pub fn error(&mut self, pauli: Pauli, qubit: usize) -> Result<&mut Self> {
        self.push(Instruction {
            op: Op::Error(pauli),
            qubits: vec![qubit],
            condition: None,
        })
    }

    pub fn conditioned(&mut self, kind: GateKind, qubits: &[usize], condition: Condition) -> Result<&mut Self> {
        self.push(Instruction {
            op: Op::Gate(kind),
            qubits: qubits.to_vec(),
            condition: Some(condition),
        })
    }

    pub fn extend(&mut self, insts: impl IntoIterator<Item = Instruction>) -> Result<&mut Self> {
        for inst in insts {
            self.push(inst)?;
        }
        Ok(self)
    }

    /// Inserts at `index`, shifting later instructions.
    pub fn insert(&mut self, index: usize, inst: Instruction) -> Result<()> {
        self.validate_instruction(&inst)?;
        self.instructions.insert(index, inst);
        Ok(())
    }

    pub fn has_conditions(&self) -> bool {
        self.instructions.iter().any(|i| i.condition.is_some())
    }

    pub fn has_measurements(&self) -> bool {
        self.instructions
            .iter()
            .any(|i| matches!(i.op, Op::Measure { .. } | Op::Reset))
    }

    pub fn find_barrier(&self, label: &str) -> Option<usize> {
        self.instructions
            .iter()
            .position(|i| matches!(&i.op, Op::Barrier { label: l } if l == label))
    }

    /// Qubits touched by any instruction, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_qubits];
        for inst in &self.instructions {
            for &q in &inst.qubits {
                seen[q] = true;
            }
        }
        (0..self.n_qubits).filter(|&q| seen[q]).collect()
    }

    /// Rebuilds the circuit on a different register size with qubits renamed
    /// through `map` (old index → new index).
    pub fn remap_qubits(&self, map: &[usize], n_qubits: usize) -> Result<Self> {
        let mut out = Self::new(n_qubits, self.n_clbits);
        for inst in &self.instructions {
            let mut inst = inst.clone();
            for q in &mut inst.qubits {
                *q = *map.get(*q).ok_or(Error::IndexOutOfRange {
                    index: *q,
                    size: map.len(),
                })?;
            }
            out.push(inst)?;
        }
        Ok(out)
    }

    pub(crate) fn from_parts_unchecked(n_qubits: usize, n_clbits: usize, instructions: Vec<Instruction>) -> Self {
        Self {
            n_qubits,
            n_clbits,
            instructions,
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_circuit(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_gate() {
        let mut c = Circuit::new(1, 0);
        c.gate(GateKind::X, &[0]).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn mid_circuit_measurement_then_conditioned_gate() {
        let mut c = Circuit::new(3, 1);
        c.measure(2, 0)
            .unwrap()
            .conditioned(GateKind::X, &[0], Condition::bit(0, true))
            .unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.has_conditions());
    }

    #[test]
    fn condition_on_undeclared_clbit_rejected() {
        let mut c = Circuit::new(2, 1);
        let err = c.conditioned(GateKind::X, &[0], Condition::bit(3, true));
        assert!(matches!(err, Err(Error::Parameter(_))));
    }

    #[test]
    fn out_of_range_and_duplicate_qubits_rejected() {
        let mut c = Circuit::new(2, 1);
        assert!(matches!(
            c.gate(GateKind::X, &[2]),
            Err(Error::IndexOutOfRange { index: 2, size: 2 })
        ));
        assert!(c.gate(GateKind::CNOT, &[1, 1]).is_err());
        assert!(c.gate(GateKind::CNOT, &[0]).is_err());
        assert!(c.measure(0, 1).is_err());
        assert!(c.gate(GateKind::RX(f64::NAN), &[0]).is_err());
    }

    #[test]
    fn symmetric_gates_compare_as_sets() {
        let a = Instruction::gate(GateKind::CZ, &[0, 1]);
        let b = Instruction::gate(GateKind::CZ, &[1, 0]);
        assert!(a.same_action(&b));
        let a = Instruction::gate(GateKind::CNOT, &[0, 1]);
        let b = Instruction::gate(GateKind::CNOT, &[1, 0]);
        assert!(!a.same_action(&b));
    }
}
