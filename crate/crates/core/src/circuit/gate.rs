use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::matrix::{ComplexMatrix, C64, I, ONE};

/// Gate kinds understood by the IR. Angles are radians.
///
/// `Mcz(n)` is the phase gate with `n` controls and one target (a −1 phase
/// on the all-ones state). On the central-spin register this is how the
/// electron's conditional 2π rotation acts on the qubit subspace, so
/// `Mcz(1) ≡ CZ` and `Mcz(2) ≡ CCZ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    X,
    SX,
    H,
    Z,
    RX(f64),
    RY(f64),
    RZ(f64),
    CNOT,
    CrotX(f64),
    CrotY(f64),
    CZ,
    CCZ,
    CCX,
    Mcx(usize),
    Mcz(usize),
    Swap,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::X
            | GateKind::SX
            | GateKind::H
            | GateKind::Z
            | GateKind::RX(_)
            | GateKind::RY(_)
            | GateKind::RZ(_) => 1,
            GateKind::CNOT | GateKind::CrotX(_) | GateKind::CrotY(_) | GateKind::CZ | GateKind::Swap => 2,
            GateKind::CCZ | GateKind::CCX => 3,
            GateKind::Mcx(n) | GateKind::Mcz(n) => n + 1,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::RX(t) | GateKind::RY(t) | GateKind::RZ(t) | GateKind::CrotX(t) | GateKind::CrotY(t) => Some(t),
            _ => None,
        }
    }

    /// Short lowercase mnemonic used by the text format and gate counts.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::SX => "sx",
            GateKind::H => "h",
            GateKind::Z => "z",
            GateKind::RX(_) => "rx",
            GateKind::RY(_) => "ry",
            GateKind::RZ(_) => "rz",
            GateKind::CNOT => "cx",
            GateKind::CrotX(_) => "crx",
            GateKind::CrotY(_) => "cry",
            GateKind::CZ => "cz",
            GateKind::CCZ => "ccz",
            GateKind::CCX => "ccx",
            GateKind::Mcx(_) => "mcx",
            GateKind::Mcz(_) => "mcz",
            GateKind::Swap => "swap",
        }
    }

    pub fn is_multi_qubit(&self) -> bool {
        self.arity() > 1
    }

    /// Gates whose unitary is invariant under permutation of their qubits.
    pub fn is_symmetric(&self) -> bool {
        matches!(self, GateKind::CZ | GateKind::CCZ | GateKind::Mcz(_) | GateKind::Swap)
    }

    pub fn is_finite(&self) -> bool {
        self.angle().is_none_or(f64::is_finite)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.angle() {
            Some(t) => write!(f, "{}({})", self.name(), t),
            None => f.write_str(self.name()),
        }
    }
}

fn rx(t: f64) -> ComplexMatrix {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    ComplexMatrix::from_rows(&[&[C64::new(c, 0.0), -I * s], &[-I * s, C64::new(c, 0.0)]])
}

fn ry(t: f64) -> ComplexMatrix {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    ComplexMatrix::from_real(2, 2, &[c, -s, s, c])
}

fn rz(t: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[C64::from_polar(1.0, -t / 2.0), C64::from_polar(1.0, t / 2.0)])
}

/// Controlled-`u` with the control on local qubit 0 and `u` on local qubit 1.
fn controlled(u: &ComplexMatrix) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4);
    // basis index = control + 2 * target; control set at indices 1 and 3
    for (r, row) in [1usize, 3].iter().enumerate() {
        for (c, col) in [1usize, 3].iter().enumerate() {
            m[(*row, *col)] = u[(r, c)];
        }
    }
    m
}

/// Multi-controlled `u`: controls are local qubits `0..n`, target is qubit `n`.
fn multi_controlled(u: &ComplexMatrix, n_controls: usize) -> ComplexMatrix {
    let dim = 1 << (n_controls + 1);
    let all = (1 << n_controls) - 1;
    let mut m = ComplexMatrix::identity(dim);
    let lo = all;
    let hi = all | (1 << n_controls);
    m[(lo, lo)] = u[(0, 0)];
    m[(lo, hi)] = u[(0, 1)];
    m[(hi, lo)] = u[(1, 0)];
    m[(hi, hi)] = u[(1, 1)];
    m
}

/// Unitary of `kind` on its ordered qubit list (first listed qubit = local
/// bit 0). Controls come first and the target last.
pub fn gate_matrix(kind: &GateKind) -> ComplexMatrix {
    let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let z = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    match *kind {
        GateKind::X => x,
        GateKind::SX => {
            let a = C64::new(0.5, 0.5);
            let b = C64::new(0.5, -0.5);
            ComplexMatrix::from_rows(&[&[a, b], &[b, a]])
        }
        GateKind::H => ComplexMatrix::from_real(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]),
        GateKind::Z => z,
        GateKind::RX(t) => rx(t),
        GateKind::RY(t) => ry(t),
        GateKind::RZ(t) => rz(t),
        GateKind::CNOT => controlled(&x),
        GateKind::CrotX(t) => controlled(&rx(t)),
        GateKind::CrotY(t) => controlled(&ry(t)),
        GateKind::CZ => controlled(&z),
        GateKind::CCZ => multi_controlled(&z, 2),
        GateKind::CCX => multi_controlled(&x, 2),
        GateKind::Mcx(n) => multi_controlled(&x, n),
        GateKind::Mcz(n) => multi_controlled(&z, n),
        GateKind::Swap => {
            let mut m = ComplexMatrix::zeros(4, 4);
            for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                m[(r, c)] = ONE;
            }
            m
        }
    }
}
