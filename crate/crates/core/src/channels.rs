//! Quantum-channel algebra on Kraus sets.
//!
//! Conventions used throughout the crate:
//! * vectorization is column-stacking, so `vec(E)[c * d + r] = E[r, c]`;
//! * qubit 0 is the least-significant bit of a basis index;
//! * every channel is trace preserving (`Σ E†E = I`).

use crate::error::{check_probability, Error, Result};
use crate::matrix::{pauli_x, pauli_y, pauli_z, ComplexMatrix, C64, ONE, ZERO};

pub const COMPLETENESS_TOL: f64 = 1e-12;

/// A trace-preserving channel in operator-sum form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(operators, COMPLETENESS_TOL)
    }

    pub fn with_tolerance(operators: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::param("a Kraus set needs at least one operator"))?;
        let dim = first.rows();
        if operators.iter().any(|e| e.rows() != dim || e.cols() != dim) {
            return Err(Error::Shape("Kraus operators must be square and equal-sized".into()));
        }
        let set = Self { dim, operators };
        let defect = set.completeness_defect();
        if defect > tol {
            return Err(Error::param(format!(
                "Kraus operators are not trace preserving (deviation {defect:e})"
            )));
        }
        Ok(set)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            operators: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// max |Σ E†E − I|, entrywise.
    pub fn completeness_defect(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.operators {
            acc = &acc + &(&e.adjoint() * e);
        }
        acc.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// Drops operators that are identically zero. The channel is unchanged.
    pub fn pruned(&self) -> Self {
        let ops: Vec<_> = self
            .operators
            .iter()
            .filter(|e| e.as_slice().iter().any(|v| v.norm() > 0.0))
            .cloned()
            .collect();
        if ops.is_empty() {
            return self.clone();
        }
        Self {
            dim: self.dim,
            operators: ops,
        }
    }

    /// `true` when the set is a single operator proportional to the identity.
    pub fn is_trivial(&self) -> bool {
        let p = self.pruned();
        p.operators.len() == 1 && p.operators[0].equal_up_to_phase(&ComplexMatrix::identity(self.dim), 1e-15)
    }

    /// Applies the channel to a bare `dim × dim` operator.
    pub fn apply_to_matrix(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::Shape(format!(
                "channel of dimension {} applied to {}x{} operator",
                self.dim,
                rho.rows(),
                rho.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.operators {
            out = &out + &(&(e * rho) * &e.adjoint());
        }
        Ok(out)
    }
}

fn single_qubit(ops: Vec<ComplexMatrix>) -> KrausSet {
    KrausSet::new(ops).expect("constructor output is trace preserving")
}

fn real2(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[a, b, c, d])
}

pub fn make_amplitude_damping(p_ad: f64) -> Result<KrausSet> {
    check_probability("p_ad", p_ad)?;
    Ok(single_qubit(vec![
        real2(1.0, 0.0, 0.0, (1.0 - p_ad).sqrt()),
        real2(0.0, p_ad.sqrt(), 0.0, 0.0),
    ]))
}

/// Phase damping with a single kick operator `diag(0, √p_pd)`.
pub fn make_phase_damping(p_pd: f64) -> Result<KrausSet> {
    check_probability("p_pd", p_pd)?;
    Ok(single_qubit(vec![
        real2(1.0, 0.0, 0.0, (1.0 - p_pd).sqrt()),
        real2(0.0, 0.0, 0.0, p_pd.sqrt()),
    ]))
}

/// Combined amplitude and phase damping, equal as a channel to phase damping
/// applied after amplitude damping (and to the reverse order).
pub fn make_amplitude_phase_damping(p_ad: f64, p_pd: f64) -> Result<KrausSet> {
    check_probability("p_ad", p_ad)?;
    check_probability("p_pd", p_pd)?;
    let keep = (1.0 - p_ad).sqrt();
    Ok(single_qubit(vec![
        real2(1.0, 0.0, 0.0, keep * (1.0 - p_pd).sqrt()),
        real2(0.0, p_ad.sqrt(), 0.0, 0.0),
        real2(0.0, 0.0, 0.0, keep * p_pd.sqrt()),
    ]))
}

/// Depolarizing channel `ρ ↦ p·I/d + (1−p)·ρ` on `n_qubits ∈ {1,2,3}` as a
/// uniform Pauli-string Kraus set.
pub fn make_depolarizing(p: f64, n_qubits: usize) -> Result<KrausSet> {
    check_probability("p_depol", p)?;
    if !(1..=3).contains(&n_qubits) {
        return Err(Error::param(format!(
            "joint depolarizing supports 1..=3 qubits, got {n_qubits}"
        )));
    }
    let d = (1usize << n_qubits) as f64;
    let paulis = [ComplexMatrix::identity(2), pauli_x(), pauli_y(), pauli_z()];
    let id_weight = (1.0 - p * (d * d - 1.0) / (d * d)).sqrt();
    let other_weight = p.sqrt() / d;
    let mut ops = Vec::with_capacity(1 << (2 * n_qubits));
    for string in 0..(1usize << (2 * n_qubits)) {
        // digit i (base 4) selects the Pauli on qubit i
        let mut m = ComplexMatrix::identity(1);
        for q in 0..n_qubits {
            let digit = (string >> (2 * q)) & 3;
            m = paulis[digit].kron(&m);
        }
        let w = if string == 0 { id_weight } else { other_weight };
        ops.push(m.scale(C64::new(w, 0.0)));
    }
    Ok(KrausSet::new(ops).expect("depolarizing set is trace preserving"))
}

/// Bit-flip channel used for state preparation and measurement error.
pub fn make_spam_bitflip(p_spam: f64) -> Result<KrausSet> {
    check_probability("p_spam", p_spam)?;
    Ok(single_qubit(vec![
        ComplexMatrix::identity(2).scale(C64::new((1.0 - p_spam).sqrt(), 0.0)),
        pauli_x().scale(C64::new(p_spam.sqrt(), 0.0)),
    ]))
}

/// `outer ∘ inner`: all products `A_j · B_i`.
pub fn compose(outer: &KrausSet, inner: &KrausSet) -> Result<KrausSet> {
    if outer.dim != inner.dim {
        return Err(Error::Shape(format!(
            "cannot compose channels of dimension {} and {}",
            outer.dim, inner.dim
        )));
    }
    let mut ops = Vec::with_capacity(outer.operators.len() * inner.operators.len());
    for a in &outer.operators {
        for b in &inner.operators {
            ops.push(a * b);
        }
    }
    KrausSet::with_tolerance(ops, 1e-10)
}

/// Tensor product of channels; `parts[i]` acts on local qubit block `i`
/// (block 0 lowest).
pub fn tensor(parts: &[&KrausSet]) -> Result<KrausSet> {
    let mut acc = KrausSet::identity(1);
    for part in parts {
        let mut ops = Vec::with_capacity(acc.operators.len() * part.operators.len());
        for p in &part.operators {
            for a in &acc.operators {
                ops.push(p.kron(a));
            }
        }
        acc = KrausSet {
            dim: acc.dim * part.dim,
            operators: ops,
        };
    }
    Ok(acc)
}

/// Choi matrix `J = Σ vec(E) vec(E)†` with column-stacking vectorization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Partial trace over the output (row) index of each Kraus operator.
    pub fn partial_trace_output(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d, d);
        for c in 0..d {
            for c2 in 0..d {
                let mut s = ZERO;
                for r in 0..d {
                    s += self.matrix[(c * d + r, c2 * d + r)];
                }
                // (E†E)[c2, c] = Σ_r conj(E[r,c2]) E[r,c]
                out[(c2, c)] = s;
            }
        }
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.hermitian_eigenvalues().map(|v| v[0]).unwrap_or(f64::NAN)
    }

    /// Checks the Hermitian, PSD, and trace-preserving invariants.
    pub fn validate(&self) -> Result<()> {
        if !self.matrix.is_hermitian(1e-12) {
            return Err(Error::param("Choi matrix is not Hermitian"));
        }
        let min = self.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::param(format!("Choi matrix has eigenvalue {min:e}")));
        }
        if !self
            .partial_trace_output()
            .approx_eq(&ComplexMatrix::identity(self.dim), 1e-12)
        {
            return Err(Error::param("Choi matrix is not trace preserving"));
        }
        Ok(())
    }
}

pub fn choi(k: &KrausSet) -> ChoiMatrix {
    let d = k.dim;
    let mut j = ComplexMatrix::zeros(d * d, d * d);
    for e in &k.operators {
        let v = e.vec_columns();
        for (a, &va) in v.iter().enumerate() {
            if va == ZERO {
                continue;
            }
            for (b, &vb) in v.iter().enumerate() {
                j[(a, b)] += va * vb.conj();
            }
        }
    }
    ChoiMatrix { dim: d, matrix: j }
}

/// Average gate fidelity of `channel` against the unitary `target`,
/// `F = (Σ_k |Tr(U† E_k)|² + d) / (d (d + 1))`.
pub fn average_gate_fidelity(channel: &KrausSet, target: &ComplexMatrix) -> Result<f64> {
    let d = channel.dim;
    if target.rows() != d || target.cols() != d {
        return Err(Error::Shape(format!(
            "target of dimension {} for a channel of dimension {d}",
            target.rows()
        )));
    }
    if !target.is_unitary(1e-10) {
        return Err(Error::param("fidelity target is not unitary"));
    }
    let u_dag = target.adjoint();
    let sum: f64 = channel.operators.iter().map(|e| (&u_dag * e).trace().norm_sqr()).sum();
    let d = d as f64;
    Ok(((sum + d) / (d * (d + 1.0))).clamp(0.0, 1.0))
}

/// Fidelity against the identity, `Σ|Tr E_k|²` shortcut for tensor-product
/// channels: the trace of a Kronecker product factorizes.
pub fn tensor_identity_fidelity(parts: &[&KrausSet]) -> f64 {
    let mut trace_sum = 1.0;
    let mut d = 1.0;
    for part in parts {
        trace_sum *= part.operators.iter().map(|e| e.trace().norm_sqr()).sum::<f64>();
        d *= part.dim as f64;
    }
    (trace_sum + d) / (d * (d + 1.0))
}

/// A density operator on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(0, 0)] = ONE;
        Self { n_qubits, matrix: m }
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let dim = 1 << n_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Self { n_qubits, matrix: m }
    }

    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim == 0 {
            return Err(Error::Shape(format!("state vector of length {dim}")));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::param(format!("state vector has norm² {norm}")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = amplitudes[r] * amplitudes[c].conj();
            }
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix: m,
        })
    }

    /// Wraps a matrix after checking the density-operator invariants.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.rows();
        if !matrix.is_square() || !dim.is_power_of_two() {
            return Err(Error::Shape(format!(
                "{}x{} is not a qubit density matrix",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let rho = Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix,
        };
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps without validation. Used for unnormalized measurement branches.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self {
            n_qubits: matrix.rows().trailing_zeros() as usize,
            matrix,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.matrix.is_hermitian(1e-10) {
            return Err(Error::param("density matrix is not Hermitian"));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::param(format!("density matrix has trace {tr}")));
        }
        let min = self.matrix.hermitian_eigenvalues()?[0];
        if min < -1e-9 {
            return Err(Error::param(format!("density matrix has eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.matrix.rows())
            .map(|i| self.matrix[(i, i)].re.max(0.0))
            .collect()
    }

    fn check_targets(&self, targets: &[usize], op_dim: usize) -> Result<()> {
        if op_dim != 1 << targets.len() {
            return Err(Error::Shape(format!(
                "operator of dimension {op_dim} on {} target qubits",
                targets.len()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.n_qubits {
                return Err(Error::IndexOutOfRange {
                    index: t,
                    size: self.n_qubits,
                });
            }
            if targets[..i].contains(&t) {
                return Err(Error::param(format!("duplicate target qubit {t}")));
            }
        }
        Ok(())
    }

    /// `ρ ← U ρ U†` with `U` acting on `targets`.
    pub fn apply_unitary(&mut self, u: &ComplexMatrix, targets: &[usize]) -> Result<()> {
        self.check_targets(targets, u.rows())?;
        conjugate_in_place(&mut self.matrix, u, targets);
        Ok(())
    }

    /// `ρ ← Σ_k E_k ρ E_k†` with the channel acting on `targets`.
    pub fn apply_kraus(&mut self, k: &KrausSet, targets: &[usize]) -> Result<()> {
        self.check_targets(targets, k.dim())?;
        let ops = k.operators();
        if ops.len() == 1 {
            conjugate_in_place(&mut self.matrix, &ops[0], targets);
            return Ok(());
        }
        let mut acc = ComplexMatrix::zeros(self.matrix.rows(), self.matrix.cols());
        for e in ops {
            if e.as_slice().iter().all(|v| *v == ZERO) {
                continue;
            }
            let mut term = self.matrix.clone();
            conjugate_in_place(&mut term, e, targets);
            for (a, t) in acc.as_mut_slice().iter_mut().zip(term.as_slice()) {
                *a += t;
            }
        }
        self.matrix = acc;
        Ok(())
    }

    pub fn expectation(&self, observable: &ComplexMatrix) -> Result<f64> {
        if observable.rows() != self.matrix.rows() || !observable.is_square() {
            return Err(Error::Shape("observable dimension mismatch".into()));
        }
        Ok((observable * &self.matrix).trace().re)
    }
}

/// Basis-index offsets of the `2^k` local states on `targets`.
fn local_offsets(targets: &[usize]) -> Vec<usize> {
    (0..1usize << targets.len())
        .map(|j| targets.iter().enumerate().map(|(bit, &t)| ((j >> bit) & 1) << t).sum())
        .collect()
}

/// `m ← U m` for `U` acting on `targets` (row index space).
pub(crate) fn left_multiply_in_place(m: &mut ComplexMatrix, u: &ComplexMatrix, targets: &[usize]) {
    let dim = m.rows();
    let cols = m.cols();
    let k = u.rows();
    let offsets = local_offsets(targets);
    let mask: usize = targets.iter().map(|&t| 1 << t).sum();
    let mut buf = vec![ZERO; k];
    let data = m.as_mut_slice();
    for base in (0..dim).filter(|i| i & mask == 0) {
        for col in 0..cols {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = data[(base | off) * cols + col];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut s = ZERO;
                for (j, b) in buf.iter().enumerate() {
                    s += u[(r, j)] * b;
                }
                data[(base | off) * cols + col] = s;
            }
        }
    }
}

/// `m ← m U†` for `U` acting on `targets` (column index space).
fn right_multiply_adjoint_in_place(m: &mut ComplexMatrix, u: &ComplexMatrix, targets: &[usize]) {
    let dim = m.cols();
    let k = u.rows();
    let offsets = local_offsets(targets);
    let mask: usize = targets.iter().map(|&t| 1 << t).sum();
    let bases: Vec<usize> = (0..dim).filter(|i| i & mask == 0).collect();
    let mut buf = vec![ZERO; k];
    let data = m.as_mut_slice();
    for line in data.chunks_mut(dim) {
        for &base in &bases {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = line[base | off];
            }
            for (c, off) in offsets.iter().enumerate() {
                let mut s = ZERO;
                for (j, b) in buf.iter().enumerate() {
                    s += b * u[(c, j)].conj();
                }
                line[base | off] = s;
            }
        }
    }
}

/// `m ← U m U†` for `U` acting on `targets` of an `n`-qubit operator.
pub(crate) fn conjugate_in_place(m: &mut ComplexMatrix, u: &ComplexMatrix, targets: &[usize]) {
    left_multiply_in_place(m, u, targets);
    right_multiply_adjoint_in_place(m, u, targets);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::embed;

    fn grid() -> Vec<f64> {
        (0..=10).map(|i| i as f64 / 10.0).collect()
    }

    fn diag_real(rho: &ComplexMatrix) -> Vec<f64> {
        (0..rho.rows()).map(|i| rho[(i, i)].re).collect()
    }

    fn ket(bit: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(bit, bit)] = ONE;
        m
    }

    fn plus() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])
    }

    /// Oracle for the Choi matrix: J = Σ_ij |i⟩⟨j| ⊗ ε(|i⟩⟨j|) in the
    /// column-stacking layout, J[(i,r),(j,r')] = ε(|i⟩⟨j|)[r, r'].
    fn choi_by_basis_action(k: &KrausSet) -> ComplexMatrix {
        let d = k.dim();
        let mut j = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for jj in 0..d {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(i, jj)] = ONE;
                let out = k.apply_to_matrix(&e).unwrap();
                for r in 0..d {
                    for r2 in 0..d {
                        j[(i * d + r, jj * d + r2)] = out[(r, r2)];
                    }
                }
            }
        }
        j
    }

    #[test]
    fn amplitude_damping_examples() {
        let id = make_amplitude_damping(0.0).unwrap();
        assert!(id.apply_to_matrix(&plus()).unwrap().approx_eq(&plus(), 1e-15));
        let full = make_amplitude_damping(1.0).unwrap();
        assert!(full.apply_to_matrix(&plus()).unwrap().approx_eq(&ket(0), 1e-15));
        let half = make_amplitude_damping(0.5).unwrap();
        let out = half.apply_to_matrix(&ket(1)).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]), 1e-15));
    }

    #[test]
    fn phase_damping_examples() {
        let out = make_phase_damping(1.0).unwrap().apply_to_matrix(&plus()).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]), 1e-15));
        let out = make_phase_damping(0.36).unwrap().apply_to_matrix(&plus()).unwrap();
        assert!((out[(0, 1)].re - 0.4).abs() < 1e-15);
        assert!(make_phase_damping(0.0).unwrap().is_trivial());
    }

    #[test]
    fn out_of_range_probabilities_rejected() {
        assert!(make_amplitude_damping(1.5).is_err());
        assert!(make_phase_damping(-0.1).is_err());
        assert!(make_amplitude_phase_damping(0.2, f64::NAN).is_err());
        assert!(make_depolarizing(1.01, 1).is_err());
        assert!(make_depolarizing(0.1, 4).is_err());
        assert!(make_spam_bitflip(-1e-9).is_err());
    }

    #[test]
    fn spam_examples() {
        let flip = make_spam_bitflip(1.0).unwrap().apply_to_matrix(&ket(0)).unwrap();
        assert!(flip.approx_eq(&ket(1), 1e-15));
        let out = make_spam_bitflip(0.03).unwrap().apply_to_matrix(&ket(0)).unwrap();
        let d = diag_real(&out);
        assert!((d[0] - 0.97).abs() < 1e-15 && (d[1] - 0.03).abs() < 1e-15);
    }

    #[test]
    fn depolarizing_full_mixing() {
        let out = make_depolarizing(1.0, 1).unwrap().apply_to_matrix(&plus()).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0)), 1e-15));
        let rho2 = ComplexMatrix::from_real(4, 4, &{
            let mut v = [0.0; 16];
            v[5] = 1.0;
            v
        });
        let out = make_depolarizing(1.0, 2).unwrap().apply_to_matrix(&rho2).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::identity(4).scale(C64::new(0.25, 0.0)), 1e-14));
    }

    #[test]
    fn depolarizing_matches_mixing_form() {
        for n in 1..=2 {
            let d = 1usize << n;
            let p = 0.37;
            let rho = ComplexMatrix::from_real(d, d, &{
                let mut v = vec![0.0; d * d];
                v[0] = 0.5;
                v[d * d - 1] = 0.5;
                v[d - 1] = 0.5;
                v[(d - 1) * d] = 0.5;
                v
            });
            let out = make_depolarizing(p, n).unwrap().apply_to_matrix(&rho).unwrap();
            let expect =
                &ComplexMatrix::identity(d).scale(C64::new(p / d as f64, 0.0)) + &rho.scale(C64::new(1.0 - p, 0.0));
            assert!(out.approx_eq(&expect, 1e-14), "n={n}");
        }
    }

    #[test]
    fn completeness_on_grid() {
        for &a in &grid() {
            assert!(make_amplitude_damping(a).unwrap().completeness_defect() <= 1e-12);
            assert!(make_phase_damping(a).unwrap().completeness_defect() <= 1e-12);
            assert!(make_spam_bitflip(a).unwrap().completeness_defect() <= 1e-12);
            for n in 1..=3 {
                assert!(make_depolarizing(a, n).unwrap().completeness_defect() <= 1e-12);
            }
            for &b in &grid() {
                assert!(make_amplitude_phase_damping(a, b).unwrap().completeness_defect() <= 1e-12);
            }
        }
    }

    #[test]
    fn compose_counts_and_identity() {
        let ad = make_amplitude_damping(0.3).unwrap();
        let pd = make_phase_damping(0.4).unwrap();
        let c = compose(&pd, &ad).unwrap();
        assert_eq!(c.operators().len(), 4);
        let with_id = compose(&KrausSet::identity(2), &ad).unwrap();
        assert!(choi(&with_id).matrix().approx_eq(choi(&ad).matrix(), 1e-15));
        assert!(matches!(
            compose(&ad, &make_depolarizing(0.1, 2).unwrap()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn apd_matches_composition_and_commutes() {
        for &a in &grid() {
            for &p in &grid() {
                let apd = choi(&make_amplitude_phase_damping(a, p).unwrap());
                let ad = make_amplitude_damping(a).unwrap();
                let pd = make_phase_damping(p).unwrap();
                let pd_ad = choi(&compose(&pd, &ad).unwrap());
                let ad_pd = choi(&compose(&ad, &pd).unwrap());
                assert!(apd.matrix().approx_eq(pd_ad.matrix(), 1e-12));
                assert!(pd_ad.matrix().approx_eq(ad_pd.matrix(), 1e-12));
            }
        }
    }

    #[test]
    fn apd_with_no_dephasing_is_amplitude_damping() {
        let a = choi(&make_amplitude_phase_damping(0.42, 0.0).unwrap());
        let b = choi(&make_amplitude_damping(0.42).unwrap());
        assert!(a.matrix().approx_eq(b.matrix(), 1e-15));
    }

    #[test]
    fn choi_identity_layout() {
        let j = choi(&KrausSet::identity(2));
        for r in 0..4 {
            for c in 0..4 {
                let expect = if [0, 3].contains(&r) && [0, 3].contains(&c) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(j.matrix()[(r, c)], C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn choi_matches_basis_oracle_and_corner_entries() {
        for &(a, p) in &[(0.2, 0.3), (0.7, 0.1), (0.0, 0.9), (1.0, 0.5)] {
            let k = make_amplitude_phase_damping(a, p).unwrap();
            let j = choi(&k);
            assert!(j.matrix().approx_eq(&choi_by_basis_action(&k), 1e-14));
            let corner = (1.0 - a).sqrt() * (1.0 - p).sqrt();
            assert!((j.matrix()[(0, 3)].re - corner).abs() < 1e-14);
            assert!((j.matrix()[(3, 0)].re - corner).abs() < 1e-14);
            assert!((j.matrix()[(3, 3)].re - (1.0 - a)).abs() < 1e-14);
            assert!((j.matrix()[(2, 2)].re - a).abs() < 1e-14);
            j.validate().unwrap();
        }
        // full decay: only J[0,0] and the decay entry survive
        let j = choi(&make_amplitude_phase_damping(1.0, 0.3).unwrap());
        let nonzero: Vec<(usize, usize)> = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .filter(|&(r, c)| j.matrix()[(r, c)].norm() > 1e-15)
            .collect();
        assert_eq!(nonzero, vec![(0, 0), (2, 2)]);
    }

    #[test]
    fn choi_invariant_under_kraus_remixing() {
        let k = make_amplitude_phase_damping(0.3, 0.2).unwrap();
        let ops = k.operators();
        let (c, s) = (0.6f64, 0.8f64);
        let mixed = vec![
            &ops[0].scale(C64::new(c, 0.0)) + &ops[1].scale(C64::new(0.0, s)),
            &ops[0].scale(C64::new(s, 0.0)) + &ops[1].scale(C64::new(0.0, -c)),
            ops[2].clone(),
        ];
        let remixed = KrausSet::new(mixed).unwrap();
        assert!(choi(&k).matrix().approx_eq(choi(&remixed).matrix(), 1e-14));
    }

    #[test]
    fn fidelity_closed_forms() {
        let id = ComplexMatrix::identity(2);
        assert_eq!(average_gate_fidelity(&KrausSet::identity(2), &id).unwrap(), 1.0);
        for &p in &[0.01, 0.1, 0.5] {
            let f = average_gate_fidelity(&make_depolarizing(p, 1).unwrap(), &id).unwrap();
            assert!((f - (1.0 - p / 2.0)).abs() < 1e-12);
        }
        for &(a, p) in &[(0.1, 0.2), (0.5, 0.5), (0.9, 0.05)] {
            let f = average_gate_fidelity(&make_amplitude_phase_damping(a, p).unwrap(), &id).unwrap();
            let x = (1.0 - a).sqrt() * (1.0 - p).sqrt();
            let expect = ((1.0 + x).powi(2) + (1.0 - a) * p + 2.0) / 6.0;
            assert!((f - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn fidelity_rejects_non_unitary_target() {
        let k = make_depolarizing(0.1, 1).unwrap();
        let bad = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(average_gate_fidelity(&k, &bad), Err(Error::Parameter(_))));
    }

    #[test]
    fn tensor_fidelity_shortcut_agrees() {
        let a = make_amplitude_phase_damping(0.1, 0.2).unwrap();
        let b = make_depolarizing(0.05, 1).unwrap();
        let t = tensor(&[&a, &b]).unwrap();
        assert!(t.completeness_defect() < 1e-12);
        let direct = average_gate_fidelity(&t, &ComplexMatrix::identity(4)).unwrap();
        assert!((direct - tensor_identity_fidelity(&[&a, &b])).abs() < 1e-14);
    }

    #[test]
    fn apply_kraus_embeds_on_targets() {
        // spam(1) on qubit 0 of |00>: basis index 0 -> index 1
        let mut rho = DensityMatrix::zero_state(2);
        rho.apply_kraus(&make_spam_bitflip(1.0).unwrap(), &[0]).unwrap();
        assert_eq!(rho.probabilities(), vec![0.0, 1.0, 0.0, 0.0]);
        // ad(0.5) on qubit 1 of |11>: half stays at index 3, half decays to index 1
        let mut rho = DensityMatrix::basis_state(2, 3);
        rho.apply_kraus(&make_amplitude_damping(0.5).unwrap(), &[1]).unwrap();
        let p = rho.probabilities();
        assert!((p[3] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn apply_kraus_agrees_with_embedded_reference() {
        let rho0 = DensityMatrix::from_pure(&[
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.5),
            C64::new(-0.5, 0.0),
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        let k = tensor(&[
            &make_amplitude_damping(0.3).unwrap(),
            &make_depolarizing(0.2, 1).unwrap(),
        ])
        .unwrap();
        let mut rho = rho0.clone();
        rho.apply_kraus(&k, &[2, 0]).unwrap();
        let mut reference = ComplexMatrix::zeros(8, 8);
        for e in k.operators() {
            let full = embed(e, &[2, 0], 3).unwrap();
            reference = &reference + &(&(&full * rho0.matrix()) * &full.adjoint());
        }
        assert!(rho.matrix().approx_eq(&reference, 1e-14));
        rho.validate().unwrap();
    }

    #[test]
    fn apply_kraus_index_errors() {
        let mut rho = DensityMatrix::zero_state(2);
        let k = make_spam_bitflip(0.1).unwrap();
        assert!(matches!(rho.apply_kraus(&k, &[2]), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(rho.apply_kraus(&k, &[0, 1]), Err(Error::Shape(_))));
    }
}
