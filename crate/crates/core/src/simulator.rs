//! Density-matrix execution with measurement branching.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::NoiseModel;
use crate::channels::{make_spam_bitflip, DensityMatrix};
use crate::circuit::{gate_matrix, Circuit, Op};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Largest number of active qubits a run will hold as a density matrix.
pub const MAX_SIM_QUBITS: usize = 10;

/// Branches lighter than this are dropped.
const BRANCH_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, Default)]
pub struct ExecutionOptions<'a> {
    /// Zero selects the exact-probability mode.
    pub shots: usize,
    pub seed: u64,
    /// `None` runs noiselessly.
    pub noise: Option<&'a NoiseModel>,
}

impl<'a> ExecutionOptions<'a> {
    pub fn exact(noise: Option<&'a NoiseModel>) -> Self {
        Self {
            shots: 0,
            seed: 0,
            noise,
        }
    }

    pub fn sampled(shots: usize, seed: u64, noise: Option<&'a NoiseModel>) -> Self {
        Self { shots, seed, noise }
    }
}

/// Outcome statistics keyed by the classical register read as an integer
/// (clbit 0 is the least significant bit).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ShotResult {
    Exact {
        n_clbits: usize,
        probabilities: BTreeMap<u64, f64>,
    },
    Counts {
        n_clbits: usize,
        shots: usize,
        counts: BTreeMap<u64, usize>,
    },
}

impl ShotResult {
    pub fn n_clbits(&self) -> usize {
        match self {
            Self::Exact { n_clbits, .. } | Self::Counts { n_clbits, .. } => *n_clbits,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Exact { .. })
    }

    /// Probabilities, or empirical frequencies in shot mode.
    pub fn distribution(&self) -> BTreeMap<u64, f64> {
        match self {
            Self::Exact { probabilities, .. } => probabilities.clone(),
            Self::Counts { shots, counts, .. } => counts.iter().map(|(&k, &n)| (k, n as f64 / *shots as f64)).collect(),
        }
    }

    pub fn probability(&self, outcome: u64) -> f64 {
        self.distribution().get(&outcome).copied().unwrap_or(0.0)
    }

    /// Register value as a bitstring, highest clbit first.
    pub fn bitstring(&self, outcome: u64) -> String {
        format_bits(outcome, self.n_clbits())
    }
}

pub fn format_bits(value: u64, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if (value >> b) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Classical register value → unnormalized density matrix of that branch.
type Branches = BTreeMap<u64, ComplexMatrix>;

struct Engine<'a> {
    noise: Option<&'a NoiseModel>,
    /// Original qubit index → local index in the compact register.
    local: Vec<usize>,
    n_local: usize,
    branches: Branches,
    written: u64,
}

impl Engine<'_> {
    fn local(&self, qubits: &[usize]) -> Vec<usize> {
        qubits.iter().map(|&q| self.local[q]).collect()
    }

    fn for_each(&mut self, mut f: impl FnMut(u64, &mut DensityMatrix) -> Result<()>) -> Result<()> {
        for (&bits, m) in self.branches.iter_mut() {
            let mut rho = DensityMatrix::from_matrix_unchecked(std::mem::replace(m, ComplexMatrix::zeros(0, 0)));
            let r = f(bits, &mut rho);
            *m = std::mem::replace(rho.matrix_mut(), ComplexMatrix::zeros(0, 0));
            r?;
        }
        Ok(())
    }

    fn spam(&mut self, q: usize) -> Result<()> {
        let Some(noise) = self.noise else { return Ok(()) };
        let p = noise.p_spam(q);
        if p == 0.0 {
            return Ok(());
        }
        let k = make_spam_bitflip(p)?;
        let t = [self.local[q]];
        self.for_each(|_, rho| rho.apply_kraus(&k, &t))
    }

    /// Splits every branch on the computational-basis value of `q`.
    /// `record` decides the register value of each child; `flip_one` applies
    /// X to the outcome-1 child (reset).
    fn project(&mut self, q: usize, record: impl Fn(u64, bool) -> u64, flip_one: bool) {
        let bit = 1usize << self.local[q];
        let dim = 1usize << self.n_local;
        let mut next: Branches = BTreeMap::new();
        for (bits, m) in std::mem::take(&mut self.branches) {
            for outcome in [false, true] {
                let mut child = ComplexMatrix::zeros(dim, dim);
                let mut weight = 0.0;
                for r in (0..dim).filter(|r| (r & bit != 0) == outcome) {
                    weight += m[(r, r)].re;
                    for c in (0..dim).filter(|c| (c & bit != 0) == outcome) {
                        let (rr, cc) = if flip_one && outcome {
                            (r ^ bit, c ^ bit)
                        } else {
                            (r, c)
                        };
                        child[(rr, cc)] = m[(r, c)];
                    }
                }
                if weight <= BRANCH_CUTOFF {
                    continue;
                }
                let key = record(bits, outcome);
                match next.get_mut(&key) {
                    Some(acc) => {
                        for (a, v) in acc.as_mut_slice().iter_mut().zip(child.as_slice()) {
                            *a += v;
                        }
                    }
                    None => {
                        next.insert(key, child);
                    }
                }
            }
        }
        self.branches = next;
    }

    fn step(&mut self, inst: &crate::circuit::Instruction, index: usize) -> Result<()> {
        match &inst.op {
            Op::Gate(kind) => {
                if let Some(cond) = inst.condition {
                    if cond.mask & !self.written != 0 {
                        return Err(Error::Execution(format!(
                            "instruction {index} is conditioned on an unmeasured clbit"
                        )));
                    }
                }
                let u = gate_matrix(kind);
                let targets = self.local(&inst.qubits);
                let gate_noise = match self.noise {
                    Some(n) => n.gate(kind, &inst.qubits)?,
                    None => None,
                };
                let channels: Vec<_> = gate_noise
                    .map(|g| g.channels())
                    .unwrap_or_default()
                    .into_iter()
                    .map(|(q, k)| (self.local[q], k))
                    .collect();
                let cond = inst.condition;
                self.for_each(|bits, rho| {
                    if cond.is_some_and(|c| !c.holds(bits)) {
                        return Ok(());
                    }
                    rho.apply_unitary(&u, &targets)?;
                    for (q, k) in &channels {
                        rho.apply_kraus(k, &[*q])?;
                    }
                    Ok(())
                })
            }
            Op::Measure { clbit } => {
                self.spam(inst.qubits[0])?;
                let mask = 1u64 << clbit;
                self.project(
                    inst.qubits[0],
                    |bits, one| if one { bits | mask } else { bits & !mask },
                    false,
                );
                self.written |= mask;
                Ok(())
            }
            Op::Reset => {
                self.spam(inst.qubits[0])?;
                self.project(inst.qubits[0], |bits, _| bits, true);
                Ok(())
            }
            Op::Barrier { .. } => Ok(()),
            Op::Error(p) => {
                let u = p.matrix();
                let t = self.local(&inst.qubits);
                self.for_each(|_, rho| rho.apply_unitary(&u, &t))
            }
        }
    }

    fn total_trace(&self) -> f64 {
        self.branches.values().map(|m| m.trace().re).sum()
    }
}

fn prepare<'a>(c: &Circuit, noise: Option<&'a NoiseModel>, active: &[usize]) -> Result<Engine<'a>> {
    if let Some(n) = noise {
        if c.n_qubits() > n.n_qubits() {
            return Err(Error::Capacity {
                needed: c.n_qubits(),
                available: n.n_qubits(),
            });
        }
    }
    if active.len() > MAX_SIM_QUBITS {
        return Err(Error::Capacity {
            needed: active.len(),
            available: MAX_SIM_QUBITS,
        });
    }
    let mut local = vec![usize::MAX; c.n_qubits()];
    for (i, &q) in active.iter().enumerate() {
        local[q] = i;
    }
    let n_local = active.len();
    let mut engine = Engine {
        noise,
        local,
        n_local,
        branches: BTreeMap::from([(0, DensityMatrix::zero_state(n_local).matrix().clone())]),
        written: 0,
    };
    if noise.is_some_and(NoiseModel::prep_spam) {
        for &q in active {
            engine.spam(q)?;
        }
    }
    Ok(engine)
}

fn evolve<'a>(c: &Circuit, noise: Option<&'a NoiseModel>, active: &[usize]) -> Result<Engine<'a>> {
    let mut engine = prepare(c, noise, active)?;
    for (i, inst) in c.instructions().iter().enumerate() {
        engine.step(inst, i)?;
        debug_assert!((engine.total_trace() - 1.0).abs() < 1e-9);
    }
    Ok(engine)
}

/// Exact distribution of the classical register.
fn exact_distribution(c: &Circuit, noise: Option<&NoiseModel>) -> Result<BTreeMap<u64, f64>> {
    let engine = evolve(c, noise, &c.active_qubits())?;
    let mut probs: BTreeMap<u64, f64> = engine
        .branches
        .iter()
        .map(|(&k, m)| (k, m.trace().re.max(0.0)))
        .filter(|&(_, p)| p > 0.0)
        .collect();
    let total: f64 = probs.values().sum();
    if !(total > 0.0) {
        return Err(Error::Execution("final state has zero trace".into()));
    }
    probs.values_mut().for_each(|p| *p /= total);
    Ok(probs)
}

/// Draws `shots` outcomes; shot `i` uses its own generator stream so the
/// result does not depend on scheduling.
pub fn sample_distribution(dist: &BTreeMap<u64, f64>, shots: usize, seed: u64) -> BTreeMap<u64, usize> {
    let keys: Vec<u64> = dist.keys().copied().collect();
    let cdf: Vec<f64> = dist
        .values()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let draws: Vec<usize> = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = shot_rng(seed, i as u64);
            let u: f64 = rng.random::<f64>() * cdf.last().copied().unwrap_or(1.0);
            cdf.partition_point(|&c| c <= u).min(keys.len() - 1)
        })
        .collect();
    let mut counts = BTreeMap::new();
    for d in draws {
        *counts.entry(keys[d]).or_insert(0) += 1;
    }
    counts
}

/// Generator for one shot: seeded by `seed`, stream = shot index.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Runs `c`; see [`ExecutionOptions`] for the two modes.
pub fn run(c: &Circuit, opts: &ExecutionOptions) -> Result<ShotResult> {
    let probabilities = exact_distribution(c, opts.noise)?;
    if opts.shots == 0 {
        return Ok(ShotResult::Exact {
            n_clbits: c.n_clbits(),
            probabilities,
        });
    }
    Ok(ShotResult::Counts {
        n_clbits: c.n_clbits(),
        shots: opts.shots,
        counts: sample_distribution(&probabilities, opts.shots, opts.seed),
    })
}

/// Final state over the full register, averaged over measurement outcomes.
pub fn final_state(c: &Circuit, noise: Option<&NoiseModel>) -> Result<DensityMatrix> {
    let all: Vec<usize> = (0..c.n_qubits()).collect();
    let engine = evolve(c, noise, &all)?;
    let dim = 1usize << c.n_qubits();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for m in engine.branches.values() {
        for (a, v) in acc.as_mut_slice().iter_mut().zip(m.as_slice()) {
            *a += v;
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(acc))
}

/// `Tr(O ρ)` for the noiseless final state.
pub fn expectation(c: &Circuit, observable: &ComplexMatrix) -> Result<f64> {
    expectation_with_noise(c, observable, None)
}

pub fn expectation_with_noise(c: &Circuit, observable: &ComplexMatrix, noise: Option<&NoiseModel>) -> Result<f64> {
    if !observable.is_hermitian(1e-10) {
        return Err(Error::param("observable is not Hermitian"));
    }
    final_state(c, noise)?.expectation(observable)
}

/// Identity on `n` qubits except `op` on qubit `q`.
pub fn single_qubit_observable(op: &ComplexMatrix, q: usize, n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1);
    for i in (0..n).rev() {
        let f = if i == q { op.clone() } else { ComplexMatrix::identity(2) };
        out = out.kron(&f);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{build_noise_model, presets};
    use crate::channels::{make_amplitude_damping, make_phase_damping};
    use crate::circuit::{Condition, GateKind, Pauli};
    use crate::matrix::{pauli_x, pauli_z};
    use proptest::prelude::*;

    fn bell() -> Circuit {
        let mut c = Circuit::new(2, 2);
        c.gate(GateKind::H, &[0]).unwrap();
        c.gate(GateKind::CNOT, &[0, 1]).unwrap();
        c.measure(0, 0).unwrap().measure(1, 1).unwrap();
        c
    }

    #[test]
    fn bell_exact() {
        let r = run(&bell(), &ExecutionOptions::exact(None)).unwrap();
        let d = r.distribution();
        assert_eq!(d.len(), 2);
        assert!((d[&0b00] - 0.5).abs() < 1e-12);
        assert!((d[&0b11] - 0.5).abs() < 1e-12);
        assert_eq!(r.bitstring(0b11), "11");
    }

    #[test]
    fn spam_on_x() {
        let d = presets::builtin("ibm-falcon-27").unwrap();
        let spam = NoiseModel::uniform_depolarizing(&d, 0.0)
            .unwrap()
            .with_spam(0.03)
            .unwrap();
        let mut c = Circuit::new(1, 1);
        c.gate(GateKind::X, &[0]).unwrap().measure(0, 0).unwrap();
        let meas_only = spam.clone().with_prep_spam(false);
        let r = run(&c, &ExecutionOptions::exact(Some(&meas_only))).unwrap();
        assert!((r.probability(1) - 0.97).abs() < 1e-12);
        // with the preparation flip as well: 0.97² + 0.03²
        let r = run(&c, &ExecutionOptions::exact(Some(&spam))).unwrap();
        assert!((r.probability(1) - (0.97f64.powi(2) + 0.03f64.powi(2))).abs() < 1e-12);
    }

    #[test]
    fn shots_match_exact_within_4_sigma() {
        let shots = 100_000;
        let r = run(&bell(), &ExecutionOptions::sampled(shots, 7, None)).unwrap();
        let ShotResult::Counts { counts, .. } = &r else {
            panic!()
        };
        assert_eq!(counts.values().sum::<usize>(), shots);
        let sigma = (0.25 / shots as f64).sqrt();
        for k in [0b00, 0b11] {
            assert!((r.probability(k) - 0.5).abs() < 4.0 * sigma);
        }
        let again = run(&bell(), &ExecutionOptions::sampled(shots, 7, None)).unwrap();
        assert_eq!(r, again);
        let other = run(&bell(), &ExecutionOptions::sampled(shots, 8, None)).unwrap();
        assert_ne!(r, other);
    }

    #[test]
    fn conditioned_gate_branches() {
        // measure |+⟩, flip qubit 1 when the outcome was 1 → perfectly correlated
        let mut c = Circuit::new(2, 2);
        c.gate(GateKind::H, &[0]).unwrap().measure(0, 0).unwrap();
        c.conditioned(GateKind::X, &[1], Condition::bit(0, true)).unwrap();
        c.measure(1, 1).unwrap();
        let r = run(&c, &ExecutionOptions::exact(None)).unwrap();
        assert!((r.probability(0b11) - 0.5).abs() < 1e-12);
        assert!((r.probability(0b00) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unmeasured_condition_errors() {
        let mut c = Circuit::new(1, 1);
        c.conditioned(GateKind::X, &[0], Condition::bit(0, true)).unwrap();
        assert!(matches!(
            run(&c, &ExecutionOptions::exact(None)),
            Err(Error::Execution(_))
        ));
    }

    #[test]
    fn reset_returns_to_zero() {
        let mut c = Circuit::new(1, 1);
        c.gate(GateKind::H, &[0])
            .unwrap()
            .reset(0)
            .unwrap()
            .measure(0, 0)
            .unwrap();
        let r = run(&c, &ExecutionOptions::exact(None)).unwrap();
        assert!((r.probability(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn injected_error_is_applied() {
        let mut c = Circuit::new(1, 1);
        c.error(Pauli::X, 0).unwrap().measure(0, 0).unwrap();
        let r = run(&c, &ExecutionOptions::exact(None)).unwrap();
        assert!((r.probability(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_examples() {
        let c = Circuit::new(1, 0);
        assert!((expectation(&c, &pauli_z()).unwrap() - 1.0).abs() < 1e-12);

        let mut one = DensityMatrix::basis_state(1, 1);
        one.apply_kraus(&make_amplitude_damping(0.5).unwrap(), &[0]).unwrap();
        assert!(one.expectation(&pauli_z()).unwrap().abs() < 1e-12);

        let p_pd = 0.36;
        let mut c = Circuit::new(1, 0);
        c.gate(GateKind::H, &[0]).unwrap();
        let mut plus = final_state(&c, None).unwrap();
        plus.apply_kraus(&make_phase_damping(p_pd).unwrap(), &[0]).unwrap();
        let x = plus.expectation(&pauli_x()).unwrap();
        assert!((x - (1.0f64 - p_pd).sqrt()).abs() < 1e-12);

        let non_hermitian = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(expectation(&c, &non_hermitian).is_err());
    }

    #[test]
    fn compaction_handles_device_registers() {
        let d = presets::builtin("ibm-falcon-27").unwrap();
        let noise = build_noise_model(&d).unwrap();
        let mut c = Circuit::new(27, 2);
        c.gate(GateKind::X, &[25]).unwrap();
        c.gate(GateKind::CNOT, &[25, 26]).unwrap();
        c.measure(25, 0).unwrap().measure(26, 1).unwrap();
        let r = run(&c, &ExecutionOptions::exact(Some(&noise))).unwrap();
        let total: f64 = r.distribution().values().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(r.probability(0b11) > 0.85);
    }

    #[test]
    fn noisy_trace_preserved_after_every_instruction() {
        let d = presets::builtin("nv-center-5").unwrap();
        let noise = build_noise_model(&d).unwrap();
        let mut c = Circuit::new(5, 2);
        c.gate(GateKind::RY(0.7), &[0]).unwrap();
        c.gate(GateKind::CZ, &[1, 0]).unwrap();
        c.measure(0, 0).unwrap();
        c.gate(GateKind::CCZ, &[1, 2, 0]).unwrap();
        c.reset(1).unwrap();
        c.measure(2, 1).unwrap();
        let active = c.active_qubits();
        let mut engine = prepare(&c, Some(&noise), &active).unwrap();
        for (i, inst) in c.instructions().iter().enumerate() {
            engine.step(inst, i).unwrap();
            assert!((engine.total_trace() - 1.0).abs() < 1e-10);
        }
    }

    fn random_gate() -> impl Strategy<Value = (u8, usize, usize, f64)> {
        (0u8..6, 0usize..3, 0usize..3, -3.0f64..3.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn exact_distribution_sums_to_one(gates in proptest::collection::vec(random_gate(), 0..12)) {
            let mut c = Circuit::new(3, 3);
            for (k, a, b, t) in gates {
                match k {
                    0 => { c.gate(GateKind::H, &[a]).unwrap(); }
                    1 => { c.gate(GateKind::RX(t), &[a]).unwrap(); }
                    2 => { c.gate(GateKind::RY(t), &[a]).unwrap(); }
                    3 if a != b => { c.gate(GateKind::CNOT, &[a, b]).unwrap(); }
                    4 => { c.measure(a, b).unwrap(); }
                    _ => { c.reset(a).unwrap(); }
                }
            }
            for q in 0..3 { c.measure(q, q).unwrap(); }
            let r = run(&c, &ExecutionOptions::exact(None)).unwrap();
            let total: f64 = r.distribution().values().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(r.distribution().values().all(|&p| p >= 0.0));
        }
    }
}
