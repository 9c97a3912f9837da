//! Three-qubit bit-flip and phase-flip repetition codes.
//!
//! Register layout: data qubits 0–2, syndrome ancillas 3–4. Clbits 0 and 1
//! hold the syndrome bits (parities of data pairs (0,1) and (1,2)), clbits
//! 2–4 the data readout.

use std::collections::BTreeMap;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, Instruction, Op, Pauli, ERROR_SLOT};
use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::simulator::{self, shot_rng, ExecutionOptions, ShotResult};

pub const CODE_QUBITS: usize = 3;
pub const N_QUBITS: usize = 5;
pub const N_CLBITS: usize = 5;
const ANCILLA: [usize; 2] = [3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    BitFlip,
    PhaseFlip,
}

impl CodeKind {
    /// The error the code corrects.
    pub fn correctable(self) -> Pauli {
        match self {
            CodeKind::BitFlip => Pauli::X,
            CodeKind::PhaseFlip => Pauli::Z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodeKind::BitFlip => "bit-flip",
            CodeKind::PhaseFlip => "phase-flip",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recovery {
    /// Measure the syndrome and fix the readout classically.
    PostProcessing,
    /// Correct coherently with doubly controlled gates before readout.
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
    /// `α|0⟩ + β|1⟩`, each amplitude as `[re, im]`.
    Amplitudes {
        alpha: [f64; 2],
        beta: [f64; 2],
    },
}

impl InputState {
    /// The six Pauli eigenstates.
    pub const PAULI: [InputState; 6] = [
        InputState::Zero,
        InputState::One,
        InputState::Plus,
        InputState::Minus,
        InputState::PlusI,
        InputState::MinusI,
    ];

    pub fn amplitudes(&self) -> (C64, C64) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            InputState::Zero => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            InputState::One => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            InputState::Plus => (C64::new(h, 0.0), C64::new(h, 0.0)),
            InputState::Minus => (C64::new(h, 0.0), C64::new(-h, 0.0)),
            InputState::PlusI => (C64::new(h, 0.0), C64::new(0.0, h)),
            InputState::MinusI => (C64::new(h, 0.0), C64::new(0.0, -h)),
            InputState::Amplitudes { alpha, beta } => (C64::new(alpha[0], alpha[1]), C64::new(beta[0], beta[1])),
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.amplitudes();
        let norm = a.norm_sqr() + b.norm_sqr();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::param(format!("input_state: |α|² + |β|² = {norm}, expected 1")));
        }
        Ok(())
    }

    /// `RY(θ)` then `RZ(φ)` on |0⟩, equal to the state up to global phase.
    fn preparation(&self) -> Vec<GateKind> {
        let (a, b) = self.amplitudes();
        let theta = 2.0 * b.norm().atan2(a.norm());
        let phi = if a.norm() < 1e-15 || b.norm() < 1e-15 {
            0.0
        } else {
            b.arg() - a.arg()
        };
        let mut gates = Vec::new();
        if theta.abs() > 1e-15 {
            gates.push(GateKind::RY(theta));
        }
        if phi.abs() > 1e-15 {
            gates.push(GateKind::RZ(phi));
        }
        gates
    }

    /// Ideal probability that the logical readout is 0.
    pub fn p_zero(&self) -> f64 {
        self.amplitudes().0.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorSite {
    pub pauli: Pauli,
    pub qubit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InjectedError {
    None,
    /// The code's correctable error on one code qubit, uniformly chosen.
    Random,
    /// Like `Random`, with the error-free case as a fourth equally likely member.
    RandomWithNone,
    /// Every listed error, applied together.
    Fixed(Vec<ErrorSite>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub kind: CodeKind,
    pub recovery: Recovery,
    #[serde(default = "default_input")]
    pub input_state: InputState,
    #[serde(default = "default_injection")]
    pub injected_error: InjectedError,
}

fn default_input() -> InputState {
    InputState::Zero
}

fn default_injection() -> InjectedError {
    InjectedError::Random
}

impl CodeSpec {
    pub fn new(kind: CodeKind, recovery: Recovery) -> Self {
        Self {
            kind,
            recovery,
            input_state: InputState::Zero,
            injected_error: InjectedError::Random,
        }
    }

    pub fn with_input(mut self, s: InputState) -> Self {
        self.input_state = s;
        self
    }

    pub fn with_error(mut self, e: InjectedError) -> Self {
        self.injected_error = e;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.input_state.validate()?;
        if let InjectedError::Fixed(sites) = &self.injected_error {
            if let Some(s) = sites.iter().find(|s| s.qubit >= CODE_QUBITS) {
                return Err(Error::param(format!(
                    "injected_error: qubit {} is not a code qubit (0..{CODE_QUBITS})",
                    s.qubit
                )));
            }
        }
        Ok(())
    }

    /// Injected-error family as `(weight, errors)`.
    pub fn error_family(&self) -> Vec<(f64, Vec<ErrorSite>)> {
        let single = |q| {
            vec![ErrorSite {
                pauli: self.kind.correctable(),
                qubit: q,
            }]
        };
        match &self.injected_error {
            InjectedError::None => vec![(1.0, vec![])],
            InjectedError::Fixed(sites) => vec![(1.0, sites.clone())],
            InjectedError::Random => (0..CODE_QUBITS).map(|q| (1.0 / 3.0, single(q))).collect(),
            InjectedError::RandomWithNone => std::iter::once((0.25, vec![]))
                .chain((0..CODE_QUBITS).map(|q| (0.25, single(q))))
                .collect(),
        }
    }
}

fn with_ancilla_pattern(c: &mut Circuit, pattern: (bool, bool), gate: GateKind, target: usize) -> Result<()> {
    let flips: Vec<usize> = [(pattern.0, ANCILLA[0]), (pattern.1, ANCILLA[1])]
        .into_iter()
        .filter(|&(want_one, _)| !want_one)
        .map(|(_, q)| q)
        .collect();
    for &q in &flips {
        c.gate(GateKind::X, &[q])?;
    }
    c.gate(gate, &[ANCILLA[0], ANCILLA[1], target])?;
    for &q in &flips {
        c.gate(GateKind::X, &[q])?;
    }
    Ok(())
}

/// Syndrome `(s0, s1)` → data qubit to correct.
pub fn syndrome_target(s0: bool, s1: bool) -> Option<usize> {
    match (s0, s1) {
        (false, false) => None,
        (true, false) => Some(0),
        (true, true) => Some(1),
        (false, true) => Some(2),
    }
}

/// Circuit with an empty error slot; see [`inject_error`].
pub fn build_code_circuit(spec: &CodeSpec) -> Result<Circuit> {
    spec.validate()?;
    let phase = spec.kind == CodeKind::PhaseFlip;
    let data = [0, 1, 2];
    let mut c = Circuit::new(N_QUBITS, N_CLBITS);
    for g in spec.input_state.preparation() {
        c.gate(g, &[0])?;
    }
    c.gate(GateKind::CNOT, &[0, 1])?;
    c.gate(GateKind::CNOT, &[0, 2])?;
    if phase {
        for q in data {
            c.gate(GateKind::H, &[q])?;
        }
    }
    c.barrier(ERROR_SLOT, &data)?;
    if phase {
        for q in data {
            c.gate(GateKind::H, &[q])?;
        }
    }
    for (d, a) in [(0, 3), (1, 3), (1, 4), (2, 4)] {
        c.gate(GateKind::CNOT, &[d, a])?;
    }
    if phase {
        for q in data {
            c.gate(GateKind::H, &[q])?;
        }
    }
    match spec.recovery {
        Recovery::PostProcessing => {
            c.measure(ANCILLA[0], 0)?.measure(ANCILLA[1], 1)?;
        }
        Recovery::Unitary => {
            let gate = if phase { GateKind::CCZ } else { GateKind::CCX };
            for pattern in [(true, false), (true, true), (false, true)] {
                let target = syndrome_target(pattern.0, pattern.1).expect("nonzero syndrome");
                with_ancilla_pattern(&mut c, pattern, gate, target)?;
            }
        }
    }
    for q in data {
        if phase {
            c.gate(GateKind::H, &[q])?;
        }
        c.measure(q, 2 + q)?;
    }
    if spec.recovery == Recovery::Unitary {
        c.measure(ANCILLA[0], 0)?.measure(ANCILLA[1], 1)?;
    }
    Ok(c)
}

/// Inserts `errors` right after the error-slot barrier. Code qubit `i` is
/// the `i`-th qubit of that barrier, so this also works on transpiled
/// circuits.
pub fn insert_errors(c: &Circuit, errors: &[ErrorSite]) -> Result<Circuit> {
    let at = c
        .find_barrier(ERROR_SLOT)
        .ok_or_else(|| Error::param(format!("circuit has no `{ERROR_SLOT}` barrier")))?;
    let slot = c.instructions()[at].qubits.clone();
    let mut out = c.clone();
    for (k, e) in errors.iter().enumerate() {
        let q = *slot.get(e.qubit).ok_or(Error::IndexOutOfRange {
            index: e.qubit,
            size: slot.len(),
        })?;
        out.insert(
            at + 1 + k,
            Instruction {
                op: Op::Error(e.pauli),
                qubits: vec![q],
                condition: None,
            },
        )?;
    }
    Ok(out)
}

/// The weighted circuit family for the spec's injected error.
pub fn inject_error(c: &Circuit, spec: &CodeSpec) -> Result<Vec<(f64, Circuit)>> {
    spec.validate()?;
    spec.error_family()
        .into_iter()
        .map(|(w, errs)| Ok((w, insert_errors(c, &errs)?)))
        .collect()
}

/// Logical bit from one post-processing readout.
pub fn decode_postprocess(syndrome: (bool, bool), data: [bool; 3]) -> bool {
    let mut data = data;
    if let Some(q) = syndrome_target(syndrome.0, syndrome.1) {
        data[q] = !data[q];
    }
    majority(data)
}

fn majority(data: [bool; 3]) -> bool {
    data.iter().filter(|&&b| b).count() >= 2
}

fn split_register(bits: u64) -> ((bool, bool), [bool; 3]) {
    let b = |i: u32| (bits >> i) & 1 == 1;
    ((b(0), b(1)), [b(2), b(3), b(4)])
}

/// Logical readout of one register value under the spec's recovery.
pub fn decode(bits: u64, recovery: Recovery) -> bool {
    let (syndrome, data) = split_register(bits);
    match recovery {
        Recovery::PostProcessing => decode_postprocess(syndrome, data),
        Recovery::Unitary => majority(data),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalResult {
    pub logical_error_rate: f64,
    /// Syndrome `"s0s1"` → probability (or frequency).
    pub syndrome_histogram: BTreeMap<String, f64>,
    pub raw: ShotResult,
}

/// Distance between the decoded logical distribution and the ideal one.
pub fn logical_error_rate(result: &ShotResult, spec: &CodeSpec) -> Result<LogicalResult> {
    if result.n_clbits() != N_CLBITS {
        return Err(Error::param(format!(
            "result has {} clbits, code circuits have {N_CLBITS}",
            result.n_clbits()
        )));
    }
    let dist = result.distribution();
    let p_one: f64 = dist
        .iter()
        .filter(|(&bits, _)| decode(bits, spec.recovery))
        .map(|(_, p)| p)
        .sum();
    let ideal_one = 1.0 - spec.input_state.p_zero();
    let rate = (p_one - ideal_one).abs().clamp(0.0, 1.0);
    let mut syndrome_histogram = BTreeMap::new();
    for (&bits, &p) in &dist {
        let ((s0, s1), _) = split_register(bits);
        *syndrome_histogram
            .entry(format!("{}{}", s0 as u8, s1 as u8))
            .or_insert(0.0) += p;
    }
    Ok(LogicalResult {
        logical_error_rate: rate,
        syndrome_histogram,
        raw: result.clone(),
    })
}

fn merge_exact(parts: &[(f64, ShotResult)]) -> ShotResult {
    let mut probabilities = BTreeMap::new();
    for (w, r) in parts {
        for (k, p) in r.distribution() {
            *probabilities.entry(k).or_insert(0.0) += w * p;
        }
    }
    ShotResult::Exact {
        n_clbits: N_CLBITS,
        probabilities,
    }
}

/// Runs every member of a weighted family. Exact mode returns each
/// member's distribution; shot mode draws the member per shot (weighted)
/// and then the outcome, both from that shot's generator stream.
pub fn run_family(family: &[(f64, Circuit)], opts: &ExecutionOptions) -> Result<Vec<(f64, ShotResult)>> {
    let exact: Vec<(f64, ShotResult)> = family
        .iter()
        .map(|(w, c)| Ok((*w, simulator::run(c, &ExecutionOptions::exact(opts.noise))?)))
        .collect::<Result<_>>()?;
    if opts.shots == 0 {
        return Ok(exact);
    }
    let total: f64 = exact.iter().map(|(w, _)| w).sum();
    let cdfs: Vec<(Vec<u64>, Vec<f64>)> = exact
        .iter()
        .map(|(_, r)| {
            let d = r.distribution();
            let mut acc = 0.0;
            let cdf = d.values().map(|p| {
                acc += p;
                acc
            });
            (d.keys().copied().collect(), cdf.collect())
        })
        .collect();
    let mut counts: Vec<BTreeMap<u64, usize>> = vec![BTreeMap::new(); exact.len()];
    for shot in 0..opts.shots {
        let mut rng = shot_rng(opts.seed, shot as u64);
        let mut u = rng.random::<f64>() * total;
        let member = exact
            .iter()
            .position(|(w, _)| {
                if u < *w {
                    return true;
                }
                u -= w;
                false
            })
            .unwrap_or(exact.len() - 1);
        let (keys, cdf) = &cdfs[member];
        let v = rng.random::<f64>() * cdf.last().copied().unwrap_or(1.0);
        let idx = cdf.partition_point(|&c| c <= v).min(keys.len() - 1);
        *counts[member].entry(keys[idx]).or_insert(0) += 1;
    }
    Ok(counts
        .into_iter()
        .map(|counts| {
            let shots = counts.values().sum();
            (
                shots as f64 / opts.shots as f64,
                ShotResult::Counts {
                    n_clbits: N_CLBITS,
                    shots,
                    counts,
                },
            )
        })
        .filter(|(_, r)| matches!(r, ShotResult::Counts { shots, .. } if *shots > 0))
        .collect())
}

/// Weighted mean of member error rates; the raw field holds the mixture.
pub fn family_logical_error(parts: &[(f64, ShotResult)], spec: &CodeSpec) -> Result<LogicalResult> {
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    let mut rate = 0.0;
    let mut hist: BTreeMap<String, f64> = BTreeMap::new();
    for (w, r) in parts {
        let lr = logical_error_rate(r, spec)?;
        rate += w / total * lr.logical_error_rate;
        for (k, p) in lr.syndrome_histogram {
            *hist.entry(k).or_insert(0.0) += w / total * p;
        }
    }
    let raw = match parts {
        [(_, only)] => only.clone(),
        _ if parts.iter().all(|(_, r)| r.is_exact()) => merge_exact(parts),
        _ => {
            let mut counts = BTreeMap::new();
            let mut shots = 0;
            for (_, r) in parts {
                if let ShotResult::Counts {
                    counts: c, shots: s, ..
                } = r
                {
                    shots += s;
                    for (k, n) in c {
                        *counts.entry(*k).or_insert(0) += n;
                    }
                }
            }
            ShotResult::Counts {
                n_clbits: N_CLBITS,
                shots,
                counts,
            }
        }
    };
    Ok(LogicalResult {
        logical_error_rate: rate.clamp(0.0, 1.0),
        syndrome_histogram: hist,
        raw,
    })
}

/// Injects the spec's errors into `c` (a code circuit, possibly
/// transpiled), runs the family and decodes.
pub fn evaluate_code(c: &Circuit, spec: &CodeSpec, opts: &ExecutionOptions) -> Result<LogicalResult> {
    let family = inject_error(c, spec)?;
    let parts = run_family(&family, opts)?;
    family_logical_error(&parts, spec)
}

/// Mean logical error over the six Pauli input states.
pub fn pauli_averaged_error<F>(spec: &CodeSpec, mut build: F, opts: &ExecutionOptions) -> Result<f64>
where
    F: FnMut(&CodeSpec) -> Result<Circuit>,
{
    let mut sum = 0.0;
    for s in InputState::PAULI {
        let spec = spec.clone().with_input(s);
        sum += evaluate_code(&build(&spec)?, &spec, opts)?.logical_error_rate;
    }
    Ok(sum / InputState::PAULI.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::count_ops;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn exact() -> ExecutionOptions<'static> {
        ExecutionOptions::exact(None)
    }

    fn syndrome_of(spec: &CodeSpec) -> BTreeMap<String, f64> {
        let c = build_code_circuit(spec).unwrap();
        evaluate_code(&c, spec, &exact()).unwrap().syndrome_histogram
    }

    #[test]
    fn no_error_gives_trivial_syndrome() {
        let spec = CodeSpec::new(CodeKind::BitFlip, Recovery::PostProcessing).with_error(InjectedError::None);
        let h = syndrome_of(&spec);
        assert!((h["00"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn syndrome_identifies_flipped_qubit() {
        for kind in [CodeKind::BitFlip, CodeKind::PhaseFlip] {
            for recovery in [Recovery::PostProcessing, Recovery::Unitary] {
                for q in 0..3 {
                    let spec = CodeSpec::new(kind, recovery).with_error(InjectedError::Fixed(vec![ErrorSite {
                        pauli: kind.correctable(),
                        qubit: q,
                    }]));
                    let h = syndrome_of(&spec);
                    let expected = match q {
                        0 => "10",
                        1 => "11",
                        _ => "01",
                    };
                    assert!((h[expected] - 1.0).abs() < 1e-12, "{kind:?} {recovery:?} q{q}: {h:?}");
                }
            }
        }
    }

    #[test]
    fn decoder_examples() {
        assert!(!decode_postprocess((false, false), [false, false, false]));
        assert!(!decode_postprocess((true, true), [false, true, false]));
        assert!(decode_postprocess((false, true), [true, true, false]));
    }

    #[test]
    fn decoder_matches_brute_force_syndromes() {
        // each single flip on a codeword produces a syndrome that the decoder undoes
        for logical in [false, true] {
            for q in 0..3 {
                let mut data = [logical; 3];
                data[q] = !data[q];
                let s = (data[0] != data[1], data[1] != data[2]);
                assert_eq!(syndrome_target(s.0, s.1), Some(q));
                assert_eq!(decode_postprocess(s, data), logical);
            }
        }
    }

    #[test]
    fn every_single_error_is_corrected() {
        for kind in [CodeKind::BitFlip, CodeKind::PhaseFlip] {
            for recovery in [Recovery::PostProcessing, Recovery::Unitary] {
                for input in InputState::PAULI {
                    for q in 0..3 {
                        let spec = CodeSpec::new(kind, recovery)
                            .with_input(input)
                            .with_error(InjectedError::Fixed(vec![ErrorSite {
                                pauli: kind.correctable(),
                                qubit: q,
                            }]));
                        let c = build_code_circuit(&spec).unwrap();
                        let r = evaluate_code(&c, &spec, &exact()).unwrap();
                        assert!(r.logical_error_rate < 1e-12, "{kind:?} {recovery:?} {input:?} q{q}");
                    }
                }
            }
        }
    }

    #[test]
    fn two_flips_miscorrect() {
        for recovery in [Recovery::PostProcessing, Recovery::Unitary] {
            let spec = CodeSpec::new(CodeKind::BitFlip, recovery).with_error(InjectedError::Fixed(vec![
                ErrorSite {
                    pauli: Pauli::X,
                    qubit: 0,
                },
                ErrorSite {
                    pauli: Pauli::X,
                    qubit: 1,
                },
            ]));
            let c = build_code_circuit(&spec).unwrap();
            let r = evaluate_code(&c, &spec, &exact()).unwrap();
            assert!((r.logical_error_rate - 1.0).abs() < 1e-12);
        }
    }

    fn nv_transpiled(spec: &CodeSpec) -> (Circuit, crate::calibration::NoiseModel) {
        let d = crate::calibration::presets::builtin("nv-center-5").unwrap();
        let noise = crate::calibration::build_noise_model(&d).unwrap();
        let c = build_code_circuit(spec).unwrap();
        let t = crate::transpiler::transpile(&c, &d, &noise).unwrap();
        (t.circuit, noise)
    }

    #[test]
    fn random_is_mean_of_deterministic() {
        let base = CodeSpec::new(CodeKind::BitFlip, Recovery::PostProcessing);
        let (c, noise) = nv_transpiled(&base);
        let opts = ExecutionOptions::exact(Some(&noise));
        let random = evaluate_code(&c, &base, &opts).unwrap().logical_error_rate;
        let mean = (0..3)
            .map(|q| {
                let s = base.clone().with_error(InjectedError::Fixed(vec![ErrorSite {
                    pauli: Pauli::X,
                    qubit: q,
                }]));
                evaluate_code(&c, &s, &opts).unwrap().logical_error_rate
            })
            .sum::<f64>()
            / 3.0;
        assert!(random > 0.0);
        assert!((random - mean).abs() < 1e-12);
    }

    #[test]
    fn shot_mode_tracks_exact() {
        let spec = CodeSpec::new(CodeKind::BitFlip, Recovery::PostProcessing);
        let (c, noise) = nv_transpiled(&spec);
        let exact = evaluate_code(&c, &spec, &ExecutionOptions::exact(Some(&noise))).unwrap();
        let shots = 20_000;
        let sampled = evaluate_code(&c, &spec, &ExecutionOptions::sampled(shots, 11, Some(&noise))).unwrap();
        let p = exact.logical_error_rate;
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        assert!((sampled.logical_error_rate - p).abs() < 4.0 * sigma + 1e-3);
        let ShotResult::Counts { shots: n, .. } = sampled.raw else {
            panic!()
        };
        assert_eq!(n, shots);
    }

    #[test]
    fn injection_modes() {
        let spec = CodeSpec::new(CodeKind::BitFlip, Recovery::PostProcessing).with_error(InjectedError::None);
        let c = build_code_circuit(&spec).unwrap();
        let fam = inject_error(&c, &spec).unwrap();
        assert_eq!(fam, vec![(1.0, c.clone())]);

        let fixed = spec.clone().with_error(InjectedError::Fixed(vec![ErrorSite {
            pauli: Pauli::X,
            qubit: 0,
        }]));
        let fam = inject_error(&c, &fixed).unwrap();
        assert_eq!(fam[0].1.len(), c.len() + 1);
        assert_eq!(count_ops(&fam[0].1)["error"], 1);
        let at = c.find_barrier(ERROR_SLOT).unwrap();
        assert_eq!(fam[0].1.instructions()[at + 1].op, Op::Error(Pauli::X));

        assert_eq!(
            inject_error(&c, &spec.clone().with_error(InjectedError::Random))
                .unwrap()
                .len(),
            3
        );
        assert_eq!(
            inject_error(&c, &spec.clone().with_error(InjectedError::RandomWithNone))
                .unwrap()
                .len(),
            4
        );

        let no_slot = Circuit::new(5, 5);
        assert!(inject_error(&no_slot, &fixed).is_err());
    }

    #[test]
    fn invalid_specs() {
        let bad = CodeSpec::new(CodeKind::BitFlip, Recovery::Unitary).with_input(InputState::Amplitudes {
            alpha: [1.0, 0.0],
            beta: [0.1, 0.0],
        });
        assert!(build_code_circuit(&bad).is_err());
        let bad =
            CodeSpec::new(CodeKind::BitFlip, Recovery::Unitary).with_error(InjectedError::Fixed(vec![ErrorSite {
                pauli: Pauli::X,
                qubit: 3,
            }]));
        assert!(build_code_circuit(&bad).is_err());
    }

    #[test]
    fn spec_from_toml() {
        let spec: CodeSpec = toml::from_str(
            "kind = \"phase-flip\"\nrecovery = \"unitary\"\ninput_state = \"plus-i\"\ninjected_error = { fixed = [{ pauli = \"z\", qubit = 2 }] }\n",
        )
        .unwrap();
        assert_eq!(spec.kind, CodeKind::PhaseFlip);
        assert_eq!(spec.input_state, InputState::PlusI);
        assert_eq!(
            spec.injected_error,
            InjectedError::Fixed(vec![ErrorSite {
                pauli: Pauli::Z,
                qubit: 2
            }])
        );
    }

    #[test]
    fn phase_bit_duality() {
        for recovery in [Recovery::PostProcessing, Recovery::Unitary] {
            for input in InputState::PAULI {
                for q in 0..3 {
                    let run = |kind: CodeKind| {
                        let spec = CodeSpec::new(kind, recovery)
                            .with_input(input)
                            .with_error(InjectedError::Fixed(vec![ErrorSite {
                                pauli: kind.correctable(),
                                qubit: q,
                            }]));
                        let c = build_code_circuit(&spec).unwrap();
                        evaluate_code(&c, &spec, &exact()).unwrap().raw.distribution()
                    };
                    let (a, b) = (run(CodeKind::BitFlip), run(CodeKind::PhaseFlip));
                    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
                    for (k, p) in &a {
                        assert!((p - b[k]).abs() < 1e-10);
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn arbitrary_inputs_survive_single_errors(theta in 0.0f64..PI, phi in -PI..PI, q in 0usize..3) {
            let input = InputState::Amplitudes {
                alpha: [(theta / 2.0).cos(), 0.0],
                beta: [(theta / 2.0).sin() * phi.cos(), (theta / 2.0).sin() * phi.sin()],
            };
            for kind in [CodeKind::BitFlip, CodeKind::PhaseFlip] {
                let spec = CodeSpec::new(kind, Recovery::PostProcessing)
                    .with_input(input)
                    .with_error(InjectedError::Fixed(vec![ErrorSite { pauli: kind.correctable(), qubit: q }]));
                let c = build_code_circuit(&spec).unwrap();
                let r = evaluate_code(&c, &spec, &exact()).unwrap();
                prop_assert!(r.logical_error_rate < 1e-10);
            }
        }
    }
}
