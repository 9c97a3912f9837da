//! Calibration numbers → channel parameters.

use std::collections::BTreeMap;

use super::device::{DeviceModel, Placement};
use crate::channels::{
    compose, make_amplitude_phase_damping, make_depolarizing, tensor, tensor_identity_fidelity, KrausSet,
};
use crate::circuit::GateKind;
use crate::error::{check_probability, Error, Result};

/// `(p_ad, p_pd)` for a gate of duration `dt` on a qubit with the given
/// coherence times. Either time may be infinite.
///
/// `p_pd` is clamped to 0 when `t2 > t1`; use [`damping_probs_checked`] to
/// learn whether that happened.
pub fn damping_probs(t1: f64, t2: f64, dt: f64) -> Result<(f64, f64)> {
    let (p_ad, p_pd, clamped) = damping_probs_checked(t1, t2, dt)?;
    if clamped {
        log::debug!("p_pd clamped to 0 for t1 = {t1}, t2 = {t2}, dt = {dt}");
    }
    Ok((p_ad, p_pd))
}

/// Like [`damping_probs`], also reporting whether `p_pd` was clamped.
pub fn damping_probs_checked(t1: f64, t2: f64, dt: f64) -> Result<(f64, f64, bool)> {
    if !(t1 > 0.0) || !(t2 > 0.0) {
        return Err(Error::param(format!("t1 = {t1} and t2 = {t2} must be positive")));
    }
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::param(format!("gate time {dt} must be finite and >= 0")));
    }
    let p_ad = -(-dt / t1).exp_m1();
    let raw = -(dt * (1.0 / t1 - 1.0 / t2)).exp_m1();
    let clamped = raw < 0.0;
    Ok((p_ad.clamp(0.0, 1.0), raw.clamp(0.0, 1.0), clamped))
}

fn depol_infidelity(p: f64, n_qubits: usize) -> f64 {
    let part = make_depolarizing(p, 1).expect("p in [0, 1]");
    let parts = vec![&part; n_qubits];
    1.0 - tensor_identity_fidelity(&parts)
}

/// Monotone bisection for `f(p) = target` on `[0, 1]` with `f` increasing.
fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick whichever bracket end is closer
    if (f(lo) - target).abs() <= (f(hi) - target).abs() {
        lo
    } else {
        hi
    }
}

/// Per-qubit depolarizing probability covering the infidelity left over
/// after damping, `r = p_g − (1 − f_damp)`, on `n_qubits` qubits that each
/// get the same probability. Returns 0 when damping explains everything and
/// 1 when no probability suffices; both cases log a warning.
pub fn depol_from_total_error(p_g: f64, f_damp: f64, n_qubits: usize) -> Result<f64> {
    check_probability("p_g", p_g)?;
    check_probability("f_damp", f_damp)?;
    if n_qubits == 0 {
        return Err(Error::param("n_qubits must be positive"));
    }
    let r = p_g - (1.0 - f_damp);
    if r <= 0.0 {
        if r < 0.0 {
            log::warn!("damping infidelity {} exceeds gate error {p_g}", 1.0 - f_damp);
        }
        return Ok(0.0);
    }
    if depol_infidelity(1.0, n_qubits) < r {
        log::warn!("residual infidelity {r} unreachable by depolarizing noise; using p = 1");
        return Ok(1.0);
    }
    Ok(bisect_increasing(|p| depol_infidelity(p, n_qubits), r))
}

/// Noise attached to one gate placement: for each acted-on qubit (ascending)
/// a damping pair, plus a per-qubit depolarizing probability.
#[derive(Debug, Clone, PartialEq)]
pub struct GateNoise {
    qubits: Vec<usize>,
    damping: Vec<(f64, f64)>,
    p_depol: f64,
    gate_error: f64,
    gate_time: f64,
    clamped: bool,
    avg_fidelity: f64,
}

/// `Σ |Tr K|² / d²`; affine in the channel, so affine in `p_depol`.
fn entanglement_fidelity(k: &KrausSet) -> f64 {
    let d = k.dim() as f64;
    k.operators().iter().map(|op| op.trace().norm_sqr()).sum::<f64>() / (d * d)
}

/// Average fidelity of a product channel from per-factor entanglement fidelities.
fn product_fidelity(f_e: impl Iterator<Item = f64>, n_qubits: usize) -> f64 {
    let d = (1usize << n_qubits) as f64;
    (d * f_e.product::<f64>() + 1.0) / (d + 1.0)
}

impl GateNoise {
    pub fn noiseless(qubits: Vec<usize>) -> Self {
        let n = qubits.len();
        Self {
            qubits,
            damping: vec![(0.0, 0.0); n],
            p_depol: 0.0,
            gate_error: 0.0,
            gate_time: 0.0,
            clamped: false,
            avg_fidelity: 1.0,
        }
    }

    fn with_depol(mut self, p_depol: f64) -> Self {
        self.p_depol = p_depol;
        self.avg_fidelity = product_fidelity(
            (0..self.qubits.len()).map(|i| entanglement_fidelity(&self.qubit_channel(i))),
            self.qubits.len(),
        );
        self
    }

    /// Acted-on physical qubits, ascending.
    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    /// `(p_ad, p_pd)` per acted-on qubit.
    pub fn damping(&self) -> &[(f64, f64)] {
        &self.damping
    }

    /// Per-qubit depolarizing probability.
    pub fn p_depol(&self) -> f64 {
        self.p_depol
    }

    pub fn gate_error(&self) -> f64 {
        self.gate_error
    }

    pub fn gate_time(&self) -> f64 {
        self.gate_time
    }

    /// Set when a probability had to be clamped, so the channel does not
    /// reproduce `gate_error` exactly.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// `ε_damp ∘ ε_depol` for the `i`-th acted-on qubit. Damping is omitted
    /// when both of its parameters are zero.
    pub fn qubit_channel(&self, i: usize) -> KrausSet {
        let (p_ad, p_pd) = self.damping[i];
        let depol = make_depolarizing(self.p_depol, 1).expect("validated probability");
        if p_ad == 0.0 && p_pd == 0.0 {
            return depol.pruned();
        }
        let damp = make_amplitude_phase_damping(p_ad, p_pd).expect("validated probabilities");
        compose(&damp, &depol).expect("same dimension").pruned()
    }

    /// `(physical qubit, channel)` pairs, skipping identity channels.
    pub fn channels(&self) -> Vec<(usize, KrausSet)> {
        (0..self.qubits.len())
            .filter(|&i| !self.is_identity_on(i))
            .map(|i| (self.qubits[i], self.qubit_channel(i)))
            .collect()
    }

    fn is_identity_on(&self, i: usize) -> bool {
        self.p_depol == 0.0 && self.damping[i] == (0.0, 0.0)
    }

    pub fn is_noiseless(&self) -> bool {
        (0..self.qubits.len()).all(|i| self.is_identity_on(i))
    }

    /// Full noise channel on the acted-on qubits (first = lowest local bit).
    pub fn channel(&self) -> Result<KrausSet> {
        let parts: Vec<KrausSet> = (0..self.qubits.len()).map(|i| self.qubit_channel(i)).collect();
        let refs: Vec<&KrausSet> = parts.iter().collect();
        tensor(&refs)
    }

    /// Average gate fidelity of the noise channel against the identity,
    /// which equals that of the noisy gate against the ideal gate.
    pub fn fidelity(&self) -> f64 {
        self.avg_fidelity
    }
}

/// Channel parameters for every native placement on a device.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub device: String,
    single: Vec<GateNoise>,
    multi: BTreeMap<Vec<usize>, GateNoise>,
    p_spam: Vec<f64>,
    prep_spam: bool,
    warnings: Vec<String>,
}

/// Gates without duration or error on every platform.
pub fn is_virtual_gate(kind: &GateKind) -> bool {
    matches!(kind, GateKind::RZ(_))
}

fn fit_gate(
    device: &DeviceModel,
    qubits: Vec<usize>,
    gate_error: f64,
    gate_time: f64,
    warnings: &mut Vec<String>,
) -> Result<GateNoise> {
    let mut damping = Vec::with_capacity(qubits.len());
    let mut clamped = false;
    for &q in &qubits {
        let cal = device.qubit(q)?;
        let (p_ad, p_pd, c) = damping_probs_checked(cal.t1, cal.t2, gate_time)?;
        clamped |= c;
        damping.push((p_ad, p_pd));
    }
    let n = qubits.len();
    let noise = GateNoise {
        qubits,
        damping,
        p_depol: 0.0,
        gate_error,
        gate_time,
        clamped,
        avg_fidelity: 1.0,
    };
    // per-qubit entanglement fidelity at p = 0 and p = 1; linear in between
    let ends: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let at = |p| entanglement_fidelity(&noise.clone().with_depol(p).qubit_channel(i));
            (at(0.0), at(1.0))
        })
        .collect();
    let fidelity_at = |p: f64| product_fidelity(ends.iter().map(|&(a, b)| a + p * (b - a)), n);
    let mut noise = noise.with_depol(0.0);
    let target = 1.0 - gate_error;
    let f_damp = fidelity_at(0.0);
    if f_damp < target {
        if gate_error > 0.0 || f_damp < target - 1e-15 {
            warnings.push(format!(
                "gate on {:?}: damping infidelity {:.3e} exceeds gate error {gate_error}; p_depol = 0",
                noise.qubits,
                1.0 - f_damp
            ));
            noise.clamped = true;
        }
        return Ok(noise);
    }
    if f_damp == target {
        return Ok(noise);
    }
    if 1.0 - fidelity_at(1.0) < gate_error {
        warnings.push(format!(
            "gate on {:?}: gate error {gate_error} unreachable; p_depol = 1",
            noise.qubits
        ));
        noise = noise.with_depol(1.0);
        noise.clamped = true;
        return Ok(noise);
    }
    let p = bisect_increasing(|p| 1.0 - fidelity_at(p), gate_error);
    Ok(noise.with_depol(p))
}

/// Subsets of `items` with exactly `k` elements, in lexicographic order.
fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Fits depolarizing strength per placement so that the full noisy gate
/// reproduces the calibrated gate error, on top of the damping implied by
/// the gate duration.
pub fn build_noise_model(device: &DeviceModel) -> Result<NoiseModel> {
    device.validate()?;
    let mut warnings = device.warnings();
    let mut single = Vec::with_capacity(device.n_qubits);
    for q in 0..device.n_qubits {
        let cal = device.qubit(q)?;
        single.push(fit_gate(
            device,
            vec![q],
            cal.single_gate_error,
            cal.single_gate_time,
            &mut warnings,
        )?);
    }

    let mut multi = BTreeMap::new();
    let has_edge_gates =
        device.native_multi.iter().any(|m| m.placement == Placement::Edge) || device.max_star_arity() >= 2;
    if has_edge_gates {
        for &[a, b] in &device.edges {
            let key = vec![a.min(b), a.max(b)];
            if multi.contains_key(&key) {
                continue;
            }
            let cal = device.edge(a, b)?;
            let noise = fit_gate(
                device,
                key.clone(),
                cal.two_gate_error,
                cal.two_gate_time,
                &mut warnings,
            )?;
            multi.insert(key, noise);
        }
    }
    if let Some(star) = &device.star {
        for center in 0..device.n_qubits {
            let leaves = device.neighbors(center);
            for k in 2..=leaves.len() {
                for subset in combinations(&leaves, k) {
                    let mut key = subset;
                    key.push(center);
                    key.sort_unstable();
                    if multi.contains_key(&key) {
                        continue;
                    }
                    let noise = fit_gate(device, key.clone(), star.gate_error, star.gate_time, &mut warnings)?;
                    multi.insert(key, noise);
                }
            }
        }
    }

    for w in &warnings {
        log::debug!("{w}");
    }
    Ok(NoiseModel {
        device: device.name.clone(),
        single,
        multi,
        p_spam: device.qubits_sorted().map(|q| q.p_spam).collect(),
        prep_spam: true,
        warnings,
    })
}

impl NoiseModel {
    /// Every gate placement of `device` gets damping-free depolarizing noise
    /// of strength `p_depol` per acted-on qubit; SPAM is zero.
    pub fn uniform_depolarizing(device: &DeviceModel, p_depol: f64) -> Result<Self> {
        check_probability("p_depol", p_depol)?;
        let mut model = build_noise_model(device)?;
        let reset = |g: &mut GateNoise| {
            g.damping.iter_mut().for_each(|d| *d = (0.0, 0.0));
            *g = g.clone().with_depol(p_depol);
            g.gate_error = 1.0 - g.fidelity();
            g.clamped = false;
        };
        model.single.iter_mut().for_each(reset);
        model.multi.values_mut().for_each(reset);
        model.p_spam.iter_mut().for_each(|p| *p = 0.0);
        model.warnings.clear();
        Ok(model)
    }

    pub fn n_qubits(&self) -> usize {
        self.single.len()
    }

    /// Noise of `kind` on `qubits`, `None` for virtual (noise-free) gates.
    pub fn gate(&self, kind: &GateKind, qubits: &[usize]) -> Result<Option<&GateNoise>> {
        if is_virtual_gate(kind) {
            return Ok(None);
        }
        if let [q] = qubits {
            return self.single.get(*q).map(Some).ok_or(Error::IndexOutOfRange {
                index: *q,
                size: self.single.len(),
            });
        }
        let mut key = qubits.to_vec();
        key.sort_unstable();
        self.multi.get(&key).map(Some).ok_or_else(|| {
            Error::Config(format!(
                "no calibrated placement for {kind} on {qubits:?} of `{}`",
                self.device
            ))
        })
    }

    pub fn single(&self, q: usize) -> Option<&GateNoise> {
        self.single.get(q)
    }

    pub fn placements(&self) -> impl Iterator<Item = &GateNoise> {
        self.single.iter().chain(self.multi.values())
    }

    pub fn p_spam(&self, q: usize) -> f64 {
        self.p_spam.get(q).copied().unwrap_or(0.0)
    }

    /// Average fidelity of a measurement: the SPAM bit flip against identity.
    pub fn measurement_fidelity(&self, q: usize) -> f64 {
        1.0 - 2.0 * self.p_spam(q) / 3.0
    }

    /// Same model with every qubit's SPAM probability set to `p`.
    pub fn with_spam(mut self, p: f64) -> Result<Self> {
        check_probability("p_spam", p)?;
        self.p_spam.iter_mut().for_each(|s| *s = p);
        Ok(self)
    }

    /// Whether the SPAM flip is also applied once at state preparation
    /// (default) or only before measurements.
    pub fn with_prep_spam(mut self, on: bool) -> Self {
        self.prep_spam = on;
        self
    }

    pub fn prep_spam(&self) -> bool {
        self.prep_spam
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_noiseless(&self) -> bool {
        self.placements().all(GateNoise::is_noiseless) && self.p_spam.iter().all(|&p| p == 0.0)
    }
}
