use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::circuit::GateKind;
use crate::error::{Error, Result};

/// Per-qubit calibration. Times are in milliseconds; `t1`/`t2` may be
/// infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitCalibration {
    pub id: usize,
    pub t1: f64,
    pub t2: f64,
    pub p_spam: f64,
    pub single_gate_error: f64,
    pub single_gate_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeCalibration {
    pub control: usize,
    pub target: usize,
    pub two_gate_error: f64,
    pub two_gate_time: f64,
}

/// Error and duration shared by all gates on three or more qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarCalibration {
    pub gate_error: f64,
    pub gate_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// A coupling edge `(control, target)`; either direction for symmetric gates.
    Edge,
    /// One qubit adjacent to every other qubit of the gate.
    Star,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NativeMulti {
    pub gate: String,
    pub placement: Placement,
}

/// Hardware description: coupling graph, native gates and calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceModel {
    pub name: String,
    pub n_qubits: usize,
    /// Directed coupling pairs `[control, target]`.
    pub edges: Vec<[usize; 2]>,
    pub native_single: Vec<String>,
    pub native_multi: Vec<NativeMulti>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarCalibration>,
    pub qubits: Vec<QubitCalibration>,
    #[serde(default)]
    pub edge_cal: Vec<EdgeCalibration>,
}

const SINGLE_NAMES: [&str; 7] = ["x", "sx", "h", "z", "rx", "ry", "rz"];
const EDGE_NAMES: [&str; 5] = ["cx", "crx", "cry", "cz", "swap"];
const STAR_NAMES: [&str; 4] = ["ccz", "ccx", "mcz", "mcx"];

fn is_probability(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

impl DeviceModel {
    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let n = self.n_qubits;
        if n == 0 {
            problems.push("n_qubits must be positive".to_string());
        }
        if n > 64 {
            problems.push("at most 64 qubits are supported".to_string());
        }
        let mut seen_edges = BTreeSet::new();
        for &[a, b] in &self.edges {
            if a >= n || b >= n {
                problems.push(format!("edge [{a}, {b}] references a qubit outside 0..{n}"));
            }
            if a == b {
                problems.push(format!("edge [{a}, {b}] is a self loop"));
            }
            if !seen_edges.insert((a, b)) {
                problems.push(format!("edge [{a}, {b}] listed twice"));
            }
        }
        for g in &self.native_single {
            if !SINGLE_NAMES.contains(&g.as_str()) {
                problems.push(format!("`{g}` is not a single-qubit gate"));
            }
        }
        for m in &self.native_multi {
            let ok = match m.placement {
                Placement::Edge => EDGE_NAMES.contains(&m.gate.as_str()),
                Placement::Star => STAR_NAMES.contains(&m.gate.as_str()),
            };
            if !ok {
                problems.push(format!("`{}` cannot use {:?} placement", m.gate, m.placement));
                continue;
            }
            let satisfiable = match m.placement {
                Placement::Edge => !self.edges.is_empty(),
                Placement::Star => (0..n).any(|q| self.neighbors(q).len() >= 2),
            };
            if !satisfiable {
                problems.push(format!("no placement on the coupling graph fits `{}`", m.gate));
            }
            if m.placement == Placement::Star && self.star.is_none() {
                problems.push(format!("`{}` needs a [star] calibration block", m.gate));
            }
        }
        if let Some(s) = &self.star {
            if !is_probability(s.gate_error) {
                problems.push(format!("star gate_error {} is not a probability", s.gate_error));
            }
            if !(s.gate_time >= 0.0 && s.gate_time.is_finite()) {
                problems.push(format!("star gate_time {} must be finite and >= 0", s.gate_time));
            }
        }

        let mut ids = vec![0usize; n];
        for q in &self.qubits {
            if q.id >= n {
                problems.push(format!("calibration for qubit {} outside 0..{n}", q.id));
                continue;
            }
            ids[q.id] += 1;
            if !(q.t1 > 0.0) || !(q.t2 > 0.0) {
                problems.push(format!("qubit {}: t1 and t2 must be positive", q.id));
            }
            for (name, p) in [("p_spam", q.p_spam), ("single_gate_error", q.single_gate_error)] {
                if !is_probability(p) {
                    problems.push(format!("qubit {}: {name} = {p} is not a probability", q.id));
                }
            }
            if !(q.single_gate_time >= 0.0 && q.single_gate_time.is_finite()) {
                problems.push(format!("qubit {}: single_gate_time must be finite and >= 0", q.id));
            }
        }
        for (q, count) in ids.iter().enumerate() {
            match count {
                0 => problems.push(format!("qubit {q} has no calibration")),
                1 => {}
                _ => problems.push(format!("qubit {q} calibrated more than once")),
            }
        }

        let mut seen_cal = BTreeSet::new();
        for e in &self.edge_cal {
            if e.control == e.target {
                problems.push(format!(
                    "edge calibration [{}, {}] has control = target",
                    e.control, e.target
                ));
            }
            if !self.is_coupled(e.control, e.target) {
                problems.push(format!(
                    "edge calibration [{}, {}] is not a coupling edge",
                    e.control, e.target
                ));
            }
            if !seen_cal.insert((e.control, e.target)) {
                problems.push(format!("edge calibration [{}, {}] listed twice", e.control, e.target));
            }
            if !is_probability(e.two_gate_error) {
                problems.push(format!(
                    "edge [{}, {}]: two_gate_error {} is not a probability",
                    e.control, e.target, e.two_gate_error
                ));
            }
            if !(e.two_gate_time > 0.0 && e.two_gate_time.is_finite()) {
                problems.push(format!(
                    "edge [{}, {}]: two_gate_time must be finite and > 0",
                    e.control, e.target
                ));
            }
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "device `{}`: {}",
                self.name,
                problems.join("; ")
            )))
        }
    }

    /// Non-fatal findings, e.g. `t2 > 2·t1`.
    pub fn warnings(&self) -> Vec<String> {
        self.qubits
            .iter()
            .filter(|q| q.t2 > 2.0 * q.t1)
            .map(|q| {
                format!(
                    "qubit {}: t2 = {} exceeds the physical bound 2·t1 = {}",
                    q.id,
                    q.t2,
                    2.0 * q.t1
                )
            })
            .collect()
    }

    /// Qubit calibrations in id order (assumes a validated model).
    pub fn qubits_sorted(&self) -> impl Iterator<Item = &QubitCalibration> {
        let mut v: Vec<&QubitCalibration> = self.qubits.iter().collect();
        v.sort_by_key(|q| q.id);
        v.into_iter()
    }

    pub fn qubit(&self, q: usize) -> Result<&QubitCalibration> {
        self.qubits
            .iter()
            .find(|c| c.id == q)
            .ok_or_else(|| Error::Config(format!("qubit {q} has no calibration")))
    }

    /// Calibration of the coupling between `a` and `b`, preferring the
    /// `(a, b)` direction.
    pub fn edge(&self, a: usize, b: usize) -> Result<&EdgeCalibration> {
        let find = |c, t| self.edge_cal.iter().find(|e| e.control == c && e.target == t);
        find(a, b)
            .or_else(|| find(b, a))
            .ok_or_else(|| Error::Config(format!("edge [{a}, {b}] has no calibration")))
    }

    pub fn has_edge(&self, control: usize, target: usize) -> bool {
        self.edges.contains(&[control, target])
    }

    /// Coupled in either direction.
    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Undirected neighbours, ascending.
    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .edges
            .iter()
            .filter_map(|&[a, b]| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        set.into_iter().collect()
    }

    /// Undirected hop distances from `src`; `usize::MAX` when unreachable.
    pub fn distances_from(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_qubits];
        let mut queue = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// All-pairs undirected hop distances.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.n_qubits).map(|q| self.distances_from(q)).collect()
    }

    /// Shortest undirected path `from → to` inclusive; among equal-length
    /// paths the one choosing the lowest-index neighbour at each hop.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let dist = self.distances_from(to);
        if dist[from] == usize::MAX {
            return None;
        }
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = self.neighbors(cur).into_iter().find(|&v| dist[v] + 1 == dist[cur])?;
            path.push(cur);
        }
        Some(path)
    }

    pub fn supports_single(&self, kind: &GateKind) -> bool {
        kind.arity() == 1 && self.native_single.iter().any(|g| g == kind.name())
    }

    /// Whether `kind` on the ordered physical `qubits` is a native placement.
    pub fn is_native(&self, kind: &GateKind, qubits: &[usize]) -> bool {
        if qubits.len() != kind.arity() || qubits.iter().any(|&q| q >= self.n_qubits) {
            return false;
        }
        if kind.arity() == 1 {
            return self.supports_single(kind);
        }
        self.native_multi
            .iter()
            .filter(|m| m.gate == kind.name())
            .any(|m| match m.placement {
                Placement::Edge => {
                    qubits.len() == 2
                        && (self.has_edge(qubits[0], qubits[1])
                            || (kind.is_symmetric() && self.has_edge(qubits[1], qubits[0])))
                }
                Placement::Star => self.star_center(qubits).is_some(),
            })
    }

    /// A member of `qubits` coupled to all the others.
    pub fn star_center(&self, qubits: &[usize]) -> Option<usize> {
        qubits
            .iter()
            .copied()
            .find(|&c| qubits.iter().all(|&o| o == c || self.is_coupled(c, o)))
    }

    /// Whether some native multi-qubit gate with this mnemonic exists.
    pub fn has_native_multi(&self, name: &str) -> bool {
        self.native_multi.iter().any(|m| m.gate == name)
    }

    pub fn max_star_arity(&self) -> usize {
        if !self.native_multi.iter().any(|m| m.placement == Placement::Star) {
            return 0;
        }
        (0..self.n_qubits)
            .map(|q| self.neighbors(q).len() + 1)
            .max()
            .unwrap_or(0)
    }
}
