use crate::calibration::DeviceModel;
use crate::circuit::{Circuit, GateKind, Instruction, Op};
use crate::error::{Error, Result};

use super::decompose::ccz_fragment;
use super::layout::Layout;

#[derive(Debug, Clone, PartialEq)]
pub struct Routed {
    /// Physical circuit over the full device register, with SWAP gates.
    pub circuit: Circuit,
    /// Where each virtual qubit ends up.
    pub final_layout: Layout,
    pub swaps: usize,
}

/// Two-qubit gates considered when scoring a candidate SWAP.
const LOOKAHEAD: usize = 8;
const LOOKAHEAD_WEIGHT: f64 = 0.5;
/// Credit for a SWAP whose first CNOT cancels the previous gate on the pair.
const CANCEL_BONUS: f64 = 1.0;

struct Router<'a> {
    device: &'a DeviceModel,
    dist: Vec<Vec<usize>>,
    v2p: Vec<usize>,
    p2v: Vec<Option<usize>>,
    out: Vec<Instruction>,
    /// Index into `out` of the last instruction on each physical qubit.
    last: Vec<Option<usize>>,
    swaps: usize,
}

impl Router<'_> {
    fn emit(&mut self, inst: Instruction) {
        for &q in &inst.qubits {
            self.last[q] = Some(self.out.len());
        }
        self.out.push(inst);
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.emit(Instruction::gate(GateKind::Swap, &[a, b]));
        self.swaps += 1;
        let (va, vb) = (self.p2v[a], self.p2v[b]);
        self.p2v[a] = vb;
        self.p2v[b] = va;
        if let Some(v) = va {
            self.v2p[v] = b;
        }
        if let Some(v) = vb {
            self.v2p[v] = a;
        }
    }

    /// One step of virtual qubit `v` along a shortest path towards `to`.
    fn step_towards(&mut self, v: usize, to: usize) -> Result<()> {
        let from = self.v2p[v];
        let path = self
            .device
            .shortest_path(from, to)
            .ok_or_else(|| Error::Routing(format!("physical qubits {from} and {to} are not connected")))?;
        self.swap(from, path[1]);
        Ok(())
    }

    /// The previous CNOT on exactly `{p, q}` when nothing else touched
    /// either qubit since, as `[control, target]`.
    fn cancellable_cnot(&self, p: usize, q: usize) -> Option<[usize; 2]> {
        let i = self.last[p]?;
        if self.last[q] != Some(i) {
            return None;
        }
        let inst = &self.out[i];
        (inst.is_unconditioned_gate() && inst.gate_kind() == Some(&GateKind::CNOT))
            .then(|| [inst.qubits[0], inst.qubits[1]])
    }

    fn distance_after(&self, v: usize, w: usize, swap: (usize, usize)) -> usize {
        let moved = |p: usize| {
            if p == swap.0 {
                swap.1
            } else if p == swap.1 {
                swap.0
            } else {
                p
            }
        };
        self.dist[moved(self.v2p[v])][moved(self.v2p[w])]
    }

    /// Inserts SWAPs until `a` and `b` are coupled. Each SWAP must shorten
    /// their distance; among those, the one that also brings the upcoming
    /// gates closer wins, with a credit for SWAPs that cancel a CNOT.
    fn route_pair(&mut self, a: usize, b: usize, upcoming: &[(usize, usize)]) -> Result<()> {
        while !self.device.is_coupled(self.v2p[a], self.v2p[b]) {
            let now = self.dist[self.v2p[a]][self.v2p[b]];
            if now == usize::MAX {
                return Err(Error::Routing(format!(
                    "physical qubits {} and {} are not connected",
                    self.v2p[a], self.v2p[b]
                )));
            }
            let mut best: Option<(f64, (usize, usize))> = None;
            for end in [self.v2p[a], self.v2p[b]] {
                for n in self.device.neighbors(end) {
                    let pair = (end.min(n), end.max(n));
                    let d = self.distance_after(a, b, pair);
                    if d >= now {
                        continue;
                    }
                    let ahead: Vec<f64> = upcoming
                        .iter()
                        .take(LOOKAHEAD)
                        .map(|&(v, w)| self.distance_after(v, w, pair) as f64)
                        .filter(|d| d.is_finite() && *d < usize::MAX as f64)
                        .collect();
                    let mut cost = d as f64;
                    if !ahead.is_empty() {
                        cost += LOOKAHEAD_WEIGHT * ahead.iter().sum::<f64>() / ahead.len() as f64;
                    }
                    if self.cancellable_cnot(pair.0, pair.1).is_some() {
                        cost -= CANCEL_BONUS;
                    }
                    if best.is_none_or(|(c, p)| cost < c - 1e-12 || (cost <= c + 1e-12 && pair < p)) {
                        best = Some((cost, pair));
                    }
                }
            }
            let (_, (p, q)) = best.expect("a shortest-path step always shortens the distance");
            match self.cancellable_cnot(p, q) {
                Some([c, t]) => self.swap(c, t),
                None => self.swap(p, q),
            }
        }
        Ok(())
    }

    /// Routes and emits one virtual-qubit instruction. A CCZ the device
    /// lacks is gathered onto a path and expanded there with the middle
    /// qubit in the fragment's middle role, so only its last CNOT pair can
    /// need a SWAP.
    fn place(&mut self, inst: &Instruction, upcoming: &[(usize, usize)]) -> Result<()> {
        if let Op::Gate(kind) = &inst.op {
            match inst.qubits.len() {
                1 => {}
                2 => self.route_pair(inst.qubits[0], inst.qubits[1], upcoming)?,
                _ => {
                    let hub = self.route_star(&inst.qubits)?;
                    let physical: Vec<usize> = inst.qubits.iter().map(|&v| self.v2p[v]).collect();
                    if *kind == GateKind::CCZ && !self.device.is_native(kind, &physical) {
                        let [x, y] = <[usize; 2]>::try_from(
                            inst.qubits.iter().copied().filter(|&v| v != hub).collect::<Vec<_>>(),
                        )
                        .expect("three distinct operands");
                        let fragment = ccz_fragment(x, y, hub);
                        let inner: Vec<(usize, usize)> = fragment
                            .iter()
                            .filter(|i| i.qubits.len() == 2)
                            .map(|i| (i.qubits[0], i.qubits[1]))
                            .collect();
                        let mut seen = 0;
                        for f in &fragment {
                            if f.qubits.len() == 2 {
                                seen += 1;
                            }
                            let ahead: Vec<(usize, usize)> = inner[seen..].iter().chain(upcoming).copied().collect();
                            self.place(f, &ahead)?;
                        }
                        return Ok(());
                    }
                }
            }
        }
        let mut placed = inst.clone();
        for q in &mut placed.qubits {
            *q = self.v2p[*q];
        }
        self.emit(placed);
        Ok(())
    }

    /// Brings a multi-qubit gate's operands onto a star: one operand on a
    /// hub, the others adjacent to it.
    /// Returns the virtual qubit placed on the hub.
    fn route_star(&mut self, members: &[usize]) -> Result<usize> {
        let k = members.len();
        let mut best: Option<(usize, usize, usize)> = None;
        for hub in 0..self.device.n_qubits {
            if self.device.neighbors(hub).len() + 1 < k {
                continue;
            }
            for &m in members {
                let d_m = self.dist[self.v2p[m]][hub];
                if d_m == usize::MAX {
                    continue;
                }
                let mut cost = d_m;
                for &o in members.iter().filter(|&&o| o != m) {
                    let d = self.dist[self.v2p[o]][hub];
                    if d == usize::MAX {
                        cost = usize::MAX;
                        break;
                    }
                    cost += d.saturating_sub(1);
                }
                if cost != usize::MAX && best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, hub, m));
                }
            }
        }
        let (_, hub, m) =
            best.ok_or_else(|| Error::Routing(format!("no hub of `{}` fits a {k}-qubit gate", self.device.name)))?;
        while self.v2p[m] != hub {
            self.step_towards(m, hub)?;
        }
        let limit = 4 * self.device.n_qubits * k;
        for _ in 0..limit {
            let Some(&o) = members
                .iter()
                .find(|&&o| o != m && !self.device.is_coupled(self.v2p[o], hub))
            else {
                return Ok(m);
            };
            self.step_towards(o, hub)?;
            if self.v2p[m] != hub {
                return Err(Error::Routing("star routing displaced its hub".into()));
            }
        }
        Err(Error::Routing(format!(
            "could not gather {members:?} around qubit {hub}"
        )))
    }
}

/// Moves each SWAP above the barriers directly before it. A barrier has no
/// action, so it only needs its qubits relabelled.
fn hoist_swaps_over_barriers(out: &mut [Instruction]) {
    for i in 0..out.len() {
        if out[i].gate_kind() != Some(&GateKind::Swap) {
            continue;
        }
        let mut j = i;
        while j > 0 && matches!(out[j - 1].op, Op::Barrier { .. }) {
            let (a, b) = (out[j].qubits[0], out[j].qubits[1]);
            for q in &mut out[j - 1].qubits {
                if *q == a {
                    *q = b;
                } else if *q == b {
                    *q = a;
                }
            }
            out.swap(j - 1, j);
            j -= 1;
        }
    }
}

/// Places `c` with `layout` and inserts SWAPs along shortest paths until
/// every multi-qubit gate acts on coupled qubits (two-qubit gates) or on a
/// star (larger gates). Deterministic: ties go to the lowest physical pair.
pub fn route(c: &Circuit, layout: &Layout, device: &DeviceModel) -> Result<Routed> {
    if layout.len() != c.n_qubits() {
        return Err(Error::param(format!(
            "layout has {} entries for {} virtual qubits",
            layout.len(),
            c.n_qubits()
        )));
    }
    let mut p2v = vec![None; device.n_qubits];
    for (v, &p) in layout.iter().enumerate() {
        if p >= device.n_qubits || p2v[p].is_some() {
            return Err(Error::param(format!(
                "layout {layout:?} is not injective on the device"
            )));
        }
        p2v[p] = Some(v);
    }
    let mut r = Router {
        device,
        dist: device.distance_matrix(),
        v2p: layout.clone(),
        p2v,
        out: Vec::with_capacity(c.len()),
        last: vec![None; device.n_qubits],
        swaps: 0,
    };
    let pairs: Vec<(usize, usize, usize)> = c
        .instructions()
        .iter()
        .enumerate()
        .filter(|(_, i)| matches!(i.op, Op::Gate(_)) && i.qubits.len() == 2)
        .map(|(k, i)| (k, i.qubits[0], i.qubits[1]))
        .collect();
    for (k, inst) in c.instructions().iter().enumerate() {
        let from = pairs.partition_point(|&(j, _, _)| j <= k);
        let upcoming: Vec<(usize, usize)> = pairs[from..].iter().map(|&(_, v, w)| (v, w)).collect();
        r.place(inst, &upcoming)?;
    }
    hoist_swaps_over_barriers(&mut r.out);
    let mut circuit = Circuit::new(device.n_qubits, c.n_clbits());
    circuit.extend(r.out)?;
    Ok(Routed {
        circuit,
        final_layout: r.v2p,
        swaps: r.swaps,
    })
}
