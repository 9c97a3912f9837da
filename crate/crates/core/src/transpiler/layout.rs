use std::collections::BTreeSet;

use crate::calibration::DeviceModel;
use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Virtual qubit `i` sits on physical qubit `layout[i]`.
pub type Layout = Vec<usize>;

/// Largest virtual register the exhaustive layout search accepts.
pub const MAX_VIRTUAL_QUBITS: usize = 8;

/// Pairs of virtual qubits that share a two-qubit gate, as `(low, high)`.
pub fn interaction_edges(c: &Circuit) -> BTreeSet<(usize, usize)> {
    c.instructions()
        .iter()
        .filter(|i| i.gate_kind().is_some() && i.qubits.len() == 2)
        .map(|i| (i.qubits[0].min(i.qubits[1]), i.qubits[0].max(i.qubits[1])))
        .collect()
}

/// Connected `k`-element vertex sets of the (undirected) coupling graph,
/// each sorted, in lexicographic order.
pub fn connected_subsets(device: &DeviceModel, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut level: BTreeSet<Vec<usize>> = (0..device.n_qubits).map(|q| vec![q]).collect();
    for _ in 1..k {
        let mut next = BTreeSet::new();
        for set in &level {
            for &q in set {
                for v in device.neighbors(q) {
                    if let Err(pos) = set.binary_search(&v) {
                        let mut grown = set.clone();
                        grown.insert(pos, v);
                        next.insert(grown);
                    }
                }
            }
        }
        level = next;
    }
    level.into_iter().collect()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// All injective placements of the circuit onto connected device subgraphs.
///
/// When some placements put every interacting pair on a coupling edge,
/// only those are returned; otherwise every placement onto a connected
/// subgraph is. Order is lexicographic by physical index tuple.
pub fn enumerate_layouts(c: &Circuit, device: &DeviceModel) -> Result<Vec<Layout>> {
    let n = c.n_qubits();
    if n > device.n_qubits {
        return Err(Error::Capacity {
            needed: n,
            available: device.n_qubits,
        });
    }
    if n > MAX_VIRTUAL_QUBITS {
        return Err(Error::param(format!(
            "layout search supports at most {MAX_VIRTUAL_QUBITS} virtual qubits, got {n}"
        )));
    }
    let edges = interaction_edges(c);
    let mut all = Vec::new();
    let mut embedded = Vec::new();
    for subset in connected_subsets(device, n) {
        for layout in permutations(&subset) {
            if edges.iter().all(|&(a, b)| device.is_coupled(layout[a], layout[b])) {
                embedded.push(layout.clone());
            }
            all.push(layout);
        }
    }
    let mut chosen = if embedded.is_empty() { all } else { embedded };
    chosen.sort();
    if chosen.is_empty() {
        return Err(Error::Placement(format!(
            "`{}` has no connected subgraph with {n} qubits",
            device.name
        )));
    }
    Ok(chosen)
}
