//! Built-in device descriptions and preset lookup.

use std::path::{Path, PathBuf};

use super::device::{DeviceModel, EdgeCalibration, NativeMulti, Placement, QubitCalibration, StarCalibration};
use super::file::load_device_file;
use crate::error::{Error, Result};

/// Directory searched for `<name>.toml` before the built-in presets.
pub const PRESET_DIR_ENV: &str = "QECBENCH_PRESET_DIR";

pub const FALCON: &str = "ibm-falcon-27";
pub const NV_CENTER: &str = "nv-center-5";

pub fn builtin_names() -> [&'static str; 2] {
    [FALCON, NV_CENTER]
}

pub fn builtin(name: &str) -> Option<DeviceModel> {
    match name {
        FALCON => Some(falcon27()),
        NV_CENTER => Some(nv_center5()),
        _ => None,
    }
}

/// Undirected heavy-hex coupling of the 27-qubit Falcon layout.
pub const FALCON_COUPLING: [(usize, usize); 28] = [
    (0, 1),
    (1, 2),
    (1, 4),
    (2, 3),
    (3, 5),
    (4, 7),
    (5, 8),
    (6, 7),
    (7, 10),
    (8, 9),
    (8, 11),
    (10, 12),
    (11, 14),
    (12, 13),
    (12, 15),
    (13, 14),
    (14, 16),
    (15, 18),
    (16, 19),
    (17, 18),
    (18, 21),
    (19, 20),
    (19, 22),
    (21, 23),
    (22, 25),
    (23, 24),
    (24, 25),
    (25, 26),
];

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn falcon27() -> DeviceModel {
    let mut edges = Vec::new();
    let mut edge_cal = Vec::new();
    for &(a, b) in &FALCON_COUPLING {
        for (c, t) in [(a, b), (b, a)] {
            edges.push([c, t]);
            edge_cal.push(EdgeCalibration {
                control: c,
                target: t,
                two_gate_error: 0.01,
                two_gate_time: 0.001,
            });
        }
    }
    DeviceModel {
        name: FALCON.into(),
        n_qubits: 27,
        edges,
        native_single: names(&["x", "sx", "rz"]),
        native_multi: vec![NativeMulti {
            gate: "cx".into(),
            placement: Placement::Edge,
        }],
        star: None,
        qubits: (0..27)
            .map(|id| QubitCalibration {
                id,
                t1: 0.1,
                t2: 0.1,
                p_spam: 0.03,
                single_gate_error: 0.0008,
                single_gate_time: 0.001,
            })
            .collect(),
        edge_cal,
    }
}

/// Central electron spin (qubit 0) coupled to four nuclear spins.
fn nv_center5() -> DeviceModel {
    let leaves = 1..5;
    let mut qubits = vec![QubitCalibration {
        id: 0,
        t1: 5.7,
        t2: 0.4,
        p_spam: 0.03,
        single_gate_error: 0.02,
        single_gate_time: 0.01,
    }];
    qubits.extend(leaves.clone().map(|id| QubitCalibration {
        id,
        t1: 250.0,
        t2: 0.9,
        p_spam: 0.03,
        single_gate_error: 0.02,
        single_gate_time: 0.01,
    }));
    let multi = |gate: &str, placement| NativeMulti {
        gate: gate.into(),
        placement,
    };
    DeviceModel {
        name: NV_CENTER.into(),
        n_qubits: 5,
        edges: leaves.clone().map(|l| [l, 0]).collect(),
        native_single: names(&["rx", "ry", "rz"]),
        native_multi: vec![
            multi("crx", Placement::Edge),
            multi("cry", Placement::Edge),
            multi("cz", Placement::Edge),
            multi("ccz", Placement::Star),
            multi("mcz", Placement::Star),
        ],
        star: Some(StarCalibration {
            gate_error: 0.05,
            gate_time: 0.15,
        }),
        qubits,
        edge_cal: leaves
            .map(|l| EdgeCalibration {
                control: l,
                target: 0,
                two_gate_error: 0.05,
                two_gate_time: 0.15,
            })
            .collect(),
    }
}

/// Resolves a preset name or a device file path. Names are looked up in
/// `$QECBENCH_PRESET_DIR` first, then among the built-ins.
pub fn resolve_device(name_or_path: &str) -> Result<DeviceModel> {
    let path = Path::new(name_or_path);
    if name_or_path.ends_with(".toml") || path.components().count() > 1 {
        return load_device_file(path);
    }
    if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
        let candidate = PathBuf::from(dir).join(format!("{name_or_path}.toml"));
        if candidate.is_file() {
            return load_device_file(&candidate);
        }
    }
    builtin(name_or_path).ok_or_else(|| {
        Error::Config(format!(
            "unknown device `{name_or_path}` (built-in presets: {})",
            builtin_names().join(", ")
        ))
    })
}

/// Preset names available through [`resolve_device`], built-ins first.
pub fn available_presets() -> Vec<String> {
    let mut out: Vec<String> = builtin_names().iter().map(|s| s.to_string()).collect();
    if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
        if let Ok(entries) = std::fs::read_dir(dir) {
            let mut extra: Vec<String> = entries
                .filter_map(|e| e.ok())
                .filter_map(|e| {
                    let p = e.path();
                    (p.extension()? == "toml").then(|| p.file_stem()?.to_str().map(String::from))?
                })
                .filter(|n| !out.contains(n))
                .collect();
            extra.sort();
            out.extend(extra);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn falcon_shape() {
        let d = builtin(FALCON).unwrap();
        assert_eq!(d.n_qubits, 27);
        assert_eq!(d.edges.len(), 56);
        let degrees: Vec<usize> = (0..27).map(|q| d.neighbors(q).len()).collect();
        assert!(degrees.iter().all(|&k| (1..=3).contains(&k)));
        assert_eq!(degrees.iter().filter(|&&k| k == 3).count(), 8);
    }

    #[test]
    fn nv_is_a_star() {
        let d = builtin(NV_CENTER).unwrap();
        assert_eq!(d.neighbors(0), vec![1, 2, 3, 4]);
        for leaf in 1..5 {
            assert_eq!(d.neighbors(leaf), vec![0]);
        }
        assert_eq!(d.max_star_arity(), 5);
    }

    #[test]
    fn unknown_preset_is_config_error() {
        assert!(matches!(resolve_device("no-such-device"), Err(Error::Config(_))));
    }
}
