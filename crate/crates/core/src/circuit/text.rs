//! Line-oriented circuit text format.
//!
//! ```text
//! qubits 3
//! clbits 1
//! h 0
//! cx 0 1
//! rz(0.5) 2
//! barrier error 0 1 2
//! error x 1
//! measure 2 -> 0
//! x 0 if c&1==1
//! ```
//! `#` starts a comment. Multi-controlled gates (`mcx`, `mcz`) take their
//! control count from the number of listed qubits.

use std::fmt::Write as _;

use super::{Circuit, Condition, GateKind, Instruction, Op, Pauli};
use crate::error::{Error, Result};

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n_qubits = None;
    let mut n_clbits = 0usize;
    let mut circuit: Option<Circuit> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or_default();

        if head == "qubits" || head == "clbits" {
            if circuit.is_some() {
                return Err(err(format!("`{head}` must precede instructions")));
            }
            let value: usize = words
                .next()
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| err(format!("`{head}` needs a non-negative integer")))?;
            if words.next().is_some() {
                return Err(err("trailing tokens".into()));
            }
            if head == "qubits" {
                n_qubits = Some(value);
            } else {
                n_clbits = value;
            }
            continue;
        }

        let c = match &mut circuit {
            Some(c) => c,
            None => {
                let n = n_qubits.ok_or_else(|| err("missing `qubits N` header".into()))?;
                if n_clbits > 64 {
                    return Err(err("at most 64 classical bits are supported".into()));
                }
                circuit.insert(Circuit::new(n, n_clbits))
            }
        };

        let (body, condition) = match line.split_once(" if ") {
            Some((b, cond)) => (b, Some(parse_condition(cond.trim()).map_err(&err)?)),
            None => (line, None),
        };
        let mut inst = parse_body(body).map_err(&err)?;
        inst.condition = condition;
        c.push(inst).map_err(|e| err(e.to_string()))?;
    }

    match circuit {
        Some(c) => Ok(c),
        None => {
            let n = n_qubits.ok_or(Error::Parse {
                line: text.lines().count().max(1),
                message: "missing `qubits N` header".into(),
            })?;
            Ok(Circuit::new(n, n_clbits))
        }
    }
}

fn parse_condition(s: &str) -> std::result::Result<Condition, String> {
    let rest = s
        .strip_prefix("c&")
        .ok_or_else(|| format!("condition `{s}` must look like c&MASK==VALUE"))?;
    let (mask, value) = rest
        .split_once("==")
        .ok_or_else(|| format!("condition `{s}` must look like c&MASK==VALUE"))?;
    let num = |t: &str| -> std::result::Result<u64, String> {
        let t = t.trim();
        let parsed = match t.strip_prefix("0b") {
            Some(bits) => u64::from_str_radix(bits, 2),
            None => t.parse(),
        };
        parsed.map_err(|_| format!("bad number `{t}` in condition"))
    };
    Ok(Condition {
        mask: num(mask)?,
        value: num(value)?,
    })
}

fn parse_qubits<'a>(words: impl Iterator<Item = &'a str>) -> std::result::Result<Vec<usize>, String> {
    words
        .map(|w| w.parse().map_err(|_| format!("bad qubit index `{w}`")))
        .collect()
}

fn parse_body(body: &str) -> std::result::Result<Instruction, String> {
    let mut words = body.split_whitespace();
    let head = words.next().ok_or("empty instruction")?;
    let (name, angle) = match head.split_once('(') {
        Some((n, rest)) => {
            let a = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("unclosed parameter in `{head}`"))?;
            let a: f64 = a.trim().parse().map_err(|_| format!("bad angle `{a}`"))?;
            (n, Some(a))
        }
        None => (head, None),
    };

    let simple = |op: Op, qubits: Vec<usize>| Instruction {
        op,
        qubits,
        condition: None,
    };

    match name {
        "measure" => {
            let q = words.next().ok_or("measure needs a qubit")?;
            let arrow = words.next();
            let cl = words.next();
            if arrow != Some("->") || cl.is_none() || words.next().is_some() {
                return Err("expected `measure Q -> C`".into());
            }
            let q = parse_qubits(std::iter::once(q))?[0];
            let clbit = cl.unwrap().parse().map_err(|_| "bad classical bit index".to_string())?;
            Ok(simple(Op::Measure { clbit }, vec![q]))
        }
        "reset" => Ok(simple(Op::Reset, parse_qubits(words)?)),
        "barrier" => {
            let rest: Vec<&str> = words.collect();
            let (label, qs) = match rest.first() {
                Some(w) if w.parse::<usize>().is_err() => (w.to_string(), &rest[1..]),
                _ => (String::new(), &rest[..]),
            };
            Ok(simple(Op::Barrier { label }, parse_qubits(qs.iter().copied())?))
        }
        "error" => {
            let p = match words.next() {
                Some("x") => Pauli::X,
                Some("y") => Pauli::Y,
                Some("z") => Pauli::Z,
                other => return Err(format!("unknown error operator {other:?}")),
            };
            Ok(simple(Op::Error(p), parse_qubits(words)?))
        }
        _ => {
            let qubits = parse_qubits(words)?;
            let kind = gate_from_name(name, angle, qubits.len())?;
            Ok(Instruction::gate(kind, &qubits))
        }
    }
}

fn gate_from_name(name: &str, angle: Option<f64>, n_qubits: usize) -> std::result::Result<GateKind, String> {
    let need_angle = || angle.ok_or_else(|| format!("`{name}` needs an angle"));
    let kind = match name {
        "x" => GateKind::X,
        "sx" => GateKind::SX,
        "h" => GateKind::H,
        "z" => GateKind::Z,
        "rx" => GateKind::RX(need_angle()?),
        "ry" => GateKind::RY(need_angle()?),
        "rz" => GateKind::RZ(need_angle()?),
        "cx" | "cnot" => GateKind::CNOT,
        "crx" => GateKind::CrotX(need_angle()?),
        "cry" => GateKind::CrotY(need_angle()?),
        "cz" => GateKind::CZ,
        "ccz" => GateKind::CCZ,
        "ccx" => GateKind::CCX,
        "mcx" | "mcz" => {
            if n_qubits < 2 {
                return Err(format!("`{name}` needs at least two qubits"));
            }
            if name == "mcx" {
                GateKind::Mcx(n_qubits - 1)
            } else {
                GateKind::Mcz(n_qubits - 1)
            }
        }
        "swap" => GateKind::Swap,
        other => return Err(format!("unknown gate `{other}`")),
    };
    if kind.angle().is_none() && angle.is_some() {
        return Err(format!("`{name}` takes no angle"));
    }
    Ok(kind)
}

pub fn write_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\nclbits {}\n", c.n_qubits(), c.n_clbits());
    for inst in c.instructions() {
        let qs = inst.qubits.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        match &inst.op {
            Op::Gate(k) => {
                let _ = write!(out, "{k} {qs}");
            }
            Op::Measure { clbit } => {
                let _ = write!(out, "measure {qs} -> {clbit}");
            }
            Op::Reset => {
                let _ = write!(out, "reset {qs}");
            }
            Op::Barrier { label } if label.is_empty() => {
                let _ = write!(out, "barrier {qs}");
            }
            Op::Barrier { label } => {
                let _ = write!(out, "barrier {label} {qs}");
            }
            Op::Error(p) => {
                let _ = write!(out, "error {} {qs}", p.name());
            }
        }
        if let Some(cond) = inst.condition {
            let _ = write!(out, " if c&{}=={}", cond.mask, cond.value);
        }
        let trimmed = out.trim_end_matches(' ').len();
        out.truncate(trimmed);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_every_construct() {
        let text = "# demo\nqubits 3\nclbits 2\nh 0\ncx 0 1\nrz(0.5) 2\nbarrier error 0 1 2\n\
                    error x 1\nmeasure 2 -> 0\nx 0 if c&1==1\nreset 2\nmcz 0 1 2\nbarrier 0 1\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(c.instructions()[2].gate_kind(), Some(&GateKind::RZ(0.5)));
        assert_eq!(c.instructions()[8].gate_kind(), Some(&GateKind::Mcz(2)));
        assert_eq!(c.instructions()[6].condition, Some(Condition::bit(0, true)));
        assert_eq!(c.find_barrier("error"), Some(3));
        assert_eq!(parse_circuit(&write_circuit(&c)).unwrap(), c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_circuit("qubits 2\nh 0\nfoo 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_circuit("qubits 2\ncx 0 2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_circuit("h 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        assert!(parse_circuit("qubits 1\nrx 0\n").is_err());
        assert!(parse_circuit("qubits 1\nh(1) 0\n").is_err());
        assert!(parse_circuit("qubits 1\nclbits 1\nx 0 if c&2==0\n").is_err());
    }

    #[test]
    fn header_only() {
        let c = parse_circuit("qubits 4\n").unwrap();
        assert_eq!(c.n_qubits(), 4);
        assert!(c.is_empty());
    }

    fn arb_instruction(n: usize) -> impl Strategy<Value = Instruction> {
        let one = (0..n).prop_map(|q| vec![q]);
        let two = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2).prop_shuffle();
        let three = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 3).prop_shuffle();
        let angle = -10.0f64..10.0;
        prop_oneof![
            (one.clone(), angle.clone()).prop_map(|(q, t)| Instruction::gate(GateKind::RZ(t), &q)),
            (one.clone(), angle.clone()).prop_map(|(q, t)| Instruction::gate(GateKind::RY(t), &q)),
            one.clone().prop_map(|q| Instruction::gate(GateKind::SX, &q)),
            two.clone().prop_map(|q| Instruction::gate(GateKind::CNOT, &q)),
            (two, angle).prop_map(|(q, t)| Instruction::gate(GateKind::CrotX(t), &q)),
            three.prop_map(|q| Instruction::gate(GateKind::Mcz(2), &q)),
            (one.clone(), 0..2usize).prop_map(|(q, c)| Instruction::measure(q[0], c)),
            one.prop_map(|q| Instruction {
                op: Op::Gate(GateKind::X),
                qubits: q,
                condition: Some(Condition::bit(1, true)),
            }),
        ]
    }

    proptest! {
        #[test]
        fn write_parse_round_trip(insts in proptest::collection::vec(arb_instruction(4), 0..20)) {
            let mut c = Circuit::new(4, 2);
            c.extend(insts).unwrap();
            let back = parse_circuit(&write_circuit(&c)).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
