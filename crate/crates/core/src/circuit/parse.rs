//! `.mhq` reader.
//!
//! ```text
//! QUBITS 3          # optional; default is max index + 1
//! H 0
//! /                 # layer break (a blank line works too)
//! CNOT 0 1 / X 2    # `/` may also split a single line
//! GENERIC1 2 0,0 1,0 1,0 0,0
//! MEASURE 0 0
//! PARITY X 2 0      # X on qubit 2 if the parity of measured qubit 0 is odd
//! ```

use super::{c, Gate, GateKind, LayeredCircuit, C64};
use crate::error::{MhError, Result};

struct Pending {
    line: usize,
    kind: String,
    qubits: Vec<usize>,
    extra: Vec<String>,
    need: usize,
}

pub fn parse_circuit(text: &str) -> Result<LayeredCircuit> {
    let mut declared_n: Option<usize> = None;
    let mut layers: Vec<(usize, Vec<(usize, Gate)>)> = Vec::new();
    let mut current: Vec<(usize, Gate)> = Vec::new();
    let mut current_line = 0usize;
    let mut pending: Option<Pending> = None;

    let flush_layer = |current: &mut Vec<(usize, Gate)>, layers: &mut Vec<(usize, Vec<(usize, Gate)>)>, line: usize| {
        if !current.is_empty() {
            layers.push((line, std::mem::take(current)));
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        if let Some(p) = pending.as_mut() {
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.is_empty() {
                return Err(MhError::Syntax { line: p.line, msg: format!("{} expects {} matrix entries", p.kind, p.need) });
            }
            for t in toks {
                p.extra.push(t.to_string());
            }
            if p.extra.len() >= p.need {
                let p = pending.take().unwrap();
                let line = p.line;
                current.push((line, finish(p)?));
            }
            continue;
        }
        if body.trim().is_empty() {
            flush_layer(&mut current, &mut layers, current_line);
            continue;
        }
        let pieces: Vec<&str> = body.split('/').collect();
        for (pi, piece) in pieces.iter().enumerate() {
            if pi > 0 {
                flush_layer(&mut current, &mut layers, current_line);
            }
            let toks: Vec<&str> = piece.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            current_line = lineno;
            let kind = toks[0].to_ascii_uppercase();
            if kind == "QUBITS" {
                if toks.len() != 2 {
                    return Err(MhError::Syntax { line: lineno, msg: "QUBITS takes one integer".into() });
                }
                let n = toks[1]
                    .parse::<usize>()
                    .map_err(|_| MhError::Syntax { line: lineno, msg: format!("bad qubit count '{}'", toks[1]) })?;
                declared_n = Some(n);
                continue;
            }
            let p = start_gate(lineno, &kind, &toks[1..])?;
            if p.extra.len() >= p.need {
                current.push((lineno, finish(p)?));
            } else if pi + 1 == pieces.len() {
                pending = Some(p);
            } else {
                return Err(MhError::Syntax { line: lineno, msg: format!("{} expects {} matrix entries", p.kind, p.need) });
            }
        }
    }
    if let Some(p) = pending {
        return Err(MhError::Syntax { line: p.line, msg: format!("{} expects {} matrix entries", p.kind, p.need) });
    }
    flush_layer(&mut current, &mut layers, current_line);

    let max_q = layers.iter().flat_map(|(_, l)| l.iter().flat_map(|(_, g)| g.qubits.iter().copied())).max();
    let n = match (declared_n, max_q) {
        (Some(n), Some(q)) if q >= n => {
            return Err(MhError::Syntax { line: 1, msg: format!("qubit {q} exceeds declared QUBITS {n}") })
        }
        (Some(n), _) => n,
        (None, Some(q)) => q + 1,
        (None, None) => 0,
    };
    let mut circuit = LayeredCircuit::new(n);
    for (_, layer) in layers {
        let gates: Vec<Gate> = layer.into_iter().map(|(_, g)| g).collect();
        circuit.push_layer(gates)?;
    }
    Ok(circuit)
}

fn parse_qubit(line: usize, t: &str) -> Result<usize> {
    t.parse::<usize>().map_err(|_| MhError::Syntax { line, msg: format!("bad qubit index '{t}'") })
}

fn start_gate(line: usize, kind: &str, args: &[&str]) -> Result<Pending> {
    let (nq, need) = match kind {
        "GENERIC1" => (1, 4),
        "GENERIC2" => (2, 16),
        _ => (args.len(), 0),
    };
    if kind == "GENERIC1" || kind == "GENERIC2" {
        if args.len() < nq {
            return Err(MhError::Syntax { line, msg: format!("{kind} needs {nq} qubit(s)") });
        }
        let qubits = args[..nq].iter().map(|t| parse_qubit(line, t)).collect::<Result<Vec<_>>>()?;
        return Ok(Pending {
            line,
            kind: kind.to_string(),
            qubits,
            extra: args[nq..].iter().map(|s| s.to_string()).collect(),
            need,
        });
    }
    if kind == "PARITY" {
        if args.is_empty() {
            return Err(MhError::Syntax { line, msg: "PARITY needs X|Z, a target and controls".into() });
        }
        let qubits = args[1..].iter().map(|t| parse_qubit(line, t)).collect::<Result<Vec<_>>>()?;
        return Ok(Pending { line, kind: format!("PARITY{}", args[0].to_ascii_uppercase()), qubits, extra: vec![], need: 0 });
    }
    let qubits = args.iter().map(|t| parse_qubit(line, t)).collect::<Result<Vec<_>>>()?;
    Ok(Pending { line, kind: kind.to_string(), qubits, extra: vec![], need: 0 })
}

fn parse_complex(line: usize, t: &str) -> Result<C64> {
    let (re, im) = t.split_once(',').ok_or_else(|| MhError::Syntax { line, msg: format!("expected re,im but got '{t}'") })?;
    let re: f64 = re.parse().map_err(|_| MhError::Syntax { line, msg: format!("bad real part '{re}'") })?;
    let im: f64 = im.parse().map_err(|_| MhError::Syntax { line, msg: format!("bad imaginary part '{im}'") })?;
    Ok(c(re, im))
}

fn finish(p: Pending) -> Result<Gate> {
    let line = p.line;
    if p.extra.len() > p.need {
        return Err(MhError::Syntax { line, msg: format!("{} has {} trailing token(s)", p.kind, p.extra.len() - p.need) });
    }
    let kind = match p.kind.as_str() {
        "H" => GateKind::H,
        "S" => GateKind::S,
        "X" => GateKind::X,
        "Y" => GateKind::Y,
        "Z" => GateKind::Z,
        "T" => GateKind::T,
        "CNOT" | "CX" => GateKind::Cnot,
        "CZ" => GateKind::Cz,
        "SWAP" => GateKind::Swap,
        "FANOUT" => GateKind::Fanout,
        "MEASURE" | "MEASURE_Z" => {
            let (q, creg) = match p.qubits.as_slice() {
                [q] => (*q, *q),
                [q, r] => (*q, *r),
                _ => return Err(MhError::Syntax { line, msg: "MEASURE takes a qubit and an optional register".into() }),
            };
            return Ok(Gate { kind: GateKind::MeasureZ { creg }, qubits: vec![q] });
        }
        "PARITYX" => GateKind::ClassicalParity { pauli: 'X' },
        "PARITYZ" => GateKind::ClassicalParity { pauli: 'Z' },
        "GENERIC1" => {
            let mut m = [c(0.0, 0.0); 4];
            for (i, t) in p.extra.iter().enumerate() {
                m[i] = parse_complex(line, t)?;
            }
            GateKind::Generic1(Box::new(m))
        }
        "GENERIC2" => {
            let mut m = [c(0.0, 0.0); 16];
            for (i, t) in p.extra.iter().enumerate() {
                m[i] = parse_complex(line, t)?;
            }
            GateKind::Generic2(Box::new(m))
        }
        other => return Err(MhError::Syntax { line, msg: format!("unknown gate '{other}'") }),
    };
    let g = Gate { kind, qubits: p.qubits };
    g.validate().map_err(|e| match e {
        MhError::NonUnitary(m) => MhError::NonUnitary(format!("line {line}: {m}")),
        other => MhError::Syntax { line, msg: other.to_string() },
    })?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_prep_two_layers() {
        let c = parse_circuit("H 0 / CNOT 0 1").unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(c.n(), 2);
    }

    #[test]
    fn blank_lines_split_layers() {
        let c = parse_circuit("H 0\nH 1\n\n\nCNOT 0 1\n# trailing comment\n").unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(c.layers()[0].len(), 2);
    }

    #[test]
    fn overlap_is_reported() {
        assert!(matches!(parse_circuit("H 0\nX 0"), Err(MhError::Overlap { .. })));
    }

    #[test]
    fn fanout_is_single_gate() {
        let c = parse_circuit("FANOUT 0 1 2 3").unwrap();
        assert_eq!(c.gate_count(), 1);
        assert!(c.layers()[0][0].is_clifford_kind());
    }

    #[test]
    fn syntax_error_carries_line() {
        match parse_circuit("H 0\n/\nFOO 1") {
            Err(MhError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn generic_matrices_and_roundtrip() {
        let text = "QUBITS 3\nGENERIC2 0 1 1,0 0,0 0,0 0,0\n 0,0 1,0 0,0 0,0 0,0 0,0 0,0 1,0 0,0 0,0 1,0 0,0\nT 2\n/\nMEASURE 0 4\n/\nPARITY Z 2 0\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.n(), 3);
        assert_eq!(c.depth(), 3);
        let again = parse_circuit(&c.to_mhq()).unwrap();
        assert_eq!(again, c);
        assert!(matches!(parse_circuit("GENERIC1 0 1,0 0,0 0,0 2,0"), Err(MhError::NonUnitary(_))));
    }

    #[test]
    fn declared_register_respected() {
        let c = parse_circuit("QUBITS 6\n").unwrap();
        assert_eq!(c.n(), 6);
        assert_eq!(c.depth(), 0);
        assert!(parse_circuit("QUBITS 2\nH 3").is_err());
    }
}
