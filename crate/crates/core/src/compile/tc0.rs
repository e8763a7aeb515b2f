//! Layered threshold circuits: text format, classical evaluation, and
//! compilation into alternating circuits (one fanout layer plus parallel
//! threshold gadgets per classical layer).
//!
//! Format, one statement per line, `#` starts a comment:
//!
//! ```text
//! INPUTS 4
//! GATE 1 TH 2 x0 x1 x2
//! GATE 1 TH 2 x1 x2 x3
//! GATE 2 TH 2 g0 g1
//! OUTPUT g2
//! ```
//!
//! `xI` names primary input I, `gJ` the J-th GATE line. Wire lists may use
//! spaces or commas. INPUTS defaults to one more than the largest input used;
//! OUTPUT defaults to the gates of the last layer.

use serde::Serialize;

use super::gadgets::{th_stages, truth_table, Alloc, TruthTable, GADGET_FAN_IN_CAP};
use super::staged::Staged;
use crate::circuit::{
    account_decomposition, check_relations, BlockKind, ComplexityReport, Gate, Layer, LayeredCircuit,
    MhDecomposition, Relation,
};
use crate::error::{MhError, Result};

pub const TC0_DEPTH_CAP: usize = 3;
/// Input count up to which compiled circuits are checked on every assignment.
pub const TC0_TABLE_CAP: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Wire {
    Input(usize),
    Gate(usize),
}

impl std::fmt::Display for Wire {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Wire::Input(i) => write!(f, "x{i}"),
            Wire::Gate(j) => write!(f, "g{j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdGate {
    pub layer: usize,
    pub t: usize,
    pub inputs: Vec<Wire>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Tc0Spec {
    pub inputs: usize,
    pub gates: Vec<ThresholdGate>,
    pub outputs: Vec<Wire>,
}

fn parse_wire(tok: &str, line: usize) -> Result<Wire> {
    let bad = || MhError::Syntax { line, msg: format!("bad wire '{tok}', expected xI or gJ") };
    let (head, rest) = tok.split_at(1.min(tok.len()));
    let idx: usize = rest.parse().map_err(|_| bad())?;
    match head {
        "x" => Ok(Wire::Input(idx)),
        "g" => Ok(Wire::Gate(idx)),
        _ => Err(bad()),
    }
}

fn wire_list(s: &str, line: usize) -> Result<Vec<Wire>> {
    s.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|t| !t.is_empty()).map(|t| parse_wire(t, line)).collect()
}

impl Tc0Spec {
    pub fn parse(text: &str) -> Result<Tc0Spec> {
        let mut declared: Option<usize> = None;
        let mut gates = Vec::new();
        let mut outputs: Option<Vec<Wire>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.splitn(2, char::is_whitespace);
            let head = parts.next().unwrap_or("");
            let rest = parts.next().unwrap_or("").trim();
            match head.to_ascii_uppercase().as_str() {
                "INPUTS" => {
                    declared = Some(rest.parse().map_err(|_| MhError::Syntax { line, msg: "INPUTS needs a count".into() })?)
                }
                "GATE" => {
                    let toks: Vec<&str> = rest.splitn(4, char::is_whitespace).collect();
                    if toks.len() < 4 || !toks[1].eq_ignore_ascii_case("TH") {
                        return Err(MhError::Syntax { line, msg: "expected GATE <layer> TH <t> <wires>".into() });
                    }
                    let layer: usize =
                        toks[0].parse().map_err(|_| MhError::Syntax { line, msg: "bad layer number".into() })?;
                    let t: usize =
                        toks[2].parse().map_err(|_| MhError::Syntax { line, msg: "bad threshold".into() })?;
                    gates.push((line, ThresholdGate { layer, t, inputs: wire_list(toks[3], line)? }));
                }
                "OUTPUT" => outputs = Some(wire_list(rest, line)?),
                other => return Err(MhError::Syntax { line, msg: format!("unknown statement '{other}'") }),
            }
        }
        let used = gates
            .iter()
            .flat_map(|(_, g)| g.inputs.iter())
            .chain(outputs.iter().flatten())
            .filter_map(|w| if let Wire::Input(i) = w { Some(i + 1) } else { None })
            .max()
            .unwrap_or(0);
        let inputs = declared.unwrap_or(used);
        let spec_gates: Vec<ThresholdGate> = gates.iter().map(|(_, g)| g.clone()).collect();
        let depth = spec_gates.iter().map(|g| g.layer).max().unwrap_or(0);
        let outputs = outputs.unwrap_or_else(|| {
            (0..spec_gates.len()).filter(|&j| spec_gates[j].layer == depth).map(Wire::Gate).collect()
        });
        let spec = Tc0Spec { inputs, gates: spec_gates, outputs };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (j, g) in self.gates.iter().enumerate() {
            if g.layer == 0 {
                return Err(MhError::invalid(format!("g{j}: layers are numbered from 1")));
            }
            if g.inputs.is_empty() || g.inputs.len() > GADGET_FAN_IN_CAP {
                return Err(MhError::cap(format!(
                    "g{j}: fan-in {} outside 1..={GADGET_FAN_IN_CAP}",
                    g.inputs.len()
                )));
            }
            if g.t > g.inputs.len() {
                return Err(MhError::invalid(format!("g{j}: threshold {} above fan-in {}", g.t, g.inputs.len())));
            }
            for (a, w) in g.inputs.iter().enumerate() {
                if g.inputs[..a].contains(w) {
                    return Err(MhError::invalid(format!("g{j}: wire {w} repeated")));
                }
                self.check_wire(*w, Some(g.layer))?;
            }
        }
        for (a, w) in self.outputs.iter().enumerate() {
            if self.outputs[..a].contains(w) {
                return Err(MhError::invalid(format!("output wire {w} repeated")));
            }
            self.check_wire(*w, None)?;
        }
        if self.depth() > TC0_DEPTH_CAP {
            return Err(MhError::cap(format!("depth {} exceeds the cap {TC0_DEPTH_CAP}", self.depth())));
        }
        Ok(())
    }

    fn check_wire(&self, w: Wire, below: Option<usize>) -> Result<()> {
        match w {
            Wire::Input(i) if i >= self.inputs => Err(MhError::invalid(format!("{w} beyond {} inputs", self.inputs))),
            Wire::Gate(j) if j >= self.gates.len() => Err(MhError::invalid(format!("{w} is not defined"))),
            Wire::Gate(j) if below.is_some_and(|l| self.gates[j].layer >= l) => {
                Err(MhError::invalid(format!("{w} is not from an earlier layer")))
            }
            _ => Ok(()),
        }
    }

    pub fn depth(&self) -> usize {
        self.gates.iter().map(|g| g.layer).max().unwrap_or(0)
    }

    /// Every gate value, in gate order.
    pub fn gate_values(&self, x: &[bool]) -> Vec<bool> {
        let mut vals = vec![false; self.gates.len()];
        for layer in 1..=self.depth() {
            for (j, g) in self.gates.iter().enumerate().filter(|(_, g)| g.layer == layer) {
                let ones = g.inputs.iter().filter(|&&w| self.value(w, x, &vals)).count();
                vals[j] = ones >= g.t;
            }
        }
        vals
    }

    fn value(&self, w: Wire, x: &[bool], vals: &[bool]) -> bool {
        match w {
            Wire::Input(i) => x[i],
            Wire::Gate(j) => vals[j],
        }
    }

    pub fn evaluate(&self, x: &[bool]) -> Vec<bool> {
        let vals = self.gate_values(x);
        self.outputs.iter().map(|&w| self.value(w, x, &vals)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tc0Compilation {
    #[serde(skip)]
    pub circuit: LayeredCircuit,
    pub depth: usize,
    pub clean: bool,
    pub input_qubits: Vec<usize>,
    pub output_qubits: Vec<usize>,
    pub total_qubits: usize,
    pub decomposition: MhDecomposition,
    pub accounting: ComplexityReport,
    pub ceiling: usize,
    pub within_ceiling: bool,
    pub violations: Vec<Relation>,
    /// Present when the input count is at most the table cap.
    pub functional_table: Option<TruthTable>,
}

pub fn compile_tc0(spec: &Tc0Spec, clean: bool) -> Result<Tc0Compilation> {
    spec.validate()?;
    let d = spec.depth();
    let mut alloc = Alloc::new(spec.inputs);
    let gate_q: Vec<usize> = alloc.take(spec.gates.len());
    let qubit = |w: Wire| match w {
        Wire::Input(i) => i,
        Wire::Gate(j) => gate_q[j],
    };
    let mut forward = Staged::new();
    for layer in 1..=d {
        let members: Vec<usize> = (0..spec.gates.len()).filter(|&j| spec.gates[j].layer == layer).collect();
        if members.is_empty() {
            continue;
        }
        // the first consumer of a wire reads it in place, later ones read copies
        let mut copies: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut regs: Vec<Vec<usize>> = Vec::new();
        for &j in &members {
            let mut reg = Vec::new();
            for &w in &spec.gates[j].inputs {
                let src = qubit(w);
                match copies.iter_mut().find(|(s, _)| *s == src) {
                    None => {
                        copies.push((src, Vec::new()));
                        reg.push(src);
                    }
                    Some((_, list)) => {
                        let q = alloc.one();
                        list.push(q);
                        reg.push(q);
                    }
                }
            }
            regs.push(reg);
        }
        let fan: Layer =
            copies.iter().filter(|(_, l)| !l.is_empty()).map(|(s, l)| Gate::fanout(*s, l)).collect();
        let parts: Vec<Staged> = members
            .iter()
            .zip(&regs)
            .map(|(&j, reg)| th_stages(reg, gate_q[j], spec.gates[j].t, false, &mut alloc))
            .collect();
        forward.push(BlockKind::Clifford, vec![fan]);
        forward.then(&Staged::parallel(&parts));
    }
    let outs: Vec<usize> = spec.outputs.iter().map(|&w| qubit(w)).collect();
    let (staged, output_qubits) = if clean {
        let fresh = alloc.take(outs.len());
        let mut st = forward.clone();
        st.push(BlockKind::Clifford, vec![outs.iter().zip(&fresh).map(|(&a, &b)| Gate::cnot(a, b)).collect()]);
        st.then(&forward.inverse()?);
        (st, fresh)
    } else {
        (forward, outs)
    };
    let n = alloc.next;
    let (circuit, decomposition) = staged.build(n)?;
    let accounting = account_decomposition(&circuit, &decomposition);
    let ceiling = if clean { 8 * d } else { 4 * d };
    let input_qubits: Vec<usize> = (0..spec.inputs).collect();
    let functional_table = if spec.inputs <= TC0_TABLE_CAP {
        Some(truth_table(&circuit, &input_qubits, &output_qubits, clean, |x| {
            let bits: Vec<bool> = (0..spec.inputs).map(|i| x >> i & 1 == 1).collect();
            spec.evaluate(&bits)
        })?)
    } else {
        None
    };
    Ok(Tc0Compilation {
        depth: d,
        clean,
        input_qubits,
        output_qubits,
        total_qubits: n,
        within_ceiling: accounting.mh_level <= ceiling,
        violations: check_relations(&accounting),
        decomposition,
        accounting,
        ceiling,
        functional_table,
        circuit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const AND_OF_MAJ: &str = "INPUTS 4\nGATE 1 TH 2 x0 x1 x2\nGATE 1 TH 2 x1,x2,x3\nGATE 2 TH 2 g0 g1\n";

    #[test]
    fn majority_of_three() {
        let spec = Tc0Spec::parse("GATE 1 TH 2 x0 x1 x2").unwrap();
        assert_eq!(spec.inputs, 3);
        assert_eq!(spec.evaluate(&[true, false, true]), vec![true]);
        let r = compile_tc0(&spec, false).unwrap();
        assert!(r.functional_table.unwrap().all_correct);
        assert!(r.accounting.mh_level <= 4);
    }

    #[test]
    fn and_of_majorities() {
        let spec = Tc0Spec::parse(AND_OF_MAJ).unwrap();
        assert_eq!(spec.depth(), 2);
        for clean in [false, true] {
            let r = compile_tc0(&spec, clean).unwrap();
            let tab = r.functional_table.unwrap();
            assert!(tab.all_correct, "clean = {clean}: {:?}", tab.failures);
            assert_eq!(tab.inputs_checked, 16);
            assert!(r.within_ceiling && r.violations.is_empty());
            if !clean {
                assert!(r.accounting.mh_level <= 8);
            }
        }
    }

    #[test]
    fn empty_is_identity() {
        let spec = Tc0Spec::parse("INPUTS 2").unwrap();
        let r = compile_tc0(&spec, false).unwrap();
        assert_eq!(r.circuit.depth(), 0);
        assert_eq!(r.accounting.mh_level, 0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Tc0Spec::parse("GATE 1 TH 2 x0 g0").is_err());
        assert!(Tc0Spec::parse("GATE 1 TH 1 x0 x1 x2 x3 x4 x5 x6 x7 x8").unwrap_err().is_feasibility());
        assert!(Tc0Spec::parse("GATE 4 TH 1 x0").unwrap_err().is_feasibility());
        assert!(matches!(Tc0Spec::parse("GATE 1 OR 1 x0"), Err(MhError::Syntax { .. })));
    }
}
