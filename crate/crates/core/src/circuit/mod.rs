//! Layered circuit representation.

mod account;
mod parse;

pub use account::{
    account, account_decomposition, account_with_budget, check_relations, mh_decompose, Block, BlockKind,
    ComplexityReport, MhDecomposition, Relation,
};
pub use parse::parse_circuit;

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{MhError, Result};

pub type C64 = Complex64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    S,
    X,
    Y,
    Z,
    Cnot,
    Cz,
    Swap,
    T,
    /// First qubit is the source, the rest receive `x ⊕ b`.
    Fanout,
    /// Row-major 2×2 unitary.
    Generic1(Box<[C64; 4]>),
    /// Row-major 4×4 unitary on (q0, q1), local basis index 2·b(q0) + b(q1).
    Generic2(Box<[C64; 16]>),
    MeasureZ { creg: usize },
    /// Pauli correction on the first qubit controlled by the parity of the
    /// (already measured) remaining qubits.
    ClassicalParity { pauli: char },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
            GateKind::T => "T",
            GateKind::Fanout => "FANOUT",
            GateKind::Generic1(_) => "GENERIC1",
            GateKind::Generic2(_) => "GENERIC2",
            GateKind::MeasureZ { .. } => "MEASURE",
            GateKind::ClassicalParity { .. } => "PARITY",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Result<Gate> {
        let g = Gate { kind, qubits };
        g.validate()?;
        Ok(g)
    }

    pub fn h(q: usize) -> Gate {
        Gate { kind: GateKind::H, qubits: vec![q] }
    }
    pub fn s(q: usize) -> Gate {
        Gate { kind: GateKind::S, qubits: vec![q] }
    }
    pub fn x(q: usize) -> Gate {
        Gate { kind: GateKind::X, qubits: vec![q] }
    }
    pub fn y(q: usize) -> Gate {
        Gate { kind: GateKind::Y, qubits: vec![q] }
    }
    pub fn z(q: usize) -> Gate {
        Gate { kind: GateKind::Z, qubits: vec![q] }
    }
    pub fn t(q: usize) -> Gate {
        Gate { kind: GateKind::T, qubits: vec![q] }
    }
    pub fn cnot(ctrl: usize, tgt: usize) -> Gate {
        Gate { kind: GateKind::Cnot, qubits: vec![ctrl, tgt] }
    }
    pub fn cz(a: usize, b: usize) -> Gate {
        Gate { kind: GateKind::Cz, qubits: vec![a, b] }
    }
    pub fn swap(a: usize, b: usize) -> Gate {
        Gate { kind: GateKind::Swap, qubits: vec![a, b] }
    }
    pub fn fanout(src: usize, targets: &[usize]) -> Gate {
        let mut q = vec![src];
        q.extend_from_slice(targets);
        Gate { kind: GateKind::Fanout, qubits: q }
    }
    pub fn generic1(q: usize, m: [C64; 4]) -> Gate {
        Gate { kind: GateKind::Generic1(Box::new(m)), qubits: vec![q] }
    }
    pub fn generic2(q0: usize, q1: usize, m: [C64; 16]) -> Gate {
        Gate { kind: GateKind::Generic2(Box::new(m)), qubits: vec![q0, q1] }
    }
    /// Diagonal two-qubit gate diag(d00, d01, d10, d11) as a GENERIC2.
    pub fn diag2(q0: usize, q1: usize, d: [C64; 4]) -> Gate {
        let z = c(0.0, 0.0);
        let mut m = [z; 16];
        for i in 0..4 {
            m[5 * i] = d[i];
        }
        Gate::generic2(q0, q1, m)
    }
    pub fn measure(q: usize, creg: usize) -> Gate {
        Gate { kind: GateKind::MeasureZ { creg }, qubits: vec![q] }
    }
    pub fn parity(pauli: char, target: usize, controls: &[usize]) -> Gate {
        let mut q = vec![target];
        q.extend_from_slice(controls);
        Gate { kind: GateKind::ClassicalParity { pauli }, qubits: q }
    }

    pub fn validate(&self) -> Result<()> {
        let want = match &self.kind {
            GateKind::H
            | GateKind::S
            | GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::T
            | GateKind::Generic1(_)
            | GateKind::MeasureZ { .. } => Some(1),
            GateKind::Cnot | GateKind::Cz | GateKind::Swap | GateKind::Generic2(_) => Some(2),
            GateKind::Fanout | GateKind::ClassicalParity { .. } => None,
        };
        match want {
            Some(k) if self.qubits.len() != k => {
                return Err(MhError::invalid(format!(
                    "{} acts on {} qubit(s), got {}",
                    self.kind.name(),
                    k,
                    self.qubits.len()
                )))
            }
            None if self.qubits.len() < 2 => {
                return Err(MhError::invalid(format!("{} needs at least 2 qubits", self.kind.name())))
            }
            _ => {}
        }
        let mut seen = HashSet::new();
        for &q in &self.qubits {
            if !seen.insert(q) {
                return Err(MhError::invalid(format!("{} repeats qubit {q}", self.kind.name())));
            }
        }
        if let GateKind::ClassicalParity { pauli } = &self.kind {
            if *pauli != 'X' && *pauli != 'Z' {
                return Err(MhError::invalid(format!("PARITY correction must be X or Z, got {pauli}")));
            }
        }
        match &self.kind {
            GateKind::Generic1(m) => check_unitary(&m[..], 2)?,
            GateKind::Generic2(m) => check_unitary(&m[..], 4)?,
            _ => {}
        }
        Ok(())
    }

    /// Syntactic Clifford class (FANOUT, MEASURE and PARITY included).
    pub fn is_clifford_kind(&self) -> bool {
        !matches!(self.kind, GateKind::T | GateKind::Generic1(_) | GateKind::Generic2(_))
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self.kind, GateKind::MeasureZ { .. })
    }

    /// Admissible inside a constant-depth block: unitary with at most two qubits.
    pub fn is_qnc0_kind(&self) -> bool {
        self.qubits.len() <= 2 && !matches!(self.kind, GateKind::MeasureZ { .. } | GateKind::ClassicalParity { .. })
    }

    /// Row-major matrix for unitary 1- and 2-qubit gates.
    pub fn matrix(&self) -> Option<Vec<C64>> {
        let s = FRAC_1_SQRT_2;
        let o = c(1.0, 0.0);
        let z = c(0.0, 0.0);
        let i = c(0.0, 1.0);
        Some(match &self.kind {
            GateKind::H => vec![c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)],
            GateKind::S => vec![o, z, z, i],
            GateKind::X => vec![z, o, o, z],
            GateKind::Y => vec![z, -i, i, z],
            GateKind::Z => vec![o, z, z, -o],
            GateKind::T => vec![o, z, z, c(s, s)],
            GateKind::Generic1(m) => m.to_vec(),
            GateKind::Cnot => {
                let mut m = vec![z; 16];
                m[0] = o;
                m[5] = o;
                m[2 * 4 + 3] = o;
                m[3 * 4 + 2] = o;
                m
            }
            GateKind::Cz => {
                let mut m = vec![z; 16];
                m[0] = o;
                m[5] = o;
                m[10] = o;
                m[15] = -o;
                m
            }
            GateKind::Swap => {
                let mut m = vec![z; 16];
                m[0] = o;
                m[4 + 2] = o;
                m[2 * 4 + 1] = o;
                m[15] = o;
                m
            }
            GateKind::Generic2(m) => m.to_vec(),
            _ => return None,
        })
    }

    /// Adjoint as one or two gates (S† is emitted as Z followed by S).
    pub fn inverse(&self) -> Result<Vec<Gate>> {
        Ok(match &self.kind {
            GateKind::S => vec![Gate::z(self.qubits[0]), Gate::s(self.qubits[0])],
            GateKind::T => {
                let s = FRAC_1_SQRT_2;
                vec![Gate::generic1(self.qubits[0], [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, -s)])]
            }
            GateKind::Generic1(m) => vec![Gate::generic1(self.qubits[0], adjoint_array::<4>(&m[..], 2))],
            GateKind::Generic2(m) => {
                vec![Gate::generic2(self.qubits[0], self.qubits[1], adjoint_array::<16>(&m[..], 4))]
            }
            GateKind::MeasureZ { .. } => {
                return Err(MhError::GateClass("measurement has no inverse".into()));
            }
            _ => vec![self.clone()],
        })
    }
}

fn adjoint_array<const N: usize>(m: &[C64], d: usize) -> [C64; N] {
    let mut out = [c(0.0, 0.0); N];
    for r in 0..d {
        for col in 0..d {
            out[r * d + col] = m[col * d + r].conj();
        }
    }
    out
}

pub fn check_unitary(m: &[C64], d: usize) -> Result<()> {
    for r in 0..d {
        for s in 0..d {
            let mut acc = c(0.0, 0.0);
            for k in 0..d {
                acc += m[r * d + k] * m[s * d + k].conj();
            }
            let want = if r == s { 1.0 } else { 0.0 };
            if (acc - c(want, 0.0)).norm() > 1e-10 {
                return Err(MhError::NonUnitary(format!("U·U† deviates from I at ({r},{s}) by {:.3e}", (acc - c(want, 0.0)).norm())));
            }
        }
    }
    Ok(())
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.qubits.iter().map(|q| q.to_string()).collect();
        match &self.kind {
            GateKind::MeasureZ { creg } => write!(f, "MEASURE {} {}", self.qubits[0], creg),
            GateKind::ClassicalParity { pauli } => write!(f, "PARITY {} {}", pauli, qs.join(" ")),
            GateKind::Generic1(m) => {
                write!(f, "GENERIC1 {}", qs.join(" "))?;
                for v in m.iter() {
                    write!(f, " {},{}", fmt_num(v.re), fmt_num(v.im))?;
                }
                Ok(())
            }
            GateKind::Generic2(m) => {
                write!(f, "GENERIC2 {}", qs.join(" "))?;
                for v in m.iter() {
                    write!(f, " {},{}", fmt_num(v.re), fmt_num(v.im))?;
                }
                Ok(())
            }
            k => write!(f, "{} {}", k.name(), qs.join(" ")),
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:?}")
    }
}

pub type Layer = Vec<Gate>;

#[derive(Clone, Debug, PartialEq)]
pub struct LayeredCircuit {
    n: usize,
    layers: Vec<Layer>,
}

impl LayeredCircuit {
    pub fn new(n: usize) -> Self {
        LayeredCircuit { n, layers: Vec::new() }
    }

    pub fn from_layers(n: usize, layers: Vec<Layer>) -> Result<Self> {
        let mut c = LayeredCircuit::new(n);
        for l in layers {
            c.push_layer(l)?;
        }
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    pub fn push_layer(&mut self, layer: Layer) -> Result<()> {
        let idx = self.layers.len();
        check_layer(&layer, self.n, idx)?;
        self.layers.push(layer);
        Ok(())
    }

    /// Appends all layers of `other` (same register).
    pub fn append(&mut self, other: &LayeredCircuit) -> Result<()> {
        if other.n != self.n {
            return Err(MhError::Dimension(format!("{} vs {} qubits", self.n, other.n)));
        }
        self.layers.extend(other.layers.iter().cloned());
        Ok(())
    }

    /// Layers in reverse order with gates unchanged (the DAG with edges reversed).
    pub fn reversed(&self) -> LayeredCircuit {
        LayeredCircuit { n: self.n, layers: self.layers.iter().rev().cloned().collect() }
    }

    /// The adjoint circuit.
    pub fn inverse(&self) -> Result<LayeredCircuit> {
        let mut out = LayeredCircuit::new(self.n);
        for layer in self.layers.iter().rev() {
            for l in inverse_layer(layer)? {
                out.layers.push(l);
            }
        }
        Ok(out)
    }

    /// Maps qubit q to `map[q]` on a register of `new_n` qubits.
    pub fn relabel(&self, map: &[usize], new_n: usize) -> Result<LayeredCircuit> {
        if map.len() < self.n {
            return Err(MhError::Dimension("relabel map shorter than register".into()));
        }
        let mut out = LayeredCircuit::new(new_n);
        for layer in &self.layers {
            let l: Layer = layer
                .iter()
                .map(|g| Gate { kind: g.kind.clone(), qubits: g.qubits.iter().map(|&q| map[q]).collect() })
                .collect();
            out.push_layer(l)?;
        }
        Ok(out)
    }

    pub fn is_clifford(&self) -> bool {
        self.gates().all(|g| g.is_clifford_kind())
    }

    pub fn has_measurement(&self) -> bool {
        self.gates().any(|g| matches!(g.kind, GateKind::MeasureZ { .. }))
    }

    pub fn require_clifford(&self) -> Result<()> {
        for (li, layer) in self.layers.iter().enumerate() {
            for g in layer {
                if !g.is_clifford_kind() {
                    return Err(MhError::GateClass(format!("non-Clifford gate {} in layer {li}", g.kind.name())));
                }
            }
        }
        Ok(())
    }

    /// Serializes to the `.mhq` text format.
    pub fn to_mhq(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.n);
        for (i, layer) in self.layers.iter().enumerate() {
            if i > 0 {
                s.push_str("/\n");
            }
            for g in layer {
                s.push_str(&g.to_string());
                s.push('\n');
            }
        }
        s
    }
}

pub fn inverse_layer(layer: &Layer) -> Result<Vec<Layer>> {
    let mut first = Vec::new();
    let mut second = Vec::new();
    for g in layer {
        let inv = g.inverse()?;
        if inv.len() == 2 {
            first.push(inv[0].clone());
            second.push(inv[1].clone());
        } else {
            first.push(inv[0].clone());
        }
    }
    let mut out = vec![first];
    if !second.is_empty() {
        out.push(second);
    }
    Ok(out)
}

fn check_layer(layer: &Layer, n: usize, idx: usize) -> Result<()> {
    let mut used = vec![false; n];
    for g in layer {
        g.validate()?;
        for &q in &g.qubits {
            if q >= n {
                return Err(MhError::InvalidRegion(format!("qubit {q} out of range for n = {n}")));
            }
            if used[q] {
                return Err(MhError::Overlap { layer: idx, qubit: q });
            }
            used[q] = true;
        }
    }
    Ok(())
}

/// Packs gates greedily into the earliest layer after every earlier gate
/// sharing a qubit (ASAP scheduling of a gate sequence).
pub fn schedule_asap(n: usize, gates: &[Gate]) -> Result<LayeredCircuit> {
    let mut frontier = vec![0usize; n];
    let mut layers: Vec<Layer> = Vec::new();
    for g in gates {
        let l = g.qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
        if layers.len() <= l {
            layers.resize(l + 1, Vec::new());
        }
        layers[l].push(g.clone());
        for &q in &g.qubits {
            frontier[q] = l + 1;
        }
    }
    LayeredCircuit::from_layers(n, layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_rejected() {
        let mut c = LayeredCircuit::new(2);
        assert!(matches!(c.push_layer(vec![Gate::h(0), Gate::x(0)]), Err(MhError::Overlap { .. })));
    }

    #[test]
    fn fanout_needs_two_qubits() {
        assert!(Gate::new(GateKind::Fanout, vec![0]).is_err());
        assert!(Gate::new(GateKind::Fanout, vec![0, 1, 2, 3]).is_ok());
    }

    #[test]
    fn non_unitary_generic_rejected() {
        let z = c(0.0, 0.0);
        let g = Gate::new(GateKind::Generic1(Box::new([c(1.0, 0.0), z, z, c(2.0, 0.0)])), vec![0]);
        assert!(matches!(g, Err(MhError::NonUnitary(_))));
    }

    #[test]
    fn asap_schedule_packs() {
        let c = schedule_asap(3, &[Gate::h(0), Gate::h(1), Gate::cnot(0, 1), Gate::x(2)]).unwrap();
        assert_eq!(c.depth(), 2);
    }
}
