//! Coherent teleportation: the measurements of the teleportation program are
//! deferred, the correction bits are computed with one fanout layer and one
//! parity layer, applied as controlled Paulis, and uncomputed. The residual
//! outcome-dependent phase is a quadratic form, removed with S/Z/CZ gates,
//! after which the outcome registers sit in |+⟩ and are rotated back to |0⟩.

use serde::Serialize;

use super::teleport::{conjugated_byproducts, map_from_byproducts, split_stages, teleport_block};
use crate::circuit::{account, check_relations, schedule_asap, ComplexityReport, Gate, GateKind, Layer, LayeredCircuit, Relation};
use crate::error::{MhError, Result};
use crate::pauli::PauliString;
use crate::simulate::{dense_run, StabilizerSim, StateVector, DENSE_CAP};
use crate::stabilizer::StabilizerTableau;
use crate::bits::BitVec;

#[derive(Clone, Debug, Serialize)]
pub struct FanoutCompilation {
    #[serde(skip)]
    pub circuit: LayeredCircuit,
    pub n: usize,
    pub stages: usize,
    pub total_qubits: usize,
    pub accounting: ComplexityReport,
    pub violations: Vec<Relation>,
    /// clifford_rounds ≤ fanout_depth ≤ 4·clifford_rounds (vacuous for the empty circuit).
    pub chain_holds: bool,
}

/// Replaces FANOUT gates of the input by CNOT layers so the only fanout
/// layers of the output are the four emitted here.
fn expand_fanouts(c: &LayeredCircuit) -> Result<LayeredCircuit> {
    let mut out = LayeredCircuit::new(c.n());
    for layer in c.layers() {
        let width = layer
            .iter()
            .map(|g| if matches!(g.kind, GateKind::Fanout) { g.qubits.len() - 1 } else { 1 })
            .max()
            .unwrap_or(1);
        let mut subs: Vec<Layer> = vec![Vec::new(); width];
        for g in layer {
            if matches!(g.kind, GateKind::Fanout) {
                for (k, &t) in g.qubits[1..].iter().enumerate() {
                    subs[k].push(Gate::cnot(g.qubits[0], t));
                }
            } else {
                subs[0].push(g.clone());
            }
        }
        for s in subs {
            out.push_layer(s)?;
        }
    }
    Ok(out)
}

/// Product order of the byproducts: later stages to the left; within a stage
/// the X-type part stands left of the Z-type part.
fn product_rank(n: usize, col: usize, stages: usize) -> (usize, usize) {
    let j = col / (2 * n);
    let x_type = (col / n) % 2 == 1;
    (stages - 1 - j, if x_type { 0 } else { 1 })
}

/// i^k with Z^{z′}X^{x′} · Π G = i^k · I for the selected columns.
fn residual_phase(n: usize, cols: &[PauliString], sel: &[usize]) -> Result<u8> {
    let mut r = PauliString::identity(n);
    for &c in sel {
        r = r.mul(&cols[c])?;
    }
    let zpart = PauliString::from_bits(BitVec::zeros(n), r.z_bits().clone(), 0)?;
    let xpart = PauliString::from_bits(r.x_bits().clone(), BitVec::zeros(n), 0)?;
    let total = zpart.mul(&xpart)?.mul(&r)?;
    if !total.is_identity_up_to_phase() {
        return Err(MhError::invalid("correction does not cancel the byproduct"));
    }
    Ok(total.phase())
}

pub fn clifford_to_fanout(c: &LayeredCircuit) -> Result<FanoutCompilation> {
    let n = c.n();
    let flat = expand_fanouts(c)?;
    let stages = split_stages(&flat, 1)?;
    let d = stages.len();
    if d == 0 {
        let circuit = LayeredCircuit::new(n);
        let mut accounting = account(&circuit)?;
        accounting.compiled = true;
        return Ok(FanoutCompilation {
            circuit,
            n,
            stages: 0,
            total_qubits: n,
            violations: check_relations(&accounting),
            accounting,
            chain_holds: true,
        });
    }
    let cols = conjugated_byproducts(n, &stages)?;
    let m = map_from_byproducts(n, &cols);
    let outcomes = 2 * n * d;
    let base = n * (2 * d + 1);
    let out_q = |q: usize| 2 * d * n + q;

    // copies[c] for column c, row_copies[r] for row r
    let mut next = base;
    let mut copies: Vec<Vec<usize>> = vec![Vec::new(); outcomes];
    let mut row_copies: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
    for (col, list) in copies.iter_mut().enumerate() {
        for (r, rc) in row_copies.iter_mut().enumerate() {
            if m.get(r, col) {
                list.push(next);
                rc.push(next);
                next += 1;
            }
        }
    }
    let reg: Vec<usize> = (0..2 * n).map(|r| next + r).collect();
    let total = next + 2 * n;

    let width = stages.iter().map(|s| s.len()).max().unwrap_or(0);
    let identity: Vec<usize> = (0..base).collect();
    let mut circ = teleport_block(n, &stages, width)?.relabel(&identity, total)?;

    let fanout_layer: Layer =
        (0..outcomes).filter(|&c| !copies[c].is_empty()).map(|c| Gate::fanout(c, &copies[c])).collect();
    let mut h_layer: Layer = Vec::new();
    let mut parity: Layer = Vec::new();
    for r in 0..2 * n {
        if row_copies[r].is_empty() {
            continue;
        }
        h_layer.push(Gate::h(reg[r]));
        h_layer.extend(row_copies[r].iter().map(|&q| Gate::h(q)));
        parity.push(Gate::fanout(reg[r], &row_copies[r]));
    }
    circ.push_layer(fanout_layer.clone())?;
    circ.push_layer(h_layer.clone())?;
    circ.push_layer(parity.clone())?;
    circ.push_layer(h_layer.clone())?;
    circ.push_layer((0..n).filter(|&q| !row_copies[q].is_empty()).map(|q| Gate::cnot(reg[q], out_q(q))).collect())?;
    circ.push_layer(
        (0..n).filter(|&q| !row_copies[n + q].is_empty()).map(|q| Gate::cz(reg[n + q], out_q(q))).collect(),
    )?;
    circ.push_layer(h_layer.clone())?;
    circ.push_layer(parity)?;
    circ.push_layer(h_layer)?;
    circ.push_layer(fanout_layer)?;

    // Residual phase i^{q(y)} on the outcome registers.
    let mut order: Vec<usize> = (0..outcomes).collect();
    order.sort_by_key(|&col| product_rank(n, col, d));
    let rank: Vec<usize> = {
        let mut r = vec![0; outcomes];
        for (i, &col) in order.iter().enumerate() {
            r[col] = i;
        }
        r
    };
    let lin: Vec<u8> = (0..outcomes).map(|col| residual_phase(n, &cols, &[col])).collect::<Result<_>>()?;
    let mut fix = Vec::new();
    for col in 0..outcomes {
        match lin[col] {
            1 => {
                fix.push(Gate::z(col));
                fix.push(Gate::s(col));
            }
            2 => fix.push(Gate::z(col)),
            3 => fix.push(Gate::s(col)),
            _ => {}
        }
    }
    for a in 0..outcomes {
        for b in a + 1..outcomes {
            let sel = if rank[a] < rank[b] { [a, b] } else { [b, a] };
            let q = (8 + residual_phase(n, &cols, &sel)? - lin[a] - lin[b]) % 4;
            match q {
                0 => {}
                2 => fix.push(Gate::cz(a, b)),
                _ => return Err(MhError::invalid("residual phase is not a quadratic form")),
            }
        }
    }
    circ.append(&schedule_asap(total, &fix)?)?;
    circ.push_layer((0..outcomes).map(Gate::h).collect())?;
    circ.push_layer((0..n).map(|q| Gate::swap(q, out_q(q))).collect())?;

    let mut accounting = account(&circ)?;
    accounting.compiled = true;
    let chain_holds = accounting.clifford_rounds <= accounting.fanout_depth
        && accounting.fanout_depth <= 4 * accounting.clifford_rounds;
    Ok(FanoutCompilation {
        n,
        stages: d,
        total_qubits: total,
        violations: check_relations(&accounting),
        accounting,
        chain_holds,
        circuit: circ,
    })
}

/// Bell pairs between the data qubits and n reference qubits appended at
/// the end, every other qubit in |0⟩.
fn choi_input(n: usize, total: usize) -> Result<StabilizerTableau> {
    let big = total + n;
    let mut gens = Vec::new();
    for q in 0..n {
        let mut xx = PauliString::single(big, q, 'X')?;
        xx.set_local(total + q, 'X')?;
        let mut zz = PauliString::single(big, q, 'Z')?;
        zz.set_local(total + q, 'Z')?;
        gens.push(xx);
        gens.push(zz);
    }
    for q in n..total {
        gens.push(PauliString::single(big, q, 'Z')?);
    }
    StabilizerTableau::canonicalize(big, &gens)
}

/// Exact check of the compiled unitary on its Choi state: data qubits carry
/// `c`, every ancilla returns to |0⟩.
pub fn verify_fanout_tableau(c: &LayeredCircuit, comp: &FanoutCompilation) -> Result<bool> {
    let n = c.n();
    let total = comp.circuit.n();
    let big = total + n;
    let input = choi_input(n, total)?;
    let ident: Vec<usize> = (0..total).collect();
    let compiled = comp.circuit.relabel(&ident, big)?;
    let ident_n: Vec<usize> = (0..n).collect();
    let direct = c.relabel(&ident_n, big)?;
    let mut a = StabilizerSim::new(&input);
    a.run(&compiled)?;
    let mut b = StabilizerSim::new(&input);
    b.run(&direct)?;
    Ok(a.to_tableau() == b.to_tableau())
}

/// Dense Choi fidelity, for registers within the dense cap.
pub fn verify_fanout_dense(c: &LayeredCircuit, comp: &FanoutCompilation) -> Result<f64> {
    let n = c.n();
    let total = comp.circuit.n();
    let big = total + n;
    if big > DENSE_CAP {
        return Err(MhError::cap(format!("{big} qubits exceed the dense cap {DENSE_CAP}")));
    }
    let psi = StateVector::normalized(choi_input(n, total)?.state_vector()?)?;
    let ident: Vec<usize> = (0..total).collect();
    let ident_n: Vec<usize> = (0..n).collect();
    let a = dense_run(&comp.circuit.relabel(&ident, big)?, &psi)?;
    let b = dense_run(&c.relabel(&ident_n, big)?, &psi)?;
    Ok(a.fidelity(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::random::random_clifford_circuit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_is_empty() {
        let r = clifford_to_fanout(&LayeredCircuit::new(3)).unwrap();
        assert_eq!(r.circuit.depth(), 0);
        assert_eq!(r.accounting.fanout_depth, 0);
    }

    #[test]
    fn single_qubit_dense_choi() {
        for src in ["H 0", "S 0", "H 0 / S 0 / H 0"] {
            let c = parse_circuit(src).unwrap();
            let r = clifford_to_fanout(&c).unwrap();
            if r.total_qubits + 1 <= DENSE_CAP {
                assert!(verify_fanout_dense(&c, &r).unwrap() > 1.0 - 1e-10, "{src}");
            }
            assert!(verify_fanout_tableau(&c, &r).unwrap(), "{src}");
        }
    }

    #[test]
    fn ghz_prep_four() {
        let c = parse_circuit("H 0 / CNOT 0 1 / CNOT 1 2 / CNOT 2 3").unwrap();
        let r = clifford_to_fanout(&c).unwrap();
        assert!(r.accounting.fanout_depth <= 4);
        assert!(r.violations.is_empty());
        assert!(verify_fanout_tableau(&c, &r).unwrap());
    }

    #[test]
    fn twenty_layers_five_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let c = random_clifford_circuit(5, 20, &mut rng);
        let r = clifford_to_fanout(&c).unwrap();
        assert!(r.accounting.fanout_depth <= 4);
        assert!(r.chain_holds);
        assert!(r.violations.is_empty());
        assert!(verify_fanout_tableau(&c, &r).unwrap());
    }

    #[test]
    fn input_fanouts_are_expanded() {
        let c = parse_circuit("H 0 / FANOUT 0 1 2 3").unwrap();
        let r = clifford_to_fanout(&c).unwrap();
        assert_eq!(r.accounting.fanout_depth, 4);
        assert!(verify_fanout_tableau(&c, &r).unwrap());
    }
}
