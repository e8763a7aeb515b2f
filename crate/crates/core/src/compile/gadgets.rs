//! Exact-count and threshold gadgets on fan-in at most 8.
//!
//! EX^k is built as an XOR oracle |x⟩|b⟩ ↦ |x⟩|b ⊕ EX^k(x)⟩ from the Fourier
//! expansion of h(x, b) = b·EX^k(x): with H on b, every parity of (x, b) that
//! carries a nonzero Fourier weight is written into one copy register (fanout
//! then CNOTs), a single layer of phase gates applies e^{iπ α_S}, and the
//! Clifford part is undone. TH^t fans the input out, runs EX^k for k ≥ t in
//! parallel and XORs their outputs.

use rayon::prelude::*;
use serde::Serialize;

use super::staged::Staged;
use crate::bits::BitVec;
use crate::circuit::{
    account_decomposition, c, check_relations, mh_decompose, BlockKind, ComplexityReport, Gate, Layer,
    LayeredCircuit, MhDecomposition, Relation,
};
use crate::error::{MhError, Result};
use crate::simulate::BranchState;

pub const GADGET_FAN_IN_CAP: usize = 8;
/// Fidelity slack for output and ancilla checks.
pub const GADGET_TOL: f64 = 1e-9;

#[derive(Default)]
pub(crate) struct Alloc {
    pub next: usize,
}

impl Alloc {
    pub fn new(start: usize) -> Self {
        Alloc { next: start }
    }

    pub fn take(&mut self, k: usize) -> Vec<usize> {
        let v: Vec<usize> = (self.next..self.next + k).collect();
        self.next += k;
        v
    }

    pub fn one(&mut self) -> usize {
        self.next += 1;
        self.next - 1
    }
}

/// Real Fourier weights α_S of h(z) = z_m·[|z_{<m}| = k] over m+1 variables,
/// with h = Σ_S α_S ⊕_S(z).
fn ex_fourier(m: usize, k: usize) -> Vec<(usize, f64)> {
    let vars = m + 1;
    let size = 1usize << vars;
    let low = (1usize << m) - 1;
    let h: Vec<f64> =
        (0..size).map(|z| if z >> m & 1 == 1 && (z & low).count_ones() as usize == k { 1.0 } else { 0.0 }).collect();
    let mut out = Vec::new();
    for s in 1..size {
        let f: f64 = (0..size).map(|z| if (s & z).count_ones() % 2 == 0 { h[z] } else { -h[z] }).sum::<f64>()
            / size as f64;
        let alpha = -2.0 * f;
        if alpha.abs() > 1e-12 {
            out.push((s, alpha));
        }
    }
    out
}

/// C–Q–C stages of the EX^k XOR oracle on `inputs` into `out`.
pub(crate) fn ex_stages(inputs: &[usize], out: usize, k: usize, alloc: &mut Alloc) -> Staged {
    let m = inputs.len();
    let vars: Vec<usize> = inputs.iter().copied().chain(std::iter::once(out)).collect();
    let weights = ex_fourier(m, k);
    let mut var_copies: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
    // per term: copies of its members, the first one collects the parity
    let mut terms: Vec<(Vec<usize>, f64)> = Vec::new();
    for &(s, alpha) in &weights {
        let mut members = Vec::new();
        for (v, list) in var_copies.iter_mut().enumerate() {
            if s >> v & 1 == 1 {
                let q = alloc.one();
                list.push(q);
                members.push(q);
            }
        }
        terms.push((members, alpha));
    }
    let fan: Layer = (0..=m).filter(|&v| !var_copies[v].is_empty()).map(|v| Gate::fanout(vars[v], &var_copies[v])).collect();
    let width = terms.iter().map(|(mem, _)| mem.len()).max().unwrap_or(1);
    let collect: Vec<Layer> = (1..width)
        .map(|j| terms.iter().filter(|(mem, _)| mem.len() > j).map(|(mem, _)| Gate::cnot(mem[j], mem[0])).collect())
        .collect();
    let phases: Layer = terms
        .iter()
        .map(|(mem, alpha)| {
            let ph = c(0.0, std::f64::consts::PI * alpha).exp();
            Gate::generic1(mem[0], [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), ph])
        })
        .collect();
    let mut st = Staged::new();
    let mut first = vec![vec![Gate::h(out)], fan.clone()];
    first.extend(collect.iter().cloned());
    st.push(BlockKind::Clifford, first);
    st.push(BlockKind::Qnc0, vec![phases]);
    let mut last: Vec<Layer> = collect.into_iter().rev().collect();
    last.push(fan);
    last.push(vec![Gate::h(out)]);
    st.push(BlockKind::Clifford, last);
    st
}

/// TH^t on `inputs` into `out`: C–Q–C when not clean, C–Q–C–Q–C when clean.
pub(crate) fn th_stages(inputs: &[usize], out: usize, t: usize, clean: bool, alloc: &mut Alloc) -> Staged {
    let m = inputs.len();
    let ks: Vec<usize> = (t..=m).collect();
    let mut regs: Vec<Vec<usize>> = vec![inputs.to_vec()];
    for _ in 1..ks.len() {
        regs.push(alloc.take(m));
    }
    let fan: Layer = if ks.len() > 1 {
        (0..m).map(|i| Gate::fanout(inputs[i], &regs[1..].iter().map(|r| r[i]).collect::<Vec<_>>())).collect()
    } else {
        Vec::new()
    };
    let outs: Vec<usize> = ks.iter().map(|_| alloc.one()).collect();
    let parts: Vec<Staged> = ks.iter().enumerate().map(|(i, &k)| ex_stages(&regs[i], outs[i], k, alloc)).collect();
    let ex = Staged::parallel(&parts);
    let parity: Vec<Layer> = outs.iter().map(|&e| vec![Gate::cnot(e, out)]).collect();
    let mut st = Staged::new();
    st.push(BlockKind::Clifford, vec![fan.clone()]);
    st.then(&ex);
    st.push(BlockKind::Clifford, parity);
    if clean {
        st.then(&ex);
        st.push(BlockKind::Clifford, vec![fan]);
    }
    st
}

#[derive(Clone, Debug, Serialize)]
pub struct TruthTable {
    pub inputs_checked: usize,
    pub exhaustive: bool,
    pub failures: Vec<u64>,
    /// Smallest probability of reading the correct output over all inputs.
    pub min_output_probability: f64,
    /// Smallest |⟨x, f(x), 0…0|out⟩|² over inputs, for clean circuits.
    pub min_ancilla_fidelity: Option<f64>,
    pub all_correct: bool,
}

/// Runs `circ` on every input assignment in `inputs` order (bit i of the
/// integer drives inputs[i]) and compares with `f`, which returns the
/// expected output bits.
pub(crate) fn truth_table<F>(
    circ: &LayeredCircuit,
    inputs: &[usize],
    outputs: &[usize],
    clean: bool,
    f: F,
) -> Result<TruthTable>
where
    F: Fn(u64) -> Vec<bool> + Sync,
{
    let m = inputs.len();
    let rows: Vec<Result<(u64, f64, Option<f64>)>> = (0..1u64 << m)
        .into_par_iter()
        .map(|x| {
            let mut bits = BitVec::zeros(circ.n());
            for (i, &q) in inputs.iter().enumerate() {
                bits.set(q, x >> i & 1 == 1);
            }
            let mut st = BranchState::from_bits(&bits);
            st.run(circ)?;
            let want = f(x);
            let p = st
                .branches()
                .iter()
                .filter(|(b, _)| outputs.iter().zip(&want).all(|(&q, &w)| b.get(q) == w))
                .map(|(_, a)| a.norm_sqr())
                .sum::<f64>();
            let fid = if clean {
                let mut target = bits.clone();
                for (&q, &w) in outputs.iter().zip(&want) {
                    target.set(q, w);
                }
                Some(st.amplitude(&target).norm_sqr())
            } else {
                None
            };
            Ok((x, p, fid))
        })
        .collect();
    let mut failures = Vec::new();
    let mut min_p: f64 = 1.0;
    let mut min_f: Option<f64> = None;
    for r in rows {
        let (x, p, fid) = r?;
        min_p = min_p.min(p);
        if let Some(fv) = fid {
            min_f = Some(min_f.map_or(fv, |m: f64| m.min(fv)));
        }
        if p < 1.0 - GADGET_TOL || fid.is_some_and(|fv| fv < 1.0 - GADGET_TOL) {
            failures.push(x);
        }
    }
    Ok(TruthTable {
        inputs_checked: 1usize << m,
        exhaustive: true,
        all_correct: failures.is_empty(),
        failures,
        min_output_probability: min_p,
        min_ancilla_fidelity: min_f,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetKind {
    Exact,
    Threshold,
}

#[derive(Clone, Debug, Serialize)]
pub struct GadgetReport {
    pub kind: GadgetKind,
    pub m: usize,
    /// k for exact gadgets, t for threshold gadgets.
    pub parameter: usize,
    pub clean: bool,
    #[serde(skip)]
    pub circuit: LayeredCircuit,
    pub inputs: Vec<usize>,
    pub output: usize,
    pub total_qubits: usize,
    pub decomposition: MhDecomposition,
    pub accounting: ComplexityReport,
    /// Level found by the optimal block decomposition at the same budget.
    pub minimal_mh_level: usize,
    pub ceiling: usize,
    pub within_ceiling: bool,
    pub violations: Vec<Relation>,
    pub functional_table: TruthTable,
}

fn check_fan_in(m: usize) -> Result<()> {
    if m == 0 {
        return Err(MhError::invalid("gadget needs at least one input"));
    }
    if m > GADGET_FAN_IN_CAP {
        return Err(MhError::cap(format!("fan-in {m} exceeds the gadget cap {GADGET_FAN_IN_CAP}")));
    }
    Ok(())
}

fn finish(
    kind: GadgetKind,
    m: usize,
    parameter: usize,
    clean: bool,
    st: &Staged,
    n: usize,
    ceiling: usize,
    f: impl Fn(u64) -> bool + Sync,
) -> Result<GadgetReport> {
    let (circuit, decomposition) = st.build(n)?;
    let accounting = account_decomposition(&circuit, &decomposition);
    let minimal_mh_level = mh_decompose(&circuit, decomposition.qnc0_budget)?.mh_level();
    let inputs: Vec<usize> = (0..m).collect();
    let functional_table = truth_table(&circuit, &inputs, &[m], clean, |x| vec![f(x)])?;
    Ok(GadgetReport {
        kind,
        m,
        parameter,
        clean,
        inputs,
        output: m,
        total_qubits: n,
        within_ceiling: accounting.mh_level <= ceiling,
        violations: check_relations(&accounting),
        decomposition,
        accounting,
        minimal_mh_level,
        ceiling,
        functional_table,
        circuit,
    })
}

/// EX^k on m inputs (qubits 0..m) into qubit m. The oracle uncomputes its own
/// workspace, so the clean and non-clean circuits coincide.
pub fn build_exact_gadget(m: usize, k: usize, clean: bool) -> Result<GadgetReport> {
    check_fan_in(m)?;
    if k > m {
        return Err(MhError::invalid(format!("EX^{k} on {m} inputs is identically zero")));
    }
    let mut alloc = Alloc::new(m + 1);
    let inputs: Vec<usize> = (0..m).collect();
    let st = ex_stages(&inputs, m, k, &mut alloc);
    let ceiling = if clean { 6 } else { 4 };
    finish(GadgetKind::Exact, m, k, clean, &st, alloc.next, ceiling, |x| x.count_ones() as usize == k)
}

/// TH^t on m inputs (qubits 0..m) into qubit m.
pub fn build_threshold_gadget(m: usize, t: usize, clean: bool) -> Result<GadgetReport> {
    check_fan_in(m)?;
    if t > m {
        return Err(MhError::invalid(format!("TH^{t} on {m} inputs is identically zero")));
    }
    let mut alloc = Alloc::new(m + 1);
    let inputs: Vec<usize> = (0..m).collect();
    let st = th_stages(&inputs, m, t, clean, &mut alloc);
    let ceiling = if clean { 8 } else { 4 };
    finish(GadgetKind::Threshold, m, t, clean, &st, alloc.next, ceiling, |x| x.count_ones() as usize >= t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_weights_reproduce_h() {
        for (m, k) in [(2, 1), (3, 0), (4, 2)] {
            let w = ex_fourier(m, k);
            for z in 0..1usize << (m + 1) {
                let h: f64 = w.iter().map(|&(s, a)| if (s & z).count_ones() % 2 == 1 { a } else { 0.0 }).sum();
                let want = if z >> m & 1 == 1 && (z & ((1 << m) - 1)).count_ones() as usize == k { 1.0 } else { 0.0 };
                assert!((h - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ex_two_one_table() {
        let r = build_exact_gadget(2, 1, false).unwrap();
        assert!(r.functional_table.all_correct);
        assert_eq!(r.functional_table.inputs_checked, 4);
        assert!(r.within_ceiling);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn ex_four_two() {
        let r = build_exact_gadget(4, 2, false).unwrap();
        assert!(r.functional_table.all_correct);
        assert_eq!(r.accounting.mh_level, 2);
        assert!(r.accounting.clifford_rounds <= 3 && r.accounting.qnc0_rounds <= 2);
    }

    #[test]
    fn clean_ex_restores_ancillas() {
        let r = build_exact_gadget(3, 1, true).unwrap();
        assert!(r.functional_table.min_ancilla_fidelity.unwrap() >= 1.0 - 1e-9);
        assert!(r.accounting.mh_level <= 6);
    }

    #[test]
    fn th_zero_is_constant_one() {
        let r = build_threshold_gadget(3, 0, false).unwrap();
        assert!(r.functional_table.all_correct);
    }

    #[test]
    fn th_majority_and_clean() {
        let r = build_threshold_gadget(4, 2, false).unwrap();
        assert!(r.functional_table.all_correct);
        assert!(r.accounting.mh_level <= 4);
        let c = build_threshold_gadget(3, 2, true).unwrap();
        assert!(c.functional_table.all_correct);
        assert!(c.functional_table.min_ancilla_fidelity.unwrap() >= 1.0 - 1e-9);
        assert!(c.accounting.mh_level <= 8 && c.violations.is_empty());
    }

    #[test]
    fn caps() {
        assert!(build_exact_gadget(9, 1, false).unwrap_err().is_feasibility());
        assert!(matches!(build_exact_gadget(3, 4, false), Err(MhError::InvalidInput(_))));
    }
}
