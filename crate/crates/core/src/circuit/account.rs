//! Block decomposition into alternating Clifford / constant-depth blocks and
//! complexity accounting.

use serde::{Deserialize, Serialize};

use super::{GateKind, Layer, LayeredCircuit};
use crate::error::{MhError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Clifford,
    Qnc0,
}

/// A block covers layers `start..end`; separator blocks are empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn depth(&self) -> usize {
        self.end - self.start
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MhDecomposition {
    pub blocks: Vec<Block>,
    pub starts_with: BlockKind,
    pub qnc0_budget: usize,
}

impl MhDecomposition {
    pub fn mh_level(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn count(&self, kind: BlockKind) -> usize {
        self.blocks.iter().filter(|b| b.kind == kind).count()
    }

    /// Concatenated layer ranges; equals `0..depth` for a valid decomposition.
    pub fn recompose(&self, c: &LayeredCircuit) -> LayeredCircuit {
        let mut out = LayeredCircuit::new(c.n());
        for b in &self.blocks {
            for l in &c.layers()[b.start..b.end] {
                out.layers.push(l.clone());
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct LayerClass {
    clifford: bool,
    qnc0: bool,
    measure: bool,
}

fn classify(layer: &Layer) -> LayerClass {
    LayerClass {
        clifford: layer.iter().all(|g| g.is_clifford_kind()),
        qnc0: layer.iter().all(|g| g.is_qnc0_kind()),
        measure: layer.iter().any(|g| matches!(g.kind, GateKind::MeasureZ { .. })),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum St {
    Start,
    /// Open Clifford block; `closed` after a measurement layer.
    C { closed: bool },
    Q { used: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    Continue,
    Open(BlockKind),
    /// Empty separator block of the other kind, then a new block.
    SeparateThenOpen(BlockKind),
}

fn state_index(s: St) -> usize {
    match s {
        St::Start => 0,
        St::C { closed: false } => 1,
        St::C { closed: true } => 2,
        St::Q { used } => 2 + used,
    }
}

fn moves(s: St, cl: LayerClass, budget: usize) -> Vec<(usize, Step, St)> {
    let mut out = Vec::new();
    let after_c = St::C { closed: cl.measure };
    if cl.clifford {
        match s {
            St::Start => out.push((1, Step::Open(BlockKind::Clifford), after_c)),
            St::C { closed: false } => out.push((0, Step::Continue, after_c)),
            St::C { closed: true } => out.push((2, Step::SeparateThenOpen(BlockKind::Clifford), after_c)),
            St::Q { .. } => out.push((1, Step::Open(BlockKind::Clifford), after_c)),
        }
    }
    if cl.qnc0 {
        match s {
            St::Start | St::C { .. } => out.push((1, Step::Open(BlockKind::Qnc0), St::Q { used: 1 })),
            St::Q { used } if used < budget => out.push((0, Step::Continue, St::Q { used: used + 1 })),
            St::Q { .. } => out.push((2, Step::SeparateThenOpen(BlockKind::Qnc0), St::Q { used: 1 })),
        }
    }
    out
}

/// Minimal-block alternating decomposition. Among minimal decompositions the
/// one that keeps layers in Clifford blocks as early as possible is returned.
/// A measurement layer closes its Clifford block.
pub fn mh_decompose(c: &LayeredCircuit, qnc0_budget: usize) -> Result<MhDecomposition> {
    if qnc0_budget == 0 {
        return Err(MhError::invalid("qnc0 budget must be at least 1"));
    }
    let depth = c.depth();
    if depth == 0 {
        return Ok(MhDecomposition {
            blocks: vec![Block { kind: BlockKind::Clifford, start: 0, end: 0 }],
            starts_with: BlockKind::Clifford,
            qnc0_budget,
        });
    }
    let budget = qnc0_budget.min(depth);
    let classes: Vec<LayerClass> = c.layers().iter().map(classify).collect();
    for (i, cl) in classes.iter().enumerate() {
        if !cl.clifford && !cl.qnc0 {
            return Err(MhError::DecompositionInfeasible {
                layer: i,
                msg: "layer mixes non-Clifford gates with gates on more than two qubits or measurements".into(),
            });
        }
    }
    let nstates = 3 + budget;
    let all_states: Vec<St> = std::iter::once(St::Start)
        .chain([St::C { closed: false }, St::C { closed: true }])
        .chain((1..=budget).map(|u| St::Q { used: u }))
        .collect();
    const INF: usize = usize::MAX / 4;
    // cost[i][s]: blocks still to open when entering layer i in state s.
    let mut cost = vec![vec![INF; nstates]; depth + 1];
    for s in 0..nstates {
        cost[depth][s] = 0;
    }
    for i in (0..depth).rev() {
        for &s in &all_states {
            let mut best = INF;
            for (add, _, next) in moves(s, classes[i], budget) {
                best = best.min(add + cost[i + 1][state_index(next)]);
            }
            cost[i][state_index(s)] = best;
        }
    }
    if cost[0][0] >= INF {
        return Err(MhError::DecompositionInfeasible { layer: 0, msg: "no alternating assignment".into() });
    }
    let mut blocks: Vec<Block> = Vec::new();
    let mut s = St::Start;
    for i in 0..depth {
        let target = cost[i][state_index(s)];
        let mut chosen = None;
        for (add, step, next) in moves(s, classes[i], budget) {
            if add + cost[i + 1][state_index(next)] == target {
                chosen = Some((step, next));
                break;
            }
        }
        let (step, next) = chosen.expect("dynamic program is consistent");
        match step {
            Step::Continue => blocks.last_mut().expect("open block").end = i + 1,
            Step::Open(kind) => blocks.push(Block { kind, start: i, end: i + 1 }),
            Step::SeparateThenOpen(kind) => {
                let other = match kind {
                    BlockKind::Clifford => BlockKind::Qnc0,
                    BlockKind::Qnc0 => BlockKind::Clifford,
                };
                blocks.push(Block { kind: other, start: i, end: i });
                blocks.push(Block { kind, start: i, end: i + 1 });
            }
        }
        s = next;
    }
    let starts_with = blocks[0].kind;
    Ok(MhDecomposition { blocks, starts_with, qnc0_budget })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub depth: usize,
    pub clifford_rounds: usize,
    pub qnc0_rounds: usize,
    pub mh_level: usize,
    pub t_count: usize,
    pub t_depth: usize,
    pub fanout_depth: usize,
    pub measurement_rounds: usize,
    pub qnc0_budget: usize,
    /// Only Clifford gates and T (no generic unitaries, measurements or parity corrections).
    pub clifford_t: bool,
    /// Emitted by a compiler that targets the fanout / measurement models.
    pub compiled: bool,
}

/// Accounting with constant-depth blocks of depth at most 1.
pub fn account(c: &LayeredCircuit) -> Result<ComplexityReport> {
    account_with_budget(c, 1)
}

pub fn account_with_budget(c: &LayeredCircuit, qnc0_budget: usize) -> Result<ComplexityReport> {
    let d = mh_decompose(c, qnc0_budget)?;
    Ok(account_decomposition(c, &d))
}

pub fn account_decomposition(c: &LayeredCircuit, d: &MhDecomposition) -> ComplexityReport {
    let layers = c.layers();
    let count_layers = |pred: &dyn Fn(&GateKind) -> bool| layers.iter().filter(|l| l.iter().any(|g| pred(&g.kind))).count();
    let t_count = c.gates().filter(|g| matches!(g.kind, GateKind::T)).count();
    let clifford_t = c.gates().all(|g| {
        !matches!(
            g.kind,
            GateKind::Generic1(_) | GateKind::Generic2(_) | GateKind::MeasureZ { .. } | GateKind::ClassicalParity { .. }
        )
    });
    ComplexityReport {
        depth: c.depth(),
        clifford_rounds: d.count(BlockKind::Clifford),
        qnc0_rounds: d.count(BlockKind::Qnc0),
        mh_level: d.mh_level(),
        t_count,
        t_depth: count_layers(&|k| matches!(k, GateKind::T)),
        fanout_depth: count_layers(&|k| matches!(k, GateKind::Fanout)),
        measurement_rounds: count_layers(&|k| matches!(k, GateKind::MeasureZ { .. })),
        qnc0_budget: d.qnc0_budget,
        clifford_t,
        compiled: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// ½·mh_level ≤ clifford_rounds
    CliffordRoundsLower,
    /// clifford_rounds ≤ ½·mh_level + 1
    CliffordRoundsUpper,
    Qnc0RoundsLower,
    Qnc0RoundsUpper,
    /// t_depth ≤ t_count
    TDepthAtMostTCount,
    /// ½·mh_level ≤ t_depth, for measurement-free Clifford+T circuits.
    HalfMhAtMostTDepth,
    /// fanout_depth ≤ 2·mh_level + 4, for compiled reports.
    FanoutDepth,
    /// measurement_rounds ≤ 2·mh_level + 4.
    MeasurementRounds,
}

/// Relations that fail for this report. The T-depth lower relation applies
/// only to measurement-free Clifford+T circuits and the fanout relation only
/// to compiler output; the measurement relation is checked as an upper bound.
pub fn check_relations(r: &ComplexityReport) -> Vec<Relation> {
    let mut v = Vec::new();
    let mh = r.mh_level;
    if 2 * r.clifford_rounds < mh {
        v.push(Relation::CliffordRoundsLower);
    }
    if 2 * r.clifford_rounds > mh + 2 {
        v.push(Relation::CliffordRoundsUpper);
    }
    if 2 * r.qnc0_rounds < mh {
        v.push(Relation::Qnc0RoundsLower);
    }
    if 2 * r.qnc0_rounds > mh + 2 {
        v.push(Relation::Qnc0RoundsUpper);
    }
    if r.t_depth > r.t_count {
        v.push(Relation::TDepthAtMostTCount);
    }
    if r.clifford_t && r.measurement_rounds == 0 && mh > 2 * r.t_depth {
        v.push(Relation::HalfMhAtMostTDepth);
    }
    if r.compiled && r.fanout_depth > 2 * mh + 4 {
        v.push(Relation::FanoutDepth);
    }
    if r.measurement_rounds > 2 * mh + 4 {
        v.push(Relation::MeasurementRounds);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_circuit, Gate};

    #[test]
    fn all_clifford_is_one_block() {
        let c = parse_circuit("H 0 / CNOT 0 1 / S 1").unwrap();
        let d = mh_decompose(&c, 1).unwrap();
        assert_eq!(d.blocks.len(), 1);
        assert_eq!(d.mh_level(), 0);
        assert_eq!(d.starts_with, BlockKind::Clifford);
    }

    #[test]
    fn generic_depth_three_fits_budget_three() {
        let g = "GENERIC2 0 1 1,0 0,0 0,0 0,0 0,0 1,0 0,0 0,0 0,0 0,0 0,0 1,0 0,0 0,0 1,0 0,0";
        let c = parse_circuit(&format!("{g}\n/\n{g}\n/\n{g}")).unwrap();
        let d = mh_decompose(&c, 3).unwrap();
        assert_eq!(d.blocks.len(), 1);
        assert_eq!(d.starts_with, BlockKind::Qnc0);
        let d1 = mh_decompose(&c, 1).unwrap();
        assert_eq!(d1.mh_level(), 4);
    }

    #[test]
    fn clifford_t_clifford_budget_one() {
        let c = parse_circuit("FANOUT 0 1 2 / T 0 / FANOUT 0 1 2").unwrap();
        let d = mh_decompose(&c, 1).unwrap();
        let kinds: Vec<BlockKind> = d.blocks.iter().map(|b| b.kind).collect();
        assert_eq!(kinds, vec![BlockKind::Clifford, BlockKind::Qnc0, BlockKind::Clifford]);
        assert_eq!(d.mh_level(), 2);
        assert_eq!(d.recompose(&c), c);
    }

    #[test]
    fn fanout_mixed_with_t_is_infeasible() {
        let mut c = LayeredCircuit::new(4);
        c.push_layer(vec![Gate::fanout(0, &[1, 2]), Gate::t(3)]).unwrap();
        assert!(matches!(mh_decompose(&c, 2), Err(MhError::DecompositionInfeasible { .. })));
    }

    #[test]
    fn measurement_closes_block() {
        let c = parse_circuit("H 0 / MEASURE 0 / MEASURE 1 / H 1").unwrap();
        let d = mh_decompose(&c, 1).unwrap();
        let r = account_decomposition(&c, &d);
        assert_eq!(r.measurement_rounds, 2);
        assert!(r.clifford_rounds >= 2);
        assert!(check_relations(&r).is_empty());
    }

    #[test]
    fn report_examples() {
        let bell = parse_circuit("H 0 / CNOT 0 1").unwrap();
        let r = account(&bell).unwrap();
        assert_eq!((r.depth, r.t_count, r.mh_level), (2, 0, 0));
        let ttt = parse_circuit("T 0\nT 1\nT 2").unwrap();
        let r = account(&ttt).unwrap();
        assert_eq!((r.t_count, r.t_depth), (3, 1));
    }

    #[test]
    fn relation_checker_examples() {
        let mut r = ComplexityReport {
            depth: 3,
            clifford_rounds: 2,
            qnc0_rounds: 1,
            mh_level: 2,
            t_count: 1,
            t_depth: 1,
            fanout_depth: 0,
            measurement_rounds: 0,
            qnc0_budget: 1,
            clifford_t: true,
            compiled: false,
        };
        assert!(check_relations(&r).is_empty());
        r.mh_level = 4;
        r.clifford_rounds = 1;
        let v = check_relations(&r);
        assert!(v.contains(&Relation::CliffordRoundsLower));
    }
}
