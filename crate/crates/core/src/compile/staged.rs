//! Circuits assembled as explicit Clifford / constant-depth stages, so the
//! emitted block decomposition is known by construction.

use crate::circuit::{inverse_layer, Block, BlockKind, Layer, LayeredCircuit, MhDecomposition};
use crate::error::Result;

#[derive(Clone, Debug)]
pub(crate) struct Stage {
    pub kind: BlockKind,
    pub layers: Vec<Layer>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Staged {
    pub stages: Vec<Stage>,
}

impl Staged {
    pub fn new() -> Self {
        Staged::default()
    }

    /// Appends layers as a stage, merging into a trailing stage of the same kind.
    pub fn push(&mut self, kind: BlockKind, layers: Vec<Layer>) {
        let layers: Vec<Layer> = layers.into_iter().filter(|l| !l.is_empty()).collect();
        if layers.is_empty() {
            return;
        }
        match self.stages.last_mut() {
            Some(s) if s.kind == kind => s.layers.extend(layers),
            _ => self.stages.push(Stage { kind, layers }),
        }
    }

    pub fn then(&mut self, other: &Staged) {
        for s in &other.stages {
            self.push(s.kind, s.layers.clone());
        }
    }

    /// Runs parts side by side on disjoint qubits. Parts must share the same
    /// stage-kind sequence; shorter stages are padded at the end.
    pub fn parallel(parts: &[Staged]) -> Staged {
        let mut out = Staged::new();
        let Some(first) = parts.first() else { return out };
        for (i, s) in first.stages.iter().enumerate() {
            debug_assert!(parts.iter().all(|p| p.stages.get(i).map(|t| t.kind) == Some(s.kind)));
            let depth = parts.iter().map(|p| p.stages[i].layers.len()).max().unwrap_or(0);
            let mut layers: Vec<Layer> = vec![Vec::new(); depth];
            for p in parts {
                for (l, layer) in p.stages[i].layers.iter().enumerate() {
                    layers[l].extend(layer.iter().cloned());
                }
            }
            out.push(s.kind, layers);
        }
        out
    }

    pub fn inverse(&self) -> Result<Staged> {
        let mut out = Staged::new();
        for s in self.stages.iter().rev() {
            let mut layers = Vec::new();
            for l in s.layers.iter().rev() {
                layers.extend(inverse_layer(l)?);
            }
            out.push(s.kind, layers);
        }
        Ok(out)
    }

    /// The circuit and its emitted decomposition. A leading constant-depth
    /// stage gets an empty Clifford block in front.
    pub fn build(&self, n: usize) -> Result<(LayeredCircuit, MhDecomposition)> {
        let mut layers = Vec::new();
        let mut blocks = Vec::new();
        if self.stages.first().map(|s| s.kind) == Some(BlockKind::Qnc0) {
            blocks.push(Block { kind: BlockKind::Clifford, start: 0, end: 0 });
        }
        for s in &self.stages {
            let start = layers.len();
            layers.extend(s.layers.iter().cloned());
            blocks.push(Block { kind: s.kind, start, end: layers.len() });
        }
        if blocks.is_empty() {
            blocks.push(Block { kind: BlockKind::Clifford, start: 0, end: 0 });
        }
        let budget = self
            .stages
            .iter()
            .filter(|s| s.kind == BlockKind::Qnc0)
            .map(|s| s.layers.len())
            .max()
            .unwrap_or(1)
            .max(1);
        let c = LayeredCircuit::from_layers(n, layers)?;
        Ok((c, MhDecomposition { blocks, starts_with: BlockKind::Clifford, qnc0_budget: budget }))
    }
}
