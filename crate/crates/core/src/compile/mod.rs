//! Circuit transformations: gate teleportation with F2 correction maps,
//! coherent fanout compilation of Clifford circuits, and the exact-count /
//! threshold gadget library with threshold-circuit compilation.

mod fanout;
mod gadgets;
mod staged;
mod tc0;
mod teleport;

pub use fanout::{clifford_to_fanout, verify_fanout_dense, verify_fanout_tableau, FanoutCompilation};
pub use gadgets::{
    build_exact_gadget, build_threshold_gadget, GadgetKind, GadgetReport, TruthTable, GADGET_FAN_IN_CAP, GADGET_TOL,
};
pub use tc0::{compile_tc0, Tc0Compilation, Tc0Spec, ThresholdGate, Wire, TC0_DEPTH_CAP, TC0_TABLE_CAP};
pub use teleport::{
    extract_correction_map, teleport_parallelize, verify_program_tableau, verify_teleport_dense, verify_teleport_tableau, CorrectionMap,
};
