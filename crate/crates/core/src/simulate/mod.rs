//! Dense, stabilizer, factored and sparse-branch simulators, measurement programs, and the
//! light-cone estimator for Clifford-then-shallow states.

mod branch;
mod estimator;
mod factored;
mod program;
mod statevector;
mod tableau;

pub use branch::{BranchState, BRANCH_CAP};
pub use estimator::{estimate_local_observable_a1cq, Estimate, EstimatorPath, CONE_CAP};
pub use factored::FactoredState;
pub use program::{
    run_measurement_program, ClassicalMap, MeasurableState, MeasurementProgram, OutcomeSource, Round, Transcript,
};
pub use statevector::{dense_run, StateVector, DENSE_CAP};
pub use tableau::{tableau_run, StabilizerSim};
