//! Analysis, simulation, compilation and lower-bound certificates for
//! circuits that alternate Clifford blocks with constant-depth blocks.

pub mod bits;
pub mod certificates;
pub mod circuit;
pub mod codes;
pub mod compile;
pub mod entropy;
pub mod error;
pub mod lightcone;
pub mod linalg;
pub mod pauli;
pub mod pauli_sum;
pub mod random;
pub mod region;
pub mod simulate;
pub mod stabilizer;
pub mod suites;

pub use circuit::{Gate, GateKind, LayeredCircuit, C64};
pub use error::{MhError, Result};
pub use pauli::PauliString;
pub use region::Region;
pub use stabilizer::StabilizerTableau;
