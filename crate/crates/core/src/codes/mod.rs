//! Codes at desk scale: local Hamiltonians and their groundspaces, stabilizer
//! and local stabilizer codes, brute-force distance, and the containment,
//! robustness, product and correlation checks built on them.

mod checks;
mod hamiltonian;
mod space;

pub use checks::{
    correlated_regions, correlation_norm, disentangle_product_check, distance_sandwich_check, infectiousness_check,
    robustness_params, robustness_params_seeded, Containment, CorrelatedRegions, DisentangleReport,
    EmpiricalRobustness, InfectiousnessReport, PairCorrelation, PremiseStatus, RobustnessReport, SandwichReport,
    CHECK_CAP,
};
pub use hamiltonian::{
    cat_history_hamiltonian, cat_history_sector, cat_history_spectrum, consistency_hamiltonian,
    stabilizer_hamiltonian, HamiltonianSummary, HistorySpectrum, LocalHamiltonian, Term,
};
pub use space::{
    code_422, code_513, distance_bruteforce, groundspace, local_stab_code, orthonormalize, CodeSpace, GroundSpace,
    Provenance, CODE_DENSE_CAP, CONTAIN_TOL, DISTANCE_CAP,
};
