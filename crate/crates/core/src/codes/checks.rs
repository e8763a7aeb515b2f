//! Numerical checks of code statements: the containment chain between a
//! state's locally-equivalent codes and a mapped local stabilizer code, the
//! distance sandwich under a circuit, gap-to-robustness, the product
//! structure of commuting-projector codes, and pairwise-correlated regions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::hamiltonian::{consistency_hamiltonian, LocalHamiltonian, Term};
use super::space::{distance_bruteforce, groundspace, local_stab_code, CodeSpace, CONTAIN_TOL};
use crate::circuit::{c, LayeredCircuit, C64};
use crate::error::{MhError, Result};
use crate::lightcone::blowup;
use crate::linalg::{embed_operator, gather_bits, trace_norm_hermitian, CMat};
use crate::region::Region;
use crate::simulate::{dense_run, StateVector};
use crate::stabilizer::StabilizerTableau;

/// Register cap for checks that diagonalize dense Hamiltonians.
pub const CHECK_CAP: usize = 10;
pub const ROBUST_SEED: u64 = 0x5eed;

fn check_cap(n: usize) -> Result<()> {
    if n > CHECK_CAP {
        return Err(MhError::cap(format!("dense code check on {n} qubits (cap {CHECK_CAP})")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiseStatus {
    /// B²ℓ < d_ℓ(ψ) verified.
    Holds,
    /// B²ℓ ≥ d_ℓ(ψ).
    Fails,
    /// d_ℓ(ψ) could not be computed at this size.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Containment {
    pub relation: String,
    pub residual: f64,
    pub holds: bool,
}

impl Containment {
    fn of(relation: &str, a: &CodeSpace, b: &CodeSpace) -> Result<Containment> {
        let residual = a.containment_residual(b)?;
        Ok(Containment { relation: relation.into(), residual, holds: residual < CONTAIN_TOL })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InfectiousnessReport {
    pub n: usize,
    pub ell: usize,
    pub blowup: usize,
    /// Bℓ: locality of the stabilizer code pulled back through U.
    pub stab_level: usize,
    /// B²ℓ (capped at n).
    pub outer_level: usize,
    /// Distance of the level-ℓ consistency groundspace, when computable.
    pub distance: Option<usize>,
    /// d > ℓ: the level-ℓ consistency groundspace is exactly C_ℓ(ψ).
    pub groundspace_certified: bool,
    pub premise: PremiseStatus,
    pub dim_c_ell: usize,
    pub dim_mapped_stab: usize,
    pub dim_c_outer: usize,
    pub containments: Vec<Containment>,
    /// C_ℓ(ψ) = U·C^stab_{Bℓ}(φ) numerically.
    pub equality: bool,
    /// Premise holds and the equality is observed.
    pub equality_branch_fired: bool,
}

/// Containment chain for ψ = Uφ: C_{B²ℓ}(ψ) ⊆ U·C^stab_{Bℓ}(φ) ⊆ C_ℓ(ψ), with
/// equality expected when B²ℓ < d_ℓ(ψ). C_ℓ(ψ) is realized as the groundspace
/// of the level-ℓ consistency Hamiltonian of ψ, which equals C_ℓ(ψ) whenever
/// its distance exceeds ℓ.
pub fn infectiousness_check(phi: &StabilizerTableau, u: &LayeredCircuit, ell: usize) -> Result<InfectiousnessReport> {
    let n = phi.n();
    check_cap(n)?;
    if u.n() != n {
        return Err(MhError::Dimension(format!("circuit on {} qubits, state on {n}", u.n())));
    }
    if ell == 0 {
        return Err(MhError::invalid("ℓ must be ≥ 1"));
    }
    if !phi.is_pure() {
        return Err(MhError::InvalidGroup("infectiousness needs a pure stabilizer state".into()));
    }
    let b = blowup(u);
    let psi = dense_run(u, &StateVector::from_amplitudes(phi.state_vector()?)?)?;
    let stab_level = (b * ell).min(n);
    let outer_level = (b * b * ell).min(n);
    let mapped = local_stab_code(phi, stab_level)?.mapped(u)?;
    let c_ell = groundspace(&consistency_hamiltonian(&psi, ell)?)?.code;
    let c_outer = groundspace(&consistency_hamiltonian(&psi, outer_level)?)?.code;
    let distance = match distance_bruteforce(&c_ell) {
        Ok(d) => Some(d),
        Err(e) if e.is_feasibility() => None,
        Err(e) => return Err(e),
    };
    let premise = match distance {
        None => PremiseStatus::Inconclusive,
        Some(d) if b * b * ell < d => PremiseStatus::Holds,
        Some(_) => PremiseStatus::Fails,
    };
    let containments = vec![
        Containment::of("C_outer(psi) in U C_stab(phi)", &c_outer, &mapped)?,
        Containment::of("U C_stab(phi) in C_ell(psi)", &mapped, &c_ell)?,
        Containment::of("C_ell(psi) in U C_stab(phi)", &c_ell, &mapped)?,
    ];
    let equality = containments[1].holds && containments[2].holds;
    Ok(InfectiousnessReport {
        n,
        ell,
        blowup: b,
        stab_level,
        outer_level,
        distance,
        groundspace_certified: distance.is_some_and(|d| d > ell),
        premise,
        dim_c_ell: c_ell.dim(),
        dim_mapped_stab: mapped.dim(),
        dim_c_outer: c_outer.dim(),
        containments,
        equality,
        equality_branch_fired: premise == PremiseStatus::Holds && equality,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub blowup: usize,
    pub distance: usize,
    pub mapped_distance: usize,
    pub holds: bool,
}

/// d(UC)/B ≤ d(C) ≤ B·d(UC) with brute-force distances.
pub fn distance_sandwich_check(code: &CodeSpace, u: &LayeredCircuit) -> Result<SandwichReport> {
    let b = blowup(u).max(1);
    let d = distance_bruteforce(code)?;
    let du = distance_bruteforce(&code.mapped(u)?)?;
    Ok(SandwichReport { blowup: b, distance: d, mapped_distance: du, holds: du <= b * d && d <= b * du })
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalRobustness {
    pub samples: usize,
    /// Largest local distance reached (never above ε).
    pub max_local_eps: f64,
    /// Largest trace distance to the groundspace observed.
    pub max_distance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RobustnessReport {
    pub epsilon: f64,
    pub delta: f64,
    pub ell: usize,
    pub m: usize,
    pub gap: f64,
    pub ground_energy: f64,
    /// Ground energy equals the sum of the terms' minimum eigenvalues.
    pub frustration_free: bool,
    pub empirical: Option<EmpiricalRobustness>,
}

/// (ε, δ, ℓ) with δ = √(εm/Δ) for the groundspace of `h`, plus a seeded
/// perturbation experiment when the register is small enough.
pub fn robustness_params(h: &LocalHamiltonian, eps: f64) -> Result<RobustnessReport> {
    robustness_params_seeded(h, eps, ROBUST_SEED, 12)
}

pub fn robustness_params_seeded(h: &LocalHamiltonian, eps: f64, seed: u64, samples: usize) -> Result<RobustnessReport> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(MhError::invalid(format!("ε = {eps} outside [0,1]")));
    }
    if h.max_term_norm() > 1.0 + 1e-9 {
        return Err(MhError::Premise(format!("term norm {} exceeds 1", h.max_term_norm())));
    }
    let gs = groundspace(h)?;
    if gs.gap < 1e-8 {
        return Err(MhError::Premise(format!("gapless Hamiltonian (Δ = {})", gs.gap)));
    }
    let m = h.m();
    let delta = (eps * m as f64 / gs.gap).sqrt();
    let frustration_free = (gs.ground_energy - h.local_energy_floor()).abs() < 1e-8;
    let empirical =
        if h.n() <= CHECK_CAP { Some(perturbation_experiment(h, &gs.code, eps, delta, seed, samples)?) } else { None };
    Ok(RobustnessReport {
        epsilon: eps,
        delta,
        ell: h.locality(),
        m,
        gap: gs.gap,
        ground_energy: gs.ground_energy,
        frustration_free,
        empirical,
    })
}

fn random_unit<R: Rng>(d: usize, rng: &mut R) -> nalgebra::DVector<C64> {
    let v = nalgebra::DVector::from_fn(d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// max over term supports of ½‖φ_S − g_S‖₁.
fn local_distance(terms: &[Term], phi: &StateVector, g: &StateVector) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in terms {
        let r = Region::from_iter_unchecked(t.qubits.iter().copied());
        let diff = phi.reduced_density(&r)? - g.reduced_density(&r)?;
        worst = worst.max(0.5 * trace_norm_hermitian(&diff));
    }
    Ok(worst)
}

fn perturbation_experiment(
    h: &LocalHamiltonian,
    code: &CodeSpace,
    eps: f64,
    delta: f64,
    seed: u64,
    samples: usize,
) -> Result<EmpiricalRobustness> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 1usize << h.n();
    let mut max_local = 0.0f64;
    let mut max_dist = 0.0f64;
    for _ in 0..samples {
        let coeffs = random_unit(code.dim(), &mut rng);
        let g = code.basis() * coeffs;
        let r = random_unit(d, &mut rng);
        let state_at = |eta: f64| -> Result<StateVector> {
            let v = &g + &r * c(eta, 0.0);
            StateVector::normalized(v.iter().copied().collect())
        };
        let g_sv = state_at(0.0)?;
        // Largest perturbation strength whose local distance stays ≤ ε.
        let (mut lo, mut hi) = (0.0f64, 4.0f64);
        if eps > 0.0 {
            if local_distance(h.terms(), &state_at(hi)?, &g_sv)? <= eps {
                lo = hi;
            } else {
                for _ in 0..30 {
                    let mid = 0.5 * (lo + hi);
                    if local_distance(h.terms(), &state_at(mid)?, &g_sv)? <= eps {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
        }
        let phi = state_at(lo)?;
        max_local = max_local.max(local_distance(h.terms(), &phi, &g_sv)?);
        max_dist = max_dist.max(code.leakage(&phi)?.sqrt());
    }
    Ok(EmpiricalRobustness {
        samples,
        max_local_eps: max_local,
        max_distance: max_dist,
        passed: max_local <= eps + 1e-12 && max_dist <= delta + 1e-9,
    })
}

/// ½‖ρ_{A∪B} − ρ_A ⊗ ρ_B‖₁ for disjoint regions of a pure state.
pub fn correlation_norm(psi: &StateVector, a: &Region, b: &Region) -> Result<f64> {
    if !a.is_disjoint(b) {
        return Err(MhError::InvalidRegion(format!("{a} and {b} overlap")));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let u = a.union(b);
    let rho = psi.reduced_density(&u)?;
    let ra = psi.reduced_density(a)?;
    let rb = psi.reduced_density(b)?;
    let pa: Vec<usize> = a.iter().map(|&q| u.position(q).expect("in union")).collect();
    let pb: Vec<usize> = b.iter().map(|&q| u.position(q).expect("in union")).collect();
    let d = rho.nrows();
    let prod = CMat::from_fn(d, d, |r, col| {
        ra[(gather_bits(r, &pa), gather_bits(col, &pa))] * rb[(gather_bits(r, &pb), gather_bits(col, &pb))]
    });
    Ok(0.5 * trace_norm_hermitian(&(rho - prod)))
}

#[derive(Clone, Debug, Serialize)]
pub struct DisentangleReport {
    pub region: Region,
    pub boundary: Region,
    /// C = (M ∪ ∂⁺M)ᶜ.
    pub complement: Region,
    /// Whether M ∪ ∂⁺M is correctable for the code.
    pub neighbourhood_correctable: bool,
    pub code_dim: usize,
    pub max_deviation: f64,
    /// ρ_{MC} = ρ_M ⊗ ρ_C for every tested codeword.
    pub factorizes: bool,
}

/// Product test for the code cut out by pairwise-commuting local projectors
/// (given as the terms of `projectors`).
pub fn disentangle_product_check(projectors: &LocalHamiltonian, m: &Region) -> Result<DisentangleReport> {
    let n = projectors.n();
    check_cap(n)?;
    m.check(n)?;
    let terms = projectors.terms();
    for t in terms {
        if (&t.op * &t.op - &t.op).iter().any(|z| z.norm() > 1e-9) {
            return Err(MhError::invalid(format!("term on {:?} is not a projector", t.qubits)));
        }
    }
    for (i, a) in terms.iter().enumerate() {
        for bt in &terms[i + 1..] {
            let u = Region::from_iter_unchecked(a.qubits.iter().chain(bt.qubits.iter()).copied());
            let pos = |qs: &[usize]| -> Vec<usize> { qs.iter().map(|&q| u.position(q).expect("in union")).collect() };
            let ea = embed_operator(&a.op, &pos(&a.qubits), u.len())?;
            let eb = embed_operator(&bt.op, &pos(&bt.qubits), u.len())?;
            if (&ea * &eb - &eb * &ea).iter().any(|z| z.norm() > 1e-9) {
                return Err(MhError::invalid(format!("projectors on {:?} and {:?} do not commute", a.qubits, bt.qubits)));
            }
        }
    }
    let mut penalty = LocalHamiltonian::new(n);
    for t in terms {
        let d = t.op.nrows();
        penalty.add_term(t.qubits.clone(), CMat::identity(d, d) - &t.op)?;
    }
    let gs = groundspace(&penalty)?;
    if gs.ground_energy.abs() > 1e-8 {
        return Err(MhError::invalid("projectors have no common +1 eigenspace"));
    }
    let code = gs.code;
    let mut hood: Vec<usize> = m.qubits().to_vec();
    for t in terms {
        if t.qubits.iter().any(|q| m.contains(*q)) {
            hood.extend(t.qubits.iter().copied());
        }
    }
    let hood = Region::from_iter_unchecked(hood);
    let boundary = hood.difference(m);
    let complement = hood.complement(n);
    let neighbourhood_correctable = code.is_correctable(hood.qubits())?;
    let mut states: Vec<StateVector> = (0..code.dim()).map(|j| code.codeword(j)).collect();
    let mixes: Vec<C64> = vec![c(1.0, 0.0), c(0.0, 1.0)];
    for w in &mixes {
        let mut v = nalgebra::DVector::<C64>::zeros(1 << n);
        let mut ph = c(1.0, 0.0);
        for j in 0..code.dim() {
            v += code.basis().column(j) * ph;
            ph *= w;
        }
        states.push(StateVector::normalized(v.iter().copied().collect())?);
    }
    let devs = states.par_iter().map(|s| correlation_norm(s, m, &complement)).collect::<Result<Vec<_>>>()?;
    let max_deviation = devs.into_iter().fold(0.0, f64::max);
    Ok(DisentangleReport {
        region: m.clone(),
        boundary,
        complement,
        neighbourhood_correctable,
        code_dim: code.dim(),
        max_deviation,
        factorizes: max_deviation <= 1e-8,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCorrelation {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelatedRegions {
    pub gamma: f64,
    pub pairwise: Vec<PairCorrelation>,
    /// Length of the longest prefix whose pairs all exceed γ.
    pub surviving: usize,
    pub regions: Vec<Region>,
}

/// Pairwise correlation norms over a list of disjoint regions and the longest
/// prefix that is pairwise γ-correlated.
pub fn correlated_regions(psi: &StateVector, partition: &[Region], gamma: f64) -> Result<CorrelatedRegions> {
    let n = psi.n();
    for (i, r) in partition.iter().enumerate() {
        r.check(n)?;
        if r.is_empty() {
            return Err(MhError::InvalidRegion(format!("region {i} is empty")));
        }
        for s in &partition[..i] {
            if !r.is_disjoint(s) {
                return Err(MhError::InvalidRegion(format!("{r} and {s} overlap")));
            }
        }
    }
    let pairs: Vec<(usize, usize)> =
        (0..partition.len()).flat_map(|i| (i + 1..partition.len()).map(move |j| (i, j))).collect();
    let pairwise = pairs
        .par_iter()
        .map(|&(i, j)| Ok(PairCorrelation { i, j, value: correlation_norm(psi, &partition[i], &partition[j])? }))
        .collect::<Result<Vec<_>>>()?;
    let mut surviving = partition.len().min(1);
    for p in 2..=partition.len() {
        let j = p - 1;
        if pairwise.iter().filter(|pc| pc.j == j).all(|pc| pc.value > gamma) {
            surviving = p;
        } else {
            break;
        }
    }
    Ok(CorrelatedRegions { gamma, pairwise, surviving, regions: partition[..surviving].to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::codes::hamiltonian::stabilizer_hamiltonian;
    use crate::codes::space::{code_422, code_513};

    fn ghz(n: usize) -> StabilizerTableau {
        let mut text = format!("QUBITS {n}\nH 0\n");
        for i in 0..n - 1 {
            text.push_str(&format!("/\nCNOT {i} {}\n", i + 1));
        }
        StabilizerTableau::from_circuit(&parse_circuit(&text).unwrap()).unwrap()
    }

    #[test]
    fn identity_map_gives_equality_on_ghz() {
        let r = infectiousness_check(&ghz(4), &LayeredCircuit::new(4), 2).unwrap();
        assert_eq!(r.blowup, 1);
        assert!(r.equality, "{r:?}");
        assert_eq!(r.dim_c_ell, 2);
    }

    #[test]
    fn ghz_robustness_delta() {
        let h = stabilizer_hamiltonian(&ghz(6)).unwrap();
        let r = robustness_params(&h, 1e-4).unwrap();
        assert_eq!(r.m, 6);
        assert!((r.delta - 6e-4f64.sqrt()).abs() < 1e-9);
        assert!(r.empirical.unwrap().passed);
        assert_eq!(robustness_params(&h, 0.0).unwrap().delta, 0.0);
    }

    #[test]
    fn sandwich_on_standard_codes() {
        let c422 = CodeSpace::from_stabilizer(&code_422()).unwrap();
        let swap = parse_circuit("SWAP 0 1\nSWAP 2 3").unwrap();
        let r = distance_sandwich_check(&c422, &swap).unwrap();
        assert!(r.holds && r.distance == 2 && r.mapped_distance == 2);
        let c513 = CodeSpace::from_stabilizer(&code_513()).unwrap();
        assert!(distance_sandwich_check(&c513, &LayeredCircuit::new(5)).unwrap().holds);
    }

    #[test]
    fn ghz_singletons_are_half_correlated() {
        let psi = StateVector::from_amplitudes(ghz(6).state_vector().unwrap()).unwrap();
        let regions: Vec<Region> = (0..6).map(|q| Region::new(vec![q], 6).unwrap()).collect();
        let r = correlated_regions(&psi, &regions, 0.4).unwrap();
        assert_eq!(r.surviving, 6);
        assert!(r.pairwise.iter().all(|p| (p.value - 0.5).abs() < 1e-12));
    }
}
