//! Seeded randomized suites, one per acceptance criterion. Every suite is
//! deterministic in its seed; reports carry instance counts and the first
//! few failures.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitVec;
use crate::certificates::{eval_cat_gluing_eps_indep, eval_dim_power2};
use crate::circuit::{account, account_with_budget, check_relations, Gate, LayeredCircuit};
use crate::codes::{
    code_422, code_513, correlation_norm, cat_history_spectrum, distance_bruteforce, distance_sandwich_check,
    infectiousness_check, CodeSpace, CONTAIN_TOL,
};
use crate::compile::{
    build_exact_gadget, build_threshold_gadget, clifford_to_fanout, compile_tc0, teleport_parallelize,
    verify_fanout_tableau, verify_program_tableau, Tc0Spec, ThresholdGate, Wire,
};
use crate::entropy::{
    binary_entropy, build_family, fa_mi_deviation_bound, mutual_info_dense, mutual_info_density,
    mutual_info_stabilizer, pure_entropy, trace_distance, StateFamily,
};
use crate::error::{MhError, Result};
use crate::lightcone::{find_disjoint_pair, DoubleCone, LightconeIndex};
use crate::linalg::{kron, CMat};
use crate::pauli::PauliString;
use crate::pauli_sum::{pauli_spread, Direction};
use crate::random::{
    brickwork, haar_1q, haar_2q, random_clifford_circuit, random_hermitian, random_mixed_stabilizer, random_qnc0,
    random_stabilizer_state, random_state,
};
use crate::region::Region;
use crate::simulate::{
    dense_run, estimate_local_observable_a1cq, run_measurement_program, tableau_run, MeasurementProgram,
    OutcomeSource, Round, StabilizerSim, StateVector,
};
use crate::stabilizer::StabilizerTableau;

/// Default seed for suites and randomized commands.
pub const DEFAULT_SEED: u64 = 0x4d48_15ee_d;
const FAILURE_CAP: usize = 20;

/// Suite names with the acceptance criterion each one backs.
pub const SUITES: [(&str, usize); 11] = [
    ("integrality", 1),
    ("biased_cat", 2),
    ("data_processing", 3),
    ("fannes", 4),
    ("estimator", 5),
    ("teleportation", 6),
    ("gadgets", 7),
    ("history", 8),
    ("codes", 9),
    ("certificates", 10),
    ("accounting", 11),
];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub criterion: usize,
    pub seed: u64,
    pub checked: usize,
    pub failure_count: usize,
    /// The first few failures.
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub passed: bool,
}

#[derive(Default)]
struct Tally {
    checked: usize,
    failure_count: usize,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < FAILURE_CAP {
                self.failures.push(what());
            }
        }
    }

    fn absorb(&mut self, results: Vec<Result<(bool, String)>>) -> Result<()> {
        for r in results {
            let (ok, msg) = r?;
            self.check(ok, || msg);
        }
        Ok(())
    }
}

fn trial_rng(seed: u64, t: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (t as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Runs one suite. `trials` overrides the default instance count where the
/// suite is randomized.
pub fn run_suite(name: &str, trials: Option<usize>, seed: u64) -> Result<SuiteReport> {
    let criterion = SUITES
        .iter()
        .find(|(s, _)| *s == name)
        .map(|(_, k)| *k)
        .ok_or_else(|| MhError::invalid(format!("unknown suite '{name}'")))?;
    let mut t = Tally::default();
    match name {
        "integrality" => integrality(&mut t, trials.unwrap_or(500), seed)?,
        "biased_cat" => biased_cat(&mut t)?,
        "data_processing" => data_processing(&mut t, trials.unwrap_or(200), seed)?,
        "fannes" => fannes(&mut t, trials.unwrap_or(200), seed)?,
        "estimator" => estimator(&mut t, trials.unwrap_or(100), seed)?,
        "teleportation" => teleportation(&mut t, trials.unwrap_or(500), seed)?,
        "gadgets" => gadgets(&mut t, trials.unwrap_or(6), seed)?,
        "history" => history(&mut t)?,
        "codes" => codes(&mut t, trials.unwrap_or(50), seed)?,
        "certificates" => certificates(&mut t)?,
        "accounting" => accounting(&mut t, trials.unwrap_or(1000), seed)?,
        _ => unreachable!(),
    }
    Ok(SuiteReport {
        name: name.to_string(),
        criterion,
        seed,
        checked: t.checked,
        failure_count: t.failure_count,
        passed: t.failure_count == 0 && t.checked > 0,
        failures: t.failures,
        notes: t.notes,
    })
}

/// Two disjoint nonempty regions, each qubit going to A, B or neither.
fn random_disjoint<R: Rng>(n: usize, rng: &mut R) -> (Region, Region) {
    loop {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for q in 0..n {
            match rng.random_range(0..3) {
                0 => a.push(q),
                1 => b.push(q),
                _ => {}
            }
        }
        if !a.is_empty() && !b.is_empty() {
            return (Region::from_iter_unchecked(a), Region::from_iter_unchecked(b));
        }
    }
}

fn integrality(t: &mut Tally, trials: usize, seed: u64) -> Result<()> {
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let n = rng.random_range(2..=10);
            let mixed = n <= 6 && rng.random_bool(0.25);
            let tab = if mixed {
                let drop = rng.random_range(1..=n);
                random_mixed_stabilizer(n, drop, &mut rng)
            } else {
                random_stabilizer_state(n, &mut rng)
            };
            let (a, b) = random_disjoint(n, &mut rng);
            let st = mutual_info_stabilizer(&tab, &a, &b)?;
            let dense = if mixed {
                mutual_info_density(&tab.density()?, n, &a, &b)?.value
            } else {
                mutual_info_dense(&StateVector::from_amplitudes(tab.state_vector()?)?, &a, &b)?.value
            };
            let ok = st.exact_integer.is_some_and(|k| k >= 0 && (k as f64 - dense).abs() <= 1e-9);
            Ok((ok, format!("trial {i}: n={n} A={a} B={b} stabilizer {:?} dense {dense}", st.exact_integer)))
        })
        .collect();
    t.absorb(results)
}

fn biased_cat(t: &mut Tally) -> Result<()> {
    for n in [4usize, 6, 8] {
        let full = (1usize << n) - 1;
        for g in 0..=10 {
            let gamma = 0.05 * g as f64;
            let h = binary_entropy(gamma)?;
            let psi = build_family(&StateFamily::BiasedCat { gamma }, n)?;
            let region = |mask: usize| Region::from_iter_unchecked((0..n).filter(|q| mask >> q & 1 == 1));
            let mut e = vec![0.0; full + 1];
            for (mask, slot) in e.iter_mut().enumerate().skip(1) {
                *slot = pure_entropy(&psi, &region(mask))?;
            }
            for u in 1..full {
                let mut a = (u - 1) & u;
                while a > 0 {
                    let mi = e[a] + e[u ^ a] - e[u];
                    t.check((mi - h).abs() <= 1e-9, || format!("n={n} γ={gamma} A={a:b} B={:b}: {mi} vs {h}", u ^ a));
                    a = (a - 1) & u;
                }
            }
        }
    }
    Ok(())
}

fn data_processing(t: &mut Tally, trials: usize, seed: u64) -> Result<()> {
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            for _ in 0..500 {
                let n = rng.random_range(4..=10);
                let depth = rng.random_range(1..=3);
                let u = if rng.random_bool(0.5) { brickwork(n, depth, &mut rng) } else { random_qnc0(n, depth, &mut rng) };
                let Some((a, b)) = find_disjoint_pair(&u, &Region::full(n), DoubleCone::ForwardOfBack)? else {
                    continue;
                };
                let idx = LightconeIndex::new(&u);
                let (si, sj) = (Region::from_iter_unchecked([a]), Region::from_iter_unchecked([b]));
                let (bi, bj) = (idx.back_of(&si), idx.back_of(&sj));
                let (di, dj) = (idx.forward_of(&bi), idx.forward_of(&bj));
                let before = random_state(n, &mut rng);
                let after = dense_run(&u, &before)?;
                let i1 = mutual_info_dense(&after, &si, &sj)?.value;
                let i2 = mutual_info_dense(&before, &bi, &bj)?.value;
                let i3 = mutual_info_dense(&after, &di, &dj)?.value;
                let ok = i1 <= i2 + 1e-9 && i2 <= i3 + 1e-9;
                return Ok((ok, format!("trial {i}: n={n} depth={depth} pair ({a},{b}): {i1} / {i2} / {i3}")));
            }
            Ok((false, format!("trial {i}: no circuit with a disjoint pair in 500 draws")))
        })
        .collect();
    t.absorb(results)
}

fn fannes(t: &mut Tally, trials: usize, seed: u64) -> Result<()> {
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let n = rng.random_range(2..=8);
            let phi = random_stabilizer_state(n, &mut rng);
            let sigma = random_state(n, &mut rng).density()?;
            let eps: f64 = rng.random_range(0.0..0.05);
            let pure = phi.density()?;
            let rho = &pure * crate::circuit::c(1.0 - eps, 0.0) + sigma * crate::circuit::c(eps, 0.0);
            let dist = trace_distance(&rho, &pure)?;
            let (a, b) = random_disjoint(n, &mut rng);
            let ir = mutual_info_density(&rho, n, &a, &b)?.value;
            let ip = mutual_info_stabilizer(&phi, &a, &b)?.value;
            let bound = fa_mi_deviation_bound(dist, a.len(), b.len())?;
            let ok = dist <= eps + 1e-12 && (ir - ip).abs() <= bound + 1e-9;
            Ok((ok, format!("trial {i}: n={n} ε={eps} dist={dist}: |{ir} − {ip}| vs {bound}")))
        })
        .collect();
    t.absorb(results)
}

fn ghz_circuit(n: usize) -> Result<LayeredCircuit> {
    let targets: Vec<usize> = (1..n).collect();
    LayeredCircuit::from_layers(n, vec![vec![Gate::h(0)], vec![Gate::fanout(0, &targets)]])
}

fn estimator(t: &mut Tally, trials: usize, seed: u64) -> Result<()> {
    let n = 12;
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let cl = random_clifford_circuit(n, rng.random_range(1..=2 * n), &mut rng);
            let q = random_qnc0(n, rng.random_range(1..=3), &mut rng);
            let k = rng.random_range(1..=3);
            let mut qs: Vec<usize> = (0..n).collect();
            qs.shuffle(&mut rng);
            let s = Region::from_iter_unchecked(qs[..k].iter().copied());
            let op = random_hermitian(1 << k, &mut rng);
            let est = estimate_local_observable_a1cq(&cl, &q, &op, &s)?;
            let psi = dense_run(&q, &dense_run(&cl, &StateVector::zeros(n)?)?)?;
            let want = psi.expectation(&op, s.qubits())?.re;
            Ok(((est.value - want).abs() <= 1e-9, format!("trial {i}: S={s} estimate {} dense {want}", est.value)))
        })
        .collect();
    t.absorb(results)?;

    let mut rng = trial_rng(seed, trials);
    let big = 200;
    let cl = ghz_circuit(big)?;
    let q = random_qnc0(big, 3, &mut rng);
    let s = Region::from_iter_unchecked([0, 99, 199]);
    let op = random_hermitian(8, &mut rng);
    let start = Instant::now();
    let est = estimate_local_observable_a1cq(&cl, &q, &op, &s)?;
    let fast = start.elapsed().as_secs_f64() < 1.0;
    t.check(fast && est.value.is_finite(), || format!("n=200 GHZ estimate {} not within 1 s", est.value));
    Ok(())
}

/// Bell pairs between qubits 0..n and n reference qubits at `base..base+n`,
/// everything else in |0⟩.
fn bell_input(n: usize, base: usize, total: usize) -> Result<StabilizerTableau> {
    let mut gens = Vec::new();
    for q in 0..n {
        for p in ['X', 'Z'] {
            let mut g = PauliString::single(total, q, p)?;
            g.set_local(base + q, p)?;
            gens.push(g);
        }
    }
    for q in (n..total).filter(|&q| q < base || q >= base + n) {
        gens.push(PauliString::single(total, q, 'Z')?);
    }
    StabilizerTableau::canonicalize(total, &gens)
}

/// Recovers the Pauli frame of an uncorrected teleportation run on a Choi
/// input by search, and compares it with the correction map at every outcome.
fn frame_search(c: &LayeredCircuit, layers_per_stage: usize) -> Result<(bool, usize)> {
    let n = c.n();
    let (p, map) = teleport_parallelize(c, layers_per_stage)?;
    let total = p.n + n;
    let ident: Vec<usize> = (0..p.n).collect();
    let round = &p.rounds[0];
    let bare = MeasurementProgram {
        n: total,
        rounds: vec![Round { block: round.block.relabel(&ident, total)?, measured: round.measured.clone(), correction: None }],
        output: p.output.clone(),
    };
    let input = bell_input(n, p.n, total)?;
    let keep = p.output.union(&Region::from_iter_unchecked(p.n..total));
    let want = {
        let choi = bell_input(n, n, 2 * n)?;
        let ident_n: Vec<usize> = (0..n).collect();
        tableau_run(&c.relabel(&ident_n, 2 * n)?, &choi)?
    };
    let bits = map.outcome_bits();
    let mut checked = 0;
    for y in 0..1usize << bits {
        let outcomes: Vec<bool> = (0..bits).map(|k| y >> k & 1 == 1).collect();
        let (sim, _) = run_measurement_program(&bare, StabilizerSim::new(&input), &OutcomeSource::Forced(outcomes.clone()))?;
        let got = sim.to_tableau().restrict(&keep)?;
        let mut found = Vec::new();
        for f in 0..1usize << (2 * n) {
            let mut s = StabilizerSim::new(&got);
            for q in 0..n {
                if f >> q & 1 == 1 {
                    s.apply_x(q);
                }
                if f >> (n + q) & 1 == 1 {
                    s.apply_z(q);
                }
            }
            if s.to_tableau() == want {
                found.push(f);
            }
        }
        let (x, z) = map.apply(&BitVec::from_bools(&outcomes))?;
        let f_map = (0..n).fold(0usize, |acc, q| acc | (x[q] as usize) << q | (z[q] as usize) << (n + q));
        checked += 1;
        if found != vec![f_map] {
            return Ok((false, checked));
        }
    }
    Ok((true, checked))
}

fn teleportation(t: &mut Tally, trials: usize, seed: u64) -> Result<()> {
    let mut configs = Vec::new();
    for n in 1..=5usize {
        for depth in 1..=6usize {
            for s in 1..=depth {
                let d = depth.div_ceil(s);
                if 2 * n * d <= 12 {
                    configs.push((n, depth, s));
                }
            }
        }
    }
    let results = configs
        .par_iter()
        .enumerate()
        .map(|(i, &(n, depth, s))| {
            let mut rng = trial_rng(seed, i);
            let c = random_clifford_circuit(n, depth, &mut rng);
            let input = random_stabilizer_state(n, &mut rng);
            let (p, map) = teleport_parallelize(&c, s)?;
            let want = tableau_run(&c, &input)?;
            let bits = map.outcome_bits();
            for y in 0..1usize << bits {
                let outcomes = OutcomeSource::Forced((0..bits).map(|k| y >> k & 1 == 1).collect());
                if !verify_program_tableau(&p, &input, &want, &outcomes)? {
                    return Ok((false, format!("n={n} depth={depth} staging {s}: outcome {y:b} wrong")));
                }
            }
            Ok((true, String::new()))
        })
        .collect();
    t.absorb(results)?;
    t.notes.push(format!("{} exhaustive configurations", configs.len()));

    let circuits = 5;
    let per = trials.div_ceil(circuits);
    for k in 0..circuits {
        let mut rng = trial_rng(seed ^ 0x7e1e, k);
        let c = random_clifford_circuit(64, 6, &mut rng);
        let (p, _) = teleport_parallelize(&c, 2)?;
        let results = (0..per)
            .into_par_iter()
            .map(|j| {
                let mut rng = trial_rng(seed ^ 0x64, k * per + j);
                let input = random_stabilizer_state(64, &mut rng);
                let want = tableau_run(&c, &input)?;
                let src = OutcomeSource::Seeded(seed.wrapping_add((k * per + j) as u64));
                let ok = verify_program_tableau(&p, &input, &want, &src)?;
                Ok((ok, format!("n=64 circuit {k} trial {j} wrong")))
            })
            .collect();
        t.absorb(results)?;
    }

    for (i, &(n, depth, s)) in [(1, 3, 1), (2, 2, 1), (2, 4, 2), (1, 6, 2), (3, 2, 2)].iter().enumerate() {
        let mut rng = trial_rng(seed ^ 0x11, i);
        let c = random_clifford_circuit(n, depth, &mut rng);
        let (ok, outcomes) = frame_search(&c, s)?;
        t.check(ok, || format!("correction map disagrees with the searched frame (n={n} depth={depth} staging {s})"));
        t.notes.push(format!("frame search n={n} depth={depth} staging {s}: {outcomes} outcomes"));
    }

    for i in 0..20 {
        let mut rng = trial_rng(seed ^ 0xfa, i);
        let n = rng.random_range(1..=5);
        let c = random_clifford_circuit(n, rng.random_range(1..=6), &mut rng);
        let comp = clifford_to_fanout(&c)?;
        let ok = comp.accounting.fanout_depth <= 4 && comp.violations.is_empty() && verify_fanout_tableau(&c, &comp)?;
        t.check(ok, || format!("fanout compilation {i}: fanout_depth {}", comp.accounting.fanout_depth));
    }
    Ok(())
}

/// Random depth-2 threshold circuit: layer-1 gates on inputs, layer-2 gates
/// on layer-1 gates and inputs.
fn random_tc0<R: Rng>(rng: &mut R) -> Tc0Spec {
    let inputs = rng.random_range(2..=6);
    let mut gates = Vec::new();
    let first = rng.random_range(1..=3);
    for _ in 0..first {
        let mut pool: Vec<usize> = (0..inputs).collect();
        pool.shuffle(rng);
        let m = rng.random_range(1..=inputs.min(4));
        let t = rng.random_range(0..=m);
        gates.push(ThresholdGate { layer: 1, t, inputs: pool[..m].iter().map(|&i| Wire::Input(i)).collect() });
    }
    let second = rng.random_range(1..=2);
    for _ in 0..second {
        let mut pool: Vec<Wire> = (0..first).map(Wire::Gate).collect();
        pool.shuffle(rng);
        let k = rng.random_range(1..=first);
        let mut ins: Vec<Wire> = pool[..k].to_vec();
        if rng.random_bool(0.5) {
            ins.push(Wire::Input(rng.random_range(0..inputs)));
        }
        let t = rng.random_range(0..=ins.len());
        gates.push(ThresholdGate { layer: 2, t, inputs: ins });
    }
    let outputs = (first..first + second).map(Wire::Gate).collect();
    Tc0Spec { inputs, gates, outputs }
}

fn gadgets(t: &mut Tally, tc0_instances: usize, seed: u64) -> Result<()> {
    let mut jobs = Vec::new();
    for m in 1..=6usize {
        for p in 0..=m {
            for clean in [false, true] {
                jobs.push((m, p, clean));
            }
        }
    }
    let results = jobs
        .par_iter()
        .flat_map(|&(m, p, clean)| {
            let ex = build_exact_gadget(m, p, clean).map(|r| {
                let ok = r.functional_table.all_correct
                    && r.functional_table.exhaustive
                    && r.within_ceiling
                    && r.accounting.mh_level <= if clean { 6 } else { 4 }
                    && r.violations.is_empty();
                (ok, format!("EX^{p} m={m} clean={clean}: level {} table {:?}", r.accounting.mh_level, r.functional_table.failures))
            });
            let th = build_threshold_gadget(m, p, clean).map(|r| {
                let ok = r.functional_table.all_correct
                    && r.functional_table.exhaustive
                    && r.within_ceiling
                    && r.accounting.mh_level <= if clean { 8 } else { 4 }
                    && r.violations.is_empty();
                (ok, format!("TH^{p} m={m} clean={clean}: level {} table {:?}", r.accounting.mh_level, r.functional_table.failures))
            });
            vec![ex, th]
        })
        .collect();
    t.absorb(results)?;

    for i in 0..tc0_instances {
        let mut rng = trial_rng(seed ^ 0x7c0, i);
        let spec = random_tc0(&mut rng);
        for clean in [false, true] {
            let comp = compile_tc0(&spec, clean)?;
            let table = comp.functional_table.as_ref();
            let ok = table.is_some_and(|f| f.all_correct && f.exhaustive)
                && comp.accounting.mh_level <= 8
                && comp.within_ceiling
                && comp.violations.is_empty();
            t.check(ok, || format!("TC0 instance {i} clean={clean}: level {}", comp.accounting.mh_level));
        }
    }
    Ok(())
}

/// Gap values at n = 4, 6, 8 with Δ·n² for the fit.
pub fn history_gaps() -> Result<Vec<(usize, f64)>> {
    [4usize, 6, 8].iter().map(|&n| Ok((n, cat_history_spectrum(n)?.gap))).collect()
}

fn history(t: &mut Tally) -> Result<()> {
    for n in [4usize, 6, 8] {
        let psi = build_family(&StateFamily::CatHistory, n)?;
        let zero = CMat::from_row_slice(2, 2, &[crate::circuit::c(1.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into()]);
        let one = CMat::from_row_slice(2, 2, &[0.0.into(), 0.0.into(), 0.0.into(), crate::circuit::c(1.0, 0.0)]);
        let state = |i: usize| n + i - 1;
        let expect = |op: &CMat, qs: &[usize]| -> Result<f64> { Ok(psi.expectation(op, qs)?.re) };
        let ab = kron(&one, &zero);
        for i in 1..=n / 2 {
            for j in i + 1..=n / 2 {
                // Local index bit 0 ↔ state qubit i (A = |0⟩⟨0|), bit 1 ↔ j (B = |1⟩⟨1|).
                let v = expect(&ab, &[state(i), state(j)])?;
                t.check(v.abs() <= 1e-10, || format!("n={n}: tr(Ψ A_{i} B_{j}) = {v}"));
                let c = correlation_norm(
                    &psi,
                    &Region::from_iter_unchecked([state(i)]),
                    &Region::from_iter_unchecked([state(j)]),
                )?;
                t.check(c >= 1.0 / 16.0 - 1e-10, || format!("n={n}: correlation ({i},{j}) = {c}"));
            }
            let a = expect(&zero, &[state(i)])?;
            let b = expect(&one, &[state(i)])?;
            t.check(a >= 0.5 - 1e-10, || format!("n={n}: tr(Ψ A_{i}) = {a}"));
            t.check(b >= 0.25 - 1e-10, || format!("n={n}: tr(Ψ B_{i}) = {b}"));
        }
    }
    let gaps = history_gaps()?;
    let scaled: Vec<f64> = gaps.iter().map(|&(n, g)| g * (n * n) as f64).collect();
    let decreasing = gaps.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
    let bounded = scaled.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    t.notes.push(format!("gaps {gaps:?}, Δ·n² {scaled:?}"));
    t.check(decreasing && bounded, || format!("gap fit: gaps {gaps:?}, Δ·n² {scaled:?}"));
    Ok(())
}

fn codes(t: &mut Tally, pairs: usize, seed: u64) -> Result<()> {
    let d422 = distance_bruteforce(&CodeSpace::from_stabilizer(&code_422())?)?;
    t.check(d422 == 2, || format!("[[4,2,2]] distance {d422}"));
    let d513 = distance_bruteforce(&CodeSpace::from_stabilizer(&code_513())?)?;
    t.check(d513 == 3, || format!("[[5,1,3]] distance {d513}"));
    for n in 1..=5 {
        let mut rng = trial_rng(seed ^ 0xd1, n);
        let d = distance_bruteforce(&CodeSpace::from_stabilizer(&random_stabilizer_state(n, &mut rng))?)?;
        t.check(d == n + 1, || format!("dim-1 code on {n} qubits: distance {d}"));
    }

    let results = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0x5a, i);
            let n = rng.random_range(3..=5);
            let drop = rng.random_range(1..=2);
            let code = CodeSpace::from_stabilizer(&random_mixed_stabilizer(n, drop, &mut rng))?;
            let u = if rng.random_bool(0.5) { brickwork(n, 1, &mut rng) } else { random_qnc0(n, rng.random_range(1..=2), &mut rng) };
            let r = distance_sandwich_check(&code, &u)?;
            Ok((r.holds, format!("pair {i}: B={} d={} d(UC)={}", r.blowup, r.distance, r.mapped_distance)))
        })
        .collect();
    t.absorb(results)?;

    let results = (0..20)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0x1f, i);
            let n = rng.random_range(3..=6);
            let phi = random_stabilizer_state(n, &mut rng);
            let u = if i % 2 == 0 {
                brickwork(n, 1, &mut rng)
            } else {
                let mut c = LayeredCircuit::new(n);
                c.push_layer((0..n).map(|q| haar_1q(q, &mut rng)).collect())?;
                c.push_layer(vec![haar_2q(0, 1, &mut rng)])?;
                c
            };
            let r = infectiousness_check(&phi, &u, 1)?;
            let ok = r.containments[..2].iter().all(|c| c.residual < CONTAIN_TOL);
            Ok((ok, format!("instance {i}: n={n} residuals {:?}", r.containments.iter().map(|c| c.residual).collect::<Vec<_>>())))
        })
        .collect();
    t.absorb(results)
}

fn certificates(t: &mut Tally) -> Result<()> {
    let h = |p: f64| -> f64 { if p <= 0.0 || p >= 1.0 { 0.0 } else { -p * p.log2() - (1.0 - p) * (1.0 - p).log2() } };
    for ai in 1..=10 {
        for bi in 0..=10 {
            let (alpha, beta) = (0.05 * ai as f64, 0.01 * bi as f64);
            let gap = h(alpha) - 2.0 * h(beta);
            if gap <= 1e-6 {
                continue;
            }
            let cert = eval_cat_gluing_eps_indep(alpha, beta, 1e-9, 64)?;
            let got = cert.derived.get("eps_threshold").copied().flatten().unwrap_or(f64::NAN);
            let want = 0.037 * gap.powf(4f64.ln());
            t.check((got - want).abs() <= 1e-6 * want, || format!("α={alpha} β={beta}: threshold {got} vs {want}"));
        }
    }
    for dim in 1..=40usize {
        for ell in 1..=3usize {
            for d in 1..=8usize {
                let cert = eval_dim_power2(ell, 3 * d, 0.5, d, dim, 3 * d)?;
                let should = !dim.is_power_of_two() && d > ell;
                let bound_ok = !should || (cert.bound - 0.5 * (d as f64 / ell as f64).log2()).abs() <= 1e-12;
                t.check(cert.fired() == should && bound_ok, || format!("dim={dim} ℓ={ell} d={d}: branch {}", cert.branch));
            }
        }
    }

    let n = 6;
    let mut witness = LayeredCircuit::new(n);
    witness.push_layer(vec![Gate::fanout(0, &(1..n).collect::<Vec<_>>())])?;
    witness.push_layer((0..n).map(Gate::t).collect())?;
    let x0 = PauliString::single(n, 0, 'X')?;
    let spread = pauli_spread(&witness, &x0, Direction::Forward)?;
    t.check(spread == 1 << n, || format!("fanout-then-T witness: {spread} terms"));

    let mut counts = Vec::new();
    for n in [6usize, 8, 10] {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa1);
        let mut c = ghz_circuit(n)?;
        c.push_layer((0..n).map(Gate::t).collect())?;
        c.push_layer(vec![haar_2q(0, 1, &mut rng)])?;
        counts.push(pauli_spread(&c, &PauliString::single(n, 0, 'X')?, Direction::Backward)?);
    }
    t.notes.push(format!("A1[C,Q] spreads at n = 6, 8, 10: {counts:?}"));
    t.check(counts.windows(2).all(|w| w[0] == w[1]), || format!("A1[C,Q] spreads vary with n: {counts:?}"));
    Ok(())
}

/// Random layered circuit over the full gate set, with an optional final
/// measurement layer. Each layer is either Clifford (fanouts allowed) or
/// constant-depth (Haar and T gates, no fanouts).
fn random_circuit<R: Rng>(rng: &mut R) -> Result<LayeredCircuit> {
    let n = rng.random_range(1..=8);
    let depth = rng.random_range(0..=12);
    let t_only = rng.random_bool(0.4);
    let mut c = LayeredCircuit::new(n);
    for _ in 0..depth {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let clifford_layer = rng.random_bool(0.5);
        let mut layer = Vec::new();
        let mut i = 0;
        while i < n {
            let left = n - i;
            let pick = if clifford_layer {
                [0, 1, 2, 7, 8, 9][rng.random_range(0..6)]
            } else {
                [0, 1, 3, 4, 5, 6, 7, 9][rng.random_range(0..8)]
            };
            let q = order[i];
            match pick {
                0 if left >= 2 => {
                    layer.push(Gate::cnot(q, order[i + 1]));
                    i += 2;
                }
                1 if left >= 2 => {
                    layer.push(Gate::cz(q, order[i + 1]));
                    i += 2;
                }
                2 if left >= 3 => {
                    let k = rng.random_range(2..=left.min(4));
                    layer.push(Gate::fanout(q, &order[i + 1..i + k]));
                    i += k;
                }
                3 if left >= 2 && !t_only => {
                    layer.push(haar_2q(q, order[i + 1], rng));
                    i += 2;
                }
                4 if !t_only => {
                    layer.push(haar_1q(q, rng));
                    i += 1;
                }
                5 | 6 => {
                    layer.push(Gate::t(q));
                    i += 1;
                }
                7 => {
                    layer.push(Gate::h(q));
                    i += 1;
                }
                8 => {
                    layer.push(Gate::s(q));
                    i += 1;
                }
                _ => i += 1,
            }
        }
        c.push_layer(layer)?;
    }
    if rng.random_bool(0.2) {
        c.push_layer((0..n).map(|q| Gate::measure(q, q)).collect())?;
    }
    Ok(c)
}

fn accounting(t: &mut Tally, trials: usize, seed: u64) -> Result<()> {
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0xacc, i);
            let c = random_circuit(&mut rng)?;
            let budget = rng.random_range(1..=3);
            let mut bad = Vec::new();
            for r in [account(&c)?, account_with_budget(&c, budget)?] {
                bad.extend(check_relations(&r));
            }
            Ok((bad.is_empty(), format!("circuit {i} (n={}, depth={}): {bad:?}", c.n(), c.depth())))
        })
        .collect();
    t.absorb(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", None, 1).is_err());
    }

    #[test]
    fn small_runs_pass() {
        for name in ["integrality", "fannes", "accounting"] {
            let r = run_suite(name, Some(10), 7).unwrap();
            assert!(r.passed, "{name}: {:?}", r.failures);
            assert_eq!(r.checked, 10);
        }
    }
}
