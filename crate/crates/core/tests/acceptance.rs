//! One PASS/FAIL line per acceptance criterion. Each criterion combines the
//! seeded library suite with spot checks against oracles written here.

use mhkit_core::circuit::{account, Gate, GateKind, LayeredCircuit, C64};
use mhkit_core::compile::{build_exact_gadget, build_threshold_gadget, verify_teleport_dense};
use mhkit_core::entropy::{build_family, mutual_info_stabilizer, StateFamily};
use mhkit_core::random::{brickwork, random_clifford_circuit, random_hermitian, random_qnc0, random_stabilizer_state, random_state};
use mhkit_core::simulate::{dense_run, estimate_local_observable_a1cq, FactoredState, OutcomeSource, StateVector};
use mhkit_core::suites::{run_suite, SuiteReport, DEFAULT_SEED, SUITES};
use mhkit_core::{Region, StabilizerTableau};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type M = DMatrix<C64>;

fn z() -> C64 {
    C64::new(0.0, 0.0)
}

/// ρ_keep of an n-qubit density matrix, summing over the traced-out bits.
fn reduce(rho: &M, n: usize, keep: &[usize]) -> M {
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let place = |local: usize, qs: &[usize]| qs.iter().enumerate().fold(0usize, |acc, (i, &q)| acc | (local >> i & 1) << q);
    let mut out = M::from_element(1 << k, 1 << k, z());
    for e in 0..1usize << rest.len() {
        let eb = place(e, &rest);
        for r in 0..1usize << k {
            for c in 0..1usize << k {
                out[(r, c)] += rho[(eb | place(r, keep), eb | place(c, keep))];
            }
        }
    }
    out
}

fn pure(amps: &[C64]) -> M {
    let v = nalgebra::DVector::from_column_slice(amps);
    &v * v.adjoint()
}

fn entropy(rho: &M) -> f64 {
    SymmetricEigen::new(rho.clone())
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-13)
        .map(|&l| -l * l.log2())
        .sum()
}

fn mi(rho: &M, n: usize, a: &[usize], b: &[usize]) -> f64 {
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    entropy(&reduce(rho, n, a)) + entropy(&reduce(rho, n, b)) - entropy(&reduce(rho, n, &ab))
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Qubits reachable backwards from `q` through gate supports.
fn back_cone(c: &LayeredCircuit, q: usize) -> Vec<usize> {
    let mut set = vec![false; c.n()];
    set[q] = true;
    for layer in c.layers().iter().rev() {
        for g in layer {
            if g.qubits.iter().any(|&x| set[x]) {
                g.qubits.iter().for_each(|&x| set[x] = true);
            }
        }
    }
    (0..c.n()).filter(|&x| set[x]).collect()
}

fn criterion_1(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut ok = true;
    for _ in 0..30 {
        let n = rng.random_range(2..=7);
        let t = random_stabilizer_state(n, rng);
        let rho = pure(&t.state_vector().unwrap());
        let a: Vec<usize> = (0..n / 2).collect();
        let b: Vec<usize> = (n / 2..n).filter(|_| rng.random_bool(0.7)).collect();
        if b.is_empty() {
            continue;
        }
        let want = mi(&rho, n, &a, &b);
        let got = mutual_info_stabilizer(&t, &Region::from_iter_unchecked(a), &Region::from_iter_unchecked(b)).unwrap();
        ok &= got.exact_integer.is_some_and(|k| (k as f64 - want).abs() < 1e-9);
    }
    (ok, "30 oracle partial-trace checks".into())
}

fn criterion_2(_: &mut ChaCha8Rng) -> (bool, String) {
    let mut ok = true;
    for (n, gamma) in [(4, 0.15), (6, 0.3), (8, 0.45)] {
        let psi = build_family(&StateFamily::BiasedCat { gamma }, n).unwrap();
        let rho = pure(psi.amplitudes());
        let v = mi(&rho, n, &[0], &[n - 1]);
        ok &= (v - h2(gamma)).abs() < 1e-9;
        let amps = psi.amplitudes();
        ok &= (amps[0].re - gamma.sqrt()).abs() < 1e-12 && (amps[(1 << n) - 1].re - (1.0 - gamma).sqrt()).abs() < 1e-12;
    }
    (ok, "closed-form entropies at three sizes".into())
}

fn criterion_3(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut ok = true;
    let mut done = 0;
    while done < 10 {
        let n = rng.random_range(5..=8);
        let u = brickwork(n, 1, rng);
        let (i, j) = (0, n - 1);
        let (bi, bj) = (back_cone(&u, i), back_cone(&u, j));
        if bi.iter().any(|x| bj.contains(x)) {
            continue;
        }
        let before = random_state(n, rng);
        let after = dense_run(&u, &before).unwrap();
        let i1 = mi(&pure(after.amplitudes()), n, &[i], &[j]);
        let i2 = mi(&pure(before.amplitudes()), n, &bi, &bj);
        ok &= i1 <= i2 + 1e-9;
        done += 1;
    }
    (ok, "10 oracle back-cone instances".into())
}

fn criterion_4(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut ok = true;
    for _ in 0..20 {
        let n = rng.random_range(2..=5);
        let phi = pure(&random_stabilizer_state(n, rng).state_vector().unwrap());
        let sigma = pure(random_state(n, rng).amplitudes());
        let eps: f64 = rng.random_range(0.001..0.05);
        let rho = &phi * C64::new(1.0 - eps, 0.0) + &sigma * C64::new(eps, 0.0);
        let (a, b) = (vec![0], (1..n).collect::<Vec<_>>());
        let dev = (mi(&rho, n, &a, &b) - mi(&phi, n, &a, &b)).abs();
        ok &= dev <= 2.0 * eps * n as f64 + 3.0 * h2(eps) + 1e-9;
    }
    (ok, "20 oracle perturbations".into())
}

fn criterion_5(rng: &mut ChaCha8Rng) -> (bool, String) {
    let n = 8;
    let mut ok = true;
    for _ in 0..10 {
        let cl = random_clifford_circuit(n, 6, rng);
        let q = random_qnc0(n, 2, rng);
        let s = [1usize, 5];
        let op = random_hermitian(4, rng);
        let psi = dense_run(&q, &dense_run(&cl, &StateVector::zeros(n).unwrap()).unwrap()).unwrap();
        let red = reduce(&pure(psi.amplitudes()), n, &s);
        let want = (&red * &op).trace().re;
        let got = estimate_local_observable_a1cq(&cl, &q, &op, &Region::from_iter_unchecked(s)).unwrap().value;
        ok &= (got - want).abs() < 1e-9;
    }
    (ok, "10 oracle reduced-density expectations".into())
}

fn criterion_6(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut ok = true;
    for k in 0..8 {
        let n = rng.random_range(1..=2);
        let c = random_clifford_circuit(n, 4, rng);
        let input = random_state(n, rng);
        let f = verify_teleport_dense(&c, 2, &input, &OutcomeSource::Seeded(k)).unwrap();
        ok &= f > 1.0 - 1e-9;
    }
    (ok, "8 dense teleport runs".into())
}

fn criterion_7(_: &mut ChaCha8Rng) -> (bool, String) {
    let mut ok = true;
    for (m, p) in [(3, 1), (4, 2), (4, 0)] {
        for clean in [false, true] {
            let ex = build_exact_gadget(m, p, clean).unwrap();
            let th = build_threshold_gadget(m, p, clean).unwrap();
            for (r, f) in [(&ex, Box::new(move |w: u32| w as usize == p) as Box<dyn Fn(u32) -> bool>), (&th, Box::new(move |w: u32| w as usize >= p))] {
                for x in 0..1u32 << m {
                    let bits: Vec<bool> = (0..r.total_qubits).map(|q| q < m && x >> q & 1 == 1).collect();
                    let mut s = FactoredState::from_bits(&bits);
                    s.run(&r.circuit).unwrap();
                    let p1 = s.prob_one(r.output);
                    ok &= (p1 - if f(x.count_ones()) { 1.0 } else { 0.0 }).abs() < 1e-9;
                }
            }
        }
    }
    (ok, "factored-simulator truth tables for m ≤ 4".into())
}

fn criterion_8(_: &mut ChaCha8Rng) -> (bool, String) {
    let mut ok = true;
    for n in [4usize, 6] {
        let mut amps = vec![z(); 1 << (2 * n)];
        let w = 1.0 / ((n + 1) as f64).sqrt();
        amps[0] = C64::new(w, 0.0);
        for t in 1..=n {
            let clock = (1 << t) - 1;
            let s = std::f64::consts::FRAC_1_SQRT_2 * w;
            amps[clock] += C64::new(s, 0.0);
            amps[clock | (((1 << t) - 1) << n)] += C64::new(s, 0.0);
        }
        let got = build_family(&StateFamily::CatHistory, n).unwrap();
        ok &= got.amplitudes().iter().zip(&amps).all(|(a, b)| (a - b).norm() < 1e-12);
        let rho = pure(&amps);
        let r = reduce(&rho, 2 * n, &[n, n + 1]);
        // Bit 0 ↔ state qubit 1, bit 1 ↔ state qubit 2: A_1 B_2 picks index 0b10.
        ok &= r[(2, 2)].re.abs() < 1e-10;
        ok &= r[(0, 0)].re + r[(2, 2)].re >= 0.5 - 1e-10;
        ok &= r[(2, 2)].re + r[(3, 3)].re >= 0.25 - 1e-10;
    }
    (ok, "history amplitudes and marginals rebuilt independently".into())
}

fn criterion_9(_: &mut ChaCha8Rng) -> (bool, String) {
    // A product state has no logical operators, so every error is harmless up to weight n.
    let t = StabilizerTableau::from_strs(&["ZII", "IZI", "IIZ"]).unwrap();
    let code = mhkit_core::codes::CodeSpace::from_stabilizer(&t).unwrap();
    let d = mhkit_core::codes::distance_bruteforce(&code).unwrap();
    (d == 4, format!("|000⟩ distance {d}"))
}

fn criterion_10(_: &mut ChaCha8Rng) -> (bool, String) {
    let (alpha, beta) = (0.5, 0.05);
    let gap = h2(alpha) - 2.0 * h2(beta);
    let cert = mhkit_core::certificates::eval_cat_gluing_eps_indep(alpha, beta, 1e-9, 64).unwrap();
    let thr = cert.derived["eps_threshold"].unwrap();
    let want = 0.037 * gap.powf(std::f64::consts::LN_2 * 2.0);
    ((thr - want).abs() <= 1e-6 * want, format!("threshold {thr:.6e}"))
}

fn criterion_11(rng: &mut ChaCha8Rng) -> (bool, String) {
    let mut ok = true;
    for _ in 0..50 {
        let n = rng.random_range(1..=6);
        let mut c = LayeredCircuit::new(n);
        for _ in 0..rng.random_range(0..10) {
            let layer: Vec<Gate> =
                (0..n).filter_map(|q| match rng.random_range(0..3) { 0 => Some(Gate::t(q)), 1 => Some(Gate::h(q)), _ => None }).collect();
            c.push_layer(layer).unwrap();
        }
        let r = account(&c).unwrap();
        let t_count = c.gates().filter(|g| matches!(g.kind, GateKind::T)).count();
        let t_depth = c.layers().iter().filter(|l| l.iter().any(|g| matches!(g.kind, GateKind::T))).count();
        ok &= r.t_count == t_count && r.t_depth == t_depth && r.depth == c.depth();
        ok &= r.mh_level <= 2 * t_depth && r.clifford_rounds + r.qnc0_rounds == r.mh_level + 1;
    }
    (ok, "50 oracle recounts".into())
}

fn main() {
    let oracles: [fn(&mut ChaCha8Rng) -> (bool, String); 11] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
    ];
    let mut failed = Vec::new();
    for ((name, k), oracle) in SUITES.iter().zip(oracles) {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + *k as u64);
        let suite: Result<SuiteReport, _> = run_suite(name, None, DEFAULT_SEED);
        let (oracle_ok, what) = oracle(&mut rng);
        let (suite_ok, detail) = match &suite {
            Ok(r) => (r.passed, format!("{} checks, {} failures", r.checked, r.failure_count)),
            Err(e) => (false, format!("error: {e}")),
        };
        let pass = suite_ok && oracle_ok;
        println!("criterion {k:>2} {name:<16} {} ({detail}; {what})", if pass { "PASS" } else { "FAIL" });
        if let Ok(r) = &suite {
            for f in &r.failures {
                println!("    {f}");
            }
        }
        if !pass {
            failed.push(*k);
        }
    }
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
