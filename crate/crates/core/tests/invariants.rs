use mhkit_core::bits::BitVec;
use mhkit_core::certificates::{eval_correlation_blowup, eval_mi_bound};
use mhkit_core::circuit::{account, mh_decompose, BlockKind, Gate};
use mhkit_core::codes::CodeSpace;
use mhkit_core::compile::extract_correction_map;
use mhkit_core::entropy::mutual_info_stabilizer;
use mhkit_core::lightcone::{back_lightcone, blowup, forward_lightcone};
use mhkit_core::random::{random_clifford_circuit, random_mixed_stabilizer, random_qnc0, random_stabilizer_state};
use mhkit_core::simulate::{dense_run, BranchState, StateVector};
use mhkit_core::{LayeredCircuit, PauliString, Region, StabilizerTableau};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pauli(n: usize, x: u32, z: u32, phase: u8) -> PauliString {
    let bits = |m: u32| BitVec::from_bools(&(0..n).map(|q| m >> q & 1 == 1).collect::<Vec<_>>());
    PauliString::from_bits(bits(x), bits(z), phase % 4).unwrap()
}

fn mixed_circuit(n: usize, seed: u64) -> LayeredCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = random_clifford_circuit(n, 3, &mut rng);
    c.append(&random_qnc0(n, 2, &mut rng)).unwrap();
    c.append(&random_clifford_circuit(n, 2, &mut rng)).unwrap();
    if n >= 3 {
        c.push_layer(vec![Gate::fanout(0, &[1, 2])]).unwrap();
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pauli_product_is_associative(n in 1usize..6, a in any::<(u32, u32, u8)>(), b in any::<(u32, u32, u8)>(), c in any::<(u32, u32, u8)>()) {
        let (p, q, r) = (pauli(n, a.0, a.1, a.2), pauli(n, b.0, b.1, b.2), pauli(n, c.0, c.1, c.2));
        let left = p.mul(&q).unwrap().mul(&r).unwrap();
        let right = p.mul(&q.mul(&r).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert!(left.phase() < 4);
        prop_assert!(p.weight() <= n);
        prop_assert_eq!(p.commutes(&q).unwrap(), q.commutes(&p).unwrap());
    }

    #[test]
    fn stabilizer_groups_are_valid(n in 1usize..9, seed in any::<u64>(), drop in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_mixed_stabilizer(n, drop, &mut rng);
        let g = t.generators();
        prop_assert_eq!(t.rank(), g.len());
        prop_assert_eq!(t.rank(), n - drop.min(n));
        for a in g {
            prop_assert!(!a.is_identity_up_to_phase());
            for b in g {
                prop_assert!(a.commutes(b).unwrap());
            }
        }
        let rebuilt = StabilizerTableau::canonicalize(n, g).unwrap();
        prop_assert_eq!(rebuilt, t);
    }

    #[test]
    fn pure_stabilizer_entropy_is_symmetric(n in 1usize..10, seed in any::<u64>(), mask in any::<u32>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_stabilizer_state(n, &mut rng);
        let a = Region::from_iter_unchecked((0..n).filter(|q| mask >> q & 1 == 1));
        prop_assert_eq!(t.entropy(&a).unwrap(), t.entropy(&a.complement(n)).unwrap());
        let b = a.complement(n);
        let mi = mutual_info_stabilizer(&t, &a, &b).unwrap();
        prop_assert_eq!(mi.exact_integer.map(|k| k as f64), Some(mi.value));
        prop_assert!(mi.value >= 0.0 && mi.value <= n as f64);
    }

    #[test]
    fn regions_are_sorted_and_deduplicated(n in 1usize..20, qs in proptest::collection::vec(0usize..20, 0..10)) {
        let qs: Vec<usize> = qs.into_iter().filter(|&q| q < n).collect();
        let mut dedup = qs.clone();
        dedup.sort_unstable();
        dedup.dedup();
        match Region::new(qs.clone(), n) {
            Ok(r) => {
                prop_assert!(r.qubits().windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(r.qubits(), &dedup[..]);
            }
            Err(_) => prop_assert!(dedup.len() < qs.len()),
        }
    }

    #[test]
    fn inverse_undoes_circuit(n in 1usize..7, seed in any::<u64>()) {
        let c = mixed_circuit(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let amps = (0..1usize << n).map(|_| mhkit_core::C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let psi = StateVector::normalized(amps).unwrap();
        let out = dense_run(&c, &psi).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
        let back = dense_run(&c.inverse().unwrap(), &out).unwrap();
        prop_assert!(back.fidelity(&psi) > 1.0 - 1e-10);
    }

    #[test]
    fn decomposition_blocks_alternate_and_respect_gate_classes(n in 1usize..8, seed in any::<u64>()) {
        let c = mixed_circuit(n, seed);
        let d = mh_decompose(&c, 2).unwrap();
        prop_assert!(d.blocks.windows(2).all(|w| w[0].kind != w[1].kind && w[0].end == w[1].start));
        prop_assert_eq!(d.blocks.first().map(|b| b.kind), Some(BlockKind::Clifford));
        for b in &d.blocks {
            for layer in &c.layers()[b.start..b.end] {
                for g in layer {
                    match b.kind {
                        BlockKind::Clifford => prop_assert!(g.is_clifford_kind()),
                        BlockKind::Qnc0 => prop_assert!(g.qubits.len() <= 2),
                    }
                }
            }
            if b.kind == BlockKind::Qnc0 {
                prop_assert!(b.depth() <= 2);
            }
        }
        let r = account(&c).unwrap();
        prop_assert!(r.mh_level <= 2 * r.clifford_rounds && 2 * r.clifford_rounds <= r.mh_level + 2);
        prop_assert!(r.mh_level <= 2 * r.qnc0_rounds && 2 * r.qnc0_rounds <= r.mh_level + 2);
        prop_assert!(r.t_depth <= r.t_count);
    }

    #[test]
    fn lightcones_contain_their_seed_and_respect_depth(n in 1usize..12, depth in 0usize..4, seed in any::<u64>(), q in 0usize..12) {
        let q = q % n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_qnc0(n, depth, &mut rng);
        let s = Region::from_iter_unchecked([q]);
        let back = back_lightcone(&c, &s).unwrap();
        let fwd = forward_lightcone(&c, &s).unwrap();
        prop_assert!(back.contains(q) && fwd.contains(q));
        prop_assert!(back.len() <= 1 << depth);
        let b = blowup(&c);
        prop_assert!(back.len() <= b && fwd.len() <= b);
        prop_assert!(b <= 1 << depth);
    }

    #[test]
    fn branch_simulator_matches_dense(n in 1usize..7, seed in any::<u64>()) {
        let c = mixed_circuit(n, seed);
        let mut b = BranchState::zeros(n);
        b.run(&c).unwrap();
        let dense = dense_run(&c, &StateVector::zeros(n).unwrap()).unwrap();
        prop_assert!(b.to_statevector().unwrap().fidelity(&dense) > 1.0 - 1e-10);
    }

    #[test]
    fn correction_maps_are_linear(n in 1usize..4, depth in 1usize..6, s in 1usize..4, seed in any::<u64>(), y1 in any::<u64>(), y2 in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_clifford_circuit(n, depth, &mut rng);
        let m = extract_correction_map(&c, s).unwrap();
        let k = m.outcome_bits();
        prop_assert_eq!(m.matrix.rows(), 2 * n);
        prop_assert_eq!(m.matrix.cols(), k);
        let v = |y: u64| BitVec::from_bools(&(0..k).map(|i| y >> (i % 64) & 1 == 1).collect::<Vec<_>>());
        let (a, b) = (v(y1), v(y2));
        let mut sum = a.clone();
        sum.xor_assign(&b);
        let (xs, zs) = m.apply(&sum).unwrap();
        let (x1, z1) = m.apply(&a).unwrap();
        let (x2, z2) = m.apply(&b).unwrap();
        for q in 0..n {
            prop_assert_eq!(xs[q], x1[q] ^ x2[q]);
            prop_assert_eq!(zs[q], z1[q] ^ z2[q]);
        }
    }

    #[test]
    fn stabilizer_codes_have_power_of_two_dimension(n in 1usize..7, drop in 0usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_mixed_stabilizer(n, drop, &mut rng);
        let code = CodeSpace::from_stabilizer(&t).unwrap();
        prop_assert_eq!(code.dim(), 1 << (n - t.rank()));
        let p = code.projector();
        prop_assert!((&p * &p - &p).norm() < 1e-9);
        prop_assert!((p.trace().re - code.dim() as f64).abs() < 1e-6);
    }

    #[test]
    fn certificate_bounds_are_nonnegative(alpha in 0.01f64..0.99, width in 0.0f64..0.5, s in 2usize..1000, eps in 0.0f64..0.2, a in 1usize..10, n in 2usize..1000) {
        let beta = (alpha + width).min(0.999);
        if let Ok(cert) = eval_mi_bound(alpha, beta, s, eps, a, n) {
            prop_assert!(cert.bound >= 0.0);
            prop_assert!(["alpha", "beta", "s", "eps", "a", "n"].iter().all(|k| cert.inputs.contains_key(*k)));
        }
        if let Ok(cert) = eval_correlation_blowup(s, a + 1, 1, n, 0.3, 0.1) {
            prop_assert!(cert.bound >= 1.0);
        }
    }
}
