use rand::Rng;

use crate::circuit::{Gate, LayeredCircuit};
use crate::error::{MhError, Result};
use crate::pauli::PauliString;
use crate::stabilizer::{conjugate_pauli, StabilizerTableau};

/// Stabilizer state held as a (non-canonical) commuting generator list.
#[derive(Clone, Debug)]
pub struct StabilizerSim {
    n: usize,
    gens: Vec<PauliString>,
}

impl StabilizerSim {
    pub fn new(t: &StabilizerTableau) -> Self {
        StabilizerSim { n: t.n(), gens: t.generators().to_vec() }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(&StabilizerTableau::zero_state(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        for r in self.gens.iter_mut() {
            conjugate_pauli(r, g)?;
        }
        Ok(())
    }

    pub fn run(&mut self, c: &LayeredCircuit) -> Result<()> {
        if c.n() != self.n {
            return Err(MhError::Dimension(format!("circuit on {} qubits, state on {}", c.n(), self.n)));
        }
        c.require_clifford()?;
        for g in c.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Pauli X on q (conjugation flips the sign of generators with a Z there).
    pub fn apply_x(&mut self, q: usize) {
        for r in self.gens.iter_mut() {
            r.conj_x(q);
        }
    }

    pub fn apply_z(&mut self, q: usize) {
        for r in self.gens.iter_mut() {
            r.conj_z(q);
        }
    }

    pub fn to_tableau(&self) -> StabilizerTableau {
        StabilizerTableau::canonicalize_commuting(self.n, self.gens.clone()).expect("simulation keeps a valid group")
    }

    /// Z measurement on q; `forced` overrides sampling. Returns (outcome, probability).
    pub fn measure_z<R: Rng>(&mut self, q: usize, forced: Option<bool>, rng: &mut R) -> Result<(bool, f64)> {
        if q >= self.n {
            return Err(MhError::InvalidRegion(format!("qubit {q} out of range for n = {}", self.n)));
        }
        let mut zq = PauliString::identity(self.n);
        zq.set_bits(q, false, true);
        if let Some(p) = self.gens.iter().position(|g| g.x(q)) {
            let pivot = self.gens[p].clone();
            for (i, g) in self.gens.iter_mut().enumerate() {
                if i != p && g.x(q) {
                    g.mul_assign_right(&pivot);
                }
            }
            let outcome = forced.unwrap_or_else(|| rng.random::<bool>());
            if outcome {
                zq.negate();
            }
            self.gens[p] = zq;
            return Ok((outcome, 0.5));
        }
        let canon = self.to_tableau();
        match canon.contains(&zq) {
            Some(plus) => {
                let outcome = !plus;
                if let Some(f) = forced {
                    if f != outcome {
                        return Err(MhError::ImpossibleOutcome { qubit: q });
                    }
                }
                Ok((outcome, 1.0))
            }
            None => {
                // Mixed state with Z_q outside the group: uniform outcome.
                let outcome = forced.unwrap_or_else(|| rng.random::<bool>());
                if outcome {
                    zq.negate();
                }
                self.gens.push(zq);
                Ok((outcome, 0.5))
            }
        }
    }
}

/// Clifford evolution of a tableau by generator conjugation.
pub fn tableau_run(c: &LayeredCircuit, t0: &StabilizerTableau) -> Result<StabilizerTableau> {
    if c.n() != t0.n() {
        return Err(MhError::Dimension(format!("circuit on {} qubits, tableau on {}", c.n(), t0.n())));
    }
    let mut s = StabilizerSim::new(t0);
    s.run(c)?;
    Ok(s.to_tableau())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_prep_tableau() {
        let t = tableau_run(&parse_circuit("H 0 / CNOT 0 1").unwrap(), &StabilizerTableau::zero_state(2)).unwrap();
        assert_eq!(t, StabilizerTableau::from_strs(&["XX", "ZZ"]).unwrap());
    }

    #[test]
    fn ghz_hundred_has_all_x_generator() {
        let n = 100;
        let mut c = LayeredCircuit::new(n);
        c.push_layer(vec![Gate::h(0)]).unwrap();
        for i in 0..n - 1 {
            c.push_layer(vec![Gate::cnot(i, i + 1)]).unwrap();
        }
        let t = tableau_run(&c, &StabilizerTableau::zero_state(n)).unwrap();
        let all_x: PauliString = "X".repeat(n).parse().unwrap();
        assert_eq!(t.contains(&all_x), Some(true));
        assert_eq!(t.generators()[0], all_x);
    }

    #[test]
    fn deterministic_and_random_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = StabilizerSim::new(&StabilizerTableau::from_strs(&["XX", "ZZ"]).unwrap());
        let (o0, p0) = s.measure_z(0, Some(true), &mut rng).unwrap();
        assert!(o0 && p0 == 0.5);
        let (o1, p1) = s.measure_z(1, None, &mut rng).unwrap();
        assert!(o1 && p1 == 1.0);
        assert!(matches!(s.measure_z(1, Some(false), &mut rng), Err(MhError::ImpossibleOutcome { .. })));
    }
}
