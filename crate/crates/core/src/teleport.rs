//! Per-qubit teleportation through a φ⁺ pair.
//!
//! Each message qubit `i` is teleported on its own 3-qubit register
//! `(i, i', i'')` = message ⊗ φ⁺. The joint state of all `m` qubits is a
//! product over `i`, so running the registers one at a time is exact.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{self, Amplitude, BellOutcome, SingleQubitGate, StateVector};

/// Upper bound on the number of message qubits per run.
pub const DEFAULT_MAX_MESSAGE_QUBITS: usize = 64;

/// A normalized single-qubit message `alpha|0⟩ + beta|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageQubitSpec {
    alpha: Amplitude,
    beta: Amplitude,
}

impl MessageQubitSpec {
    pub fn new(alpha: Amplitude, beta: Amplitude) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::NonFinite);
        }
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(MessageQubitSpec {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    /// Uniformly random pure state: two independent standard complex
    /// Gaussians, normalized.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut draw = || Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
            let (a, b) = (draw(), draw());
            if let Ok(spec) = MessageQubitSpec::new(a, b) {
                return spec;
            }
        }
    }

    pub fn alpha(&self) -> Amplitude {
        self.alpha
    }

    pub fn beta(&self) -> Amplitude {
        self.beta
    }

    pub fn state(&self) -> StateVector {
        // Normalized on construction, so this cannot fail.
        StateVector::normalized(vec![self.alpha, self.beta]).expect("normalized spec")
    }
}

/// Bob's correction operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliCorrection {
    /// `|0⟩⟨0| + |1⟩⟨1|`
    Identity,
    /// `|0⟩⟨1| + |1⟩⟨0|`
    U1X,
    /// `|0⟩⟨0| − |1⟩⟨1|`
    U2Z,
    /// `|0⟩⟨1| − |1⟩⟨0|`
    U3,
}

const IDENTITY: SingleQubitGate = SingleQubitGate::real([[1.0, 0.0], [0.0, 1.0]]);
const U1_X: SingleQubitGate = SingleQubitGate::real([[0.0, 1.0], [1.0, 0.0]]);
const U2_Z: SingleQubitGate = SingleQubitGate::real([[1.0, 0.0], [0.0, -1.0]]);
const U3: SingleQubitGate = SingleQubitGate::real([[0.0, 1.0], [-1.0, 0.0]]);

impl PauliCorrection {
    pub const ALL: [PauliCorrection; 4] = [
        PauliCorrection::Identity,
        PauliCorrection::U1X,
        PauliCorrection::U2Z,
        PauliCorrection::U3,
    ];

    pub fn gate(self) -> SingleQubitGate {
        match self {
            PauliCorrection::Identity => IDENTITY,
            PauliCorrection::U1X => U1_X,
            PauliCorrection::U2Z => U2_Z,
            PauliCorrection::U3 => U3,
        }
    }

    /// `self ∘ other` (apply `other` first) modulo global phase.
    pub fn then_after(self, other: PauliCorrection) -> PauliCorrection {
        let product = self.gate().compose(&other.gate());
        Self::ALL
            .into_iter()
            .find(|p| p.gate().equals_up_to_phase(&product, 1e-12))
            .expect("Pauli-type corrections are closed under composition")
    }

    pub fn name(self) -> &'static str {
        match self {
            PauliCorrection::Identity => "I",
            PauliCorrection::U1X => "u1",
            PauliCorrection::U2Z => "u2",
            PauliCorrection::U3 => "u3",
        }
    }
}

/// Outcome of teleporting one message qubit, before Bob corrects it.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportRecord {
    pub outcome: BellOutcome,
    pub bob_state_pre_correction: StateVector,
    pub reference: MessageQubitSpec,
}

/// Bob's residual qubit for each Bell outcome on `(message ⊗ φ⁺)`:
///
/// * φ⁺ → `α|0⟩ + β|1⟩`
/// * ψ⁺ → `α|1⟩ + β|0⟩`
/// * φ⁻ → `α|0⟩ − β|1⟩`
/// * ψ⁻ → `α|1⟩ − β|0⟩`
pub fn correction_for(outcome: BellOutcome) -> PauliCorrection {
    match outcome {
        BellOutcome::PhiPlus => PauliCorrection::Identity,
        BellOutcome::PsiPlus => PauliCorrection::U1X,
        BellOutcome::PhiMinus => PauliCorrection::U2Z,
        BellOutcome::PsiMinus => PauliCorrection::U3,
    }
}

fn joint_register(spec: &MessageQubitSpec) -> Result<StateVector> {
    statevec::tensor(&spec.state(), &statevec::make_bell_pair(BellOutcome::PhiPlus))
}

pub fn teleport_one<R: Rng + ?Sized>(spec: &MessageQubitSpec, rng: &mut R) -> Result<TeleportRecord> {
    let joint = joint_register(spec)?;
    let (outcome, bob) = statevec::bell_measure(&joint, 0, 1, rng)?;
    Ok(TeleportRecord {
        outcome,
        bob_state_pre_correction: bob,
        reference: *spec,
    })
}

/// Teleportation with the Bell outcome fixed rather than sampled.
pub fn teleport_branch(spec: &MessageQubitSpec, outcome: BellOutcome) -> Result<TeleportRecord> {
    let joint = joint_register(spec)?;
    let bob = statevec::bell_project(&joint, 0, 1, outcome)?;
    Ok(TeleportRecord {
        outcome,
        bob_state_pre_correction: bob,
        reference: *spec,
    })
}

pub fn apply_correction(record: &TeleportRecord, correction: PauliCorrection) -> StateVector {
    // A 1-qubit register always has qubit 0.
    statevec::apply_gate(&record.bob_state_pre_correction, &correction.gate(), 0).expect("Bob holds exactly one qubit")
}

pub fn teleport_batch<R: Rng + ?Sized>(specs: &[MessageQubitSpec], rng: &mut R) -> Result<Vec<TeleportRecord>> {
    teleport_batch_with_limit(specs, DEFAULT_MAX_MESSAGE_QUBITS, rng)
}

pub fn teleport_batch_with_limit<R: Rng + ?Sized>(
    specs: &[MessageQubitSpec],
    max: usize,
    rng: &mut R,
) -> Result<Vec<TeleportRecord>> {
    if specs.is_empty() || specs.len() > max {
        return Err(Error::MessageLength { m: specs.len(), max });
    }
    specs.iter().map(|spec| teleport_one(spec, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::fidelity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Amplitude {
        Complex64::new(re, im)
    }

    /// Hand-expanded 2×2 action, independent of `SingleQubitGate`.
    fn mat_vec(m: [[f64; 2]; 2], v: [Amplitude; 2]) -> [Amplitude; 2] {
        [v[0] * m[0][0] + v[1] * m[0][1], v[0] * m[1][0] + v[1] * m[1][1]]
    }

    #[test]
    fn u3_undoes_psi_minus_branch_matrix_oracle() {
        let (a, b) = (c(0.3, -0.4), c(0.5, 0.7));
        // branch α|1⟩ − β|0⟩ = (−β, α)
        let out = mat_vec([[0.0, 1.0], [-1.0, 0.0]], [-b, a]);
        assert!((out[0] - a).norm() < 1e-15 && (out[1] - b).norm() < 1e-15);
        // and Z undoes α|0⟩ − β|1⟩
        let out = mat_vec([[1.0, 0.0], [0.0, -1.0]], [a, -b]);
        assert!((out[0] - a).norm() < 1e-15 && (out[1] - b).norm() < 1e-15);
        // and X undoes α|1⟩ + β|0⟩
        let out = mat_vec([[0.0, 1.0], [1.0, 0.0]], [b, a]);
        assert!((out[0] - a).norm() < 1e-15 && (out[1] - b).norm() < 1e-15);
    }

    #[test]
    fn gates_are_unitary() {
        for p in PauliCorrection::ALL {
            assert!(p.gate().unitarity_deviation() < 1e-15);
            assert!(SingleQubitGate::new(*p.gate().matrix()).is_ok());
        }
    }

    #[test]
    fn apply_gate_examples() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(statevec::apply_gate(&zero, &U1_X, 0).unwrap(), one);

        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let branch = StateVector::from_amplitudes(vec![-b, a]).unwrap();
        let fixed = statevec::apply_gate(&branch, &U3, 0).unwrap();
        let want = StateVector::from_amplitudes(vec![a, b]).unwrap();
        assert!((fidelity(&fixed, &want).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(statevec::apply_gate(&want, &IDENTITY, 0).unwrap(), want);
    }

    #[test]
    fn correction_mapping() {
        assert_eq!(correction_for(BellOutcome::PhiPlus), PauliCorrection::Identity);
        assert_eq!(correction_for(BellOutcome::PsiPlus), PauliCorrection::U1X);
        assert_eq!(correction_for(BellOutcome::PhiMinus), PauliCorrection::U2Z);
        assert_eq!(correction_for(BellOutcome::PsiMinus), PauliCorrection::U3);
    }

    #[test]
    fn branches_match_expansion() {
        let spec = MessageQubitSpec::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let (a, b) = (spec.alpha(), spec.beta());
        let expected = [
            (BellOutcome::PhiPlus, [a, b]),
            (BellOutcome::PsiPlus, [b, a]),
            (BellOutcome::PhiMinus, [a, -b]),
            (BellOutcome::PsiMinus, [-b, a]),
        ];
        for (outcome, amps) in expected {
            let record = teleport_branch(&spec, outcome).unwrap();
            assert_eq!(record.outcome, outcome);
            let want = StateVector::from_amplitudes(amps.to_vec()).unwrap();
            assert!((fidelity(&record.bob_state_pre_correction, &want).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_input_phi_plus_gives_zero() {
        let spec = MessageQubitSpec::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let record = teleport_branch(&spec, BellOutcome::PhiPlus).unwrap();
        assert!(
            (fidelity(&record.bob_state_pre_correction, &StateVector::basis(1, 0).unwrap()).unwrap() - 1.0).abs()
                < 1e-12
        );
    }

    #[test]
    fn apply_correction_examples() {
        let spec = MessageQubitSpec::new(c(0.2, 0.1), c(-0.7, 0.3)).unwrap();
        let rec = teleport_branch(&spec, BellOutcome::PhiMinus).unwrap();
        let fixed = apply_correction(&rec, PauliCorrection::U2Z);
        assert!((fidelity(&fixed, &spec.state()).unwrap() - 1.0).abs() < 1e-9);

        let rec = teleport_branch(&spec, BellOutcome::PhiPlus).unwrap();
        assert!(
            (fidelity(&apply_correction(&rec, PauliCorrection::Identity), &spec.state()).unwrap() - 1.0).abs() < 1e-9
        );

        let zero = MessageQubitSpec::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let rec = teleport_branch(&zero, BellOutcome::PhiPlus).unwrap();
        assert!(fidelity(&apply_correction(&rec, PauliCorrection::U1X), &zero.state()).unwrap() < 1e-15);
    }

    #[test]
    fn composition_is_closed() {
        for a in PauliCorrection::ALL {
            for b in PauliCorrection::ALL {
                let product = a.gate().compose(&b.gate());
                let named = a.then_after(b);
                assert!(named.gate().equals_up_to_phase(&product, 1e-12));
            }
            assert_eq!(a.then_after(a), PauliCorrection::Identity);
        }
        assert_eq!(
            PauliCorrection::U1X.then_after(PauliCorrection::U2Z),
            PauliCorrection::U3
        );
    }

    #[test]
    fn batch_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            teleport_batch(&[], &mut rng),
            Err(Error::MessageLength { m: 0, .. })
        ));
        let specs = vec![MessageQubitSpec::haar(&mut rng); 65];
        assert!(matches!(
            teleport_batch(&specs, &mut rng),
            Err(Error::MessageLength { m: 65, max: 64 })
        ));
        assert_eq!(teleport_batch(&specs[..64], &mut rng).unwrap().len(), 64);
    }

    #[test]
    fn batch_of_one_equals_single() {
        let spec = MessageQubitSpec::new(c(0.1, 0.2), c(0.3, 0.4)).unwrap();
        let single = teleport_one(&spec, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let batch = teleport_batch(&[spec], &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(batch, vec![single]);
    }

    #[test]
    fn batch_of_zeros_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let zero = MessageQubitSpec::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        for rec in teleport_batch(&[zero; 3], &mut rng).unwrap() {
            let bob = apply_correction(&rec, correction_for(rec.outcome));
            assert!((fidelity(&bob, &StateVector::basis(1, 0).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_rejects_zero() {
        assert_eq!(MessageQubitSpec::new(c(0.0, 0.0), c(0.0, 0.0)), Err(Error::ZeroVector));
        assert_eq!(
            MessageQubitSpec::new(c(f64::NAN, 0.0), c(1.0, 0.0)),
            Err(Error::NonFinite)
        );
    }
}
