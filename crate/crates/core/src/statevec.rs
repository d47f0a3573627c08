//! Dense state-vector simulation.
//!
//! Amplitudes are stored in computational-basis order with qubit 0 as the
//! most significant bit of the index: in a 3-qubit register the amplitude of
//! `|q0 q1 q2⟩` lives at `q0 << 2 | q1 << 1 | q2`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Largest register `tensor` builds unless told otherwise.
pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Tolerance for norm and unitarity checks.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Projector mass below which a Bell measurement is considered degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

const ZERO: Amplitude = Complex64::new(0.0, 0.0);
const ONE: Amplitude = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Amplitude>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, which must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::BadLength { len });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes, rescaling them to unit norm.
    pub fn normalized(mut amplitudes: Vec<Amplitude>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::BadLength { len: amplitudes.len() });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Self::from_amplitudes(amplitudes)
    }

    /// The 0-qubit register holding the scalar 1; the unit of `tensor`.
    pub fn scalar() -> Self {
        StateVector {
            num_qubits: 0,
            amplitudes: vec![ONE],
        }
    }

    /// Computational basis state `|index⟩` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits > DEFAULT_MAX_QUBITS {
            return Err(Error::CapacityExceeded {
                requested: num_qubits,
                max: DEFAULT_MAX_QUBITS,
            });
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, num_qubits });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(StateVector { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Amplitude> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.num_qubits {
            Err(Error::IndexOutOfRange {
                index,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Bit mask selecting `qubit` in an amplitude index.
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector[{}](", self.num_qubits)?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", a.re, a.im)?;
        }
        write!(f, ")")
    }
}

/// The four Bell states. Declaration order follows the outcome codes
/// `00`, `01`, `10`, `11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    /// Amplitudes on `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn amplitudes(self) -> [Amplitude; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellOutcome::PhiPlus => [h, ZERO, ZERO, h],
            BellOutcome::PhiMinus => [h, ZERO, ZERO, -h],
            BellOutcome::PsiPlus => [ZERO, h, h, ZERO],
            BellOutcome::PsiMinus => [ZERO, h, -h, ZERO],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// 2×2 unitary acting on one qubit, `matrix[row][col]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitGate {
    matrix: [[Amplitude; 2]; 2],
}

impl SingleQubitGate {
    pub fn new(matrix: [[Amplitude; 2]; 2]) -> Result<Self> {
        if matrix.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite);
        }
        let gate = SingleQubitGate { matrix };
        let deviation = gate.unitarity_deviation();
        if deviation > NORM_TOLERANCE {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(gate)
    }

    /// Real-valued gate; used for the fixed Pauli-type operators.
    pub(crate) const fn real(m: [[f64; 2]; 2]) -> Self {
        SingleQubitGate {
            matrix: [
                [Complex64::new(m[0][0], 0.0), Complex64::new(m[0][1], 0.0)],
                [Complex64::new(m[1][0], 0.0), Complex64::new(m[1][1], 0.0)],
            ],
        }
    }

    pub fn matrix(&self) -> &[[Amplitude; 2]; 2] {
        &self.matrix
    }

    /// Largest entry of `|G†G − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let acc: Amplitude = m.iter().map(|row| row[i].conj() * row[j]).sum();
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &SingleQubitGate) -> SingleQubitGate {
        let mut matrix = [[ZERO; 2]; 2];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..2).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum();
            }
        }
        SingleQubitGate { matrix }
    }

    /// True when `self = e^{iγ} other` for some phase γ.
    pub fn equals_up_to_phase(&self, other: &SingleQubitGate, tol: f64) -> bool {
        // tr(A†B) / 2 has modulus 1 exactly when A and B differ by a phase.
        let overlap: Amplitude = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| self.matrix[i][j].conj() * other.matrix[i][j])
            .sum();
        (overlap.norm() / 2.0 - 1.0).abs() < tol
    }

    pub fn apply(&self, state: &StateVector, target: usize) -> Result<StateVector> {
        apply_gate(state, self, target)
    }
}

/// `alpha|0⟩ + beta|1⟩`, rescaled to unit norm.
pub fn make_message_qubit(alpha: Amplitude, beta: Amplitude) -> Result<StateVector> {
    StateVector::normalized(vec![alpha, beta])
}

pub fn make_bell_pair(kind: BellOutcome) -> StateVector {
    StateVector {
        num_qubits: 2,
        amplitudes: kind.amplitudes().to_vec(),
    }
}

/// Kronecker product `a ⊗ b`, limited to [`DEFAULT_MAX_QUBITS`].
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    tensor_with_limit(a, b, DEFAULT_MAX_QUBITS)
}

pub fn tensor_with_limit(a: &StateVector, b: &StateVector, max_qubits: usize) -> Result<StateVector> {
    let requested = a.num_qubits + b.num_qubits;
    if requested > max_qubits {
        return Err(Error::CapacityExceeded {
            requested,
            max: max_qubits,
        });
    }
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    Ok(StateVector {
        num_qubits: requested,
        amplitudes,
    })
}

pub fn apply_gate(state: &StateVector, gate: &SingleQubitGate, target: usize) -> Result<StateVector> {
    state.check_index(target)?;
    let mask = state.mask(target);
    let m = &gate.matrix;
    let mut out = state.amplitudes.clone();
    for i0 in (0..out.len()).filter(|i| i & mask == 0) {
        let i1 = i0 | mask;
        let (a0, a1) = (state.amplitudes[i0], state.amplitudes[i1]);
        out[i0] = m[0][0] * a0 + m[0][1] * a1;
        out[i1] = m[1][0] * a0 + m[1][1] * a1;
    }
    Ok(StateVector {
        num_qubits: state.num_qubits,
        amplitudes: out,
    })
}

/// The analyzer eigenvector for `bit` at angle `theta`:
/// bit 0 is `cos(θ/2)|0⟩ + sin(θ/2)|1⟩`, bit 1 is `−sin(θ/2)|0⟩ + cos(θ/2)|1⟩`.
///
/// With this half-angle convention the singlet correlation is
/// `E(θa, θb) = −cos(θa − θb)`.
pub fn analyzer_vector(theta: f64, bit: u8) -> [Amplitude; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    if bit == 0 {
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)]
    } else {
        [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)]
    }
}

/// Single-qubit analyzer eigenstate, e.g. a prepared or resent photon.
pub fn analyzer_state(theta: f64, bit: u8) -> StateVector {
    StateVector {
        num_qubits: 1,
        amplitudes: analyzer_vector(theta, bit).to_vec(),
    }
}

/// Probability of reading bit 0 when measuring `target` at angle `theta`.
pub fn analyzer_probability_zero(state: &StateVector, target: usize, theta: f64) -> Result<f64> {
    state.check_index(target)?;
    if !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("analyzer angle {theta}")));
    }
    let [v0, v1] = analyzer_vector(theta, 0);
    let mask = state.mask(target);
    let p0 = (0..state.amplitudes.len())
        .filter(|i| i & mask == 0)
        .map(|i0| (v0.conj() * state.amplitudes[i0] + v1.conj() * state.amplitudes[i0 | mask]).norm_sqr())
        .sum::<f64>();
    Ok(p0.clamp(0.0, 1.0))
}

/// Projective measurement of `target` in the analyzer basis at `theta`.
///
/// The measured qubit stays in the register, collapsed onto the eigenvector
/// of the observed bit.
pub fn measure_angle<R: Rng + ?Sized>(
    state: &StateVector,
    target: usize,
    theta: f64,
    rng: &mut R,
) -> Result<(u8, StateVector)> {
    let p0 = analyzer_probability_zero(state, target, theta)?;
    let bit = if rng.random::<f64>() < p0 { 0 } else { 1 };
    let prob = if bit == 0 { p0 } else { 1.0 - p0 };
    if prob < DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateState { mass: prob });
    }

    let v = analyzer_vector(theta, bit);
    let mask = state.mask(target);
    let scale = 1.0 / prob.sqrt();
    let mut out = vec![ZERO; state.amplitudes.len()];
    for i0 in (0..out.len()).filter(|i| i & mask == 0) {
        let i1 = i0 | mask;
        let overlap = (v[0].conj() * state.amplitudes[i0] + v[1].conj() * state.amplitudes[i1]) * scale;
        out[i0] = v[0] * overlap;
        out[i1] = v[1] * overlap;
    }
    Ok((
        bit,
        StateVector {
            num_qubits: state.num_qubits,
            amplitudes: out,
        },
    ))
}

/// Full-register index of residual index `r` when the qubits selected by
/// masks `m1` and `m2` are removed; the pair bits are left at zero.
fn scatter_residual(state: &StateVector, m1: usize, m2: usize, r: usize) -> usize {
    let mut full = 0usize;
    let mut src = state.num_qubits - 2;
    for q in 0..state.num_qubits {
        let bit = state.mask(q);
        if bit == m1 || bit == m2 {
            continue;
        }
        src -= 1;
        if r >> src & 1 == 1 {
            full |= bit;
        }
    }
    full
}

/// Projection of `(q1, q2)` onto each Bell state, as unnormalized residual
/// amplitudes over the remaining qubits (in their original relative order).
fn bell_branches(state: &StateVector, q1: usize, q2: usize) -> Result<[Vec<Amplitude>; 4]> {
    state.check_index(q1)?;
    state.check_index(q2)?;
    if q1 == q2 {
        return Err(Error::RepeatedQubit(q1));
    }
    let (m1, m2) = (state.mask(q1), state.mask(q2));
    let rest_dim = 1usize << (state.num_qubits - 2);

    let base: Vec<usize> = (0..rest_dim).map(|r| scatter_residual(state, m1, m2, r)).collect();

    let mut branches: [Vec<Amplitude>; 4] = Default::default();
    for (branch, outcome) in branches.iter_mut().zip(BellOutcome::ALL) {
        let bell = outcome.amplitudes();
        *branch = base
            .iter()
            .map(|&b| {
                let pair = [b, b | m2, b | m1, b | m1 | m2];
                pair.iter()
                    .zip(bell.iter())
                    .map(|(&i, c)| c.conj() * state.amplitudes[i])
                    .sum()
            })
            .collect();
    }
    Ok(branches)
}

/// Born probabilities of the four Bell outcomes on `(q1, q2)`, in
/// [`BellOutcome::ALL`] order.
pub fn bell_probabilities(state: &StateVector, q1: usize, q2: usize) -> Result<[f64; 4]> {
    let branches = bell_branches(state, q1, q2)?;
    Ok(branches.map(|b| b.iter().map(|a| a.norm_sqr()).sum()))
}

fn sample_bell<R: Rng + ?Sized>(
    state: &StateVector,
    q1: usize,
    q2: usize,
    rng: &mut R,
) -> Result<(BellOutcome, Vec<Amplitude>, f64)> {
    let branches = bell_branches(state, q1, q2)?;
    let probs: Vec<f64> = branches.iter().map(|b| b.iter().map(|a| a.norm_sqr()).sum()).collect();
    let total: f64 = probs.iter().sum();
    if total < DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateState { mass: total });
    }

    let draw = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if p > 0.0 && draw < acc {
            chosen = Some(k);
            break;
        }
    }
    // Rounding can leave `draw` at the very top; fall back to the last branch with mass.
    let k = chosen.unwrap_or_else(|| probs.iter().rposition(|&p| p > 0.0).unwrap_or(0));
    let residual = branches.into_iter().nth(k).unwrap_or_default();
    Ok((BellOutcome::ALL[k], residual, probs[k]))
}

/// Bell-basis measurement of `(q1, q2)`.
///
/// The measured pair is removed: the returned register holds the other
/// `n − 2` qubits in their original order, renormalized.
pub fn bell_measure<R: Rng + ?Sized>(
    state: &StateVector,
    q1: usize,
    q2: usize,
    rng: &mut R,
) -> Result<(BellOutcome, StateVector)> {
    if state.num_qubits < 2 {
        return Err(Error::IndexOutOfRange {
            index: q1.max(q2),
            num_qubits: state.num_qubits,
        });
    }
    let (outcome, residual, prob) = sample_bell(state, q1, q2, rng)?;
    if prob < DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateState { mass: prob });
    }
    let scale = 1.0 / prob.sqrt();
    Ok((
        outcome,
        StateVector {
            num_qubits: state.num_qubits - 2,
            amplitudes: residual.into_iter().map(|a| a * scale).collect(),
        },
    ))
}

/// Projects `(q1, q2)` onto one chosen Bell state and returns the
/// renormalized remainder, as if `outcome` had been observed.
pub fn bell_project(state: &StateVector, q1: usize, q2: usize, outcome: BellOutcome) -> Result<StateVector> {
    if state.num_qubits < 2 {
        return Err(Error::IndexOutOfRange {
            index: q1.max(q2),
            num_qubits: state.num_qubits,
        });
    }
    let branches = bell_branches(state, q1, q2)?;
    let k = BellOutcome::ALL.iter().position(|&o| o == outcome).unwrap_or(0);
    let residual = branches.into_iter().nth(k).unwrap_or_default();
    let mass: f64 = residual.iter().map(|a| a.norm_sqr()).sum();
    if mass < DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateState { mass });
    }
    let scale = 1.0 / mass.sqrt();
    Ok(StateVector {
        num_qubits: state.num_qubits - 2,
        amplitudes: residual.into_iter().map(|a| a * scale).collect(),
    })
}

/// Bell-basis measurement that leaves the collapsed pair in the register,
/// in the observed Bell state.
pub fn bell_measure_retain<R: Rng + ?Sized>(
    state: &StateVector,
    q1: usize,
    q2: usize,
    rng: &mut R,
) -> Result<(BellOutcome, StateVector)> {
    let (outcome, reduced) = bell_measure(state, q1, q2, rng)?;
    let (m1, m2) = (state.mask(q1), state.mask(q2));
    let bell = outcome.amplitudes();
    let mut out = vec![ZERO; state.amplitudes.len()];
    for (r, amp) in reduced.amplitudes.iter().enumerate() {
        let full = scatter_residual(state, m1, m2, r);
        for (pair_idx, c) in bell.iter().enumerate() {
            let mut i = full;
            if pair_idx & 2 != 0 {
                i |= m1;
            }
            if pair_idx & 1 != 0 {
                i |= m2;
            }
            out[i] = c * amp;
        }
    }
    Ok((
        outcome,
        StateVector {
            num_qubits: state.num_qubits,
            amplitudes: out,
        },
    ))
}

/// `|⟨a|b⟩|²`, clamped to `[0, 1]`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Amplitude {
        Complex64::new(re, im)
    }

    fn close(a: &StateVector, b: &[Amplitude]) -> bool {
        a.amplitudes().len() == b.len() && a.amplitudes().iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn message_qubit_examples() {
        assert!(close(&make_message_qubit(c(1.0, 0.0), ZERO).unwrap(), &[ONE, ZERO]));
        let plus = make_message_qubit(ONE, ONE).unwrap();
        assert!(close(&plus, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]));
        let q = make_message_qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        assert!(close(&q, &[c(0.6, 0.0), c(0.0, 0.8)]));
        assert!((q.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(make_message_qubit(ZERO, ZERO), Err(Error::ZeroVector));
    }

    #[test]
    fn bell_pairs() {
        let h = FRAC_1_SQRT_2;
        assert!(close(
            &make_bell_pair(BellOutcome::PhiPlus),
            &[c(h, 0.), ZERO, ZERO, c(h, 0.)]
        ));
        assert!(close(
            &make_bell_pair(BellOutcome::PsiMinus),
            &[ZERO, c(h, 0.), c(-h, 0.), ZERO]
        ));
        assert!(close(
            &make_bell_pair(BellOutcome::PhiMinus),
            &[c(h, 0.), ZERO, ZERO, c(-h, 0.)]
        ));
    }

    #[test]
    fn tensor_examples() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert!(close(&tensor(&zero, &one).unwrap(), &[ZERO, ONE, ZERO, ZERO]));
        let q = make_message_qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        assert_eq!(tensor(&StateVector::scalar(), &q).unwrap(), q);
        assert_eq!(tensor(&q, &StateVector::scalar()).unwrap(), q);

        let big = StateVector::basis(7, 0).unwrap();
        assert_eq!(
            tensor(&big, &big),
            Err(Error::CapacityExceeded { requested: 14, max: 12 })
        );
        assert!(tensor_with_limit(&big, &big, 14).is_ok());
    }

    #[test]
    fn joint_state_for_one_message_qubit() {
        // (α|0⟩ + β|1⟩) ⊗ φ⁺ = (α|000⟩ + α|011⟩ + β|100⟩ + β|111⟩)/√2
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let joint = tensor(
            &make_message_qubit(a, b).unwrap(),
            &make_bell_pair(BellOutcome::PhiPlus),
        )
        .unwrap();
        let h = FRAC_1_SQRT_2;
        let expected = [a * h, ZERO, ZERO, a * h, b * h, ZERO, ZERO, b * h];
        assert!(close(&joint, &expected));
    }

    #[test]
    fn gate_rejects_non_unitary() {
        let m = [[ONE, ONE], [ZERO, ONE]];
        assert!(matches!(SingleQubitGate::new(m), Err(Error::NonUnitary { .. })));
        let u3 = SingleQubitGate::new([[ZERO, ONE], [-ONE, ZERO]]).unwrap();
        assert!(u3.unitarity_deviation() < 1e-15);
    }

    #[test]
    fn apply_gate_targets_the_right_qubit() {
        let x = SingleQubitGate::real([[0.0, 1.0], [1.0, 0.0]]);
        let s = StateVector::basis(3, 0).unwrap();
        // qubit 0 is the most significant bit
        assert_eq!(apply_gate(&s, &x, 0).unwrap(), StateVector::basis(3, 0b100).unwrap());
        assert_eq!(apply_gate(&s, &x, 2).unwrap(), StateVector::basis(3, 0b001).unwrap());
        assert_eq!(
            apply_gate(&s, &x, 3),
            Err(Error::IndexOutOfRange {
                index: 3,
                num_qubits: 3
            })
        );
    }

    #[test]
    fn measure_eigenstate_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = StateVector::basis(1, 0).unwrap();
        for _ in 0..100 {
            let (bit, post) = measure_angle(&zero, 0, 0.0, &mut rng).unwrap();
            assert_eq!(bit, 0);
            assert_eq!(post, zero);
        }
        assert!(measure_angle(&zero, 1, 0.0, &mut rng).is_err());
        assert!(measure_angle(&zero, 0, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn analyzer_basis_is_orthonormal() {
        for theta in [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI, 1.234] {
            let v0 = analyzer_vector(theta, 0);
            let v1 = analyzer_vector(theta, 1);
            let dot: Amplitude = v0.iter().zip(&v1).map(|(a, b)| a.conj() * b).sum();
            assert!(dot.norm() < 1e-15);
        }
        // π/2 analyzer is the X basis.
        let plus = analyzer_state(FRAC_PI_2, 0);
        assert!(close(&plus, &[c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)]));
    }

    #[test]
    fn singlet_equal_angles_exact_anticorrelation() {
        // Exhaustive: P(same bits) computed from exact projector probabilities.
        let singlet = make_bell_pair(BellOutcome::PsiMinus);
        for k in 0..8 {
            let theta = k as f64 * PI / 4.0;
            let mut p_same = 0.0;
            for bit in 0..2u8 {
                let v = analyzer_vector(theta, bit);
                let amp: Amplitude = (0..4)
                    .map(|i| (v[i >> 1] * v[i & 1]).conj() * singlet.amplitudes()[i])
                    .sum();
                p_same += amp.norm_sqr();
            }
            assert!(p_same < 1e-15, "theta={theta} p_same={p_same}");
        }
        // And by sampling through measure_angle.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..8 {
            let theta = k as f64 * PI / 4.0;
            for _ in 0..50 {
                let (a, s) = measure_angle(&singlet, 0, theta, &mut rng).unwrap();
                let (b, _) = measure_angle(&s, 1, theta, &mut rng).unwrap();
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn bell_measure_on_bell_pair_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in BellOutcome::ALL {
            let pair = make_bell_pair(kind);
            let (outcome, rest) = bell_measure(&pair, 0, 1, &mut rng).unwrap();
            assert_eq!(outcome, kind);
            assert_eq!(rest.num_qubits(), 0);
            assert!((rest.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_measure_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let one = StateVector::basis(1, 0).unwrap();
        assert!(matches!(
            bell_measure(&one, 0, 1, &mut rng),
            Err(Error::IndexOutOfRange { .. })
        ));
        let three = StateVector::basis(3, 0).unwrap();
        assert_eq!(bell_measure(&three, 1, 1, &mut rng), Err(Error::RepeatedQubit(1)));
        assert!(matches!(
            bell_measure(&three, 0, 5, &mut rng),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn bell_measure_psi_plus_branch() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let joint = tensor(
            &make_message_qubit(a, b).unwrap(),
            &make_bell_pair(BellOutcome::PhiPlus),
        )
        .unwrap();
        let probs = bell_probabilities(&joint, 0, 1).unwrap();
        for p in probs {
            assert!((p - 0.25).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = false;
        for _ in 0..200 {
            let (outcome, bob) = bell_measure(&joint, 0, 1, &mut rng).unwrap();
            if outcome == BellOutcome::PsiPlus {
                let expected = StateVector::from_amplitudes(vec![b, a]).unwrap();
                assert!((fidelity(&bob, &expected).unwrap() - 1.0).abs() < 1e-12);
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn non_adjacent_pair_keeps_remaining_order() {
        // |0⟩ ⊗ φ⁻ ⊗ |1⟩ with the pair at positions (1, 2) of a 4-qubit register.
        let reg = tensor(
            &tensor(
                &StateVector::basis(1, 0).unwrap(),
                &make_bell_pair(BellOutcome::PhiMinus),
            )
            .unwrap(),
            &StateVector::basis(1, 1).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (outcome, rest) = bell_measure(&reg, 1, 2, &mut rng).unwrap();
        assert_eq!(outcome, BellOutcome::PhiMinus);
        assert!((fidelity(&rest, &StateVector::basis(2, 0b01).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        // Reversed pair order flips ψ⁻ sign only, so φ⁻ is still detected.
        let (outcome, _) = bell_measure(&reg, 2, 1, &mut rng).unwrap();
        assert_eq!(outcome, BellOutcome::PhiMinus);
    }

    #[test]
    fn retained_collapse_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let joint = tensor(
            &make_message_qubit(c(0.3, 0.1), c(-0.2, 0.9)).unwrap(),
            &make_bell_pair(BellOutcome::PhiPlus),
        )
        .unwrap();
        for _ in 0..50 {
            let (first, collapsed) = bell_measure_retain(&joint, 0, 1, &mut rng).unwrap();
            assert!((collapsed.norm_sqr() - 1.0).abs() < 1e-9);
            let probs = bell_probabilities(&collapsed, 0, 1).unwrap();
            let k = BellOutcome::ALL.iter().position(|&o| o == first).unwrap();
            assert!((probs[k] - 1.0).abs() < 1e-9);
            let (second, again) = bell_measure_retain(&collapsed, 0, 1, &mut rng).unwrap();
            assert_eq!(first, second);
            assert!((fidelity(&again, &collapsed).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_examples() {
        let psi = make_message_qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        assert!((fidelity(&psi, &psi).unwrap() - 1.0).abs() < 1e-12);
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        for gamma in [0.1, 1.0, 2.5, -3.0] {
            let phase = Complex64::from_polar(1.0, gamma);
            let rotated = StateVector::from_amplitudes(psi.amplitudes().iter().map(|a| a * phase).collect()).unwrap();
            assert!((fidelity(&psi, &rotated).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(
            fidelity(&zero, &StateVector::basis(2, 0).unwrap()),
            Err(Error::DimensionMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn measurement_statistics_on_plus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let plus = make_message_qubit(ONE, ONE).unwrap();
        let n = 10_000;
        let zeros = (0..n)
            .filter(|_| measure_angle(&plus, 0, 0.0, &mut rng).unwrap().0 == 0)
            .count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.02, "freq={freq}");
    }
}
