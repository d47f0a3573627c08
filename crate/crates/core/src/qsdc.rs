//! Two-leg single-photon secure direct communication, used by an agent to
//! hand its control bits straight to Alice.
//!
//! 1. Alice prepares a batch of photons, each in one of `|0⟩, |1⟩, |+⟩, |−⟩`,
//!    and sends them to the agent (Eve may intercept this leg).
//! 2. Forward check: the agent measures a random subset in random bases;
//!    Alice reveals the preparations and they compare the rounds where the
//!    bases coincide.
//! 3. The agent encodes each remaining photon with `Pass` (bit 0) or `Flip`
//!    (`u3`, bit 1) and sends it back. A random subset carries known sample
//!    bits for the backward check; the message rides on other positions.
//! 4. Alice measures every returned photon in its preparation basis. A
//!    changed reading decodes as 1.

use std::f64::consts::FRAC_PI_2;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::EveModel;
use crate::error::{Error, Result};
use crate::statevec::{self, StateVector};
use crate::teleport::PauliCorrection;

pub const DEFAULT_BATCH: usize = 512;
pub const DEFAULT_CHECK_FRACTION: f64 = 0.25;
pub const DEFAULT_QBER_THRESHOLD: f64 = 0.05;
pub const DEFAULT_RETRIES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    /// Analyzer angle of this basis.
    pub fn angle(self) -> f64 {
        match self {
            Basis::Z => 0.0,
            Basis::X => FRAC_PI_2,
        }
    }

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Basis {
        if rng.random::<bool>() {
            Basis::X
        } else {
            Basis::Z
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhotonPrep {
    pub basis: Basis,
    pub bit: u8,
}

impl PhotonPrep {
    /// Z: bit 0 = |0⟩, bit 1 = |1⟩. X: bit 0 = |+⟩, bit 1 = |−⟩ (up to sign).
    pub fn state(self) -> StateVector {
        statevec::analyzer_state(self.basis.angle(), self.bit)
    }

    pub const ALL: [PhotonPrep; 4] = [
        PhotonPrep {
            basis: Basis::Z,
            bit: 0,
        },
        PhotonPrep {
            basis: Basis::Z,
            bit: 1,
        },
        PhotonPrep {
            basis: Basis::X,
            bit: 0,
        },
        PhotonPrep {
            basis: Basis::X,
            bit: 1,
        },
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodeOp {
    Pass,
    /// `|0⟩⟨1| − |1⟩⟨0|`: flips the state within both the Z and X bases.
    Flip,
}

impl EncodeOp {
    pub fn for_bit(bit: u8) -> EncodeOp {
        if bit == 0 {
            EncodeOp::Pass
        } else {
            EncodeOp::Flip
        }
    }

    pub fn apply(self, photon: &StateVector) -> Result<StateVector> {
        match self {
            EncodeOp::Pass => Ok(photon.clone()),
            EncodeOp::Flip => statevec::apply_gate(photon, &PauliCorrection::U3.gate(), 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QsdcConfig {
    pub batch: usize,
    pub check_fraction: f64,
    /// A check round whose error rate exceeds this marks the session compromised.
    pub qber_threshold: f64,
    pub retries: usize,
}

impl Default for QsdcConfig {
    fn default() -> Self {
        QsdcConfig {
            batch: DEFAULT_BATCH,
            check_fraction: DEFAULT_CHECK_FRACTION,
            qber_threshold: DEFAULT_QBER_THRESHOLD,
            retries: DEFAULT_RETRIES,
        }
    }
}

impl QsdcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.check_fraction > 0.0 && self.check_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "check_fraction {} outside (0, 1)",
                self.check_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.qber_threshold) {
            return Err(Error::InvalidParameter(format!(
                "qber_threshold {} outside [0, 1]",
                self.qber_threshold
            )));
        }
        Ok(())
    }
}

/// How a batch is split between check rounds and the message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchLayout {
    pub forward_checks: usize,
    pub backward_checks: usize,
    pub message: usize,
}

impl BatchLayout {
    /// `round(f·N)` forward checks; of the `R` photons left,
    /// `max(1, round(f·R))` backward checks; the message needs the rest.
    pub fn plan(batch: usize, check_fraction: f64, message_len: usize) -> Result<Self> {
        let forward_checks = ((batch as f64 * check_fraction).round() as usize).min(batch);
        let remaining = batch - forward_checks;
        let backward_checks = ((remaining as f64 * check_fraction).round() as usize).max(1);
        let needed = message_len + backward_checks;
        if forward_checks == 0 || remaining < needed {
            return Err(Error::BatchTooSmall {
                batch,
                forward_checks,
                needed,
            });
        }
        Ok(BatchLayout {
            forward_checks,
            backward_checks,
            message: message_len,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QsdcSession {
    pub batch_size: usize,
    pub check_fraction: f64,
    pub layout: BatchLayout,
    /// Forward check rounds where the agent's basis matched the preparation.
    pub forward_conclusive: usize,
    pub qber_forward: f64,
    pub qber_backward: f64,
    pub decoded_bits: Vec<u8>,
    pub compromised: bool,
}

fn error_rate(errors: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        errors as f64 / total as f64
    }
}

/// One session with the default compromise threshold.
pub fn run_session<R: Rng + ?Sized>(
    message_bits: &[u8],
    batch_size: usize,
    check_fraction: f64,
    eve: &EveModel,
    rng: &mut R,
) -> Result<QsdcSession> {
    let config = QsdcConfig {
        batch: batch_size,
        check_fraction,
        ..QsdcConfig::default()
    };
    run_session_with(message_bits, &config, eve, rng)
}

pub fn run_session_with<R: Rng + ?Sized>(
    message_bits: &[u8],
    config: &QsdcConfig,
    eve: &EveModel,
    rng: &mut R,
) -> Result<QsdcSession> {
    config.validate()?;
    eve.validate()?;
    if message_bits.iter().any(|&b| b > 1) {
        return Err(Error::InvalidParameter("message bits must be 0 or 1".into()));
    }
    let batch = config.batch;
    let layout = BatchLayout::plan(batch, config.check_fraction, message_bits.len())?;

    // Alice's preparations, then the forward leg.
    let preps: Vec<PhotonPrep> = (0..batch)
        .map(|_| PhotonPrep {
            basis: Basis::random(rng),
            bit: rng.random_range(0..2),
        })
        .collect();
    let mut photons = Vec::with_capacity(batch);
    for prep in &preps {
        let mut photon = prep.state();
        if let Some(angle) = eve.intercept(rng) {
            photon = statevec::measure_angle(&photon, 0, angle, rng)?.1;
        }
        photons.push(photon);
    }

    // Forward check.
    let order = index::sample(rng, batch, batch).into_vec();
    let (forward_idx, rest) = order.split_at(layout.forward_checks);
    let (mut conclusive, mut forward_errors) = (0usize, 0usize);
    for &i in forward_idx {
        let basis = Basis::random(rng);
        let (bit, _) = statevec::measure_angle(&photons[i], 0, basis.angle(), rng)?;
        if basis == preps[i].basis {
            conclusive += 1;
            forward_errors += usize::from(bit != preps[i].bit);
        }
    }

    // Encoding and return leg. `rest` is already in random order.
    let (message_idx, rest) = rest.split_at(layout.message);
    let backward_idx = &rest[..layout.backward_checks];
    let sample_bits: Vec<u8> = (0..layout.backward_checks).map(|_| rng.random_range(0..2)).collect();

    let mut alice_reads = |i: usize, bit: u8| -> Result<u8> {
        let encoded = EncodeOp::for_bit(bit).apply(&photons[i])?;
        let (reading, _) = statevec::measure_angle(&encoded, 0, preps[i].basis.angle(), rng)?;
        Ok(u8::from(reading != preps[i].bit))
    };
    let decoded_bits = message_idx
        .iter()
        .zip(message_bits)
        .map(|(&i, &bit)| alice_reads(i, bit))
        .collect::<Result<Vec<u8>>>()?;
    let mut backward_errors = 0;
    for (&i, &bit) in backward_idx.iter().zip(&sample_bits) {
        backward_errors += usize::from(alice_reads(i, bit)? != bit);
    }

    let qber_forward = error_rate(forward_errors, conclusive);
    let qber_backward = error_rate(backward_errors, layout.backward_checks);
    Ok(QsdcSession {
        batch_size: batch,
        check_fraction: config.check_fraction,
        layout,
        forward_conclusive: conclusive,
        qber_forward,
        qber_backward,
        decoded_bits,
        compromised: qber_forward > config.qber_threshold || qber_backward > config.qber_threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsdcSummary {
    pub batch: usize,
    pub qber_forward: f64,
    pub qber_backward: f64,
    pub compromised: bool,
    pub attempts: usize,
    pub compromised_sessions: usize,
}

/// Sends `bits` to Alice, retrying with a fresh batch while sessions come
/// back compromised. Returns the bits Alice decoded.
pub fn deliver_bits<R: Rng + ?Sized>(
    agent_id: &str,
    bits: &[u8],
    config: &QsdcConfig,
    eve: &EveModel,
    rng: &mut R,
) -> Result<(Vec<u8>, QsdcSummary)> {
    let attempts = config.retries + 1;
    for attempt in 1..=attempts {
        let session = run_session_with(bits, config, eve, rng)?;
        if session.compromised {
            continue;
        }
        let summary = QsdcSummary {
            batch: session.batch_size,
            qber_forward: session.qber_forward,
            qber_backward: session.qber_backward,
            compromised: false,
            attempts: attempt,
            compromised_sessions: attempt - 1,
        };
        return Ok((session.decoded_bits, summary));
    }
    Err(Error::RetriesExhausted {
        agent: agent_id.to_string(),
        attempts,
    })
}

/// Single control bit over QSDC: `(bit Alice received, summary)`.
pub fn control_bit_via_qsdc<R: Rng + ?Sized>(
    agent_id: &str,
    bit: u8,
    config: &QsdcConfig,
    eve: &EveModel,
    rng: &mut R,
) -> Result<(u8, QsdcSummary)> {
    let (decoded, summary) = deliver_bits(agent_id, &[bit], config, eve, rng)?;
    Ok((decoded[0], summary))
}
