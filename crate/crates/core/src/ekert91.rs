//! Entanglement-based key distribution between Alice and one agent.
//!
//! Each round distributes a singlet ψ⁻; Alice keeps qubit 0 and the agent
//! receives qubit 1 over the quantum channel, where Eve may intercept it.
//! Both sides measure at independently chosen analyzer angles. Rounds with
//! equal angles become key bits (perfectly anticorrelated without Eve);
//! four of the mismatched combinations estimate the CHSH quantity
//! `S = E(a1,b1) − E(a1,b3) + E(a3,b1) + E(a3,b3)`, which reaches
//! `−2√2` for an untouched singlet and stays within `[−2, 2]` for any
//! classical correlation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::EveModel;
use crate::error::{Error, Result};
use crate::statevec::{self, BellOutcome};

pub const ALICE_ANGLES: [f64; 3] = [0.0, FRAC_PI_4, FRAC_PI_2];
pub const AGENT_ANGLES: [f64; 3] = [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];

/// `(alice_angle, agent_angle, sign)` terms of S.
pub const CHSH_TERMS: [(f64, f64, f64); 4] = [
    (0.0, FRAC_PI_4, 1.0),
    (0.0, 3.0 * FRAC_PI_4, -1.0),
    (FRAC_PI_2, FRAC_PI_4, 1.0),
    (FRAC_PI_2, 3.0 * FRAC_PI_4, 1.0),
];

pub const DEFAULT_PAIRS: usize = 2000;
pub const DEFAULT_CHSH_THRESHOLD: f64 = 2.3;
pub const DEFAULT_RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct E91Config {
    pub pairs: usize,
    /// Sessions with `|S|` below this are treated as compromised.
    pub chsh_threshold: f64,
    /// Extra sessions attempted after a compromised or unusable one.
    pub retries: usize,
}

impl Default for E91Config {
    fn default() -> Self {
        E91Config {
            pairs: DEFAULT_PAIRS,
            chsh_threshold: DEFAULT_CHSH_THRESHOLD,
            retries: DEFAULT_RETRIES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRecord {
    pub alice_angle: f64,
    pub agent_angle: f64,
    pub alice_bit: u8,
    pub agent_bit: u8,
    pub eve_touched: bool,
    /// Eve's analyzer angle and reading, when she intercepted.
    pub eve_reading: Option<(f64, u8)>,
}

impl PairRecord {
    pub fn is_key_round(&self) -> bool {
        self.alice_angle == self.agent_angle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sifted {
    /// Alice's key bits.
    pub alice_key: Vec<u8>,
    /// The agent's reconciled bits (its readings inverted).
    pub agent_key: Vec<u8>,
    /// Fraction of positions where the two keys agree; `None` when empty.
    pub agreement: Option<f64>,
}

impl Sifted {
    pub fn qber(&self) -> Option<f64> {
        self.agreement.map(|a| 1.0 - a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct E91Session {
    pub records: Vec<PairRecord>,
    pub sifted: Sifted,
    /// `None` when some CHSH combination has no samples.
    pub chsh_s: Option<f64>,
    /// `counts[i][j]`: rounds with Alice at `ALICE_ANGLES[i]`, agent at `AGENT_ANGLES[j]`.
    pub counts: [[usize; 3]; 3],
}

impl E91Session {
    pub fn compromised(&self, chsh_threshold: f64) -> bool {
        self.chsh_s.is_none_or(|s| s.abs() < chsh_threshold)
    }

    pub fn sift_yield(&self) -> f64 {
        self.sifted.alice_key.len() as f64 / self.records.len() as f64
    }
}

pub fn run_session<R: Rng + ?Sized>(num_pairs: usize, eve: &EveModel, rng: &mut R) -> Result<E91Session> {
    if num_pairs == 0 {
        return Err(Error::InvalidParameter(
            "an Ekert91 session needs at least one pair".into(),
        ));
    }
    eve.validate()?;
    let singlet = statevec::make_bell_pair(BellOutcome::PsiMinus);

    let mut records = Vec::with_capacity(num_pairs);
    let mut counts = [[0usize; 3]; 3];
    for _ in 0..num_pairs {
        let a_idx = rng.random_range(0..3);
        let b_idx = rng.random_range(0..3);
        counts[a_idx][b_idx] += 1;

        let mut state = singlet.clone();
        let mut eve_reading = None;
        if let Some(angle) = eve.intercept(rng) {
            let (bit, collapsed) = statevec::measure_angle(&state, 1, angle, rng)?;
            state = collapsed;
            eve_reading = Some((angle, bit));
        }
        let (alice_bit, state) = statevec::measure_angle(&state, 0, ALICE_ANGLES[a_idx], rng)?;
        let (agent_bit, _) = statevec::measure_angle(&state, 1, AGENT_ANGLES[b_idx], rng)?;

        records.push(PairRecord {
            alice_angle: ALICE_ANGLES[a_idx],
            agent_angle: AGENT_ANGLES[b_idx],
            alice_bit,
            agent_bit,
            eve_touched: eve_reading.is_some(),
            eve_reading,
        });
    }

    let sifted = sift(&records);
    let chsh_s = chsh(&records).ok();
    Ok(E91Session {
        records,
        sifted,
        chsh_s,
        counts,
    })
}

/// Keeps equal-angle rounds. The agent inverts its readings to undo the
/// singlet anticorrelation.
pub fn sift(records: &[PairRecord]) -> Sifted {
    let (alice_key, agent_key): (Vec<u8>, Vec<u8>) = records
        .iter()
        .filter(|r| r.is_key_round())
        .map(|r| (r.alice_bit, 1 - r.agent_bit))
        .unzip();
    let agreement = (!alice_key.is_empty()).then(|| {
        let agree = alice_key.iter().zip(&agent_key).filter(|(a, b)| a == b).count();
        agree as f64 / alice_key.len() as f64
    });
    Sifted {
        alice_key,
        agent_key,
        agreement,
    }
}

/// Correlation `E(a, b)`: mean of `(−1)^alice_bit · (−1)^agent_bit`.
pub fn correlation(records: &[PairRecord], alice_angle: f64, agent_angle: f64) -> Option<f64> {
    let (n, sum) = records
        .iter()
        .filter(|r| r.alice_angle == alice_angle && r.agent_angle == agent_angle)
        .fold((0usize, 0i64), |(n, sum), r| {
            (n + 1, sum + if r.alice_bit == r.agent_bit { 1 } else { -1 })
        });
    (n > 0).then(|| sum as f64 / n as f64)
}

pub fn chsh(records: &[PairRecord]) -> Result<f64> {
    CHSH_TERMS.iter().try_fold(0.0, |s, &(a, b, sign)| {
        correlation(records, a, b)
            .map(|e| s + sign * e)
            .ok_or(Error::InsufficientSamples {
                alice_angle: a,
                agent_angle: b,
            })
    })
}

/// Report-level view of the session that produced an agent's key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E91Summary {
    pub pairs: usize,
    pub sifted_len: usize,
    pub agreement: Option<f64>,
    #[serde(rename = "S")]
    pub chsh_s: Option<f64>,
    pub compromised: bool,
    /// Sessions run, including the one summarized.
    pub attempts: usize,
    /// Earlier sessions that were discarded as compromised.
    pub compromised_sessions: usize,
}

impl E91Summary {
    pub fn of(session: &E91Session, chsh_threshold: f64) -> Self {
        E91Summary {
            pairs: session.records.len(),
            sifted_len: session.sifted.alice_key.len(),
            agreement: session.sifted.agreement,
            chsh_s: session.chsh_s,
            compromised: session.compromised(chsh_threshold),
            attempts: 1,
            compromised_sessions: 0,
        }
    }
}

/// Key bits held by each side after a successful session.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedBits {
    pub alice_bits: Vec<u8>,
    pub agent_bits: Vec<u8>,
}

/// Runs sessions until one passes the CHSH check and yields at least
/// `key_len` sifted bits. The control key is the first `key_len` bits.
pub fn establish_key<R: Rng + ?Sized>(
    agent_id: &str,
    key_len: usize,
    config: &E91Config,
    eve: &EveModel,
    rng: &mut R,
) -> Result<(SharedBits, E91Summary)> {
    let attempts = config.retries + 1;
    let mut compromised_sessions = 0;
    for attempt in 1..=attempts {
        let session = run_session(config.pairs, eve, rng)?;
        if session.compromised(config.chsh_threshold) {
            compromised_sessions += 1;
            continue;
        }
        if session.sifted.alice_key.len() < key_len {
            continue;
        }
        let mut summary = E91Summary::of(&session, config.chsh_threshold);
        summary.attempts = attempt;
        summary.compromised_sessions = compromised_sessions;
        let bits = SharedBits {
            alice_bits: session.sifted.alice_key[..key_len].to_vec(),
            agent_bits: session.sifted.agent_key[..key_len].to_vec(),
        };
        return Ok((bits, summary));
    }
    Err(Error::RetriesExhausted {
        agent: agent_id.to_string(),
        attempts,
    })
}
