//! End-to-end trials: key establishment per agent, teleportation, the
//! encrypted public announcement, and Bob's reconstruction from whatever
//! keys the collaborating agents reveal.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::EveModel;
use crate::announce::{self, AgentKey, Announcement, KeyMode};
use crate::config::ConfigError;
use crate::ekert91::{self, E91Config, E91Summary};
use crate::error::{Error, Result};
use crate::qsdc::{self, QsdcConfig, QsdcSummary};
use crate::rng::{trial_seed, SimRng};
use crate::statevec;
use crate::teleport::{self, MessageQubitSpec, DEFAULT_MAX_MESSAGE_QUBITS};

/// Fidelity counted as an exact reconstruction.
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Ekert91,
    Qsdc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    pub protocol: Protocol,
}

impl AgentSpec {
    pub fn new(id: impl Into<String>, protocol: Protocol) -> Self {
        AgentSpec {
            id: id.into(),
            protocol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    #[default]
    HaarRandom,
    /// `[alpha.re, alpha.im, beta.re, beta.im]` per message qubit.
    Fixed(Vec<[f64; 4]>),
}

/// Eavesdroppers per channel.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EveConfig {
    /// On the flying half of every Ekert91 pair.
    pub ekert_forward: EveModel,
    /// On the Alice → agent leg of every QSDC batch.
    pub qsdc_forward: EveModel,
    /// Eve keeps a copy of everything on the public classical channel.
    pub classical_tap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub m: usize,
    pub agents: Vec<AgentSpec>,
    pub collaborators: Vec<String>,
    pub key_mode: KeyMode,
    pub trials: usize,
    pub master_seed: u64,
    pub input_mode: InputMode,
    pub eve: EveConfig,
    pub ekert: E91Config,
    pub qsdc: QsdcConfig,
}

impl ScenarioConfig {
    /// `m` Haar-random qubits, the given agents, all of them collaborating,
    /// one trial, seed 0, no Eve.
    pub fn new(m: usize, agents: Vec<AgentSpec>) -> Self {
        let collaborators = agents.iter().map(|a| a.id.clone()).collect();
        ScenarioConfig {
            m,
            agents,
            collaborators,
            key_mode: KeyMode::default(),
            trials: 1,
            master_seed: 0,
            input_mode: InputMode::default(),
            eve: EveConfig::default(),
            ekert: E91Config::default(),
            qsdc: QsdcConfig::default(),
        }
    }

    /// Checks every invariant; the error names the offending field.
    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        let fail = |field: &str, message: String| {
            Err(ConfigError::Validation {
                field: field.to_string(),
                message,
            })
        };
        if self.m == 0 || self.m > DEFAULT_MAX_MESSAGE_QUBITS {
            return fail(
                "m",
                format!("must be in 1..={DEFAULT_MAX_MESSAGE_QUBITS}, got {}", self.m),
            );
        }
        if self.trials == 0 {
            return fail("trials", "must be at least 1".into());
        }
        for (i, agent) in self.agents.iter().enumerate() {
            if agent.id.is_empty() {
                return fail(&format!("agents[{i}].id"), "must not be empty".into());
            }
            if self.agents[..i].iter().any(|a| a.id == agent.id) {
                return fail(&format!("agents[{i}].id"), format!("duplicate agent id {:?}", agent.id));
            }
        }
        for (i, c) in self.collaborators.iter().enumerate() {
            if !self.agents.iter().any(|a| &a.id == c) {
                return fail(&format!("collaborators[{i}]"), format!("unknown agent id {c:?}"));
            }
            if self.collaborators[..i].contains(c) {
                return fail(&format!("collaborators[{i}]"), format!("duplicate collaborator {c:?}"));
            }
        }
        if let InputMode::Fixed(list) = &self.input_mode {
            if list.len() != self.m {
                return fail(
                    "input_mode.fixed",
                    format!("has {} entries, expected m = {}", list.len(), self.m),
                );
            }
            if let Some(i) = list.iter().position(|q| fixed_spec(q).is_err()) {
                return fail(
                    &format!("input_mode.fixed[{i}]"),
                    "must be finite and not all zero".into(),
                );
            }
        }
        if let Err(e) = self.eve.ekert_forward.validate() {
            return fail("eve.ekert_forward", e.to_string());
        }
        if let Err(e) = self.eve.qsdc_forward.validate() {
            return fail("eve.qsdc_forward", e.to_string());
        }
        if self.ekert.pairs == 0 {
            return fail("ekert.pairs", "must be at least 1".into());
        }
        if !(self.ekert.chsh_threshold.is_finite() && self.ekert.chsh_threshold >= 0.0) {
            return fail("ekert.chsh_threshold", "must be a non-negative number".into());
        }
        if let Err(e) = self.qsdc.validate() {
            return fail("qsdc", e.to_string());
        }
        let key_len = self.key_mode.key_len(self.m);
        if self.agents.iter().any(|a| a.protocol == Protocol::Qsdc) {
            if let Err(e) = qsdc::BatchLayout::plan(self.qsdc.batch, self.qsdc.check_fraction, key_len) {
                return fail("qsdc.batch", e.to_string());
            }
        }
        Ok(())
    }

    fn specs<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<MessageQubitSpec>> {
        match &self.input_mode {
            InputMode::HaarRandom => Ok((0..self.m).map(|_| MessageQubitSpec::haar(rng)).collect()),
            InputMode::Fixed(list) => list.iter().map(fixed_spec).collect(),
        }
    }
}

fn fixed_spec(q: &[f64; 4]) -> Result<MessageQubitSpec> {
    MessageQubitSpec::new(
        num_complex::Complex64::new(q[0], q[1]),
        num_complex::Complex64::new(q[2], q[3]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum KeySummary {
    Ekert91(E91Summary),
    Qsdc(QsdcSummary),
}

impl KeySummary {
    pub fn compromised_sessions(&self) -> usize {
        match self {
            KeySummary::Ekert91(s) => s.compromised_sessions,
            KeySummary::Qsdc(s) => s.compromised_sessions,
        }
    }

    pub fn chsh_s(&self) -> Option<f64> {
        match self {
            KeySummary::Ekert91(s) => s.chsh_s,
            KeySummary::Qsdc(_) => None,
        }
    }

    /// Sifted-key error rate for Ekert91, worse check round for QSDC.
    pub fn qber(&self) -> Option<f64> {
        match self {
            KeySummary::Ekert91(s) => s.agreement.map(|a| 1.0 - a),
            KeySummary::Qsdc(s) => Some(s.qber_forward.max(s.qber_backward)),
        }
    }
}

/// One agent's control key as held by Alice and by the agent.
///
/// The two copies agree unless an undetected eavesdropper corrupted the
/// session that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EstablishedKey {
    pub agent_id: String,
    pub alice_key: AgentKey,
    pub agent_key: AgentKey,
    pub summary: KeySummary,
}

/// Runs each agent's subprotocol in configuration order. Each agent draws
/// from its own fork of `rng`.
pub fn establish_keys(config: &ScenarioConfig, rng: &mut SimRng) -> Result<Vec<EstablishedKey>> {
    let key_len = config.key_mode.key_len(config.m);
    config
        .agents
        .iter()
        .map(|agent| {
            let mut agent_rng = rng.fork();
            let id = agent.id.as_str();
            let (alice_bits, agent_bits, summary) = match agent.protocol {
                Protocol::Ekert91 => {
                    let (bits, summary) =
                        ekert91::establish_key(id, key_len, &config.ekert, &config.eve.ekert_forward, &mut agent_rng)?;
                    (bits.alice_bits, bits.agent_bits, KeySummary::Ekert91(summary))
                }
                Protocol::Qsdc => {
                    let sent: Vec<u8> = (0..key_len).map(|_| agent_rng.random_range(0..2)).collect();
                    let (received, summary) =
                        qsdc::deliver_bits(id, &sent, &config.qsdc, &config.eve.qsdc_forward, &mut agent_rng)?;
                    (received, sent, KeySummary::Qsdc(summary))
                }
            };
            Ok(EstablishedKey {
                agent_id: agent.id.clone(),
                alice_key: AgentKey::new(id, alice_bits)?,
                agent_key: AgentKey::new(id, agent_bits)?,
                summary,
            })
        })
        .collect()
}

/// Public broadcast log: everyone, Eve included, reads it; nobody can alter
/// or remove an entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassicalChannel {
    log: Vec<Broadcast>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Broadcast {
    Announcement { from: String, codes: Announcement },
}

impl ClassicalChannel {
    pub fn broadcast(&mut self, message: Broadcast) {
        self.log.push(message);
    }

    pub fn log(&self) -> &[Broadcast] {
        &self.log
    }

    pub fn latest_announcement(&self) -> Option<&Announcement> {
        self.log
            .iter()
            .rev()
            .map(|Broadcast::Announcement { codes, .. }| codes)
            .next()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentKeyReport {
    pub agent_id: String,
    pub collaborated: bool,
    pub alice_bits: String,
    pub agent_bits: String,
    pub establishment: KeySummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial_index: u64,
    pub seed: u64,
    pub fidelities: Vec<f64>,
    pub mean_fidelity: f64,
    pub true_codes: Announcement,
    pub announced_codes: Announcement,
    pub decoded_codes: Announcement,
    /// Per-position shift Bob removed using the revealed keys.
    pub revealed_shift: Vec<u8>,
    /// Per-position offset between Bob's decoded codes and the true codes.
    pub residual_shift: Vec<u8>,
    pub agents: Vec<AgentKeyReport>,
    pub compromised_sessions: usize,
}

impl TrialReport {
    pub fn exact(&self) -> bool {
        self.fidelities.iter().all(|&f| f >= 1.0 - EXACT_TOLERANCE)
    }

    pub fn chsh_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.agents.iter().filter_map(|a| a.establishment.chsh_s())
    }

    pub fn qber_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.agents.iter().filter_map(|a| a.establishment.qber())
    }
}

/// Everything a trial produced, including the classical channel log, for
/// callers that want more than the report.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub report: TrialReport,
    pub channel: ClassicalChannel,
    /// Eve's copy of the public channel, when tapping.
    pub eve_transcript: Option<Vec<Broadcast>>,
}

pub fn run_trial(config: &ScenarioConfig, trial_index: u64) -> Result<TrialReport> {
    Ok(run_trial_detailed(config, trial_index)?.report)
}

pub fn run_trial_detailed(config: &ScenarioConfig, trial_index: u64) -> Result<TrialRun> {
    config.validate().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let seed = trial_seed(config.master_seed, trial_index);
    let mut rng = SimRng::from_seed(seed);
    let mut key_rng = rng.fork();
    let mut input_rng = rng.fork();
    let mut teleport_rng = rng.fork();

    let keys = establish_keys(config, &mut key_rng)?;
    let specs = config.specs(&mut input_rng)?;
    let records = teleport::teleport_batch(&specs, &mut teleport_rng)?;

    let true_codes = Announcement::from_outcomes(records.iter().map(|r| r.outcome));
    let alice_keys: Vec<AgentKey> = keys.iter().map(|k| k.alice_key.clone()).collect();
    let mut channel = ClassicalChannel::default();
    channel.broadcast(Broadcast::Announcement {
        from: "Alice".into(),
        codes: announce::encrypt(&true_codes, &alice_keys)?,
    });
    let eve_transcript = config.eve.classical_tap.then(|| channel.log().to_vec());

    // Collaborators reveal their own copy of the key to Bob in private.
    let collaborates = |id: &str| config.collaborators.iter().any(|c| c == id);
    let revealed: Vec<AgentKey> = keys
        .iter()
        .filter(|k| collaborates(&k.agent_id))
        .map(|k| k.agent_key.clone())
        .collect();

    let announced = channel.latest_announcement().cloned().unwrap_or_default();
    let decoded = announce::decrypt(&announced, &revealed)?;
    let corrections = announce::corrections_from(&decoded);
    let fidelities = records
        .iter()
        .zip(&corrections)
        .map(|(rec, &c)| statevec::fidelity(&teleport::apply_correction(rec, c), &rec.reference.state()))
        .collect::<Result<Vec<f64>>>()?;

    let residual_shift = decoded
        .codes
        .iter()
        .zip(&true_codes.codes)
        .map(|(d, t)| (d.value() + 4 - t.value()) % 4)
        .collect();
    let report = TrialReport {
        trial_index,
        seed,
        mean_fidelity: fidelities.iter().sum::<f64>() / fidelities.len() as f64,
        fidelities,
        true_codes,
        announced_codes: announced,
        decoded_codes: decoded,
        revealed_shift: announce::shifts(&revealed, config.m)?,
        residual_shift,
        compromised_sessions: keys.iter().map(|k| k.summary.compromised_sessions()).sum(),
        agents: keys
            .into_iter()
            .map(|k| AgentKeyReport {
                collaborated: collaborates(&k.agent_id),
                alice_bits: k.alice_key.rendered(),
                agent_bits: k.agent_key.rendered(),
                agent_id: k.agent_id,
                establishment: k.summary,
            })
            .collect(),
    };
    Ok(TrialRun {
        report,
        channel,
        eve_transcript,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    /// Sample statistics in iteration order; `None` for no values.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Stat> {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Stat {
            count: values.len(),
            mean,
            stddev: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub trials: usize,
    pub qubits: usize,
    /// Per-qubit fidelity over all trials.
    pub fidelity: Stat,
    /// Trials where every qubit was reconstructed exactly.
    pub exact_trials: usize,
    /// Trials with a non-zero residual shift somewhere.
    pub corrupted_trials: usize,
    /// CHSH value of every Ekert91 session that produced a key.
    pub chsh: Option<Stat>,
    /// Error rate of every key-producing session.
    pub qber: Option<Stat>,
    pub compromised_sessions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub aggregate: AggregateStats,
    pub trials: Vec<TrialReport>,
}

/// Aggregates trial reports. Sums run in trial-index order, so the result
/// does not depend on the order trials finished in.
pub fn aggregate(reports: &[TrialReport]) -> Option<AggregateStats> {
    let fidelity = Stat::of(reports.iter().flat_map(|r| r.fidelities.iter().copied()))?;
    Some(AggregateStats {
        trials: reports.len(),
        qubits: fidelity.count,
        fidelity,
        exact_trials: reports.iter().filter(|r| r.exact()).count(),
        corrupted_trials: reports
            .iter()
            .filter(|r| r.residual_shift.iter().any(|&s| s != 0))
            .count(),
        chsh: Stat::of(reports.iter().flat_map(|r| r.chsh_values())),
        qber: Stat::of(reports.iter().flat_map(|r| r.qber_values())),
        compromised_sessions: reports.iter().map(|r| r.compromised_sessions).sum(),
    })
}

/// Runs all trials in parallel. Returns the error of the lowest-indexed
/// failing trial, if any.
pub fn run_trials(config: &ScenarioConfig) -> Result<AggregateReport> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let results: Vec<Result<TrialReport>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect();
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(&trials).expect("at least one trial with m >= 1 qubits");
    Ok(AggregateReport { aggregate, trials })
}
