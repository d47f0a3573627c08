//! Classical side of the protocol: 2-bit outcome codes, mod-4 encryption
//! with agent control keys, and decryption with whatever keys Bob holds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::BellOutcome;
use crate::teleport::{correction_for, PauliCorrection};

/// A Bell outcome rendered as two classical bits, `00` to `11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeCode(u8);

impl OutcomeCode {
    pub fn new(value: u8) -> Result<Self> {
        if value < 4 {
            Ok(OutcomeCode(value))
        } else {
            Err(Error::InvalidCode(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn shifted(self, shift: u8) -> OutcomeCode {
        OutcomeCode((self.0 + shift % 4) % 4)
    }

    pub fn unshifted(self, shift: u8) -> OutcomeCode {
        OutcomeCode((self.0 + 4 - shift % 4) % 4)
    }

    pub fn outcome(self) -> BellOutcome {
        BellOutcome::ALL[self.0 as usize]
    }
}

impl fmt::Display for OutcomeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02b}", self.0)
    }
}

impl FromStr for OutcomeCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(OutcomeCode(0)),
            "01" => Ok(OutcomeCode(1)),
            "10" => Ok(OutcomeCode(2)),
            "11" => Ok(OutcomeCode(3)),
            _ => Err(Error::InvalidParameter(format!("outcome code {s:?}"))),
        }
    }
}

impl Serialize for OutcomeCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OutcomeCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// φ⁺, φ⁻, ψ⁺, ψ⁻ → `00`, `01`, `10`, `11`.
pub fn encode(outcome: BellOutcome) -> OutcomeCode {
    match outcome {
        BellOutcome::PhiPlus => OutcomeCode(0),
        BellOutcome::PhiMinus => OutcomeCode(1),
        BellOutcome::PsiPlus => OutcomeCode(2),
        BellOutcome::PsiMinus => OutcomeCode(3),
    }
}

/// How a control key is applied across the message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyMode {
    /// One bit per agent, added to every code.
    #[default]
    SingleBit,
    /// One bit per agent per message qubit.
    PerQubit,
}

impl KeyMode {
    pub fn key_len(self, m: usize) -> usize {
        match self {
            KeyMode::SingleBit => 1,
            KeyMode::PerQubit => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentKey {
    pub agent_id: String,
    pub bits: Vec<u8>,
}

impl AgentKey {
    pub fn new(agent_id: impl Into<String>, bits: Vec<u8>) -> Result<Self> {
        let agent_id = agent_id.into();
        if bits.is_empty() {
            return Err(Error::KeyLengthMismatch {
                agent: agent_id,
                len: 0,
                m: 0,
            });
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!("key bit {b} of agent {agent_id}")));
        }
        Ok(AgentKey { agent_id, bits })
    }

    pub fn single(agent_id: impl Into<String>, bit: u8) -> Result<Self> {
        Self::new(agent_id, vec![bit])
    }

    /// Bit applied at message position `j`.
    fn bit_at(&self, j: usize) -> u8 {
        if self.bits.len() == 1 {
            self.bits[0]
        } else {
            self.bits[j]
        }
    }

    pub fn rendered(&self) -> String {
        self.bits.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

/// The sequence of codes Alice broadcasts.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Announcement {
    pub codes: Vec<OutcomeCode>,
}

impl Announcement {
    pub fn new(codes: Vec<OutcomeCode>) -> Self {
        Announcement { codes }
    }

    pub fn from_outcomes(outcomes: impl IntoIterator<Item = BellOutcome>) -> Self {
        Announcement {
            codes: outcomes.into_iter().map(encode).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Space-separated 2-bit codes, e.g. `11 10 00`.
    pub fn rendered(&self) -> String {
        self.codes.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    }
}

impl FromStr for Announcement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Announcement {
            codes: s.split_whitespace().map(str::parse).collect::<Result<_>>()?,
        })
    }
}

/// Per-position shift `Σ_agents bit_j (mod 4)` for an `m`-code message.
pub fn shifts(keys: &[AgentKey], m: usize) -> Result<Vec<u8>> {
    for key in keys {
        let len = key.bits.len();
        if len != 1 && len != m {
            return Err(Error::KeyLengthMismatch {
                agent: key.agent_id.clone(),
                len,
                m,
            });
        }
    }
    Ok((0..m)
        .map(|j| keys.iter().fold(0u8, |acc, k| (acc + k.bit_at(j)) % 4))
        .collect())
}

pub fn encrypt(codes: &Announcement, keys: &[AgentKey]) -> Result<Announcement> {
    let shift = shifts(keys, codes.len())?;
    Ok(Announcement {
        codes: codes.codes.iter().zip(shift).map(|(c, s)| c.shifted(s)).collect(),
    })
}

/// Undoes the shift of `known_keys`; unrevealed keys count as zero.
pub fn decrypt(codes: &Announcement, known_keys: &[AgentKey]) -> Result<Announcement> {
    let shift = shifts(known_keys, codes.len())?;
    Ok(Announcement {
        codes: codes.codes.iter().zip(shift).map(|(c, s)| c.unshifted(s)).collect(),
    })
}

/// Shift left over after decrypting with `revealed` a message encrypted with
/// `all`, per position. Zero everywhere iff decryption is exact.
pub fn residual_shifts(all: &[AgentKey], revealed: &[AgentKey], m: usize) -> Result<Vec<u8>> {
    let total = shifts(all, m)?;
    let known = shifts(revealed, m)?;
    Ok(total.iter().zip(known).map(|(t, k)| (t + 4 - k) % 4).collect())
}

pub fn corrections_from(codes: &Announcement) -> Vec<PauliCorrection> {
    codes.codes.iter().map(|c| correction_for(c.outcome())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(s: &str) -> Announcement {
        s.parse().unwrap()
    }

    #[test]
    fn encoding_examples() {
        assert_eq!(encode(BellOutcome::PsiPlus).to_string(), "10");
        assert_eq!(encode(BellOutcome::PhiMinus).to_string(), "01");
        assert_eq!(encode(BellOutcome::PhiPlus).to_string(), "00");
        assert_eq!(encode(BellOutcome::PsiMinus).to_string(), "11");
    }

    #[test]
    fn encode_is_a_bijection() {
        let mut seen = [false; 4];
        for o in BellOutcome::ALL {
            let c = encode(o);
            assert!(!seen[c.value() as usize]);
            seen[c.value() as usize] = true;
            assert_eq!(c.outcome(), o);
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn single_key_shifts_every_code() {
        let charlie = AgentKey::single("Charlie", 1).unwrap();
        assert_eq!(encrypt(&ann("10 01 11"), &[charlie]).unwrap(), ann("11 10 00"));
        let zero = AgentKey::single("Dick", 0).unwrap();
        assert_eq!(encrypt(&ann("10 01 11"), &[zero]).unwrap(), ann("10 01 11"));
    }

    #[test]
    fn two_increments() {
        let keys = [AgentKey::single("a", 1).unwrap(), AgentKey::single("b", 1).unwrap()];
        assert_eq!(encrypt(&ann("11"), &keys).unwrap(), ann("01"));
    }

    #[test]
    fn two_increments_match_addition_table() {
        // Oracle: the explicit 4x4 table of (x + y) mod 4 on 2-bit strings.
        let table = [
            ["00", "01", "10", "11"],
            ["01", "10", "11", "00"],
            ["10", "11", "00", "01"],
            ["11", "00", "01", "10"],
        ];
        for x in 0..4u8 {
            for bits in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
                let keys = [
                    AgentKey::single("a", bits[0]).unwrap(),
                    AgentKey::single("b", bits[1]).unwrap(),
                ];
                let y = (bits[0] + bits[1]) as usize;
                let got = encrypt(&Announcement::new(vec![OutcomeCode(x)]), &keys).unwrap();
                assert_eq!(got.rendered(), table[x as usize][y]);
            }
        }
    }

    #[test]
    fn partial_decrypt_offsets_by_missing_sum() {
        // All 4 codes x all 4 shown shifts x all 4 hidden shifts.
        for code in 0..4u8 {
            for shown in 0..4u8 {
                for hidden in 0..4u8 {
                    let revealed: Vec<AgentKey> = (0..shown)
                        .map(|i| AgentKey::single(format!("r{i}"), 1).unwrap())
                        .collect();
                    let withheld: Vec<AgentKey> = (0..hidden)
                        .map(|i| AgentKey::single(format!("w{i}"), 1).unwrap())
                        .collect();
                    let all: Vec<AgentKey> = revealed.iter().chain(&withheld).cloned().collect();
                    let codes = Announcement::new(vec![OutcomeCode(code)]);
                    let out = decrypt(&encrypt(&codes, &all).unwrap(), &revealed).unwrap();
                    assert_eq!(out.codes[0].value(), (code + hidden) % 4);
                    assert_eq!(residual_shifts(&all, &revealed, 1).unwrap(), vec![hidden % 4]);
                }
            }
        }
    }

    #[test]
    fn revealing_key_recovers_codes() {
        let charlie = AgentKey::single("Charlie", 1).unwrap();
        assert_eq!(decrypt(&ann("11 10 00"), &[charlie]).unwrap(), ann("10 01 11"));
    }

    #[test]
    fn key_length_checked() {
        let bad = AgentKey::new("Eve", vec![1, 0]).unwrap();
        assert!(matches!(
            encrypt(&ann("00 00 00"), std::slice::from_ref(&bad)),
            Err(Error::KeyLengthMismatch { len: 2, m: 3, .. })
        ));
        assert!(decrypt(&ann("00 00 00"), &[bad]).is_err());
        assert!(AgentKey::new("x", vec![]).is_err());
        assert!(AgentKey::new("x", vec![2]).is_err());
    }

    #[test]
    fn per_qubit_keys() {
        let k = AgentKey::new("a", vec![1, 0, 1]).unwrap();
        assert_eq!(
            encrypt(&ann("00 00 11"), std::slice::from_ref(&k)).unwrap(),
            ann("01 00 00")
        );
        assert_eq!(decrypt(&ann("01 00 00"), &[k]).unwrap(), ann("00 00 11"));
    }

    #[test]
    fn corrections_examples() {
        assert_eq!(
            corrections_from(&ann("00 10 01 11")),
            vec![
                PauliCorrection::Identity,
                PauliCorrection::U1X,
                PauliCorrection::U2Z,
                PauliCorrection::U3
            ]
        );
    }

    #[test]
    fn four_colluding_ones_cancel() {
        let keys: Vec<AgentKey> = (0..4).map(|i| AgentKey::single(i.to_string(), 1).unwrap()).collect();
        assert_eq!(shifts(&keys, 2).unwrap(), vec![0, 0]);
        assert_eq!(residual_shifts(&keys, &[], 2).unwrap(), vec![0, 0]);
    }

    #[test]
    fn codes_parse_and_render() {
        assert!("1x".parse::<OutcomeCode>().is_err());
        assert_eq!(OutcomeCode::new(4), Err(Error::InvalidCode(4)));
        let json = serde_json::to_string(&ann("11 01")).unwrap();
        assert_eq!(json, r#"["11","01"]"#);
        assert_eq!(serde_json::from_str::<Announcement>(&json).unwrap(), ann("11 01"));
    }
}
