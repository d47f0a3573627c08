//! Built-in checks run by `qct selftest`.

use qct_core::announce::{self, AgentKey, Announcement, OutcomeCode};
use qct_core::ekert91::CHSH_TERMS;
use qct_core::statevec::{self, BellOutcome};
use qct_core::teleport::{self, MessageQubitSpec};
use qct_core::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn round_trip() -> Check {
    let mut rng = SimRng::from_seed(1);
    let mut worst: f64 = 1.0;
    for _ in 0..200 {
        let spec = MessageQubitSpec::haar(&mut rng);
        for outcome in BellOutcome::ALL {
            let f = teleport::teleport_branch(&spec, outcome)
                .and_then(|rec| {
                    statevec::fidelity(
                        &teleport::apply_correction(&rec, teleport::correction_for(outcome)),
                        &spec.state(),
                    )
                })
                .unwrap_or(0.0);
            worst = worst.min(f);
        }
    }
    Check {
        name: "round-trip identity",
        passed: (worst - 1.0).abs() < 1e-9,
        detail: format!("minimum fidelity {worst:.12}"),
    }
}

fn encryption_table() -> Check {
    // 'c' + 'k' as written out in the protocol description.
    const TABLE: [(&str, u8, &str); 8] = [
        ("00", 0, "00"),
        ("01", 0, "01"),
        ("10", 0, "10"),
        ("11", 0, "11"),
        ("00", 1, "01"),
        ("01", 1, "10"),
        ("10", 1, "11"),
        ("11", 1, "00"),
    ];
    let mismatches: Vec<String> = TABLE
        .iter()
        .filter_map(|&(code, key, want)| {
            let codes = Announcement::new(vec![code.parse::<OutcomeCode>().ok()?]);
            let key = AgentKey::single("k", key).ok()?;
            let got = announce::encrypt(&codes, &[key]).ok()?.rendered();
            (got != want).then(|| format!("{code}+{got}"))
        })
        .collect();
    Check {
        name: "encryption table",
        passed: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            "8/8 rules".into()
        } else {
            format!("mismatches: {}", mismatches.join(", "))
        },
    }
}

/// `S` from exact outcome probabilities of the singlet at each CHSH setting.
fn chsh_ideal() -> Check {
    let singlet = statevec::make_bell_pair(BellOutcome::PsiMinus);
    let mut s = 0.0;
    for &(a, b, sign) in &CHSH_TERMS {
        let mut e = 0.0;
        for x in 0..2u8 {
            for y in 0..2u8 {
                let alice = statevec::analyzer_vector(a, x);
                let agent = statevec::analyzer_vector(b, y);
                let amp: num_complex::Complex64 = (0..4)
                    .map(|i| (alice[i >> 1] * agent[i & 1]).conj() * singlet.amplitudes()[i])
                    .sum();
                e += if x == y { 1.0 } else { -1.0 } * amp.norm_sqr();
            }
        }
        s += sign * e;
    }
    let want = -2.0 * 2f64.sqrt();
    Check {
        name: "CHSH ideal value",
        passed: (s - want).abs() < 1e-9,
        detail: format!("S = {s:.12}"),
    }
}

pub fn run_selftest() -> Vec<Check> {
    vec![round_trip(), encryption_table(), chsh_ideal()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for check in run_selftest() {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }
}
