//! Two-agent worked example: Charlie holds key `1`, Dick holds key `0`.

use std::fmt::Write as _;

use num_complex::Complex64;
use qct_core::announce::{self, AgentKey, Announcement};
use qct_core::statevec::{self, BellOutcome};
use qct_core::teleport::{self, MessageQubitSpec};

pub const OUTCOMES: [BellOutcome; 3] = [BellOutcome::PsiPlus, BellOutcome::PhiMinus, BellOutcome::PsiMinus];

#[derive(Debug, Clone, PartialEq)]
pub struct DemoTranscript {
    pub outcomes: Vec<BellOutcome>,
    pub encoded: Announcement,
    pub after_charlie: Announcement,
    pub after_dick: Announcement,
    pub decoded_both: Announcement,
    pub decoded_dick_only: Announcement,
    /// Per-qubit fidelity when both agents reveal their keys.
    pub fidelity_both: Vec<f64>,
    /// Per-qubit fidelity when Charlie withholds.
    pub fidelity_dick_only: Vec<f64>,
}

fn message_specs() -> Vec<MessageQubitSpec> {
    let c = Complex64::new;
    [
        (c(0.6, 0.0), c(0.0, 0.8)),
        (c(1.0, 0.0), c(1.0, 0.0)),
        (c(0.3, -0.2), c(-0.5, 0.7)),
    ]
    .into_iter()
    .map(|(a, b)| MessageQubitSpec::new(a, b).expect("nonzero amplitudes"))
    .collect()
}

fn fidelities(specs: &[MessageQubitSpec], decoded: &Announcement) -> qct_core::Result<Vec<f64>> {
    specs
        .iter()
        .zip(OUTCOMES)
        .zip(announce::corrections_from(decoded))
        .map(|((spec, outcome), correction)| {
            let record = teleport::teleport_branch(spec, outcome)?;
            statevec::fidelity(&teleport::apply_correction(&record, correction), &spec.state())
        })
        .collect()
}

pub fn run_demo() -> qct_core::Result<DemoTranscript> {
    let charlie = AgentKey::single("Charlie", 1)?;
    let dick = AgentKey::single("Dick", 0)?;

    let encoded = Announcement::from_outcomes(OUTCOMES);
    let after_charlie = announce::encrypt(&encoded, std::slice::from_ref(&charlie))?;
    let after_dick = announce::encrypt(&after_charlie, std::slice::from_ref(&dick))?;
    let decoded_both = announce::decrypt(&after_dick, &[charlie, dick.clone()])?;
    let decoded_dick_only = announce::decrypt(&after_dick, &[dick])?;

    let specs = message_specs();
    Ok(DemoTranscript {
        outcomes: OUTCOMES.to_vec(),
        fidelity_both: fidelities(&specs, &decoded_both)?,
        fidelity_dick_only: fidelities(&specs, &decoded_dick_only)?,
        encoded,
        after_charlie,
        after_dick,
        decoded_both,
        decoded_dick_only,
    })
}

fn list(values: &[f64]) -> String {
    values.iter().map(|f| format!("{f:.6}")).collect::<Vec<_>>().join(" ")
}

impl DemoTranscript {
    pub fn render(&self) -> String {
        let symbols: Vec<&str> = self.outcomes.iter().map(|o| o.symbol()).collect();
        let rows = [
            ("Alice's Bell outcomes", symbols.join(" ")),
            ("encoded", self.encoded.rendered()),
            ("after Charlie's key '1'", self.after_charlie.rendered()),
            ("after Dick's key '0' (announced)", self.after_dick.rendered()),
            ("Bob with both keys", self.decoded_both.rendered()),
            ("  fidelities", list(&self.fidelity_both)),
            ("Bob with Dick's key only", self.decoded_dick_only.rendered()),
            ("  fidelities", list(&self.fidelity_dick_only)),
        ];
        let mut out = String::new();
        for (label, value) in rows {
            let _ = writeln!(out, "{:<34}{value}", format!("{label}:"));
        }
        out
    }
}
