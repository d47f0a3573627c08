//! Eavesdropper on a quantum channel.

use std::f64::consts::FRAC_PI_2;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Z and X analyzer directions (Bloch angles 0 and π/2).
pub const CONJUGATE_BASES: [f64; 2] = [0.0, FRAC_PI_2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveStrategy {
    #[default]
    None,
    /// Measure the flying qubit at a guessed analyzer angle and forward the
    /// collapsed eigenstate.
    InterceptResend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EveModel {
    #[serde(default)]
    pub strategy: EveStrategy,
    /// Analyzer angles Eve picks from uniformly. `None` means
    /// [`CONJUGATE_BASES`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_set: Option<Vec<f64>>,
    #[serde(default = "full_probability")]
    pub intercept_probability: f64,
}

fn full_probability() -> f64 {
    1.0
}

impl Default for EveModel {
    fn default() -> Self {
        EveModel::none()
    }
}

impl EveModel {
    pub fn none() -> Self {
        EveModel {
            strategy: EveStrategy::None,
            basis_set: None,
            intercept_probability: 1.0,
        }
    }

    pub fn intercept_resend(probability: f64) -> Self {
        EveModel {
            strategy: EveStrategy::InterceptResend,
            basis_set: None,
            intercept_probability: probability,
        }
    }

    pub fn with_basis_set(mut self, angles: &[f64]) -> Self {
        self.basis_set = Some(angles.to_vec());
        self
    }

    pub fn is_active(&self) -> bool {
        self.strategy == EveStrategy::InterceptResend && self.intercept_probability > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.intercept_probability;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "intercept_probability {p} outside [0, 1]"
            )));
        }
        if let Some(set) = &self.basis_set {
            if set.is_empty() {
                return Err(Error::InvalidParameter("basis_set is empty".into()));
            }
            if set.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidParameter("basis_set has a non-finite angle".into()));
            }
        }
        Ok(())
    }

    /// Decides whether Eve grabs the next qubit; if so returns her analyzer
    /// angle. Draws nothing when Eve is inactive.
    pub fn intercept<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        if !self.is_active() {
            return None;
        }
        if rng.random::<f64>() >= self.intercept_probability {
            return None;
        }
        let set = self.basis_set.as_deref().unwrap_or(&CONJUGATE_BASES);
        set.choose(rng).copied()
    }
}
