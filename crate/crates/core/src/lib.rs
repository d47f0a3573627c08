//! Simulation of many-agent controlled teleportation.
//!
//! Alice teleports `m` message qubits to Bob through Bell pairs. Every Bell
//! measurement result is announced as a 2-bit code, shifted mod 4 by the
//! control bit of each agent. The control bits are established through an
//! entanglement-based QKD session ([`ekert91`]) or a single-photon secure
//! direct communication round ([`qsdc`]). Bob can only undo the shift, and
//! therefore only apply the right Pauli corrections, when every agent whose
//! bit is non-zero reveals it to him.
//!
//! Layering, bottom to top:
//!
//! * [`statevec`]: dense state vectors, gates, analyzer and Bell measurements.
//! * [`teleport`]: per-qubit teleportation and Bob's corrections.
//! * [`announce`]: outcome codes and mod-4 encryption with agent keys.
//! * [`ekert91`], [`qsdc`]: key establishment with eavesdropper models.
//! * [`netsim`]: end-to-end trials and aggregation.
//! * [`config`], [`report`]: JSON scenario input and report output.

pub mod adversary;
pub mod announce;
pub mod config;
pub mod ekert91;
pub mod error;
pub mod netsim;
pub mod qsdc;
pub mod report;
pub mod rng;
pub mod statevec;
pub mod teleport;

pub use error::{Error, Result};
pub use rng::SimRng;
