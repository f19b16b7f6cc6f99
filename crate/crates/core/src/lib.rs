//! Feasibility analysis and simulation of quantum networks whose classical
//! coordination runs over post-quantum cryptography.
//!
//! - [`timing`]: static feasibility checks of feedforward delay against
//!   memory coherence.
//! - [`fidelity`]: Werner-state decay and swapping.
//! - [`engine`]: seeded slotted Monte Carlo over a repeater chain.
//! - [`adversary`]: hybrid man-in-the-middle bound and QBER detector.
//! - [`kms`]: key-management handshake counts and re-key time.

pub mod adversary;
pub mod engine;
pub mod error;
pub mod fidelity;
pub mod kms;
pub mod model;
pub mod timing;

pub use adversary::{AdversaryConfig, AttackOutcome, DetectionReport};
pub use engine::{FailureReason, RunSummary, TrialOutcome};
pub use error::{Error, Result, Violation};
pub use fidelity::Fidelity;
pub use model::{CryptoProfile, Network, Protocol, Registry, ScenarioConfig};
pub use timing::{FeasibilityResult, HopTiming, TimingPlan};
