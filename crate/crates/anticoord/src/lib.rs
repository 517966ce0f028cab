//! Decentralized anti-coordination through multi-agent learning.
//!
//! `N` agents repeatedly compete for `C` non-overlapping channels in slotted
//! time. A public integer signal `k ∈ {0, …, K−1}` is drawn every slot; each
//! agent keeps a table mapping signal values to "stay quiet" or "transmit on
//! channel c" and adapts it from binary feedback only: transmitters learn
//! whether they collided, listeners learn whether the channel they monitored
//! was free. The update rule is simple — back off from a collision with some
//! probability, claim a free channel with probability one — yet the system
//! converges to a collision-free assignment per signal value, i.e. an
//! efficient correlated equilibrium whose fairness grows with `K`.
//!
//! The crate has three legs:
//!
//! * a slot-level simulator ([`game`], [`agent`], [`sim`]) with back-off
//!   variants, dynamic populations, and feedback/signal noise;
//! * exact Markov-chain analysis ([`markov`]) of the single-channel process,
//!   used as an independent oracle for the simulator;
//! * generic no-regret learners ([`baselines`]) and fairness/throughput
//!   metrics ([`metrics`]) for head-to-head comparisons, orchestrated by
//!   [`experiments`] which emits CSV.
//!
//! Start with the runnable programs under `examples/`; each one exercises a
//! single capability end to end. The `anticoord` binary wraps the same
//! machinery behind `run`, `presets`, and `verify` subcommands.

pub mod agent;
pub mod baselines;
pub mod experiments;
pub mod game;
pub mod markov;
pub mod metrics;
pub mod sim;
pub mod verify;

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scenario or shape parameter is out of its legal range.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A numeric parameter violates its precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A caller broke an API contract (inconsistent inputs).
    #[error("contract violation: {0}")]
    Contract(String),
    /// An input for which the requested quantity is undefined.
    #[error("undefined input: {0}")]
    Undefined(String),
    /// An iterative or linear solve failed to produce a usable answer.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// I/O failure, with the path that caused it.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
