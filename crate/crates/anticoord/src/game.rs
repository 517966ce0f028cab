//! One slot of the channel allocation game: collision resolution, binary
//! feedback, the public coordination signal, and noise on both.
//!
//! Channels are numbered `1..=C`; `0` always means "quiet" in strategy
//! tables, so a table entry can be used directly as a channel id.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::StrategyTable;
use crate::{Error, Result};

/// Problem size: `N` agents, `C` channels, `K` signal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameShape {
    n_agents: usize,
    n_channels: usize,
    n_signals: usize,
}

impl GameShape {
    /// Requires `1 <= C <= N` and `K >= 1`.
    pub fn new(n_agents: usize, n_channels: usize, n_signals: usize) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::Config("need at least one agent".into()));
        }
        if n_channels == 0 || n_channels > n_agents {
            return Err(Error::Config(format!(
                "channel count must be in 1..={n_agents}, got {n_channels}"
            )));
        }
        if n_signals == 0 {
            return Err(Error::Config("need at least one signal value".into()));
        }
        Ok(Self {
            n_agents,
            n_channels,
            n_signals,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_signals(&self) -> usize {
        self.n_signals
    }
}

/// What one agent does in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentAction {
    /// Transmit on the given channel (`1..=C`).
    Transmit(usize),
    /// Stay quiet and listen to the given channel (`1..=C`).
    Monitor(usize),
}

impl AgentAction {
    pub fn channel(&self) -> usize {
        match *self {
            AgentAction::Transmit(c) | AgentAction::Monitor(c) => c,
        }
    }
}

/// The binary feedback an agent receives after acting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    TxSuccess,
    TxCollision,
    ChannelFree,
    ChannelBusy,
}

impl Observation {
    /// The opposite observation within the transmit or monitor pair.
    pub fn flipped(self) -> Self {
        match self {
            Observation::TxSuccess => Observation::TxCollision,
            Observation::TxCollision => Observation::TxSuccess,
            Observation::ChannelFree => Observation::ChannelBusy,
            Observation::ChannelBusy => Observation::ChannelFree,
        }
    }
}

/// Resolved state of one slot: who transmitted where, and what everyone
/// truly observed (before any feedback noise).
#[derive(Debug, Clone, Default)]
pub struct SlotOutcome {
    /// Index `c-1` holds the agents that transmitted on channel `c`.
    pub transmitters_per_channel: Vec<Vec<usize>>,
    /// True observation per agent, same order as the action slice.
    pub observations: Vec<Observation>,
}

impl SlotOutcome {
    /// Channels carrying exactly one transmitter this slot.
    pub fn successful_channels(&self) -> usize {
        self.transmitters_per_channel
            .iter()
            .filter(|t| t.len() == 1)
            .count()
    }
}

/// Error probabilities: `p_feedback` flips an observation within its pair,
/// `p_signal` makes an agent read a wrong coordination signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p_feedback: f64,
    pub p_signal: f64,
}

impl NoiseParams {
    pub const NONE: NoiseParams = NoiseParams {
        p_feedback: 0.0,
        p_signal: 0.0,
    };

    pub fn new(p_feedback: f64, p_signal: f64) -> Result<Self> {
        for (name, p) in [("p_feedback", p_feedback), ("p_signal", p_signal)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0,1], got {p}")));
            }
        }
        Ok(Self {
            p_feedback,
            p_signal,
        })
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_feedback == 0.0 && self.p_signal == 0.0
    }
}

/// Support of the false signal an agent reads when signal noise fires.
///
/// The full-support reading means the effective error rate is
/// `p_signal * (K-1)/K` because the draw may coincide with the true value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalNoiseModel {
    /// False signal drawn uniformly from all of `{0, …, K−1}`.
    #[default]
    FullSupport,
    /// False signal drawn uniformly from the K−1 values other than the truth.
    ExcludeTrue,
}

/// How the public signal evolves across slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalMode {
    /// Fresh uniform draw every slot.
    #[default]
    Iid,
    /// Deterministic cycle 0, 1, …, K−1, 0, …
    RoundRobin,
}

/// Resolve one slot: group transmitters by channel and derive every agent's
/// true observation.
///
/// A transmitter succeeds iff it is alone on its channel; a monitor sees the
/// channel free iff nobody transmitted there.
pub fn resolve_slot(actions: &[AgentAction], shape: &GameShape) -> Result<SlotOutcome> {
    let mut outcome = SlotOutcome::default();
    resolve_slot_into(actions, shape, &mut outcome)?;
    Ok(outcome)
}

/// Same as [`resolve_slot`] but reuses the buffers of `out`.
pub fn resolve_slot_into(
    actions: &[AgentAction],
    shape: &GameShape,
    out: &mut SlotOutcome,
) -> Result<()> {
    let c = shape.n_channels();
    out.transmitters_per_channel.resize(c, Vec::new());
    for t in &mut out.transmitters_per_channel {
        t.clear();
    }
    out.observations.clear();

    for (agent, action) in actions.iter().enumerate() {
        let ch = action.channel();
        if ch == 0 || ch > c {
            return Err(Error::Config(format!(
                "agent {agent} uses channel {ch}, outside 1..={c}"
            )));
        }
        if let AgentAction::Transmit(_) = action {
            out.transmitters_per_channel[ch - 1].push(agent);
        }
    }

    out.observations.extend(actions.iter().map(|action| {
        let busy = out.transmitters_per_channel[action.channel() - 1].len();
        match action {
            AgentAction::Transmit(_) => {
                if busy == 1 {
                    Observation::TxSuccess
                } else {
                    Observation::TxCollision
                }
            }
            AgentAction::Monitor(_) => {
                if busy == 0 {
                    Observation::ChannelFree
                } else {
                    Observation::ChannelBusy
                }
            }
        }
    }));
    Ok(())
}

/// With probability `p_feedback`, report the opposite observation.
pub fn apply_feedback_noise<R: Rng + ?Sized>(
    obs: Observation,
    noise: &NoiseParams,
    rng: &mut R,
) -> Observation {
    if noise.p_feedback > 0.0 && rng.gen_bool(noise.p_feedback) {
        obs.flipped()
    } else {
        obs
    }
}

/// Draw the public signal for one slot, uniform over `{0, …, K−1}`.
pub fn draw_signal<R: Rng + ?Sized>(shape: &GameShape, rng: &mut R) -> usize {
    if shape.n_signals() == 1 {
        0
    } else {
        rng.gen_range(0..shape.n_signals())
    }
}

/// What one agent reads off the signal channel: the truth with probability
/// `1 − p_signal`, otherwise a uniform draw per `model`.
pub fn perturb_signal<R: Rng + ?Sized>(
    true_signal: usize,
    shape: &GameShape,
    noise: &NoiseParams,
    model: SignalNoiseModel,
    rng: &mut R,
) -> usize {
    let k = shape.n_signals();
    if noise.p_signal == 0.0 || k == 1 || !rng.gen_bool(noise.p_signal) {
        return true_signal;
    }
    match model {
        SignalNoiseModel::FullSupport => rng.gen_range(0..k),
        SignalNoiseModel::ExcludeTrue => {
            let draw = rng.gen_range(0..k - 1);
            if draw >= true_signal {
                draw + 1
            } else {
                draw
            }
        }
    }
}

/// Exact convergence test: for every signal value and every channel there is
/// exactly one agent transmitting there. This is the absorbing state of the
/// learning dynamics — no collisions happen and no monitored channel is ever
/// free, so no table entry can change again.
///
/// This is a simulator-side inspection; agents themselves never see it.
pub fn is_converged(strategies: &[StrategyTable], shape: &GameShape) -> bool {
    let k = shape.n_signals();
    let c = shape.n_channels();
    let mut owners = vec![0usize; c];
    for signal in 0..k {
        owners.iter_mut().for_each(|o| *o = 0);
        for table in strategies {
            let entry = table.entry(signal);
            if entry > 0 {
                owners[entry - 1] += 1;
            }
        }
        if owners.iter().any(|&o| o != 1) {
            return false;
        }
    }
    true
}
