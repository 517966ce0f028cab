//! The learning agent: a per-signal strategy table, action selection, and
//! the collision back-off variants.
//!
//! An agent's whole state is its table `f: {0..K-1} -> {0} ∪ {1..C}` where 0
//! means quiet. The update rule touches only the entry for the signal the
//! agent observed this slot:
//!
//! * transmission succeeded — keep the entry;
//! * collision — clear the entry with the scheme's back-off probability;
//! * monitored channel free — claim it (probability one);
//! * monitored channel busy — keep the entry.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game::{AgentAction, GameShape, Observation};
use crate::{Error, Result};

/// Which expression the exponential back-off scheme uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentialForm {
    /// `p = mu * (1 - card/K)` — decreasing in cardinality.
    Literal,
    /// `p = mu ^ (1 - card/K)` — increasing in cardinality.
    #[default]
    Exponent,
}

/// Collision back-off rule. `card` below is the number of signal values the
/// agent currently transmits for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BackoffScheme {
    /// Back off with the same probability `p` regardless of cardinality.
    Constant { p: f64 },
    /// Back off with probability `card / K`.
    Linear,
    /// Back off with a `mu`-parameterized function of `card / K`.
    Exponential { mu: f64, form: ExponentialForm },
    /// Oracle rule: among the colliders, the one with the lowest cardinality
    /// keeps its claim and everyone else backs off with probability one.
    /// Resolved globally by the simulator, not per agent.
    WorstAgentLast,
}

impl BackoffScheme {
    /// Validate the scheme's parameter ranges.
    pub fn validate(&self) -> Result<()> {
        match *self {
            BackoffScheme::Constant { p } if !(p > 0.0 && p < 1.0) => Err(Error::Config(format!(
                "constant back-off probability must lie strictly in (0,1), got {p}"
            ))),
            BackoffScheme::Exponential { mu, .. } if !(mu > 0.0 && mu < 1.0) => Err(Error::Config(
                format!("exponential back-off mu must lie strictly in (0,1), got {mu}"),
            )),
            _ => Ok(()),
        }
    }
}

impl Default for BackoffScheme {
    /// Constant back-off with `p = 1/2`.
    fn default() -> Self {
        BackoffScheme::Constant { p: 0.5 }
    }
}

/// How a (re)joining agent fills its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// A uniformly random channel for every signal value; never quiet.
    RandomChannel,
    /// Same as [`InitMode::RandomChannel`]: an agent that transmits in every
    /// slot. Kept separate so scenario configs can say what they mean.
    Greedy,
    /// For every signal value, transmit on a uniform channel with probability
    /// `C / known_population`, otherwise stay quiet.
    Polite { known_population: usize },
}

/// Back-off probability for a strategy of cardinality `card` under `scheme`.
///
/// `WorstAgentLast` has no per-agent probability; callers must resolve the
/// collision globally through [`resolve_worst_agent_last`].
pub fn backoff_probability(scheme: &BackoffScheme, card: usize, shape: &GameShape) -> Result<f64> {
    let k = shape.n_signals() as f64;
    match *scheme {
        BackoffScheme::Constant { p } => Ok(p),
        BackoffScheme::Linear => Ok(card as f64 / k),
        BackoffScheme::Exponential { mu, form } => {
            let frac = 1.0 - card as f64 / k;
            Ok(match form {
                ExponentialForm::Literal => mu * frac,
                ExponentialForm::Exponent => mu.powf(frac),
            })
        }
        BackoffScheme::WorstAgentLast => Err(Error::Contract(
            "worst-agent-last is resolved globally, not per agent".into(),
        )),
    }
}

/// Pick who backs off in a collision under the worst-agent-last rule: one
/// agent with minimal cardinality survives (ties broken uniformly), all
/// other colliders are returned and must clear their entry.
pub fn resolve_worst_agent_last<R: Rng + ?Sized>(
    colliders: &[(usize, usize)],
    rng: &mut R,
) -> Result<Vec<usize>> {
    if colliders.len() < 2 {
        return Err(Error::Contract(format!(
            "worst-agent-last needs at least 2 colliders, got {}",
            colliders.len()
        )));
    }
    let min_card = colliders.iter().map(|&(_, card)| card).min().unwrap();
    let tied = colliders.iter().filter(|&&(_, c)| c == min_card).count();
    let mut pick = rng.gen_range(0..tied);
    let mut survivor = usize::MAX;
    for &(agent, card) in colliders {
        if card == min_card {
            if pick == 0 {
                survivor = agent;
                break;
            }
            pick -= 1;
        }
    }
    Ok(colliders
        .iter()
        .map(|&(agent, _)| agent)
        .filter(|&agent| agent != survivor)
        .collect())
}

/// An agent's strategy: one entry per signal value, `0` = quiet, `c >= 1` =
/// transmit on channel `c`. Tracks its own cardinality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyTable {
    entries: Vec<usize>,
    nonzero: usize,
}

impl StrategyTable {
    /// Build a table per `mode`.
    pub fn init<R: Rng + ?Sized>(mode: InitMode, shape: &GameShape, rng: &mut R) -> Self {
        let c = shape.n_channels();
        let k = shape.n_signals();
        let uniform_channel = |rng: &mut R| if c == 1 { 1 } else { rng.gen_range(1..=c) };
        let entries: Vec<usize> = match mode {
            InitMode::RandomChannel | InitMode::Greedy => {
                (0..k).map(|_| uniform_channel(rng)).collect()
            }
            InitMode::Polite { known_population } => {
                let p_transmit = (c as f64 / known_population.max(1) as f64).min(1.0);
                (0..k)
                    .map(|_| {
                        if rng.gen_bool(p_transmit) {
                            uniform_channel(rng)
                        } else {
                            0
                        }
                    })
                    .collect()
            }
        };
        Self::from_entries(entries)
    }

    /// Wrap raw entries; values must already be in `0..=C`.
    pub fn from_entries(entries: Vec<usize>) -> Self {
        let nonzero = entries.iter().filter(|&&e| e != 0).count();
        Self { entries, nonzero }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn entry(&self, signal: usize) -> usize {
        self.entries[signal]
    }

    pub fn set_entry(&mut self, signal: usize, value: usize) {
        let old = self.entries[signal];
        self.nonzero = self.nonzero + (value != 0) as usize - (old != 0) as usize;
        self.entries[signal] = value;
    }

    /// Number of signal values this strategy transmits for.
    pub fn cardinality(&self) -> usize {
        self.nonzero
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Act on the observed signal: transmit on the table's channel, or
    /// monitor a uniformly random channel when the entry says quiet.
    pub fn choose_action<R: Rng + ?Sized>(
        &self,
        observed_signal: usize,
        shape: &GameShape,
        rng: &mut R,
    ) -> AgentAction {
        match self.entry(observed_signal) {
            0 => {
                let c = shape.n_channels();
                AgentAction::Monitor(if c == 1 { 1 } else { rng.gen_range(1..=c) })
            }
            channel => AgentAction::Transmit(channel),
        }
    }

    /// Apply the per-agent learning update for one slot. Only the entry at
    /// `signal` can change.
    ///
    /// Fails when the observation does not match the action kind, or when
    /// the scheme is `WorstAgentLast` and a collision must be resolved (the
    /// simulator owns that case).
    pub fn apply_update<R: Rng + ?Sized>(
        &mut self,
        signal: usize,
        action: &AgentAction,
        obs: Observation,
        scheme: &BackoffScheme,
        shape: &GameShape,
        rng: &mut R,
    ) -> Result<()> {
        match (action, obs) {
            (AgentAction::Transmit(_), Observation::TxSuccess) => Ok(()),
            (AgentAction::Transmit(_), Observation::TxCollision) => {
                let p = backoff_probability(scheme, self.cardinality(), shape)?;
                if p > 0.0 && rng.gen_bool(p.min(1.0)) {
                    self.set_entry(signal, 0);
                }
                Ok(())
            }
            (AgentAction::Monitor(channel), Observation::ChannelFree) => {
                self.set_entry(signal, *channel);
                Ok(())
            }
            (AgentAction::Monitor(_), Observation::ChannelBusy) => Ok(()),
            (action, obs) => Err(Error::Contract(format!(
                "observation {obs:?} cannot follow action {action:?}"
            ))),
        }
    }
}
