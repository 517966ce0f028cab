//! Fairness and throughput measures plus the statistical summaries used for
//! experiment reporting.
//!
//! The Jain index of a random variable `X` is `(E[X])^2 / E[X^2]`; for a
//! realized allocation it is `(sum x)^2 / (N sum x^2)`. Both are 1 exactly
//! when the allocation is perfectly even.

use crate::agent::StrategyTable;
use crate::game::GameShape;
use crate::{Error, Result};

/// How many signal values each agent ends up owning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationVector {
    pub wins: Vec<usize>,
}

impl AllocationVector {
    /// Snapshot the current per-agent cardinalities. In a converged state
    /// cardinality equals the number of signal values the agent owns.
    pub fn from_strategies(strategies: &[StrategyTable]) -> Self {
        Self {
            wins: strategies.iter().map(StrategyTable::cardinality).collect(),
        }
    }
}

/// A counting window for throughput: `successes` is the number of
/// (channel, slot) pairs that carried exactly one transmitter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ThroughputWindow {
    pub slots: u64,
    pub successes: u64,
}

impl ThroughputWindow {
    pub fn record_slot(&mut self, successful_channels: usize) {
        self.slots += 1;
        self.successes += successful_channels as u64;
    }
}

/// Jain index of the binomial win-count distribution `Binomial(K, C/N)`:
/// `CK / (CK + N - C)`.
pub fn jain_binomial(shape: &GameShape) -> f64 {
    let ck = (shape.n_channels() * shape.n_signals()) as f64;
    ck / (ck + (shape.n_agents() - shape.n_channels()) as f64)
}

/// Jain index of a realized allocation; 1 iff all entries are equal.
pub fn jain_allocation(alloc: &AllocationVector) -> Result<f64> {
    let n = alloc.wins.len();
    if n == 0 {
        return Err(Error::Undefined("empty allocation".into()));
    }
    let sum: f64 = alloc.wins.iter().map(|&w| w as f64).sum();
    let sum_sq: f64 = alloc.wins.iter().map(|&w| (w * w) as f64).sum();
    if sum_sq == 0.0 {
        return Err(Error::Undefined(
            "all-zero allocation has no Jain index".into(),
        ));
    }
    Ok(sum * sum / (n as f64 * sum_sq))
}

/// Smallest signal-space size `K` with `K > (1-eps)/eps * (N/C - 1)`, which
/// guarantees a binomial Jain index above `1 - eps`.
pub fn min_signals_for_fairness(epsilon: f64, n_agents: usize, n_channels: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon must lie strictly in (0,1), got {epsilon}"
        )));
    }
    if n_channels == 0 || n_channels > n_agents {
        return Err(Error::Parameter(format!(
            "channel count must be in 1..={n_agents}, got {n_channels}"
        )));
    }
    let threshold =
        (1.0 - epsilon) / epsilon * (n_agents as f64 / n_channels as f64 - 1.0);
    // Strictly above the threshold; nudge so a threshold that is an exact
    // integer in real arithmetic is not missed to representation error.
    let k = (threshold * (1.0 + 1e-12) + 1e-12).floor() as usize + 1;
    Ok(k.max(1))
}

/// Fraction of (channel, slot) pairs in the window that carried a
/// successful transmission.
pub fn throughput(window: &ThroughputWindow, shape: &GameShape) -> Result<f64> {
    if window.slots == 0 {
        return Err(Error::Undefined("zero-slot throughput window".into()));
    }
    Ok(window.successes as f64 / (shape.n_channels() as f64 * window.slots as f64))
}

/// Mean throughput of the last quarter of joiners divided by the first
/// quarter's. `join_order[0]` is the first agent to join. Infinite when only
/// the late joiners saw any traffic; undefined when neither group did.
pub fn group_fairness(per_agent_throughput: &[f64], join_order: &[usize]) -> Result<f64> {
    let n = per_agent_throughput.len();
    if n < 4 {
        return Err(Error::Parameter(format!(
            "group fairness needs at least 4 agents, got {n}"
        )));
    }
    if join_order.len() != n {
        return Err(Error::Contract(
            "join order length must match the agent count".into(),
        ));
    }
    let quarter = n.div_ceil(4);
    let mean_of = |agents: &[usize]| {
        agents.iter().map(|&a| per_agent_throughput[a]).sum::<f64>() / agents.len() as f64
    };
    let first = mean_of(&join_order[..quarter]);
    let last = mean_of(&join_order[n - quarter..]);
    if first == 0.0 && last == 0.0 {
        return Err(Error::Undefined(
            "both joiner groups have zero throughput".into(),
        ));
    }
    if first == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(last / first)
}

/// Sample mean and 95% normal-theory halfwidth `1.96 s / sqrt(n)`.
pub fn confidence_interval(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Parameter(format!(
            "confidence interval needs at least 2 samples, got {n}"
        )));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, 1.96 * var.sqrt() / (n as f64).sqrt()))
}
