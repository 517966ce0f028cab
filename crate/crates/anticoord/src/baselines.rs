//! Generic no-regret learners for the one-shot channel game, used as
//! comparison baselines: regret matching and polynomial weights lifted to
//! low internal regret by running one weight vector per action and combining
//! their proposals through a stationary distribution.
//!
//! Baseline agents observe the full action profile each round (the table
//! learner never gets that), so counterfactual payoffs are computable
//! exactly. Actions are indices in `0..=C`: `0` is quiet, `a >= 1` is
//! "transmit on channel a".

use rand::Rng;

use crate::{Error, Result};

/// Action index for staying quiet.
pub const QUIET: usize = 0;

/// Payoff model: transmitting alone pays 1, colliding costs `collision_cost`,
/// staying quiet pays 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGamePayoff {
    pub collision_cost: f64,
}

impl ChannelGamePayoff {
    pub fn new(collision_cost: f64) -> Result<Self> {
        if collision_cost < 0.0 {
            return Err(Error::Parameter(format!(
                "collision cost must be nonnegative, got {collision_cost}"
            )));
        }
        Ok(Self { collision_cost })
    }

    /// Map a payoff in `[-c, 1]` to a loss in `[0, 1]`.
    pub fn loss(&self, payoff: f64) -> f64 {
        (1.0 - payoff) / (1.0 + self.collision_cost)
    }
}

impl Default for ChannelGamePayoff {
    fn default() -> Self {
        Self { collision_cost: 1.0 }
    }
}

/// Per-agent payoffs for one action profile (`profile[i]` in `0..=C`).
pub fn payoff(profile: &[usize], n_channels: usize, cost: &ChannelGamePayoff) -> Vec<f64> {
    let mut per_channel = vec![0usize; n_channels + 1];
    for &action in profile {
        per_channel[action] += 1;
    }
    profile
        .iter()
        .map(|&action| {
            if action == QUIET {
                0.0
            } else if per_channel[action] == 1 {
                1.0
            } else {
                -cost.collision_cost
            }
        })
        .collect()
}

/// Payoff agent `agent` would have received for each of its `C+1` actions,
/// holding everyone else's realized action fixed.
pub fn counterfactual_payoffs(
    profile: &[usize],
    agent: usize,
    n_channels: usize,
    cost: &ChannelGamePayoff,
) -> Vec<f64> {
    let mut others = vec![0usize; n_channels + 1];
    for (i, &action) in profile.iter().enumerate() {
        if i != agent {
            others[action] += 1;
        }
    }
    (0..=n_channels)
        .map(|action| {
            if action == QUIET {
                0.0
            } else if others[action] == 0 {
                1.0
            } else {
                -cost.collision_cost
            }
        })
        .collect()
}

/// Default inertia for regret matching: comfortably above the largest total
/// switching mass `C * (1 + c)` that average regrets can generate.
pub fn default_inertia(n_channels: usize, cost: &ChannelGamePayoff) -> f64 {
    2.0 * (n_channels + 1) as f64 * (1.0 + cost.collision_cost)
}

/// Internal-regret bookkeeping for one regret-matching agent: cumulative
/// payoff differences for every ordered action pair.
#[derive(Debug, Clone)]
pub struct RegretState {
    /// `pair_sums[a * n_actions + b]` accumulates `u(b) - u(a)` over the
    /// rounds in which `a` was played.
    pair_sums: Vec<f64>,
    n_actions: usize,
    rounds: u64,
    last_action: usize,
}

impl RegretState {
    pub fn new(n_channels: usize) -> Self {
        let n_actions = n_channels + 1;
        Self {
            pair_sums: vec![0.0; n_actions * n_actions],
            n_actions,
            rounds: 0,
            last_action: QUIET,
        }
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn last_action(&self) -> usize {
        self.last_action
    }

    /// Average regret of having played `a` instead of `b`, over all rounds.
    pub fn average_regret(&self, a: usize, b: usize) -> f64 {
        if self.rounds == 0 {
            0.0
        } else {
            self.pair_sums[a * self.n_actions + b] / self.rounds as f64
        }
    }

    /// The probability distribution regret matching plays this round: the
    /// first round is uniform; afterwards each alternative to the previous
    /// action gets `max(0, average regret) / inertia` and the remaining mass
    /// stays on the previous action. The switching mass must total at most
    /// one, which any inertia above `(n_actions - 1)` times the largest
    /// possible per-pair average regret guarantees (see [`default_inertia`]).
    pub fn step_distribution(&self, inertia: f64) -> Result<Vec<f64>> {
        let n = self.n_actions;
        if self.rounds == 0 {
            return Ok(vec![1.0 / n as f64; n]);
        }
        if inertia <= 0.0 {
            return Err(Error::Parameter(format!(
                "inertia must be positive, got {inertia}"
            )));
        }
        let a = self.last_action;
        let mut dist = vec![0.0; n];
        let mut switched = 0.0;
        for (b, d) in dist.iter_mut().enumerate() {
            if b != a {
                *d = self.average_regret(a, b).max(0.0) / inertia;
                switched += *d;
            }
        }
        if switched > 1.0 {
            return Err(Error::Parameter(format!(
                "inertia {inertia} too small for the accumulated regrets: switching mass \
                 {switched:.3} exceeds 1; it must exceed the action count minus one times \
                 the largest possible per-pair average regret"
            )));
        }
        dist[a] = 1.0 - switched;
        Ok(dist)
    }

    /// Sample this round's action and remember it.
    pub fn step<R: Rng + ?Sized>(&mut self, inertia: f64, rng: &mut R) -> Result<usize> {
        let dist = self.step_distribution(inertia)?;
        let action = sample_index(&dist, rng);
        self.last_action = action;
        Ok(action)
    }

    /// Record the realized round: `cf[b]` is the payoff the agent would have
    /// received for action `b` against the others' realized play.
    pub fn observe(&mut self, played: usize, cf: &[f64]) {
        debug_assert_eq!(cf.len(), self.n_actions);
        let realized = cf[played];
        for (b, &u) in cf.iter().enumerate() {
            self.pair_sums[played * self.n_actions + b] += u - realized;
        }
        self.rounds += 1;
        self.last_action = played;
    }
}

/// Multiplicative-weights update `w <- w * (1 - eta * loss)` with losses
/// normalized into `[0, 1]`.
pub fn pw_update(weights: &mut [f64], losses: &[f64], eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Parameter(format!(
            "learning rate must lie strictly in (0,1), got {eta}"
        )));
    }
    if weights.len() != losses.len() {
        return Err(Error::Contract(
            "weights and losses must have the same length".into(),
        ));
    }
    for (w, &loss) in weights.iter_mut().zip(losses) {
        if !(0.0..=1.0).contains(&loss) {
            return Err(Error::Contract(format!(
                "loss {loss} outside the normalized [0,1] range"
            )));
        }
        *w *= 1.0 - eta * loss;
    }
    Ok(())
}

/// Stationary distribution `p = p Q` of the row-stochastic matrix whose row
/// `a` is `instance_distributions[a]`, found by fixed-point iteration from
/// the uniform vector to an L1 tolerance of 1e-10.
pub fn combine_internal(instance_distributions: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = instance_distributions.len();
    for (a, dist) in instance_distributions.iter().enumerate() {
        if dist.len() != n {
            return Err(Error::Contract(format!(
                "instance {a} proposes {} entries for {n} actions",
                dist.len()
            )));
        }
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > 1e-6 || dist.iter().any(|&p| p < 0.0) {
            return Err(Error::Contract(format!(
                "instance {a} proposal is not a distribution (sum {sum})"
            )));
        }
    }
    let mut p = vec![1.0 / n as f64; n];
    let mut image = vec![0.0; n];
    let max_iters = 1_000_000;
    let mut delta = f64::INFINITY;
    for _ in 0..max_iters {
        image.iter_mut().for_each(|x| *x = 0.0);
        for (a, dist) in instance_distributions.iter().enumerate() {
            let mass = p[a];
            if mass == 0.0 {
                continue;
            }
            for (b, &q) in dist.iter().enumerate() {
                image[b] += mass * q;
            }
        }
        delta = p.iter().zip(&image).map(|(a, b)| (a - b).abs()).sum();
        if delta < 1e-10 {
            return Ok(p);
        }
        // Averaging the iterate with its image keeps the same fixed points
        // but also converges on periodic transition structures.
        for (x, &y) in p.iter_mut().zip(&image) {
            *x = 0.5 * (*x + y);
        }
        let norm: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= norm);
    }
    Err(Error::Numerical(format!(
        "stationary combination did not converge in {max_iters} iterations \
         (last L1 residual {delta:.3e})"
    )))
}

/// One polynomial-weights agent with the internal-regret reduction: instance
/// `a` is an external-regret weight vector responsible for the rounds in
/// which the combined strategy recommended action `a`.
#[derive(Debug, Clone)]
pub struct WeightState {
    /// `weights[a]` is instance a's weight vector over the C+1 actions.
    weights: Vec<Vec<f64>>,
    eta: f64,
    last_combined: Vec<f64>,
}

impl WeightState {
    pub fn new(n_channels: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Parameter(format!(
                "learning rate must lie strictly in (0,1), got {eta}"
            )));
        }
        let n_actions = n_channels + 1;
        Ok(Self {
            weights: vec![vec![1.0; n_actions]; n_actions],
            eta,
            last_combined: vec![1.0 / n_actions as f64; n_actions],
        })
    }

    pub fn n_actions(&self) -> usize {
        self.weights.len()
    }

    pub fn last_combined(&self) -> &[f64] {
        &self.last_combined
    }

    fn instance_distributions(&self) -> Vec<Vec<f64>> {
        self.weights
            .iter()
            .map(|w| {
                let sum: f64 = w.iter().sum();
                w.iter().map(|&x| x / sum).collect()
            })
            .collect()
    }

    /// Combine the instances' proposals into this round's distribution.
    pub fn step_distribution(&mut self) -> Result<Vec<f64>> {
        let combined = combine_internal(&self.instance_distributions())?;
        self.last_combined = combined.clone();
        Ok(combined)
    }

    /// Sample this round's action.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        let dist = self.step_distribution()?;
        Ok(sample_index(&dist, rng))
    }

    /// Feed back the realized per-action payoffs: each instance sees the
    /// normalized loss vector scaled by the weight it carried in the last
    /// combined distribution.
    pub fn update(&mut self, realized_payoffs: &[f64], cost: &ChannelGamePayoff) -> Result<()> {
        let losses: Vec<f64> = realized_payoffs.iter().map(|&u| cost.loss(u)).collect();
        let last = self.last_combined.clone();
        self.update_with_losses(&losses, &last)
    }

    /// The raw reduction step, exposed for tests: scale `losses` by
    /// `last_combined[a]` before updating instance `a`.
    pub fn update_with_losses(&mut self, losses: &[f64], last_combined: &[f64]) -> Result<()> {
        if losses.len() != self.n_actions() || last_combined.len() != self.n_actions() {
            return Err(Error::Contract(
                "loss and combination vectors must cover every action".into(),
            ));
        }
        let mut scaled = vec![0.0; losses.len()];
        for (a, weights) in self.weights.iter_mut().enumerate() {
            let scale = last_combined[a];
            for (s, &loss) in scaled.iter_mut().zip(losses) {
                *s = scale * loss;
            }
            pw_update(weights, &scaled, self.eta)?;
            // Proposals depend only on relative weights within an instance,
            // so rescale before a long run drives the row into underflow.
            let max = weights.iter().fold(0.0f64, |m, &w| m.max(w));
            if max > 0.0 && max < 1e-150 {
                weights.iter_mut().for_each(|w| *w /= max);
            }
        }
        Ok(())
    }
}

/// Largest average gain any single action swap would have produced for
/// `agent` over `play_history`: the internal-regret audit. Nonpositive gains
/// floor at zero (the identity swap).
pub fn max_internal_regret(
    play_history: &[Vec<usize>],
    n_channels: usize,
    cost: &ChannelGamePayoff,
    agent: usize,
) -> Result<f64> {
    if play_history.is_empty() {
        return Err(Error::Contract("regret audit needs a nonempty history".into()));
    }
    let n_actions = n_channels + 1;
    let mut pair_sums = vec![0.0; n_actions * n_actions];
    for profile in play_history {
        let played = profile[agent];
        let cf = counterfactual_payoffs(profile, agent, n_channels, cost);
        for (b, &u) in cf.iter().enumerate() {
            pair_sums[played * n_actions + b] += u - cf[played];
        }
    }
    let max_sum = pair_sums.iter().fold(0.0f64, |acc, &s| acc.max(s));
    Ok(max_sum / play_history.len() as f64)
}

/// Incremental version of [`max_internal_regret`] for whole-run traces.
#[derive(Debug, Clone)]
pub struct RegretAuditor {
    pair_sums: Vec<Vec<f64>>,
    n_actions: usize,
    n_channels: usize,
    rounds: u64,
}

impl RegretAuditor {
    pub fn new(n_agents: usize, n_channels: usize) -> Self {
        let n_actions = n_channels + 1;
        Self {
            pair_sums: vec![vec![0.0; n_actions * n_actions]; n_agents],
            n_actions,
            n_channels,
            rounds: 0,
        }
    }

    pub fn record(&mut self, profile: &[usize], cost: &ChannelGamePayoff) {
        for (agent, sums) in self.pair_sums.iter_mut().enumerate() {
            let played = profile[agent];
            let cf = counterfactual_payoffs(profile, agent, self.n_channels, cost);
            for (b, &u) in cf.iter().enumerate() {
                sums[played * self.n_actions + b] += u - cf[played];
            }
        }
        self.rounds += 1;
    }

    /// Current max average internal regret across all agents.
    pub fn max_regret(&self) -> f64 {
        if self.rounds == 0 {
            return 0.0;
        }
        self.pair_sums
            .iter()
            .map(|sums| sums.iter().fold(0.0f64, |acc, &s| acc.max(s)))
            .fold(0.0f64, f64::max)
            / self.rounds as f64
    }
}

fn sample_index<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if draw < acc {
            return i;
        }
    }
    dist.len() - 1
}
