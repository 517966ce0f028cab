//! The slot-by-slot simulation engine that drives the learning dynamics.
//!
//! One slot, in order: draw the public signal, let each agent (mis)read it,
//! collect actions, resolve the channels, deliver (possibly noisy) feedback,
//! apply the learning updates, then apply any restarts for the next slot.
//!
//! The simulator keeps an incremental ownership count per (signal, channel)
//! cell so convergence can be checked in O(1) per slot; an O(N K) scan of
//! the tables ([`crate::game::is_converged`]) remains available as the
//! reference predicate.

use rand::Rng;

use crate::agent::{resolve_worst_agent_last, BackoffScheme, InitMode, StrategyTable};
use crate::game::{
    apply_feedback_noise, draw_signal, perturb_signal, resolve_slot_into, AgentAction, GameShape,
    NoiseParams, Observation, SignalMode, SignalNoiseModel, SlotOutcome,
};
use crate::metrics::{AllocationVector, ThroughputWindow};
use crate::Result;

/// A population of learning agents playing the channel game.
#[derive(Debug, Clone)]
pub struct Simulator {
    shape: GameShape,
    scheme: BackoffScheme,
    noise: NoiseParams,
    signal_noise_model: SignalNoiseModel,
    signal_mode: SignalMode,
    restart: Option<(f64, InitMode)>,
    next_round_robin: usize,
    tables: Vec<StrategyTable>,
    /// Occupancy of cell (signal, channel), flattened as `signal * C + ch-1`.
    counts: Vec<u32>,
    cells_one: usize,
    cells_many: usize,
    slot: u64,
    window: ThroughputWindow,
    agent_successes: Vec<u64>,
    // per-slot scratch
    observed: Vec<usize>,
    actions: Vec<AgentAction>,
    outcome: SlotOutcome,
    colliders: Vec<(usize, usize)>,
}

impl Simulator {
    pub fn new(shape: GameShape, scheme: BackoffScheme) -> Result<Self> {
        scheme.validate()?;
        let cells = shape.n_signals() * shape.n_channels();
        Ok(Self {
            shape,
            scheme,
            noise: NoiseParams::NONE,
            signal_noise_model: SignalNoiseModel::default(),
            signal_mode: SignalMode::default(),
            restart: None,
            next_round_robin: 0,
            tables: Vec::new(),
            counts: vec![0; cells],
            cells_one: 0,
            cells_many: 0,
            slot: 0,
            window: ThroughputWindow::default(),
            agent_successes: Vec::new(),
            observed: Vec::new(),
            actions: Vec::new(),
            outcome: SlotOutcome::default(),
            colliders: Vec::new(),
        })
    }

    pub fn set_noise(&mut self, noise: NoiseParams, model: SignalNoiseModel) {
        self.noise = noise;
        self.signal_noise_model = model;
    }

    pub fn set_signal_mode(&mut self, mode: SignalMode) {
        self.signal_mode = mode;
    }

    /// Restart every agent independently with this probability at the end of
    /// each slot, reinitializing through `mode`.
    pub fn set_restarts(&mut self, p_restart: f64, mode: InitMode) {
        self.restart = if p_restart > 0.0 {
            Some((p_restart, mode))
        } else {
            None
        };
    }

    pub fn shape(&self) -> &GameShape {
        &self.shape
    }

    pub fn scheme(&self) -> &BackoffScheme {
        &self.scheme
    }

    pub fn n_active(&self) -> usize {
        self.tables.len()
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn tables(&self) -> &[StrategyTable] {
        &self.tables
    }

    /// Cumulative slots successfully used by each agent since construction.
    pub fn agent_successes(&self) -> &[u64] {
        &self.agent_successes
    }

    /// Cumulative throughput window since construction (or the last reset).
    pub fn window(&self) -> ThroughputWindow {
        self.window
    }

    pub fn reset_window(&mut self) {
        self.window = ThroughputWindow::default();
    }

    pub fn allocation(&self) -> AllocationVector {
        AllocationVector::from_strategies(&self.tables)
    }

    /// Add one agent with the given table.
    pub fn add_agent(&mut self, table: StrategyTable) {
        debug_assert_eq!(table.len(), self.shape.n_signals());
        for signal in 0..table.len() {
            let entry = table.entry(signal);
            if entry > 0 {
                self.cell_changed(signal, 0, entry);
            }
        }
        self.tables.push(table);
        self.agent_successes.push(0);
    }

    /// Add `count` agents initialized per `mode`.
    pub fn spawn<R: Rng + ?Sized>(&mut self, count: usize, mode: InitMode, rng: &mut R) {
        for _ in 0..count {
            let table = StrategyTable::init(mode, &self.shape, rng);
            self.add_agent(table);
        }
    }

    /// Swap an agent's table wholesale (a restart).
    pub fn replace_agent(&mut self, agent: usize, table: StrategyTable) {
        for signal in 0..self.shape.n_signals() {
            let old = self.tables[agent].entry(signal);
            let new = table.entry(signal);
            if old != new {
                self.cell_changed(signal, old, new);
            }
        }
        self.tables[agent] = table;
    }

    /// Absorbing-state test: no cell is contested and every signal value has
    /// `min(C, N)` owned channels. For a full population (`N >= C`) this is
    /// exactly "every channel owned by exactly one agent for every signal".
    pub fn is_converged(&self) -> bool {
        let want = self.shape.n_signals() * self.shape.n_channels().min(self.tables.len());
        self.cells_many == 0 && self.cells_one == want
    }

    /// Execute one slot.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let n = self.tables.len();
        let true_signal = match self.signal_mode {
            SignalMode::Iid => draw_signal(&self.shape, rng),
            SignalMode::RoundRobin => {
                let k = self.next_round_robin;
                self.next_round_robin = (k + 1) % self.shape.n_signals();
                k
            }
        };

        self.observed.clear();
        if self.noise.p_signal > 0.0 {
            for _ in 0..n {
                self.observed.push(perturb_signal(
                    true_signal,
                    &self.shape,
                    &self.noise,
                    self.signal_noise_model,
                    rng,
                ));
            }
        } else {
            self.observed.resize(n, true_signal);
        }

        self.actions.clear();
        for i in 0..n {
            let action = self.tables[i].choose_action(self.observed[i], &self.shape, rng);
            self.actions.push(action);
        }

        resolve_slot_into(&self.actions, &self.shape, &mut self.outcome)?;
        let successes = self.outcome.successful_channels();
        self.window.record_slot(successes);
        for transmitters in &self.outcome.transmitters_per_channel {
            if let [lone] = transmitters.as_slice() {
                self.agent_successes[*lone] += 1;
            }
        }

        if matches!(self.scheme, BackoffScheme::WorstAgentLast) {
            self.update_worst_agent_last(rng)?;
        } else {
            for i in 0..n {
                let signal = self.observed[i];
                let obs = apply_feedback_noise(self.outcome.observations[i], &self.noise, rng);
                let before = self.tables[i].entry(signal);
                let action = self.actions[i];
                self.tables[i].apply_update(signal, &action, obs, &self.scheme, &self.shape, rng)?;
                let after = self.tables[i].entry(signal);
                if before != after {
                    self.cell_changed(signal, before, after);
                }
            }
        }

        if let Some((p_restart, mode)) = self.restart {
            for i in 0..n {
                if rng.gen_bool(p_restart) {
                    let table = StrategyTable::init(mode, &self.shape, rng);
                    self.replace_agent(i, table);
                }
            }
        }

        self.slot += 1;
        Ok(())
    }

    /// The worst-agent-last rule resolves true collisions with a global view:
    /// the collider with the smallest cardinality keeps its claim, the rest
    /// go quiet with certainty. Monitors still follow their (possibly noisy)
    /// observations; successful transmitters always keep their entry.
    fn update_worst_agent_last<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        for channel in 0..self.shape.n_channels() {
            if self.outcome.transmitters_per_channel[channel].len() < 2 {
                continue;
            }
            self.colliders.clear();
            for &agent in &self.outcome.transmitters_per_channel[channel] {
                self.colliders.push((agent, self.tables[agent].cardinality()));
            }
            for agent in resolve_worst_agent_last(&self.colliders, rng)? {
                let signal = self.observed[agent];
                let before = self.tables[agent].entry(signal);
                if before != 0 {
                    self.tables[agent].set_entry(signal, 0);
                    self.cell_changed(signal, before, 0);
                }
            }
        }
        for i in 0..self.tables.len() {
            if let AgentAction::Monitor(channel) = self.actions[i] {
                let obs = apply_feedback_noise(self.outcome.observations[i], &self.noise, rng);
                if obs == Observation::ChannelFree {
                    let signal = self.observed[i];
                    let before = self.tables[i].entry(signal);
                    if before != channel {
                        self.tables[i].set_entry(signal, channel);
                        self.cell_changed(signal, before, channel);
                    }
                }
            }
        }
        Ok(())
    }

    /// Step until the absorbing state, up to `max_slots`. Returns the number
    /// of slots executed before convergence, or `None` on horizon exhaustion.
    pub fn run_until_converged<R: Rng + ?Sized>(
        &mut self,
        max_slots: u64,
        rng: &mut R,
    ) -> Result<Option<u64>> {
        for elapsed in 0..max_slots {
            if self.is_converged() {
                return Ok(Some(elapsed));
            }
            self.step(rng)?;
        }
        Ok(if self.is_converged() {
            Some(max_slots)
        } else {
            None
        })
    }

    /// Step a fixed number of slots.
    pub fn run_slots<R: Rng + ?Sized>(&mut self, slots: u64, rng: &mut R) -> Result<()> {
        for _ in 0..slots {
            self.step(rng)?;
        }
        Ok(())
    }

    fn cell_changed(&mut self, signal: usize, old_channel: usize, new_channel: usize) {
        let c = self.shape.n_channels();
        if old_channel > 0 {
            let idx = signal * c + old_channel - 1;
            let count = self.counts[idx];
            self.counts[idx] = count - 1;
            match count {
                1 => self.cells_one -= 1,
                2 => {
                    self.cells_many -= 1;
                    self.cells_one += 1;
                }
                _ => {}
            }
        }
        if new_channel > 0 {
            let idx = signal * c + new_channel - 1;
            let count = self.counts[idx];
            self.counts[idx] = count + 1;
            match count {
                0 => self.cells_one += 1,
                1 => {
                    self.cells_one -= 1;
                    self.cells_many += 1;
                }
                _ => {}
            }
        }
    }
}

/// Throughput of the memoryless random-access baseline: every agent
/// transmits with probability `transmit_prob` on a uniformly random channel,
/// every slot, forever.
pub fn random_access_throughput<R: Rng + ?Sized>(
    shape: &GameShape,
    transmit_prob: f64,
    slots: u64,
    rng: &mut R,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&transmit_prob) {
        return Err(crate::Error::Parameter(format!(
            "transmit probability must be in [0,1], got {transmit_prob}"
        )));
    }
    let c = shape.n_channels();
    let mut per_channel = vec![0u32; c];
    let mut successes = 0u64;
    for _ in 0..slots {
        per_channel.iter_mut().for_each(|x| *x = 0);
        for _ in 0..shape.n_agents() {
            if rng.gen_bool(transmit_prob) {
                let ch = if c == 1 { 0 } else { rng.gen_range(0..c) };
                per_channel[ch] += 1;
            }
        }
        successes += per_channel.iter().filter(|&&x| x == 1).count() as u64;
    }
    Ok(successes as f64 / (c as f64 * slots as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_converged;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shape(n: usize, c: usize, k: usize) -> GameShape {
        GameShape::new(n, c, k).unwrap()
    }

    fn converged_tables(n: usize, c: usize, k: usize) -> Vec<StrategyTable> {
        // Owner of channel ch for signal s is agent (s + ch) mod n.
        (0..n)
            .map(|agent| {
                let entries = (0..k)
                    .map(|s| {
                        (1..=c)
                            .find(|&ch| (s + ch) % n == agent)
                            .unwrap_or(0)
                    })
                    .collect();
                StrategyTable::from_entries(entries)
            })
            .collect()
    }

    #[test]
    fn incremental_convergence_matches_reference_predicate() {
        let s = shape(5, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut sim = Simulator::new(s, BackoffScheme::default()).unwrap();
        sim.spawn(5, InitMode::RandomChannel, &mut rng);
        for _ in 0..2000 {
            assert_eq!(sim.is_converged(), is_converged(sim.tables(), &s));
            if sim.is_converged() {
                break;
            }
            sim.step(&mut rng).unwrap();
        }
    }

    #[test]
    fn single_agent_converges_immediately_or_in_one_slot() {
        let s = shape(1, 1, 1);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sim = Simulator::new(s, BackoffScheme::default()).unwrap();
            sim.spawn(1, InitMode::RandomChannel, &mut rng);
            let steps = sim.run_until_converged(10, &mut rng).unwrap().unwrap();
            assert!(steps <= 1, "seed {seed}: {steps} steps");
        }
    }

    #[test]
    fn absorbing_state_never_changes() {
        let s = shape(6, 2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for scheme in [
            BackoffScheme::default(),
            BackoffScheme::Linear,
            BackoffScheme::WorstAgentLast,
        ] {
            let mut sim = Simulator::new(s, scheme).unwrap();
            for table in converged_tables(6, 2, 3) {
                sim.add_agent(table);
            }
            assert!(sim.is_converged());
            let frozen = sim.tables().to_vec();
            sim.run_slots(500, &mut rng).unwrap();
            assert_eq!(sim.tables(), frozen.as_slice(), "scheme {scheme:?}");
            assert!(sim.is_converged());
        }
    }

    #[test]
    fn converged_population_saturates_throughput() {
        let s = shape(4, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sim = Simulator::new(s, BackoffScheme::default()).unwrap();
        for table in converged_tables(4, 2, 2) {
            sim.add_agent(table);
        }
        sim.run_slots(100, &mut rng).unwrap();
        let w = sim.window();
        assert_eq!(w.slots, 100);
        assert_eq!(w.successes, 200);
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let s = shape(8, 2, 4);
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sim = Simulator::new(s, BackoffScheme::default()).unwrap();
            sim.set_noise(
                NoiseParams::new(0.01, 0.01).unwrap(),
                SignalNoiseModel::FullSupport,
            );
            sim.spawn(8, InitMode::RandomChannel, &mut rng);
            sim.run_slots(300, &mut rng).unwrap();
            (
                sim.tables().to_vec(),
                sim.window(),
                sim.agent_successes().to_vec(),
            )
        };
        assert_eq!(run(77), run(77));
        assert_ne!(run(77).0, run(78).0);
    }

    #[test]
    fn worst_agent_last_clears_collisions_in_one_step() {
        // All four agents collide on channel 1 of 1 for the single signal;
        // exactly one transmitter must remain immediately afterwards.
        let s = shape(4, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut sim = Simulator::new(s, BackoffScheme::WorstAgentLast).unwrap();
        for _ in 0..4 {
            sim.add_agent(StrategyTable::from_entries(vec![1]));
        }
        sim.step(&mut rng).unwrap();
        let transmitting = sim
            .tables()
            .iter()
            .filter(|t| t.entry(0) == 1)
            .count();
        assert_eq!(transmitting, 1);
    }

    #[test]
    fn round_robin_signal_cycles_deterministically() {
        let s = shape(2, 1, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut sim = Simulator::new(s, BackoffScheme::default()).unwrap();
        sim.set_signal_mode(SignalMode::RoundRobin);
        sim.spawn(2, InitMode::RandomChannel, &mut rng);
        // The cycle is internal; all we require is determinism and progress.
        let a = {
            let mut clone = sim.clone();
            let mut rng2 = ChaCha8Rng::seed_from_u64(6);
            clone.run_slots(30, &mut rng2).unwrap();
            clone.tables().to_vec()
        };
        let b = {
            let mut rng2 = ChaCha8Rng::seed_from_u64(6);
            sim.run_slots(30, &mut rng2).unwrap();
            sim.tables().to_vec()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn restarts_replace_tables() {
        let s = shape(3, 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sim = Simulator::new(s, BackoffScheme::default()).unwrap();
        for table in converged_tables(3, 1, 2) {
            sim.add_agent(table);
        }
        sim.set_restarts(1.0, InitMode::Greedy);
        sim.step(&mut rng).unwrap();
        // Greedy restart means everyone transmits for every signal.
        for table in sim.tables() {
            assert_eq!(table.cardinality(), 2);
        }
        assert!(!sim.is_converged());
    }

    #[test]
    fn growing_population_tracks_stability() {
        // One agent on two channels: stable once it owns a channel per
        // signal even though the other channel is free.
        let s = shape(4, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut sim = Simulator::new(s, BackoffScheme::default()).unwrap();
        sim.spawn(1, InitMode::RandomChannel, &mut rng);
        assert!(sim.is_converged());
        sim.spawn(3, InitMode::RandomChannel, &mut rng);
        let steps = sim.run_until_converged(10_000, &mut rng).unwrap();
        assert!(steps.is_some());
        assert_eq!(sim.allocation().wins.iter().sum::<usize>(), 2);
    }

    #[test]
    fn random_access_matches_binomial_success_probability() {
        let s = shape(32, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = 1.0 / 32.0;
        let measured = random_access_throughput(&s, p, 100_000, &mut rng).unwrap();
        let exact = 32.0 * p * (1.0 - p).powi(31);
        assert!(
            (measured - exact).abs() < 0.01,
            "measured {measured} vs exact {exact}"
        );
    }
}
