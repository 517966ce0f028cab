//! The scenario runners: static convergence, joining players, restarting
//! players, noisy observations, the generic-learner baselines, and the
//! memoryless random-access reference. Each executes `config.runs`
//! replications in parallel and returns per-run results in run order.

use rayon::prelude::*;

use super::{MetricName, MetricRecord, RunnerKind, ScenarioConfig};
use crate::agent::InitMode;
use crate::baselines::{
    counterfactual_payoffs, default_inertia, ChannelGamePayoff, RegretAuditor, RegretState,
    WeightState, QUIET,
};
use crate::metrics::{group_fairness, jain_allocation, throughput, AllocationVector};
use crate::sim::{random_access_throughput, Simulator};
use crate::{Error, Result};

/// One static-population replication.
#[derive(Debug, Clone)]
pub struct StaticRun {
    /// Slots before the absorbing state, `None` when the horizon ran out.
    pub convergence_steps: Option<u64>,
    pub allocation: AllocationVector,
}

/// One joining-population replication.
#[derive(Debug, Clone)]
pub struct JoiningRun {
    pub allocation: AllocationVector,
    /// Steady-state per-slot success share of each agent (wins / K).
    pub per_agent_throughput: Vec<f64>,
    pub group_fairness: f64,
    pub converged: bool,
}

/// One restarting-population replication.
#[derive(Debug, Clone)]
pub struct RestartRun {
    pub mean_throughput: f64,
}

/// One noisy-observation replication.
#[derive(Debug, Clone)]
pub struct NoisyRun {
    /// Throughput over the trailing half of the horizon.
    pub throughput: f64,
    /// Jain index of the final allocation (NaN if nobody owns anything).
    pub jain: f64,
}

/// Which generic learner a baseline run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineLearner {
    RegretMatching,
    PolyWeights,
}

/// One baseline replication.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    /// Rounds before the first 100-round collision-free, channel-covering
    /// window; `None` when the horizon ran out.
    pub rounds_to_converge: Option<u64>,
    /// Jain index of the winner-indicator allocation.
    pub jain: f64,
    /// Max average internal regret over the stable window (whole history
    /// when the run never stabilized).
    pub max_internal_regret: f64,
    /// Whole-history max internal regret at each round of the stable streak.
    pub regret_trace: Vec<f64>,
}

fn build_simulator(config: &ScenarioConfig) -> Result<Simulator> {
    let shape = config.shape()?;
    let mut sim = Simulator::new(shape, config.scheme)?;
    sim.set_noise(config.noise()?, config.signal_noise_model);
    sim.set_signal_mode(config.signal_mode);
    Ok(sim)
}

fn parallel_runs<T, F>(config: &ScenarioConfig, body: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..config.runs).into_par_iter().map(body).collect()
}

/// Run the learning loop until convergence or horizon, with a fixed
/// population.
pub fn run_static(config: &ScenarioConfig) -> Result<Vec<StaticRun>> {
    config.validate()?;
    if config.p_restart > 0.0 || config.join_plan.is_some() {
        return Err(Error::Config(
            "static scenario cannot have restarts or a join plan".into(),
        ));
    }
    parallel_runs(config, |run| {
        let mut rng = config.run_rng(run);
        let mut sim = build_simulator(config)?;
        sim.spawn(config.n_agents, config.init_mode(), &mut rng);
        let steps = sim.run_until_converged(config.horizon, &mut rng)?;
        Ok(StaticRun {
            convergence_steps: steps,
            allocation: sim.allocation(),
        })
    })
}

/// Grow the population one agent at a time, waiting for convergence between
/// arrivals; a quarter of the agents are present from the start. The final
/// metrics are taken from the last converged allocation.
pub fn run_joining(config: &ScenarioConfig) -> Result<Vec<JoiningRun>> {
    config.validate()?;
    let plan = config.join_plan.ok_or_else(|| {
        Error::Config("joining scenario needs a join plan".into())
    })?;
    if config.n_agents < 4 {
        return Err(Error::Config(
            "joining scenario needs at least 4 agents".into(),
        ));
    }
    if config.p_restart > 0.0 {
        return Err(Error::Config(
            "joining scenario cannot also restart agents".into(),
        ));
    }
    parallel_runs(config, |run| {
        let mut rng = config.run_rng(run);
        let mut sim = build_simulator(config)?;
        let initial = ((config.n_agents as f64 * plan.initial_fraction).ceil() as usize)
            .clamp(1, config.n_agents);
        sim.spawn(initial, InitMode::RandomChannel, &mut rng);
        let mut converged = true;
        loop {
            if sim
                .run_until_converged(plan.phase_horizon, &mut rng)?
                .is_none()
            {
                converged = false;
                break;
            }
            if sim.n_active() == config.n_agents {
                break;
            }
            let mode = config.join_init_mode(sim.n_active());
            sim.spawn(1, mode, &mut rng);
        }
        let mut wins = sim.allocation().wins;
        wins.resize(config.n_agents, 0);
        let allocation = AllocationVector { wins };
        let k = config.n_signals as f64;
        let per_agent: Vec<f64> = allocation.wins.iter().map(|&w| w as f64 / k).collect();
        let join_order: Vec<usize> = (0..config.n_agents).collect();
        let fairness = group_fairness(&per_agent, &join_order).unwrap_or(f64::NAN);
        Ok(JoiningRun {
            allocation,
            per_agent_throughput: per_agent,
            group_fairness: fairness,
            converged,
        })
    })
}

/// Fixed population with per-slot random restarts; the initial tables are
/// the standard random-channel ones, and `config.init` selects how restarted
/// agents come back. Throughput is measured over the whole horizon,
/// transients included.
pub fn run_restarting(config: &ScenarioConfig) -> Result<Vec<RestartRun>> {
    config.validate()?;
    if config.join_plan.is_some() {
        return Err(Error::Config(
            "restarting scenario cannot also grow the population".into(),
        ));
    }
    let shape = config.shape()?;
    parallel_runs(config, |run| {
        let mut rng = config.run_rng(run);
        let mut sim = build_simulator(config)?;
        sim.spawn(config.n_agents, InitMode::RandomChannel, &mut rng);
        sim.set_restarts(config.p_restart, config.init_mode());
        sim.run_slots(config.horizon, &mut rng)?;
        Ok(RestartRun {
            mean_throughput: throughput(&sim.window(), &shape)?,
        })
    })
}

/// Run with feedback and/or signal noise active for the whole horizon;
/// throughput is reported over the trailing half so the startup transient
/// does not mask the noise response.
pub fn run_noisy(config: &ScenarioConfig) -> Result<Vec<NoisyRun>> {
    config.validate()?;
    if config.p_restart > 0.0 || config.join_plan.is_some() {
        return Err(Error::Config(
            "noisy scenario cannot have restarts or a join plan".into(),
        ));
    }
    let shape = config.shape()?;
    let warmup = config.horizon / 2;
    let window = config.horizon - warmup;
    parallel_runs(config, |run| {
        let mut rng = config.run_rng(run);
        let mut sim = build_simulator(config)?;
        sim.spawn(config.n_agents, config.init_mode(), &mut rng);
        sim.run_slots(warmup, &mut rng)?;
        sim.reset_window();
        sim.run_slots(window, &mut rng)?;
        let jain = jain_allocation(&sim.allocation()).unwrap_or(f64::NAN);
        Ok(NoisyRun {
            throughput: throughput(&sim.window(), &shape)?,
            jain,
        })
    })
}

/// Run one of the generic full-observability learners on the one-shot game
/// (`K = 1`). A run counts as converged once the realized profile has been
/// collision-free and channel-covering for 100 consecutive rounds.
pub fn run_baselines(
    config: &ScenarioConfig,
    learner: BaselineLearner,
) -> Result<Vec<BaselineRun>> {
    config.validate()?;
    if config.n_signals != 1 {
        return Err(Error::Config(format!(
            "baselines play the one-shot game and need K = 1, got {}",
            config.n_signals
        )));
    }
    let n = config.n_agents;
    let c = config.n_channels;
    let cost = ChannelGamePayoff::new(config.collision_cost)?;
    parallel_runs(config, |run| {
        let mut rng = config.run_rng(run);
        baseline_run(config, learner, n, c, &cost, &mut rng)
    })
}

const STABLE_WINDOW: u64 = 100;

enum LearnerPool {
    Rm(Vec<RegretState>, f64),
    Pw(Vec<WeightState>),
}

impl LearnerPool {
    fn step<R: rand::Rng>(&mut self, agent: usize, rng: &mut R) -> Result<usize> {
        match self {
            LearnerPool::Rm(states, inertia) => states[agent].step(*inertia, rng),
            LearnerPool::Pw(states) => states[agent].step(rng),
        }
    }

    fn observe(&mut self, agent: usize, played: usize, cf: &[f64], cost: &ChannelGamePayoff) -> Result<()> {
        match self {
            LearnerPool::Rm(states, _) => {
                states[agent].observe(played, cf);
                Ok(())
            }
            LearnerPool::Pw(states) => states[agent].update(cf, cost),
        }
    }
}

fn baseline_run<R: rand::Rng>(
    config: &ScenarioConfig,
    learner: BaselineLearner,
    n: usize,
    c: usize,
    cost: &ChannelGamePayoff,
    rng: &mut R,
) -> Result<BaselineRun> {
    let mut pool = match learner {
        BaselineLearner::RegretMatching => LearnerPool::Rm(
            (0..n).map(|_| RegretState::new(c)).collect(),
            default_inertia(c, cost),
        ),
        BaselineLearner::PolyWeights => LearnerPool::Pw(
            (0..n)
                .map(|_| WeightState::new(c, config.pw_learning_rate))
                .collect::<Result<_>>()?,
        ),
    };

    let mut profile = vec![QUIET; n];
    let mut per_channel = vec![0u32; c + 1];
    let mut streak = 0u64;
    let mut window_auditor = RegretAuditor::new(n, c);
    let mut history_auditor = RegretAuditor::new(n, c);
    let mut regret_trace: Vec<f64> = Vec::new();
    let mut cf = vec![vec![0.0f64; c + 1]; n];

    for round in 0..config.horizon {
        for (agent, slot) in profile.iter_mut().enumerate() {
            *slot = pool.step(agent, rng)?;
        }

        per_channel.iter_mut().for_each(|x| *x = 0);
        for &action in &profile {
            per_channel[action] += 1;
        }
        let covering = per_channel[1..].iter().all(|&x| x == 1);

        for (agent, slot) in cf.iter_mut().enumerate() {
            *slot = counterfactual_payoffs(&profile, agent, c, cost);
        }
        for agent in 0..n {
            pool.observe(agent, profile[agent], &cf[agent], cost)?;
        }
        history_auditor.record(&profile, cost);

        if covering {
            window_auditor.record(&profile, cost);
            regret_trace.push(history_auditor.max_regret());
            streak += 1;
            if streak == STABLE_WINDOW {
                let wins: Vec<usize> = profile.iter().map(|&a| (a != QUIET) as usize).collect();
                let jain = jain_allocation(&AllocationVector { wins }).unwrap_or(f64::NAN);
                return Ok(BaselineRun {
                    rounds_to_converge: Some(round + 1 - STABLE_WINDOW),
                    jain,
                    max_internal_regret: window_auditor.max_regret(),
                    regret_trace,
                });
            }
        } else {
            streak = 0;
            window_auditor = RegretAuditor::new(n, c);
            regret_trace.clear();
        }
    }

    let wins: Vec<usize> = profile.iter().map(|&a| (a != QUIET) as usize).collect();
    Ok(BaselineRun {
        rounds_to_converge: None,
        jain: jain_allocation(&AllocationVector { wins }).unwrap_or(f64::NAN),
        max_internal_regret: history_auditor.max_regret(),
        regret_trace,
    })
}

/// Memoryless reference policy: every agent transmits with probability
/// `C/N` on a uniformly random channel, every slot.
pub fn run_random_access(config: &ScenarioConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let shape = config.shape()?;
    let p = config.n_channels as f64 / config.n_agents as f64;
    parallel_runs(config, |run| {
        let mut rng = config.run_rng(run);
        random_access_throughput(&shape, p, config.horizon, &mut rng)
    })
}

/// Execute one job and flatten its results into metric records.
pub fn run_job(runner: RunnerKind, config: &ScenarioConfig) -> Result<Vec<MetricRecord>> {
    let mut records = Vec::new();
    let push = |records: &mut Vec<MetricRecord>, run: usize, metric, value| {
        records.push(MetricRecord::new(config, run, metric, value));
    };
    match runner {
        RunnerKind::Static => {
            for (run, result) in run_static(config)?.into_iter().enumerate() {
                if let Some(steps) = result.convergence_steps {
                    push(&mut records, run, MetricName::ConvergenceSteps, steps as f64);
                }
                let jain = jain_allocation(&result.allocation).unwrap_or(f64::NAN);
                push(&mut records, run, MetricName::JainAllocation, jain);
                push(
                    &mut records,
                    run,
                    MetricName::ConvergedFlag,
                    result.convergence_steps.is_some() as u8 as f64,
                );
            }
        }
        RunnerKind::Joining => {
            for (run, result) in run_joining(config)?.into_iter().enumerate() {
                let jain = jain_allocation(&result.allocation).unwrap_or(f64::NAN);
                push(&mut records, run, MetricName::JainAllocation, jain);
                push(&mut records, run, MetricName::GroupFairness, result.group_fairness);
                push(
                    &mut records,
                    run,
                    MetricName::ConvergedFlag,
                    result.converged as u8 as f64,
                );
            }
        }
        RunnerKind::Restarting => {
            for (run, result) in run_restarting(config)?.into_iter().enumerate() {
                push(&mut records, run, MetricName::Throughput, result.mean_throughput);
            }
        }
        RunnerKind::Noisy => {
            for (run, result) in run_noisy(config)?.into_iter().enumerate() {
                push(&mut records, run, MetricName::Throughput, result.throughput);
                push(&mut records, run, MetricName::JainAllocation, result.jain);
            }
        }
        RunnerKind::RegretMatching | RunnerKind::PolyWeights => {
            let learner = if runner == RunnerKind::RegretMatching {
                BaselineLearner::RegretMatching
            } else {
                BaselineLearner::PolyWeights
            };
            for (run, result) in run_baselines(config, learner)?.into_iter().enumerate() {
                if let Some(rounds) = result.rounds_to_converge {
                    push(&mut records, run, MetricName::ConvergenceSteps, rounds as f64);
                }
                push(&mut records, run, MetricName::JainAllocation, result.jain);
                push(
                    &mut records,
                    run,
                    MetricName::MaxInternalRegret,
                    result.max_internal_regret,
                );
                push(
                    &mut records,
                    run,
                    MetricName::ConvergedFlag,
                    result.rounds_to_converge.is_some() as u8 as f64,
                );
            }
        }
        RunnerKind::RandomAccess => {
            for (run, value) in run_random_access(config)?.into_iter().enumerate() {
                push(&mut records, run, MetricName::Throughput, value);
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{InitKind, JoinPlan};

    fn base_config() -> ScenarioConfig {
        ScenarioConfig {
            scenario_id: "test".into(),
            n_agents: 2,
            n_channels: 1,
            n_signals: 1,
            runs: 64,
            horizon: 10_000,
            seed: 7,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn static_runner_matches_the_chain_expectation() {
        // Exact expected convergence time for two agents on one channel with
        // p = 1/2 is 2.5 slots.
        let mut config = base_config();
        config.runs = 2000;
        let results = run_static(&config).unwrap();
        let steps: Vec<f64> = results
            .iter()
            .map(|r| r.convergence_steps.unwrap() as f64)
            .collect();
        let mean = steps.iter().sum::<f64>() / steps.len() as f64;
        let var = steps.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (steps.len() - 1) as f64;
        let se = (var / steps.len() as f64).sqrt();
        assert!(
            (mean - 2.5).abs() < 3.0 * se,
            "mean {mean} vs 2.5 (se {se})"
        );
    }

    #[test]
    fn static_runner_rejects_dynamics() {
        let mut config = base_config();
        config.p_restart = 0.1;
        assert!(run_static(&config).is_err());
    }

    #[test]
    fn single_agent_converges_in_at_most_one_step() {
        let mut config = base_config();
        config.n_agents = 1;
        config.runs = 32;
        for result in run_static(&config).unwrap() {
            assert!(result.convergence_steps.unwrap() <= 1);
        }
    }

    #[test]
    fn restart_free_dynamic_run_reaches_full_throughput() {
        let mut config = base_config();
        config.n_agents = 4;
        config.n_signals = 2;
        config.runs = 8;
        config.horizon = 5000;
        let results = run_restarting(&config).unwrap();
        for r in &results {
            assert!(r.mean_throughput > 0.9, "throughput {}", r.mean_throughput);
        }
    }

    #[test]
    fn zero_noise_run_matches_static_allocation() {
        let mut config = base_config();
        config.n_agents = 6;
        config.n_signals = 4;
        config.runs = 16;
        config.horizon = 4000;
        let noisy = run_noisy(&config).unwrap();
        let stat = run_static(&config).unwrap();
        for (a, b) in noisy.iter().zip(&stat) {
            let jain = jain_allocation(&b.allocation).unwrap();
            assert_eq!(a.jain, jain);
            assert_eq!(a.throughput, 1.0);
        }
    }

    #[test]
    fn joining_needs_a_plan_and_enough_agents() {
        let config = base_config();
        assert!(run_joining(&config).is_err());
        let mut config = base_config();
        config.join_plan = Some(JoinPlan::default());
        assert!(run_joining(&config).is_err());
    }

    #[test]
    fn greedy_joiners_beat_the_founders() {
        let config = ScenarioConfig {
            scenario_id: "join".into(),
            n_agents: 8,
            n_channels: 1,
            n_signals: 24,
            init: InitKind::Greedy,
            join_plan: Some(JoinPlan {
                initial_fraction: 0.25,
                phase_horizon: 50_000,
            }),
            runs: 24,
            seed: 11,
            ..ScenarioConfig::default()
        };
        let results = run_joining(&config).unwrap();
        assert!(results.iter().all(|r| r.converged));
        let mean: f64 =
            results.iter().map(|r| r.group_fairness).sum::<f64>() / results.len() as f64;
        assert!(mean > 1.0, "greedy joiners should outperform founders: {mean}");
        for r in &results {
            assert_eq!(r.allocation.wins.iter().sum::<usize>(), 24);
        }
    }

    #[test]
    fn baselines_require_single_signal() {
        let mut config = base_config();
        config.n_signals = 2;
        assert!(run_baselines(&config, BaselineLearner::RegretMatching).is_err());
    }

    #[test]
    fn regret_matching_converges_on_the_small_game() {
        let mut config = base_config();
        config.n_agents = 4;
        config.runs = 16;
        config.horizon = 100_000;
        let results = run_baselines(&config, BaselineLearner::RegretMatching).unwrap();
        for r in &results {
            assert!(r.rounds_to_converge.is_some());
            assert_eq!(r.jain, 0.25);
            assert!(r.max_internal_regret <= 1e-9);
        }
    }

    #[test]
    fn poly_weights_converges_on_the_small_game() {
        let mut config = base_config();
        config.n_agents = 4;
        config.runs = 8;
        config.horizon = 100_000;
        let results = run_baselines(&config, BaselineLearner::PolyWeights).unwrap();
        for r in &results {
            assert!(r.rounds_to_converge.is_some());
            assert_eq!(r.jain, 0.25);
            assert!(r.max_internal_regret <= 1e-9);
        }
    }

    #[test]
    fn regret_trace_nonincreasing_once_absorbed() {
        let mut config = base_config();
        config.n_agents = 4;
        config.runs = 8;
        config.horizon = 100_000;
        for learner in [BaselineLearner::RegretMatching, BaselineLearner::PolyWeights] {
            for r in run_baselines(&config, learner).unwrap() {
                for pair in r.regret_trace.windows(2) {
                    assert!(pair[1] <= pair[0] + 1e-15);
                }
            }
        }
    }

    #[test]
    fn random_access_near_one_over_e() {
        let config = ScenarioConfig {
            scenario_id: "ra".into(),
            n_agents: 32,
            n_channels: 1,
            n_signals: 1,
            runs: 4,
            horizon: 100_000,
            seed: 3,
            ..ScenarioConfig::default()
        };
        let expected = (1.0f64 - 1.0 / 32.0).powi(31);
        for value in run_random_access(&config).unwrap() {
            assert!((value - expected).abs() < 0.02, "{value} vs {expected}");
        }
    }

    #[test]
    fn identical_configs_give_identical_results() {
        let mut config = base_config();
        config.n_agents = 6;
        config.n_signals = 3;
        config.runs = 12;
        let a = run_static(&config).unwrap();
        let b = run_static(&config).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.convergence_steps, y.convergence_steps);
            assert_eq!(x.allocation, y.allocation);
        }
    }

    #[test]
    fn adding_runs_never_changes_earlier_runs() {
        let mut config = base_config();
        config.n_agents = 5;
        config.n_signals = 2;
        config.runs = 6;
        let short = run_static(&config).unwrap();
        config.runs = 24;
        let long = run_static(&config).unwrap();
        for (x, y) in short.iter().zip(&long) {
            assert_eq!(x.convergence_steps, y.convergence_steps);
            assert_eq!(x.allocation, y.allocation);
        }
    }
}
