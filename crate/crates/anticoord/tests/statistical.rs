//! Statistical agreement checks that cut across modules: converged-outcome
//! symmetry, the one-step guarantee of the oracle back-off rule, and the
//! summary shape of a preset run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use anticoord::agent::{resolve_worst_agent_last, InitMode, StrategyTable};
use anticoord::experiments::{preset, run_job, run_static, summarize, MetricName, ScenarioConfig};
use anticoord::game::{resolve_slot, AgentAction, GameShape};

/// By symmetry every agent wins each signal value with probability C/N, so
/// the empirical per-agent win counts over many runs must match that rate.
#[test]
fn converged_win_frequency_is_channels_over_agents() {
    let (n, c, k) = (8usize, 2usize, 16usize);
    let runs = 256;
    let config = ScenarioConfig {
        scenario_id: "winrate".into(),
        n_agents: n,
        n_channels: c,
        n_signals: k,
        runs,
        seed: 0xF00D,
        ..ScenarioConfig::default()
    };
    let results = run_static(&config).unwrap();
    let mut per_agent = vec![0usize; n];
    for r in &results {
        assert!(r.convergence_steps.is_some());
        for (agent, &wins) in r.allocation.wins.iter().enumerate() {
            per_agent[agent] += wins;
        }
    }
    // Each run allocates C*K wins total.
    let total_slots = (runs * k) as f64;
    let expected = c as f64 / n as f64;
    // Binomial-ish standard error per agent across runs * signals.
    let se = (expected * (1.0 - expected) / total_slots).sqrt();
    for (agent, &wins) in per_agent.iter().enumerate() {
        let freq = wins as f64 / total_slots;
        assert!(
            (freq - expected).abs() < 3.5 * se,
            "agent {agent}: win frequency {freq:.4} vs C/N = {expected:.4} (se {se:.4})"
        );
    }
}

/// The channel-count preset summarizes to one row per channel setting and
/// metric: grouping respects parameter-snapshot equality.
#[test]
fn channel_sweep_preset_summarizes_one_row_per_channel_count() {
    let mut jobs = preset("fig01").unwrap().jobs;
    let mut records = Vec::new();
    for job in &mut jobs {
        job.config.runs = 2;
        records.extend(run_job(job.runner, &job.config).unwrap());
    }
    let summary = summarize(&records);
    let steps_rows: Vec<_> = summary
        .iter()
        .filter(|row| row.metric == MetricName::ConvergenceSteps)
        .collect();
    assert_eq!(steps_rows.len(), jobs.len());
    let snapshots: std::collections::BTreeSet<&str> = steps_rows
        .iter()
        .map(|row| row.param_json.as_str())
        .collect();
    assert_eq!(snapshots.len(), jobs.len());
}

/// After the oracle rule resolves a collision, replaying the same signal
/// finds at most one transmitter on that channel, whatever the start state.
#[test]
fn worst_agent_last_resolves_any_collision_in_one_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for trial in 0..500 {
        use rand::Rng;
        let n = rng.gen_range(2..10);
        let c = rng.gen_range(1..=n);
        let k = rng.gen_range(1..4);
        let shape = GameShape::new(n, c, k).unwrap();
        let mut tables: Vec<StrategyTable> = (0..n)
            .map(|_| StrategyTable::init(InitMode::Greedy, &shape, &mut rng))
            .collect();
        let signal = rng.gen_range(0..k);
        let actions: Vec<AgentAction> = tables
            .iter()
            .map(|t| t.choose_action(signal, &shape, &mut rng))
            .collect();
        let outcome = resolve_slot(&actions, &shape).unwrap();
        for (ch, transmitters) in outcome.transmitters_per_channel.iter().enumerate() {
            if transmitters.len() < 2 {
                continue;
            }
            let colliders: Vec<(usize, usize)> = transmitters
                .iter()
                .map(|&a| (a, tables[a].cardinality()))
                .collect();
            for agent in resolve_worst_agent_last(&colliders, &mut rng).unwrap() {
                tables[agent].set_entry(signal, 0);
            }
            let remaining = tables
                .iter()
                .filter(|t| t.entry(signal) == ch + 1)
                .count();
            assert_eq!(remaining, 1, "trial {trial}: channel {} not cleared", ch + 1);
        }
    }
}
