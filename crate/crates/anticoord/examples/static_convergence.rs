//! Convergence of the learning dynamics on a fixed population, checked
//! against the exact Markov-chain expectation for the single-channel game.
//!
//!     cargo run --release --example static_convergence

use anticoord::experiments::{run_static, ScenarioConfig};
use anticoord::markov::{ChainModel, ChainVariant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("single channel, single signal: simulator vs exact chain solve");
    println!("{:>4} {:>12} {:>12} {:>8}", "N", "simulated", "exact", "runs");
    for n in [2usize, 3, 4, 8, 16] {
        let config = ScenarioConfig {
            scenario_id: "static".into(),
            n_agents: n,
            n_channels: 1,
            n_signals: 1,
            runs: 2000,
            seed: 7,
            ..ScenarioConfig::default()
        };
        let results = run_static(&config)?;
        let mean: f64 = results
            .iter()
            .map(|r| r.convergence_steps.unwrap() as f64)
            .sum::<f64>()
            / results.len() as f64;

        let chain = ChainModel::new(n, 0.5, ChainVariant::Original)?;
        let exact = chain.expected_hitting_time(&[1])?.value(n);
        println!("{n:>4} {mean:>12.3} {exact:>12.3} {:>8}", results.len());
    }

    println!();
    println!("larger games (constant back-off 1/2, 128 runs each)");
    println!("{:>4} {:>4} {:>4} {:>14} {:>10}", "N", "C", "K", "mean steps", "converged");
    for (n, c, k) in [(16usize, 4usize, 16usize), (32, 16, 32), (64, 32, 64)] {
        let config = ScenarioConfig {
            scenario_id: "static".into(),
            n_agents: n,
            n_channels: c,
            n_signals: k,
            runs: 128,
            seed: 11,
            ..ScenarioConfig::default()
        };
        let results = run_static(&config)?;
        let converged = results.iter().filter(|r| r.convergence_steps.is_some()).count();
        let mean: f64 = results
            .iter()
            .filter_map(|r| r.convergence_steps)
            .map(|s| s as f64)
            .sum::<f64>()
            / converged as f64;
        println!("{n:>4} {c:>4} {k:>4} {mean:>14.1} {converged:>7}/128");
    }
    Ok(())
}
