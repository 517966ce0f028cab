//! Random restarts wipe an agent's learned table. Throughput vs the restart
//! probability, against the memoryless random-access reference.
//!
//!     cargo run --release --example restarting_players

use anticoord::experiments::{run_random_access, run_restarting, InitKind, ScenarioConfig};
use anticoord::metrics::confidence_interval;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 32;
    let k = 160;
    println!("N = {n}, C = 1, K = {k}, horizon 30000 slots, 128 runs");
    println!();
    println!("{:>10} {:>18} {:>18}", "p_restart", "greedy restarts", "polite restarts");
    for p_restart in [0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1] {
        let mut row = format!("{p_restart:>10.0e}");
        for init in [InitKind::Greedy, InitKind::Polite] {
            let config = ScenarioConfig {
                scenario_id: "restarting".into(),
                n_agents: n,
                n_channels: 1,
                n_signals: k,
                init,
                p_restart,
                horizon: 30_000,
                runs: 128,
                seed: 19,
                ..ScenarioConfig::default()
            };
            let results = run_restarting(&config)?;
            let values: Vec<f64> = results.iter().map(|r| r.mean_throughput).collect();
            let (mean, hw) = confidence_interval(&values)?;
            row.push_str(&format!(" {mean:>11.4} ±{hw:<6.4}"));
        }
        println!("{row}");
    }

    let config = ScenarioConfig {
        scenario_id: "restarting".into(),
        n_agents: n,
        n_channels: 1,
        n_signals: 1,
        horizon: 30_000,
        runs: 16,
        seed: 23,
        ..ScenarioConfig::default()
    };
    let reference: f64 =
        run_random_access(&config)?.iter().sum::<f64>() / 16.0;
    println!();
    println!("memoryless random access (transmit with probability C/N): {reference:.4}");
    println!("the learner beats it until restarts are frequent enough to keep the");
    println!("system permanently un-converged.");
    Ok(())
}
