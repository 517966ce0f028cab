//! Late arrivals into a converged system: greedy newcomers grab slots from
//! the incumbents, polite newcomers barely get a foothold.
//!
//!     cargo run --release --example joining_players

use anticoord::experiments::{run_joining, InitKind, JoinPlan, ScenarioConfig};
use anticoord::metrics::{confidence_interval, jain_allocation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 16;
    let k = 64;
    println!("N = {n}, C = 1, K = {k}; 25% of agents present from the start,");
    println!("the rest join one by one after each convergence (128 runs)");
    println!();
    println!(
        "{:>8} {:>16} {:>12} {:>22}",
        "joiners", "group fairness", "Jain", "founder vs last share"
    );
    for init in [InitKind::Greedy, InitKind::Polite] {
        let config = ScenarioConfig {
            scenario_id: "joining".into(),
            n_agents: n,
            n_channels: 1,
            n_signals: k,
            init,
            join_plan: Some(JoinPlan::default()),
            runs: 128,
            seed: 17,
            ..ScenarioConfig::default()
        };
        let results = run_joining(&config)?;
        let ratios: Vec<f64> = results.iter().map(|r| r.group_fairness).collect();
        let jains: Vec<f64> = results
            .iter()
            .map(|r| jain_allocation(&r.allocation).unwrap())
            .collect();
        let (ratio, ratio_hw) = confidence_interval(&ratios)?;
        let (jain, _) = confidence_interval(&jains)?;
        let founder: f64 = results
            .iter()
            .map(|r| r.per_agent_throughput[0])
            .sum::<f64>()
            / results.len() as f64;
        let last: f64 = results
            .iter()
            .map(|r| r.per_agent_throughput[n - 1])
            .sum::<f64>()
            / results.len() as f64;
        println!(
            "{:>8} {ratio:>10.2} ±{ratio_hw:<4.2} {jain:>12.3} {founder:>10.3} vs {last:<8.3}",
            match init {
                InitKind::Greedy => "greedy",
                InitKind::Polite => "polite",
                InitKind::Random => "random",
            }
        );
    }
    println!();
    println!("group fairness = mean throughput of the last quarter of joiners over");
    println!("the first quarter's; above 1 favors the newcomers.");
    Ok(())
}
