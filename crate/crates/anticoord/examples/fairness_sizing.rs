//! Fairness of converged allocations: the binomial-win formula, empirical
//! allocation measurements, and the signal-space sizing rule.
//!
//!     cargo run --release --example fairness_sizing

use anticoord::experiments::{run_static, ScenarioConfig};
use anticoord::game::GameShape;
use anticoord::metrics::{jain_allocation, jain_binomial, min_signals_for_fairness};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("binomial-win Jain index CK/(CK + N - C) vs the empirical allocation");
    println!("{:>4} {:>4} {:>5} {:>10} {:>12}", "N", "C", "K", "formula", "empirical");
    for (n, c, k) in [
        (8usize, 1usize, 8usize),
        (16, 1, 16),
        (16, 8, 2),
        (32, 1, 160),
        (64, 1, 64),
        (64, 32, 12),
    ] {
        let shape = GameShape::new(n, c, k)?;
        let config = ScenarioConfig {
            scenario_id: "fairness".into(),
            n_agents: n,
            n_channels: c,
            n_signals: k,
            runs: 128,
            seed: 5,
            ..ScenarioConfig::default()
        };
        let results = run_static(&config)?;
        let mean: f64 = results
            .iter()
            .map(|r| jain_allocation(&r.allocation).unwrap())
            .sum::<f64>()
            / results.len() as f64;
        println!("{n:>4} {c:>4} {k:>5} {:>10.4} {mean:>12.4}", jain_binomial(&shape));
    }

    println!();
    println!("when every agent owns the same expected share (K = N/C), the index");
    println!("settles at N/(2N - C):");
    for n in [4usize, 16, 64, 256] {
        let even = GameShape::new(n, 1, n)?;
        let half = GameShape::new(n, n / 2, 2)?;
        println!(
            "  N = {n:>3}: C=1 -> {:.4}, C=N/2 -> {:.4}",
            jain_binomial(&even),
            jain_binomial(&half)
        );
    }

    println!();
    println!("signals needed for a target fairness (sizing rule, strict)");
    println!("{:>8} {:>4} {:>4} {:>8} {:>12}", "epsilon", "N", "C", "K", "achieved J");
    for eps in [0.5, 0.25, 0.1, 0.05, 0.01] {
        for (n, c) in [(64usize, 1usize), (64, 32)] {
            let k = min_signals_for_fairness(eps, n, c)?;
            let j = jain_binomial(&GameShape::new(n, c, k)?);
            println!("{eps:>8} {n:>4} {c:>4} {k:>8} {j:>12.6}");
            assert!(j > 1.0 - eps);
        }
    }
    Ok(())
}
