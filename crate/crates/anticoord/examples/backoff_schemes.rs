//! How the back-off rule trades convergence speed against fairness: agents
//! that already hold many signal values can be made to yield more often.
//!
//!     cargo run --release --example backoff_schemes

use anticoord::agent::{BackoffScheme, ExponentialForm};
use anticoord::experiments::{run_static, ScenarioConfig};
use anticoord::metrics::{confidence_interval, jain_allocation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schemes: Vec<(&str, BackoffScheme)> = vec![
        ("constant(1/2)", BackoffScheme::Constant { p: 0.5 }),
        ("linear", BackoffScheme::Linear),
        (
            "exp(mu=1/2)",
            BackoffScheme::Exponential {
                mu: 0.5,
                form: ExponentialForm::Exponent,
            },
        ),
        ("worst-last", BackoffScheme::WorstAgentLast),
    ];

    for n in [8usize, 16, 32] {
        let k = 2 * (usize::BITS - (n - 1).leading_zeros()) as usize;
        println!("N = {n}, C = {}, K = {k}, 128 runs", n / 2);
        println!(
            "{:>14} {:>10} {:>10} {:>12}",
            "scheme", "Jain", "±95%", "mean steps"
        );
        for (name, scheme) in &schemes {
            let config = ScenarioConfig {
                scenario_id: "schemes".into(),
                n_agents: n,
                n_channels: n / 2,
                n_signals: k,
                scheme: *scheme,
                runs: 128,
                seed: 13,
                ..ScenarioConfig::default()
            };
            let results = run_static(&config)?;
            let jains: Vec<f64> = results
                .iter()
                .map(|r| jain_allocation(&r.allocation).unwrap())
                .collect();
            let steps: Vec<f64> = results
                .iter()
                .map(|r| r.convergence_steps.unwrap() as f64)
                .collect();
            let (jain, jain_hw) = confidence_interval(&jains)?;
            let (mean_steps, _) = confidence_interval(&steps)?;
            println!("{name:>14} {jain:>10.4} {jain_hw:>10.4} {mean_steps:>12.1}");
        }
        println!();
    }
    println!("the oracle worst-agent-last rule is both the fairest and the fastest;");
    println!("among the feedback-only rules, linear buys fairness with extra slots.");
    Ok(())
}
