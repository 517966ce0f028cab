//! Scaling of convergence time in the signal-space size K, with the fitted
//! growth exponent and the closed-form upper bound, exported as CSV.
//!
//!     cargo run --release --example convergence_sweep

use anticoord::experiments::{
    run_job, summarize, write_csv, write_summary_csv, RunnerKind, ScenarioConfig,
};
use anticoord::markov::multi_signal_convergence_bound;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 64;
    let c = 32;
    println!("N = {n}, C = {c}, constant back-off 1/2, 128 runs per point");
    println!("{:>5} {:>14} {:>16}", "K", "mean steps", "closed-form cap");

    let mut points = Vec::new();
    let mut records = Vec::new();
    for (i, k) in [2usize, 4, 8, 16, 32, 64].into_iter().enumerate() {
        let config = ScenarioConfig {
            scenario_id: "sweep".into(),
            n_agents: n,
            n_channels: c,
            n_signals: k,
            runs: 128,
            seed: 37 + i as u64,
            ..ScenarioConfig::default()
        };
        let job_records = run_job(RunnerKind::Static, &config)?;
        let steps: Vec<f64> = job_records
            .iter()
            .filter(|r| r.metric.as_str() == "convergence_steps")
            .map(|r| r.value)
            .collect();
        let mean = steps.iter().sum::<f64>() / steps.len() as f64;
        let bound = multi_signal_convergence_bound(n, c, k, 0.5)?;
        assert!(mean < bound, "mean {mean} above the bound {bound} at K={k}");
        println!("{k:>5} {mean:>14.1} {bound:>16.0}");
        points.push((k as f64, mean));
        records.extend(job_records);
    }

    // Least-squares slope of log(steps) against log(K): the theory caps the
    // growth at K log K; in practice it looks near-linear.
    let logs: Vec<(f64, f64)> = points.iter().map(|&(k, s)| (k.ln(), s.ln())).collect();
    let n_pts = logs.len() as f64;
    let (sx, sy): (f64, f64) = logs.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let sxx: f64 = logs.iter().map(|&(x, _)| x * x).sum();
    let sxy: f64 = logs.iter().map(|&(x, y)| x * y).sum();
    let slope = (n_pts * sxy - sx * sy) / (n_pts * sxx - sx * sx);
    println!();
    println!("fitted growth exponent: steps ~ K^{slope:.2}");

    let data = std::env::temp_dir().join("anticoord_sweep.csv");
    let summary = std::env::temp_dir().join("anticoord_sweep_summary.csv");
    write_csv(&records, &data)?;
    write_summary_csv(&summarize(&records), &summary)?;
    println!("raw points in {}, summary in {}", data.display(), summary.display());
    Ok(())
}
