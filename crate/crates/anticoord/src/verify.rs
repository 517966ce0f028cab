//! Cross-checks between the analytic chain solvers and the agent simulator,
//! runnable from the CLI (`anticoord verify`) and from the test suite.
//!
//! Each check pits two independent routes against each other: linear-solve
//! hitting times vs Monte-Carlo chain trajectories, the agent simulator vs
//! the chain expectation, forward-substituted hitting probabilities vs their
//! closed form, and exact hitting times vs the closed-form upper bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::experiments::{run_static, ScenarioConfig};
use crate::markov::{
    contraction_hitting_bound, single_channel_convergence_bound, verify_success_before_restart,
    ChainModel, ChainVariant,
};
use crate::Result;

/// Outcome of one oracle check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn ok(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            detail: detail.into(),
        }
    }

    fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: false,
            detail: detail.into(),
        }
    }
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Exact solve of the two-agent chain: the expected time to single ownership
/// from both transmitting is 5/2.
pub fn check_exact_two_agent_time() -> Result<Check> {
    let model = ChainModel::new(2, 0.5, ChainVariant::Original)?;
    let exact = model.expected_hitting_time(&[1])?.value(2);
    let err = (exact - 2.5).abs();
    Ok(if err < 1e-9 {
        Check::ok(
            "two-agent expected convergence time",
            format!("solver {exact} vs 5/2, |err| {err:.2e}"),
        )
    } else {
        Check::fail(
            "two-agent expected convergence time",
            format!("solver {exact} deviates from 5/2 by {err:.2e}"),
        )
    })
}

/// Monte-Carlo chain trajectories vs the linear solve, within 3 standard
/// errors, across a (N, p) grid.
pub fn check_chain_monte_carlo(trajectories: usize) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c_a1);
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &n in &[2usize, 4, 8, 16] {
        for &p in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let model = ChainModel::new(n, p, ChainVariant::Original)?;
            let exact = model.expected_hitting_time(&[1])?.value(n);
            let samples: Vec<f64> = (0..trajectories)
                .map(|_| {
                    model
                        .simulate_hitting_time(n, &[1], 10_000_000, &mut rng)
                        .expect("the chain reaches absorption") as f64
                })
                .collect();
            let (mean, se) = mean_and_se(&samples);
            let sigmas = (mean - exact).abs() / se.max(1e-12);
            if sigmas > worst {
                worst = sigmas;
                detail = format!(
                    "worst deviation {sigmas:.2} se at N={n}, p={p} (MC {mean:.4} vs exact {exact:.4})"
                );
            }
            if sigmas > 3.0 {
                return Ok(Check::fail("chain Monte-Carlo vs linear solve", detail));
            }
        }
    }
    Ok(Check::ok("chain Monte-Carlo vs linear solve", detail))
}

/// Full agent simulation vs the chain expectation for the single-channel,
/// single-signal game, within 3 standard errors.
pub fn check_simulator_against_chain(runs: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &n in &[2usize, 3, 4, 6, 8] {
        let model = ChainModel::new(n, 0.5, ChainVariant::Original)?;
        let exact = model.expected_hitting_time(&[1])?.value(n);
        let config = ScenarioConfig {
            scenario_id: "verify".into(),
            n_agents: n,
            n_channels: 1,
            n_signals: 1,
            runs,
            horizon: 1_000_000,
            seed: 0x51_3d + n as u64,
            ..ScenarioConfig::default()
        };
        let samples: Vec<f64> = run_static(&config)?
            .into_iter()
            .map(|r| r.convergence_steps.expect("single-channel runs converge") as f64)
            .collect();
        let (mean, se) = mean_and_se(&samples);
        let sigmas = (mean - exact).abs() / se.max(1e-12);
        if sigmas > worst {
            worst = sigmas;
            detail = format!(
                "worst deviation {sigmas:.2} se at N={n} (simulator {mean:.4} vs chain {exact:.4})"
            );
        }
        if sigmas > 3.0 {
            return Ok(Check::fail("agent simulator vs chain expectation", detail));
        }
    }
    Ok(Check::ok("agent simulator vs chain expectation", detail))
}

/// Success-before-restart probabilities: at least `1 - p` from every start,
/// with the three-state start matching its closed form to 1e-12.
pub fn check_success_before_restart() -> Result<Check> {
    for &p in &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        if !verify_success_before_restart(100, p)? {
            return Ok(Check::fail(
                "success-before-restart lower bound",
                format!("violated at p={p}"),
            ));
        }
        let model = ChainModel::new(100, p, ChainVariant::AbsorbedAtZeroAndOne)?;
        let h2 = model.hitting_probability(&[1])?.value(2);
        let closed = 2.0 * (1.0 - p) / (2.0 - p);
        if (h2 - closed).abs() > 1e-12 {
            return Ok(Check::fail(
                "success-before-restart lower bound",
                format!("h_2 = {h2} vs closed form {closed} at p={p}"),
            ));
        }
    }
    Ok(Check::ok(
        "success-before-restart lower bound",
        "h_i >= 1-p for i in 2..=100 across p in 0.1..=0.9; h_2 matches its closed form",
    ))
}

/// Exact expected hitting times never exceed the closed-form contraction
/// bound, for both the restart chain (targets {0,1}) and the absorbed-at-zero
/// chain (target {0}).
pub fn check_bound_soundness(max_agents: usize) -> Result<Check> {
    let mut tightest = f64::INFINITY;
    for &p in &[0.25, 0.5, 0.75] {
        let beta = 1.0 / (1.0 - p);
        let modified = ChainModel::new(max_agents, p, ChainVariant::ModifiedY)?;
        let k_modified = modified.expected_hitting_time(&[0])?;
        for i in 1..=max_agents {
            let bound = contraction_hitting_bound(beta, i)?;
            // The bound is attained exactly at i = 1 (a geometric wait of
            // 1/p steps), so allow representation error there.
            if k_modified.value(i) > bound * (1.0 + 1e-9) {
                return Ok(Check::fail(
                    "hitting-time bound soundness",
                    format!(
                        "absorbed-at-zero chain: k_{i} = {} exceeds bound {bound} at p={p}",
                        k_modified.value(i)
                    ),
                ));
            }
        }
        for n in 2..=max_agents {
            let model = ChainModel::new(n, p, ChainVariant::Original)?;
            let k = model.expected_hitting_time(&[0, 1])?;
            for i in 2..=n {
                let bound = contraction_hitting_bound(beta, i)?;
                let slack = bound - k.value(i);
                if slack <= 0.0 {
                    return Ok(Check::fail(
                        "hitting-time bound soundness",
                        format!("restart chain: k_{i} = {} >= bound {bound} at N={n}, p={p}", k.value(i)),
                    ));
                }
                tightest = tightest.min(slack);
            }
        }
        // The end-to-end bound also dominates the full convergence time.
        let full = ChainModel::new(max_agents, p, ChainVariant::Original)?
            .expected_hitting_time(&[1])?
            .value(max_agents);
        let end_to_end = single_channel_convergence_bound(max_agents, p)?;
        if full >= end_to_end {
            return Ok(Check::fail(
                "hitting-time bound soundness",
                format!("full convergence time {full} exceeds its bound {end_to_end} at p={p}"),
            ));
        }
    }
    Ok(Check::ok(
        "hitting-time bound soundness",
        format!("all exact times below their bounds up to N={max_agents}; tightest slack {tightest:.3}"),
    ))
}

/// The full suite at its standard strength.
pub fn oracle_suite() -> Result<Vec<Check>> {
    Ok(vec![
        check_exact_two_agent_time()?,
        check_chain_monte_carlo(100_000)?,
        check_simulator_against_chain(10_000)?,
        check_success_before_restart()?,
        check_bound_soundness(256)?,
    ])
}
