//! Ready-made scenario grids, `fig01` … `fig17`, one per headline
//! experiment: static convergence and fairness sweeps, back-off scheme
//! comparisons, joining and restarting populations, noisy feedback and
//! noisy signal grids, and the generic-learner baselines. Every preset runs
//! at desk scale (N up to 64, 128 replications) in at most a few minutes.

use super::{InitKind, JoinPlan, ScenarioConfig};
use crate::agent::{BackoffScheme, ExponentialForm};

/// Which runner a job uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunnerKind {
    Static,
    Joining,
    Restarting,
    Noisy,
    RegretMatching,
    PolyWeights,
    RandomAccess,
}

/// One runnable unit of a preset.
#[derive(Debug, Clone)]
pub struct Job {
    pub runner: RunnerKind,
    pub config: ScenarioConfig,
}

/// A named bundle of jobs.
#[derive(Debug, Clone)]
pub struct Preset {
    pub id: &'static str,
    pub description: &'static str,
    pub jobs: Vec<Job>,
}

fn log2_ceil(n: usize) -> usize {
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

fn schemes_under_test() -> Vec<(&'static str, BackoffScheme)> {
    vec![
        ("constant", BackoffScheme::Constant { p: 0.5 }),
        ("linear", BackoffScheme::Linear),
        (
            "exponential",
            BackoffScheme::Exponential {
                mu: 0.5,
                form: ExponentialForm::Exponent,
            },
        ),
        ("worst_agent_last", BackoffScheme::WorstAgentLast),
    ]
}

fn static_config(id: &str, n: usize, c: usize, k: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        scenario_id: id.to_string(),
        n_agents: n,
        n_channels: c,
        n_signals: k,
        seed,
        ..ScenarioConfig::default()
    }
}

fn fig01() -> Preset {
    let n = 64;
    let jobs = [1usize, 2, 4, 8, 16, 32, 48, 64]
        .iter()
        .enumerate()
        .map(|(i, &c)| Job {
            runner: RunnerKind::Static,
            config: static_config("fig01", n, c, n, 101 + i as u64),
        })
        .collect();
    Preset {
        id: "fig01",
        description: "steps to convergence vs channel count (N=64, K=N)",
        jobs,
    }
}

fn fig02() -> Preset {
    let n = 64;
    let jobs = [2usize, 4, 8, 16, 32, 64]
        .iter()
        .enumerate()
        .map(|(i, &k)| Job {
            runner: RunnerKind::Static,
            config: static_config("fig02", n, n / 2, k, 201 + i as u64),
        })
        .collect();
    Preset {
        id: "fig02",
        description: "steps to convergence vs signal count (N=64, C=N/2)",
        jobs,
    }
}

fn fig03() -> Preset {
    let mut jobs = Vec::new();
    let mut seed = 301;
    for &n in &[4usize, 8, 16, 32, 64] {
        let log = log2_ceil(n);
        for (c, k) in [(1, n), (1, n * log), (n / 2, 2), (n / 2, 2 * log)] {
            jobs.push(Job {
                runner: RunnerKind::Static,
                config: static_config("fig03", n, c, k, seed),
            });
            seed += 1;
        }
    }
    Preset {
        id: "fig03",
        description: "allocation fairness vs population for several (C, K) laws",
        jobs,
    }
}

fn scheme_grid(id: &'static str, seed_base: u64) -> Vec<Job> {
    let mut jobs = Vec::new();
    let mut seed = seed_base;
    for &n in &[8usize, 16, 32] {
        for (_, scheme) in schemes_under_test() {
            let mut config = static_config(id, n, n / 2, 2 * log2_ceil(n), seed);
            config.scheme = scheme;
            jobs.push(Job {
                runner: RunnerKind::Static,
                config,
            });
            seed += 1;
        }
    }
    jobs
}

fn fig04() -> Preset {
    Preset {
        id: "fig04",
        description: "allocation fairness per back-off scheme (C=N/2, K=2*log2 N)",
        jobs: scheme_grid("fig04", 401),
    }
}

fn fig05() -> Preset {
    Preset {
        id: "fig05",
        description: "steps to convergence per back-off scheme (same grid as fig04)",
        jobs: scheme_grid("fig05", 501),
    }
}

fn joining_grid(id: &'static str, channels: fn(usize) -> usize, signals: fn(usize) -> usize, seed_base: u64) -> Vec<Job> {
    let mut jobs = Vec::new();
    let mut seed = seed_base;
    for &n in &[8usize, 16] {
        for init in [InitKind::Greedy, InitKind::Polite] {
            for (_, scheme) in schemes_under_test() {
                if matches!(scheme, BackoffScheme::Exponential { .. }) {
                    continue;
                }
                let config = ScenarioConfig {
                    scenario_id: id.to_string(),
                    n_agents: n,
                    n_channels: channels(n),
                    n_signals: signals(n),
                    scheme,
                    init,
                    join_plan: Some(JoinPlan::default()),
                    seed,
                    ..ScenarioConfig::default()
                };
                jobs.push(Job {
                    runner: RunnerKind::Joining,
                    config,
                });
                seed += 1;
            }
        }
    }
    jobs
}

fn fig06() -> Preset {
    Preset {
        id: "fig06",
        description: "joining players, final fairness (C=1, K=N*log2 N)",
        jobs: joining_grid("fig06", |_| 1, |n| n * log2_ceil(n), 601),
    }
}

fn fig07() -> Preset {
    Preset {
        id: "fig07",
        description: "joining players, late/early throughput ratio (C=1, K=N*log2 N)",
        jobs: joining_grid("fig07", |_| 1, |n| n * log2_ceil(n), 701),
    }
}

fn fig08() -> Preset {
    Preset {
        id: "fig08",
        description: "joining players, final fairness (C=N/2, K=2*log2 N)",
        jobs: joining_grid("fig08", |n| n / 2, |n| 2 * log2_ceil(n), 801),
    }
}

fn fig09() -> Preset {
    Preset {
        id: "fig09",
        description: "joining players, late/early throughput ratio (C=N/2, K=2*log2 N)",
        jobs: joining_grid("fig09", |n| n / 2, |n| 2 * log2_ceil(n), 901),
    }
}

const RESTART_GRID: [f64; 6] = [0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

fn restart_jobs(
    id: &'static str,
    n: usize,
    c: usize,
    signal_laws: &[usize],
    seed_base: u64,
) -> Vec<Job> {
    let mut jobs = Vec::new();
    let mut seed = seed_base;
    for &k in signal_laws {
        for init in [InitKind::Greedy, InitKind::Polite] {
            for (name, scheme) in schemes_under_test() {
                if name == "exponential" {
                    continue;
                }
                for &p_restart in &RESTART_GRID {
                    let config = ScenarioConfig {
                        scenario_id: id.to_string(),
                        n_agents: n,
                        n_channels: c,
                        n_signals: k,
                        scheme,
                        init,
                        p_restart,
                        horizon: 30_000,
                        seed,
                        ..ScenarioConfig::default()
                    };
                    jobs.push(Job {
                        runner: RunnerKind::Restarting,
                        config,
                    });
                    seed += 1;
                }
            }
        }
    }
    // The memoryless transmit-with-probability-C/N reference line.
    jobs.push(Job {
        runner: RunnerKind::RandomAccess,
        config: ScenarioConfig {
            scenario_id: id.to_string(),
            n_agents: n,
            n_channels: c,
            n_signals: 1,
            horizon: 30_000,
            seed: seed_base + 999,
            ..ScenarioConfig::default()
        },
    });
    jobs
}

fn fig10() -> Preset {
    let n = 32;
    Preset {
        id: "fig10",
        description: "restarting players, overall throughput (N=32, C=1)",
        jobs: restart_jobs("fig10", n, 1, &[n * log2_ceil(n), n], 1001),
    }
}

fn fig11() -> Preset {
    let n = 32;
    Preset {
        id: "fig11",
        description: "restarting players, overall throughput (N=32, C=N/2)",
        jobs: restart_jobs("fig11", n, n / 2, &[log2_ceil(n), 2], 1101),
    }
}

const NOISE_GRID: [f64; 5] = [0.0, 1e-4, 1e-3, 1e-2, 1e-1];

fn noisy_jobs(id: &'static str, feedback: bool, seed_base: u64) -> Vec<Job> {
    let n = 32;
    let mut jobs = Vec::new();
    let mut seed = seed_base;
    for (c, k) in [(1usize, n * log2_ceil(n)), (n / 2, 2 * log2_ceil(n))] {
        for (name, scheme) in schemes_under_test() {
            if name != "constant" && name != "linear" {
                continue;
            }
            for &p in &NOISE_GRID {
                let config = ScenarioConfig {
                    scenario_id: id.to_string(),
                    n_agents: n,
                    n_channels: c,
                    n_signals: k,
                    scheme,
                    p_feedback: if feedback { p } else { 0.0 },
                    p_signal: if feedback { 0.0 } else { p },
                    horizon: 30_000,
                    seed,
                    ..ScenarioConfig::default()
                };
                jobs.push(Job {
                    runner: RunnerKind::Noisy,
                    config,
                });
                seed += 1;
            }
        }
    }
    jobs
}

fn fig12() -> Preset {
    Preset {
        id: "fig12",
        description: "noisy feedback, trailing throughput (N=32)",
        jobs: noisy_jobs("fig12", true, 1201),
    }
}

fn fig13() -> Preset {
    Preset {
        id: "fig13",
        description: "noisy feedback, allocation fairness (N=32)",
        jobs: noisy_jobs("fig13", true, 1301),
    }
}

fn fig14() -> Preset {
    Preset {
        id: "fig14",
        description: "noisy coordination signal, trailing throughput (N=32)",
        jobs: noisy_jobs("fig14", false, 1401),
    }
}

fn fig15() -> Preset {
    Preset {
        id: "fig15",
        description: "noisy coordination signal, allocation fairness (N=32)",
        jobs: noisy_jobs("fig15", false, 1501),
    }
}

fn baseline_jobs(id: &'static str, seed_base: u64) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (offset, &n) in [4usize, 8, 16].iter().enumerate() {
        let config = ScenarioConfig {
            scenario_id: id.to_string(),
            n_agents: n,
            n_channels: 1,
            n_signals: 1,
            horizon: 100_000,
            seed: seed_base + offset as u64,
            ..ScenarioConfig::default()
        };
        for runner in [
            RunnerKind::RegretMatching,
            RunnerKind::PolyWeights,
            RunnerKind::Static,
        ] {
            jobs.push(Job {
                runner,
                config: config.clone(),
            });
        }
    }
    jobs
}

fn fig16() -> Preset {
    Preset {
        id: "fig16",
        description: "generic learners vs the table learner, rounds to converge (K=1)",
        jobs: baseline_jobs("fig16", 1601),
    }
}

fn fig17() -> Preset {
    Preset {
        id: "fig17",
        description: "generic learners vs the table learner, final fairness (K=1)",
        jobs: baseline_jobs("fig17", 1701),
    }
}

/// All built-in presets, in figure order.
pub fn presets() -> Vec<Preset> {
    vec![
        fig01(),
        fig02(),
        fig03(),
        fig04(),
        fig05(),
        fig06(),
        fig07(),
        fig08(),
        fig09(),
        fig10(),
        fig11(),
        fig12(),
        fig13(),
        fig14(),
        fig15(),
        fig16(),
        fig17(),
    ]
}

/// Look a preset up by id.
pub fn preset(id: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.id == id)
}
