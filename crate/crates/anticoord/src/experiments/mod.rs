//! Scenario configuration, replication management, the scenario runners,
//! and CSV emission.
//!
//! A scenario is `runs` independent replications of one parameterized
//! experiment. Run `r` draws all of its randomness from a dedicated ChaCha8
//! stream derived from `(seed, r)`, so results are reproducible bit for bit
//! and adding runs never disturbs earlier ones. Runs execute in parallel;
//! records come back in deterministic order regardless of scheduling.

mod csv;
mod presets;
mod runners;

pub use csv::{format_value, write_csv, write_summary_csv};
pub use presets::{preset, presets, Job, Preset, RunnerKind};
pub use runners::{
    run_baselines, run_job, run_joining, run_noisy, run_random_access, run_restarting, run_static,
    BaselineLearner, BaselineRun, JoiningRun, NoisyRun, RestartRun, StaticRun,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{BackoffScheme, InitMode};
use crate::game::{GameShape, NoiseParams, SignalMode, SignalNoiseModel};
use crate::metrics::confidence_interval;
use crate::{Error, Result};

/// Name of the RNG recorded in every parameter snapshot.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Which table a (re)joining agent starts from; the concrete transmit
/// probability for `Polite` depends on the scenario (see [`ScenarioConfig`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    Random,
    Greedy,
    Polite,
}

/// Growth plan for the joining scenario: start with a fraction of the
/// population and add one agent after every convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JoinPlan {
    pub initial_fraction: f64,
    pub phase_horizon: u64,
}

impl Default for JoinPlan {
    fn default() -> Self {
        Self {
            initial_fraction: 0.25,
            phase_horizon: 100_000,
        }
    }
}

/// Everything one scenario needs: shape, learner parameters, dynamics,
/// noise, and replication control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub n_agents: usize,
    pub n_channels: usize,
    pub n_signals: usize,
    pub scheme: BackoffScheme,
    pub init: InitKind,
    pub p_feedback: f64,
    pub p_signal: f64,
    pub signal_noise_model: SignalNoiseModel,
    pub signal_mode: SignalMode,
    pub p_restart: f64,
    pub join_plan: Option<JoinPlan>,
    pub collision_cost: f64,
    pub pw_learning_rate: f64,
    pub horizon: u64,
    pub runs: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario_id: "custom".into(),
            n_agents: 8,
            n_channels: 1,
            n_signals: 8,
            scheme: BackoffScheme::default(),
            init: InitKind::Random,
            p_feedback: 0.0,
            p_signal: 0.0,
            signal_noise_model: SignalNoiseModel::default(),
            signal_mode: SignalMode::default(),
            p_restart: 0.0,
            join_plan: None,
            collision_cost: 1.0,
            pw_learning_rate: 0.1,
            horizon: 1_000_000,
            runs: 128,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn shape(&self) -> Result<GameShape> {
        GameShape::new(self.n_agents, self.n_channels, self.n_signals)
    }

    pub fn noise(&self) -> Result<NoiseParams> {
        NoiseParams::new(self.p_feedback, self.p_signal)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape()?;
        self.noise()?;
        self.scheme.validate()?;
        if !(0.0..=1.0).contains(&self.p_restart) {
            return Err(Error::Config(format!(
                "p_restart must be in [0,1], got {}",
                self.p_restart
            )));
        }
        if self.collision_cost < 0.0 {
            return Err(Error::Config(format!(
                "collision cost must be nonnegative, got {}",
                self.collision_cost
            )));
        }
        if !(self.pw_learning_rate > 0.0 && self.pw_learning_rate < 1.0) {
            return Err(Error::Config(format!(
                "learning rate must lie strictly in (0,1), got {}",
                self.pw_learning_rate
            )));
        }
        if self.runs == 0 {
            return Err(Error::Config("need at least one run".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least one slot".into()));
        }
        if let Some(plan) = &self.join_plan {
            if !(plan.initial_fraction > 0.0 && plan.initial_fraction <= 1.0) {
                return Err(Error::Config(format!(
                    "initial join fraction must lie in (0,1], got {}",
                    plan.initial_fraction
                )));
            }
            if plan.phase_horizon == 0 {
                return Err(Error::Config("phase horizon must be positive".into()));
            }
        }
        Ok(())
    }

    /// Init mode for the initial population and for restarts: polite agents
    /// know the full population and transmit with probability `C/N`.
    pub fn init_mode(&self) -> InitMode {
        match self.init {
            InitKind::Random => InitMode::RandomChannel,
            InitKind::Greedy => InitMode::Greedy,
            InitKind::Polite => InitMode::Polite {
                known_population: self.n_agents,
            },
        }
    }

    /// Init mode for an agent joining a system of `present` agents: polite
    /// joiners transmit with probability `1/present`, expressed through the
    /// population count that makes `C/known_population` equal it.
    pub fn join_init_mode(&self, present: usize) -> InitMode {
        match self.init {
            InitKind::Random => InitMode::RandomChannel,
            InitKind::Greedy => InitMode::Greedy,
            InitKind::Polite => InitMode::Polite {
                known_population: self.n_channels * present.max(1),
            },
        }
    }

    /// Canonical key-sorted JSON snapshot of every parameter, including the
    /// RNG algorithm. One CSV column holds this string.
    pub fn param_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        value
            .as_object_mut()
            .expect("config is a JSON object")
            .insert("rng".into(), serde_json::Value::String(RNG_ALGORITHM.into()));
        value.to_string()
    }

    /// The RNG stream for one run: all runs share a key derived from the
    /// master seed and differ only in the stream index, so they are mutually
    /// independent and individually reproducible.
    pub fn run_rng(&self, run: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(run as u64);
        rng
    }
}

/// The fixed registry of metric names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetricName {
    ConvergenceSteps,
    JainAllocation,
    Throughput,
    GroupFairness,
    MaxInternalRegret,
    ConvergedFlag,
}

impl MetricName {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricName::ConvergenceSteps => "convergence_steps",
            MetricName::JainAllocation => "jain_allocation",
            MetricName::Throughput => "throughput",
            MetricName::GroupFairness => "group_fairness",
            MetricName::MaxInternalRegret => "max_internal_regret",
            MetricName::ConvergedFlag => "converged_flag",
        }
    }
}

/// One measured value: `(scenario, run, seed, parameter snapshot, metric)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub scenario_id: String,
    pub run: usize,
    pub seed: u64,
    pub param_json: String,
    pub metric: MetricName,
    pub value: f64,
}

impl MetricRecord {
    pub fn new(config: &ScenarioConfig, run: usize, metric: MetricName, value: f64) -> Self {
        Self {
            scenario_id: config.scenario_id.clone(),
            run,
            seed: config.seed,
            param_json: config.param_json(),
            metric,
            value,
        }
    }
}

/// Per-group mean and confidence halfwidth; the halfwidth is absent for
/// singleton groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub param_json: String,
    pub metric: MetricName,
    pub n: usize,
    pub mean: f64,
    pub ci_halfwidth: Option<f64>,
}

/// Group records by (scenario, parameter snapshot, metric) and summarize
/// each group with its mean and 95% confidence halfwidth.
pub fn summarize(records: &[MetricRecord]) -> Vec<SummaryRow> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(&str, &str, MetricName), Vec<f64>> = BTreeMap::new();
    for record in records {
        groups
            .entry((
                record.scenario_id.as_str(),
                record.param_json.as_str(),
                record.metric,
            ))
            .or_default()
            .push(record.value);
    }
    groups
        .into_iter()
        .map(|((scenario_id, param_json, metric), values)| {
            let (mean, hw) = if values.len() >= 2 {
                let (m, h) = confidence_interval(&values).expect("n >= 2");
                (m, Some(h))
            } else {
                (values[0], None)
            };
            SummaryRow {
                scenario_id: scenario_id.to_string(),
                param_json: param_json.to_string(),
                metric,
                n: values.len(),
                mean,
                ci_halfwidth: hw,
            }
        })
        .collect()
}
