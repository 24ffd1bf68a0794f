use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::fitness::{FitnessConfig, FitnessError, FitnessMode};
use crate::grammar::DEFAULT_MAX_NODES;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    Preset(u8),
    Custom,
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentId::Preset(n) => write!(f, "{n}"),
            ExperimentId::Custom => f.write_str("custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialInput {
    ProbabilisticFromSamples,
    RandomFromGrammar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationMode {
    None,
    GrammarProbability,
    ReorderElements,
}

/// How the time budget is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockMode {
    /// Time is charged per execution and per tree node by [`CostModel`], so
    /// a seed fixes the whole run. Targets that report
    /// `charges_measured_time` are charged their real duration instead,
    /// which gives up that determinism.
    Virtual,
    Wall,
}

/// Nanoseconds charged to the virtual clock. The defaults were fitted
/// against wall time of optimized builds and err on the slow side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub per_execution: f64,
    pub per_input_byte: f64,
    pub per_probe_event: f64,
    /// Per node drawn from the grammar.
    pub per_generated_node: f64,
    /// Per node read while learning rule probabilities.
    pub per_learned_node: f64,
    /// Per node of an offspring built by crossover or mutation.
    pub per_edited_node: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            per_execution: 2000.0,
            per_input_byte: 16.0,
            per_probe_event: 70.0,
            per_generated_node: 105.0,
            per_learned_node: 10.0,
            per_edited_node: 135.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub initial_input: InitialInput,
    pub fitness: FitnessConfig,
    pub crossover_enabled: bool,
    pub mutation_mode: MutationMode,
    pub population_size: usize,
    pub time_budget: Duration,
    pub runs: usize,
    pub tournament_k: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elitism_count: usize,
    pub max_depth: u32,
    /// Soft cap on the size of generated trees.
    pub max_nodes: usize,
    pub master_seed: u64,
    /// Per-rule chance of resampling its probabilities in
    /// [`MutationMode::GrammarProbability`].
    pub probability_mutation_rate: f64,
    /// Set when the preset's fitness weights were not given and (0.5, 0.5)
    /// was assumed.
    pub weights_assumed: bool,
    pub clock: ClockMode,
    pub cost: CostModel,
    /// Per-execution limit; a run that exceeds it reports `Timeout`.
    pub exec_timeout: Duration,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown experiment `{0}` (expected 1-7 or custom)")]
    UnknownExperiment(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
}

pub const DEFAULT_MAX_DEPTH: u32 = 48;

impl ExperimentConfig {
    fn base(id: ExperimentId) -> Self {
        ExperimentConfig {
            id,
            initial_input: InitialInput::RandomFromGrammar,
            fitness: FitnessConfig::branch_coverage(),
            crossover_enabled: true,
            mutation_mode: MutationMode::ReorderElements,
            population_size: 100,
            time_budget: Duration::from_secs(600),
            runs: 30,
            tournament_k: 4,
            crossover_prob: 0.9,
            mutation_prob: 0.3,
            elitism_count: 1,
            max_depth: DEFAULT_MAX_DEPTH,
            max_nodes: DEFAULT_MAX_NODES,
            master_seed: 0,
            probability_mutation_rate: 0.1,
            weights_assumed: false,
            clock: ClockMode::Virtual,
            cost: CostModel::default(),
            exec_timeout: Duration::from_secs(5),
        }
    }

    /// The seven experiment rows. 1-4 evolve a probabilistic grammar under
    /// weighted fitness; 5-7 evolve the inputs under branch coverage.
    pub fn preset(n: u8) -> Result<Self, ConfigError> {
        let mut c = Self::base(ExperimentId::Preset(n));
        let weighted = |f, s| FitnessConfig::weighted(f, s).expect("preset weights are valid");
        match n {
            1..=4 => {
                c.initial_input = InitialInput::ProbabilisticFromSamples;
                c.crossover_enabled = false;
                c.mutation_mode = MutationMode::GrammarProbability;
                c.fitness = match n {
                    3 => weighted(0.9, 0.1),
                    4 => weighted(0.1, 0.9),
                    _ => weighted(0.5, 0.5),
                };
                c.weights_assumed = n == 1;
            }
            5 | 6 => {
                c.initial_input = InitialInput::ProbabilisticFromSamples;
                c.mutation_mode = if n == 5 {
                    MutationMode::None
                } else {
                    MutationMode::ReorderElements
                };
            }
            7 => {}
            _ => return Err(ConfigError::UnknownExperiment(n.to_string())),
        }
        Ok(c)
    }

    /// Starts from the defaults of experiment 7 with the id set to custom.
    pub fn custom() -> Self {
        Self::base(ExperimentId::Custom)
    }

    pub fn from_name(name: &str) -> Result<Self, ConfigError> {
        match name.trim() {
            "custom" => Ok(Self::custom()),
            s => s
                .parse::<u8>()
                .map_err(|_| ConfigError::UnknownExperiment(s.to_string()))
                .and_then(Self::preset),
        }
    }

    /// Overrides one field by key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        fn num<T: FromStr>(v: &str, bad: impl Fn() -> ConfigError) -> Result<T, ConfigError> {
            v.trim().parse().map_err(|_| bad())
        }
        let secs = |v: &str| -> Result<Duration, ConfigError> {
            let s: f64 = num(v, bad)?;
            Duration::try_from_secs_f64(s).map_err(|_| bad())
        };
        match key {
            "initial_input" => {
                self.initial_input = match value {
                    "probabilistic" | "ProbabilisticFromSamples" => {
                        InitialInput::ProbabilisticFromSamples
                    }
                    "random" | "RandomFromGrammar" => InitialInput::RandomFromGrammar,
                    _ => return Err(bad()),
                }
            }
            "fitness" => {
                self.fitness.mode = match value {
                    "branch" | "BranchCoverage" => FitnessMode::BranchCoverage,
                    "weighted" | "Weighted" => FitnessMode::Weighted,
                    _ => return Err(bad()),
                }
            }
            "w_feedback" => {
                self.fitness.w_feedback = num(value, bad)?;
                self.weights_assumed = false;
            }
            "w_structure" => {
                self.fitness.w_structure = num(value, bad)?;
                self.weights_assumed = false;
            }
            "crossover" => self.crossover_enabled = parse_bool(value).ok_or_else(bad)?,
            "mutation" => {
                self.mutation_mode = match value {
                    "none" | "None" => MutationMode::None,
                    "grammar" | "GrammarProbability" => MutationMode::GrammarProbability,
                    "reorder" | "ReorderElements" => MutationMode::ReorderElements,
                    _ => return Err(bad()),
                }
            }
            "population_size" | "pop_size" => self.population_size = num(value, bad)?,
            "time_budget" | "seconds" => self.time_budget = secs(value)?,
            "runs" => self.runs = num(value, bad)?,
            "tournament_k" => self.tournament_k = num(value, bad)?,
            "crossover_prob" => self.crossover_prob = num(value, bad)?,
            "mutation_prob" => self.mutation_prob = num(value, bad)?,
            "elitism" | "elitism_count" => self.elitism_count = num(value, bad)?,
            "max_depth" => self.max_depth = num(value, bad)?,
            "max_nodes" => self.max_nodes = num(value, bad)?,
            "seed" | "master_seed" => self.master_seed = num(value, bad)?,
            "probability_mutation_rate" => self.probability_mutation_rate = num(value, bad)?,
            "clock" => {
                self.clock = match value {
                    "virtual" => ClockMode::Virtual,
                    "wall" => ClockMode::Wall,
                    _ => return Err(bad()),
                }
            }
            "exec_timeout" => self.exec_timeout = secs(value)?,
            "cost_per_execution" => self.cost.per_execution = num(value, bad)?,
            "cost_per_input_byte" => self.cost.per_input_byte = num(value, bad)?,
            "cost_per_probe_event" => self.cost.per_probe_event = num(value, bad)?,
            "cost_per_generated_node" => self.cost.per_generated_node = num(value, bad)?,
            "cost_per_learned_node" => self.cost.per_learned_node = num(value, bad)?,
            "cost_per_edited_node" => self.cost.per_edited_node = num(value, bad)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies a `key = value` file. Blank lines and `#` comments are
    /// skipped. Keys not known to the engine are returned for the caller.
    pub fn apply_text<'t>(&mut self, text: &'t str) -> Result<Vec<(&'t str, &'t str)>, ConfigError> {
        let mut rest = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            match self.set(k, v) {
                Err(ConfigError::UnknownKey(_)) => rest.push((k, v)),
                other => other?,
            }
        }
        Ok(rest)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        self.fitness.validate()?;
        if self.population_size == 0 {
            return invalid("population_size must be positive");
        }
        if self.runs == 0 {
            return invalid("runs must be positive");
        }
        if self.tournament_k == 0 {
            return invalid("tournament_k must be positive");
        }
        if self.elitism_count > self.population_size {
            return invalid("elitism exceeds population_size");
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
            ("probability_mutation_rate", self.probability_mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return invalid(&format!("{name} must lie in [0, 1]"));
            }
        }
        if self.max_depth == 0 {
            return invalid("max_depth must be positive");
        }
        if self.exec_timeout.is_zero() {
            return invalid("exec_timeout must be positive");
        }
        let c = &self.cost;
        if [
            c.per_execution,
            c.per_input_byte,
            c.per_probe_event,
            c.per_generated_node,
            c.per_learned_node,
            c.per_edited_node,
        ]
        .iter()
        .any(|v| !v.is_finite() || *v < 0.0)
        {
            return invalid("cost model values must be non-negative");
        }
        Ok(())
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_rows() {
        use InitialInput::*;
        use MutationMode as M;
        let rows = [
            (1, ProbabilisticFromSamples, Some((0.5, 0.5)), false, M::GrammarProbability),
            (2, ProbabilisticFromSamples, Some((0.5, 0.5)), false, M::GrammarProbability),
            (3, ProbabilisticFromSamples, Some((0.9, 0.1)), false, M::GrammarProbability),
            (4, ProbabilisticFromSamples, Some((0.1, 0.9)), false, M::GrammarProbability),
            (5, ProbabilisticFromSamples, None, true, M::None),
            (6, ProbabilisticFromSamples, None, true, M::ReorderElements),
            (7, RandomFromGrammar, None, true, M::ReorderElements),
        ];
        for (n, init, weights, crossover, mutation) in rows {
            let c = ExperimentConfig::preset(n).unwrap();
            assert_eq!(c.initial_input, init, "{n}");
            assert_eq!(c.crossover_enabled, crossover, "{n}");
            assert_eq!(c.mutation_mode, mutation, "{n}");
            match weights {
                Some((f, s)) => {
                    assert_eq!(c.fitness.mode, FitnessMode::Weighted);
                    assert_eq!((c.fitness.w_feedback, c.fitness.w_structure), (f, s));
                }
                None => assert_eq!(c.fitness.mode, FitnessMode::BranchCoverage),
            }
            assert_eq!(c.weights_assumed, n == 1);
            assert_eq!((c.population_size, c.runs), (100, 30));
            assert_eq!(c.time_budget, Duration::from_secs(600));
            c.validate().unwrap();
        }
        assert!(ExperimentConfig::preset(8).is_err());
        assert!(ExperimentConfig::from_name("x").is_err());
        assert_eq!(ExperimentConfig::from_name("custom").unwrap().id, ExperimentId::Custom);
    }

    #[test]
    fn key_value_overrides() {
        let mut c = ExperimentConfig::preset(7).unwrap();
        let rest = c
            .apply_text("# comment\nruns = 3\nseconds=1.5\nmutation = none\ntargets = all\n")
            .unwrap();
        assert_eq!(c.runs, 3);
        assert_eq!(c.time_budget, Duration::from_millis(1500));
        assert_eq!(c.mutation_mode, MutationMode::None);
        assert_eq!(rest, vec![("targets", "all")]);
        assert!(matches!(c.apply_text("runs"), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(c.set("runs", "x"), Err(ConfigError::BadValue { .. })));
        c.set("crossover_prob", "2").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut c = ExperimentConfig::preset(2).unwrap();
        c.set("w_feedback", "0.7").unwrap();
        assert!(c.validate().is_err());
        c.set("w_structure", "0.3").unwrap();
        c.validate().unwrap();
    }
}
