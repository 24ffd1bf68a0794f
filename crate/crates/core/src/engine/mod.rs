//! Time-budgeted evolutionary campaigns.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::fitness::{branch_fitness, feedback_score, structure_score, FitnessMode};
use crate::genetic::{
    one_point_crossover, reorder_mutation, tournament_select, Individual, Population,
    SelectionError, Shapes,
};
use crate::grammar::{
    generate_random_within, learn_probabilities, mutate_probabilities, sample_weighted_within, GenerationError,
    Grammar, LearnError, ProbabilisticGrammar,
};
use crate::harness::{Coverage, ExceptionInfo, ExecutionOutcome, HarnessError, Target, TargetInfo};
use crate::tree::DerivationTree;

mod config;
mod stats;

pub use config::{
    ClockMode, ConfigError, CostModel, ExperimentConfig, ExperimentId, InitialInput, MutationMode,
    DEFAULT_MAX_DEPTH,
};
pub use stats::{MetricStats, Metric};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("this configuration learns from samples, but none were given")]
    MissingSamples,
    #[error("sample {}: {}", .0.index + 1, .0.source)]
    Sample(#[from] LearnError),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no targets selected")]
    NoTargets,
    #[error("writing inputs: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything a campaign runs against.
#[derive(Clone)]
pub struct FuzzContext {
    pub grammar: Arc<Grammar>,
    pub shapes: Shapes,
    pub samples: Vec<String>,
    pub targets: Vec<Arc<dyn Target>>,
}

impl FuzzContext {
    pub fn new(grammar: Arc<Grammar>, samples: Vec<String>, targets: Vec<Arc<dyn Target>>) -> Self {
        let shapes = Shapes::detect(&grammar);
        FuzzContext {
            grammar,
            shapes,
            samples,
            targets,
        }
    }

    pub fn target_infos(&self) -> Vec<TargetInfo> {
        self.targets.iter().map(|t| t.info().clone()).collect()
    }
}

/// Work charged to a clock so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClockUsage {
    pub executions: u64,
    pub input_bytes: u64,
    pub probe_events: u64,
    pub generated_nodes: u64,
    pub learned_nodes: u64,
    pub edited_nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeWork {
    Generated,
    Learned,
    Edited,
}

/// Budget clock of one run.
#[derive(Debug, Clone)]
pub struct Clock {
    mode: ClockMode,
    cost: CostModel,
    started: Instant,
    charged_ns: f64,
    usage: ClockUsage,
}

impl Clock {
    pub fn new(mode: ClockMode, cost: CostModel) -> Self {
        Clock {
            mode,
            cost,
            started: Instant::now(),
            charged_ns: 0.0,
            usage: ClockUsage::default(),
        }
    }

    pub fn elapsed(&self) -> Duration {
        match self.mode {
            ClockMode::Virtual => Duration::from_nanos(self.charged_ns as u64),
            ClockMode::Wall => self.started.elapsed(),
        }
    }

    pub fn usage(&self) -> ClockUsage {
        self.usage
    }

    fn charge_execution(&mut self, input_len: usize, outcome: &ExecutionOutcome, measured: bool) {
        self.usage.executions += 1;
        if measured {
            self.charged_ns += outcome.duration.as_nanos() as f64;
            return;
        }
        self.usage.input_bytes += input_len as u64;
        self.usage.probe_events += outcome.events;
        self.charged_ns += self.cost.per_execution
            + self.cost.per_input_byte * input_len as f64
            + self.cost.per_probe_event * outcome.events as f64;
    }

    fn charge_nodes(&mut self, work: NodeWork, nodes: usize) {
        let (count, rate) = match work {
            NodeWork::Generated => (&mut self.usage.generated_nodes, self.cost.per_generated_node),
            NodeWork::Learned => (&mut self.usage.learned_nodes, self.cost.per_learned_node),
            NodeWork::Edited => (&mut self.usage.edited_nodes, self.cost.per_edited_node),
        };
        *count += nodes as u64;
        self.charged_ns += rate * nodes as f64;
    }
}

/// What a run has accumulated so far.
#[derive(Debug, Clone)]
pub struct CampaignState {
    pub generation: u64,
    /// Union of everything covered, per target.
    pub cumulative: Vec<Coverage>,
    /// First generation in which each (target index, exception) appeared.
    pub exceptions: BTreeMap<(usize, ExceptionInfo), u64>,
    pub executions: u64,
    /// The grammar model that generation draws from.
    pub model: ProbabilisticGrammar,
    pub clock: Clock,
}

impl CampaignState {
    pub fn new(cfg: &ExperimentConfig, ctx: &FuzzContext) -> Result<Self, EngineError> {
        Ok(CampaignState {
            generation: 0,
            cumulative: vec![Coverage::default(); ctx.targets.len()],
            exceptions: BTreeMap::new(),
            executions: 0,
            model: initial_model(cfg, ctx)?,
            clock: Clock::new(cfg.clock, cfg.cost),
        })
    }

    fn known(&self, target: usize) -> BTreeSet<ExceptionInfo> {
        self.exceptions
            .keys()
            .filter(|(t, _)| *t == target)
            .map(|(_, e)| e.clone())
            .collect()
    }
}

fn initial_model(cfg: &ExperimentConfig, ctx: &FuzzContext) -> Result<ProbabilisticGrammar, EngineError> {
    match cfg.initial_input {
        InitialInput::RandomFromGrammar => Ok(ProbabilisticGrammar::uniform(ctx.grammar.clone())),
        InitialInput::ProbabilisticFromSamples => {
            if ctx.samples.is_empty() {
                return Err(EngineError::MissingSamples);
            }
            Ok(learn_probabilities(ctx.grammar.clone(), &ctx.samples)?)
        }
    }
}

/// Builds the first generation, unevaluated.
pub fn init_population<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    ctx: &FuzzContext,
    state: &mut CampaignState,
    rng: &mut R,
) -> Result<Population, EngineError> {
    let mut members = Vec::with_capacity(cfg.population_size);
    for _ in 0..cfg.population_size {
        let tree = match cfg.initial_input {
            InitialInput::RandomFromGrammar => generate_random_within(&ctx.grammar, cfg.max_depth, cfg.max_nodes, rng)?,
            InitialInput::ProbabilisticFromSamples => {
                sample_weighted_within(&state.model, cfg.max_depth, cfg.max_nodes, rng)?
            }
        };
        let member = Individual::new(tree);
        state.clock.charge_nodes(NodeWork::Generated, member.node_count());
        members.push(member);
    }
    Ok(Population::new(members))
}

/// Runs every unevaluated member against all targets, folds the outcomes
/// into `state`, and refreshes fitness.
pub fn evaluate(
    pop: &mut Population,
    cfg: &ExperimentConfig,
    ctx: &FuzzContext,
    state: &mut CampaignState,
) -> Result<(), EngineError> {
    let pending: Vec<usize> = (0..pop.members.len())
        .filter(|&i| pop.members[i].outcomes.is_none())
        .collect();
    let timeout = cfg.exec_timeout;
    let results: Vec<Result<Vec<ExecutionOutcome>, HarnessError>> = pending
        .par_iter()
        .map(|&i| {
            let text = pop.members[i].text();
            ctx.targets.iter().map(|t| t.execute(text, timeout)).collect()
        })
        .collect();

    let known: Vec<BTreeSet<ExceptionInfo>> = (0..ctx.targets.len()).map(|t| state.known(t)).collect();
    for (&i, result) in pending.iter().zip(results) {
        let outcomes = result?;
        let member = &mut pop.members[i];
        let mut feedback = 0.0;
        for (t, o) in outcomes.iter().enumerate() {
            state
                .clock
                .charge_execution(member.text().len(), o, ctx.targets[t].charges_measured_time());
            state.executions += 1;
            state.cumulative[t].absorb(o);
            if let Some(e) = &o.exception {
                state
                    .exceptions
                    .entry((t, e.clone()))
                    .or_insert(state.generation);
            }
            feedback += feedback_score(o, &known[t]);
        }
        member.feedback = Some(feedback / outcomes.len().max(1) as f64);
        member.outcomes = Some(outcomes.into());
    }
    assign_fitness(pop, cfg, ctx)
}

fn assign_fitness(pop: &mut Population, cfg: &ExperimentConfig, ctx: &FuzzContext) -> Result<(), EngineError> {
    match cfg.fitness.mode {
        FitnessMode::BranchCoverage => {
            for m in &mut pop.members {
                if m.fitness.is_some() {
                    continue;
                }
                let outcomes = m.outcomes.as_deref().unwrap_or_default();
                let mut total = 0.0;
                for (o, t) in outcomes.iter().zip(&ctx.targets) {
                    total += branch_fitness(o.covered_branches.len(), t.info().b_total)
                        .map_err(|e| ConfigError::Invalid(format!("{}: {e}", t.info().name)))?;
                }
                m.fitness = Some(total / outcomes.len().max(1) as f64);
            }
        }
        FitnessMode::Weighted => {
            let max_nodes = pop.members.iter().map(Individual::node_count).max().unwrap_or(0);
            for m in &mut pop.members {
                let structure = structure_score(m.node_count(), max_nodes);
                let feedback = m.feedback.unwrap_or(0.0);
                m.fitness = Some(cfg.fitness.w_feedback * feedback + cfg.fitness.w_structure * structure);
            }
        }
    }
    Ok(())
}

/// Child built from `parent`'s material; keeps the parent's evaluation when
/// the text did not change.
fn derive(parent: &Individual, tree: DerivationTree) -> Individual {
    let child = Individual::new(tree);
    if child.text() == parent.text() {
        parent.clone()
    } else {
        child
    }
}

/// Indices of the `n` best members.
fn elite_indices(pop: &Population, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pop.members.len()).collect();
    order.sort_by(|&a, &b| {
        let (ma, mb) = (&pop.members[a], &pop.members[b]);
        mb.fitness
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&ma.fitness.unwrap_or(f64::NEG_INFINITY))
            .then(ma.node_count().cmp(&mb.node_count()))
            .then(a.cmp(&b))
    });
    order.truncate(n);
    order
}

/// Produces and evaluates the next generation.
pub fn step_generation<R: Rng + ?Sized>(
    pop: &Population,
    cfg: &ExperimentConfig,
    ctx: &FuzzContext,
    state: &mut CampaignState,
    rng: &mut R,
) -> Result<Population, EngineError> {
    let size = pop.members.len();
    let k = cfg.tournament_k.min(size);
    let elites = elite_indices(pop, cfg.elitism_count.min(size));
    let mut next: Vec<Individual> = elites.iter().map(|&i| pop.members[i].clone()).collect();
    let slots = size - next.len();

    if cfg.mutation_mode == MutationMode::GrammarProbability {
        let mut parents = Vec::with_capacity(slots);
        for _ in 0..slots {
            parents.push(tournament_select(pop, k, rng)?);
        }
        if !parents.is_empty() {
            let trees: Vec<&DerivationTree> = parents.iter().map(|&i| pop.members[i].tree()).collect();
            state
                .clock
                .charge_nodes(NodeWork::Learned, parents.iter().map(|&i| pop.members[i].node_count()).sum());
            let learned = ProbabilisticGrammar::from_trees(ctx.grammar.clone(), trees);
            state.model = mutate_probabilities(&learned, cfg.probability_mutation_rate, rng);
        }
        let mut fresh = Vec::with_capacity(slots);
        for _ in 0..slots {
            let tree = sample_weighted_within(&state.model, cfg.max_depth, cfg.max_nodes, rng)?;
            let member = Individual::new(tree);
            state.clock.charge_nodes(NodeWork::Generated, member.node_count());
            fresh.push(member);
        }
        if cfg.crossover_enabled {
            for pair in fresh.chunks_mut(2) {
                if let [a, b] = pair {
                    if rng.random_bool(cfg.crossover_prob) {
                        cross(ctx, state, a, b, rng);
                    }
                }
            }
        }
        next.extend(fresh);
    } else {
        while next.len() < size {
            let i = tournament_select(pop, k, rng)?;
            let j = tournament_select(pop, k, rng)?;
            let mut a = pop.members[i].clone();
            let mut b = pop.members[j].clone();
            if cfg.crossover_enabled && rng.random_bool(cfg.crossover_prob) {
                cross(ctx, state, &mut a, &mut b, rng);
            }
            if cfg.mutation_mode == MutationMode::ReorderElements {
                for c in [&mut a, &mut b] {
                    if rng.random_bool(cfg.mutation_prob) {
                        let (tree, path) = reorder_mutation(&ctx.shapes, c.tree(), rng);
                        if path.is_some() {
                            *c = derive(c, tree);
                            state.clock.charge_nodes(NodeWork::Edited, c.node_count());
                        }
                    }
                }
            }
            next.push(a);
            if next.len() < size {
                next.push(b);
            }
        }
    }

    state.generation += 1;
    let mut out = Population {
        members: next,
        generation: pop.generation + 1,
    };
    evaluate(&mut out, cfg, ctx, state)?;
    Ok(out)
}

/// Crossover in place; parents that cannot recombine stay as they are.
fn cross<R: Rng + ?Sized>(
    ctx: &FuzzContext,
    state: &mut CampaignState,
    a: &mut Individual,
    b: &mut Individual,
    rng: &mut R,
) {
    if let Ok((t1, t2, _)) = one_point_crossover(&ctx.grammar, &ctx.shapes, a.tree(), b.tree(), rng) {
        let c1 = derive(a, t1);
        let c2 = derive(b, t2);
        state
            .clock
            .charge_nodes(NodeWork::Edited, c1.node_count() + c2.node_count());
        *a = c1;
        *b = c2;
    }
}

/// Per-target results of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRunStats {
    pub target: String,
    /// Per-input coverage over the final population, indexed by [`Metric`].
    pub per_input: [MetricStats; 3],
    /// Coverage of everything the run executed, indexed by [`Metric`].
    pub cumulative: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// 1-based.
    pub run_id: usize,
    pub seed: u64,
    pub generations: u64,
    pub executions: u64,
    /// Budget clock reading when the run stopped.
    pub elapsed: Duration,
    pub wall_time: Duration,
    pub targets: Vec<TargetRunStats>,
    /// (target name, exception) to first generation.
    pub exceptions: BTreeMap<(String, ExceptionInfo), u64>,
    pub final_inputs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub config: ExperimentConfig,
    pub targets: Vec<TargetInfo>,
    pub runs: Vec<RunRecord>,
    pub wall_time: Duration,
}

impl CampaignReport {
    /// Number of runs in which each exception was triggered.
    pub fn exception_frequency(&self) -> BTreeMap<(String, ExceptionInfo), usize> {
        let mut out = BTreeMap::new();
        for r in &self.runs {
            for key in r.exceptions.keys() {
                *out.entry(key.clone()).or_insert(0) += 1;
            }
        }
        out
    }

    /// Runs in which `target` raised an exception of `kind`, at any location.
    pub fn runs_triggering(&self, target: &str, kind: &str) -> usize {
        self.runs
            .iter()
            .filter(|r| r.exceptions.keys().any(|(t, e)| t == target && e.kind == kind))
            .count()
    }
}

/// Per-input and cumulative statistics for one population.
pub fn run_stats(pop: &Population, targets: &[TargetInfo], state: &CampaignState) -> Vec<TargetRunStats> {
    targets
        .iter()
        .enumerate()
        .map(|(t, info)| {
            let per_input = Metric::ALL.map(|metric| {
                let values: Vec<f64> = pop
                    .members
                    .iter()
                    .filter_map(|m| m.outcomes.as_ref().map(|o| metric.of_outcome(&o[t], info)))
                    .collect();
                MetricStats::of(&values)
            });
            let cumulative = Metric::ALL.map(|metric| metric.of_coverage(&state.cumulative[t], info));
            TargetRunStats {
                target: info.name.clone(),
                per_input,
                cumulative,
            }
        })
        .collect()
}

/// One complete run with the given seed.
pub fn run_once(
    cfg: &ExperimentConfig,
    ctx: &FuzzContext,
    run_id: usize,
) -> Result<(RunRecord, Population), EngineError> {
    let started = Instant::now();
    let seed = cfg.master_seed.wrapping_add(run_id as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = CampaignState::new(cfg, ctx)?;
    let mut pop = init_population(cfg, ctx, &mut state, &mut rng)?;
    evaluate(&mut pop, cfg, ctx, &mut state)?;
    while state.clock.elapsed() < cfg.time_budget {
        pop = step_generation(&pop, cfg, ctx, &mut state, &mut rng)?;
    }
    let infos = ctx.target_infos();
    let record = RunRecord {
        run_id,
        seed,
        generations: state.generation,
        executions: state.executions,
        elapsed: state.clock.elapsed(),
        wall_time: started.elapsed(),
        targets: run_stats(&pop, &infos, &state),
        exceptions: state
            .exceptions
            .iter()
            .map(|((t, e), g)| ((infos[*t].name.clone(), e.clone()), *g))
            .collect(),
        final_inputs: pop.members.iter().map(|m| m.text().to_string()).collect(),
    };
    Ok((record, pop))
}

/// Runs `cfg.runs` independent runs (seed = master seed + run index) and
/// collects their records. With `out`, each run's final population is
/// written to `<out>/run-<r>/inputs/`.
pub fn run_campaign(
    cfg: &ExperimentConfig,
    ctx: &FuzzContext,
    out: Option<&Path>,
) -> Result<CampaignReport, EngineError> {
    cfg.validate()?;
    if ctx.targets.is_empty() {
        return Err(EngineError::NoTargets);
    }
    let started = Instant::now();
    let mut runs = Vec::with_capacity(cfg.runs);
    for r in 1..=cfg.runs {
        let (record, _) = run_once(cfg, ctx, r)?;
        if let Some(dir) = out {
            persist_inputs(dir, &record)?;
        }
        runs.push(record);
    }
    Ok(CampaignReport {
        config: cfg.clone(),
        targets: ctx.target_infos(),
        runs,
        wall_time: started.elapsed(),
    })
}

pub fn persist_inputs(out: &Path, record: &RunRecord) -> std::io::Result<()> {
    let dir = out.join(format!("run-{}", record.run_id)).join("inputs");
    std::fs::create_dir_all(&dir)?;
    for (i, text) in record.final_inputs.iter().enumerate() {
        std::fs::write(dir.join(format!("{i:04}.txt")), text)?;
    }
    Ok(())
}
