//! Fitness scores.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::harness::{ExceptionInfo, ExecutionOutcome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitnessMode {
    BranchCoverage,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessConfig {
    pub mode: FitnessMode,
    pub w_feedback: f64,
    pub w_structure: f64,
}

impl FitnessConfig {
    pub fn branch_coverage() -> Self {
        FitnessConfig {
            mode: FitnessMode::BranchCoverage,
            w_feedback: 0.0,
            w_structure: 0.0,
        }
    }

    pub fn weighted(w_feedback: f64, w_structure: f64) -> Result<Self, FitnessError> {
        let cfg = FitnessConfig {
            mode: FitnessMode::Weighted,
            w_feedback,
            w_structure,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), FitnessError> {
        if self.mode == FitnessMode::Weighted {
            let in_unit = |w: f64| (0.0..=1.0).contains(&w);
            if !in_unit(self.w_feedback)
                || !in_unit(self.w_structure)
                || (self.w_feedback + self.w_structure - 1.0).abs() > 1e-9
            {
                return Err(FitnessError::BadWeights(self.w_feedback, self.w_structure));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitnessError {
    #[error("target has no branches")]
    NoBranches,
    #[error("{b_exec} branches covered but only {b_total} exist")]
    TooManyBranches { b_exec: usize, b_total: u32 },
    #[error("score {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("weights ({0}, {1}) must lie in [0, 1] and sum to 1")]
    BadWeights(f64, f64),
    #[error("weighted fitness requested with a non-weighted configuration")]
    NotWeighted,
}

/// Percentage of a target's branches covered by one execution.
pub fn branch_fitness(b_exec: usize, b_total: u32) -> Result<f64, FitnessError> {
    if b_total == 0 {
        return Err(FitnessError::NoBranches);
    }
    if b_exec > b_total as usize {
        return Err(FitnessError::TooManyBranches { b_exec, b_total });
    }
    // One rounding: b_exec * 100 is exact in f64.
    Ok(b_exec as f64 * 100.0 / b_total as f64)
}

pub fn weighted_fitness(feedback: f64, structure: f64, cfg: &FitnessConfig) -> Result<f64, FitnessError> {
    if cfg.mode != FitnessMode::Weighted {
        return Err(FitnessError::NotWeighted);
    }
    for s in [feedback, structure] {
        if !(0.0..=1.0).contains(&s) {
            return Err(FitnessError::OutOfRange(s));
        }
    }
    Ok(cfg.w_feedback * feedback + cfg.w_structure * structure)
}

/// Exception-triggering reward. `known` is the campaign's exception history
/// before this input ran. Zero without an exception; otherwise 0.5 plus 0.5
/// times the share of campaign-wide exception types that this input
/// introduced.
pub fn feedback_score(outcome: &ExecutionOutcome, known: &BTreeSet<ExceptionInfo>) -> f64 {
    let Some(e) = &outcome.exception else {
        return 0.0;
    };
    let new = usize::from(!known.contains(e));
    let seen = (known.len() + new).max(1);
    0.5 + 0.5 * new as f64 / seen as f64
}

/// Node count relative to the largest member of the population.
pub fn structure_score(node_count: usize, max_node_count: usize) -> f64 {
    if max_node_count == 0 {
        return 0.0;
    }
    (node_count as f64 / max_node_count as f64).min(1.0)
}
