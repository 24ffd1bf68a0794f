//! Running inputs against instrumented targets.
//!
//! A target reports which of its branch sites an input reached and whether
//! it raised. Built-in targets run in-process; [`external::ExternalTarget`]
//! drives any program that speaks the coverage file format.

use std::collections::BTreeSet;
use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

pub mod external;
pub mod probe;
pub(crate) mod targets;
pub(crate) mod value;

pub use probe::Raise;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetInfo {
    pub name: String,
    /// Number of branch sites; coverage percentages are relative to it.
    pub b_total: u32,
    pub line_total: u32,
    pub function_total: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExceptionInfo {
    pub kind: String,
    pub location: String,
}

impl fmt::Display for ExceptionInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.kind, self.location)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionOutcome {
    pub covered_branches: BTreeSet<u32>,
    pub covered_lines: BTreeSet<u32>,
    pub covered_functions: BTreeSet<u32>,
    pub exception: Option<ExceptionInfo>,
    pub duration: Duration,
    /// Probe hits recorded during the run; a deterministic measure of work.
    pub events: u64,
    /// Hash of the input text.
    pub input_ref: String,
}

impl ExecutionOutcome {
    /// True when both outcomes agree on everything except timing.
    pub fn same_result(&self, other: &ExecutionOutcome) -> bool {
        self.covered_branches == other.covered_branches
            && self.covered_lines == other.covered_lines
            && self.covered_functions == other.covered_functions
            && self.exception == other.exception
            && self.events == other.events
            && self.input_ref == other.input_ref
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("target `{0}` is already registered")]
    DuplicateTarget(String),
    #[error("command not found: {0}")]
    CommandNotFound(String),
    #[error("failed to run `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("malformed coverage record on line {line}: {text:?}")]
    MalformedCoverage { line: usize, text: String },
    #[error("branch {id} reported but the target declares {b_total} branches")]
    BranchOutOfRange { id: u32, b_total: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait Target: Send + Sync {
    fn info(&self) -> &TargetInfo;

    /// Runs one input. Exceptions raised by the target are part of the
    /// outcome; `Err` means the harness itself could not run it.
    fn execute(&self, input: &str, timeout: Duration) -> Result<ExecutionOutcome, HarnessError>;

    /// Whether a virtual clock should charge the measured duration of each
    /// execution instead of estimating it from probe events.
    fn charges_measured_time(&self) -> bool {
        false
    }
}

/// An in-process target instrumented with [`probe`] calls.
pub struct FnTarget {
    info: TargetInfo,
    run: fn(&str) -> Result<(), Raise>,
}

impl FnTarget {
    pub fn new(info: TargetInfo, run: fn(&str) -> Result<(), Raise>) -> Self {
        FnTarget { info, run }
    }
}

impl Target for FnTarget {
    fn info(&self) -> &TargetInfo {
        &self.info
    }

    fn execute(&self, input: &str, timeout: Duration) -> Result<ExecutionOutcome, HarnessError> {
        Ok(run_instrumented(self.run, input, timeout))
    }
}

fn run_instrumented(
    run: fn(&str) -> Result<(), Raise>,
    input: &str,
    timeout: Duration,
) -> ExecutionOutcome {
    let start = Instant::now();
    probe::begin(start.checked_add(timeout));
    let result = panic::catch_unwind(AssertUnwindSafe(|| run(input)));
    let collected = probe::finish();
    let at_last_site = || {
        collected
            .last_site
            .map_or_else(|| "-".to_string(), |s| format!("B{s}"))
    };
    let exception = match result {
        Ok(Ok(())) => None,
        Ok(Err(raise)) => Some(ExceptionInfo {
            kind: raise.kind.to_string(),
            location: format!("B{}", raise.site),
        }),
        Err(payload) if payload.is::<probe::DeadlineExceeded>() => Some(ExceptionInfo {
            kind: "Timeout".into(),
            location: at_last_site(),
        }),
        Err(_) => Some(ExceptionInfo {
            kind: "Panic".into(),
            location: at_last_site(),
        }),
    };
    ExecutionOutcome {
        covered_branches: collected.branches,
        covered_lines: collected.lines,
        covered_functions: collected.functions,
        exception,
        duration: start.elapsed(),
        events: collected.events,
        input_ref: input_ref(input),
    }
}

/// FNV-1a over the input bytes, as 16 hex digits.
pub fn input_ref(input: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in input.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn builtin_targets() -> Vec<FnTarget> {
    targets::BUILTINS
        .iter()
        .map(|b| {
            FnTarget::new(
                TargetInfo {
                    name: b.name.to_string(),
                    b_total: b.branches,
                    line_total: probe::probe_lines(b.source).len() as u32,
                    function_total: b.functions,
                },
                b.run,
            )
        })
        .collect()
}

/// Infos of the five built-in targets, in registry order.
pub fn register_builtin_targets() -> Vec<TargetInfo> {
    builtin_targets().into_iter().map(|t| t.info).collect()
}

/// Named targets, immutable once handed to the engine.
#[derive(Clone, Default)]
pub struct Registry {
    targets: Vec<Arc<dyn Target>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        for t in builtin_targets() {
            r.targets.push(Arc::new(t));
        }
        r
    }

    pub fn register(&mut self, target: Arc<dyn Target>) -> Result<(), HarnessError> {
        let name = &target.info().name;
        if self.targets.iter().any(|t| &t.info().name == name) {
            return Err(HarnessError::DuplicateTarget(name.clone()));
        }
        self.targets.push(target);
        Ok(())
    }

    pub fn infos(&self) -> Vec<TargetInfo> {
        self.targets.iter().map(|t| t.info().clone()).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Target>, HarnessError> {
        self.targets
            .iter()
            .find(|t| t.info().name == name)
            .cloned()
            .ok_or_else(|| HarnessError::UnknownTarget(name.to_string()))
    }

    /// Resolves `all` or a comma-separated list of names.
    pub fn select(&self, spec: &str) -> Result<Vec<Arc<dyn Target>>, HarnessError> {
        if spec.trim() == "all" {
            return Ok(self.targets.clone());
        }
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| self.get(name))
            .collect()
    }

    pub fn execute(
        &self,
        name: &str,
        input: &str,
        timeout: Duration,
    ) -> Result<ExecutionOutcome, HarnessError> {
        self.get(name)?.execute(input, timeout)
    }
}

/// Union of coverage sets over any number of outcomes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Coverage {
    pub branches: BTreeSet<u32>,
    pub lines: BTreeSet<u32>,
    pub functions: BTreeSet<u32>,
}

impl Coverage {
    pub fn of(outcome: &ExecutionOutcome) -> Self {
        Coverage {
            branches: outcome.covered_branches.clone(),
            lines: outcome.covered_lines.clone(),
            functions: outcome.covered_functions.clone(),
        }
    }

    /// Adds an outcome's sets; returns true if anything new was covered.
    pub fn absorb(&mut self, outcome: &ExecutionOutcome) -> bool {
        let before = (self.branches.len(), self.lines.len(), self.functions.len());
        self.branches.extend(&outcome.covered_branches);
        self.lines.extend(&outcome.covered_lines);
        self.functions.extend(&outcome.covered_functions);
        before != (self.branches.len(), self.lines.len(), self.functions.len())
    }

    pub fn merge(&mut self, other: &Coverage) {
        self.branches.extend(&other.branches);
        self.lines.extend(&other.lines);
        self.functions.extend(&other.functions);
    }

    pub fn union<'a>(outcomes: impl IntoIterator<Item = &'a ExecutionOutcome>) -> Self {
        let mut c = Coverage::default();
        for o in outcomes {
            c.absorb(o);
        }
        c
    }
}

/// `part / total × 100`, or 0 when the total is unknown.
pub fn percent(part: usize, total: u32) -> f64 {
    if total == 0 {
        0.0
    } else {
        part as f64 / total as f64 * 100.0
    }
}
