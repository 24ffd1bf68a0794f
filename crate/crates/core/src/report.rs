//! Report files: per-run coverage rows, exception triggers, summary tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io;

use thiserror::Error;

use crate::engine::{CampaignReport, Metric, MetricStats};
use crate::harness::ExceptionInfo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    PerInputMean,
    PerInputMax,
    PerInputSd,
    Cumulative,
}

impl Scope {
    pub const ALL: [Scope; 4] = [
        Scope::PerInputMean,
        Scope::PerInputMax,
        Scope::PerInputSd,
        Scope::Cumulative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scope::PerInputMean => "per_input_mean",
            Scope::PerInputMax => "per_input_max",
            Scope::PerInputSd => "per_input_sd",
            Scope::Cumulative => "cumulative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub run_id: usize,
    pub target: String,
    pub metric: Metric,
    pub scope: Scope,
    /// Percentage.
    pub value: f64,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no report rows")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Flattens a campaign into coverage rows: run, target, metric, scope.
pub fn coverage_rows(report: &CampaignReport) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for run in &report.runs {
        for t in &run.targets {
            for metric in Metric::ALL {
                let s = t.per_input[metric.index()];
                for scope in Scope::ALL {
                    let value = match scope {
                        Scope::PerInputMean => s.mean,
                        Scope::PerInputMax => s.max,
                        Scope::PerInputSd => s.sd,
                        Scope::Cumulative => t.cumulative[metric.index()],
                    };
                    rows.push(ReportRow {
                        run_id: run.run_id,
                        target: t.target.clone(),
                        metric,
                        scope,
                        value,
                    });
                }
            }
        }
    }
    rows
}

pub fn write_coverage_csv<W: io::Write>(rows: &[ReportRow], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run_id", "target", "metric", "scope", "value"])?;
    for r in rows {
        w.write_record([
            r.run_id.to_string(),
            r.target.clone(),
            r.metric.name().to_string(),
            r.scope.name().to_string(),
            format!("{:.2}", r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionRow {
    pub run_id: usize,
    pub target: String,
    pub exception: ExceptionInfo,
    pub first_trigger_generation: Option<u64>,
}

/// One row per run for every exception seen in any run, so the number of
/// `triggered` rows per exception is its runs-triggered frequency.
pub fn exception_rows(report: &CampaignReport) -> Vec<ExceptionRow> {
    let keys: BTreeSet<&(String, ExceptionInfo)> =
        report.runs.iter().flat_map(|r| r.exceptions.keys()).collect();
    let mut rows = Vec::new();
    for key in keys {
        for run in &report.runs {
            rows.push(ExceptionRow {
                run_id: run.run_id,
                target: key.0.clone(),
                exception: key.1.clone(),
                first_trigger_generation: run.exceptions.get(key).copied(),
            });
        }
    }
    rows
}

pub fn write_exceptions_csv<W: io::Write>(rows: &[ExceptionRow], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "run_id",
        "target",
        "exception_type",
        "location",
        "triggered",
        "first_trigger_generation",
    ])?;
    for r in rows {
        w.write_record([
            r.run_id.to_string(),
            r.target.clone(),
            r.exception.kind.clone(),
            r.exception.location.clone(),
            r.first_trigger_generation.is_some().to_string(),
            r.first_trigger_generation.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub target: String,
    pub metric: Metric,
    /// Best per-input value in any run.
    pub max: f64,
    /// Mean over runs of the per-input mean.
    pub mean: f64,
    /// Population standard deviation over runs of the per-input mean.
    pub sd: f64,
    /// Mean over runs of cumulative coverage.
    pub cumulative_mean: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub entries: Vec<SummaryEntry>,
}

/// Run id to values indexed by [`Scope`].
type RunValues = BTreeMap<usize, [Option<f64>; 4]>;

/// Aggregates rows over runs, per (target, metric), in first-seen order.
pub fn summarize(rows: &[ReportRow]) -> Result<Summary, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut order: Vec<(String, Metric)> = Vec::new();
    let mut groups: BTreeMap<(String, Metric), RunValues> = BTreeMap::new();
    for r in rows {
        let key = (r.target.clone(), r.metric);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        let per_run = groups.entry(key).or_default().entry(r.run_id).or_default();
        per_run[r.scope as usize] = Some(r.value);
    }
    let entries = order
        .into_iter()
        .map(|key| {
            let per_run = &groups[&key];
            let col = |s: Scope| -> Vec<f64> { per_run.values().filter_map(|v| v[s as usize]).collect() };
            let means = MetricStats::of(&col(Scope::PerInputMean));
            let maxes = col(Scope::PerInputMax);
            let cumulative = MetricStats::of(&col(Scope::Cumulative));
            SummaryEntry {
                target: key.0,
                metric: key.1,
                max: maxes.iter().copied().fold(0.0, f64::max),
                mean: means.mean,
                sd: means.sd,
                cumulative_mean: cumulative.mean,
                runs: per_run.len(),
            }
        })
        .collect();
    Ok(Summary { entries })
}

/// Relative change of `new` over `base`, in percent.
pub fn improvement(base: f64, new: f64) -> f64 {
    (new - base) / base * 100.0
}

impl Summary {
    pub fn get(&self, target: &str, metric: Metric) -> Option<&SummaryEntry> {
        self.entries
            .iter()
            .find(|e| e.target == target && e.metric == metric)
    }

    /// Fixed-width table.
    pub fn to_text(&self) -> String {
        let width = self
            .entries
            .iter()
            .map(|e| e.target.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:<8}  {:>7}  {:>7}  {:>7}  {:>10}",
            "target", "metric", "max", "mean", "sd", "cumulative"
        );
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{:<width$}  {:<8}  {:>7.2}  {:>7.2}  {:>7.2}  {:>10.2}",
                e.target,
                e.metric.name(),
                e.max,
                e.mean,
                e.sd,
                e.cumulative_mean
            );
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), ReportError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["target", "metric", "max", "mean", "sd", "cumulative_mean", "runs"])?;
        for e in &self.entries {
            w.write_record([
                e.target.clone(),
                e.metric.name().to_string(),
                format!("{:.2}", e.max),
                format!("{:.2}", e.mean),
                format!("{:.2}", e.sd),
                format!("{:.2}", e.cumulative_mean),
                e.runs.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Side-by-side means of two summaries with the relative improvement of
    /// `self` over `base`.
    pub fn compare_text(&self, base: &Summary) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<18}  {:<8}  {:>9}  {:>9}  {:>11}",
            "target", "metric", "base", "new", "improvement"
        );
        for e in &self.entries {
            if let Some(b) = base.get(&e.target, e.metric) {
                let _ = writeln!(
                    out,
                    "{:<18}  {:<8}  {:>9.2}  {:>9.2}  {:>+10.1}%",
                    e.target,
                    e.metric.name(),
                    b.mean,
                    e.mean,
                    improvement(b.mean, e.mean)
                );
            }
        }
        out
    }
}

/// The text written to `summary.txt`.
pub fn summary_text(report: &CampaignReport, summary: &Summary) -> String {
    let cfg = &report.config;
    let mut out = String::new();
    let _ = writeln!(out, "experiment {}", cfg.id);
    if cfg.weights_assumed {
        let _ = writeln!(
            out,
            "note: fitness weights not specified for this experiment; using ({}, {})",
            cfg.fitness.w_feedback, cfg.fitness.w_structure
        );
    }
    let _ = writeln!(
        out,
        "initial input {:?}, fitness {:?}, crossover {}, mutation {:?}",
        cfg.initial_input, cfg.fitness.mode, cfg.crossover_enabled, cfg.mutation_mode
    );
    let _ = writeln!(
        out,
        "population {}, budget {} s ({:?} clock), runs {}, master seed {}",
        cfg.population_size,
        cfg.time_budget.as_secs_f64(),
        cfg.clock,
        cfg.runs,
        cfg.master_seed
    );
    let _ = writeln!(out);
    for run in &report.runs {
        let _ = writeln!(
            out,
            "run {}: seed {}, {} generations, {} executions",
            run.run_id, run.seed, run.generations, run.executions
        );
    }
    let _ = writeln!(out);
    out.push_str(&summary.to_text());
    let _ = writeln!(out);
    let freq = report.exception_frequency();
    if freq.is_empty() {
        let _ = writeln!(out, "no exceptions");
    } else {
        let _ = writeln!(out, "exceptions (runs triggered of {}):", report.runs.len());
        for ((target, e), n) in freq {
            let _ = writeln!(out, "  {target:<18} {:<22} {:<8} {n}", e.kind, e.location);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(run_id: usize, scope: Scope, value: f64) -> ReportRow {
        ReportRow {
            run_id,
            target: "t".into(),
            metric: Metric::Branch,
            scope,
            value,
        }
    }

    #[test]
    fn three_run_fixture() {
        let mut rows = Vec::new();
        for (run, mean, max) in [(1, 10.0, 20.0), (2, 20.0, 35.0), (3, 30.0, 25.0)] {
            rows.push(row(run, Scope::PerInputMean, mean));
            rows.push(row(run, Scope::PerInputMax, max));
        }
        let s = summarize(&rows).unwrap();
        let e = &s.entries[0];
        assert_eq!(e.max, 35.0);
        assert_eq!(e.mean, 20.0);
        // sqrt(((10-20)^2 + 0 + (30-20)^2) / 3)
        assert!((e.sd - (200.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(e.runs, 3);
    }

    #[test]
    fn single_run_has_zero_sd() {
        let s = summarize(&[row(1, Scope::PerInputMean, 42.0)]).unwrap();
        assert_eq!(s.entries[0].sd, 0.0);
        assert!(matches!(summarize(&[]), Err(ReportError::Empty)));
    }

    #[test]
    fn improvement_percent() {
        assert!((improvement(1.0, 2.66) - 166.0).abs() < 1e-9);
        assert_eq!(format!("{:+.1}%", improvement(1.0, 2.66)), "+166.0%");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_coverage_csv(&[row(1, Scope::Cumulative, 12.346)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "run_id,target,metric,scope,value\n1,t,branch,cumulative,12.35\n"
        );
    }
}
