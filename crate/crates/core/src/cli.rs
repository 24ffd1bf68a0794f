//! Command-line entry point.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::Parser;

use crate::engine::{run_campaign, EngineError, ExperimentConfig, FuzzContext};
use crate::grammar::parse_grammar;
use crate::harness::external::ExternalTarget;
use crate::harness::{Registry, TargetInfo};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GRAMMAR: i32 = 3;
pub const EXIT_TARGET: i32 = 4;

/// Grammar-guided genetic fuzzing campaigns.
#[derive(Debug, Parser)]
#[command(name = "gafuzz", version)]
pub struct Args {
    /// Experiment preset 1-7, or `custom`.
    #[arg(long, default_value = "7")]
    pub experiment: String,
    /// Grammar file.
    #[arg(long)]
    pub grammar: PathBuf,
    /// Directory of sample inputs, for presets that learn from samples.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// `all` or comma-separated target names.
    #[arg(long)]
    pub targets: Option<String>,
    /// Time budget per run.
    #[arg(long)]
    pub seconds: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub pop_size: Option<usize>,
    /// Master seed; run r uses seed + r.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "gafuzz-out")]
    pub out: PathBuf,
    /// File of key=value lines overriding the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Branch count of the external target.
    #[arg(long)]
    pub external_branches: Option<u32>,
    /// Program (and arguments) to fuzz as the `external` target. Must come last.
    #[arg(long, num_args = 1.., allow_hyphen_values = true, value_name = "ARGV")]
    pub external_cmd: Option<Vec<String>>,
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

/// Parses `argv` (program name first), runs the campaign and writes the
/// reports. Returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&args) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("gafuzz: {}", f.message);
            f.code
        }
    }
}

fn run(args: &Args) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_name(&args.experiment).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    let mut targets_spec = None;
    let mut external_branches = args.external_branches;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
        let rest = cfg
            .apply_text(&text)
            .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
        for (k, v) in rest {
            match k {
                "targets" => targets_spec = Some(v.to_string()),
                "external_branches" => {
                    let n = v
                        .parse()
                        .map_err(|_| fail(EXIT_USAGE, format!("bad external_branches `{v}`")))?;
                    external_branches = external_branches.or(Some(n));
                }
                _ => return Err(fail(EXIT_USAGE, format!("unknown config key `{k}`"))),
            }
        }
    }
    if let Some(s) = args.seconds {
        cfg.time_budget = Duration::try_from_secs_f64(s)
            .map_err(|_| fail(EXIT_USAGE, format!("bad --seconds {s}")))?;
    }
    if let Some(n) = args.runs {
        cfg.runs = n;
    }
    if let Some(n) = args.pop_size {
        cfg.population_size = n;
    }
    if let Some(n) = args.seed {
        cfg.master_seed = n;
    }
    cfg.validate().map_err(|e| fail(EXIT_USAGE, e.to_string()))?;

    let grammar_text = fs::read_to_string(&args.grammar)
        .map_err(|e| fail(EXIT_GRAMMAR, format!("{}: {e}", args.grammar.display())))?;
    let grammar = parse_grammar(&grammar_text)
        .map_err(|e| fail(EXIT_GRAMMAR, format!("{}: {e}", args.grammar.display())))?;

    let samples = match &args.samples {
        Some(dir) => read_samples(dir)?,
        None => Vec::new(),
    };

    let mut registry = Registry::builtin();
    if let Some(argv) = &args.external_cmd {
        let b_total = external_branches
            .filter(|&n| n > 0)
            .ok_or_else(|| fail(EXIT_USAGE, "--external-cmd needs --external-branches N (N >= 1)"))?;
        let info = TargetInfo {
            name: "external".into(),
            b_total,
            line_total: 0,
            function_total: 0,
        };
        registry
            .register(Arc::new(ExternalTarget::new(info, argv.clone())))
            .map_err(|e| fail(EXIT_TARGET, e.to_string()))?;
    }
    let spec = args
        .targets
        .clone()
        .or(targets_spec)
        .unwrap_or_else(|| {
            if args.external_cmd.is_some() {
                "external".into()
            } else {
                "all".into()
            }
        });
    let targets = registry.select(&spec).map_err(|e| fail(EXIT_TARGET, e.to_string()))?;
    if targets.is_empty() {
        return Err(fail(EXIT_USAGE, "no targets selected"));
    }

    let ctx = FuzzContext::new(Arc::new(grammar), samples, targets);
    fs::create_dir_all(&args.out)
        .map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", args.out.display())))?;
    let report = run_campaign(&cfg, &ctx, Some(&args.out)).map_err(|e| match e {
        EngineError::MissingSamples => fail(EXIT_USAGE, format!("experiment {} needs --samples", cfg.id)),
        EngineError::Sample(_) | EngineError::Generation(_) => fail(EXIT_GRAMMAR, e.to_string()),
        EngineError::Harness(_) | EngineError::NoTargets => fail(EXIT_TARGET, e.to_string()),
        EngineError::Config(_) => fail(EXIT_USAGE, e.to_string()),
        _ => fail(EXIT_FAILURE, e.to_string()),
    })?;
    for r in &report.runs {
        eprintln!(
            "run {}: {} generations, {} executions, {:.1} s",
            r.run_id,
            r.generations,
            r.executions,
            r.wall_time.as_secs_f64()
        );
    }
    write_reports(&report, &args.out).map_err(|e| fail(EXIT_FAILURE, e.to_string()))
}

fn read_samples(dir: &Path) -> Result<Vec<String>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| fs::read_to_string(p).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display()))))
        .collect()
}

/// Writes coverage_report.csv, exceptions.csv, summary.txt and summary.csv
/// into `out`.
pub fn write_reports(report: &crate::engine::CampaignReport, out: &Path) -> Result<(), report::ReportError> {
    let rows = report::coverage_rows(report);
    report::write_coverage_csv(&rows, fs::File::create(out.join("coverage_report.csv"))?)?;
    let exc = report::exception_rows(report);
    report::write_exceptions_csv(&exc, fs::File::create(out.join("exceptions.csv"))?)?;
    let summary = report::summarize(&rows)?;
    let mut f = fs::File::create(out.join("summary.txt"))?;
    f.write_all(report::summary_text(report, &summary).as_bytes())?;
    summary.write_csv(fs::File::create(out.join("summary.csv"))?)?;
    Ok(())
}
