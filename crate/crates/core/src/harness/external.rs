//! Subprocess targets.
//!
//! The input goes to the program's stdin. The harness points the
//! `COVERAGE_OUT` environment variable at a fresh file, which the program
//! fills with one record per line: `B<n>` for a branch, `L<n>` for a line,
//! `F<n>` for a function. A nonzero exit whose first stderr line reads
//! `EXC:<type>:<location>` reports that exception.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use super::{input_ref, ExceptionInfo, ExecutionOutcome, HarnessError, Target, TargetInfo};

pub const COVERAGE_ENV: &str = "COVERAGE_OUT";

pub struct ExternalTarget {
    info: TargetInfo,
    argv: Vec<String>,
}

impl ExternalTarget {
    /// `argv[0]` is the program; branch ids it reports must be below
    /// `info.b_total`.
    pub fn new(info: TargetInfo, argv: Vec<String>) -> Self {
        assert!(!argv.is_empty(), "external target needs a program");
        ExternalTarget { info, argv }
    }

    pub fn argv(&self) -> &[String] {
        &self.argv
    }
}

impl Target for ExternalTarget {
    fn info(&self) -> &TargetInfo {
        &self.info
    }

    fn charges_measured_time(&self) -> bool {
        true
    }

    fn execute(&self, input: &str, timeout: Duration) -> Result<ExecutionOutcome, HarnessError> {
        let dir = tempfile::tempdir()?;
        let cov_path = dir.path().join("coverage");
        let start = Instant::now();
        let mut child = Command::new(&self.argv[0])
            .args(&self.argv[1..])
            .env(COVERAGE_ENV, &cov_path)
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| {
                if e.kind() == std::io::ErrorKind::NotFound {
                    HarnessError::CommandNotFound(self.argv[0].clone())
                } else {
                    HarnessError::Spawn {
                        command: self.argv[0].clone(),
                        source: e,
                    }
                }
            })?;

        let mut stdin = child.stdin.take().expect("stdin is piped");
        let data = input.as_bytes().to_vec();
        // A program that exits without reading its input closes the pipe;
        // that is not an error here.
        let writer = thread::spawn(move || {
            let _ = stdin.write_all(&data);
        });
        let mut stderr = child.stderr.take().expect("stderr is piped");
        let reader = thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr.read_to_end(&mut buf);
            buf
        });

        let status = match child.wait_timeout(timeout)? {
            Some(status) => Some(status),
            None => {
                let _ = child.kill();
                child.wait()?;
                None
            }
        };
        let duration = start.elapsed();
        let _ = writer.join();
        let err_bytes = reader.join().unwrap_or_default();

        let mut outcome = ExecutionOutcome {
            covered_branches: BTreeSet::new(),
            covered_lines: BTreeSet::new(),
            covered_functions: BTreeSet::new(),
            exception: None,
            duration,
            events: 0,
            input_ref: input_ref(input),
        };
        match std::fs::read_to_string(&cov_path) {
            Ok(text) => read_coverage(&text, &mut outcome, self.info.b_total)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        outcome.exception = match status {
            None => Some(ExceptionInfo {
                kind: "Timeout".into(),
                location: "-".into(),
            }),
            Some(s) if s.success() => None,
            Some(s) => {
                let stderr = String::from_utf8_lossy(&err_bytes);
                Some(parse_exception(stderr.lines().next()).unwrap_or_else(|| ExceptionInfo {
                    kind: "NonZeroExit".into(),
                    location: s.code().map_or_else(|| "signal".into(), |c| format!("exit{c}")),
                }))
            }
        };
        Ok(outcome)
    }
}

/// Parses `EXC:<type>:<location>`; the location may itself contain colons.
pub fn parse_exception(line: Option<&str>) -> Option<ExceptionInfo> {
    let rest = line?.trim_end().strip_prefix("EXC:")?;
    let (kind, location) = rest.split_once(':')?;
    if kind.is_empty() {
        return None;
    }
    Some(ExceptionInfo {
        kind: kind.to_string(),
        location: location.to_string(),
    })
}

fn read_coverage(
    text: &str,
    outcome: &mut ExecutionOutcome,
    b_total: u32,
) -> Result<(), HarnessError> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = || HarnessError::MalformedCoverage {
            line: i + 1,
            text: raw.to_string(),
        };
        let (tag, digits) = match line.as_bytes()[0] {
            t @ (b'B' | b'L' | b'F') => (t, &line[1..]),
            _ => return Err(malformed()),
        };
        let id: u32 = digits.parse().map_err(|_| malformed())?;
        match tag {
            b'B' => {
                if id >= b_total {
                    return Err(HarnessError::BranchOutOfRange { id, b_total });
                }
                outcome.covered_branches.insert(id);
            }
            b'L' => {
                outcome.covered_lines.insert(id);
            }
            _ => {
                outcome.covered_functions.insert(id);
            }
        }
        outcome.events += 1;
    }
    Ok(())
}
