use crate::harness::{percent, Coverage, ExecutionOutcome, TargetInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Branch,
    Line,
    Function,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Branch, Metric::Line, Metric::Function];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Branch => "branch",
            Metric::Line => "line",
            Metric::Function => "function",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn of_outcome(self, o: &ExecutionOutcome, info: &TargetInfo) -> f64 {
        match self {
            Metric::Branch => percent(o.covered_branches.len(), info.b_total),
            Metric::Line => percent(o.covered_lines.len(), info.line_total),
            Metric::Function => percent(o.covered_functions.len(), info.function_total),
        }
    }

    pub fn of_coverage(self, c: &Coverage, info: &TargetInfo) -> f64 {
        match self {
            Metric::Branch => percent(c.branches.len(), info.b_total),
            Metric::Line => percent(c.lines.len(), info.line_total),
            Metric::Function => percent(c.functions.len(), info.function_total),
        }
    }
}

/// Max, mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricStats {
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
}

impl MetricStats {
    /// All zero for an empty slice.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return MetricStats::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MetricStats {
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            sd: var.sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_sd() {
        let s = MetricStats::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!((s.max, s.mean, s.sd), (9.0, 5.0, 2.0));
        assert_eq!(MetricStats::of(&[3.0]).sd, 0.0);
        assert_eq!(MetricStats::of(&[]), MetricStats::default());
    }
}
