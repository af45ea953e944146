//! Set-based precision, recall and F1 of search results, with latencies.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    #[serde(serialize_with = "durations_as_seconds")]
    pub latencies: Vec<Duration>,
}

fn durations_as_seconds<S: serde::Serializer>(d: &[Duration], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(d.iter().map(Duration::as_secs_f64))
}

impl EvalReport {
    fn from_counts(tp: usize, fp: usize, fn_: usize, latencies: Vec<Duration>) -> Self {
        let truth = tp + fn_;
        let returned = tp + fp;
        let precision = if returned == 0 {
            if truth == 0 { 1.0 } else { 0.0 }
        } else {
            tp as f64 / returned as f64
        };
        let recall = if truth == 0 { 1.0 } else { tp as f64 / truth as f64 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
            latencies,
        }
    }

    /// Micro-average: pools the counts and latencies of both reports.
    pub fn merge(&self, other: &EvalReport) -> EvalReport {
        let mut latencies = self.latencies.clone();
        latencies.extend_from_slice(&other.latencies);
        Self::from_counts(self.tp + other.tp, self.fp + other.fp, self.fn_ + other.fn_, latencies)
    }

    pub fn with_latency(mut self, d: Duration) -> Self {
        self.latencies.push(d);
        self
    }

    pub fn mean_latency(&self) -> Option<Duration> {
        if self.latencies.is_empty() {
            return None;
        }
        Some(self.latencies.iter().sum::<Duration>() / self.latencies.len() as u32)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }

    /// Two aligned columns of name and value.
    pub fn to_table(&self) -> String {
        let mut rows = vec![
            ("precision", format!("{:.4}", self.precision)),
            ("recall", format!("{:.4}", self.recall)),
            ("f1", format!("{:.4}", self.f1)),
            ("tp", self.tp.to_string()),
            ("fp", self.fp.to_string()),
            ("fn", self.fn_.to_string()),
        ];
        if let Some(mean) = self.mean_latency() {
            rows.push(("queries", self.latencies.len().to_string()));
            rows.push(("mean latency (ms)", format!("{:.3}", mean.as_secs_f64() * 1e3)));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let vwidth = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            writeln!(out, "{k:<width$}  {v:>vwidth$}").unwrap();
        }
        out
    }
}

/// Compares returned ids against the true ids.
pub fn evaluate<S: Ord>(results: &BTreeSet<S>, truth: &BTreeSet<S>) -> EvalReport {
    let tp = results.intersection(truth).count();
    EvalReport::from_counts(tp, results.len() - tp, truth.len() - tp, Vec::new())
}
