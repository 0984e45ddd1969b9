use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::pipeline::{merges_for, scan_records, Pipeline, Step};
use crate::config::Config;
use crate::detect::DetectorKind;
use crate::error::{Error, Result};
use crate::merge::{MergeLabel, MergeRecord};
use crate::sim::SequenceLog;

/// Per-detector outcome over one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSummary {
    pub max_score: f64,
    pub mean_ms: f64,
    pub evaluations: usize,
    /// Index (among post-merge evaluations) of the first alarm.
    pub first_alarm: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    pub id: String,
    pub label: MergeLabel,
    pub detectors: BTreeMap<DetectorKind, DetectorSummary>,
}

#[derive(Default)]
struct Accumulator {
    max: Option<f64>,
    total_ms: f64,
    n: usize,
    first_alarm: Option<usize>,
}

/// Replays `log` with forced merges and never unmerges, recording every
/// detector's maximum score after the merge.
///
/// Merges come from `merges` if given, else from the log's own triggers. The
/// sequence label is invalid if any applied merge is labeled invalid.
pub fn run_sequence(
    id: &str,
    log: &SequenceLog,
    merges: Option<&[MergeRecord]>,
    detectors: &[DetectorKind],
    cfg: &Config,
) -> Result<SequenceResult> {
    let merges = merges_for(log, merges);
    if merges.is_empty() {
        return Err(Error::NoMerge);
    }
    let mut pipeline = Pipeline::new(cfg, detectors, merges)?;
    let mut acc: BTreeMap<DetectorKind, Accumulator> =
        detectors.iter().map(|k| (*k, Accumulator::default())).collect();
    let mut label = None;
    for step in scan_records(log) {
        match step {
            Step::Break => pipeline.epoch_break(),
            Step::Scan(rec) => {
                let out = pipeline.scan(rec)?;
                for m in &out.merges {
                    label = Some(match (label, m.label) {
                        (Some(MergeLabel::Invalid), _) | (_, MergeLabel::Invalid) => MergeLabel::Invalid,
                        _ => MergeLabel::Correct,
                    });
                }
                for r in out.reports {
                    let a = acc.get_mut(&r.detector).expect("detector registered");
                    if r.alarm && a.first_alarm.is_none() {
                        a.first_alarm = Some(a.n);
                    }
                    a.max = Some(a.max.map_or(r.score, |m: f64| m.max(r.score)));
                    a.total_ms += r.compute_ms;
                    a.n += 1;
                }
            }
        }
    }
    let label = label.ok_or(Error::NoMerge)?;
    Ok(SequenceResult {
        id: id.to_string(),
        label,
        detectors: acc
            .into_iter()
            .map(|(k, a)| {
                (
                    k,
                    DetectorSummary {
                        max_score: a.max.unwrap_or(0.0),
                        mean_ms: if a.n > 0 { a.total_ms / a.n as f64 } else { 0.0 },
                        evaluations: a.n,
                        first_alarm: a.first_alarm,
                    },
                )
            })
            .collect(),
    })
}
