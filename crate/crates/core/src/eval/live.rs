use serde::{Deserialize, Serialize};

use super::pipeline::{merges_for, scan_records, Pipeline, Step};
use crate::config::Config;
use crate::detect::DetectorKind;
use crate::error::Result;
use crate::graph::{EpochId, VertexId};
use crate::merge::{MergeLabel, MergeRecord};
use crate::sim::SequenceLog;
use crate::store::GraphStore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LiveEvent {
    MergeApplied {
        vertex: VertexId,
        target_epoch: EpochId,
        label: MergeLabel,
    },
    AlarmRaised {
        vertex: VertexId,
        detector: DetectorKind,
        score: f64,
    },
    UnmergeDone {
        vertex: VertexId,
        removed_vertices: usize,
        restored_graphs: usize,
    },
}

pub struct LiveOutcome {
    pub events: Vec<LiveEvent>,
    pub store: GraphStore,
}

impl LiveOutcome {
    pub fn unmerges(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, LiveEvent::UnmergeDone { .. }))
            .count()
    }
}

/// Replays `log` like a deployed system: any detector alarm undoes all merges
/// into the active graph and resets every detector.
pub fn live_mode(
    log: &SequenceLog,
    merges: Option<&[MergeRecord]>,
    detectors: &[DetectorKind],
    cfg: &Config,
) -> Result<LiveOutcome> {
    let mut pipeline = Pipeline::new(cfg, detectors, merges_for(log, merges))?;
    let mut events = Vec::new();
    for step in scan_records(log) {
        match step {
            Step::Break => pipeline.epoch_break(),
            Step::Scan(rec) => {
                let out = pipeline.scan(rec)?;
                for m in &out.merges {
                    events.push(LiveEvent::MergeApplied {
                        vertex: out.vertex,
                        target_epoch: m.target_epoch,
                        label: m.label,
                    });
                }
                let alarms: Vec<_> = out.reports.iter().filter(|r| r.alarm).collect();
                for r in &alarms {
                    events.push(LiveEvent::AlarmRaised {
                        vertex: out.vertex,
                        detector: r.detector,
                        score: r.score,
                    });
                }
                if !alarms.is_empty() {
                    let u = pipeline.store.unmerge()?;
                    pipeline.reset_detectors();
                    events.push(LiveEvent::UnmergeDone {
                        vertex: out.vertex,
                        removed_vertices: u.removed_vertices,
                        restored_graphs: u.restored_graphs,
                    });
                }
            }
        }
    }
    Ok(LiveOutcome {
        events,
        store: pipeline.store,
    })
}

/// One JSON object per line.
pub fn write_events(events: &[LiveEvent], mut out: impl std::io::Write) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
