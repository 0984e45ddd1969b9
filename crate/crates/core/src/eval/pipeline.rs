use std::path::PathBuf;

use crate::config::Config;
use crate::detect::{Detector, DetectorKind, DetectorReport};
use crate::error::{Error, Result};
use crate::graph::{Information, VertexId};
use crate::merge::{MergeCandidate, MergeRecord, MergeSchedule, OrdinalMap};
use crate::pose::Pose2;
use crate::sim::{LogRecord, ScanRecord, SequenceLog};
use crate::store::{BackupPolicy, GraphStore};

/// What happened while ingesting one scan record.
#[derive(Debug)]
pub struct StepOutcome {
    pub ordinal: usize,
    pub vertex: VertexId,
    pub merges: Vec<MergeCandidate>,
    pub reports: Vec<DetectorReport>,
}

/// Odometry-only front end feeding a [`GraphStore`], forced merges from a
/// schedule, and detector evaluation after every vertex of a merged graph.
pub struct Pipeline {
    pub store: GraphStore,
    pub ordinals: OrdinalMap,
    schedule: MergeSchedule,
    detectors: Vec<Box<dyn Detector>>,
    odometry_info: Information,
    loop_info: Information,
    loop_every: usize,
    epoch_start: Option<(VertexId, Pose2)>,
    epoch_len: usize,
}

impl Pipeline {
    pub fn new(cfg: &Config, detectors: &[DetectorKind], merges: Vec<MergeRecord>) -> Result<Self> {
        cfg.validate()?;
        let mut store = GraphStore::new();
        store.optimizer = cfg.optimizer.clone();
        store.backup_policy = BackupPolicy {
            spill_dir: cfg.pipeline.backup_dir.as_ref().map(PathBuf::from),
            spill_min_vertices: cfg.pipeline.backup_spill_min_vertices,
        };
        let mut ordinals = OrdinalMap::default();
        ordinals.push_epoch(store.begin_epoch());
        Ok(Self {
            store,
            ordinals,
            schedule: MergeSchedule::new(merges),
            detectors: detectors.iter().map(|k| k.build(cfg)).collect(),
            odometry_info: cfg.pipeline.odometry_information()?,
            loop_info: cfg.pipeline.loop_closure_information()?,
            loop_every: cfg.pipeline.gt_loop_closure_every,
            epoch_start: None,
            epoch_len: 0,
        })
    }

    pub fn detector_kinds(&self) -> Vec<DetectorKind> {
        self.detectors.iter().map(|d| d.kind()).collect()
    }

    pub fn epoch_break(&mut self) {
        let epoch = self.store.begin_epoch();
        self.ordinals.push_epoch(epoch);
        self.epoch_start = None;
        self.epoch_len = 0;
        for d in &mut self.detectors {
            d.reset();
        }
    }

    /// Adds the scan as a vertex, applies merges scheduled for it, then runs
    /// every detector if the active graph is merged.
    pub fn scan(&mut self, rec: &ScanRecord) -> Result<StepOutcome> {
        let ordinal = self.ordinals.vertices.len();
        let id = self.store.add_vertex(rec.to_scan()?, rec.odometry(), self.odometry_info)?;
        self.ordinals.push_vertex(id);
        self.epoch_len += 1;
        self.ground_truth_closure(id, rec.ground_truth())?;

        let merges = self.schedule.find_merge_candidates(&self.store, ordinal, &self.ordinals)?;
        self.store.apply_candidates(merges.clone())?;

        let mut reports = Vec::new();
        let snapshot = self.store.snapshot();
        if snapshot.is_merged() {
            for d in &mut self.detectors {
                match d.update(&snapshot, id) {
                    Ok(r) => reports.push(r),
                    // Not enough data for this detector yet.
                    Err(Error::EmptyMap | Error::AllPointsSkipped | Error::EmptyHistogram) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(StepOutcome {
            ordinal,
            vertex: id,
            merges,
            reports,
        })
    }

    fn ground_truth_closure(&mut self, id: VertexId, gt: Option<Pose2>) -> Result<()> {
        let Some(gt) = gt else {
            return Ok(());
        };
        let Some((first, first_gt)) = self.epoch_start else {
            self.epoch_start = Some((id, gt));
            return Ok(());
        };
        if self.loop_every > 0 && (self.epoch_len - 1) % self.loop_every == 0 {
            self.store
                .add_loop_closure(first, id, first_gt.between(&gt), self.loop_info)?;
            self.store.optimize_active()?;
        }
        Ok(())
    }

    /// Drops detector caches, e.g. after an unmerge.
    pub fn reset_detectors(&mut self) {
        for d in &mut self.detectors {
            d.reset();
        }
    }
}

/// Merges from the log's own `merge_trigger` records unless an explicit list is given.
pub fn merges_for(log: &SequenceLog, explicit: Option<&[MergeRecord]>) -> Vec<MergeRecord> {
    explicit.map_or_else(|| log.merges(), <[MergeRecord]>::to_vec)
}

pub(crate) fn scan_records(log: &SequenceLog) -> impl Iterator<Item = Step<'_>> {
    log.records.iter().filter_map(|r| match r {
        LogRecord::Scan(s) => Some(Step::Scan(s)),
        LogRecord::EpochBreak { .. } => Some(Step::Break),
        LogRecord::MergeTrigger { .. } => None,
    })
}

pub(crate) enum Step<'a> {
    Scan(&'a ScanRecord),
    Break,
}

/// Replays `log` with forced merges and no detectors, returning the final store.
pub fn replay(log: &SequenceLog, merges: Option<&[MergeRecord]>, cfg: &Config) -> Result<GraphStore> {
    let mut pipeline = Pipeline::new(cfg, &[], merges_for(log, merges))?;
    for step in scan_records(log) {
        match step {
            Step::Break => pipeline.epoch_break(),
            Step::Scan(rec) => {
                pipeline.scan(rec)?;
            }
        }
    }
    Ok(pipeline.store)
}
