//! Newline-delimited JSON scan logs. See `docs/scan-log.md`.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::merge::MergeRecord;
use crate::pose::Pose2;
use crate::scan::Scan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub t: f64,
    /// Odometry since the previous scan of the same epoch, `[dx, dy, dtheta]` in
    /// the previous body frame. Zero for the first scan of an epoch.
    pub odom: [f64; 3],
    pub bearing_origin: f64,
    pub bearing_increment: f64,
    pub range_max: f64,
    /// One entry per beam; `null` for no return.
    pub ranges: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_pose: Option<[f64; 3]>,
}

impl ScanRecord {
    /// Scan in the sensor frame (identity pose).
    pub fn to_scan(&self) -> Result<Scan> {
        Scan::from_beams(
            Pose2::IDENTITY,
            self.bearing_origin,
            self.bearing_increment,
            &self.ranges,
            self.range_max,
        )
    }

    pub fn odometry(&self) -> Pose2 {
        Pose2::from_array(self.odom)
    }

    pub fn ground_truth(&self) -> Option<Pose2> {
        self.gt_pose.map(Pose2::from_array)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Scan(ScanRecord),
    EpochBreak { t: f64 },
    MergeTrigger { t: f64, merge: MergeRecord },
}

/// Time-ordered sensor data of one run, as produced by the simulator or read from disk.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SequenceLog {
    pub records: Vec<LogRecord>,
}

impl SequenceLog {
    pub fn scans(&self) -> impl Iterator<Item = &ScanRecord> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Scan(s) => Some(s),
            _ => None,
        })
    }

    pub fn scan_count(&self) -> usize {
        self.scans().count()
    }

    pub fn epoch_breaks(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, LogRecord::EpochBreak { .. }))
            .count()
    }

    pub fn merges(&self) -> Vec<MergeRecord> {
        self.records
            .iter()
            .filter_map(|r| match r {
                LogRecord::MergeTrigger { merge, .. } => Some(merge.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    /// Parses a log; blank lines are ignored, anything else must be a valid record.
    pub fn parse(reader: impl BufRead) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<scan log>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: LogRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            if let LogRecord::Scan(s) = &rec {
                s.to_scan().map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            }
            records.push(rec);
        }
        Ok(Self { records })
    }
}

/// Reads a scan log from disk.
pub fn ingest_log(path: &Path) -> Result<SequenceLog> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    SequenceLog::parse(std::io::BufReader::new(f)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        e => e,
    })
}
