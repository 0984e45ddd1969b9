use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::roc::RocCurve;
use super::run::{DetectorSummary, SequenceResult};
use crate::detect::DetectorKind;
use crate::error::{Error, Result};
use crate::merge::MergeLabel;

/// One row of `results.csv`: a sequence × detector pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sequence: String,
    pub label: MergeLabel,
    pub detector: DetectorKind,
    pub max_score: f64,
    pub mean_ms: f64,
    pub evaluations: usize,
    pub first_alarm: Option<usize>,
}

pub fn to_rows(results: &[SequenceResult]) -> Vec<ResultRow> {
    results
        .iter()
        .flat_map(|r| {
            r.detectors.iter().map(|(k, d)| ResultRow {
                sequence: r.id.clone(),
                label: r.label,
                detector: *k,
                max_score: d.max_score,
                mean_ms: d.mean_ms,
                evaluations: d.evaluations,
                first_alarm: d.first_alarm,
            })
        })
        .collect()
}

/// Groups rows back into sequences, in order of first appearance.
pub fn from_rows(rows: &[ResultRow]) -> Vec<SequenceResult> {
    let mut out: Vec<SequenceResult> = Vec::new();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for row in rows {
        let i = *index.entry(&row.sequence).or_insert_with(|| {
            out.push(SequenceResult {
                id: row.sequence.clone(),
                label: row.label,
                detectors: BTreeMap::new(),
            });
            out.len() - 1
        });
        out[i].detectors.insert(
            row.detector,
            DetectorSummary {
                max_score: row.max_score,
                mean_ms: row.mean_ms,
                evaluations: row.evaluations,
                first_alarm: row.first_alarm,
            },
        );
    }
    out
}

pub fn write_results_csv(results: &[SequenceResult], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for row in to_rows(results) {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results_csv(path: &Path) -> Result<Vec<SequenceResult>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    Ok(from_rows(&rows))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    if !e.is_io_error() {
        return Error::Csv(e);
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        _ => unreachable!("checked above"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub detector: DetectorKind,
    pub auc: f64,
    /// Mean detector cost per evaluated post-merge vertex.
    pub mean_ms: f64,
    pub sequences: usize,
    pub positives: usize,
    pub negatives: usize,
}

pub fn summarize(results: &[SequenceResult], curves: &[RocCurve]) -> Vec<SummaryRow> {
    curves
        .iter()
        .map(|c| {
            let (mut ms, mut n, mut seqs) = (0.0, 0usize, 0usize);
            for d in results.iter().filter_map(|r| r.detectors.get(&c.detector)) {
                ms += d.mean_ms * d.evaluations as f64;
                n += d.evaluations;
                seqs += 1;
            }
            SummaryRow {
                detector: c.detector,
                auc: c.auc,
                mean_ms: if n > 0 { ms / n as f64 } else { 0.0 },
                sequences: seqs,
                positives: c.positives,
                negatives: c.negatives,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct RocRow {
    detector: DetectorKind,
    threshold: f64,
    fpr: f64,
    tpr: f64,
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// ROC curves in the unit square, one path per detector.
pub fn roc_svg(curves: &[RocCurve]) -> String {
    let (size, pad) = (400.0, 50.0);
    let x = |v: f64| pad + v * size;
    let y = |v: f64| pad + (1.0 - v) * size;
    let mut s = String::new();
    let total = size + 2.0 * pad;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = total + 140.0,
        h = total
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{size}" height="{size}" fill="none" stroke="black"/>"#,
        x(0.0),
        y(1.0)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#aaa" stroke-dasharray="4 4"/>"##,
        x(0.0),
        y(0.0),
        x(1.0),
        y(1.0)
    );
    for t in 0..=4 {
        let v = t as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{v}</text>"#, x(v), y(0.0) + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v}</text>"#, x(0.0) - 6.0, y(v) + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">false positive rate</text>"#,
        x(0.5),
        y(0.0) + 38.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">true positive rate</text>"#,
        y(0.5),
        y(0.5)
    );
    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let d: Vec<String> = c
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", x(p.fpr), y(p.tpr)))
            .collect();
        let _ = writeln!(
            s,
            r#"<path d="M{}" fill="none" stroke="{color}" stroke-width="2"><title>{}</title></path>"#,
            d.join(" L"),
            c.detector
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{} (AUC {:.3})</text>"#,
            total - 30.0,
            pad + 16.0 + 18.0 * i as f64,
            c.detector,
            c.auc
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `roc.csv`, `summary.csv` and `roc.svg` into `out_dir`.
pub fn emit_reports(results: &[SequenceResult], curves: &[RocCurve], out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let path = out_dir.join("roc.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_io(&path, e))?;
    for c in curves {
        for p in &c.points {
            w.serialize(RocRow {
                detector: c.detector,
                threshold: p.threshold,
                fpr: p.fpr,
                tpr: p.tpr,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_io(&path, e))?;
    for row in summarize(results, curves) {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = out_dir.join("roc.svg");
    std::fs::write(&path, roc_svg(curves)).map_err(|e| Error::io(&path, e))
}
