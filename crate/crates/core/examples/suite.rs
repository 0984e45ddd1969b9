//! Runs a small evaluation suite and prints per-sequence scores and AUCs.
//!
//! `cargo run --release -p mapmerge --example suite -- [flats_per_label] [seed] [entropy_query_stride]`

use std::time::Instant;

use mapmerge::config::Config;
use mapmerge::detect::DetectorKind;
use mapmerge::eval::{build_suite, compute_roc, run_suite, summarize, SuiteSpec};

fn main() -> mapmerge::Result<()> {
    let mut args = std::env::args().skip(1);
    let flats = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let stride = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let spec = SuiteSpec {
        flats_per_label: flats,
        seed,
        ..SuiteSpec::default()
    };
    let mut cfg = Config::default();
    cfg.entropy.query_stride = stride;
    let items = build_suite(&spec);
    let start = Instant::now();
    let results = run_suite(&items, &DetectorKind::ALL, &cfg)?;
    println!("{} sequences in {:.1} s", results.len(), start.elapsed().as_secs_f64());
    for r in &results {
        let cells: Vec<String> = r
            .detectors
            .iter()
            .map(|(k, d)| format!("{k}={:.3} ({:.1} ms x{})", d.max_score, d.mean_ms, d.evaluations))
            .collect();
        println!("{:<28} {:<8} {}", r.id, r.label.as_str(), cells.join("  "));
    }
    let curves: Vec<_> = DetectorKind::ALL
        .iter()
        .map(|k| compute_roc(&results, *k))
        .collect::<mapmerge::Result<_>>()?;
    for s in summarize(&results, &curves) {
        println!("{:<10} auc {:.3}  {:.2} ms/vertex", s.detector, s.auc, s.mean_ms);
    }
    Ok(())
}
