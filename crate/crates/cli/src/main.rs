//! `mapmerge`: simulate scan logs, evaluate invalid-merge detectors, replay live.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mapmerge::config::Config;
use mapmerge::detect::change::ChangeDetector;
use mapmerge::detect::gridmap::GridmapDetector;
use mapmerge::detect::{Detector, DetectorKind};
use mapmerge::eval::{
    compute_roc, emit_reports, live_mode, read_results_csv, replay, run_sequence, summarize, write_events,
    write_results_csv, LiveEvent, SequenceResult,
};
use mapmerge::merge::{read_merge_spec, write_merge_spec};
use mapmerge::sim::scenarios::{four_way_crossing, random_flat, symmetric_room, twin_corridor, Scenario};
use mapmerge::sim::SequenceLog;
use mapmerge::{MergeLabel, MergeRecord};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "mapmerge", version, about = "Multi-epoch pose graphs with invalid-merge detection")]
struct Cli {
    /// TOML configuration; any key left out keeps its default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comma-separated detectors, e.g. `change,gridmap`. Defaults to the configured list.
    #[arg(long, global = true)]
    detectors: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario into `<out>/<id>.log` plus `<out>/<id>.merges`.
    Simulate {
        #[arg(long, value_enum, default_value_t = ScenarioName::Crossing)]
        scenario: ScenarioName,
        #[arg(long, value_enum, default_value_t = Label::Invalid)]
        label: Label,
        /// Random flats per label when `--scenario suite`.
        #[arg(long, default_value_t = 27)]
        flats: usize,
    },
    /// Replay logs with forced merges and write `<out>/results.csv`.
    Run {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Merge-spec file replacing the log's own triggers (single log only).
        #[arg(long)]
        merges: Option<PathBuf>,
        /// Also write the fused change labels of the final map to `<out>/<id>.labels.csv`.
        #[arg(long)]
        label_dump: bool,
        /// Also write the final gridmap pair to `<out>/<id>.current.pgm` and `<id>.other.pgm`.
        #[arg(long)]
        pgm: bool,
    },
    /// Turn a results.csv (or a directory holding one) into ROC curves and a summary.
    Eval { results: PathBuf },
    /// Replay a log as deployed: alarms undo merges. Writes `<out>/events.jsonl`.
    Live {
        log: PathBuf,
        #[arg(long)]
        merges: Option<PathBuf>,
    },
    /// Print the default configuration.
    Config,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioName {
    Crossing,
    TwinCorridor,
    SymmetricRoom,
    Flat,
    /// The three scripted worlds plus `--flats` random flats, both labels.
    Suite,
}

#[derive(Clone, Copy, ValueEnum)]
enum Label {
    Correct,
    Invalid,
}

impl From<Label> for MergeLabel {
    fn from(l: Label) -> Self {
        match l {
            Label::Correct => MergeLabel::Correct,
            Label::Invalid => MergeLabel::Invalid,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let detectors = match &cli.detectors {
        Some(s) => DetectorKind::parse_list(s)?,
        None => cfg.pipeline.detectors.clone(),
    };
    match cli.command {
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Simulate { scenario, label, flats } => simulate(&cfg, scenario, label.into(), flats, cli.seed, &cli.out),
        Command::Run {
            logs,
            merges,
            label_dump,
            pgm,
        } => run(&cfg, &detectors, &logs, merges.as_deref(), label_dump, pgm, &cli.out),
        Command::Eval { results } => eval(&results, &detectors, cli.detectors.is_some(), &cli.out),
        Command::Live { log, merges } => live(&cfg, &detectors, &log, merges.as_deref(), &cli.out),
    }
}

fn create_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn simulate(cfg: &Config, name: ScenarioName, label: MergeLabel, flats: usize, seed: u64, out: &Path) -> Result<()> {
    create_out(out)?;
    let items: Vec<(Scenario, u64)> = match name {
        ScenarioName::Crossing => vec![(four_way_crossing(label), seed)],
        ScenarioName::TwinCorridor => vec![(twin_corridor(label), seed)],
        ScenarioName::SymmetricRoom => vec![(symmetric_room(label), seed)],
        ScenarioName::Flat => vec![(random_flat(seed, label, &Default::default()), seed)],
        ScenarioName::Suite => mapmerge::eval::build_suite(&mapmerge::eval::SuiteSpec {
            flats_per_label: flats,
            seed,
            ..Default::default()
        })
        .into_iter()
        .map(|i| (i.scenario, i.seed))
        .collect(),
    };
    for (scenario, s) in items {
        let log = scenario.simulate(&cfg.sensor, s)?;
        let id = format!("{}_s{s}", scenario.name);
        log.save(&out.join(format!("{id}.log")))?;
        let spec = out.join(format!("{id}.merges"));
        std::fs::write(&spec, write_merge_spec(&log.merges())).with_context(|| format!("writing {}", spec.display()))?;
        println!("{id}: {} scans, {} epoch breaks, {} merges", log.scan_count(), log.epoch_breaks(), log.merges().len());
    }
    Ok(())
}

fn load_log(path: &Path) -> Result<SequenceLog> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    SequenceLog::parse(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn sequence_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| "sequence".into(), |s| s.to_string_lossy().into_owned())
}

fn run(
    cfg: &Config,
    detectors: &[DetectorKind],
    logs: &[PathBuf],
    merges: Option<&Path>,
    label_dump: bool,
    pgm: bool,
    out: &Path,
) -> Result<()> {
    if merges.is_some() && logs.len() > 1 {
        bail!("--merges applies to a single log");
    }
    let explicit: Option<Vec<MergeRecord>> = merges.map(read_merge_spec).transpose()?;
    let loaded = logs
        .iter()
        .map(|p| Ok((p, load_log(p)?)))
        .collect::<Result<Vec<_>>>()?;
    create_out(out)?;
    let results: Vec<SequenceResult> = loaded
        .par_iter()
        .map(|(path, log)| -> Result<SequenceResult> {
            let id = sequence_id(path);
            let r = run_sequence(&id, log, explicit.as_deref(), detectors, cfg)
                .with_context(|| format!("running {}", path.display()))?;
            if label_dump || pgm {
                dump_final(cfg, log, explicit.as_deref(), &id, label_dump, pgm, out)?;
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    write_results_csv(&results, &out.join("results.csv"))?;
    for r in &results {
        let cells: Vec<String> = r
            .detectors
            .iter()
            .map(|(k, d)| format!("{k}={:.3}", d.max_score))
            .collect();
        println!("{} ({}): {}", r.id, r.label.as_str(), cells.join(" "));
    }
    println!("wrote {}", out.join("results.csv").display());
    Ok(())
}

fn dump_final(
    cfg: &Config,
    log: &SequenceLog,
    merges: Option<&[MergeRecord]>,
    id: &str,
    label_dump: bool,
    pgm: bool,
    out: &Path,
) -> Result<()> {
    let store = replay(log, merges, cfg)?;
    let snap = store.snapshot();
    let Some(last) = snap.current().map(|v| v.id).max().filter(|_| snap.is_merged()) else {
        eprintln!("{id}: final map is not merged, nothing to dump");
        return Ok(());
    };
    if label_dump {
        let mut det = ChangeDetector::new(cfg.change.clone());
        det.score(&snap, last)?;
        let path = out.join(format!("{id}.labels.csv"));
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        det.write_label_dump(&mut w)?;
        w.flush()?;
    }
    if pgm {
        let (a, b) = GridmapDetector::new(cfg.gridmap.clone()).grids(&snap)?;
        for (grid, which) in [(a, "current"), (b, "other")] {
            let path = out.join(format!("{id}.{which}.pgm"));
            let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
            grid.write_pgm(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn eval(results: &Path, detectors: &[DetectorKind], explicit: bool, out: &Path) -> Result<()> {
    let path = if results.is_dir() { results.join("results.csv") } else { results.to_path_buf() };
    let results = read_results_csv(&path)?;
    // Without --detectors, evaluate whatever the results contain.
    let kinds: Vec<DetectorKind> = DetectorKind::ALL
        .iter()
        .copied()
        .filter(|k| results.iter().any(|r| r.detectors.contains_key(k)))
        .filter(|k| !explicit || detectors.contains(k))
        .collect();
    let curves = kinds.iter().map(|k| compute_roc(&results, *k)).collect::<mapmerge::Result<Vec<_>>>()?;
    emit_reports(&results, &curves, out)?;
    for s in summarize(&results, &curves) {
        println!(
            "{:<10} AUC {:.3}  {:.2} ms/vertex  ({} invalid, {} correct)",
            s.detector, s.auc, s.mean_ms, s.positives, s.negatives
        );
    }
    println!("wrote roc.csv, summary.csv, roc.svg to {}", out.display());
    Ok(())
}

fn live(cfg: &Config, detectors: &[DetectorKind], log: &Path, merges: Option<&Path>, out: &Path) -> Result<()> {
    let explicit = merges.map(read_merge_spec).transpose()?;
    let seq = load_log(log)?;
    let outcome = live_mode(&seq, explicit.as_deref(), detectors, cfg)?;
    create_out(out)?;
    let path = out.join("events.jsonl");
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    write_events(&outcome.events, &mut w)?;
    w.flush()?;
    for e in &outcome.events {
        match e {
            LiveEvent::MergeApplied { vertex, label, .. } => println!("vertex {vertex}: merge applied ({})", label.as_str()),
            LiveEvent::AlarmRaised { vertex, detector, score } => {
                println!("vertex {vertex}: {detector} alarm, score {score:.3}")
            }
            LiveEvent::UnmergeDone {
                vertex,
                removed_vertices,
                restored_graphs,
            } => println!("vertex {vertex}: unmerged, {removed_vertices} vertices removed, {restored_graphs} graphs restored"),
        }
    }
    println!("{} unmerges; wrote {}", outcome.unmerges(), path.display());
    Ok(())
}
