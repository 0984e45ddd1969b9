use mapmerge::config::Config;
use mapmerge::detect::DetectorKind;
use mapmerge::eval::{live_mode, run_sequence, LiveEvent};
use mapmerge::sim::scenarios::{four_way_crossing, twin_corridor};
use mapmerge::sim::SequenceLog;
use mapmerge::{Error, MergeLabel};

fn crossing(label: MergeLabel) -> SequenceLog {
    four_way_crossing(label)
        .simulate(&Config::default().sensor, 0)
        .unwrap()
}

#[test]
fn crossing_scores_separate_labels() {
    let cfg = Config::default();
    let kinds = [DetectorKind::Change, DetectorKind::Histogram];
    let good = run_sequence("good", &crossing(MergeLabel::Correct), None, &kinds, &cfg).unwrap();
    let bad = run_sequence("bad", &crossing(MergeLabel::Invalid), None, &kinds, &cfg).unwrap();
    assert_eq!(good.label, MergeLabel::Correct);
    assert_eq!(bad.label, MergeLabel::Invalid);
    let change = |r: &mapmerge::eval::SequenceResult| r.detectors[&DetectorKind::Change].clone();
    assert!(change(&good).max_score < 0.1, "{:?}", change(&good));
    assert!(change(&bad).max_score > 0.5, "{:?}", change(&bad));
    assert!(change(&bad).first_alarm.is_some());
    assert!(change(&good).evaluations > 0);
    // Only requested detectors appear.
    assert_eq!(bad.detectors.keys().copied().collect::<Vec<_>>(), kinds.to_vec());
}

#[test]
fn sequence_without_merges_is_an_error() {
    let log = crossing(MergeLabel::Correct);
    let err = run_sequence("x", &log, Some(&[]), &[DetectorKind::Change], &Config::default()).unwrap_err();
    assert!(matches!(err, Error::NoMerge), "{err}");
}

#[test]
fn live_unmerge_restores_epochs() {
    let cfg = Config::default();
    let log = twin_corridor(MergeLabel::Invalid).simulate(&cfg.sensor, 0).unwrap();
    let out = live_mode(&log, None, &[DetectorKind::Change], &cfg).unwrap();
    assert_eq!(out.unmerges(), 1);
    let Some(LiveEvent::UnmergeDone {
        removed_vertices,
        restored_graphs,
        ..
    }) = out.events.last()
    else {
        panic!("{:?}", out.events)
    };
    assert_eq!(*restored_graphs, 1);
    assert!(*removed_vertices > 0);

    let store = &out.store;
    assert_eq!(store.active().epochs().len(), 1);
    assert!(store.backups().is_empty());
    assert_eq!(store.inactive().len(), 1);
    assert_eq!(
        store.total_vertices(),
        log.scan_count(),
        "every scan is still in exactly one graph"
    );
    assert!(!store.snapshot().is_merged());
}

#[test]
fn live_keeps_correct_merge() {
    let cfg = Config::default();
    let log = twin_corridor(MergeLabel::Correct).simulate(&cfg.sensor, 0).unwrap();
    let out = live_mode(&log, None, &[DetectorKind::Change, DetectorKind::Gridmap], &cfg).unwrap();
    assert_eq!(out.unmerges(), 0, "{:?}", out.events);
    assert!(matches!(out.events.first(), Some(LiveEvent::MergeApplied { .. })));
    assert_eq!(out.store.active().epochs().len(), 2);
    assert_eq!(out.store.backups().len(), 1);
}
