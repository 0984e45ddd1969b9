mod common;

use std::f64::consts::PI;

use mapmerge::config::Config;
use mapmerge::eval::replay;
use mapmerge::merge::{parse_merge_spec, write_merge_spec};
use mapmerge::serialize::{parse_graph, write_graph};
use mapmerge::sim::scenarios::{four_way_crossing, random_flat, twin_corridor};
use mapmerge::sim::{cast_beams, SensorModel, SequenceLog, World};
use mapmerge::MergeLabel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Nearest crossing of a long probe segment with any wall, by orientation tests.
fn cast_oracle(world: &World, origin: [f64; 2], angle: f64) -> Option<f64> {
    const FAR: f64 = 100.0;
    let far = [origin[0] + FAR * angle.cos(), origin[1] + FAR * angle.sin()];
    world
        .segments()
        .iter()
        .filter_map(|s| {
            let d1 = orient(s.a, s.b, origin);
            let d2 = orient(s.a, s.b, far);
            let crosses = d1 * d2 < 0.0 && orient(origin, far, s.a) * orient(origin, far, s.b) <= 0.0;
            crosses.then(|| FAR * d1 / (d1 - d2))
        })
        .min_by(f64::total_cmp)
}

#[test]
fn raycast_matches_orientation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut hits = 0;
    for _ in 0..200 {
        let world = common::random_room(&mut rng);
        let origin = [rng.gen_range(-3.8..3.8), rng.gen_range(-2.8..2.8)];
        for _ in 0..50 {
            let angle = rng.gen_range(-PI..PI);
            match (world.cast(origin, angle), cast_oracle(&world, origin, angle)) {
                (Some(a), Some(b)) => {
                    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                    hits += 1;
                }
                (None, None) => {}
                other => panic!("disagree at {origin:?} {angle}: {other:?}"),
            }
        }
    }
    // Origins sit inside a closed box, so every ray hits something.
    assert_eq!(hits, 200 * 50);
}

#[test]
fn beams_respect_range_and_bearings() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let world = common::random_room(&mut rng);
        let sensor = SensorModel {
            range_sigma: 0.0,
            ..common::random_sensor(&mut rng)
        };
        let pose = common::random_pose(&mut rng, [3.8, 2.8]);
        let (origin, inc) = sensor.bearings();
        let beams = cast_beams(&world, &pose, &sensor);
        assert_eq!(beams.len(), sensor.beams);
        for (k, r) in beams.iter().enumerate() {
            let expect = cast_oracle(&world, [pose.x, pose.y], pose.theta + origin + k as f64 * inc).unwrap();
            if (expect - sensor.range_max).abs() < 1e-6 {
                continue;
            }
            match r {
                Some(r) => assert!((r - expect).abs() < 1e-9 && *r <= sensor.range_max),
                None => assert!(expect > sensor.range_max),
            }
        }
    }
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let sensor = SensorModel::default();
    let scenario = twin_corridor(MergeLabel::Invalid);
    let a = scenario.simulate(&sensor, 7).unwrap().to_text();
    let b = scenario.simulate(&sensor, 7).unwrap().to_text();
    let c = scenario.simulate(&sensor, 8).unwrap().to_text();
    assert_eq!(a, b);
    assert_ne!(a, c);

    let f1 = random_flat(3, MergeLabel::Correct, &Default::default());
    let f2 = random_flat(3, MergeLabel::Correct, &Default::default());
    assert_eq!(f1.simulate(&sensor, 3).unwrap().to_text(), f2.simulate(&sensor, 3).unwrap().to_text());
}

#[test]
fn scan_log_and_merge_spec_round_trip() {
    let log = four_way_crossing(MergeLabel::Invalid)
        .simulate(&SensorModel::default(), 1)
        .unwrap();
    let text = log.to_text();
    let back = SequenceLog::parse(text.as_bytes()).unwrap();
    assert_eq!(back.to_text(), text);
    assert_eq!(back.scan_count(), log.scan_count());
    assert_eq!(back.epoch_breaks(), 1);

    let merges = log.merges();
    assert_eq!(merges.len(), 1);
    let spec = write_merge_spec(&merges);
    assert_eq!(parse_merge_spec(spec.as_bytes()).unwrap(), merges);
}

#[test]
fn replayed_graph_round_trips() {
    let log = twin_corridor(MergeLabel::Correct)
        .simulate(&SensorModel::default(), 2)
        .unwrap();
    let store = replay(&log, None, &Config::default()).unwrap();
    assert!(store.snapshot().is_merged());
    let text = write_graph(store.active());
    let g = parse_graph(&text).unwrap();
    assert_eq!(write_graph(&g), text);
    assert_eq!(g.vertex_count(), store.active().vertex_count());
    assert!(g.is_connected());
    assert!((g.chi2() - store.active().chi2()).abs() <= 1e-9 * (1.0 + g.chi2()));
}

#[test]
fn malformed_logs_are_rejected() {
    let bad = [
        "not json\n",
        "{\"type\":\"teleport\",\"t\":0.0}\n",
        "{\"type\":\"scan\",\"t\":0.0,\"odom\":[0.0,0.0],\"bearing_origin\":0.0,\"bearing_increment\":0.1,\"range_max\":5.0,\"ranges\":[1.0]}\n",
    ];
    for text in bad {
        assert!(SequenceLog::parse(text.as_bytes()).is_err(), "{text}");
    }
    let ok = "{\"type\":\"scan\",\"t\":0.0,\"odom\":[0.0,0.0,0.0],\"bearing_origin\":0.0,\"bearing_increment\":0.1,\"range_max\":5.0,\"ranges\":[1.0,null,9.0,-1.0]}\n";
    let log = SequenceLog::parse(ok.as_bytes()).unwrap();
    let scan = log.scans().next().unwrap().to_scan().unwrap();
    assert_eq!(scan.len(), 1);
}
