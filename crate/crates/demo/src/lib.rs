//! Toy merge in the four-way-crossing world for the browser page.
//!
//! Epoch 0 walks from room C north through the crossing into room A. Epoch 1
//! walks from room C to the crossing and turns east into room B. The two
//! epochs are merged at the crossing with a user-chosen world error.

use mapmerge::config::Config;
use mapmerge::detect::change::{ChangeDetector, ClassLabel};
use mapmerge::detect::gridmap::{Cell, GridmapDetector};
use mapmerge::detect::histogram::HistogramDetector;
use mapmerge::detect::Detector;
use mapmerge::sim::scenarios::crossing_world;
use mapmerge::sim::{raycast, SensorModel};
use mapmerge::{Edge, EdgeKind, GraphStore, Information, Pose2, Snapshot, VertexId};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const STEP: f64 = 0.4;

fn line(from: [f64; 2], to: [f64; 2]) -> Vec<Pose2> {
    let (dx, dy) = (to[0] - from[0], to[1] - from[1]);
    let n = (dx.hypot(dy) / STEP).ceil() as usize;
    let theta = dy.atan2(dx);
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            Pose2::new(from[0] + t * dx, from[1] + t * dy, theta)
        })
        .collect()
}

/// Both epochs merged at the crossing; `error` is applied in the world frame
/// about the crossing center.
pub fn toy_store(error: Pose2) -> GraphStore {
    let world = crossing_world();
    let sensor = SensorModel {
        beams: 180,
        ..SensorModel::noiseless()
    };
    let info = Information::diagonal(2500.0, 2500.0, 10000.0).expect("positive");
    let via_crossing = |end: [f64; 2]| {
        let mut path = line([0.0, -5.5], [0.0, 0.0]);
        path.extend(line([0.0, 0.0], end).into_iter().skip(1));
        path
    };
    let (epoch0, epoch1) = (via_crossing([0.0, 5.2]), via_crossing([6.5, 0.0]));

    let mut store = GraphStore::new();
    let mut crossing = Vec::new();
    for path in [&epoch0, &epoch1] {
        store.begin_epoch();
        let mut prev: Option<Pose2> = None;
        let mut at_crossing = None;
        for p in path {
            let odom = prev.map_or(*p, |q| q.between(p));
            let id = store
                .add_vertex(raycast(&world, p, &sensor), odom, info)
                .expect("valid vertex");
            if p.x.hypot(p.y) < 1e-9 {
                at_crossing = Some((id, *p));
            }
            prev = Some(*p);
        }
        crossing.push(at_crossing.expect("path passes the crossing"));
    }
    let ((b, gt_b), (a, gt_a)) = (crossing[0], crossing[1]);
    let z = gt_a.inverse().compose(&error).compose(&gt_b);
    let edge = Edge::new(a, b, EdgeKind::MergeLoopClosure, z, info).expect("distinct vertices");
    store.merge(0, vec![edge]).expect("merge succeeds");
    store
}

fn newest(snap: &Snapshot) -> VertexId {
    snap.current().map(|v| v.id).max().expect("current epoch is not empty")
}

fn error_pose(angle_deg: f64, dx: f64, dy: f64) -> Pose2 {
    let r = Pose2::rotation_about([0.0, 0.0], angle_deg.to_radians());
    Pose2::new(dx, dy, 0.0).compose(&r)
}

#[derive(Debug, Serialize)]
pub struct ChangeView {
    pub score: f64,
    pub change: usize,
    pub agree: usize,
    /// `[x, y, label]` with label 0 = no information, 1 = change, 2 = agree.
    pub current: Vec<[f64; 3]>,
    pub other: Vec<[f64; 2]>,
}

pub fn change_view(angle_deg: f64, dx: f64, dy: f64) -> ChangeView {
    let store = toy_store(error_pose(angle_deg, dx, dy));
    let snap = store.snapshot();
    let cfg = Config::default();
    let mut det = ChangeDetector::new(cfg.change.clone());
    let score = det.score(&snap, newest(&snap)).expect("merged snapshot");
    let mut current = Vec::new();
    for v in snap.recent_current(cfg.change.n_recent) {
        let Some(labels) = det.fused_labels(v.id) else { continue };
        for (p, l) in v.scan.global_endpoints().into_iter().zip(labels) {
            let code = match l {
                ClassLabel::NoInfo => 0.0,
                ClassLabel::Change => 1.0,
                ClassLabel::Agree => 2.0,
            };
            current.push([p[0], p[1], code]);
        }
    }
    let other = snap.others().flat_map(|v| v.scan.global_endpoints()).collect();
    let counts = det.last_counts();
    ChangeView {
        score,
        change: counts.change,
        agree: counts.agree,
        current,
        other,
    }
}

#[derive(Debug)]
pub struct GridView {
    pub width: usize,
    pub height: usize,
    pub r: f64,
    pub overlap: usize,
    pub contradictions: usize,
    /// Row-major RGBA, top row first.
    pub rgba: Vec<u8>,
}

fn color(a: Cell, b: Cell) -> [u8; 4] {
    use Cell::*;
    match (a, b) {
        (Empty, Occupied) | (Occupied, Empty) => [220, 30, 30, 255],
        (Occupied, Occupied) => [0, 0, 0, 255],
        (Occupied, Unknown) => [20, 140, 60, 255],
        (Unknown, Occupied) => [40, 80, 200, 255],
        (Empty, Empty) => [255, 255, 255, 255],
        (Empty, Unknown) => [200, 235, 205, 255],
        (Unknown, Empty) => [205, 215, 245, 255],
        (Unknown, Unknown) => [150, 150, 150, 255],
    }
}

pub fn gridmap_view(angle_deg: f64, dx: f64, dy: f64) -> GridView {
    let store = toy_store(error_pose(angle_deg, dx, dy));
    let snap = store.snapshot();
    let mut det = GridmapDetector::new(Config::default().gridmap);
    det.score(&snap, newest(&snap)).expect("merged snapshot");
    let c = det.last_comparison().expect("just scored");
    let (a, b) = det.grids(&snap).expect("merged snapshot");
    let (width, height) = a.extents();
    let mut rgba = Vec::with_capacity(width * height * 4);
    for j in (0..height as i64).rev() {
        for i in 0..width as i64 {
            rgba.extend(color(a.get(i, j).unwrap(), b.get(i, j).unwrap()));
        }
    }
    GridView {
        width,
        height,
        r: c.r,
        overlap: c.overlap,
        contradictions: c.contradictions,
        rgba,
    }
}

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub angle_deg: f64,
    pub change: f64,
    pub gridmap: f64,
    pub histogram: f64,
}

/// Detector scores for rotation errors `0, step, 2·step, … ≤ max_deg`.
pub fn sweep(max_deg: f64, step_deg: f64) -> Vec<SweepPoint> {
    let cfg = Config::default();
    let n = (max_deg / step_deg).floor() as usize;
    (0..=n)
        .map(|k| {
            let angle_deg = k as f64 * step_deg;
            let store = toy_store(error_pose(angle_deg, 0.0, 0.0));
            let snap = store.snapshot();
            let v = newest(&snap);
            let score = |d: &mut dyn Detector| d.score(&snap, v).unwrap_or(0.0);
            SweepPoint {
                angle_deg,
                change: score(&mut ChangeDetector::new(cfg.change.clone())),
                gridmap: score(&mut GridmapDetector::new(cfg.gridmap.clone())),
                histogram: score(&mut HistogramDetector::new(cfg.histogram.clone())),
            }
        })
        .collect()
}

/// JSON [`ChangeView`] for a merge error of `angle_deg` about the crossing plus `(dx, dy)`.
#[wasm_bindgen(js_name = changeLabels)]
pub fn change_labels_js(angle_deg: f64, dx: f64, dy: f64) -> String {
    serde_json::to_string(&change_view(angle_deg, dx, dy)).expect("serializable")
}

#[wasm_bindgen(js_name = GridImage)]
pub struct GridImageJs(GridView);

#[wasm_bindgen(js_class = GridImage)]
impl GridImageJs {
    #[wasm_bindgen(constructor)]
    pub fn new(angle_deg: f64, dx: f64, dy: f64) -> GridImageJs {
        GridImageJs(gridmap_view(angle_deg, dx, dy))
    }

    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.0.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.0.height
    }

    #[wasm_bindgen(getter)]
    pub fn r(&self) -> f64 {
        self.0.r
    }

    #[wasm_bindgen(getter)]
    pub fn overlap(&self) -> usize {
        self.0.overlap
    }

    #[wasm_bindgen(getter)]
    pub fn contradictions(&self) -> usize {
        self.0.contradictions
    }

    pub fn rgba(&self) -> Vec<u8> {
        self.0.rgba.clone()
    }
}

/// JSON list of [`SweepPoint`].
#[wasm_bindgen(js_name = scoreSweep)]
pub fn score_sweep_js(max_deg: f64, step_deg: f64) -> String {
    serde_json::to_string(&sweep(max_deg, step_deg)).expect("serializable")
}
