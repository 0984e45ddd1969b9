//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use mapmerge::detect::change::{ChangeDetectorConfig, ClassLabel};
use mapmerge::detect::gridmap::{BBox, Cell};
use mapmerge::merge::MergeLabel;
use mapmerge::sim::{noisy_beams, SensorModel, World};
use mapmerge::{Pose2, Scan};
use nalgebra::{DMatrix, DVector, Matrix3};
use rand::Rng;

fn wrap(a: f64) -> f64 {
    let mut a = a.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

fn endpoints(scan: &Scan) -> Vec<[f64; 2]> {
    let p = scan.pose;
    scan.points()
        .iter()
        .map(|q| {
            let a = p.theta + q.bearing;
            [p.x + q.range * a.cos(), p.y + q.range * a.sin()]
        })
        .collect()
}

/// Linear scan over every source return for every target point.
pub fn classify_brute(target: &Scan, source: &Scan, cfg: &ChangeDetectorConfig) -> Vec<ClassLabel> {
    let s = source.pose;
    let (c, sn) = (s.theta.cos(), s.theta.sin());
    endpoints(target)
        .into_iter()
        .map(|g| {
            let (dx, dy) = (g[0] - s.x, g[1] - s.y);
            let (lx, ly) = (c * dx + sn * dy, -sn * dx + c * dy);
            let bearing = ly.atan2(lx);
            let r = lx.hypot(ly);
            if r > source.range_max() {
                return ClassLabel::NoInfo;
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for q in source.points() {
                let d = (q.bearing - bearing).rem_euclid(TAU);
                if d.min(TAU - d) <= cfg.t_alpha {
                    lo = lo.min(q.range);
                    hi = hi.max(q.range);
                }
            }
            if lo > hi {
                ClassLabel::NoInfo
            } else if r < lo - cfg.t_r {
                ClassLabel::Change
            } else if r > hi + cfg.t_r {
                ClassLabel::NoInfo
            } else if hi - lo <= 2.0 * cfg.t_r {
                ClassLabel::Agree
            } else {
                ClassLabel::NoInfo
            }
        })
        .collect()
}

/// Length fraction of segment `a → b` inside the box `[x0, x1] × [y0, y1]`.
fn clip_fraction(a: [f64; 2], b: [f64; 2], x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = [b[0] - a[0], b[1] - a[1]];
    for (p, q) in [
        (-d[0], a[0] - x0),
        (d[0], x1 - a[0]),
        (-d[1], a[1] - y0),
        (d[1], y1 - a[1]),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return 0.0;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t1 - t0).max(0.0)
}

/// Row-major tri-state cells decided cell by cell: occupied if any endpoint
/// falls inside, else empty if some ray crosses it with positive length
/// outside its own start and end cells, else unknown.
pub fn grid_oracle(scans: &[Scan], bbox: BBox, cs: f64) -> (usize, usize, Vec<Cell>) {
    let w = (((bbox[2] - bbox[0]) / cs).ceil() as usize).max(1);
    let h = (((bbox[3] - bbox[1]) / cs).ceil() as usize).max(1);
    let cell = |p: [f64; 2]| {
        (
            ((p[0] - bbox[0]) / cs).floor() as i64,
            ((p[1] - bbox[1]) / cs).floor() as i64,
        )
    };
    let mut occupied = vec![false; w * h];
    let mut crossed = vec![false; w * h];
    for s in scans {
        let a = [s.pose.x, s.pose.y];
        let start = cell(a);
        for e in endpoints(s) {
            let end = cell(e);
            let (i0, i1) = (start.0.min(end.0).max(0), start.0.max(end.0).min(w as i64 - 1));
            let (j0, j1) = (start.1.min(end.1).max(0), start.1.max(end.1).min(h as i64 - 1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if (i, j) == start || (i, j) == end {
                        continue;
                    }
                    let x0 = bbox[0] + i as f64 * cs;
                    let y0 = bbox[1] + j as f64 * cs;
                    if clip_fraction(a, e, x0, x0 + cs, y0, y0 + cs) > 1e-12 {
                        crossed[j as usize * w + i as usize] = true;
                    }
                }
            }
            if end.0 >= 0 && end.1 >= 0 && (end.0 as usize) < w && (end.1 as usize) < h {
                occupied[end.1 as usize * w + end.0 as usize] = true;
            }
        }
    }
    let cells = occupied
        .iter()
        .zip(&crossed)
        .map(|(o, c)| match (o, c) {
            (true, _) => Cell::Occupied,
            (false, true) => Cell::Empty,
            _ => Cell::Unknown,
        })
        .collect();
    (w, h, cells)
}

/// Edge for [`dense_gauss_newton`]: `(from, to, z, information)` by vertex index.
pub type DenseEdge = (usize, usize, [f64; 3], Matrix3<f64>);

fn residual(a: &[f64], b: &[f64], z: &[f64; 3]) -> [f64; 3] {
    let (ca, sa) = (a[2].cos(), a[2].sin());
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let (rx, ry) = (ca * dx + sa * dy - z[0], -sa * dx + ca * dy - z[1]);
    let (cz, sz) = (z[2].cos(), z[2].sin());
    [cz * rx + sz * ry, -sz * rx + cz * ry, wrap(b[2] - a[2] - z[2])]
}

/// Plain Gauss–Newton on a dense system with central-difference Jacobians.
pub fn dense_gauss_newton(initial: &[[f64; 3]], edges: &[DenseEdge], fixed: usize) -> Vec<[f64; 3]> {
    let n = initial.len();
    let mut x: Vec<f64> = initial.iter().flatten().copied().collect();
    let free: Vec<usize> = (0..n).filter(|v| *v != fixed).collect();
    let m = 3 * free.len();
    let stack = |x: &[f64]| -> DVector<f64> {
        let mut r = DVector::zeros(3 * edges.len());
        for (k, (i, j, z, _)) in edges.iter().enumerate() {
            let e = residual(&x[3 * i..3 * i + 3], &x[3 * j..3 * j + 3], z);
            r.rows_mut(3 * k, 3).copy_from_slice(&e);
        }
        r
    };
    let mut omega = DMatrix::zeros(3 * edges.len(), 3 * edges.len());
    for (k, e) in edges.iter().enumerate() {
        omega.view_mut((3 * k, 3 * k), (3, 3)).copy_from(&e.3);
    }
    for _ in 0..200 {
        let r = stack(&x);
        let mut jac = DMatrix::zeros(3 * edges.len(), m);
        let h = 1e-6;
        for (c, v) in free.iter().enumerate() {
            for d in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[3 * v + d] += h;
                xm[3 * v + d] -= h;
                let mut col = (stack(&xp) - stack(&xm)) / (2.0 * h);
                // Angle residuals may wrap between the two probes.
                for k in 0..edges.len() {
                    col[3 * k + 2] = wrap(col[3 * k + 2] * 2.0 * h) / (2.0 * h);
                }
                jac.set_column(3 * c + d, &col);
            }
        }
        let hess = jac.transpose() * &omega * &jac;
        let g = jac.transpose() * &omega * &r;
        let step = hess.cholesky().expect("dense system is positive definite").solve(&(-g));
        for (c, v) in free.iter().enumerate() {
            for d in 0..3 {
                x[3 * v + d] += step[3 * c + d];
            }
        }
        if step.amax() < 1e-13 {
            break;
        }
    }
    x.chunks(3).map(|c| [c[0], c[1], wrap(c[2])]).collect()
}

/// Twice the pairwise-concordance count and the class sizes: an invalid merge
/// outscoring a correct one counts 2, a tie counts 1.
pub fn concordance(scores: &[(f64, MergeLabel)]) -> (u64, u64, u64) {
    let pos: Vec<f64> = scores.iter().filter(|s| s.1 == MergeLabel::Invalid).map(|s| s.0).collect();
    let neg: Vec<f64> = scores.iter().filter(|s| s.1 == MergeLabel::Correct).map(|s| s.0).collect();
    let mut c = 0;
    for p in &pos {
        for n in &neg {
            c += match p.partial_cmp(n).unwrap() {
                std::cmp::Ordering::Greater => 2,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Less => 0,
            };
        }
    }
    (c, pos.len() as u64, neg.len() as u64)
}

/// A closed 8 × 6 room with three random inner walls.
pub fn random_room(rng: &mut impl Rng) -> World {
    let mut w = World::new();
    w.add_box([-4.0, -3.0], [4.0, 3.0]).unwrap();
    for _ in 0..3 {
        let a = [rng.gen_range(-3.5..3.5), rng.gen_range(-2.5..2.5)];
        let len = rng.gen_range(0.5..3.0);
        let t: f64 = rng.gen_range(0.0..TAU);
        let b = [(a[0] + len * t.cos()).clamp(-3.9, 3.9), (a[1] + len * t.sin()).clamp(-2.9, 2.9)];
        if (a[0] - b[0]).hypot(a[1] - b[1]) > 0.1 {
            w.add_segment(a, b).unwrap();
        }
    }
    w
}

/// A sensor with a random beam count and field of view.
pub fn random_sensor(rng: &mut impl Rng) -> SensorModel {
    let full = rng.gen_bool(0.5);
    SensorModel {
        beams: rng.gen_range(30..=360),
        span: if full { TAU } else { rng.gen_range(1.5..6.0) },
        range_max: rng.gen_range(3.0..10.0),
        range_sigma: rng.gen_range(0.0..0.05),
        ..SensorModel::default()
    }
}

pub fn random_pose(rng: &mut impl Rng, half: [f64; 2]) -> Pose2 {
    Pose2::new(
        rng.gen_range(-half[0]..half[0]),
        rng.gen_range(-half[1]..half[1]),
        rng.gen_range(-PI..PI),
    )
}

/// A noisy scan of `world` from `pose`.
pub fn scan_in(world: &World, pose: Pose2, sensor: &SensorModel, rng: &mut impl Rng) -> Scan {
    let (origin, inc) = sensor.bearings();
    let beams = noisy_beams(world, &pose, sensor, rng);
    Scan::from_beams(pose, origin, inc, &beams, sensor.range_max).unwrap()
}

/// Counts per label, for sanity checks on generated cases.
pub fn label_histogram(labels: &[ClassLabel]) -> BTreeMap<ClassLabel, usize> {
    let mut m = BTreeMap::new();
    for l in labels {
        *m.entry(*l).or_insert(0) += 1;
    }
    m
}
