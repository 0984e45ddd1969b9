//! Canonical line-oriented text encoding of a [`SlamGraph`].
//!
//! ```text
//! MMGRAPH 1
//! G <epoch> <epoch> ...
//! V <id> <epoch> <x> <y> <theta> <range_max> <n> <bearing_1> <range_1> ... <bearing_n> <range_n>
//! E <from> <to> <kind> <dx> <dy> <dtheta> <i11> <i12> <i13> <i21> <i22> <i23> <i31> <i32> <i33>
//! ```
//!
//! Fields are separated by one ASCII space and every line ends with `\n`.
//! Vertex lines are sorted by id; edge lines keep graph order. Reals use the
//! shortest decimal form that parses back to the same `f64`, so a
//! write → parse → write cycle is byte-identical. See `docs/graph-format.md`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::SplitAsciiWhitespace;

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeKind, EpochId, Information, SlamGraph, Vertex, VertexId};
use crate::pose::Pose2;
use crate::scan::{PolarPoint, Scan};

pub const MAGIC: &str = "MMGRAPH 1";

pub fn write_graph(g: &SlamGraph) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push('G');
    for e in g.epochs() {
        let _ = write!(out, " {e}");
    }
    out.push('\n');
    for v in g.vertices() {
        let p = v.pose();
        let s = v.scan();
        let _ = write!(
            out,
            "V {} {} {} {} {} {} {}",
            v.id(),
            v.epoch(),
            p.x,
            p.y,
            p.theta,
            s.range_max(),
            s.len()
        );
        for pt in s.points() {
            let _ = write!(out, " {} {}", pt.bearing, pt.range);
        }
        out.push('\n');
    }
    for e in g.edges() {
        let z = e.relative_pose;
        let _ = write!(
            out,
            "E {} {} {} {} {} {}",
            e.from,
            e.to,
            e.kind.as_str(),
            z.x,
            z.y,
            z.theta
        );
        for m in e.information.to_row_array() {
            let _ = write!(out, " {m}");
        }
        out.push('\n');
    }
    out
}

struct Fields<'a> {
    line: usize,
    it: SplitAsciiWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next_str(&mut self, what: &str) -> Result<&'a str> {
        self.it.next().ok_or_else(|| self.err(format!("missing {what}")))
    }

    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let s = self.next_str(what)?;
        s.parse().map_err(|_| self.err(format!("bad {what} '{s}'")))
    }

    fn finish(mut self) -> Result<()> {
        match self.it.next() {
            Some(s) => Err(self.err(format!("unexpected trailing field '{s}'"))),
            None => Ok(()),
        }
    }
}

pub fn parse_graph(text: &str) -> Result<SlamGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header '{MAGIC}'"),
            })
        }
    }
    let mut epochs = None;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (line, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let mut f = Fields {
            line,
            it: l.split_ascii_whitespace(),
        };
        match f.next_str("record tag")? {
            "G" => {
                if epochs.is_some() {
                    return Err(f.err("duplicate epoch record"));
                }
                let mut set = BTreeSet::new();
                for s in f.it.by_ref() {
                    let e: u32 = s.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad epoch '{s}'"),
                    })?;
                    set.insert(EpochId(e));
                }
                epochs = Some(set);
            }
            "V" => {
                let id = VertexId(f.next("vertex id")?);
                let epoch = EpochId(f.next("epoch")?);
                let pose = Pose2 {
                    x: f.next("x")?,
                    y: f.next("y")?,
                    theta: f.next("theta")?,
                };
                let range_max: f64 = f.next("range_max")?;
                let n: usize = f.next("point count")?;
                let mut pts = Vec::with_capacity(n);
                for _ in 0..n {
                    pts.push(PolarPoint {
                        bearing: f.next("bearing")?,
                        range: f.next("range")?,
                    });
                }
                f.finish()?;
                let scan = Scan::new(pose, pts, range_max).map_err(|e| Error::Parse {
                    line,
                    msg: e.to_string(),
                })?;
                vertices.push((line, Vertex::new(id, epoch, scan)));
            }
            "E" => {
                let from = VertexId(f.next("from")?);
                let to = VertexId(f.next("to")?);
                let kind_s = f.next_str("edge kind")?;
                let kind = EdgeKind::parse(kind_s)
                    .ok_or_else(|| f.err(format!("unknown edge kind '{kind_s}'")))?;
                let z = Pose2 {
                    x: f.next("dx")?,
                    y: f.next("dy")?,
                    theta: f.next("dtheta")?,
                };
                let mut m = [0.0; 9];
                for v in m.iter_mut() {
                    *v = f.next("information entry")?;
                }
                f.finish()?;
                let info = Information::from_row_slice(&m).map_err(|e| f_err(line, e))?;
                let edge = Edge::new(from, to, kind, z, info).map_err(|e| f_err(line, e))?;
                edges.push((line, edge));
            }
            other => return Err(f.err(format!("unknown record tag '{other}'"))),
        }
    }
    let epochs = epochs.ok_or(Error::Parse {
        line: 2,
        msg: "missing epoch record".into(),
    })?;
    let mut g = SlamGraph::from_parts(epochs, Vec::new(), Vec::new())?;
    for (line, v) in vertices {
        g.insert_vertex(v).map_err(|e| f_err(line, e))?;
    }
    for (line, e) in edges {
        g.add_edge(e).map_err(|e| f_err(line, e))?;
    }
    Ok(g)
}

fn f_err(line: usize, e: Error) -> Error {
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> SlamGraph {
        let s1 = Scan::new(
            Pose2::new(0.0, 0.0, 0.0),
            vec![
                PolarPoint { bearing: -0.5, range: 1.25 },
                PolarPoint { bearing: 0.1, range: 3.0 },
            ],
            10.0,
        )
        .unwrap();
        let s2 = s1.with_pose(Pose2::new(1.0, -0.5, 0.3));
        let info = Information::from_row_slice(&[100.0, 1.0, 0.0, 1.0, 100.0, 0.0, 0.0, 0.0, 400.0]).unwrap();
        SlamGraph::from_parts(
            BTreeSet::from([EpochId(1), EpochId(3)]),
            vec![
                Vertex::new(VertexId(7), EpochId(1), s1),
                Vertex::new(VertexId(9), EpochId(3), s2),
            ],
            vec![Edge::new(VertexId(7), VertexId(9), EdgeKind::MergeLoopClosure, Pose2::new(1.0, -0.5, 0.3), info)
                .unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn golden_encoding() {
        let text = write_graph(&sample());
        let expected = "MMGRAPH 1\n\
G 1 3\n\
V 7 1 0 0 0 10 2 -0.5 1.25 0.1 3\n\
V 9 3 1 -0.5 0.3 10 2 -0.5 1.25 0.1 3\n\
E 7 9 merge_loop_closure 1 -0.5 0.3 100 1 0 1 100 0 0 0 400\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn parse_back() {
        let g = sample();
        let back = parse_graph(&write_graph(&g)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "MMGRAPH 1\nG 1\nV 1 1 0 0 0 10 1 0.0\n";
        match parse_graph(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "MMGRAPH 1\nG 1\nV 1 1 0 0 0 10 0\nE 1 2 odometry 0 0 0 1 0 0 0 1 0 0 0 1\n";
        match parse_graph(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_graph("nope"), Err(Error::Parse { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn text_round_trip_is_byte_identical(
            x in -1e3..1e3f64, y in -1e3..1e3f64, t in -3.0..3.0f64,
            ranges in proptest::collection::vec(0.01..10.0f64, 0..20),
        ) {
            let pts: Vec<PolarPoint> = ranges.iter().enumerate()
                .map(|(i, r)| PolarPoint { bearing: -3.0 + 0.1 * i as f64, range: *r })
                .collect();
            let scan = Scan::new(Pose2::new(x, y, t), pts, 10.0).unwrap();
            let g = SlamGraph::from_parts(
                BTreeSet::from([EpochId(2)]),
                vec![Vertex::new(VertexId(1), EpochId(2), scan)],
                vec![],
            ).unwrap();
            let a = write_graph(&g);
            let back = parse_graph(&a).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(write_graph(&back), a);
        }
    }
}
