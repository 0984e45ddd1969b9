//! Cell-wise comparison of two tri-state occupancy grids: one from the newest
//! current-epoch keyframes, one from everything merged in from other epochs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{require_merged, Detector, DetectorKind};
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::raster::{cell_of, walk_segment};
use crate::scan::Scan;
use crate::store::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Cell {
    Unknown,
    Empty,
    Occupied,
}

/// Axis-aligned box `[min_x, min_y, max_x, max_y]` in meters.
pub type BBox = [f64; 4];

pub fn bbox_union(a: BBox, b: BBox) -> BBox {
    [a[0].min(b[0]), a[1].min(b[1]), a[2].max(b[2]), a[3].max(b[3])]
}

pub fn bbox_intersects(a: &BBox, b: &BBox) -> bool {
    a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriStateGrid {
    origin: [f64; 2],
    cell_size: f64,
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl TriStateGrid {
    /// An all-unknown grid covering `bbox`.
    pub fn new(bbox: BBox, cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        let width = (((bbox[2] - bbox[0]) / cell_size).ceil() as usize).max(1);
        let height = (((bbox[3] - bbox[1]) / cell_size).ceil() as usize).max(1);
        Self {
            origin: [bbox[0], bbox[1]],
            cell_size,
            width,
            height,
            cells: vec![Cell::Unknown; width * height],
        }
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    fn index(&self, i: i64, j: i64) -> Option<usize> {
        (i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height)
            .then(|| j as usize * self.width + i as usize)
    }

    pub fn get(&self, i: i64, j: i64) -> Option<Cell> {
        self.index(i, j).map(|k| self.cells[k])
    }

    pub fn set(&mut self, i: i64, j: i64, c: Cell) {
        if let Some(k) = self.index(i, j) {
            self.cells[k] = c;
        }
    }

    pub fn count(&self, c: Cell) -> usize {
        self.cells.iter().filter(|x| **x == c).count()
    }

    fn same_geometry(&self, other: &TriStateGrid) -> bool {
        self.origin == other.origin
            && self.cell_size == other.cell_size
            && self.width == other.width
            && self.height == other.height
    }

    /// Traces one scan: cells strictly between sensor and endpoint become empty
    /// unless already occupied; endpoint cells become occupied.
    pub fn insert_scan(&mut self, scan: &Scan) {
        let sensor = [scan.pose.x, scan.pose.y];
        let start = cell_of(self.origin, self.cell_size, sensor);
        for e in scan.global_endpoints() {
            let end = cell_of(self.origin, self.cell_size, e);
            let (origin, cs) = (self.origin, self.cell_size);
            walk_segment(origin, cs, sensor, e, |i, j| {
                if (i, j) != start && (i, j) != end {
                    if let Some(k) = self.index(i, j) {
                        if self.cells[k] == Cell::Unknown {
                            self.cells[k] = Cell::Empty;
                        }
                    }
                }
            });
            self.set(end.0, end.1, Cell::Occupied);
        }
    }

    /// Binary PGM (P5): unknown = 128, empty = 255, occupied = 0; top row is max y.
    pub fn write_pgm(&self, mut out: impl Write) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        let mut row = vec![0u8; self.width];
        for j in (0..self.height).rev() {
            for (i, px) in row.iter_mut().enumerate() {
                *px = match self.cells[j * self.width + i] {
                    Cell::Unknown => 128,
                    Cell::Empty => 255,
                    Cell::Occupied => 0,
                };
            }
            out.write_all(&row)?;
        }
        Ok(())
    }
}

pub fn build_grid<'a>(scans: impl IntoIterator<Item = &'a Scan>, bbox: BBox, cell_size: f64) -> TriStateGrid {
    let mut g = TriStateGrid::new(bbox, cell_size);
    for s in scans {
        g.insert_scan(s);
    }
    g
}

/// Marks every cell within Chebyshev distance `half_width` of an occupied cell
/// as occupied. Separable sliding-window max over rows, then columns.
pub fn dilate_occupied(grid: &TriStateGrid, half_width: usize) -> TriStateGrid {
    let (w, h) = (grid.width, grid.height);
    let occ: Vec<bool> = grid.cells.iter().map(|c| *c == Cell::Occupied).collect();
    let mut rows = vec![false; w * h];
    for j in 0..h {
        dilate_line(&occ[j * w..(j + 1) * w], &mut rows[j * w..(j + 1) * w], half_width);
    }
    let mut out = grid.clone();
    let mut col = vec![false; h];
    let mut col_out = vec![false; h];
    for i in 0..w {
        for j in 0..h {
            col[j] = rows[j * w + i];
        }
        dilate_line(&col, &mut col_out, half_width);
        for j in 0..h {
            if col_out[j] {
                out.cells[j * w + i] = Cell::Occupied;
            }
        }
    }
    out
}

fn dilate_line(input: &[bool], out: &mut [bool], r: usize) {
    let n = input.len();
    // Running count of set cells in the window [k - r, k + r].
    let mut count = input[..r.min(n)].iter().filter(|b| **b).count();
    for k in 0..n {
        if k + r < n && input[k + r] {
            count += 1;
        }
        if k > r && input[k - r - 1] {
            count -= 1;
        }
        out[k] = count > 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub r: f64,
    pub overlap: usize,
    pub contradictions: usize,
}

/// Counts cells known in both grids and cells where one is empty and the other
/// occupied. `r` is their ratio once the overlap reaches `tau_overlap`, else 0.
pub fn compare(a: &TriStateGrid, b: &TriStateGrid, tau_overlap: usize) -> Result<Comparison> {
    if !a.same_geometry(b) {
        return Err(Error::GridMismatch);
    }
    let mut overlap = 0;
    let mut contradictions = 0;
    for (x, y) in a.cells.iter().zip(&b.cells) {
        match (x, y) {
            (Cell::Unknown, _) | (_, Cell::Unknown) => {}
            (Cell::Empty, Cell::Occupied) | (Cell::Occupied, Cell::Empty) => {
                overlap += 1;
                contradictions += 1;
            }
            _ => overlap += 1,
        }
    }
    let r = if overlap >= tau_overlap && overlap > 0 {
        contradictions as f64 / overlap as f64
    } else {
        0.0
    };
    Ok(Comparison {
        r,
        overlap,
        contradictions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridmapDetectorConfig {
    pub n_recent: usize,
    /// Cell size in meters.
    pub cell_size: f64,
    /// Half-width of the square structuring element, in cells.
    pub dilation: usize,
    /// Minimum number of cells known in both grids.
    pub tau_overlap_cells: usize,
    pub t_unmerge: f64,
}

impl Default for GridmapDetectorConfig {
    fn default() -> Self {
        Self {
            n_recent: 10,
            cell_size: 0.025,
            dilation: 3,
            tau_overlap_cells: 800,
            t_unmerge: 0.2,
        }
    }
}

impl GridmapDetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_recent == 0 || !(self.cell_size > 0.0) || self.dilation == 0 || self.tau_overlap_cells == 0 {
            return Err(Error::Config("gridmap parameters must be positive".into()));
        }
        if !(self.t_unmerge > 0.0) {
            return Err(Error::Config("gridmap.t_unmerge must be positive".into()));
        }
        Ok(())
    }
}

pub struct GridmapDetector {
    cfg: GridmapDetectorConfig,
    last: Option<Comparison>,
}

impl GridmapDetector {
    pub fn new(cfg: GridmapDetectorConfig) -> Self {
        Self { cfg, last: None }
    }

    pub fn last_comparison(&self) -> Option<Comparison> {
        self.last
    }

    /// Both dilated grids for the current snapshot, current epoch first.
    pub fn grids(&self, snapshot: &Snapshot) -> Result<(TriStateGrid, TriStateGrid)> {
        require_merged(snapshot)?;
        let recent = snapshot.recent_current(self.cfg.n_recent);
        let bbox = recent
            .iter()
            .map(|v| v.scan.bounds())
            .reduce(bbox_union)
            .ok_or(Error::EmptyMap)?;
        let a = build_grid(recent.iter().map(|v| &v.scan), bbox, self.cfg.cell_size);
        let others = snapshot
            .others()
            .filter(|v| bbox_intersects(&v.scan.bounds(), &bbox))
            .map(|v| &v.scan);
        let b = build_grid(others, bbox, self.cfg.cell_size);
        Ok((dilate_occupied(&a, self.cfg.dilation), dilate_occupied(&b, self.cfg.dilation)))
    }
}

impl Detector for GridmapDetector {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Gridmap
    }

    fn threshold(&self) -> f64 {
        self.cfg.t_unmerge
    }

    fn reset(&mut self) {
        self.last = None;
    }

    fn score(&mut self, snapshot: &Snapshot, _new_vertex: VertexId) -> Result<f64> {
        let (a, b) = self.grids(snapshot)?;
        let c = compare(&a, &b, self.cfg.tau_overlap_cells)?;
        self.last = Some(c);
        Ok(c.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::Pose2;
    use crate::scan::PolarPoint;

    #[test]
    fn single_ray() {
        let scan = Scan::new(
            Pose2::new(0.0125, 0.0125, 0.0),
            vec![PolarPoint { bearing: 0.0, range: 1.0 }],
            10.0,
        )
        .unwrap();
        let g = build_grid([&scan], [0.0, 0.0, 1.1, 0.1], 0.025);
        assert_eq!(g.count(Cell::Empty), 39);
        assert_eq!(g.count(Cell::Occupied), 1);
        assert_eq!(g.get(40, 0), Some(Cell::Occupied));
        assert_eq!(g.get(0, 0), Some(Cell::Unknown));
    }

    #[test]
    fn no_scans_all_unknown() {
        let g = build_grid(std::iter::empty(), [0.0, 0.0, 1.0, 1.0], 0.1);
        assert_eq!(g.extents(), (10, 10));
        assert_eq!(g.count(Cell::Unknown), 100);
    }

    #[test]
    fn occupied_dominates() {
        let a = Scan::new(Pose2::new(0.05, 0.05, 0.0), vec![PolarPoint { bearing: 0.0, range: 0.5 }], 5.0).unwrap();
        let b = Scan::new(Pose2::new(0.05, 0.05, 0.0), vec![PolarPoint { bearing: 0.0, range: 0.9 }], 5.0).unwrap();
        let g1 = build_grid([&a, &b], [0.0, 0.0, 1.0, 0.2], 0.1);
        let g2 = build_grid([&b, &a], [0.0, 0.0, 1.0, 0.2], 0.1);
        assert_eq!(g1.get(5, 0), Some(Cell::Occupied));
        assert_eq!(g1, g2);
    }

    #[test]
    fn dilation_counts() {
        let mut g = TriStateGrid::new([0.0, 0.0, 2.0, 2.0], 0.1);
        g.set(10, 10, Cell::Occupied);
        assert_eq!(dilate_occupied(&g, 3).count(Cell::Occupied), 49);

        let mut g = TriStateGrid::new([0.0, 0.0, 2.0, 2.0], 0.1);
        g.set(0, 0, Cell::Occupied);
        assert_eq!(dilate_occupied(&g, 3).count(Cell::Occupied), 16);

        let g = TriStateGrid::new([0.0, 0.0, 2.0, 2.0], 0.1);
        assert_eq!(dilate_occupied(&g, 3), g);
    }

    #[test]
    fn dilation_overrides_empty() {
        let mut g = TriStateGrid::new([0.0, 0.0, 1.0, 1.0], 0.1);
        g.set(5, 5, Cell::Occupied);
        g.set(6, 5, Cell::Empty);
        let d = dilate_occupied(&g, 1);
        assert_eq!(d.get(6, 5), Some(Cell::Occupied));
        assert_eq!(d.get(7, 5), Some(Cell::Unknown));
    }

    #[test]
    fn compare_cases() {
        let bbox = [0.0, 0.0, 10.0, 10.0];
        let mut a = TriStateGrid::new(bbox, 0.1);
        let mut b = TriStateGrid::new(bbox, 0.1);
        a.cells.fill(Cell::Occupied);
        b.cells.fill(Cell::Empty);
        let c = compare(&a, &b, 800).unwrap();
        assert_eq!((c.overlap, c.contradictions, c.r), (10_000, 10_000, 1.0));
        let c = compare(&a, &a, 800).unwrap();
        assert_eq!((c.contradictions, c.r), (0, 0.0));

        let mut a = TriStateGrid::new(bbox, 0.1);
        let mut b = TriStateGrid::new(bbox, 0.1);
        a.cells[..700].fill(Cell::Occupied);
        b.cells[..700].fill(Cell::Empty);
        let c = compare(&a, &b, 800).unwrap();
        assert_eq!((c.overlap, c.contradictions, c.r), (700, 700, 0.0));

        let other = TriStateGrid::new([0.0, 0.0, 10.0, 9.0], 0.1);
        assert!(matches!(compare(&a, &other, 1), Err(Error::GridMismatch)));
    }

    #[test]
    fn pgm_header_and_values() {
        let mut g = TriStateGrid::new([0.0, 0.0, 0.3, 0.2], 0.1);
        g.set(0, 0, Cell::Occupied);
        g.set(1, 1, Cell::Empty);
        let mut buf = Vec::new();
        g.write_pgm(&mut buf).unwrap();
        assert_eq!(&buf[..11], b"P5\n3 2\n255\n");
        assert_eq!(&buf[11..], &[128, 255, 128, 0, 128, 128]);
    }
}
