use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::{map_indices, ExecutionMode};
use crate::grid_field::{DomainSpec, Lattice, Point, Shape};
use crate::rng::{streams, substream_rng};

use super::path::BrownianPath;

const WALKER_BATCH: usize = 256;
const MIN_WALKERS: usize = 1000;
const MAX_JUMPS: usize = 1_000_000;

/// Bucketed polyline for nearest-point queries.
///
/// Each bucket lists the segments whose bounding box overlaps it, and a
/// Chebyshev distance transform over buckets gives a cheap lower bound on
/// the distance to the polyline far from it.
#[derive(Debug, Clone)]
pub struct RangeIndex {
    points: Vec<Point>,
    cell: f64,
    m: usize,
    starts: Vec<u32>,
    segments: Vec<u32>,
    ring: Vec<u32>,
}

impl RangeIndex {
    /// Indexes the polyline through `points` over `[-1, 1]²` with buckets of
    /// side about `cell`.
    pub fn new(points: &[Point], cell: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Input("a range needs at least one segment".into()));
        }
        if !(cell > 0.0) {
            return Err(Error::Parameter(format!("bucket size must be positive, got {cell}")));
        }
        let m = ((2.0 / cell).ceil() as usize).clamp(1, 4096);
        let cell = 2.0 / m as f64;
        let bucket = |v: f64| (((v + 1.0) / cell).floor().max(0.0) as usize).min(m - 1);

        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); m * m];
        for (s, w) in points.windows(2).enumerate() {
            let (i0, i1) = (bucket(w[0].x.min(w[1].x)), bucket(w[0].x.max(w[1].x)));
            let (j0, j1) = (bucket(w[0].y.min(w[1].y)), bucket(w[0].y.max(w[1].y)));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    lists[j * m + i].push(s as u32);
                }
            }
        }
        let mut starts = Vec::with_capacity(m * m + 1);
        let mut segments = Vec::new();
        starts.push(0);
        for l in &lists {
            segments.extend_from_slice(l);
            starts.push(segments.len() as u32);
        }

        let mut ring = vec![u32::MAX; m * m];
        let mut queue = VecDeque::new();
        for (b, l) in lists.iter().enumerate() {
            if !l.is_empty() {
                ring[b] = 0;
                queue.push_back(b);
            }
        }
        while let Some(b) = queue.pop_front() {
            let (i, j) = ((b % m) as i64, (b / m) as i64);
            for dj in -1..=1 {
                for di in -1..=1 {
                    let (a, c) = (i + di, j + dj);
                    if a < 0 || c < 0 || a >= m as i64 || c >= m as i64 {
                        continue;
                    }
                    let nb = c as usize * m + a as usize;
                    if ring[nb] == u32::MAX {
                        ring[nb] = ring[b] + 1;
                        queue.push_back(nb);
                    }
                }
            }
        }
        Ok(RangeIndex { points: points.to_vec(), cell, m, starts, segments, ring })
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    fn bucket_of(&self, p: Point) -> (usize, usize) {
        let f = |v: f64| (((v + 1.0) / self.cell).floor().max(0.0) as usize).min(self.m - 1);
        (f(p.x), f(p.y))
    }

    fn segment_nearest(&self, s: usize, p: Point) -> (f64, Point) {
        let (a, b) = (self.points[s], self.points[s + 1]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 { (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let q = Point::new(a.x + t * dx, a.y + t * dy);
        let (ex, ey) = (p.x - q.x, p.y - q.y);
        (ex * ex + ey * ey, q)
    }

    /// Nearest point of the polyline to `p` and its distance.
    pub fn nearest(&self, p: Point) -> (f64, Point) {
        let (bi, bj) = self.bucket_of(p);
        let mut best = (f64::INFINITY, p);
        let m = self.m as i64;
        for k in 0..self.m as i64 {
            for dj in -k..=k {
                for di in -k..=k {
                    if di.abs() != k && dj.abs() != k {
                        continue;
                    }
                    let (a, c) = (bi as i64 + di, bj as i64 + dj);
                    if a < 0 || c < 0 || a >= m || c >= m {
                        continue;
                    }
                    let b = c as usize * self.m + a as usize;
                    for &s in &self.segments[self.starts[b] as usize..self.starts[b + 1] as usize] {
                        let cand = self.segment_nearest(s as usize, p);
                        if cand.0 < best.0 {
                            best = cand;
                        }
                    }
                }
            }
            // Buckets beyond ring k are at least k·cell away.
            let reach = k as f64 * self.cell;
            if best.0.is_finite() && best.0 <= reach * reach {
                break;
            }
        }
        (best.0.sqrt(), best.1)
    }

    /// Exact distance from `p` to the polyline.
    pub fn distance(&self, p: Point) -> f64 {
        self.nearest(p).0
    }

    /// A radius `r` with `r <= distance(p)`, exact when the polyline is within
    /// two buckets of `p`.
    fn safe_radius(&self, p: Point) -> (f64, Option<Point>) {
        let (bi, bj) = self.bucket_of(p);
        let k = self.ring[bj * self.m + bi];
        if k >= 3 {
            return ((k - 1) as f64 * self.cell, None);
        }
        let (d, q) = self.nearest(p);
        (d, Some(q))
    }
}

/// A lattice cell receiving harmonic-measure mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitCell {
    pub ci: usize,
    pub cj: usize,
    pub count: u64,
    pub weight: f64,
    /// Hits on the outer circle `∂D` rather than on the range.
    pub is_boundary: bool,
}

/// Empirical harmonic measure of `D \ B[0, τ]` seen from `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicMeasureSample {
    pub z: Point,
    pub walkers: usize,
    pub capture: f64,
    lattice: Lattice,
    cells: Vec<HitCell>,
}

impl HarmonicMeasureSample {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Hit cells ordered by `(is_boundary, cj, ci)`.
    pub fn cells(&self) -> &[HitCell] {
        &self.cells
    }

    pub fn cell_center(&self, cell: &HitCell) -> Point {
        self.lattice.cell_center(cell.ci, cell.cj)
    }

    /// Mass of walkers absorbed by the outer circle.
    pub fn boundary_mass(&self) -> f64 {
        self.cells.iter().filter(|c| c.is_boundary).map(|c| c.weight).sum()
    }

    /// Mass of walkers absorbed by the range.
    pub fn range_mass(&self) -> f64 {
        self.cells.iter().filter(|c| !c.is_boundary).map(|c| c.weight).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct HitKey {
    is_boundary: bool,
    cj: usize,
    ci: usize,
}

fn check_disk(domain: &DomainSpec) -> Result<()> {
    if domain.shape() != Shape::UnitDisk {
        return Err(Error::Config(format!("harmonic measure needs the unit disk, got {}", domain.shape())));
    }
    Ok(())
}

/// Harmonic measure of `D \ B[0, τ]` seen from `z`, by walk-on-spheres with
/// absorption within `capture` of the range or of `∂D`.
pub fn harmonic_measure(
    path: &BrownianPath,
    domain: &DomainSpec,
    z: Point,
    walkers: usize,
    capture: f64,
    seed: u64,
) -> Result<HarmonicMeasureSample> {
    harmonic_measure_polyline(path.positions(), domain, z, walkers, capture, seed)
}

/// [`harmonic_measure`] for an arbitrary polyline range.
pub fn harmonic_measure_polyline(
    points: &[Point],
    domain: &DomainSpec,
    z: Point,
    walkers: usize,
    capture: f64,
    seed: u64,
) -> Result<HarmonicMeasureSample> {
    check_disk(domain)?;
    if walkers < MIN_WALKERS {
        return Err(Error::Precondition(format!("need at least {MIN_WALKERS} walkers, got {walkers}")));
    }
    if !(capture > 0.0 && capture < 0.25) {
        return Err(Error::Parameter(format!("capture radius must lie in (0, 1/4), got {capture}")));
    }
    if 1.0 - z.norm() <= capture {
        return Err(Error::Domain(format!("viewpoint ({}, {}) is not inside the disk", z.x, z.y)));
    }
    let lattice = domain.lattice();
    let index = RangeIndex::new(points, capture.max(lattice.h))?;
    if index.distance(z) <= capture {
        return Err(Error::Precondition(format!(
            "viewpoint ({}, {}) lies in the capture tube of the range",
            z.x, z.y
        )));
    }

    let batches = walkers.div_ceil(WALKER_BATCH);
    let per_batch = map_indices(ExecutionMode::default(), batches, |b| {
        let mut rng = substream_rng(seed, streams::WALKERS, b as u64);
        let count = WALKER_BATCH.min(walkers - b * WALKER_BATCH);
        (0..count).map(|_| walk(&index, &lattice, z, capture, &mut rng)).collect::<Vec<_>>()
    });

    let mut counts: BTreeMap<HitKey, u64> = BTreeMap::new();
    for key in per_batch.into_iter().flatten() {
        *counts.entry(key).or_default() += 1;
    }
    let total = walkers as f64;
    let cells = counts
        .into_iter()
        .map(|(k, c)| HitCell { ci: k.ci, cj: k.cj, count: c, weight: c as f64 / total, is_boundary: k.is_boundary })
        .collect();
    Ok(HarmonicMeasureSample { z, walkers, capture, lattice, cells })
}

fn cell_of(lattice: &Lattice, p: Point) -> (usize, usize) {
    let (u, v) = lattice.to_grid(p);
    let ci = (u.floor().max(0.0) as usize).min(lattice.cells_x() - 1);
    let cj = (v.floor().max(0.0) as usize).min(lattice.cells_y() - 1);
    (ci, cj)
}

fn walk<R: Rng>(index: &RangeIndex, lattice: &Lattice, z: Point, capture: f64, rng: &mut R) -> HitKey {
    let mut p = z;
    for _ in 0..MAX_JUMPS {
        let to_circle = 1.0 - p.norm();
        if to_circle < capture {
            break;
        }
        let (to_range, nearest) = index.safe_radius(p);
        if to_range < capture {
            let q = nearest.expect("short distances are exact");
            let (ci, cj) = cell_of(lattice, q);
            return HitKey { is_boundary: false, cj, ci };
        }
        let r = to_circle.min(to_range);
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        p = Point::new(p.x + r * theta.cos(), p.y + r * theta.sin());
    }
    let norm = p.norm().max(f64::MIN_POSITIVE);
    let (ci, cj) = cell_of(lattice, Point::new(p.x / norm, p.y / norm));
    HitKey { is_boundary: true, cj, ci }
}

/// The point of a lattice with spacing `1/64` closest to the origin among
/// those at distance at least `min_distance` from the range and from `∂D`.
pub fn choose_viewpoint(path: &BrownianPath, min_distance: f64) -> Result<Point> {
    let index = RangeIndex::new(path.positions(), 1.0 / 64.0)?;
    let step = 1.0 / 64.0;
    let mut best: Option<Point> = None;
    for j in -64i32..=64 {
        for i in -64i32..=64 {
            let p = Point::new(i as f64 * step, j as f64 * step);
            if 1.0 - p.norm() < min_distance {
                continue;
            }
            if best.is_some_and(|b| b.norm() <= p.norm()) {
                continue;
            }
            if index.distance(p) >= min_distance {
                best = Some(p);
            }
        }
    }
    best.ok_or_else(|| Error::Domain(format!("no viewpoint at distance {min_distance} from the range")))
}
