//! Deterministic path finding inside regions, the data-driven EPWT path,
//! path gluing and even-index decimation.
//!
//! Paths are bijections from step indices onto their point set. The
//! region path finders (easy, grad) read only geometry, never gray
//! values: that is what lets the decoder recompute them from the stored
//! segmentation alone. All distance comparisons use exact integers and
//! every tie is resolved by a fixed rule ending in "row-major smallest",
//! so equal inputs always produce identical paths.

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::image::{Coord, GrayImage, PointSet};

/// Distance used by the minimal-ball candidate search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Chebyshev,
}

/// Which path finder drives the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    Easy,
    Grad,
    Epwt,
}

/// Average discretized gradient of a region, in gray units per pixel.
/// `gx` is the column derivative, `gy` the row derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionGradient {
    pub gx: f64,
    pub gy: f64,
}

/// An ordered visit of a point set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointPath {
    points: Vec<Coord>,
}

impl PointPath {
    pub fn new(points: Vec<Coord>) -> Self {
        PointPath { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Coord] {
        &self.points
    }

    pub fn support(&self) -> PointSet {
        PointSet::new(self.points.clone())
    }
}

/// Integer displacement in the (col, row) plane.
type IVec = (i64, i64);

fn delta(from: Coord, to: Coord) -> IVec {
    (
        to.col as i64 - from.col as i64,
        to.row as i64 - from.row as i64,
    )
}

/// Counterclockwise quarter turn in the (col, row) plane.
fn rot90_i(v: IVec) -> IVec {
    (-v.1, v.0)
}

fn rot90_f(v: (f64, f64)) -> (f64, f64) {
    (-v.1, v.0)
}

fn dot_i(a: IVec, b: IVec) -> i64 {
    a.0 * b.0 + a.1 * b.1
}

fn dot_f(a: IVec, b: (f64, f64)) -> f64 {
    a.0 as f64 * b.0 + a.1 as f64 * b.1
}

const RING_RADIUS: i64 = 8;

/// Offset groups keyed by distance, ascending.
type RingTable = Vec<(i64, Vec<(i64, i64)>)>;

/// Offset groups of equal distance key, ascending, complete up to
/// RING_RADIUS. Scanning them in order yields the exact nearest set
/// whenever any group hits.
fn ring_groups(metric: Metric) -> &'static [(i64, Vec<(i64, i64)>)] {
    static EUCLID: OnceLock<RingTable> = OnceLock::new();
    static CHEBY: OnceLock<RingTable> = OnceLock::new();
    let build = |metric: Metric| {
        let cap = match metric {
            Metric::Euclidean => RING_RADIUS * RING_RADIUS,
            Metric::Chebyshev => RING_RADIUS,
        };
        let mut groups = std::collections::BTreeMap::<i64, Vec<(i64, i64)>>::new();
        for dr in -RING_RADIUS..=RING_RADIUS {
            for dc in -RING_RADIUS..=RING_RADIUS {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let key = dist_key_raw(dr, dc, metric);
                if key <= cap {
                    groups.entry(key).or_default().push((dr, dc));
                }
            }
        }
        groups.into_iter().collect::<Vec<_>>()
    };
    match metric {
        Metric::Euclidean => EUCLID.get_or_init(|| build(Metric::Euclidean)),
        Metric::Chebyshev => CHEBY.get_or_init(|| build(Metric::Chebyshev)),
    }
}

fn dist_key_raw(dr: i64, dc: i64, metric: Metric) -> i64 {
    match metric {
        Metric::Euclidean => dr * dr + dc * dc,
        Metric::Chebyshev => dr.abs().max(dc.abs()),
    }
}

fn dist_key(a: Coord, b: Coord, metric: Metric) -> i64 {
    dist_key_raw(
        a.row as i64 - b.row as i64,
        a.col as i64 - b.col as i64,
        metric,
    )
}

/// Occupancy grid over the region's bounding box, answering exact
/// nearest-available queries. Small rings cover the common case; a full
/// box scan handles the rare jump across a depleted area.
struct AvailableSet {
    min_row: i64,
    min_col: i64,
    w: i64,
    h: i64,
    avail: Vec<bool>,
    remaining: usize,
}

impl AvailableSet {
    fn new(points: &[Coord]) -> Self {
        let min_row = points.iter().map(|c| c.row).min().unwrap() as i64;
        let min_col = points.iter().map(|c| c.col).min().unwrap() as i64;
        let max_row = points.iter().map(|c| c.row).max().unwrap() as i64;
        let max_col = points.iter().map(|c| c.col).max().unwrap() as i64;
        let w = max_col - min_col + 1;
        let h = max_row - min_row + 1;
        let mut avail = vec![false; (w * h) as usize];
        for c in points {
            avail[((c.row as i64 - min_row) * w + (c.col as i64 - min_col)) as usize] = true;
        }
        AvailableSet {
            min_row,
            min_col,
            w,
            h,
            avail,
            remaining: points.len(),
        }
    }

    fn cell(&self, row: i64, col: i64) -> Option<usize> {
        let r = row - self.min_row;
        let c = col - self.min_col;
        if r < 0 || c < 0 || r >= self.h || c >= self.w {
            None
        } else {
            Some((r * self.w + c) as usize)
        }
    }

    fn remove(&mut self, c: Coord) {
        let i = self.cell(c.row as i64, c.col as i64).expect("inside box");
        debug_assert!(self.avail[i]);
        self.avail[i] = false;
        self.remaining -= 1;
    }

    /// All available points at minimal distance from `from`.
    fn nearest(&self, from: Coord, metric: Metric) -> Vec<Coord> {
        debug_assert!(self.remaining > 0);
        for (_, offsets) in ring_groups(metric) {
            let mut hits = Vec::new();
            for &(dr, dc) in offsets {
                let row = from.row as i64 + dr;
                let col = from.col as i64 + dc;
                if let Some(i) = self.cell(row, col) {
                    if self.avail[i] {
                        hits.push(Coord::new(row as usize, col as usize));
                    }
                }
            }
            if !hits.is_empty() {
                return hits;
            }
        }
        // Nothing within the ring radius: scan the whole box.
        let mut best = i64::MAX;
        let mut hits = Vec::new();
        for r in 0..self.h {
            for c in 0..self.w {
                if !self.avail[(r * self.w + c) as usize] {
                    continue;
                }
                let coord = Coord::new((r + self.min_row) as usize, (c + self.min_col) as usize);
                let key = dist_key(from, coord, metric);
                if key < best {
                    best = key;
                    hits.clear();
                }
                if key == best {
                    hits.push(coord);
                }
            }
        }
        hits
    }
}

fn row_major_min(cands: &[Coord]) -> Coord {
    *cands.iter().min().expect("non-empty candidate set")
}

/// Shared tie-break: argmax of `score` over the candidates, rotating the
/// direction a quarter turn while the argmax stays ambiguous, then
/// row-major smallest. Scores are either integer dot products or float
/// ones built from stored gradients, so equality comparison is exact on
/// both coder sides.
fn break_ties<D, S>(
    mut cands: Vec<Coord>,
    mut dir: D,
    rotate: fn(D) -> D,
    score: impl Fn(Coord, D) -> S,
) -> Coord
where
    D: Copy,
    S: PartialOrd + Copy,
{
    for _ in 0..4 {
        if cands.len() == 1 {
            return cands[0];
        }
        let best = cands
            .iter()
            .map(|&c| score(c, dir))
            .reduce(|a, b| if b > a { b } else { a })
            .expect("non-empty candidate set");
        cands.retain(|&c| score(c, dir) == best);
        if cands.len() == 1 {
            return cands[0];
        }
        dir = rotate(dir);
    }
    row_major_min(&cands)
}

/// Easy-path: repeatedly walk to the nearest available point, preferring
/// the straightest continuation on ties.
pub fn easy_path(region: &PointSet, metric: Metric) -> Result<PointPath> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let start = region.points()[0];
    let mut avail = AvailableSet::new(region.points());
    avail.remove(start);
    let mut path = Vec::with_capacity(region.len());
    path.push(start);
    let mut p = start;
    let mut v: IVec = (1, 0);
    while avail.remaining > 0 {
        let cands = avail.nearest(p, metric);
        let psi = break_ties(cands, v, rot90_i, |c, dir| {
            dot_i(delta(p, c), dir)
        });
        avail.remove(psi);
        path.push(psi);
        v = delta(p, psi);
        p = psi;
    }
    Ok(PointPath::new(path))
}

/// Grad-path: like easy-path, but the preferred direction stays
/// perpendicular to the region's average gradient, with only its sign
/// following the walk. Falls back to easy-path semantics when the
/// gradient vanishes.
pub fn grad_path(region: &PointSet, g: RegionGradient, metric: Metric) -> Result<PointPath> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if (g.gx * g.gx + g.gy * g.gy).sqrt() < 1e-12 {
        return easy_path(region, metric);
    }
    let w = rot90_f((g.gx, g.gy));
    let start = region.points()[0];
    let mut avail = AvailableSet::new(region.points());
    avail.remove(start);
    let mut path = Vec::with_capacity(region.len());
    path.push(start);
    let mut p = start;
    let mut v = w;
    while avail.remaining > 0 {
        let cands = avail.nearest(p, metric);
        let psi = break_ties(cands, v, rot90_f, |c, dir| {
            dot_f(delta(p, c), dir).abs()
        });
        avail.remove(psi);
        path.push(psi);
        // Keep the perpendicular direction, flipping its sign to follow
        // the step just taken; ties keep +w.
        v = if dot_f(delta(p, psi), w) >= 0.0 { w } else { (-w.0, -w.1) };
        p = psi;
    }
    Ok(PointPath::new(path))
}

/// EPWT path: greedy on gray values inside the minimal punctured ball,
/// then straightest continuation, then row-major smallest.
pub fn epwt_path(points: &PointSet, values: &[f64], metric: Metric) -> Result<PointPath> {
    if points.is_empty() {
        return Err(Error::EmptyRegion);
    }
    assert_eq!(points.len(), values.len(), "one value per point");
    let mut avail = AvailableSet::new(points.points());
    let value_at = {
        let mut grid = vec![0.0f64; (avail.w * avail.h) as usize];
        for (c, &val) in points.iter().zip(values) {
            grid[avail.cell(c.row as i64, c.col as i64).unwrap()] = val;
        }
        grid
    };
    let start = points.points()[0];
    avail.remove(start);
    let mut path = Vec::with_capacity(points.len());
    path.push(start);
    let mut p = start;
    let mut f_p = value_at[avail.cell(p.row as i64, p.col as i64).unwrap()];
    let mut dir: IVec = (1, 0);
    while avail.remaining > 0 {
        let cands = avail.nearest(p, metric);
        // Least gray-value difference first.
        let best_diff = cands
            .iter()
            .map(|&c| (value_at[avail.cell(c.row as i64, c.col as i64).unwrap()] - f_p).abs())
            .fold(f64::INFINITY, f64::min);
        let mut kept: Vec<Coord> = cands
            .into_iter()
            .filter(|&c| {
                (value_at[avail.cell(c.row as i64, c.col as i64).unwrap()] - f_p).abs()
                    == best_diff
            })
            .collect();
        // Then the smallest direction change.
        if kept.len() > 1 {
            let best_dot = kept.iter().map(|&c| dot_i(delta(p, c), dir)).max().unwrap();
            kept.retain(|&c| dot_i(delta(p, c), dir) == best_dot);
        }
        let psi = row_major_min(&kept);
        avail.remove(psi);
        path.push(psi);
        dir = delta(p, psi);
        p = psi;
        f_p = value_at[avail.cell(p.row as i64, p.col as i64).unwrap()];
    }
    Ok(PointPath::new(path))
}

/// Average central-difference gradient over a region. One-sided
/// differences at image borders; neighbors outside the region but inside
/// the image still count.
pub fn compute_region_gradient(img: &GrayImage, region: &PointSet) -> RegionGradient {
    assert!(!region.is_empty(), "gradient of an empty region");
    let w = img.width();
    let h = img.height();
    let mut gx = 0.0;
    let mut gy = 0.0;
    for c in region.iter() {
        gx += if w == 1 {
            0.0
        } else if c.col == 0 {
            img.get(Coord::new(c.row, 1)) - img.get(c)
        } else if c.col == w - 1 {
            img.get(c) - img.get(Coord::new(c.row, c.col - 1))
        } else {
            (img.get(Coord::new(c.row, c.col + 1)) - img.get(Coord::new(c.row, c.col - 1))) / 2.0
        };
        gy += if h == 1 {
            0.0
        } else if c.row == 0 {
            img.get(Coord::new(1, c.col)) - img.get(c)
        } else if c.row == h - 1 {
            img.get(c) - img.get(Coord::new(c.row - 1, c.col))
        } else {
            (img.get(Coord::new(c.row + 1, c.col)) - img.get(Coord::new(c.row - 1, c.col))) / 2.0
        };
    }
    let n = region.len() as f64;
    RegionGradient {
        gx: gx / n,
        gy: gy / n,
    }
}

/// Concatenates per-region paths in the given (label) order.
pub fn glue_paths(paths: &[PointPath]) -> Result<PointPath> {
    let total: usize = paths.iter().map(|p| p.len()).sum();
    let mut seen = HashSet::with_capacity(total);
    let mut points = Vec::with_capacity(total);
    for path in paths {
        for &c in path.points() {
            if !seen.insert(c) {
                return Err(Error::OverlappingPaths);
            }
            points.push(c);
        }
    }
    Ok(PointPath::new(points))
}

/// Keeps the points at even path indices. Returns them both as a
/// canonical set and in path order, which is the order approximation
/// values are assigned in.
pub fn decimate(path: &PointPath) -> (PointSet, Vec<Coord>) {
    let kept: Vec<Coord> = path.points().iter().copied().step_by(2).collect();
    (PointSet::new(kept.clone()), kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(coords: &[(usize, usize)]) -> PointSet {
        PointSet::new(coords.iter().map(|&(r, c)| Coord::new(r, c)).collect())
    }

    fn coords(path: &PointPath) -> Vec<(usize, usize)> {
        path.points().iter().map(|c| (c.row, c.col)).collect()
    }

    /// Linear-scan nearest oracle, independent of the ring tables.
    fn naive_nearest(available: &[Coord], from: Coord, metric: Metric) -> Vec<Coord> {
        let best = available
            .iter()
            .map(|&c| dist_key(from, c, metric))
            .min()
            .unwrap();
        available
            .iter()
            .copied()
            .filter(|&c| dist_key(from, c, metric) == best)
            .collect()
    }

    #[test]
    fn nearest_matches_linear_scan_oracle() {
        let mut state = 0x243f6a8885a308d3u64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for metric in [Metric::Euclidean, Metric::Chebyshev] {
            for _ in 0..200 {
                let mut pts = HashSet::new();
                let n = (rand() % 30 + 2) as usize;
                while pts.len() < n {
                    pts.insert(Coord::new((rand() % 24) as usize, (rand() % 24) as usize));
                }
                let pts: Vec<Coord> = {
                    let mut v: Vec<Coord> = pts.into_iter().collect();
                    v.sort_unstable();
                    v
                };
                let from = pts[(rand() % pts.len() as u64) as usize];
                let mut avail = AvailableSet::new(&pts);
                avail.remove(from);
                let rest: Vec<Coord> = pts.iter().copied().filter(|&c| c != from).collect();
                let mut got = avail.nearest(from, metric);
                let mut want = naive_nearest(&rest, from, metric);
                got.sort_unstable();
                want.sort_unstable();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn easy_path_traces_a_2x2_block() {
        let region = ps(&[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let path = easy_path(&region, Metric::Euclidean).unwrap();
        assert_eq!(coords(&path), vec![(0, 0), (0, 1), (1, 1), (1, 0)]);
    }

    #[test]
    fn easy_path_of_single_point() {
        let region = ps(&[(3, 7)]);
        let path = easy_path(&region, Metric::Euclidean).unwrap();
        assert_eq!(coords(&path), vec![(3, 7)]);
    }

    #[test]
    fn easy_path_scans_a_horizontal_strip() {
        let region = ps(&[(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)]);
        let path = easy_path(&region, Metric::Euclidean).unwrap();
        assert_eq!(
            coords(&path),
            vec![(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)]
        );
    }

    #[test]
    fn easy_path_rejects_empty_region() {
        let empty = PointSet::new(vec![]);
        assert!(matches!(
            easy_path(&empty, Metric::Euclidean),
            Err(Error::EmptyRegion)
        ));
    }

    /// Replays the greedy property: no available point was strictly
    /// closer than the chosen successor.
    fn assert_greedy(region: &PointSet, path: &PointPath, metric: Metric) {
        let mut remaining: HashSet<Coord> = region.iter().collect();
        remaining.remove(&path.points()[0]);
        for w in path.points().windows(2) {
            let chosen = dist_key(w[0], w[1], metric);
            for &q in &remaining {
                assert!(dist_key(w[0], q, metric) >= chosen);
            }
            remaining.remove(&w[1]);
        }
    }

    #[test]
    fn easy_path_is_stepwise_greedy_and_bijective() {
        let mut state = 0x13198a2e03707344u64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..50 {
            let mut pts = HashSet::new();
            let n = (rand() % 50 + 1) as usize;
            while pts.len() < n {
                pts.insert(Coord::new((rand() % 16) as usize, (rand() % 16) as usize));
            }
            let region = PointSet::new(pts.into_iter().collect());
            let path = easy_path(&region, Metric::Euclidean).unwrap();
            assert_eq!(path.support(), region);
            assert_greedy(&region, &path, Metric::Euclidean);
        }
    }

    #[test]
    fn grad_path_runs_perpendicular_to_the_gradient() {
        let region = ps(&[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let g = RegionGradient { gx: 0.0, gy: 1.0 };
        let path = grad_path(&region, g, Metric::Euclidean).unwrap();
        assert_eq!(coords(&path)[..2], [(0, 0), (0, 1)]);
        assert_eq!(path.support(), region);
    }

    #[test]
    fn grad_path_single_point() {
        let region = ps(&[(2, 2)]);
        let g = RegionGradient { gx: 1.0, gy: -1.0 };
        let path = grad_path(&region, g, Metric::Euclidean).unwrap();
        assert_eq!(coords(&path), vec![(2, 2)]);
    }

    #[test]
    fn grad_path_ignores_gradient_magnitude() {
        let region = ps(&[(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 1)]);
        let g = RegionGradient { gx: 0.3, gy: 0.7 };
        let g3 = RegionGradient {
            gx: 3.0 * g.gx,
            gy: 3.0 * g.gy,
        };
        let a = grad_path(&region, g, Metric::Euclidean).unwrap();
        let b = grad_path(&region, g3, Metric::Euclidean).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grad_path_zero_gradient_degrades_to_easy() {
        let region = ps(&[(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)]);
        let zero = RegionGradient { gx: 0.0, gy: 0.0 };
        let a = grad_path(&region, zero, Metric::Euclidean).unwrap();
        let b = easy_path(&region, Metric::Euclidean).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn epwt_path_follows_close_values() {
        let points = ps(&[(0, 0), (0, 1), (0, 2)]);
        let path = epwt_path(&points, &[10.0, 11.0, 200.0], Metric::Euclidean).unwrap();
        assert_eq!(coords(&path), vec![(0, 0), (0, 1), (0, 2)]);
    }

    #[test]
    fn epwt_path_on_constants_matches_easy_path() {
        let points = ps(&[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let path = epwt_path(&points, &[7.0; 4], Metric::Euclidean).unwrap();
        let easy = easy_path(&points, Metric::Euclidean).unwrap();
        assert_eq!(path, easy);
    }

    #[test]
    fn epwt_path_single_point() {
        let points = ps(&[(5, 5)]);
        let path = epwt_path(&points, &[1.0], Metric::Euclidean).unwrap();
        assert_eq!(path.len(), 1);
    }

    #[test]
    fn gradient_of_constant_image_is_zero() {
        let img = GrayImage::constant(4, 4, 9.0);
        let region = ps(&[(1, 1), (1, 2), (2, 1)]);
        let g = compute_region_gradient(&img, &region);
        assert_eq!((g.gx, g.gy), (0.0, 0.0));
    }

    #[test]
    fn gradient_of_horizontal_ramp() {
        let img = GrayImage::from_fn(5, 5, |_, c| c as f64);
        let region = ps(&[(1, 1), (2, 2), (3, 1), (1, 3)]);
        let g = compute_region_gradient(&img, &region);
        assert!((g.gx - 1.0).abs() < 1e-12);
        assert!(g.gy.abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_per_pixel_oracle() {
        let img = GrayImage::from_fn(4, 4, |r, c| ((r * 53 + c * 19) % 97) as f64);
        let region = ps(&(0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .collect::<Vec<_>>());
        let g = compute_region_gradient(&img, &region);
        let px = |r: i64, c: i64| img.get(Coord::new(r as usize, c as usize));
        let mut sx = 0.0;
        let mut sy = 0.0;
        for r in 0..4i64 {
            for c in 0..4i64 {
                sx += match c {
                    0 => px(r, 1) - px(r, 0),
                    3 => px(r, 3) - px(r, 2),
                    _ => (px(r, c + 1) - px(r, c - 1)) / 2.0,
                };
                sy += match r {
                    0 => px(1, c) - px(0, c),
                    3 => px(3, c) - px(2, c),
                    _ => (px(r + 1, c) - px(r - 1, c)) / 2.0,
                };
            }
        }
        assert!((g.gx - sx / 16.0).abs() < 1e-12);
        assert!((g.gy - sy / 16.0).abs() < 1e-12);
    }

    #[test]
    fn glue_concatenates_in_order() {
        let a = PointPath::new(vec![Coord::new(0, 0)]);
        let b = PointPath::new(vec![Coord::new(5, 5)]);
        let glued = glue_paths(&[a, b]).unwrap();
        assert_eq!(coords(&glued), vec![(0, 0), (5, 5)]);

        let r0 = easy_path(&ps(&[(0, 0), (0, 1), (0, 2)]), Metric::Euclidean).unwrap();
        let r1 = easy_path(
            &ps(&[(2, 0), (2, 1), (2, 2), (3, 0), (3, 1)]),
            Metric::Euclidean,
        )
        .unwrap();
        let prefix = r0.points().to_vec();
        let glued = glue_paths(&[r0, r1]).unwrap();
        assert_eq!(glued.len(), 8);
        assert_eq!(&glued.points()[..3], &prefix[..]);
    }

    #[test]
    fn glue_rejects_overlap() {
        let a = PointPath::new(vec![Coord::new(0, 0), Coord::new(0, 1)]);
        let b = PointPath::new(vec![Coord::new(0, 1)]);
        assert!(matches!(
            glue_paths(&[a, b]),
            Err(Error::OverlappingPaths)
        ));
    }

    #[test]
    fn decimate_keeps_even_indices() {
        let path4 = PointPath::new((0..4).map(|c| Coord::new(0, c)).collect());
        let (_, kept) = decimate(&path4);
        assert_eq!(kept, vec![Coord::new(0, 0), Coord::new(0, 2)]);

        let path5 = PointPath::new((0..5).map(|c| Coord::new(0, c)).collect());
        let (set, kept) = decimate(&path5);
        assert_eq!(
            kept,
            vec![Coord::new(0, 0), Coord::new(0, 2), Coord::new(0, 4)]
        );
        assert_eq!(set.len(), 3);
    }

    /// Literal per-region parity alternation rule for decimating a glued
    /// path region by region, used as the independent oracle. The parity
    /// condition reads the parent region's cardinality; the printed
    /// variant with the decimated cardinality contradicts the global
    /// even-index rule already on two length-2 regions.
    fn parity_rule_kept(region_paths: &[Vec<Coord>]) -> Vec<Vec<Coord>> {
        let mut out = Vec::new();
        let mut prev_was_odd = false;
        for (k, rho) in region_paths.iter().enumerate() {
            let take_even = if k == 0 {
                true
            } else {
                (region_paths[k - 1].len() % 2 == 0) ^ prev_was_odd
            };
            let start = if take_even { 0 } else { 1 };
            out.push(rho.iter().copied().skip(start).step_by(2).collect());
            prev_was_odd = !take_even;
        }
        out
    }

    #[test]
    fn decimation_matches_region_parity_rule() {
        let mut state = 0xa4093822299f31d0u64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..40 {
            // Random 2-region partition of a random point set, then a
            // multi-level decimation cascade.
            let mut pts = HashSet::new();
            let n = (rand() % 60 + 4) as usize;
            while pts.len() < n {
                pts.insert(Coord::new((rand() % 12) as usize, (rand() % 12) as usize));
            }
            let mut r0 = Vec::new();
            let mut r1 = Vec::new();
            for c in pts {
                if rand() % 2 == 0 {
                    r0.push(c);
                } else {
                    r1.push(c);
                }
            }
            if r0.is_empty() || r1.is_empty() {
                continue;
            }
            let mut regions = vec![PointSet::new(r0), PointSet::new(r1)];
            while regions.iter().map(|r| r.len()).sum::<usize>() >= 2 {
                let rho: Vec<Vec<Coord>> = regions
                    .iter()
                    .filter(|r| !r.is_empty())
                    .map(|r| easy_path(r, Metric::Euclidean).unwrap().points().to_vec())
                    .collect();
                let glued = glue_paths(
                    &rho.iter()
                        .map(|p| PointPath::new(p.clone()))
                        .collect::<Vec<_>>(),
                )
                .unwrap();
                let (kept_set, _) = decimate(&glued);
                let expected = parity_rule_kept(&rho);
                let mut ei = 0;
                let mut next_regions = Vec::new();
                for r in &regions {
                    if r.is_empty() {
                        next_regions.push(r.clone());
                        continue;
                    }
                    let got: Vec<Coord> =
                        r.iter().filter(|&c| kept_set.contains(c)).collect();
                    let mut want = expected[ei].clone();
                    want.sort_unstable();
                    let mut got_sorted = got.clone();
                    got_sorted.sort_unstable();
                    assert_eq!(got_sorted, want);
                    next_regions.push(PointSet::new(got));
                    ei += 1;
                }
                regions = next_regions;
            }
        }
    }

    #[test]
    fn paths_are_deterministic() {
        let region = ps(&[(0, 0), (0, 2), (1, 1), (2, 0), (2, 2), (3, 1)]);
        let a = easy_path(&region, Metric::Chebyshev).unwrap();
        let b = easy_path(&region, Metric::Chebyshev).unwrap();
        assert_eq!(a, b);
    }
}
