//! Felzenszwalb-Huttenlocher graph segmentation and the perimeter
//! functional.
//!
//! The segmentation is the only adaptivity side information the codec
//! stores, so everything here must be bit-for-bit deterministic: edges are
//! sorted with a total order (weight, then endpoint ranks) and labels are
//! renumbered by first row-major occurrence.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{row_major_rank, Coord, GrayImage, PointSet};

/// Per-pixel region labels; regions partition the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    region_count: u32,
}

impl LabelMap {
    /// Builds a label map, validating that labels are exactly
    /// `0..region_count` with every label present.
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::MalformedLabelMap(format!(
                "{} labels for a {width}x{height} grid",
                labels.len()
            )));
        }
        let region_count = match labels.iter().max() {
            Some(&m) => m + 1,
            None => return Err(Error::MalformedLabelMap("empty label map".into())),
        };
        let mut seen = vec![false; region_count as usize];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::MalformedLabelMap(format!(
                "label {missing} never occurs"
            )));
        }
        Ok(LabelMap {
            width,
            height,
            labels,
            region_count,
        })
    }

    /// Single-region map covering the whole grid.
    pub fn trivial(width: usize, height: usize) -> Self {
        LabelMap {
            width,
            height,
            labels: vec![0; width * height],
            region_count: 1,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn region_count(&self) -> u32 {
        self.region_count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, c: Coord) -> u32 {
        self.labels[row_major_rank(c, self.width)]
    }
}

/// Felzenszwalb-Huttenlocher parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegParams {
    /// Scale parameter k of the scaled internal difference Int(C) + k/|C|.
    pub k: f64,
    /// Standard deviation of the Gaussian presmooth, in pixels.
    pub sigma: f64,
    /// Regions smaller than this are merged along their cheapest crossing
    /// edge after the main pass.
    pub min_size: usize,
}

impl SegParams {
    pub fn new(k: f64, sigma: f64, min_size: usize) -> Self {
        assert!(k >= 0.0 && k.is_finite(), "k must be a non-negative real");
        assert!(
            sigma >= 0.0 && sigma.is_finite(),
            "sigma must be a non-negative real"
        );
        SegParams { k, sigma, min_size }
    }
}

/// An 8-neighborhood pixel pair with its gray-value difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub a: Coord,
    pub b: Coord,
    pub w: f64,
}

/// Separable Gaussian blur with kernel radius `ceil(4*sigma)` and
/// half-sample symmetric ("reflect") boundary handling. `sigma == 0`
/// returns the input unchanged.
pub fn gaussian_smooth(img: &GrayImage, sigma: f64) -> GrayImage {
    assert!(
        sigma >= 0.0 && sigma.is_finite(),
        "sigma must be a non-negative real"
    );
    if sigma == 0.0 {
        return img.clone();
    }
    let radius = (4.0 * sigma).ceil() as usize;
    let mut kernel = Vec::with_capacity(2 * radius + 1);
    for i in 0..=2 * radius {
        let x = i as f64 - radius as f64;
        kernel.push((-x * x / (2.0 * sigma * sigma)).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }

    let w = img.width();
    let h = img.height();
    // Rows, then columns.
    let mut tmp = vec![0.0f64; w * h];
    for row in 0..h {
        let line = &img.pixels()[row * w..(row + 1) * w];
        for col in 0..w {
            tmp[row * w + col] = convolve_at(line, col, &kernel, radius);
        }
    }
    let mut out = vec![0.0f64; w * h];
    let mut column = vec![0.0f64; h];
    for col in 0..w {
        for row in 0..h {
            column[row] = tmp[row * w + col];
        }
        for row in 0..h {
            out[row * w + col] = convolve_at(&column, row, &kernel, radius);
        }
    }
    GrayImage::new(w, h, out)
}

/// Half-sample symmetric index: ... s1 s0 | s0 s1 ... sn-1 | sn-1 sn-2 ...
fn reflect(idx: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let mut m = idx.rem_euclid(period);
    if m >= n as isize {
        m = period - 1 - m;
    }
    m as usize
}

fn convolve_at(signal: &[f64], center: usize, kernel: &[f64], radius: usize) -> f64 {
    let n = signal.len();
    let mut acc = 0.0;
    for (i, &k) in kernel.iter().enumerate() {
        let idx = center as isize + i as isize - radius as isize;
        acc += k * signal[reflect(idx, n)];
    }
    acc
}

/// One edge per unordered 8-neighbor pair, weighted by the absolute
/// gray-value difference. The first endpoint is always the row-major
/// smaller one.
pub fn build_graph(img: &GrayImage) -> Vec<WeightedEdge> {
    let w = img.width();
    let h = img.height();
    let mut edges = Vec::with_capacity(4 * w * h);
    let mut push = |a: Coord, b: Coord| {
        let weight = (img.get(a) - img.get(b)).abs();
        edges.push(WeightedEdge { a, b, w: weight });
    };
    for row in 0..h {
        for col in 0..w {
            let a = Coord::new(row, col);
            if col + 1 < w {
                push(a, Coord::new(row, col + 1));
            }
            if row + 1 < h {
                push(a, Coord::new(row + 1, col));
                if col + 1 < w {
                    push(a, Coord::new(row + 1, col + 1));
                }
                if col > 0 {
                    push(a, Coord::new(row + 1, col - 1));
                }
            }
        }
    }
    edges
}

/// Union-find with per-component size and running internal difference.
struct Components {
    parent: Vec<u32>,
    size: Vec<u32>,
    /// Max weight of any edge used to build the component; under Kruskal
    /// order this equals the max edge of the component's MST.
    internal: Vec<f64>,
}

impl Components {
    fn new(n: usize) -> Self {
        Components {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            internal: vec![0.0; n],
        }
    }

    fn find(&mut self, mut i: u32) -> u32 {
        let mut root = i;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while i != root {
            let next = self.parent[i as usize];
            self.parent[i as usize] = root;
            i = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32, w: f64) -> u32 {
        let (big, small) = if self.size[a as usize] >= self.size[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.internal[big as usize] = self.internal[big as usize]
            .max(self.internal[small as usize])
            .max(w);
        big
    }
}

/// Result of a segmentation run, including the pre-merge state needed to
/// audit the incrementally tracked internal differences.
#[derive(Debug, Clone)]
pub struct FhRun {
    /// Label map after the main pass, before small regions are merged.
    pub pre_merge: LabelMap,
    /// Internal difference per pre-merge label.
    pub internal_diff: Vec<f64>,
    /// Final label map.
    pub labels: LabelMap,
}

/// What the merge predicate may look at when scoring a component.
#[derive(Debug, Clone, Copy)]
pub struct RegionStats {
    pub size: usize,
    pub internal_diff: f64,
}

/// Felzenszwalb-Huttenlocher segmentation.
pub fn fh_segment(img: &GrayImage, params: SegParams) -> LabelMap {
    fh_segment_run(img, params).labels
}

/// As [`fh_segment`] but keeps the intermediate main-pass state.
pub fn fh_segment_run(img: &GrayImage, params: SegParams) -> FhRun {
    let k = params.k;
    fh_segment_with_tau(img, params.sigma, params.min_size, |stats| {
        k / stats.size as f64
    })
}

/// Segmentation with a custom region preference `tau`: two components
/// merge when the crossing weight does not exceed either component's
/// `internal_diff + tau(component)`. The stock predicate uses
/// `tau = k / size`.
pub fn fh_segment_with_tau(
    img: &GrayImage,
    sigma: f64,
    min_size: usize,
    tau: impl Fn(RegionStats) -> f64,
) -> FhRun {
    let smoothed = gaussian_smooth(img, sigma);
    let mut edges = build_graph(&smoothed);
    let w = img.width();
    // Total order: weight, then row-major rank of the lower endpoint, then
    // of the higher one. Equal-weight edge order changes the result, so it
    // has to be pinned.
    edges.sort_by(|x, y| {
        x.w.partial_cmp(&y.w)
            .expect("edge weights are finite")
            .then_with(|| row_major_rank(x.a, w).cmp(&row_major_rank(y.a, w)))
            .then_with(|| row_major_rank(x.b, w).cmp(&row_major_rank(y.b, w)))
    });

    let n = img.pixel_count();
    let mut comps = Components::new(n);
    for e in &edges {
        let ra = comps.find(row_major_rank(e.a, w) as u32);
        let rb = comps.find(row_major_rank(e.b, w) as u32);
        if ra == rb {
            continue;
        }
        let scaled = |root: u32| {
            let stats = RegionStats {
                size: comps.size[root as usize] as usize,
                internal_diff: comps.internal[root as usize],
            };
            stats.internal_diff + tau(stats)
        };
        // No evidence of a boundary: the crossing difference does not
        // exceed either scaled internal difference.
        if e.w <= scaled(ra).min(scaled(rb)) {
            comps.union(ra, rb, e.w);
        }
    }

    let (pre_merge, internal_diff) = {
        let mut internal = Vec::new();
        let lm = renumber(&mut comps, w, img.height(), |comps, root| {
            internal.push(comps.internal[root as usize]);
        });
        (lm, internal)
    };

    if min_size > 1 {
        for e in &edges {
            let ra = comps.find(row_major_rank(e.a, w) as u32);
            let rb = comps.find(row_major_rank(e.b, w) as u32);
            if ra != rb
                && ((comps.size[ra as usize] as usize) < min_size
                    || (comps.size[rb as usize] as usize) < min_size)
            {
                comps.union(ra, rb, e.w);
            }
        }
    }
    let labels = renumber(&mut comps, w, img.height(), |_, _| {});

    FhRun {
        pre_merge,
        internal_diff,
        labels,
    }
}

/// Renumbers components by first row-major occurrence, invoking `on_new`
/// once per fresh root.
fn renumber(
    comps: &mut Components,
    width: usize,
    height: usize,
    mut on_new: impl FnMut(&Components, u32),
) -> LabelMap {
    let n = width * height;
    let mut root_label = vec![u32::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut next = 0u32;
    for i in 0..n {
        let root = comps.find(i as u32);
        if root_label[root as usize] == u32::MAX {
            root_label[root as usize] = next;
            on_new(comps, root);
            next += 1;
        }
        labels.push(root_label[root as usize]);
    }
    LabelMap {
        width,
        height,
        labels,
        region_count: next,
    }
}

/// Number of 4-neighbor pixel pairs whose labels differ.
pub fn perimeter(lm: &LabelMap) -> usize {
    let w = lm.width();
    let h = lm.height();
    let mut count = 0;
    for row in 0..h {
        for col in 0..w {
            let l = lm.label_at(Coord::new(row, col));
            if col + 1 < w && lm.label_at(Coord::new(row, col + 1)) != l {
                count += 1;
            }
            if row + 1 < h && lm.label_at(Coord::new(row + 1, col)) != l {
                count += 1;
            }
        }
    }
    count
}

/// All coordinates carrying `label`, in row-major order.
pub fn region_points(lm: &LabelMap, label: u32) -> Result<PointSet> {
    if label >= lm.region_count() {
        return Err(Error::UnknownLabel {
            label,
            region_count: lm.region_count(),
        });
    }
    let w = lm.width();
    let points = lm
        .labels()
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l == label)
        .map(|(i, _)| Coord::new(i / w, i % w))
        .collect();
    Ok(PointSet::new(points))
}

/// Writes a label map as a "P2L" text file: magic, width, height, region
/// count, then row-major labels.
pub fn save_label_map(lm: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "P2L").unwrap();
    writeln!(out, "{} {}", lm.width(), lm.height()).unwrap();
    writeln!(out, "{}", lm.region_count()).unwrap();
    for (i, l) in lm.labels().iter().enumerate() {
        if i > 0 {
            let sep = if i % lm.width() == 0 { '\n' } else { ' ' };
            out.push(sep as u8);
        }
        write!(out, "{l}").unwrap();
    }
    out.push(b'\n');
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a "P2L" label map file.
pub fn load_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_ascii_whitespace());
    let magic = tokens
        .next()
        .ok_or_else(|| Error::MalformedLabelMap("empty file".into()))?;
    if magic != "P2L" {
        return Err(Error::MalformedLabelMap(format!("bad magic {magic:?}")));
    }
    let mut num = |what: &str| -> Result<u64> {
        tokens
            .next()
            .and_then(|t| t.parse::<u64>().ok())
            .ok_or_else(|| Error::MalformedLabelMap(format!("missing or invalid {what}")))
    };
    let width = num("width")? as usize;
    let height = num("height")? as usize;
    let declared = num("region count")? as u32;
    let mut labels = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        labels.push(num("label")? as u32);
    }
    let lm = LabelMap::new(width, height, labels)?;
    if lm.region_count() != declared {
        return Err(Error::MalformedLabelMap(format!(
            "declared {declared} regions, found {}",
            lm.region_count()
        )));
    }
    Ok(lm)
}
