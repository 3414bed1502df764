//! Multi-level encoding and decoding.
//!
//! Each level permutes the surviving points along a path, runs one level
//! of the 1-D wavelet transform over the sampled values, stores the
//! detail vector and keeps the even path positions. For the region-based
//! modes the paths are a pure function of the segmentation geometry, so
//! the decoder replays the whole cascade from the label map (plus stored
//! gradients) without ever looking at gray values. The EPWT mode is
//! data-driven and stores its per-level permutations instead.

use crate::error::{Error, Result};
use crate::image::{row_major_rank, Coord, GrayImage, PointSet};
use crate::path::{
    compute_region_gradient, decimate, easy_path, epwt_path, glue_paths, grad_path, Metric,
    PathMode, PointPath, RegionGradient,
};
use crate::segmentation::{region_points, LabelMap};
use crate::wavelet::{dwt_periodic, idwt_periodic, BankKind, CoeffPair, FilterBank};

/// Address of one stored coefficient. `Detail(0)` is the lowest level's
/// detail vector; detail levels increase toward the first, finest level.
/// The derived order (approx first, then details by level and index) is
/// the canonical tie-break order for thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoeffKind {
    ApproxLowest,
    Detail(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoeffId {
    pub kind: CoeffKind,
    pub index: usize,
}

impl CoeffId {
    pub fn approx(index: usize) -> Self {
        CoeffId {
            kind: CoeffKind::ApproxLowest,
            index,
        }
    }

    pub fn detail(level: usize, index: usize) -> Self {
        CoeffId {
            kind: CoeffKind::Detail(level),
            index,
        }
    }
}

impl std::fmt::Display for CoeffId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            CoeffKind::ApproxLowest => write!(f, "approx[{}]", self.index),
            CoeffKind::Detail(l) => write!(f, "detail[{}][{}]", l, self.index),
        }
    }
}

/// A fully encoded image: metadata plus every wavelet coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedImage {
    pub mode: PathMode,
    pub metric: Metric,
    pub bank: BankKind,
    pub levels: usize,
    pub width: usize,
    pub height: usize,
    pub labelmap: LabelMap,
    /// Domain of the encode when it is not the full grid.
    pub support: Option<PointSet>,
    /// Per-region average gradients, grad mode only.
    pub gradients: Option<Vec<RegionGradient>>,
    /// Approximation values of the lowest level, in final path order.
    pub approx_lowest: Vec<f64>,
    /// Detail vectors ordered lowest level first.
    pub details: Vec<Vec<f64>>,
    /// Per-level permutations, finest level first, EPWT mode only.
    pub stored_perms: Option<Vec<Vec<u32>>>,
}

impl EncodedImage {
    pub fn coeff_count(&self) -> usize {
        self.approx_lowest.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    pub fn nonzero_count(&self) -> usize {
        self.approx_lowest
            .iter()
            .chain(self.details.iter().flatten())
            .filter(|&&v| v != 0.0)
            .count()
    }

    /// All coefficient ids in canonical order.
    pub fn coeff_ids(&self) -> impl Iterator<Item = CoeffId> + '_ {
        let approx = (0..self.approx_lowest.len()).map(CoeffId::approx);
        let details = self
            .details
            .iter()
            .enumerate()
            .flat_map(|(l, d)| (0..d.len()).map(move |i| CoeffId::detail(l, i)));
        approx.chain(details)
    }

    pub fn coeff(&self, id: CoeffId) -> Option<f64> {
        match id.kind {
            CoeffKind::ApproxLowest => self.approx_lowest.get(id.index).copied(),
            CoeffKind::Detail(l) => self.details.get(l)?.get(id.index).copied(),
        }
    }

    pub fn set_coeff(&mut self, id: CoeffId, value: f64) -> bool {
        let slot = match id.kind {
            CoeffKind::ApproxLowest => self.approx_lowest.get_mut(id.index),
            CoeffKind::Detail(l) => self.details.get_mut(l).and_then(|d| d.get_mut(id.index)),
        };
        match slot {
            Some(s) => {
                *s = value;
                true
            }
            None => false,
        }
    }

    /// Points actually encoded, in canonical order.
    pub fn domain(&self) -> Vec<Coord> {
        match &self.support {
            Some(s) => s.points().to_vec(),
            None => {
                let w = self.width;
                (0..self.width * self.height)
                    .map(|i| Coord::new(i / w, i % w))
                    .collect()
            }
        }
    }
}

fn initial_regions(lm: &LabelMap, support: Option<&PointSet>) -> Vec<PointSet> {
    (0..lm.region_count())
        .map(|label| {
            let full = region_points(lm, label).expect("label in range");
            match support {
                None => full,
                Some(s) => PointSet::new(full.iter().filter(|&c| s.contains(c)).collect()),
            }
        })
        .collect()
}

/// One path-finding step of the cascade: glued region paths for the
/// region-based modes, a global greedy path for EPWT.
fn level_path(
    mode: PathMode,
    metric: Metric,
    order: &[Coord],
    regions: &[PointSet],
    gradients: Option<&[RegionGradient]>,
    values: Option<&[f64]>,
) -> Result<PointPath> {
    match mode {
        PathMode::Easy | PathMode::Grad => {
            let mut parts = Vec::new();
            for (label, region) in regions.iter().enumerate() {
                if region.is_empty() {
                    continue;
                }
                let part = match mode {
                    PathMode::Easy => easy_path(region, metric)?,
                    PathMode::Grad => {
                        let g = gradients.expect("grad mode carries gradients")[label];
                        grad_path(region, g, metric)?
                    }
                    PathMode::Epwt => unreachable!(),
                };
                parts.push(part);
            }
            glue_paths(&parts)
        }
        PathMode::Epwt => {
            let values = values.expect("epwt path needs values");
            let mut pairs: Vec<(Coord, f64)> = order
                .iter()
                .copied()
                .zip(values.iter().copied())
                .collect();
            pairs.sort_unstable_by_key(|&(c, _)| c);
            let points = PointSet::new(pairs.iter().map(|&(c, _)| c).collect());
            let vals: Vec<f64> = pairs.iter().map(|&(_, v)| v).collect();
            epwt_path(&points, &vals, metric)
        }
    }
}

/// Maps each path step to its position in the carrier order.
fn path_perm(path: &PointPath, order: &[Coord], width: usize, height: usize) -> Vec<u32> {
    let mut pos = vec![u32::MAX; width * height];
    for (i, &c) in order.iter().enumerate() {
        pos[row_major_rank(c, width)] = i as u32;
    }
    path.points()
        .iter()
        .map(|&c| {
            let p = pos[row_major_rank(c, width)];
            debug_assert!(p != u32::MAX, "path point outside carrier order");
            p
        })
        .collect()
}

fn intersect_regions(regions: &[PointSet], kept: &PointSet) -> Vec<PointSet> {
    regions
        .iter()
        .map(|r| PointSet::new(r.iter().filter(|&c| kept.contains(c)).collect()))
        .collect()
}

fn check_levels(levels: usize, points: usize) -> Result<()> {
    if levels == 0 || levels >= usize::BITS as usize || (1usize << levels) > points {
        return Err(Error::TooManyLevels { levels, points });
    }
    Ok(())
}

fn encode_inner(
    img: &GrayImage,
    lm: &LabelMap,
    support: Option<&PointSet>,
    mode: PathMode,
    metric: Metric,
    bank: BankKind,
    levels: usize,
) -> Result<(EncodedImage, Vec<Vec<u32>>)> {
    if lm.width() != img.width() || lm.height() != img.height() {
        return Err(Error::DimensionMismatch {
            img_width: img.width(),
            img_height: img.height(),
            map_width: lm.width(),
            map_height: lm.height(),
        });
    }
    let fb = FilterBank::get(bank);
    let mut order: Vec<Coord> = match support {
        Some(s) => s.points().to_vec(),
        None => img.coords().collect(),
    };
    check_levels(levels, order.len())?;
    let mut values: Vec<f64> = order.iter().map(|&c| img.get(c)).collect();
    let mut regions = initial_regions(lm, support);

    let gradients = match mode {
        PathMode::Grad => Some(
            regions
                .iter()
                .map(|r| {
                    if r.is_empty() {
                        RegionGradient { gx: 0.0, gy: 0.0 }
                    } else {
                        compute_region_gradient(img, r)
                    }
                })
                .collect::<Vec<_>>(),
        ),
        _ => None,
    };

    let mut perms = Vec::with_capacity(levels);
    let mut details_rev = Vec::with_capacity(levels);
    for _ in 0..levels {
        let path = level_path(
            mode,
            metric,
            &order,
            &regions,
            gradients.as_deref(),
            Some(&values),
        )?;
        let perm = path_perm(&path, &order, img.width(), img.height());
        let sampled: Vec<f64> = perm.iter().map(|&j| values[j as usize]).collect();
        let cp = dwt_periodic(&sampled, &fb)?;
        details_rev.push(cp.detail);
        let (kept_set, kept_in_order) = decimate(&path);
        regions = intersect_regions(&regions, &kept_set);
        order = kept_in_order;
        values = cp.approx;
        perms.push(perm);
    }

    details_rev.reverse();
    let enc = EncodedImage {
        mode,
        metric,
        bank,
        levels,
        width: img.width(),
        height: img.height(),
        labelmap: lm.clone(),
        support: support.cloned(),
        gradients,
        approx_lowest: values,
        details: details_rev,
        stored_perms: match mode {
            PathMode::Epwt => Some(perms.clone()),
            _ => None,
        },
    };
    Ok((enc, perms))
}

/// Encodes an image against a segmentation.
pub fn encode(
    img: &GrayImage,
    lm: &LabelMap,
    mode: PathMode,
    metric: Metric,
    bank: BankKind,
    levels: usize,
) -> Result<EncodedImage> {
    encode_inner(img, lm, None, mode, metric, bank, levels).map(|(enc, _)| enc)
}

/// As [`encode`], additionally returning the per-level permutations the
/// encoder used. Lets tests and tools compare them against the
/// decoder-side recomputation.
pub fn encode_traced(
    img: &GrayImage,
    lm: &LabelMap,
    mode: PathMode,
    metric: Metric,
    bank: BankKind,
    levels: usize,
) -> Result<(EncodedImage, Vec<Vec<u32>>)> {
    encode_inner(img, lm, None, mode, metric, bank, levels)
}

/// Encodes only the given subset of the grid; the decoded image is zero
/// outside it. Odd point counts are handled by the wavelet holdout rule.
pub fn encode_support(
    img: &GrayImage,
    lm: &LabelMap,
    support: &PointSet,
    mode: PathMode,
    metric: Metric,
    bank: BankKind,
    levels: usize,
) -> Result<EncodedImage> {
    assert!(!support.is_empty(), "support must be non-empty");
    for c in support.iter() {
        assert!(
            c.row < img.height() && c.col < img.width(),
            "support point outside the grid"
        );
    }
    encode_inner(img, lm, Some(support), mode, metric, bank, levels).map(|(enc, _)| enc)
}

/// Replays the path cascade from segmentation geometry alone, returning
/// the permutation of every level, finest first. Pure function of the
/// label map, the mode and the stored gradients; gray values never enter.
pub fn recompute_paths(
    lm: &LabelMap,
    mode: PathMode,
    metric: Metric,
    levels: usize,
    support: Option<&PointSet>,
    gradients: Option<&[RegionGradient]>,
) -> Result<Vec<Vec<u32>>> {
    assert!(
        mode != PathMode::Epwt,
        "epwt paths are data driven and must be read from the stream"
    );
    let mut order: Vec<Coord> = match support {
        Some(s) => s.points().to_vec(),
        None => {
            let w = lm.width();
            (0..w * lm.height()).map(|i| Coord::new(i / w, i % w)).collect()
        }
    };
    check_levels(levels, order.len())?;
    let mut regions = initial_regions(lm, support);
    let mut perms = Vec::with_capacity(levels);
    for _ in 0..levels {
        let path = level_path(mode, metric, &order, &regions, gradients, None)?;
        let perm = path_perm(&path, &order, lm.width(), lm.height());
        let (kept_set, kept_in_order) = decimate(&path);
        regions = intersect_regions(&regions, &kept_set);
        order = kept_in_order;
        perms.push(perm);
    }
    Ok(perms)
}

/// Level sizes implied by a starting point count: each level keeps the
/// ceiling half.
pub(crate) fn level_sizes(points: usize, levels: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(levels);
    let mut n = points;
    for _ in 0..levels {
        sizes.push(n);
        n = n.div_ceil(2);
    }
    sizes
}

fn validate_lengths(enc: &EncodedImage, perms: &[Vec<u32>]) -> Result<()> {
    let n0 = enc.domain().len();
    let sizes = level_sizes(n0, enc.levels);
    if perms.len() != enc.levels || enc.details.len() != enc.levels {
        return Err(Error::CorruptStream(format!(
            "expected {} levels of permutations and details",
            enc.levels
        )));
    }
    for (i, perm) in perms.iter().enumerate() {
        if perm.len() != sizes[i] {
            return Err(Error::CorruptStream(format!(
                "level {i} permutation has {} entries, expected {}",
                perm.len(),
                sizes[i]
            )));
        }
        // detail of encode iteration i is stored at details[levels-1-i]
        let want_detail = sizes[i] / 2;
        let got = enc.details[enc.levels - 1 - i].len();
        if got != want_detail {
            return Err(Error::CorruptStream(format!(
                "level {i} detail vector has {got} entries, expected {want_detail}"
            )));
        }
    }
    let want_approx = sizes[enc.levels - 1].div_ceil(2);
    if enc.approx_lowest.len() != want_approx {
        return Err(Error::CorruptStream(format!(
            "approximation vector has {} entries, expected {want_approx}",
            enc.approx_lowest.len()
        )));
    }
    Ok(())
}

/// Decodes an encoded image back to the pixel grid.
pub fn decode(enc: &EncodedImage) -> Result<GrayImage> {
    let fb = FilterBank::get(enc.bank);
    let recomputed;
    let perms: &[Vec<u32>] = match enc.mode {
        PathMode::Epwt => {
            let stored = enc
                .stored_perms
                .as_ref()
                .ok_or_else(|| Error::CorruptStream("epwt stream without permutations".into()))?;
            for perm in stored {
                let mut seen = vec![false; perm.len()];
                for &j in perm {
                    let j = j as usize;
                    if j >= perm.len() || seen[j] {
                        return Err(Error::CorruptStream(
                            "stored permutation is not a bijection".into(),
                        ));
                    }
                    seen[j] = true;
                }
            }
            stored
        }
        _ => {
            recomputed = recompute_paths(
                &enc.labelmap,
                enc.mode,
                enc.metric,
                enc.levels,
                enc.support.as_ref(),
                enc.gradients.as_deref(),
            )?;
            &recomputed
        }
    };
    validate_lengths(enc, perms)?;

    let mut values = enc.approx_lowest.clone();
    for i in (0..enc.levels).rev() {
        let n = perms[i].len();
        let cp = CoeffPair {
            approx: values,
            detail: enc.details[enc.levels - 1 - i].clone(),
        };
        let sampled = idwt_periodic(&cp, &fb, n)?;
        let mut carrier = vec![0.0f64; n];
        for (t, &j) in perms[i].iter().enumerate() {
            carrier[j as usize] = sampled[t];
        }
        values = carrier;
    }

    let mut pixels = vec![0.0f64; enc.width * enc.height];
    for (c, v) in enc.domain().into_iter().zip(values) {
        pixels[row_major_rank(c, enc.width)] = v;
    }
    Ok(GrayImage::new(enc.width, enc.height, pixels))
}
