//! Region-of-interest coding over the Haar coefficient tree.
//!
//! With Haar filters and the maximum number of levels every coefficient
//! depends on exactly two values of the level above, so the coefficients
//! form a complete binary tree over the pixels. The set of coefficients
//! influenced by a region is the set of its leaves' ancestors; preserving
//! all of them reconstructs the region exactly, and two-tier thresholding
//! trades quality between the region and the rest.

use std::collections::HashSet;

use crate::codec::{recompute_paths, CoeffId, EncodedImage};
use crate::error::{Error, Result};
use crate::image::row_major_rank;
use crate::path::PathMode;
use crate::segmentation::region_points;
use crate::wavelet::BankKind;

/// Coefficients influenced by a set of regions; closed under the parent
/// relation of the coefficient tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AncestorSet {
    ids: HashSet<CoeffId>,
}

impl AncestorSet {
    pub fn contains(&self, id: CoeffId) -> bool {
        self.ids.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = CoeffId> + '_ {
        self.ids.iter().copied()
    }
}

fn check_preconditions(enc: &EncodedImage) -> Result<()> {
    if enc.bank != BankKind::Haar {
        return Err(Error::RoiRequiresHaar(enc.bank.name().to_string()));
    }
    if enc.mode == PathMode::Epwt {
        return Err(Error::RoiRequiresRegionMode);
    }
    let full = enc.width == enc.height
        && enc.width.is_power_of_two()
        && enc.support.is_none()
        && enc.levels == 2 * enc.width.trailing_zeros() as usize;
    if !full {
        return Err(Error::RoiRequiresFullLevels);
    }
    Ok(())
}

fn invert(perm: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; perm.len()];
    for (t, &j) in perm.iter().enumerate() {
        inv[j as usize] = t as u32;
    }
    inv
}

/// All coefficients influenced by the pixels of the given regions.
pub fn ancestors(enc: &EncodedImage, roi_labels: &[u32]) -> Result<AncestorSet> {
    check_preconditions(enc)?;
    let perms = recompute_paths(
        &enc.labelmap,
        enc.mode,
        enc.metric,
        enc.levels,
        None,
        enc.gradients.as_deref(),
    )?;

    // Positions of the ROI pixels in the finest path: the carrier order of
    // the first level is the row-major grid.
    let inv0 = invert(&perms[0]);
    let mut positions: HashSet<usize> = HashSet::new();
    for &label in roi_labels {
        let region = region_points(&enc.labelmap, label)?;
        for c in region.iter() {
            positions.insert(inv0[row_major_rank(c, enc.width)] as usize);
        }
    }

    let mut ids = HashSet::new();
    for i in 0..enc.levels {
        // Position j feeds the level's coefficient pair at index j/2.
        let indices: HashSet<usize> = positions.iter().map(|&j| j / 2).collect();
        let detail_level = enc.levels - 1 - i;
        for &k in &indices {
            ids.insert(CoeffId::detail(detail_level, k));
        }
        if i + 1 < enc.levels {
            let inv = invert(&perms[i + 1]);
            positions = indices.iter().map(|&k| inv[k] as usize).collect();
        } else {
            for &k in &indices {
                ids.insert(CoeffId::approx(k));
            }
        }
    }
    Ok(AncestorSet { ids })
}

fn checked_fraction(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) || f.is_nan() {
        return Err(Error::FractionOutOfRange(f));
    }
    Ok(f)
}

/// Largest-magnitude `keep` ids out of `items`, ties resolved by the
/// canonical coefficient order.
fn top_by_magnitude(mut items: Vec<(CoeffId, f64)>, keep: usize) -> HashSet<CoeffId> {
    items.sort_by(|(ia, ma), (ib, mb)| {
        mb.abs()
            .partial_cmp(&ma.abs())
            .expect("finite coefficients")
            .then_with(|| ia.cmp(ib))
    });
    items.into_iter().take(keep).map(|(id, _)| id).collect()
}

fn zero_outside(enc: &EncodedImage, kept: &HashSet<CoeffId>) -> EncodedImage {
    let mut out = enc.clone();
    let ids: Vec<CoeffId> = enc.coeff_ids().collect();
    for id in ids {
        if !kept.contains(&id) {
            out.set_coeff(id, 0.0);
        }
    }
    out
}

/// Two-tier thresholding: keeps the ceil(roi_fraction * |A|) largest
/// ancestors of the ROI and the ceil(rest_fraction * |B|) largest of the
/// remaining coefficients, zeroing everything else.
pub fn roi_threshold(
    enc: &EncodedImage,
    roi_labels: &[u32],
    roi_fraction: f64,
    rest_fraction: f64,
) -> Result<EncodedImage> {
    let roi_fraction = checked_fraction(roi_fraction)?;
    let rest_fraction = checked_fraction(rest_fraction)?;
    let anc = ancestors(enc, roi_labels)?;
    let mut in_roi = Vec::new();
    let mut rest = Vec::new();
    for id in enc.coeff_ids() {
        let v = enc.coeff(id).expect("id enumerated from enc");
        if anc.contains(id) {
            in_roi.push((id, v));
        } else {
            rest.push((id, v));
        }
    }
    let keep_roi = (roi_fraction * in_roi.len() as f64).ceil() as usize;
    let keep_rest = (rest_fraction * rest.len() as f64).ceil() as usize;
    let mut kept = top_by_magnitude(in_roi, keep_roi);
    kept.extend(top_by_magnitude(rest, keep_rest));
    Ok(zero_outside(enc, &kept))
}

/// Zeroes every coefficient outside the ROI's ancestor set; decoding then
/// reproduces every ROI pixel exactly (Haar).
pub fn keep_ancestors_only(enc: &EncodedImage, roi_labels: &[u32]) -> Result<EncodedImage> {
    let anc = ancestors(enc, roi_labels)?;
    let kept: HashSet<CoeffId> = anc.ids().collect();
    Ok(zero_outside(enc, &kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode, encode, CoeffKind};
    use crate::image::{Coord, GrayImage};
    use crate::path::Metric;
    use crate::segmentation::LabelMap;

    fn rand_image(n: usize, seed: u64) -> GrayImage {
        let mut state = seed.wrapping_mul(2).wrapping_add(1);
        GrayImage::from_fn(n, n, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            ((state >> 11) % 256) as f64
        })
    }

    fn encode_haar_full(img: &GrayImage, lm: &LabelMap) -> EncodedImage {
        let levels = 2 * img.width().trailing_zeros() as usize;
        encode(img, lm, PathMode::Easy, Metric::Euclidean, BankKind::Haar, levels).unwrap()
    }

    #[test]
    fn single_pixel_region_has_five_ancestors_in_4x4() {
        // Pixel (2,1) is its own region.
        let mut labels = vec![0u32; 16];
        labels[2 * 4 + 1] = 1;
        let lm = LabelMap::new(4, 4, labels).unwrap();
        let img = rand_image(4, 3);
        let enc = encode_haar_full(&img, &lm);
        let anc = ancestors(&enc, &[1]).unwrap();
        assert_eq!(anc.len(), 5); // 4 detail + 1 approximation
        let details = anc
            .ids()
            .filter(|id| matches!(id.kind, CoeffKind::Detail(_)))
            .count();
        assert_eq!(details, 4);
    }

    #[test]
    fn full_cover_reaches_every_coefficient() {
        let img = rand_image(4, 9);
        let lm = LabelMap::new(
            4,
            4,
            vec![0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 3, 3, 2, 2, 3, 3],
        )
        .unwrap();
        let enc = encode_haar_full(&img, &lm);
        let anc = ancestors(&enc, &[0, 1, 2, 3]).unwrap();
        assert_eq!(anc.len(), enc.coeff_count());
    }

    /// Influence oracle: perturb one pixel, re-encode, and report every
    /// coefficient that moved.
    fn influence_of_pixel(img: &GrayImage, lm: &LabelMap, c: Coord) -> HashSet<CoeffId> {
        let base = encode_haar_full(img, lm);
        let mut bumped = img.clone();
        bumped.set(c, img.get(c) + 64.0);
        let alt = encode_haar_full(&bumped, lm);
        base.coeff_ids()
            .filter(|&id| (base.coeff(id).unwrap() - alt.coeff(id).unwrap()).abs() > 1e-9)
            .collect()
    }

    #[test]
    fn ancestors_match_the_perturbation_oracle() {
        // Singleton regions so each pixel's ancestor set is addressable.
        let mut labels = vec![0u32; 16];
        labels[5] = 1;
        labels[12] = 2;
        let lm = LabelMap::new(4, 4, labels).unwrap();
        let img = rand_image(4, 21);
        let enc = encode_haar_full(&img, &lm);
        for (label, rank) in [(1u32, 5usize), (2, 12)] {
            let anc = ancestors(&enc, &[label]).unwrap();
            let observed = influence_of_pixel(&img, &lm, Coord::new(rank / 4, rank % 4));
            let claimed: HashSet<CoeffId> = anc.ids().collect();
            // Every moved coefficient is claimed; the claim may include
            // coefficients whose change cancels numerically.
            assert!(observed.is_subset(&claimed), "label {label}");
            assert_eq!(observed, claimed, "label {label}");
        }
    }

    #[test]
    fn distant_rois_share_exactly_the_root_node() {
        // Quadrant regions: the first and last quadrant occupy disjoint
        // path position ranges at every level until the two-point root
        // level, so their ancestor chains meet only at the root node,
        // which carries the lowest detail coefficient and the
        // approximation value.
        let lm = LabelMap::new(
            4,
            4,
            vec![0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 3, 3, 2, 2, 3, 3],
        )
        .unwrap();
        let img = rand_image(4, 33);
        let enc = encode_haar_full(&img, &lm);
        let a = ancestors(&enc, &[0]).unwrap();
        let b = ancestors(&enc, &[3]).unwrap();
        let shared: HashSet<CoeffId> = a.ids().filter(|&id| b.contains(id)).collect();
        let root_node: HashSet<CoeffId> =
            [CoeffId::approx(0), CoeffId::detail(0, 0)].into_iter().collect();
        assert_eq!(shared, root_node);
    }

    #[test]
    fn every_claimed_ancestor_influences_some_roi_pixel() {
        // Completeness direction on a 4x4: perturbing any coefficient in
        // the ancestor set must move at least one ROI pixel.
        let lm = LabelMap::new(
            4,
            4,
            vec![0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2],
        )
        .unwrap();
        let img = rand_image(4, 35);
        let enc = encode_haar_full(&img, &lm);
        let baseline = decode(&enc).unwrap();
        for label in 0..lm.region_count() {
            let anc = ancestors(&enc, &[label]).unwrap();
            let roi = region_points(&lm, label).unwrap();
            for id in anc.ids() {
                let mut bumped = enc.clone();
                bumped.set_coeff(id, enc.coeff(id).unwrap() + 16.0);
                let dec = decode(&bumped).unwrap();
                let moved = roi
                    .iter()
                    .any(|c| (dec.get(c) - baseline.get(c)).abs() > 1e-9);
                assert!(moved, "ancestor {id} of region {label} is inert");
            }
        }
    }

    #[test]
    fn keep_ancestors_only_reconstructs_the_roi_exactly() {
        let img = rand_image(16, 55);
        let lm = crate::segmentation::fh_segment(
            &img,
            crate::segmentation::SegParams::new(300.0, 0.0, 4),
        );
        let enc = encode_haar_full(&img, &lm);
        let label = lm.region_count() - 1;
        let thinned = keep_ancestors_only(&enc, &[label]).unwrap();
        let anc = ancestors(&enc, &[label]).unwrap();
        assert_eq!(thinned.nonzero_count(), {
            // Ancestors whose coefficient is already zero stay zero.
            anc.ids()
                .filter(|&id| enc.coeff(id).unwrap() != 0.0)
                .count()
        });
        let dec = decode(&thinned).unwrap();
        for c in region_points(&lm, label).unwrap().iter() {
            assert!((dec.get(c) - img.get(c)).abs() < 1e-9);
        }
    }

    #[test]
    fn keeping_everything_changes_nothing() {
        let img = rand_image(4, 70);
        let lm = LabelMap::new(4, 4, vec![0; 15].into_iter().chain([1]).collect()).unwrap();
        let enc = encode_haar_full(&img, &lm);
        let all: Vec<u32> = (0..lm.region_count()).collect();
        let kept = keep_ancestors_only(&enc, &all).unwrap();
        assert_eq!(kept, enc);
    }

    #[test]
    fn tier_counting_rule() {
        let img = rand_image(8, 81);
        let mut labels = vec![0u32; 64];
        for i in 0..8 {
            labels[i] = 1;
        }
        let lm = LabelMap::new(8, 8, labels).unwrap();
        let enc = encode_haar_full(&img, &lm);
        let anc = ancestors(&enc, &[1]).unwrap();
        let n_a = anc.len();
        let n_b = enc.coeff_count() - n_a;
        let out = roi_threshold(&enc, &[1], 0.10, 0.001).unwrap();
        let expect = (0.10 * n_a as f64).ceil() as usize + (0.001 * n_b as f64).ceil() as usize;
        // Random coefficients are nonzero, so counts match exactly.
        assert_eq!(out.nonzero_count(), expect);
    }

    #[test]
    fn full_roi_fraction_preserves_the_region() {
        let img = rand_image(8, 90);
        let mut labels = vec![0u32; 64];
        for i in 32..40 {
            labels[i] = 1;
        }
        let lm = LabelMap::new(8, 8, labels).unwrap();
        let enc = encode_haar_full(&img, &lm);
        let out = roi_threshold(&enc, &[1], 1.0, 0.0).unwrap();
        let dec = decode(&out).unwrap();
        for c in region_points(&lm, 1).unwrap().iter() {
            assert!((dec.get(c) - img.get(c)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_fractions_zero_everything() {
        let img = rand_image(4, 91);
        let lm = LabelMap::trivial(4, 4);
        let enc = encode_haar_full(&img, &lm);
        let out = roi_threshold(&enc, &[0], 0.0, 0.0).unwrap();
        assert_eq!(out.nonzero_count(), 0);
    }

    #[test]
    fn roi_fraction_is_monotone_within_the_ancestor_tier() {
        let img = rand_image(8, 92);
        let mut labels = vec![0u32; 64];
        labels[20] = 1;
        let lm = LabelMap::new(8, 8, labels).unwrap();
        let enc = encode_haar_full(&img, &lm);
        let anc = ancestors(&enc, &[1]).unwrap();
        let mut prev: HashSet<CoeffId> = HashSet::new();
        for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let out = roi_threshold(&enc, &[1], frac, 0.0).unwrap();
            let kept: HashSet<CoeffId> = out
                .coeff_ids()
                .filter(|&id| out.coeff(id).unwrap() != 0.0 && anc.contains(id))
                .collect();
            assert!(prev.is_subset(&kept), "fraction {frac}");
            prev = kept;
        }
    }

    #[test]
    fn rejects_wrong_bank_mode_and_fractions() {
        let img = rand_image(4, 93);
        let lm = LabelMap::trivial(4, 4);
        let cdf = encode(&img, &lm, PathMode::Easy, Metric::Euclidean, BankKind::Cdf97, 4).unwrap();
        assert!(matches!(
            ancestors(&cdf, &[0]),
            Err(Error::RoiRequiresHaar(_))
        ));
        let epwt = encode(&img, &lm, PathMode::Epwt, Metric::Euclidean, BankKind::Haar, 4).unwrap();
        assert!(matches!(
            ancestors(&epwt, &[0]),
            Err(Error::RoiRequiresRegionMode)
        ));
        let partial = encode(&img, &lm, PathMode::Easy, Metric::Euclidean, BankKind::Haar, 3).unwrap();
        assert!(matches!(
            ancestors(&partial, &[0]),
            Err(Error::RoiRequiresFullLevels)
        ));
        let full = encode_haar_full(&img, &lm);
        assert!(matches!(
            ancestors(&full, &[7]),
            Err(Error::UnknownLabel { label: 7, .. })
        ));
        assert!(matches!(
            roi_threshold(&full, &[0], 1.5, 0.0),
            Err(Error::FractionOutOfRange(_))
        ));
    }
}
