//! Property tests for the core invariants.

use std::collections::HashSet;

use proptest::prelude::*;

use rbepwt::codec::encode;
use rbepwt::container::{deserialize, serialize};
use rbepwt::image::{Coord, GrayImage, PointSet};
use rbepwt::path::{easy_path, epwt_path, grad_path, Metric, PathMode, RegionGradient};
use rbepwt::segmentation::{fh_segment, SegParams};
use rbepwt::wavelet::{dwt_periodic, idwt_periodic, BankKind, FilterBank};

fn image_from_seed(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut state = seed.wrapping_mul(2).wrapping_add(1);
    GrayImage::from_fn(w, h, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        ((state >> 11) % 256) as f64
    })
}

fn point_set() -> impl Strategy<Value = PointSet> {
    prop::collection::hash_set((0usize..12, 0usize..12), 1..50)
        .prop_map(|set| PointSet::new(set.into_iter().map(|(r, c)| Coord::new(r, c)).collect()))
}

proptest! {
    #[test]
    fn dwt_roundtrips_on_both_banks(
        signal in prop::collection::vec(-255.0..255.0f64, 2..80),
        use_haar in any::<bool>(),
    ) {
        let bank = if use_haar { FilterBank::haar() } else { FilterBank::cdf97() };
        let cp = dwt_periodic(&signal, &bank).unwrap();
        prop_assert_eq!(cp.approx.len() + cp.detail.len(), signal.len());
        let back = idwt_periodic(&cp, &bank, signal.len()).unwrap();
        for (a, b) in signal.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn every_path_finder_is_a_bijection(
        region in point_set(),
        chebyshev in any::<bool>(),
        gx in -3.0..3.0f64,
        gy in -3.0..3.0f64,
        seed in any::<u64>(),
    ) {
        let metric = if chebyshev { Metric::Chebyshev } else { Metric::Euclidean };
        let easy = easy_path(&region, metric).unwrap();
        prop_assert_eq!(easy.support(), region.clone());

        let grad = grad_path(&region, RegionGradient { gx, gy }, metric).unwrap();
        prop_assert_eq!(grad.support(), region.clone());

        let mut state = seed | 1;
        let values: Vec<f64> = (0..region.len())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                ((state >> 11) % 256) as f64
            })
            .collect();
        let epwt = epwt_path(&region, &values, metric).unwrap();
        prop_assert_eq!(epwt.support(), region.clone());

        // Determinism: a second run is identical.
        prop_assert_eq!(&easy, &easy_path(&region, metric).unwrap());
        prop_assert_eq!(&epwt, &epwt_path(&region, &values, metric).unwrap());
    }

    #[test]
    fn grad_path_is_invariant_under_positive_scaling(
        region in point_set(),
        gx in -2.0..2.0f64,
        gy in -2.0..2.0f64,
        scale in 0.001..1000.0f64,
    ) {
        let g = RegionGradient { gx, gy };
        let scaled = RegionGradient { gx: gx * scale, gy: gy * scale };
        let a = grad_path(&region, g, Metric::Euclidean).unwrap();
        let b = grad_path(&region, scaled, Metric::Euclidean).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn segmentation_partitions_and_is_deterministic(
        seed in any::<u64>(),
        k in 0.0..400.0f64,
        min_size in 0usize..8,
    ) {
        let img = image_from_seed(10, 10, seed);
        let a = fh_segment(&img, SegParams::new(k, 0.0, min_size));
        let b = fh_segment(&img, SegParams::new(k, 0.0, min_size));
        prop_assert_eq!(&a, &b);
        // Labels are exactly 0..region_count, all present.
        let seen: HashSet<u32> = a.labels().iter().copied().collect();
        prop_assert_eq!(seen.len() as u32, a.region_count());
        prop_assert!(a.labels().iter().all(|&l| l < a.region_count()));
    }

    #[test]
    fn container_roundtrip_is_identity_and_byte_stable(
        seed in any::<u64>(),
        mode_idx in 0usize..3,
        use_haar in any::<bool>(),
        chebyshev in any::<bool>(),
    ) {
        let img = image_from_seed(8, 8, seed);
        let lm = fh_segment(&img, SegParams::new(120.0, 0.0, 2));
        let mode = [PathMode::Easy, PathMode::Grad, PathMode::Epwt][mode_idx];
        let bank = if use_haar { BankKind::Haar } else { BankKind::Cdf97 };
        let metric = if chebyshev { Metric::Chebyshev } else { Metric::Euclidean };
        let enc = encode(&img, &lm, mode, metric, bank, 6).unwrap();
        let bytes = serialize(&enc).unwrap();
        let back = deserialize(&bytes).unwrap();
        prop_assert_eq!(&back, &enc);
        prop_assert_eq!(serialize(&back).unwrap(), bytes);
    }

    #[test]
    fn pgm_quantization_roundtrips_integer_images(
        seed in any::<u64>(),
        w in 1usize..9,
        h in 1usize..9,
    ) {
        let img = image_from_seed(w, h, seed);
        let dir = std::env::temp_dir().join("rbepwt_prop_pgm");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("p{seed}_{w}x{h}.pgm"));
        rbepwt::image::save_image(&img, &path).unwrap();
        let back = rbepwt::image::load_image(&path).unwrap();
        std::fs::remove_file(&path).ok();
        prop_assert_eq!(back, img);
    }
}
