//! Region based easy path wavelet transform image codec.
//!
//! The codec segments an image into regions of low gray-value variation,
//! vectorizes each region along a deterministic path, runs a periodic
//! 1-D wavelet transform over the sampled signal, keeps the even path
//! positions and iterates. Only the segmentation is stored as adaptivity
//! side information: the decoder replays the paths from region geometry
//! alone. A data-driven EPWT mode (stored per-level permutations) and the
//! classical 2-D tensor transform are included as baselines, along with
//! n-largest thresholding, PSNR metrics and Haar coefficient-tree
//! region-of-interest coding.

pub mod analysis;
pub mod codec;
pub mod container;
pub mod error;
pub mod image;
pub mod path;
pub mod roi;
pub mod segmentation;
pub mod synth;
pub mod wavelet;

pub use analysis::{basis_element, keep_n_largest, psnr_paper, psnr_std};
pub use codec::{decode, encode, encode_support, recompute_paths, CoeffId, CoeffKind, EncodedImage};
pub use container::{deserialize, serialize};
pub use error::{Error, Result};
pub use image::{load_image, row_major_rank, save_image, Coord, GrayImage, PointSet};
pub use path::{Metric, PathMode, PointPath, RegionGradient};
pub use roi::{ancestors, keep_ancestors_only, roi_threshold, AncestorSet};
pub use segmentation::{
    build_graph, fh_segment, fh_segment_run, fh_segment_with_tau, gaussian_smooth,
    load_label_map, perimeter, region_points, save_label_map, FhRun, LabelMap, RegionStats,
    SegParams, WeightedEdge,
};
pub use wavelet::{
    dwt_periodic, idwt_periodic, tensor_dwt2, tensor_idwt2, BankKind, CoeffPair, FilterBank,
    TensorCoeffs,
};
