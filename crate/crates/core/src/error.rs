//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    // PGM
    #[error("malformed pgm header: {0}")]
    MalformedHeader(String),
    #[error("unsupported pgm maxval {0}, only 255 is supported")]
    UnsupportedMaxval(u32),
    #[error("truncated payload: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("pgm sample {value} out of range 0..=255")]
    SampleOutOfRange { value: i64 },

    // Segmentation
    #[error("unknown region label {label}, map has {region_count} regions")]
    UnknownLabel { label: u32, region_count: u32 },
    #[error("malformed label map: {0}")]
    MalformedLabelMap(String),

    // Paths
    #[error("cannot build a path over an empty region")]
    EmptyRegion,
    #[error("paths to glue have overlapping supports")]
    OverlappingPaths,

    // Wavelet
    #[error("signal of length {0} is too short for a wavelet transform (need >= 2)")]
    SignalTooShort(usize),
    #[error("coefficient lengths {approx}+{detail} inconsistent with signal length {signal}")]
    CoeffLengthMismatch {
        approx: usize,
        detail: usize,
        signal: usize,
    },
    #[error("tensor transform requires a square power-of-two image, got {width}x{height}")]
    NonPowerOfTwo { width: usize, height: usize },
    #[error("requested {requested} levels but the size only admits {max}")]
    TooManyTensorLevels { requested: usize, max: usize },

    // Codec
    #[error("image is {img_width}x{img_height} but label map is {map_width}x{map_height}")]
    DimensionMismatch {
        img_width: usize,
        img_height: usize,
        map_width: usize,
        map_height: usize,
    },
    #[error("{levels} levels require 2^{levels} <= {points} points")]
    TooManyLevels { levels: usize, points: usize },
    #[error("corrupt stream: {0}")]
    CorruptStream(String),
    #[error("bad magic: not an RBE1 stream")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated stream: needed {needed} more bytes")]
    TruncatedStream { needed: usize },
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("image dimension {0} exceeds the container limit 65535")]
    DimensionTooLarge(usize),

    // ROI
    #[error("roi operations require the haar bank, stream uses {0}")]
    RoiRequiresHaar(String),
    #[error("roi operations require a full-level encode of a square power-of-two image")]
    RoiRequiresFullLevels,
    #[error("roi operations require recomputable paths, not the epwt mode")]
    RoiRequiresRegionMode,
    #[error("fraction {0} outside [0, 1]")]
    FractionOutOfRange(f64),

    // Analysis
    #[error("cannot keep {requested} coefficients, stream has {available}")]
    KeepCountTooLarge { requested: usize, available: usize },
    #[error("images are identical, psnr is infinite")]
    IdenticalImages,
    #[error("invalid coefficient id {0}")]
    InvalidCoeffId(String),
}
