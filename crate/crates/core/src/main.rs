//! Command-line front end: segmentation, encoding, decoding,
//! thresholding, ROI coding, metrics, basis extraction and path dumps.
//!
//! Exit codes: 0 ok, 1 runtime failure, 2 usage error (including missing
//! input files), 3 format error, 4 precondition violation.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use rbepwt::codec::{decode, encode, recompute_paths, CoeffId, EncodedImage};
use rbepwt::container::{deserialize, serialize};
use rbepwt::error::Error;
use rbepwt::image::{load_image, save_image, Coord, GrayImage};
use rbepwt::path::{Metric, PathMode};
use rbepwt::segmentation::{fh_segment, load_label_map, perimeter, save_label_map, LabelMap, SegParams};
use rbepwt::wavelet::BankKind;
use rbepwt::{analysis, roi};

#[derive(Parser)]
#[command(name = "rbepwt", version, about = "Region based easy path wavelet transform codec")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Easy,
    Grad,
    Epwt,
}

#[derive(Clone, Copy, ValueEnum)]
enum WaveletArg {
    Haar,
    Cdf97,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    Euclidean,
    Chebyshev,
}

impl From<PathArg> for PathMode {
    fn from(a: PathArg) -> Self {
        match a {
            PathArg::Easy => PathMode::Easy,
            PathArg::Grad => PathMode::Grad,
            PathArg::Epwt => PathMode::Epwt,
        }
    }
}

impl From<WaveletArg> for BankKind {
    fn from(a: WaveletArg) -> Self {
        match a {
            WaveletArg::Haar => BankKind::Haar,
            WaveletArg::Cdf97 => BankKind::Cdf97,
        }
    }
}

impl From<DistanceArg> for Metric {
    fn from(a: DistanceArg) -> Self {
        match a {
            DistanceArg::Euclidean => Metric::Euclidean,
            DistanceArg::Chebyshev => Metric::Chebyshev,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Segment a PGM image, writing a label map file.
    Segment {
        input: PathBuf,
        /// Scale parameter of the boundary predicate.
        #[arg(long, default_value_t = 200.0)]
        k: f64,
        /// Gaussian presmooth standard deviation in pixels.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        /// Merge regions smaller than this after the main pass.
        #[arg(long = "min-size", default_value_t = 10)]
        min_size: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Encode a PGM image into an RBE1 stream.
    Encode {
        input: PathBuf,
        /// Label map file from `segment`; defaults to a single region.
        #[arg(long)]
        seg: Option<PathBuf>,
        #[arg(long = "path", value_enum, default_value = "easy")]
        path_mode: PathArg,
        #[arg(long = "wavelet", value_enum, default_value = "cdf97")]
        wavelet: WaveletArg,
        /// Transform levels; defaults to the maximum, floor(log2(pixels)).
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_enum, default_value = "euclidean")]
        distance: DistanceArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Decode an RBE1 stream back into a PGM image.
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Keep only the n largest coefficients, in place by default.
    Threshold {
        input: PathBuf,
        #[arg(long)]
        keep: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Region-of-interest thresholding over the Haar coefficient tree.
    Roi {
        input: PathBuf,
        /// Comma-separated region labels forming the ROI.
        #[arg(long = "roi-labels", value_delimiter = ',', required = true)]
        roi_labels: Vec<u32>,
        /// Fraction of ROI-ancestor coefficients to keep.
        #[arg(long = "roi-frac")]
        roi_frac: Option<f64>,
        /// Fraction of the remaining coefficients to keep.
        #[arg(long = "rest-frac")]
        rest_frac: Option<f64>,
        /// Keep exactly the ROI's ancestor coefficients.
        #[arg(long = "ancestors-only", conflicts_with_all = ["roi_frac", "rest_frac"])]
        ancestors_only: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print a CSV quality row for an original/reconstruction pair.
    Metrics {
        original: PathBuf,
        reconstruction: PathBuf,
        /// Stream to pull mode, bank and coefficient count from.
        #[arg(long)]
        rbe: Option<PathBuf>,
    },
    /// Decode a single unit coefficient into a rescaled PGM image.
    Basis {
        input: PathBuf,
        /// 0 selects the approximation vector, j >= 1 the detail vector
        /// at stored level j-1 (lowest level first).
        #[arg(long)]
        level: usize,
        #[arg(long)]
        index: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Dump one level's path as "step,row,col" CSV.
    PathDump {
        input: PathBuf,
        /// Paper-style level in 1..=L; L is the first, finest path.
        #[arg(long)]
        level: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli.cmd));
}

fn run(cmd: Cmd) -> i32 {
    let result = match cmd {
        Cmd::Segment {
            input,
            k,
            sigma,
            min_size,
            output,
        } => cmd_segment(&input, k, sigma, min_size, &output),
        Cmd::Encode {
            input,
            seg,
            path_mode,
            wavelet,
            levels,
            distance,
            output,
        } => cmd_encode(
            &input,
            seg.as_deref(),
            path_mode.into(),
            wavelet.into(),
            levels,
            distance.into(),
            &output,
        ),
        Cmd::Decode { input, output } => cmd_decode(&input, &output),
        Cmd::Threshold {
            input,
            keep,
            output,
        } => cmd_threshold(&input, keep, output.as_deref()),
        Cmd::Roi {
            input,
            roi_labels,
            roi_frac,
            rest_frac,
            ancestors_only,
            output,
        } => {
            if !ancestors_only && (roi_frac.is_none() || rest_frac.is_none()) {
                eprintln!(
                    "rbepwt: roi needs either --ancestors-only or both --roi-frac and --rest-frac"
                );
                return 2;
            }
            cmd_roi(
                &input,
                &roi_labels,
                roi_frac,
                rest_frac,
                ancestors_only,
                output.as_deref(),
            )
        }
        Cmd::Metrics {
            original,
            reconstruction,
            rbe,
        } => cmd_metrics(&original, &reconstruction, rbe.as_deref()),
        Cmd::Basis {
            input,
            level,
            index,
            output,
        } => cmd_basis(&input, level, index, &output),
        Cmd::PathDump {
            input,
            level,
            output,
        } => cmd_pathdump(&input, level, &output),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rbepwt: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
        Error::Io { .. } => 1,
        Error::MalformedHeader(_)
        | Error::UnsupportedMaxval(_)
        | Error::TruncatedPayload { .. }
        | Error::SampleOutOfRange { .. }
        | Error::MalformedLabelMap(_)
        | Error::BadMagic
        | Error::UnsupportedVersion(_)
        | Error::TruncatedStream { .. }
        | Error::ChecksumMismatch { .. }
        | Error::CorruptStream(_) => 3,
        _ => 4,
    }
}

fn read_stream(path: &Path) -> Result<EncodedImage, Error> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    deserialize(&bytes)
}

fn write_stream(enc: &EncodedImage, path: &Path) -> Result<(), Error> {
    let bytes = serialize(enc)?;
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_segment(
    input: &Path,
    k: f64,
    sigma: f64,
    min_size: usize,
    output: &Path,
) -> Result<(), Error> {
    let img = load_image(input)?;
    let lm = fh_segment(&img, SegParams::new(k, sigma, min_size));
    save_label_map(&lm, output)?;
    println!("regions: {}", lm.region_count());
    println!("perimeter: {}", perimeter(&lm));
    Ok(())
}

fn cmd_encode(
    input: &Path,
    seg: Option<&Path>,
    mode: PathMode,
    bank: BankKind,
    levels: Option<usize>,
    metric: Metric,
    output: &Path,
) -> Result<(), Error> {
    let img = load_image(input)?;
    let lm = match seg {
        Some(path) => load_label_map(path)?,
        None => LabelMap::trivial(img.width(), img.height()),
    };
    let levels = levels.unwrap_or_else(|| {
        (usize::BITS - 1 - img.pixel_count().leading_zeros()) as usize
    });
    let enc = encode(&img, &lm, mode, metric, bank, levels)?;
    write_stream(&enc, output)
}

fn cmd_decode(input: &Path, output: &Path) -> Result<(), Error> {
    let enc = read_stream(input)?;
    let img = decode(&enc)?;
    save_image(&img, output)
}

fn cmd_threshold(input: &Path, keep: usize, output: Option<&Path>) -> Result<(), Error> {
    let enc = read_stream(input)?;
    let thinned = analysis::keep_n_largest(&enc, keep)?;
    write_stream(&thinned, output.unwrap_or(input))
}

fn cmd_roi(
    input: &Path,
    roi_labels: &[u32],
    roi_frac: Option<f64>,
    rest_frac: Option<f64>,
    ancestors_only: bool,
    output: Option<&Path>,
) -> Result<(), Error> {
    let enc = read_stream(input)?;
    let out = if ancestors_only {
        roi::keep_ancestors_only(&enc, roi_labels)?
    } else {
        roi::roi_threshold(&enc, roi_labels, roi_frac.unwrap(), rest_frac.unwrap())?
    };
    write_stream(&out, output.unwrap_or(input))
}

fn cmd_metrics(original: &Path, reconstruction: &Path, rbe: Option<&Path>) -> Result<(), Error> {
    let f = load_image(original)?;
    let g = load_image(reconstruction)?;
    let p_paper = analysis::psnr_paper(&f, &g)?;
    let p_std = match analysis::psnr_std(&f, &g) {
        Ok(v) => v,
        Err(Error::IdenticalImages) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let (mode, bank, n_coeffs) = match rbe {
        Some(path) => {
            let enc = read_stream(path)?;
            let mode = match enc.mode {
                PathMode::Easy => "easy",
                PathMode::Grad => "grad",
                PathMode::Epwt => "epwt",
            };
            (mode, enc.bank.name(), enc.nonzero_count().to_string())
        }
        None => ("-", "-", "-".to_string()),
    };
    let name = original
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| original.display().to_string());
    println!(
        "{name},{mode},{bank},{n_coeffs},{p_paper:.6},{p_std:.6}",
    );
    Ok(())
}

fn cmd_basis(input: &Path, level: usize, index: usize, output: &Path) -> Result<(), Error> {
    let enc = read_stream(input)?;
    let id = if level == 0 {
        CoeffId::approx(index)
    } else {
        CoeffId::detail(level - 1, index)
    };
    let img = analysis::basis_element(&enc, id)?;
    // Affine rescale to the displayable byte range.
    let lo = img.pixels().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = img.pixels().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled = if hi > lo {
        GrayImage::new(
            img.width(),
            img.height(),
            img.pixels()
                .iter()
                .map(|v| (v - lo) / (hi - lo) * 255.0)
                .collect(),
        )
    } else {
        GrayImage::constant(img.width(), img.height(), 128.0)
    };
    save_image(&scaled, output)
}

fn cmd_pathdump(input: &Path, level: usize, output: &Path) -> Result<(), Error> {
    let enc = read_stream(input)?;
    if level == 0 || level > enc.levels {
        return Err(Error::CorruptStream(format!(
            "level {level} outside 1..={}",
            enc.levels
        )));
    }
    let perms = match enc.mode {
        PathMode::Epwt => enc
            .stored_perms
            .clone()
            .ok_or_else(|| Error::CorruptStream("epwt stream without permutations".into()))?,
        _ => recompute_paths(
            &enc.labelmap,
            enc.mode,
            enc.metric,
            enc.levels,
            enc.support.as_ref(),
            enc.gradients.as_deref(),
        )?,
    };
    // Rebuild the level's path coordinates from the permutations.
    let iteration = enc.levels - level;
    let mut order: Vec<Coord> = enc.domain();
    let mut path: Vec<Coord> = Vec::new();
    for (i, perm) in perms.iter().enumerate().take(iteration + 1) {
        path = perm.iter().map(|&j| order[j as usize]).collect();
        if i < iteration {
            order = path.iter().copied().step_by(2).collect();
        }
    }
    let mut csv = String::from("step,row,col\n");
    for (step, c) in path.iter().enumerate() {
        csv.push_str(&format!("{step},{},{}\n", c.row, c.col));
    }
    fs::write(output, csv).map_err(|source| Error::Io {
        path: output.to_path_buf(),
        source,
    })
}
