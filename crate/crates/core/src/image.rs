//! Pixel grid, coordinates, canonical ordering and PGM i/o.
//!
//! Pixels are kept as `f64` through the whole pipeline; quantization to
//! bytes happens only when a file is written.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A pixel coordinate. `row` runs downward, `col` to the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub fn new(row: usize, col: usize) -> Self {
        Coord { row, col }
    }
}

/// Rank of a coordinate in row-major (row-stacking) order.
pub fn row_major_rank(c: Coord, width: usize) -> usize {
    debug_assert!(c.col < width);
    c.row * width + c.col
}

/// Rectangular grid of gray values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Builds an image from row-major pixel data.
    ///
    /// Panics if `pixels.len() != width * height`.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        assert_eq!(pixels.len(), width * height, "pixel count mismatch");
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        GrayImage::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(row, col)` on every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        GrayImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, c: Coord) -> f64 {
        self.pixels[row_major_rank(c, self.width)]
    }

    pub fn set(&mut self, c: Coord, value: f64) {
        let i = row_major_rank(c, self.width);
        self.pixels[i] = value;
    }

    /// All coordinates of the grid in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        let w = self.width;
        (0..self.pixels.len()).map(move |i| Coord::new(i / w, i % w))
    }
}

/// A set of coordinates kept sorted in row-major order, without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<Coord>,
}

impl PointSet {
    /// Builds a point set from arbitrary coordinates, sorting them into
    /// canonical row-major order. Panics on duplicates.
    pub fn new(mut points: Vec<Coord>) -> Self {
        points.sort_unstable();
        for w in points.windows(2) {
            assert!(w[0] != w[1], "duplicate coordinate {:?} in point set", w[0]);
        }
        PointSet { points }
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

    pub fn contains(&self, c: Coord) -> bool {
        self.points.binary_search(&c).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Coord> + '_ {
        self.points.iter().copied()
    }
}

/// Rounds half-up, then clamps to a byte.
fn quantize(v: f64) -> u8 {
    let r = (v + 0.5).floor();
    if r < 0.0 {
        0
    } else if r > 255.0 {
        255
    } else {
        r as u8
    }
}

/// Loads a PGM file (P2 or P5, maxval 255).
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pgm(&data)
}

/// Writes the image as a binary P5 PGM, rounding half-up and clamping.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(img.pixel_count() + 32);
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height()).expect("write to vec");
    out.extend(img.pixels().iter().map(|&v| quantize(v)));
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Token scanner for PGM headers: whitespace separated, `#` comments run
/// to end of line.
struct PgmScanner<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> PgmScanner<'a> {
    fn new(data: &'a [u8]) -> Self {
        PgmScanner { data, pos: 0 }
    }

    fn skip_filler(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a str> {
        self.skip_filler();
        let start = self.pos;
        while self.pos < self.data.len()
            && !self.data[self.pos].is_ascii_whitespace()
            && self.data[self.pos] != b'#'
        {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            std::str::from_utf8(&self.data[start..self.pos]).ok()
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.token()
            .and_then(|t| t.parse::<u32>().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("missing or invalid {what}")))
    }
}

fn parse_pgm(data: &[u8]) -> Result<GrayImage> {
    let mut sc = PgmScanner::new(data);
    let magic = sc
        .token()
        .ok_or_else(|| Error::MalformedHeader("empty file".into()))?;
    let binary = match magic {
        "P2" => false,
        "P5" => true,
        other => {
            return Err(Error::MalformedHeader(format!(
                "magic {other:?} is not P2 or P5"
            )))
        }
    };
    let width = sc.number("width")? as usize;
    let height = sc.number("height")? as usize;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero image dimension".into()));
    }
    let maxval = sc.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let expected = width * height;
    let mut pixels = Vec::with_capacity(expected);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if sc.pos >= data.len() || !data[sc.pos].is_ascii_whitespace() {
            return Err(Error::MalformedHeader(
                "missing separator before P5 raster".into(),
            ));
        }
        let raster = &data[sc.pos + 1..];
        if raster.len() < expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: raster.len(),
            });
        }
        pixels.extend(raster[..expected].iter().map(|&b| b as f64));
    } else {
        while pixels.len() < expected {
            match sc.token() {
                None => {
                    return Err(Error::TruncatedPayload {
                        expected,
                        found: pixels.len(),
                    })
                }
                Some(tok) => {
                    let v: i64 = tok.parse().map_err(|_| {
                        Error::MalformedHeader(format!("invalid sample {tok:?}"))
                    })?;
                    if !(0..=255).contains(&v) {
                        return Err(Error::SampleOutOfRange { value: v });
                    }
                    pixels.push(v as f64);
                }
            }
        }
    }
    Ok(GrayImage::new(width, height, pixels))
}
