//! The "RBE1" container: a bit-exact little-endian serialization of an
//! [`EncodedImage`].
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "RBE1" | u8 version=1 | u8 mode | u8 bank | u8 flags
//! u16 width | u16 height | u8 levels | u32 region_count
//! label map: u32 run_count, then run_count x (u32 run_length, u32 label), row-major
//! if flags bit0: support mask, same run-length scheme with values 0/1
//! if mode == grad: region_count x (f64 gx, f64 gy)
//! if mode == epwt: levels x (u32 n, n x u32), finest level first
//! coefficients: u32 n_approx, n_approx x f64,
//!               then per level lowest first: u32 n_detail, n_detail x f64
//! u32 crc32 of all preceding bytes
//! ```
//!
//! mode: 0 easy, 1 grad, 2 epwt. bank: 0 haar, 1 cdf97.
//! flags: bit0 support mask present, bit1 Chebyshev path metric.

use crate::codec::{level_sizes, EncodedImage};
use crate::error::{Error, Result};
use crate::image::{Coord, PointSet};
use crate::path::{Metric, PathMode, RegionGradient};
use crate::segmentation::LabelMap;
use crate::wavelet::BankKind;

pub const MAGIC: [u8; 4] = *b"RBE1";
pub const VERSION: u8 = 1;

const FLAG_SUPPORT: u8 = 0b01;
const FLAG_CHEBYSHEV: u8 = 0b10;

/// CRC-32 (IEEE, reflected), the zlib polynomial.
pub fn crc32(data: &[u8]) -> u32 {
    const TABLE: [u32; 256] = {
        let mut table = [0u32; 256];
        let mut i = 0;
        while i < 256 {
            let mut c = i as u32;
            let mut k = 0;
            while k < 8 {
                c = if c & 1 != 0 { 0xedb88320 ^ (c >> 1) } else { c >> 1 };
                k += 1;
            }
            table[i] = c;
            i += 1;
        }
        table
    };
    let mut c = 0xffffffffu32;
    for &b in data {
        c = TABLE[((c ^ b as u32) & 0xff) as usize] ^ (c >> 8);
    }
    !c
}

fn mode_byte(mode: PathMode) -> u8 {
    match mode {
        PathMode::Easy => 0,
        PathMode::Grad => 1,
        PathMode::Epwt => 2,
    }
}

fn bank_byte(bank: BankKind) -> u8 {
    match bank {
        BankKind::Haar => 0,
        BankKind::Cdf97 => 1,
    }
}

fn push_rle(out: &mut Vec<u8>, values: impl Iterator<Item = u32>) {
    let mut runs: Vec<(u32, u32)> = Vec::new();
    for v in values {
        match runs.last_mut() {
            Some((len, last)) if *last == v => *len += 1,
            _ => runs.push((1, v)),
        }
    }
    out.extend((runs.len() as u32).to_le_bytes());
    for (len, v) in runs {
        out.extend(len.to_le_bytes());
        out.extend(v.to_le_bytes());
    }
}

/// Serializes to the container format.
pub fn serialize(enc: &EncodedImage) -> Result<Vec<u8>> {
    if enc.width > u16::MAX as usize {
        return Err(Error::DimensionTooLarge(enc.width));
    }
    if enc.height > u16::MAX as usize {
        return Err(Error::DimensionTooLarge(enc.height));
    }
    if enc.levels > u8::MAX as usize {
        return Err(Error::CorruptStream(format!(
            "{} levels exceed the container limit",
            enc.levels
        )));
    }
    let mut out = Vec::new();
    out.extend(MAGIC);
    out.push(VERSION);
    out.push(mode_byte(enc.mode));
    out.push(bank_byte(enc.bank));
    let mut flags = 0u8;
    if enc.support.is_some() {
        flags |= FLAG_SUPPORT;
    }
    if enc.metric == Metric::Chebyshev {
        flags |= FLAG_CHEBYSHEV;
    }
    out.push(flags);
    out.extend((enc.width as u16).to_le_bytes());
    out.extend((enc.height as u16).to_le_bytes());
    out.push(enc.levels as u8);
    out.extend(enc.labelmap.region_count().to_le_bytes());
    push_rle(&mut out, enc.labelmap.labels().iter().copied());
    if let Some(support) = &enc.support {
        let w = enc.width;
        push_rle(
            &mut out,
            (0..enc.width * enc.height)
                .map(|i| u32::from(support.contains(Coord::new(i / w, i % w)))),
        );
    }
    if let Some(gradients) = &enc.gradients {
        for g in gradients {
            out.extend(g.gx.to_le_bytes());
            out.extend(g.gy.to_le_bytes());
        }
    }
    if let Some(perms) = &enc.stored_perms {
        for perm in perms {
            out.extend((perm.len() as u32).to_le_bytes());
            for &p in perm {
                out.extend(p.to_le_bytes());
            }
        }
    }
    out.extend((enc.approx_lowest.len() as u32).to_le_bytes());
    for &v in &enc.approx_lowest {
        out.extend(v.to_le_bytes());
    }
    for detail in &enc.details {
        out.extend((detail.len() as u32).to_le_bytes());
        for &v in detail {
            out.extend(v.to_le_bytes());
        }
    }
    let checksum = crc32(&out);
    out.extend(checksum.to_le_bytes());
    Ok(out)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::TruncatedStream {
                needed: self.pos + n - self.data.len(),
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn read_rle(cur: &mut Cursor, expected_total: usize) -> Result<Vec<u32>> {
    let run_count = cur.u32()? as usize;
    let mut values = Vec::with_capacity(expected_total);
    for _ in 0..run_count {
        let len = cur.u32()? as usize;
        let v = cur.u32()?;
        if values.len() + len > expected_total {
            return Err(Error::CorruptStream("run-length data overflows grid".into()));
        }
        values.resize(values.len() + len, v);
    }
    if values.len() != expected_total {
        return Err(Error::CorruptStream(format!(
            "run-length data covers {} of {expected_total} pixels",
            values.len()
        )));
    }
    Ok(values)
}

/// Parses a container, validating structure and checksum.
pub fn deserialize(data: &[u8]) -> Result<EncodedImage> {
    let mut cur = Cursor { data, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = cur.u8()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let mode = match cur.u8()? {
        0 => PathMode::Easy,
        1 => PathMode::Grad,
        2 => PathMode::Epwt,
        m => return Err(Error::CorruptStream(format!("unknown mode byte {m}"))),
    };
    let bank = match cur.u8()? {
        0 => BankKind::Haar,
        1 => BankKind::Cdf97,
        b => return Err(Error::CorruptStream(format!("unknown bank byte {b}"))),
    };
    let flags = cur.u8()?;
    if flags & !(FLAG_SUPPORT | FLAG_CHEBYSHEV) != 0 {
        return Err(Error::CorruptStream(format!("unknown flags {flags:#04x}")));
    }
    let metric = if flags & FLAG_CHEBYSHEV != 0 {
        Metric::Chebyshev
    } else {
        Metric::Euclidean
    };
    let width = cur.u16()? as usize;
    let height = cur.u16()? as usize;
    if width == 0 || height == 0 {
        return Err(Error::CorruptStream("zero image dimension".into()));
    }
    let levels = cur.u8()? as usize;
    let region_count = cur.u32()?;
    let labels = read_rle(&mut cur, width * height)?;
    let labelmap = LabelMap::new(width, height, labels)
        .map_err(|e| Error::CorruptStream(format!("label map: {e}")))?;
    if labelmap.region_count() != region_count {
        return Err(Error::CorruptStream(format!(
            "declared {region_count} regions, label map has {}",
            labelmap.region_count()
        )));
    }
    let support = if flags & FLAG_SUPPORT != 0 {
        let mask = read_rle(&mut cur, width * height)?;
        if mask.iter().any(|&v| v > 1) {
            return Err(Error::CorruptStream("support mask values must be 0/1".into()));
        }
        let points: Vec<Coord> = mask
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v == 1)
            .map(|(i, _)| Coord::new(i / width, i % width))
            .collect();
        if points.is_empty() {
            return Err(Error::CorruptStream("empty support mask".into()));
        }
        Some(PointSet::new(points))
    } else {
        None
    };
    let n_points = support.as_ref().map_or(width * height, |s| s.len());
    if levels == 0 || levels >= usize::BITS as usize || (1usize << levels) > n_points {
        return Err(Error::CorruptStream(format!(
            "{levels} levels do not fit {n_points} points"
        )));
    }
    let sizes = level_sizes(n_points, levels);

    let gradients = if mode == PathMode::Grad {
        let mut gs = Vec::with_capacity(region_count as usize);
        for _ in 0..region_count {
            let gx = cur.f64()?;
            let gy = cur.f64()?;
            if !gx.is_finite() || !gy.is_finite() {
                return Err(Error::CorruptStream("non-finite gradient".into()));
            }
            gs.push(RegionGradient { gx, gy });
        }
        Some(gs)
    } else {
        None
    };

    let stored_perms = if mode == PathMode::Epwt {
        let mut perms = Vec::with_capacity(levels);
        for (i, &expected) in sizes.iter().enumerate() {
            let n = cur.u32()? as usize;
            if n != expected {
                return Err(Error::CorruptStream(format!(
                    "level {i} permutation has {n} entries, expected {expected}"
                )));
            }
            let mut perm = Vec::with_capacity(n);
            let mut seen = vec![false; n];
            for _ in 0..n {
                let p = cur.u32()? as usize;
                if p >= n || seen[p] {
                    return Err(Error::CorruptStream(
                        "stored permutation is not a bijection".into(),
                    ));
                }
                seen[p] = true;
                perm.push(p as u32);
            }
            perms.push(perm);
        }
        Some(perms)
    } else {
        None
    };

    let n_approx = cur.u32()? as usize;
    let want_approx = sizes[levels - 1].div_ceil(2);
    if n_approx != want_approx {
        return Err(Error::CorruptStream(format!(
            "approximation vector has {n_approx} entries, expected {want_approx}"
        )));
    }
    let mut approx_lowest = Vec::with_capacity(n_approx);
    for _ in 0..n_approx {
        approx_lowest.push(cur.f64()?);
    }
    let mut details = Vec::with_capacity(levels);
    for j in 0..levels {
        let n = cur.u32()? as usize;
        let want = sizes[levels - 1 - j] / 2;
        if n != want {
            return Err(Error::CorruptStream(format!(
                "detail vector {j} has {n} entries, expected {want}"
            )));
        }
        let mut d = Vec::with_capacity(n);
        for _ in 0..n {
            d.push(cur.f64()?);
        }
        details.push(d);
    }

    let body_end = cur.pos;
    let stored = cur.u32()?;
    if cur.pos != data.len() {
        return Err(Error::CorruptStream(format!(
            "{} trailing bytes after checksum",
            data.len() - cur.pos
        )));
    }
    let computed = crc32(&data[..body_end]);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    Ok(EncodedImage {
        mode,
        metric,
        bank,
        levels,
        width,
        height,
        labelmap,
        support,
        gradients,
        approx_lowest,
        details,
        stored_perms,
    })
}
