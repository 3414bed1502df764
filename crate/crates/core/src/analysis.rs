//! Global n-largest thresholding, quality metrics and basis-element
//! extraction.

use crate::codec::{decode, CoeffId, EncodedImage};
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Zeroes all but the `n` largest-magnitude coefficients. Ties at the
/// cut are resolved by the canonical coefficient order.
pub fn keep_n_largest(enc: &EncodedImage, n: usize) -> Result<EncodedImage> {
    let total = enc.coeff_count();
    if n > total {
        return Err(Error::KeepCountTooLarge {
            requested: n,
            available: total,
        });
    }
    let mut ranked: Vec<(CoeffId, f64)> = enc
        .coeff_ids()
        .map(|id| (id, enc.coeff(id).expect("enumerated id")))
        .collect();
    ranked.sort_by(|(ia, va), (ib, vb)| {
        vb.abs()
            .partial_cmp(&va.abs())
            .expect("finite coefficients")
            .then_with(|| ia.cmp(ib))
    });
    let mut out = enc.clone();
    for &(id, _) in &ranked[n..] {
        out.set_coeff(id, 0.0);
    }
    Ok(out)
}

/// Zeroes all but the `n` largest-magnitude entries of a flat slice,
/// ties resolved by index. Used for the 2-D tensor baseline.
pub fn keep_n_largest_in_slice(values: &mut [f64], n: usize) -> Result<()> {
    if n > values.len() {
        return Err(Error::KeepCountTooLarge {
            requested: n,
            available: values.len(),
        });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .partial_cmp(&values[a].abs())
            .expect("finite values")
            .then_with(|| a.cmp(&b))
    });
    for &i in &order[n..] {
        values[i] = 0.0;
    }
    Ok(())
}

fn diff_norm_sq(f: &GrayImage, g: &GrayImage) -> Result<f64> {
    if f.width() != g.width() || f.height() != g.height() {
        return Err(Error::DimensionMismatch {
            img_width: f.width(),
            img_height: f.height(),
            map_width: g.width(),
            map_height: g.height(),
        });
    }
    Ok(f.pixels()
        .iter()
        .zip(g.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// The base-2 peak signal-to-noise ratio over the unnormalized Euclidean
/// norm of the difference: `20 log2(255 / ||f - g||)`. Identical images
/// give positive infinity.
pub fn psnr_paper(f: &GrayImage, g: &GrayImage) -> Result<f64> {
    let norm = diff_norm_sq(f, g)?.sqrt();
    if norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (255.0 / norm).log2())
}

/// Conventional PSNR in decibels: `10 log10(255^2 / MSE)`.
pub fn psnr_std(f: &GrayImage, g: &GrayImage) -> Result<f64> {
    let mse = diff_norm_sq(f, g)? / f.pixel_count() as f64;
    if mse == 0.0 {
        return Err(Error::IdenticalImages);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Decoded image of the unit vector at `id`: clones the template's
/// metadata, sets that coefficient to one and all others to zero, and
/// decodes. The result is not clamped.
pub fn basis_element(enc_template: &EncodedImage, id: CoeffId) -> Result<GrayImage> {
    if enc_template.coeff(id).is_none() {
        return Err(Error::InvalidCoeffId(id.to_string()));
    }
    let mut unit = enc_template.clone();
    unit.approx_lowest.iter_mut().for_each(|v| *v = 0.0);
    for d in &mut unit.details {
        d.iter_mut().for_each(|v| *v = 0.0);
    }
    unit.set_coeff(id, 1.0);
    decode(&unit)
}
