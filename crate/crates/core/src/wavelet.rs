//! Periodic two-channel filter banks (Haar, CDF 9/7), one-level analysis
//! and synthesis along a path, and the separable 2-D tensor baseline.
//!
//! Conventions: analysis computes `a(k) = sum_m taps[m] * s(2k + offset + m)`
//! with periodic indexing, synthesis scatters `a(k) * taps[j]` back to
//! `2k + offset + j`. Both banks carry a DC gain of sqrt(2) on the
//! low-pass side so coefficient magnitudes are comparable when
//! thresholding across banks.
//!
//! Odd signal lengths use a holdout rule: the final sample bypasses the
//! filter bank and rides along unchanged at the end of the approximation
//! vector, keeping the coefficient count equal to the sample count.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Which filter bank to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankKind {
    Haar,
    Cdf97,
}

impl BankKind {
    pub fn name(self) -> &'static str {
        match self {
            BankKind::Haar => "haar",
            BankKind::Cdf97 => "cdf97",
        }
    }
}

impl std::fmt::Display for BankKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// FIR filter taps with the signal offset of the first tap.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub offset: isize,
    pub taps: Vec<f64>,
}

/// A two-channel analysis/synthesis filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub kind: BankKind,
    pub analysis_low: Filter,
    pub analysis_high: Filter,
    pub synthesis_low: Filter,
    pub synthesis_high: Filter,
}

const SQRT1_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

// CDF 9/7 taps at sqrt(2) DC gain, computed from the factorization of the
// half-band polynomial 1 + 4y + 10y^2 + 20y^3 (real root to the 7-tap
// side, quadratic to the 9-tap side). The high-pass channel is centered
// on odd samples, hence its offsets.
const CDF97_ANALYSIS_LOW: [f64; 9] = [
    0.03782845550699546,
    -0.02384946501938,
    -0.1106244044184234,
    0.37740285561265374,
    0.8526986790094034,
    0.37740285561265374,
    -0.1106244044184234,
    -0.02384946501938,
    0.03782845550699546,
];
const CDF97_ANALYSIS_HIGH: [f64; 7] = [
    0.06453888262893843,
    -0.04068941760955844,
    -0.4180922732222122,
    0.7884856164056644,
    -0.4180922732222122,
    -0.04068941760955844,
    0.06453888262893843,
];
const CDF97_SYNTHESIS_LOW: [f64; 7] = [
    -0.06453888262893843,
    -0.04068941760955844,
    0.4180922732222122,
    0.7884856164056644,
    0.4180922732222122,
    -0.04068941760955844,
    -0.06453888262893843,
];
const CDF97_SYNTHESIS_HIGH: [f64; 9] = [
    0.03782845550699546,
    0.02384946501938,
    -0.1106244044184234,
    -0.37740285561265374,
    0.8526986790094034,
    -0.37740285561265374,
    -0.1106244044184234,
    0.02384946501938,
    0.03782845550699546,
];

impl FilterBank {
    pub fn get(kind: BankKind) -> FilterBank {
        match kind {
            BankKind::Haar => FilterBank::haar(),
            BankKind::Cdf97 => FilterBank::cdf97(),
        }
    }

    /// Orthonormal Haar bank.
    pub fn haar() -> FilterBank {
        let f = |taps: Vec<f64>| Filter { offset: 0, taps };
        FilterBank {
            kind: BankKind::Haar,
            analysis_low: f(vec![SQRT1_2, SQRT1_2]),
            analysis_high: f(vec![SQRT1_2, -SQRT1_2]),
            synthesis_low: f(vec![SQRT1_2, SQRT1_2]),
            synthesis_high: f(vec![SQRT1_2, -SQRT1_2]),
        }
    }

    /// Biorthogonal Cohen-Daubechies-Feauveau 9/7 bank. The first call
    /// runs the numeric self-check so a tap transcription error can
    /// never produce silently broken streams.
    pub fn cdf97() -> FilterBank {
        let bank = FilterBank {
            kind: BankKind::Cdf97,
            analysis_low: Filter {
                offset: -4,
                taps: CDF97_ANALYSIS_LOW.to_vec(),
            },
            analysis_high: Filter {
                offset: -2,
                taps: CDF97_ANALYSIS_HIGH.to_vec(),
            },
            synthesis_low: Filter {
                offset: -3,
                taps: CDF97_SYNTHESIS_LOW.to_vec(),
            },
            synthesis_high: Filter {
                offset: -3,
                taps: CDF97_SYNTHESIS_HIGH.to_vec(),
            },
        };
        static CHECKED: std::sync::OnceLock<bool> = std::sync::OnceLock::new();
        let ok = *CHECKED.get_or_init(|| bank.self_check());
        assert!(ok, "cdf97 bank failed its reconstruction self-check");
        bank
    }

    /// Numeric guard against tap transcription errors: the bank must
    /// reconstruct random periodic signals to within 1e-10.
    pub fn self_check(&self) -> bool {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 510.0 - 255.0
        };
        for trial in 0..200 {
            let n = 2 * (trial % 31 + 1);
            let signal: Vec<f64> = (0..n).map(|_| next()).collect();
            let cp = dwt_periodic(&signal, self).expect("even length");
            let back = idwt_periodic(&cp, self, n).expect("consistent lengths");
            for (a, b) in signal.iter().zip(&back) {
                if (a - b).abs() > 1e-10 {
                    return false;
                }
            }
        }
        true
    }
}

/// Approximation and detail coefficients of one analysis level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPair {
    pub approx: Vec<f64>,
    pub detail: Vec<f64>,
}

fn analyze_even(signal: &[f64], filter: &Filter) -> Vec<f64> {
    let n = signal.len() as isize;
    (0..n / 2)
        .map(|k| {
            filter
                .taps
                .iter()
                .enumerate()
                .map(|(m, &t)| {
                    let idx = (2 * k + filter.offset + m as isize).rem_euclid(n);
                    t * signal[idx as usize]
                })
                .sum()
        })
        .collect()
}

/// One level of the periodic discrete wavelet transform. Odd lengths
/// hold the final sample out of the filter bank.
pub fn dwt_periodic(signal: &[f64], fb: &FilterBank) -> Result<CoeffPair> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::SignalTooShort(n));
    }
    if n % 2 == 0 {
        Ok(CoeffPair {
            approx: analyze_even(signal, &fb.analysis_low),
            detail: analyze_even(signal, &fb.analysis_high),
        })
    } else {
        let body = &signal[..n - 1];
        let mut approx = analyze_even(body, &fb.analysis_low);
        approx.push(signal[n - 1]);
        Ok(CoeffPair {
            approx,
            detail: analyze_even(body, &fb.analysis_high),
        })
    }
}

fn synthesize_even(approx: &[f64], detail: &[f64], fb: &FilterBank, n: usize) -> Vec<f64> {
    let ni = n as isize;
    let mut out = vec![0.0f64; n];
    for (k, &a) in approx.iter().enumerate() {
        for (j, &t) in fb.synthesis_low.taps.iter().enumerate() {
            let idx = (2 * k as isize + fb.synthesis_low.offset + j as isize).rem_euclid(ni);
            out[idx as usize] += a * t;
        }
    }
    for (k, &d) in detail.iter().enumerate() {
        for (j, &t) in fb.synthesis_high.taps.iter().enumerate() {
            let idx = (2 * k as isize + fb.synthesis_high.offset + j as isize).rem_euclid(ni);
            out[idx as usize] += d * t;
        }
    }
    out
}

/// Inverse of [`dwt_periodic`] for a signal of original length `n`.
pub fn idwt_periodic(cp: &CoeffPair, fb: &FilterBank, n: usize) -> Result<Vec<f64>> {
    let mismatch = Err(Error::CoeffLengthMismatch {
        approx: cp.approx.len(),
        detail: cp.detail.len(),
        signal: n,
    });
    if n % 2 == 0 {
        if cp.approx.len() != n / 2 || cp.detail.len() != n / 2 {
            return mismatch;
        }
        Ok(synthesize_even(&cp.approx, &cp.detail, fb, n))
    } else {
        if cp.approx.len() != n / 2 + 1 || cp.detail.len() != n / 2 {
            return mismatch;
        }
        let holdout = *cp.approx.last().expect("odd length implies n >= 1");
        let mut out = synthesize_even(&cp.approx[..n / 2], &cp.detail, fb, n - 1);
        out.push(holdout);
        Ok(out)
    }
}

/// Coefficients of the separable 2-D tensor transform, stored in the
/// usual in-place subband layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorCoeffs {
    pub size: usize,
    pub levels: usize,
    pub data: Vec<f64>,
}

fn check_square_pow2(img_w: usize, img_h: usize, levels: usize) -> Result<usize> {
    if img_w != img_h || !img_w.is_power_of_two() {
        return Err(Error::NonPowerOfTwo {
            width: img_w,
            height: img_h,
        });
    }
    let max = img_w.trailing_zeros() as usize;
    if levels == 0 || levels > max {
        return Err(Error::TooManyTensorLevels {
            requested: levels,
            max,
        });
    }
    Ok(img_w)
}

/// Standard Mallat decomposition with periodic boundary.
pub fn tensor_dwt2(img: &GrayImage, fb: &FilterBank, levels: usize) -> Result<TensorCoeffs> {
    let size = check_square_pow2(img.width(), img.height(), levels)?;
    let mut data = img.pixels().to_vec();
    let mut n = size;
    for _ in 0..levels {
        // Rows of the active block.
        for row in 0..n {
            let line: Vec<f64> = (0..n).map(|c| data[row * size + c]).collect();
            let cp = dwt_periodic(&line, fb)?;
            for (i, &v) in cp.approx.iter().enumerate() {
                data[row * size + i] = v;
            }
            for (i, &v) in cp.detail.iter().enumerate() {
                data[row * size + n / 2 + i] = v;
            }
        }
        // Columns of the active block.
        for col in 0..n {
            let line: Vec<f64> = (0..n).map(|r| data[r * size + col]).collect();
            let cp = dwt_periodic(&line, fb)?;
            for (i, &v) in cp.approx.iter().enumerate() {
                data[i * size + col] = v;
            }
            for (i, &v) in cp.detail.iter().enumerate() {
                data[(n / 2 + i) * size + col] = v;
            }
        }
        n /= 2;
    }
    Ok(TensorCoeffs {
        size,
        levels,
        data,
    })
}

/// Inverse of [`tensor_dwt2`].
pub fn tensor_idwt2(tc: &TensorCoeffs, fb: &FilterBank) -> Result<GrayImage> {
    let size = tc.size;
    let mut data = tc.data.clone();
    let mut n = size >> (tc.levels - 1);
    for _ in 0..tc.levels {
        for col in 0..n {
            let approx: Vec<f64> = (0..n / 2).map(|r| data[r * size + col]).collect();
            let detail: Vec<f64> = (0..n / 2).map(|r| data[(n / 2 + r) * size + col]).collect();
            let line = idwt_periodic(
                &CoeffPair { approx, detail },
                fb,
                n,
            )?;
            for (r, &v) in line.iter().enumerate() {
                data[r * size + col] = v;
            }
        }
        for row in 0..n {
            let approx: Vec<f64> = (0..n / 2).map(|c| data[row * size + c]).collect();
            let detail: Vec<f64> = (0..n / 2).map(|c| data[row * size + n / 2 + c]).collect();
            let line = idwt_periodic(
                &CoeffPair { approx, detail },
                fb,
                n,
            )?;
            for (c, &v) in line.iter().enumerate() {
                data[row * size + c] = v;
            }
        }
        n *= 2;
    }
    Ok(GrayImage::new(size, size, data))
}
