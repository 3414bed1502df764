//! Deterministic test images: a quadrant cartoon and a textured scene.

use crate::image::GrayImage;

/// Four constant quadrants with distinct gray levels, the classic
/// cartoon test pattern. `n` must be even.
pub fn quadrant_cartoon(n: usize) -> GrayImage {
    assert!(n >= 2 && n % 2 == 0, "cartoon size must be even");
    let half = n / 2;
    GrayImage::from_fn(n, n, |r, c| match (r < half, c < half) {
        (true, true) => 0.0,
        (true, false) => 80.0,
        (false, true) => 160.0,
        (false, false) => 240.0,
    })
}

/// A smooth pseudo-natural scene: low-frequency waves, a bright disc and
/// a dark rectangle, plus faint deterministic grain. Values stay in
/// [0, 255].
pub fn textured_scene(width: usize, height: usize) -> GrayImage {
    let fw = width as f64;
    let fh = height as f64;
    GrayImage::from_fn(width, height, |r, c| {
        let x = c as f64 / fw;
        let y = r as f64 / fh;
        let mut v = 128.0
            + 55.0 * (2.0 * std::f64::consts::PI * (1.7 * x + 0.6 * y)).sin()
            + 25.0 * (2.0 * std::f64::consts::PI * (0.4 * x - 2.3 * y)).cos();
        let dx = x - 0.68;
        let dy = y - 0.3;
        if dx * dx + dy * dy < 0.04 {
            v += 60.0;
        }
        if (0.15..0.4).contains(&x) && (0.55..0.85).contains(&y) {
            v -= 70.0;
        }
        let grain = {
            let h = (r as u64)
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(c as u64)
                .wrapping_mul(0xbf58476d1ce4e5b9);
            ((h >> 40) % 9) as f64 - 4.0
        };
        (v + grain).clamp(0.0, 255.0)
    })
}
