//! Edge extraction and red/green alignment overlays.
//!
//! Registration results are easiest to judge visually: draw the reference
//! image's edges in red and the resampled floating image's edges in green
//! over a dimmed grayscale base. Where the two agree the additive mix turns
//! yellow; misalignment shows as separated red/green contours.
//!
//! The detector is a classic Canny pipeline: Gaussian smoothing (sigma 1),
//! Sobel gradients, non-maximum suppression along the gradient direction,
//! and hysteresis with thresholds taken at the 70th and 90th percentiles of
//! the nonzero gradient magnitudes.

use std::path::Path;

use crate::img::Image;
use crate::io;
use crate::transform::RigidTransform;
use crate::Result;

/// Smoothing applied before gradient estimation.
const CANNY_SIGMA: f64 = 1.0;
/// Hysteresis thresholds as percentiles of the nonzero gradient magnitudes.
const LOW_PERCENTILE: f64 = 70.0;
const HIGH_PERCENTILE: f64 = 90.0;

/// A binary edge mask with image dimensions.
#[derive(Debug, Clone)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl EdgeMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&e| e).count()
    }

    /// Coordinates of all edge pixels.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .map(move |(i, _)| (i % w, i / w))
    }
}

/// Separable Gaussian blur with edge-clamped sampling.
fn gaussian_blur(img: &Image, sigma: f64) -> Image {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for i in -radius..=radius {
        kernel.push((-(i as f64).powi(2) / (2.0 * sigma * sigma)).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }
    let (w, h) = (img.width(), img.height());
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
    let horizontal = Image::from_fn(w, h, |x, y| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * img.get(clamp(x as isize + i as isize - radius, w), y))
            .sum()
    });
    Image::from_fn(w, h, |x, y| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * horizontal.get(x, clamp(y as isize + i as isize - radius, h)))
            .sum()
    })
}

/// Nearest-rank percentile of an unsorted sample.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((p / 100.0) * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Canny edge detector. A blank (constant) image yields no edges.
pub fn canny(img: &Image) -> EdgeMap {
    let (w, h) = (img.width(), img.height());
    let empty = EdgeMap {
        width: w,
        height: h,
        mask: vec![false; w * h],
    };
    if w < 3 || h < 3 {
        return empty;
    }

    let smooth = gaussian_blur(img, CANNY_SIGMA);
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: usize, dy: usize| smooth.get(x + dx - 1, y + dy - 1);
            let sx = (p(2, 0) + 2.0 * p(2, 1) + p(2, 2)) - (p(0, 0) + 2.0 * p(0, 1) + p(0, 2));
            let sy = (p(0, 2) + 2.0 * p(1, 2) + p(2, 2)) - (p(0, 0) + 2.0 * p(1, 0) + p(2, 0));
            gx[y * w + x] = sx;
            gy[y * w + x] = sy;
            mag[y * w + x] = sx.hypot(sy);
        }
    }

    let mut nonzero: Vec<f64> = mag.iter().copied().filter(|&m| m > 0.0).collect();
    if nonzero.is_empty() {
        return empty;
    }
    nonzero.sort_by(f64::total_cmp);
    let low = percentile(&nonzero, LOW_PERCENTILE);
    let high = percentile(&nonzero, HIGH_PERCENTILE);

    // Non-maximum suppression: keep pixels whose magnitude is positive and
    // not exceeded by either neighbor along the gradient direction.
    let mut thin = vec![false; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let angle = gy[i].atan2(gx[i]).to_degrees().rem_euclid(180.0);
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (1, -1)
            };
            let fwd = mag[((y as isize + dy) as usize) * w + (x as isize + dx) as usize];
            let bwd = mag[((y as isize - dy) as usize) * w + (x as isize - dx) as usize];
            thin[i] = m >= fwd && m >= bwd;
        }
    }

    // Hysteresis: grow from strong pixels through weak ones (8-connected).
    let mut mask = vec![false; w * h];
    let mut stack = Vec::new();
    for i in 0..w * h {
        if thin[i] && mag[i] >= high && !mask[i] {
            mask[i] = true;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (jx, jy) = (j % w, j / w);
                for ny in jy.saturating_sub(1)..=(jy + 1).min(h - 1) {
                    for nx in jx.saturating_sub(1)..=(jx + 1).min(w - 1) {
                        let k = ny * w + nx;
                        if !mask[k] && thin[k] && mag[k] >= low {
                            mask[k] = true;
                            stack.push(k);
                        }
                    }
                }
            }
        }
    }
    EdgeMap {
        width: w,
        height: h,
        mask,
    }
}

/// An interleaved 8-bit RGB raster.
#[derive(Debug, Clone)]
pub struct RgbRaster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbRaster {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        io::write_png_rgb(path, self.width, self.height, &self.data)
    }
}

/// Resample the floating image onto the reference grid through `t`.
/// Coordinates are clamped into the image, extending border values, so that
/// out-of-overlap regions do not fabricate a step edge of their own (which
/// would both litter the overlay and skew the percentile thresholds).
pub fn resample(reference_dims: (usize, usize), floating: &Image, t: RigidTransform) -> Image {
    let (w, h) = reference_dims;
    let center = RigidTransform::image_center(w, h);
    Image::from_fn(w, h, |x, y| {
        let [px, py] = t.apply([x as f64, y as f64], center);
        sample_clamped(floating, px, py)
    })
}

fn sample_clamped(img: &Image, x: f64, y: f64) -> f64 {
    let (w, h) = (img.width(), img.height());
    let cx = x.clamp(0.0, (w - 1) as f64);
    let cy = y.clamp(0.0, (h - 1) as f64);
    if w < 2 || h < 2 {
        return img.get(cx.round() as usize, cy.round() as usize);
    }
    let x0 = (cx.floor() as usize).min(w - 2);
    let y0 = (cy.floor() as usize).min(h - 2);
    let fx = cx - x0 as f64;
    let fy = cy - y0 as f64;
    img.get(x0, y0) * (1.0 - fx) * (1.0 - fy)
        + img.get(x0 + 1, y0) * fx * (1.0 - fy)
        + img.get(x0, y0 + 1) * (1.0 - fx) * fy
        + img.get(x0 + 1, y0 + 1) * fx * fy
}

/// Compose the alignment overlay: reference edges in red, resampled floating
/// edges in green, over the dimmed reference as a grayscale base. Where both
/// edge sets agree the additive mix reads yellow.
pub fn export_overlay(reference: &Image, floating: &Image, t: RigidTransform) -> RgbRaster {
    let (w, h) = (reference.width(), reference.height());
    let resampled = resample((w, h), floating, t);
    let ref_edges = canny(reference);
    let flt_edges = canny(&resampled);
    let mut data = Vec::with_capacity(3 * w * h);
    for y in 0..h {
        for x in 0..w {
            let base = io::to_u8(0.5 * reference.get(x, y));
            let r = if ref_edges.is_edge(x, y) { 255 } else { base };
            let g = if flt_edges.is_edge(x, y) { 255 } else { base };
            data.extend_from_slice(&[r, g, base]);
        }
    }
    RgbRaster {
        width: w,
        height: h,
        data,
    }
}

/// Fraction of reference edge pixels that have a floating edge pixel within
/// a 1-px chebyshev neighborhood; 1.0 when the reference has no edges.
/// Higher means better visual alignment.
pub fn edge_agreement(reference: &Image, floating: &Image, t: RigidTransform) -> f64 {
    let (w, h) = (reference.width(), reference.height());
    let resampled = resample((w, h), floating, t);
    let ref_edges = canny(reference);
    let flt_edges = canny(&resampled);
    let mut total = 0usize;
    let mut hit = 0usize;
    for (x, y) in ref_edges.pixels() {
        total += 1;
        let mut near = false;
        for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
            for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                near |= flt_edges.is_edge(nx, ny);
            }
        }
        hit += near as usize;
    }
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_case, SyntheticCase};

    fn step_image(w: usize, h: usize, at: usize) -> Image {
        Image::from_fn(w, h, |x, _| if x < at { 0.2 } else { 0.8 })
    }

    #[test]
    fn blank_image_has_no_edges() {
        let img = Image::from_fn(32, 32, |_, _| 0.5);
        assert_eq!(canny(&img).count(), 0);
    }

    #[test]
    fn step_edge_detected_as_a_vertical_line() {
        let img = step_image(64, 64, 32);
        let edges = canny(&img);
        assert!(edges.count() >= 40, "found {} edge pixels", edges.count());
        for (x, _) in edges.pixels() {
            assert!(
                (29..=34).contains(&x),
                "edge pixel at x={x}, expected near the step at 32"
            );
        }
    }

    #[test]
    fn gaussian_blur_preserves_mean_of_constant() {
        let img = Image::from_fn(20, 20, |_, _| 0.7);
        let blurred = gaussian_blur(&img, 1.0);
        for &v in blurred.data() {
            assert!((v - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_images_overlay_all_yellow() {
        let img = Image::from_fn(48, 48, |x, y| {
            0.5 + 0.3 * ((x as f64 / 5.0).sin() * (y as f64 / 7.0).cos())
        });
        let overlay = export_overlay(&img, &img, RigidTransform::identity());
        let edges = canny(&img);
        assert!(edges.count() > 0);
        for (x, y) in edges.pixels() {
            assert_eq!(overlay.pixel(x, y)[0], 255, "red at ({x},{y})");
            assert_eq!(overlay.pixel(x, y)[1], 255, "green at ({x},{y})");
        }
        // No stray green anywhere red is absent.
        for y in 0..48 {
            for x in 0..48 {
                let p = overlay.pixel(x, y);
                assert_eq!(p[0], p[1], "channels must agree at ({x},{y})");
            }
        }
    }

    #[test]
    fn translation_shifts_green_edges() {
        let img = step_image(64, 64, 32);
        // Floating shows the step 5 px further right; the aligning transform
        // is tx = -5, so resampling at identity leaves a 5-px offset.
        let flt = step_image(64, 64, 37);
        let overlay = export_overlay(&img, &flt, RigidTransform::identity());
        let mut red_x = Vec::new();
        let mut green_x = Vec::new();
        for y in 10..54 {
            for x in 0..64 {
                let p = overlay.pixel(x, y);
                if p[0] == 255 && p[1] != 255 {
                    red_x.push(x as f64);
                }
                if p[1] == 255 && p[0] != 255 {
                    green_x.push(x as f64);
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(!red_x.is_empty() && !green_x.is_empty());
        assert!(
            (mean(&green_x) - mean(&red_x) - 5.0).abs() < 1.0,
            "green at {:.2}, red at {:.2}",
            mean(&green_x),
            mean(&red_x)
        );
    }

    #[test]
    fn agreement_is_higher_at_truth_than_misregistered() {
        let spec = SyntheticCase {
            id: "overlay".into(),
            width: 96,
            height: 96,
            seed: 21,
            truth: crate::transform::RigidTransform::new(4.0, -3.0, 2.0),
            noise_sigma: 0.0,
            outlier: None,
            illumination: None,
        };
        let (reference, floating, truth) = generate_case(&spec).unwrap();
        let at_truth = edge_agreement(&reference, &floating, truth);
        let off = RigidTransform::new(truth.tx + 5.0, truth.ty, truth.beta);
        let misregistered = edge_agreement(&reference, &floating, off);
        assert!(
            at_truth > misregistered,
            "agreement {at_truth:.3} at truth vs {misregistered:.3} off by 5 px"
        );
        assert!(at_truth > 0.8, "agreement at truth only {at_truth:.3}");
    }
}
