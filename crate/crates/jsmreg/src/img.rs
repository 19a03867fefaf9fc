//! Grayscale raster images, bilinear sampling, Gaussian pyramids.

use crate::{Error, Result};

/// A 2D grayscale raster. Intensities are stored row-major as `f64`,
/// normally rescaled to `[0, 1]` when loaded from 8-bit files.
///
/// Invariants enforced at construction: non-empty, `data.len() == w * h`,
/// all intensities finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("empty image".into()));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidImage("non-finite intensity".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![0.0; width * height]).expect("non-empty dims")
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data).expect("from_fn produced invalid image")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x] = v;
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Bilinear interpolation at a continuous point. `None` when any of the
    /// four surrounding grid pixels is out of bounds; absent samples must be
    /// excluded from the overlap, never treated as zero.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        if !in_bilinear_domain(x, y, self.width, self.height) {
            return None;
        }
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let xi = x0 as usize;
        let yi = y0 as usize;
        let v00 = self.get(xi, yi);
        let v10 = self.get(xi + 1, yi);
        let v01 = self.get(xi, yi + 1);
        let v11 = self.get(xi + 1, yi + 1);
        Some(
            v00 * (1.0 - fx) * (1.0 - fy)
                + v10 * fx * (1.0 - fy)
                + v01 * (1.0 - fx) * fy
                + v11 * fx * fy,
        )
    }

    /// Bilinear magnification onto a target grid with corner-aligned
    /// coordinate mapping. Rejects targets smaller than the source.
    pub fn upsample_to(&self, target_w: usize, target_h: usize) -> Result<Image> {
        if target_w < self.width || target_h < self.height {
            return Err(Error::InvalidParameter(format!(
                "upsample target {}x{} smaller than source {}x{}",
                target_w, target_h, self.width, self.height
            )));
        }
        let sx = if target_w > 1 {
            (self.width as f64 - 1.0) / (target_w as f64 - 1.0)
        } else {
            0.0
        };
        let sy = if target_h > 1 {
            (self.height as f64 - 1.0) / (target_h as f64 - 1.0)
        } else {
            0.0
        };
        let mut out = Vec::with_capacity(target_w * target_h);
        for j in 0..target_h {
            let y = j as f64 * sy;
            let y0 = (y.floor() as usize).min(self.height.saturating_sub(2));
            let fy = y - y0 as f64;
            let y1 = (y0 + 1).min(self.height - 1);
            for i in 0..target_w {
                let x = i as f64 * sx;
                let x0 = (x.floor() as usize).min(self.width.saturating_sub(2));
                let fx = x - x0 as f64;
                let x1 = (x0 + 1).min(self.width - 1);
                let v = self.get(x0, y0) * (1.0 - fx) * (1.0 - fy)
                    + self.get(x1, y0) * fx * (1.0 - fy)
                    + self.get(x0, y1) * (1.0 - fx) * fy
                    + self.get(x1, y1) * fx * fy;
                out.push(v);
            }
        }
        Image::new(target_w, target_h, out)
    }
}

/// True when `(x, y)` has all four bilinear neighbors inside a `w`x`h` grid,
/// i.e. `0 <= x < w-1 && 0 <= y < h-1`. This predicate defines the overlap
/// domain used by the joint saliency map and both histogram builders.
#[inline]
pub fn in_bilinear_domain(x: f64, y: f64, w: usize, h: usize) -> bool {
    x >= 0.0 && y >= 0.0 && x < (w - 1) as f64 && y < (h - 1) as f64
}

/// Mirror an index into `[0, n)` by reflecting about the border samples
/// (reflect-101: -1 -> 1, n -> n-2).
#[inline]
pub(crate) fn mirror_index(i: isize, n: usize) -> usize {
    debug_assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * n - 2 - i;
        } else {
            return i as usize;
        }
    }
}

/// 5-tap binomial smoothing [1 4 6 4 1]/16, applied separably with mirrored
/// borders.
fn smooth_binomial5(img: &Image) -> Image {
    const K: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let (w, h) = (img.width, img.height);
    // Horizontal pass.
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, coef) in K.iter().enumerate() {
                let xi = mirror_index(x as isize + k as isize - 2, w);
                acc += coef * img.get(xi, y);
            }
            tmp[y * w + x] = acc;
        }
    }
    // Vertical pass.
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, coef) in K.iter().enumerate() {
                let yi = mirror_index(y as isize + k as isize - 2, h);
                acc += coef * tmp[yi * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    Image::new(w, h, out).expect("smoothing preserves dims")
}

/// Keep every other pixel in both dimensions; output dims are `ceil(n/2)`.
fn decimate(img: &Image) -> Image {
    let w = img.width.div_ceil(2);
    let h = img.height.div_ceil(2);
    Image::from_fn(w, h, |x, y| img.get(2 * x, 2 * y))
}

/// Minimum size (per side) the coarsest pyramid level may have.
pub const MIN_PYRAMID_SIDE: usize = 32;

/// Default pyramid depth: coarsest level at least 32 px on the short side,
/// capped at 4 levels.
pub fn default_pyramid_levels(width: usize, height: usize) -> usize {
    let mut levels = 1;
    let (mut w, mut h) = (width, height);
    while levels < 4 {
        let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
        if nw < MIN_PYRAMID_SIDE || nh < MIN_PYRAMID_SIDE {
            break;
        }
        levels += 1;
        w = nw;
        h = nh;
    }
    levels
}

/// Gaussian image pyramid: level 0 is the input, each next level is the
/// binomial-smoothed previous level decimated by 2.
#[derive(Debug, Clone)]
pub struct GaussianPyramid {
    levels: Vec<Image>,
}

impl GaussianPyramid {
    /// Build a pyramid with up to `num_levels` levels. The requested depth
    /// is clamped so the coarsest level stays at least 32x32.
    pub fn build(img: &Image, num_levels: usize) -> Self {
        assert!(num_levels >= 1, "pyramid needs at least one level");
        let mut levels = vec![img.clone()];
        while levels.len() < num_levels {
            let prev = levels.last().unwrap();
            let (nw, nh) = (prev.width.div_ceil(2), prev.height.div_ceil(2));
            if nw < MIN_PYRAMID_SIDE || nh < MIN_PYRAMID_SIDE {
                break;
            }
            levels.push(decimate(&smooth_binomial5(prev)));
        }
        Self { levels }
    }

    pub fn levels(&self) -> &[Image] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, i: usize) -> &Image {
        &self.levels[i]
    }
}
