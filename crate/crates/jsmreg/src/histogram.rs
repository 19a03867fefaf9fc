//! Joint intensity histograms over the overlap of a reference image and a
//! transformed floating image, optionally weighted per pixel by a joint
//! saliency map.
//!
//! The reference grid drives: each reference pixel inside the overlap looks
//! up its own intensity and the floating intensity under the transform, and
//! deposits its weight into the bin pair. Partial-volume (PV) mode splits
//! the deposit over the four floating-grid neighbors by their bilinear
//! coefficients instead of interpolating the intensity first.

use crate::img::{in_bilinear_domain, Image};
use crate::jsm::JointSaliencyMap;
use crate::transform::RigidTransform;
use crate::{Error, Result};

/// How the floating intensity (or its bin mass) is obtained at a non-grid
/// position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Nearest,
    #[default]
    Bilinear,
    Pv,
}

/// Map an intensity in [0, 1] to one of `bins` equal-width bins:
/// `floor(intensity * bins)` clamped into range, so 1.0 joins the top bin.
pub fn quantize(intensity: f64, bins: usize) -> Result<usize> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    if !intensity.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite intensity {intensity}"
        )));
    }
    Ok(quantize_unchecked(intensity, bins))
}

#[inline]
fn quantize_unchecked(intensity: f64, bins: usize) -> usize {
    ((intensity * bins as f64) as usize).min(bins - 1)
}

/// B x B accumulation of per-pixel weights over (reference bin, floating
/// bin) pairs.
#[derive(Debug, Clone)]
pub struct JointHistogram {
    bins: usize,
    counts: Vec<f64>,
    total_mass: f64,
}

impl JointHistogram {
    fn new(bins: usize) -> Self {
        Self {
            bins,
            counts: vec![0.0; bins * bins],
            total_mass: 0.0,
        }
    }

    /// Assemble a histogram from raw bin weights (row-major, reference bin
    /// by floating bin). Entries must be finite and non-negative.
    pub fn from_counts(bins: usize, counts: Vec<f64>) -> Result<Self> {
        if bins < 2 || counts.len() != bins * bins {
            return Err(Error::InvalidParameter(format!(
                "expected {bins}x{bins} counts, got {}",
                counts.len()
            )));
        }
        if counts.iter().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::InvalidParameter(
                "histogram counts must be finite and non-negative".into(),
            ));
        }
        let total_mass = counts.iter().sum();
        Ok(Self {
            bins,
            counts,
            total_mass,
        })
    }

    #[inline]
    fn add(&mut self, r: usize, f: usize, w: f64) {
        self.counts[r * self.bins + f] += w;
        self.total_mass += w;
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Accumulated weight in bin pair (reference bin `r`, floating bin `f`).
    #[inline]
    pub fn get(&self, r: usize, f: usize) -> f64 {
        self.counts[r * self.bins + f]
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// Sum of all deposited weights.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// p(r, f) for every bin pair, normalized to sum to 1.
    pub fn joint_probabilities(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c / self.total_mass).collect()
    }

    /// Reference marginal p(r): row sums of the normalized joint.
    pub fn marginal_ref(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.bins];
        for r in 0..self.bins {
            for f in 0..self.bins {
                p[r] += self.get(r, f);
            }
        }
        for v in &mut p {
            *v /= self.total_mass;
        }
        p
    }

    /// Floating marginal p(f): column sums of the normalized joint.
    pub fn marginal_flt(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.bins];
        for r in 0..self.bins {
            for f in 0..self.bins {
                p[f] += self.get(r, f);
            }
        }
        for v in &mut p {
            *v /= self.total_mass;
        }
        p
    }

    /// Raw counts as CSV, one row per reference bin.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for r in 0..self.bins {
            for f in 0..self.bins {
                if f > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{}", self.get(r, f)));
            }
            out.push('\n');
        }
        out
    }

    /// Log-scaled view of the counts for heatmap export: ln(1 + count),
    /// normalized to [0, 1].
    pub fn log_heatmap(&self) -> Image {
        let logs: Vec<f64> = self.counts.iter().map(|&c| (1.0 + c).ln()).collect();
        crate::io::normalize_values(&logs, self.bins, self.bins)
    }
}

/// Build the JSM-weighted joint histogram for transform `t`. Only reference
/// pixels with a positive weight deposit mass. Zero total mass (no overlap,
/// or the JSM vanishes on it) is an error, not a silent empty histogram.
pub fn build_weighted_histogram(
    reference: &Image,
    floating: &Image,
    t: &RigidTransform,
    jsm: &JointSaliencyMap,
    mode: Interpolation,
    bins: usize,
) -> Result<JointHistogram> {
    accumulate(reference, floating, t, mode, bins, |x, y| jsm.weight(x, y))
}

/// Joint histogram with unit weight on every overlap pixel — the classic
/// unweighted construction used by the baseline measure.
pub fn build_unweighted_histogram(
    reference: &Image,
    floating: &Image,
    t: &RigidTransform,
    mode: Interpolation,
    bins: usize,
) -> Result<JointHistogram> {
    accumulate(reference, floating, t, mode, bins, |_, _| 1.0)
}

fn accumulate(
    reference: &Image,
    floating: &Image,
    t: &RigidTransform,
    mode: Interpolation,
    bins: usize,
    weight_at: impl Fn(usize, usize) -> f64,
) -> Result<JointHistogram> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    let (w, h) = (reference.width(), reference.height());
    let (fw, fh) = (floating.width(), floating.height());
    let center = RigidTransform::image_center(w, h);
    let mut hist = JointHistogram::new(bins);
    for y in 0..h {
        for x in 0..w {
            let weight = weight_at(x, y);
            if weight <= 0.0 {
                continue;
            }
            let [px, py] = t.apply([x as f64, y as f64], center);
            if !in_bilinear_domain(px, py, fw, fh) {
                continue;
            }
            let r = quantize_unchecked(reference.get(x, y), bins);
            match mode {
                Interpolation::Nearest => {
                    let v = floating.get(px.round() as usize, py.round() as usize);
                    hist.add(r, quantize_unchecked(v, bins), weight);
                }
                Interpolation::Bilinear => {
                    // in_bilinear_domain guarantees the sample exists.
                    let v = floating.sample_bilinear(px, py).expect("inside domain");
                    hist.add(r, quantize_unchecked(v, bins), weight);
                }
                Interpolation::Pv => {
                    let x0 = px.floor() as usize;
                    let y0 = py.floor() as usize;
                    let fx = px - x0 as f64;
                    let fy = py - y0 as f64;
                    for (dx, dy, c) in [
                        (0, 0, (1.0 - fx) * (1.0 - fy)),
                        (1, 0, fx * (1.0 - fy)),
                        (0, 1, (1.0 - fx) * fy),
                        (1, 1, fx * fy),
                    ] {
                        let f = quantize_unchecked(floating.get(x0 + dx, y0 + dy), bins);
                        hist.add(r, f, weight * c);
                    }
                }
            }
        }
    }
    if hist.total_mass <= 0.0 {
        return Err(Error::EmptyOverlap);
    }
    Ok(hist)
}
