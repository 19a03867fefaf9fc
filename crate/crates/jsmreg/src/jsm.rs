//! The joint saliency map (JSM): a per-pixel weight on the reference grid
//! measuring how well the two images' structure directions agree at the
//! current alignment.
//!
//! Where both images show the same edge, the RSVs are parallel and the
//! weight approaches 1; where one image contains structure the other lacks
//! (an outlier region), the directions are uncorrelated and the weight
//! collapses toward 0. Weighting the joint histogram by this map is what
//! makes the registration robust to such regions.

use crate::img::in_bilinear_domain;
use crate::saliency::RsvField;
use crate::transform::RigidTransform;

/// How to map the cosine between two RSVs to a weight in [0, 1].
///
/// Eigenvectors carry an arbitrary sign, so a raw cosine can be negative on
/// perfectly aligned structure. `Abs` (the default) folds the sign away;
/// `Clamp` zeroes negative cosines instead, treating them as disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CosinePolicy {
    #[default]
    Abs,
    Clamp,
}

impl CosinePolicy {
    #[inline]
    fn weight(self, dot: f64) -> f64 {
        // Unit-vector dot products can land an ulp past 1 in magnitude.
        match self {
            CosinePolicy::Abs => dot.abs().min(1.0),
            CosinePolicy::Clamp => dot.clamp(0.0, 1.0),
        }
    }
}

/// Per-pixel structure-agreement weights on the reference grid, plus the
/// geometric overlap mask and the transform the map was computed for.
#[derive(Debug, Clone)]
pub struct JointSaliencyMap {
    width: usize,
    height: usize,
    flt_width: usize,
    flt_height: usize,
    weights: Vec<f64>,
    mask: Vec<bool>,
    transform: RigidTransform,
}

impl JointSaliencyMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.weights[y * self.width + x]
    }

    /// True where the reference pixel lands inside the floating image under
    /// the map's transform (weights are zero outside).
    #[inline]
    pub fn in_overlap(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Transform this map was computed (or last updated) for.
    pub fn transform(&self) -> RigidTransform {
        self.transform
    }

    pub fn sum_weights(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn overlap_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Build the JSM for transform `t` (reference coordinates into the floating
/// image). A reference pixel gets a nonzero weight only when it lands inside
/// the floating image, its own RSV is valid, and the RSV at the nearest
/// floating grid pixel is valid; the weight is then the (policy-folded)
/// cosine between the two unit vectors.
pub fn compute_jsm(
    ref_rsv: &RsvField,
    flt_rsv: &RsvField,
    t: &RigidTransform,
    policy: CosinePolicy,
) -> JointSaliencyMap {
    let (w, h) = (ref_rsv.width(), ref_rsv.height());
    let (fw, fh) = (flt_rsv.width(), flt_rsv.height());
    let center = RigidTransform::image_center(w, h);
    let mut weights = vec![0.0; w * h];
    let mut mask = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let [px, py] = t.apply([x as f64, y as f64], center);
            if !in_bilinear_domain(px, py, fw, fh) {
                continue;
            }
            let i = y * w + x;
            mask[i] = true;
            let Some(a) = ref_rsv.get(x, y) else { continue };
            // Nearest floating grid pixel; vectors are not interpolated
            // because a blend of unit vectors is no longer a direction.
            let (nx, ny) = (px.round() as usize, py.round() as usize);
            let Some(b) = flt_rsv.get(nx, ny) else { continue };
            weights[i] = policy.weight(a[0] * b[0] + a[1] * b[1]);
        }
    }
    JointSaliencyMap {
        width: w,
        height: h,
        flt_width: fw,
        flt_height: fh,
        weights,
        mask,
        transform: *t,
    }
}

/// Cheap between-recomputes update: resample the previous map through the
/// incremental motion instead of re-correlating RSVs.
///
/// The weight at reference pixel `v` under `t_new` concerns the floating
/// location `t_new(v)`; the previous map held that floating location's
/// agreement at pixel `t_prev⁻¹(t_new(v))`. Sampling there (bilinear,
/// zero outside the grid) approximates the new map well for small motion and
/// is exact for whole-pixel translations. The overlap mask is recomputed
/// geometrically for `t_new`, and weights are clamped to [0, 1].
pub fn update_jsm(prev: &JointSaliencyMap, t_new: &RigidTransform) -> JointSaliencyMap {
    let (w, h) = (prev.width, prev.height);
    let center = RigidTransform::image_center(w, h);
    let t_prev_inv = prev.transform.inverse();
    let mut weights = vec![0.0; w * h];
    let mut mask = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let [px, py] = t_new.apply([x as f64, y as f64], center);
            if !in_bilinear_domain(px, py, prev.flt_width, prev.flt_height) {
                continue;
            }
            let i = y * w + x;
            mask[i] = true;
            let [qx, qy] = t_prev_inv.apply([px, py], center);
            weights[i] = sample_zero_padded(&prev.weights, w, h, qx, qy).clamp(0.0, 1.0);
        }
    }
    JointSaliencyMap {
        width: w,
        height: h,
        flt_width: prev.flt_width,
        flt_height: prev.flt_height,
        weights,
        mask,
        transform: *t_new,
    }
}

/// Bilinear sample of a scalar grid with values outside the grid taken as 0.
fn sample_zero_padded(values: &[f64], w: usize, h: usize, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let mut acc = 0.0;
    for (dy, wy) in [(0i64, 1.0 - fy), (1, fy)] {
        for (dx, wx) in [(0i64, 1.0 - fx), (1, fx)] {
            let cx = x0 as i64 + dx;
            let cy = y0 as i64 + dy;
            if cx < 0 || cy < 0 || cx >= w as i64 || cy >= h as i64 {
                continue;
            }
            acc += wx * wy * values[cy as usize * w + cx as usize];
        }
    }
    acc
}
