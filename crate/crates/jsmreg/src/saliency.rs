//! Structure saliency: a multiscale map of local intensity variation, and a
//! per-pixel principal direction (the regional saliency vector, RSV) obtained
//! from the inertia matrix of the saliency mass in a small disc.
//!
//! The RSV points along the dominant axis of nearby structure — along an
//! edge, down a ridge — and is the quantity the joint saliency map compares
//! across the two images. Pixels with weak saliency or isotropic structure
//! carry no vector.

use crate::img::{GaussianPyramid, Image};

/// Squared radius of the disc used for the inertia matrix (radius 5.5 px,
/// 97 pixels including the center).
const DISC_RADIUS_SQ: f64 = 5.5 * 5.5;
const DISC_RADIUS_INT: i64 = 5;

/// Fraction of the maximum saliency below which a pixel is considered
/// structureless and gets no RSV.
pub const DEFAULT_SALIENCY_THRESHOLD: f64 = 0.10;

/// Relative eigenvalue gap below which a 2x2 inertia matrix is treated as
/// isotropic (no principal direction).
const EIGEN_GAP_REL_TOL: f64 = 1e-6;

/// Non-negative per-pixel saliency, same dimensions as the source image.
#[derive(Debug, Clone)]
pub struct SaliencyMap {
    values: Image,
}

impl SaliencyMap {
    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values.get(x, y)
    }

    pub fn data(&self) -> &[f64] {
        self.values.data()
    }

    /// Largest saliency value in the map (0 for a constant image).
    pub fn max(&self) -> f64 {
        self.values.data().iter().cloned().fold(0.0, f64::max)
    }
}

/// Per-pixel unit RSVs with a validity mask, co-registered with the saliency
/// map they were derived from.
#[derive(Debug, Clone)]
pub struct RsvField {
    width: usize,
    height: usize,
    vectors: Vec<[f64; 2]>,
    valid: Vec<bool>,
}

impl RsvField {
    /// Assemble a field from raw parts (used by in-crate tests to craft
    /// exact vector configurations).
    #[cfg(test)]
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        vectors: Vec<[f64; 2]>,
        valid: Vec<bool>,
    ) -> Self {
        assert_eq!(vectors.len(), width * height);
        assert_eq!(valid.len(), width * height);
        Self {
            width,
            height,
            vectors,
            valid,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// The unit vector at (x, y), or `None` where saliency was below
    /// threshold or the local structure had no principal direction.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<[f64; 2]> {
        let i = y * self.width + x;
        self.valid[i].then(|| self.vectors[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Sum of squared differences against the 8-connected neighborhood.
/// Border pixels use only their in-bounds neighbors.
pub fn local_saliency(img: &Image) -> SaliencyMap {
    let (w, h) = (img.width(), img.height());
    let values = Image::from_fn(w, h, |x, y| {
        let center = img.get(x, y);
        let mut sum = 0.0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let d = center - img.get(nx as usize, ny as usize);
                sum += d * d;
            }
        }
        sum
    });
    SaliencyMap { values }
}

/// Local saliency at every pyramid level, upsampled to the finest level's
/// dimensions and summed. Coarse levels contribute the response of larger
/// structures.
pub fn multiscale_saliency(pyr: &GaussianPyramid) -> SaliencyMap {
    let base = pyr.level(0);
    let (w, h) = (base.width(), base.height());
    let mut acc = Image::zeros(w, h);
    for level in pyr.levels() {
        let s = local_saliency(level);
        let up = s
            .values
            .upsample_to(w, h)
            .expect("pyramid levels never exceed the base dimensions");
        for (a, b) in acc.data_mut().iter_mut().zip(up.data()) {
            *a += b;
        }
    }
    SaliencyMap { values: acc }
}

/// Second-order central moments of the saliency mass in the 5.5-px disc
/// around `v`, clipped to image bounds:
///
/// ```text
/// M = [ mu20  mu11 ]
///     [ mu11  mu02 ]
/// ```
///
/// Moments are taken in disc-local coordinates (offsets from `v`), which
/// leaves the central moments unchanged but keeps the sums well-conditioned.
/// Zero mass in the disc yields the zero matrix.
pub fn inertia_matrix(s: &SaliencyMap, vx: usize, vy: usize) -> [[f64; 2]; 2] {
    let (w, h) = (s.width() as i64, s.height() as i64);
    let (cx, cy) = (vx as i64, vy as i64);
    let (mut m00, mut m10, mut m01) = (0.0, 0.0, 0.0);
    let (mut m20, mut m02, mut m11) = (0.0, 0.0, 0.0);
    for dy in -DISC_RADIUS_INT..=DISC_RADIUS_INT {
        for dx in -DISC_RADIUS_INT..=DISC_RADIUS_INT {
            if (dx * dx + dy * dy) as f64 > DISC_RADIUS_SQ {
                continue;
            }
            let x = cx + dx;
            let y = cy + dy;
            if x < 0 || y < 0 || x >= w || y >= h {
                continue;
            }
            let sal = s.get(x as usize, y as usize);
            let (fx, fy) = (dx as f64, dy as f64);
            m00 += sal;
            m10 += fx * sal;
            m01 += fy * sal;
            m20 += fx * fx * sal;
            m02 += fy * fy * sal;
            m11 += fx * fy * sal;
        }
    }
    if m00 == 0.0 {
        return [[0.0, 0.0], [0.0, 0.0]];
    }
    let gx = m10 / m00;
    let gy = m01 / m00;
    let mu20 = m20 - gx * m10;
    let mu02 = m02 - gy * m01;
    let mu11 = m11 - gx * m01;
    [[mu20, mu11], [mu11, mu02]]
}

/// Unit eigenvector of the larger eigenvalue of a symmetric 2x2 matrix, with
/// canonical sign (first nonzero component positive). Returns `None` for the
/// zero matrix and for isotropic structure (eigenvalue gap below relative
/// tolerance), where no direction is preferred.
pub fn rsv(m: [[f64; 2]; 2]) -> Option<[f64; 2]> {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    if a == 0.0 && b == 0.0 && c == 0.0 {
        return None;
    }
    let half_trace = 0.5 * (a + c);
    let disc = (0.5 * (a - c)).hypot(b);
    let lo = half_trace - disc;
    let hi = half_trace + disc;
    if hi - lo <= EIGEN_GAP_REL_TOL * hi.abs().max(lo.abs()) {
        return None;
    }
    // Two algebraic candidates for the eigenvector; pick the better
    // conditioned one (larger norm).
    let cand1 = [b, hi - a];
    let cand2 = [hi - c, b];
    let n1 = cand1[0].hypot(cand1[1]);
    let n2 = cand2[0].hypot(cand2[1]);
    let (v, n) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    if n == 0.0 {
        return None;
    }
    let mut e = [v[0] / n, v[1] / n];
    let sign = if e[0] != 0.0 { e[0].signum() } else { e[1].signum() };
    e[0] *= sign;
    e[1] *= sign;
    Some(e)
}

/// Multiscale saliency plus the per-pixel RSV field for one image. Pixels
/// whose saliency falls below `threshold_fraction` of the map maximum
/// (strictly below: a value exactly at the threshold passes) are invalid and
/// skip eigen-analysis entirely.
pub fn build_rsv_field(
    img: &Image,
    pyramid_levels: usize,
    threshold_fraction: f64,
) -> (SaliencyMap, RsvField) {
    let pyr = GaussianPyramid::build(img, pyramid_levels);
    let sal = multiscale_saliency(&pyr);
    let field = rsv_field_from_saliency(&sal, threshold_fraction);
    (sal, field)
}

/// RSV extraction from an existing saliency map (see [`build_rsv_field`]).
pub fn rsv_field_from_saliency(sal: &SaliencyMap, threshold_fraction: f64) -> RsvField {
    let (w, h) = (sal.width(), sal.height());
    let max = sal.max();
    let mut vectors = vec![[0.0, 0.0]; w * h];
    let mut valid = vec![false; w * h];
    if max > 0.0 {
        let cutoff = threshold_fraction * max;
        for y in 0..h {
            for x in 0..w {
                if sal.get(x, y) < cutoff {
                    continue;
                }
                if let Some(e) = rsv(inertia_matrix(sal, x, y)) {
                    let i = y * w + x;
                    vectors[i] = e;
                    valid[i] = true;
                }
            }
        }
    }
    RsvField {
        width: w,
        height: h,
        vectors,
        valid,
    }
}

/// Plain-text table of valid RSVs, one pixel per line: `x y vx vy saliency`.
pub fn rsv_table_string(sal: &SaliencyMap, field: &RsvField) -> String {
    let mut out = String::new();
    for y in 0..field.height() {
        for x in 0..field.width() {
            if let Some([vx, vy]) = field.get(x, y) {
                out.push_str(&format!("{x} {y} {vx:.9} {vy:.9} {:.9}\n", sal.get(x, y)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn constant(w: usize, h: usize, v: f64) -> Image {
        Image::from_fn(w, h, |_, _| v)
    }

    #[test]
    fn constant_image_has_zero_saliency() {
        let s = local_saliency(&constant(9, 7, 0.37));
        assert!(s.data().iter().all(|&v| v == 0.0));
        let pyr = GaussianPyramid::build(&constant(64, 64, 0.5), 3);
        let ms = multiscale_saliency(&pyr);
        assert!(ms.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn isolated_bright_pixel() {
        let mut img = constant(5, 5, 0.0);
        img.set(2, 2, 1.0);
        let s = local_saliency(&img);
        assert_eq!(s.get(2, 2), 8.0);
        for (nx, ny) in [(1, 1), (2, 1), (3, 1), (1, 2), (3, 2), (1, 3), (2, 3), (3, 3)] {
            assert_eq!(s.get(nx, ny), 1.0, "neighbor ({nx},{ny})");
        }
        assert_eq!(s.get(0, 0), 0.0);
    }

    #[test]
    fn saliency_scales_quadratically_and_ignores_offsets() {
        let img = Image::from_fn(12, 10, |x, y| ((x * 7 + y * 3) % 11) as f64 / 11.0);
        let scaled = Image::from_fn(12, 10, |x, y| 3.0 * img.get(x, y));
        let shifted = Image::from_fn(12, 10, |x, y| img.get(x, y) + 0.25);
        let s = local_saliency(&img);
        let s_scaled = local_saliency(&scaled);
        let s_shifted = local_saliency(&shifted);
        for i in 0..s.data().len() {
            assert!((s_scaled.data()[i] - 9.0 * s.data()[i]).abs() < 1e-12);
            assert!((s_shifted.data()[i] - s.data()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_level_multiscale_equals_local() {
        let img = Image::from_fn(20, 16, |x, y| ((x * x + 3 * y) % 17) as f64 / 17.0);
        let pyr = GaussianPyramid::build(&img, 1);
        let ms = multiscale_saliency(&pyr);
        let ls = local_saliency(&img);
        for i in 0..ms.data().len() {
            assert!((ms.data()[i] - ls.data()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn multiscale_dominates_single_level() {
        // Extra levels add non-negative terms, so the 2-level map is >= the
        // 1-level map everywhere.
        let img = Image::from_fn(64, 64, |x, _| if x < 32 { 0.2 } else { 0.8 });
        let one = multiscale_saliency(&GaussianPyramid::build(&img, 1));
        let two = multiscale_saliency(&GaussianPyramid::build(&img, 2));
        for i in 0..one.data().len() {
            assert!(two.data()[i] >= one.data()[i] - 1e-12);
        }
        assert!(two.data().iter().sum::<f64>() > one.data().iter().sum::<f64>());
    }

    #[test]
    fn integer_shift_translates_saliency() {
        let img = Image::from_fn(32, 32, |x, y| {
            let dx = x as f64 - 15.0;
            let dy = y as f64 - 13.0;
            (-(dx * dx + dy * dy) / 40.0).exp()
        });
        let shifted = Image::from_fn(32, 32, |x, y| {
            let dx = x as f64 - 18.0;
            let dy = y as f64 - 13.0;
            (-(dx * dx + dy * dy) / 40.0).exp()
        });
        let s0 = local_saliency(&img);
        let s1 = local_saliency(&shifted);
        for y in 1..31 {
            for x in 1..28 {
                assert!(
                    (s0.get(x, y) - s1.get(x + 3, y)).abs() < 1e-12,
                    "mismatch at ({x},{y})"
                );
            }
        }
    }

    #[test]
    fn inertia_of_zero_saliency_is_zero_matrix() {
        let s = local_saliency(&constant(16, 16, 0.5));
        assert_eq!(inertia_matrix(&s, 8, 8), [[0.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn inertia_of_horizontal_segment() {
        // Saliency 1 on the 5 pixels (6..=10, 8): local coordinates are
        // dx in {-2..2}, dy = 0, so m00 = 5, centroid at the origin,
        // mu20 = 4+1+0+1+4 = 10, mu02 = mu11 = 0.
        let mut img = Image::zeros(17, 17);
        for x in 6..=10 {
            img.set(x, 8, 1.0);
        }
        let s = SaliencyMap { values: img };
        let m = inertia_matrix(&s, 8, 8);
        assert!((m[0][0] - 10.0).abs() < 1e-12);
        assert_eq!(m[0][1], 0.0);
        assert_eq!(m[1][1], 0.0);
    }

    #[test]
    fn inertia_of_symmetric_blob_is_isotropic() {
        let img = Image::from_fn(21, 21, |x, y| {
            let dx = x as f64 - 10.0;
            let dy = y as f64 - 10.0;
            (-(dx * dx + dy * dy) / 8.0).exp()
        });
        let s = SaliencyMap { values: img };
        let m = inertia_matrix(&s, 10, 10);
        assert!((m[0][0] - m[1][1]).abs() < 1e-9);
        assert!(m[0][1].abs() < 1e-9);
        assert!(rsv(m).is_none());
    }

    #[test]
    fn rsv_of_axis_aligned_matrix() {
        assert_eq!(rsv([[4.0, 0.0], [0.0, 1.0]]), Some([1.0, 0.0]));
        assert_eq!(rsv([[1.0, 0.0], [0.0, 4.0]]), Some([0.0, 1.0]));
    }

    #[test]
    fn rsv_of_coupled_matrix() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1; the larger one's
        // eigenvector is the diagonal direction.
        let e = rsv([[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let inv_sqrt2 = 0.7071067811865475;
        assert!((e[0] - inv_sqrt2).abs() < 1e-12);
        assert!((e[1] - inv_sqrt2).abs() < 1e-12);
    }

    #[test]
    fn rsv_degenerate_cases() {
        assert_eq!(rsv([[0.0, 0.0], [0.0, 0.0]]), None);
        assert_eq!(rsv([[1.0, 0.0], [0.0, 1.0]]), None);
        assert_eq!(rsv([[3.0, 0.0], [0.0, 3.0 + 1e-9]]), None);
    }

    #[test]
    fn rsv_sign_is_canonical() {
        // The dominant direction here is (1, -1)/sqrt(2) or its negation;
        // canonical form has a positive first component.
        let e = rsv([[2.0, -1.0], [-1.0, 2.0]]).unwrap();
        assert!(e[0] > 0.0);
        assert!((e[0] + e[1]).abs() < 1e-12);
    }

    #[test]
    fn rsv_satisfies_eigen_equation() {
        // Residual check against the characteristic-polynomial eigenvalue.
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 20.0 - 10.0
        };
        for _ in 0..200 {
            let (a, b, c) = (next(), next(), next());
            let m = [[a, b], [b, c]];
            if let Some(e) = rsv(m) {
                let lam = 0.5 * (a + c) + (0.5 * (a - c)).hypot(b);
                let rx = a * e[0] + b * e[1] - lam * e[0];
                let ry = b * e[0] + c * e[1] - lam * e[1];
                assert!(rx.hypot(ry) < 1e-9, "residual too large for {m:?}");
                assert!((e[0].hypot(e[1]) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_image_yields_no_valid_rsvs() {
        let (_, field) = build_rsv_field(&constant(40, 40, 0.7), 2, DEFAULT_SALIENCY_THRESHOLD);
        assert_eq!(field.valid_count(), 0);
    }

    #[test]
    fn vertical_edge_rsvs_align_with_the_edge() {
        let img = Image::from_fn(64, 64, |x, _| if x < 32 { 0.15 } else { 0.85 });
        let (sal, field) = build_rsv_field(&img, 2, DEFAULT_SALIENCY_THRESHOLD);
        assert!(sal.max() > 0.0);
        let mut checked = 0;
        for y in 10..54 {
            for x in 28..36 {
                if let Some([vx, vy]) = field.get(x, y) {
                    // Parallel to (0,1) within 5 degrees.
                    let cos = vy.abs();
                    assert!(
                        cos >= (5f64.to_radians()).cos(),
                        "RSV ({vx:.3},{vy:.3}) at ({x},{y}) deviates from the edge"
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked > 50, "expected a populated edge band, got {checked}");
    }

    #[test]
    fn threshold_boundary_is_inclusive() {
        // A saliency segment at exactly 10% of the map maximum: pixels on it
        // pass the (>=) threshold and get RSVs from the segment's anisotropy.
        // Dropping the segment value epsilon below 10% invalidates them all.
        let field_with_segment = |segment_value: f64| {
            let mut vals = Image::zeros(40, 40);
            vals.set(5, 5, 100.0);
            for x in 14..=26 {
                vals.set(x, 20, segment_value);
            }
            rsv_field_from_saliency(&SaliencyMap { values: vals }, 0.10)
        };
        let at_threshold = field_with_segment(10.0);
        let below_threshold = field_with_segment(10.0 - 1e-9);
        assert!(at_threshold.get(20, 20).is_some(), "exact 10% must pass");
        let e = at_threshold.get(20, 20).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-9, "segment direction is horizontal");
        for x in 14..=26 {
            assert!(below_threshold.get(x, 20).is_none());
        }
    }

    #[test]
    fn rotating_image_by_90_degrees_rotates_rsvs() {
        let img = Image::from_fn(48, 48, |x, y| {
            let dx = x as f64 - 24.0;
            let dy = y as f64 - 20.0;
            if (dx + 0.3 * dy).abs() < 3.0 && dy.abs() < 14.0 {
                0.9
            } else {
                0.1
            }
        });
        // Rotate the image 90 degrees counterclockwise in array terms:
        // (x, y) -> (y, w-1-x).
        let rot = Image::from_fn(48, 48, |x, y| img.get(47 - y, x));
        let (_, f0) = build_rsv_field(&img, 1, DEFAULT_SALIENCY_THRESHOLD);
        let (_, f1) = build_rsv_field(&rot, 1, DEFAULT_SALIENCY_THRESHOLD);
        let mut compared = 0;
        for y in 8..40 {
            for x in 8..40 {
                let (Some(a), Some(b)) = (f0.get(x, y), f1.get(y, 47 - x)) else {
                    continue;
                };
                // b should equal a rotated by 90 degrees, up to sign.
                let rotated = [-a[1], a[0]];
                let cos = (rotated[0] * b[0] + rotated[1] * b[1]).abs();
                assert!(
                    cos >= (2f64.to_radians()).cos(),
                    "rsv at ({x},{y}) not rotated: {a:?} vs {b:?}"
                );
                compared += 1;
            }
        }
        assert!(compared > 30, "too few comparable pixels: {compared}");
    }

    #[test]
    fn rsv_table_lists_only_valid_pixels() {
        let img = Image::from_fn(40, 40, |x, _| if x < 20 { 0.2 } else { 0.8 });
        let (sal, field) = build_rsv_field(&img, 1, DEFAULT_SALIENCY_THRESHOLD);
        let table = rsv_table_string(&sal, &field);
        assert_eq!(table.lines().count(), field.valid_count());
        for line in table.lines().take(5) {
            let cols: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(cols.len(), 5);
            let vx: f64 = cols[2].parse().unwrap();
            let vy: f64 = cols[3].parse().unwrap();
            assert!((vx.hypot(vy) - 1.0).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn saliency_is_nonnegative(seed in 0u64..1000) {
            let img = Image::from_fn(12, 9, |x, y| {
                let v = seed
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(((y * 12 + x) as u64).wrapping_mul(1442695040888963407));
                (v >> 40) as f64 / (1u64 << 24) as f64
            });
            let s = local_saliency(&img);
            prop_assert!(s.data().iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn rsv_is_unit_or_absent(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
            if let Some(e) = rsv([[a, b], [b, c]]) {
                prop_assert!((e[0].hypot(e[1]) - 1.0).abs() < 1e-9);
                let first_nonzero = if e[0] != 0.0 { e[0] } else { e[1] };
                prop_assert!(first_nonzero > 0.0);
            }
        }
    }
}
