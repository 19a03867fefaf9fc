//! End-to-end rigid registration: coarse-to-fine over a Gaussian pyramid,
//! with a simplex search at each level maximizing either the JSM-weighted
//! mutual information (the outlier-robust measure) or plain normalized
//! mutual information (the classic baseline).
//!
//! The JSM is expensive to correlate from scratch, so within a level it is
//! fully recomputed only every `jsm_cadence` cost evaluations (and at level
//! entry); between recomputes it is advanced by cheap resampling. Large
//! parameter jumps force a full recompute regardless.

use std::time::Instant;

use crate::histogram::{build_unweighted_histogram, build_weighted_histogram, Interpolation};
use crate::img::{default_pyramid_levels, in_bilinear_domain, GaussianPyramid, Image};
use crate::jsm::{compute_jsm, update_jsm, CosinePolicy, JointSaliencyMap};
use crate::optimizer::{maximize, OptResult, SimplexConfig, Termination};
use crate::saliency::{build_rsv_field, RsvField};
use crate::similarity::{mutual_information, normalized_mutual_information};
use crate::transform::RigidTransform;
use crate::{Error, Result};

/// Similarity reported when a transform cannot be scored (no usable
/// overlap). The optimizer only compares values, so negative infinity simply
/// loses against every scorable transform.
pub const FAILURE_SIMILARITY: f64 = f64::NEG_INFINITY;

/// Minimum histogram mass, as a fraction of the reference pixel count, below
/// which a transform is scored as failure. Guards against the optimizer
/// shrinking the overlap to inflate the measure.
pub const MIN_OVERLAP_MASS_FRACTION: f64 = 0.01;

/// Incremental motion (pixels, degrees) beyond which the cheap JSM update is
/// distrusted and a full recompute is forced.
const MAX_UPDATE_TRANSLATION: f64 = 3.0;
const MAX_UPDATE_ROTATION: f64 = 3.0;

/// Lower limit for the per-level histogram bin count (see
/// `MeasureEngine::bins`); coarser levels never drop below this.
const MIN_LEVEL_BINS: usize = 8;

/// Minimum total weight a saliency-weighted histogram needs before its
/// mutual information is trusted; weighted mass is naturally far below the
/// pixel count, so this is an absolute floor rather than a fraction.
const MIN_WEIGHTED_MASS: f64 = 32.0;

/// Capture-scan lattice at the coarsest pyramid level, in units of the
/// optimizer's initial steps per axis. The translation steps are sized to
/// the capture box, so one step either way spans it; rotation basins are
/// narrower than translation basins at coarse resolution and get a finer,
/// wider lattice.
const CAPTURE_SCAN_TRANSLATION: [f64; 3] = [-1.0, 0.0, 1.0];
const CAPTURE_SCAN_ROTATION: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

/// Which measure drives the optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureSpec {
    /// Mutual information of the JSM-weighted joint histogram.
    Jmi,
    /// Normalized mutual information of the unweighted joint histogram.
    NmiBaseline,
}

impl MeasureSpec {
    pub fn label(&self) -> &'static str {
        match self {
            MeasureSpec::Jmi => "JMI",
            MeasureSpec::NmiBaseline => "NMI",
        }
    }
}

/// Full pipeline configuration.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RegistrationConfig {
    pub measure: MeasureSpec,
    pub interpolation: Interpolation,
    pub bins: usize,
    /// Pyramid depth; `None` picks the deepest pyramid whose coarsest level
    /// keeps both images at least 32 px on their short side (capped at 4).
    pub pyramid_levels: Option<usize>,
    /// Full JSM recompute every this many cost evaluations.
    pub jsm_cadence: usize,
    /// Fraction of the maximum saliency below which pixels carry no RSV.
    pub saliency_threshold: f64,
    pub cosine_policy: CosinePolicy,
    /// Simplex settings for the coarsest level; initial steps are halved at
    /// each descent to a finer level.
    pub optimizer: SimplexConfig,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self {
            measure: MeasureSpec::Jmi,
            interpolation: Interpolation::Bilinear,
            bins: 64,
            pyramid_levels: None,
            jsm_cadence: 12,
            saliency_threshold: 0.10,
            cosine_policy: CosinePolicy::Abs,
            optimizer: SimplexConfig::default(),
        }
    }
}

impl RegistrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "bins must be at least 2, got {}",
                self.bins
            )));
        }
        if !(1..=50).contains(&self.jsm_cadence) {
            return Err(Error::InvalidParameter(format!(
                "jsm_cadence must be in 1..=50, got {}",
                self.jsm_cadence
            )));
        }
        if !(0.0..1.0).contains(&self.saliency_threshold) {
            return Err(Error::InvalidParameter(format!(
                "saliency_threshold must be in [0, 1), got {}",
                self.saliency_threshold
            )));
        }
        if self.pyramid_levels == Some(0) {
            return Err(Error::InvalidParameter(
                "pyramid_levels must be at least 1".into(),
            ));
        }
        if !(self.optimizer.min_step > 0.0) {
            return Err(Error::InvalidParameter(
                "optimizer min_step must be positive".into(),
            ));
        }
        if self.optimizer.max_evals == 0 {
            return Err(Error::InvalidParameter(
                "optimizer max_evals must be at least 1".into(),
            ));
        }
        if self.optimizer.initial_step.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidParameter(
                "optimizer initial steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One recorded cost evaluation; `value` is `None` where the transform could
/// not be scored.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TraceRecord {
    pub eval: usize,
    pub tx: f64,
    pub ty: f64,
    pub beta: f64,
    pub value: Option<f64>,
}

/// What happened at one pyramid level. Transforms are in that level's
/// coordinates (translations halve with each level of downsampling).
#[derive(Debug, Clone, serde::Serialize)]
pub struct LevelReport {
    /// Pyramid index, 0 = finest.
    pub level: usize,
    pub width: usize,
    pub height: usize,
    pub start: RigidTransform,
    pub result: RigidTransform,
    pub best_value: Option<f64>,
    pub evaluations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceRecord>,
}

impl LevelReport {
    fn new(level: usize, img: &Image, start: &RigidTransform, opt: &OptResult) -> Self {
        Self {
            level,
            width: img.width(),
            height: img.height(),
            start: *start,
            result: opt.best,
            best_value: opt.best_value.is_finite().then_some(opt.best_value),
            evaluations: opt.evaluations,
            termination: opt.termination,
            trace: opt
                .trace
                .iter()
                .map(|e| TraceRecord {
                    eval: e.eval,
                    tx: e.params.tx,
                    ty: e.params.ty,
                    beta: e.params.beta,
                    value: e.value.is_finite().then_some(e.value),
                })
                .collect(),
        }
    }
}

/// Outcome of [`register`].
#[derive(Debug, Clone)]
pub struct RegistrationResult {
    /// Final transform in full-resolution coordinates (reference into
    /// floating).
    pub transform: RigidTransform,
    /// Measure value at the final transform (negative infinity if nothing
    /// was ever scorable).
    pub similarity: f64,
    /// Coarse-to-fine level reports, in execution order.
    pub levels: Vec<LevelReport>,
    pub total_evaluations: usize,
    pub seconds: f64,
}

impl RegistrationResult {
    /// Single-line summary: `tx ty beta similarity evals seconds`.
    pub fn record_line(&self) -> String {
        format!(
            "{:.6} {:.6} {:.6} {:.9} {} {:.3}",
            self.transform.tx,
            self.transform.ty,
            self.transform.beta,
            self.similarity,
            self.total_evaluations,
            self.seconds
        )
    }

    /// JSON document with the final transform and per-level traces.
    pub fn to_json(&self) -> String {
        #[derive(serde::Serialize)]
        struct Doc<'a> {
            transform: RigidTransform,
            similarity: Option<f64>,
            total_evaluations: usize,
            seconds: f64,
            levels: &'a [LevelReport],
        }
        serde_json::to_string_pretty(&Doc {
            transform: self.transform,
            similarity: self.similarity.is_finite().then_some(self.similarity),
            total_evaluations: self.total_evaluations,
            seconds: self.seconds,
            levels: &self.levels,
        })
        .expect("result serialization cannot fail")
    }
}

/// Scores transforms for one image pair at one resolution, owning the RSV
/// fields and the cadence-managed JSM state.
struct MeasureEngine<'a> {
    reference: &'a Image,
    floating: &'a Image,
    cfg: &'a RegistrationConfig,
    /// How many full-resolution pixels one pixel of this level spans
    /// (1 at the finest level, 2^level above it).
    pixel_scale: f64,
    /// Histogram bin count at this resolution. Downsampling a level cuts
    /// the sample count 4x, so the bin count is halved per level to keep
    /// bin occupancy — and with it the MI estimate's bias — roughly
    /// constant across the pyramid; a raw MI from a nearly-empty histogram
    /// otherwise rewards poor alignment.
    bins: usize,
    /// Reference and floating RSV fields (JMI only).
    rsv: Option<(RsvField, RsvField)>,
    jsm: Option<JointSaliencyMap>,
    eval_index: usize,
    last_full_eval: usize,
}

impl<'a> MeasureEngine<'a> {
    fn new(
        reference: &'a Image,
        floating: &'a Image,
        cfg: &'a RegistrationConfig,
        pixel_scale: f64,
        bins: usize,
    ) -> Self {
        let rsv = (cfg.measure == MeasureSpec::Jmi).then(|| {
            let lr = default_pyramid_levels(reference.width(), reference.height());
            let lf = default_pyramid_levels(floating.width(), floating.height());
            let (_, fr) = build_rsv_field(reference, lr, cfg.saliency_threshold);
            let (_, ff) = build_rsv_field(floating, lf, cfg.saliency_threshold);
            (fr, ff)
        });
        Self {
            reference,
            floating,
            cfg,
            pixel_scale,
            bins,
            rsv,
            jsm: None,
            eval_index: 0,
            last_full_eval: 0,
        }
    }

    fn min_mass(&self) -> f64 {
        MIN_OVERLAP_MASS_FRACTION * (self.reference.width() * self.reference.height()) as f64
    }

    /// Score `t`, maintaining the JSM by cadence: full recompute at the
    /// first evaluation, every `jsm_cadence` evaluations thereafter, and
    /// whenever the motion since the JSM's transform is too large for the
    /// cheap update.
    fn evaluate(&mut self, t: &RigidTransform) -> f64 {
        self.eval_index += 1;
        match self.cfg.measure {
            MeasureSpec::NmiBaseline => self.score_unweighted(t),
            MeasureSpec::Jmi => {
                let needs_full = match &self.jsm {
                    None => true,
                    Some(j) => {
                        // The motion bounds are full-resolution magnitudes;
                        // translations at this level are in level pixels.
                        let (d_px, d_deg) = j.transform().delta(t);
                        self.eval_index - self.last_full_eval >= self.cfg.jsm_cadence
                            || d_px * self.pixel_scale >= MAX_UPDATE_TRANSLATION
                            || d_deg >= MAX_UPDATE_ROTATION
                    }
                };
                if needs_full {
                    self.last_full_eval = self.eval_index;
                }
                self.score_weighted(t, needs_full)
            }
        }
    }

    /// Score `t` with a freshly correlated JSM, no update shortcut (used for
    /// similarity surfaces, which must be exact).
    fn evaluate_fresh(&mut self, t: &RigidTransform) -> f64 {
        match self.cfg.measure {
            MeasureSpec::NmiBaseline => self.score_unweighted(t),
            MeasureSpec::Jmi => self.score_weighted(t, true),
        }
    }

    fn score_weighted(&mut self, t: &RigidTransform, full: bool) -> f64 {
        let (fr, ff) = self.rsv.as_ref().expect("JMI engine has RSV fields");
        let jsm = if full {
            compute_jsm(fr, ff, t, self.cfg.cosine_policy)
        } else {
            update_jsm(self.jsm.as_ref().expect("update follows a full compute"), t)
        };
        // The weighted mass concentrates on salient structure and is a small
        // fraction of the overlap even at perfect alignment, so the pixel
        // fraction guard applies to the geometric overlap; the mass itself
        // only has to clear an absolute effective-sample floor below which
        // an MI estimate is noise.
        let degenerate = (jsm.overlap_count() as f64) < self.min_mass();
        let value = match build_weighted_histogram(
            self.reference,
            self.floating,
            t,
            &jsm,
            self.cfg.interpolation,
            self.bins,
        ) {
            Ok(h) if !degenerate && h.total_mass() >= MIN_WEIGHTED_MASS => {
                mutual_information(&h).map_or(FAILURE_SIMILARITY, |s| s.value)
            }
            _ => FAILURE_SIMILARITY,
        };
        self.jsm = Some(jsm);
        value
    }

    fn score_unweighted(&mut self, t: &RigidTransform) -> f64 {
        match build_unweighted_histogram(
            self.reference,
            self.floating,
            t,
            self.cfg.interpolation,
            self.bins,
        ) {
            Ok(h) if h.total_mass() >= self.min_mass() => {
                normalized_mutual_information(&h).map_or(FAILURE_SIMILARITY, |s| s.value)
            }
            _ => FAILURE_SIMILARITY,
        }
    }
}

/// Number of reference pixels that land inside the floating image's bilinear
/// domain under `t`.
fn geometric_overlap_count(reference: &Image, floating: &Image, t: &RigidTransform) -> usize {
    let center = RigidTransform::image_center(reference.width(), reference.height());
    let (fw, fh) = (floating.width(), floating.height());
    let mut n = 0;
    for y in 0..reference.height() {
        for x in 0..reference.width() {
            let [px, py] = t.apply([x as f64, y as f64], center);
            if in_bilinear_domain(px, py, fw, fh) {
                n += 1;
            }
        }
    }
    n
}

/// Evaluate the measure on a small lattice around `center` (offsets are
/// multiples of the per-axis `steps`) and return the best-scoring transform
/// together with the number of evaluations spent. Falls back to `center`
/// when nothing on the lattice is scorable.
fn capture_scan(
    engine: &mut MeasureEngine,
    center: &RigidTransform,
    steps: &[f64; 3],
) -> (RigidTransform, usize) {
    let mut best = (*center, FAILURE_SIMILARITY);
    let mut evals = 0;
    for db in CAPTURE_SCAN_ROTATION {
        for dy in CAPTURE_SCAN_TRANSLATION {
            for dx in CAPTURE_SCAN_TRANSLATION {
                let t = RigidTransform::new(
                    center.tx + dx * steps[0],
                    center.ty + dy * steps[1],
                    center.beta + db * steps[2],
                );
                let v = engine.evaluate(&t);
                evals += 1;
                if v > best.1 {
                    best = (t, v);
                }
            }
        }
    }
    (best.0, evals)
}

/// Register `floating` to `reference`: find the rigid transform (applied to
/// reference coordinates) under which the floating intensities line up best
/// according to the configured measure. `start` is in full-resolution
/// coordinates; so is the returned transform.
pub fn register(
    reference: &Image,
    floating: &Image,
    start: &RigidTransform,
    cfg: &RegistrationConfig,
) -> Result<RegistrationResult> {
    cfg.validate()?;
    let t_start = Instant::now();
    let requested = cfg.pyramid_levels.unwrap_or_else(|| {
        default_pyramid_levels(reference.width(), reference.height())
            .min(default_pyramid_levels(floating.width(), floating.height()))
    });
    let ref_pyr = GaussianPyramid::build(reference, requested);
    let flt_pyr = GaussianPyramid::build(floating, requested);
    let levels = ref_pyr.num_levels().min(flt_pyr.num_levels());

    // Bring the start transform into coarsest-level coordinates.
    let shrink = (1u64 << (levels - 1)) as f64;
    let mut current = RigidTransform::new(start.tx / shrink, start.ty / shrink, start.beta);

    let coarse_ref = ref_pyr.level(levels - 1);
    let coarse_flt = flt_pyr.level(levels - 1);
    let coarse_pixels = (coarse_ref.width() * coarse_ref.height()) as f64;
    let overlap = geometric_overlap_count(coarse_ref, coarse_flt, &current) as f64;
    if overlap < MIN_OVERLAP_MASS_FRACTION * coarse_pixels {
        return Err(Error::DegenerateOverlap);
    }

    let mut reports = Vec::with_capacity(levels);
    let mut total_evaluations = 0;
    let mut similarity = FAILURE_SIMILARITY;
    for li in (0..levels).rev() {
        let r = ref_pyr.level(li);
        let f = flt_pyr.level(li);
        let descents = (levels - 1 - li) as i32;
        // The configured steps are full-resolution magnitudes applied at the
        // coarsest level and halved per descent. A level pixel is worth
        // 2^li full-resolution pixels, so the translation steps stay
        // constant in level units while the rotation step (resolution-
        // independent degrees) actually halves.
        let mut opt_cfg = cfg.optimizer.clone();
        let level_units = 0.5f64.powi((levels - 1) as i32);
        let beta_scale = 0.5f64.powi(descents);
        opt_cfg.initial_step = [
            cfg.optimizer.initial_step[0] * level_units,
            cfg.optimizer.initial_step[1] * level_units,
            cfg.optimizer.initial_step[2] * beta_scale,
        ];
        let level_bins = (cfg.bins >> li).max(MIN_LEVEL_BINS).min(cfg.bins);
        let mut engine = MeasureEngine::new(r, f, cfg, (1u64 << li) as f64, level_bins);
        if li == levels - 1 {
            // The start can sit on a flat plain outside the optimum's
            // catchment when rotation and translation are jointly large: no
            // single-axis move improves the measure, and the simplex parks on
            // local noise. One cheap lattice scan over the capture box picks
            // the best-scoring start, after which the simplex only has to
            // descend a single basin.
            let (seeded, evals) = capture_scan(&mut engine, &current, &opt_cfg.initial_step);
            total_evaluations += evals;
            current = seeded;
        }
        let opt = maximize(|t| engine.evaluate(t), &current, &opt_cfg);
        total_evaluations += opt.evaluations;
        reports.push(LevelReport::new(li, r, &current, &opt));
        similarity = opt.best_value;
        current = opt.best;
        if li > 0 {
            // Translations double when moving to the next finer level.
            current = RigidTransform::new(current.tx * 2.0, current.ty * 2.0, current.beta);
        }
    }

    Ok(RegistrationResult {
        transform: current,
        similarity,
        levels: reports,
        total_evaluations,
        seconds: t_start.elapsed().as_secs_f64(),
    })
}

/// A similarity surface: the configured measure sampled on a translation
/// grid around a base transform.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    step: f64,
    half: i64,
    side: usize,
    /// Row-major, rows indexed by the y offset; `None` marks grid points
    /// where the measure was not scorable.
    values: Vec<Option<f64>>,
}

impl SurfaceGrid {
    pub fn side(&self) -> usize {
        self.side
    }

    /// Translation offset represented by grid index `i` (either axis).
    pub fn offset(&self, i: usize) -> f64 {
        (i as i64 - self.half) as f64 * self.step
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.side + ix]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Location and value of the largest present entry as (dx, dy, value).
    pub fn argmax(&self) -> Option<(f64, f64, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for iy in 0..self.side {
            for ix in 0..self.side {
                if let Some(v) = self.get(ix, iy) {
                    if best.map_or(true, |(_, _, bv)| v > bv) {
                        best = Some((ix, iy, v));
                    }
                }
            }
        }
        best.map(|(ix, iy, v)| (self.offset(ix), self.offset(iy), v))
    }

    /// Number of present grid points strictly greater than every present
    /// 8-neighbor. A smooth single-peak surface has exactly one.
    pub fn count_strict_local_maxima(&self) -> usize {
        let mut count = 0;
        for iy in 0..self.side {
            for ix in 0..self.side {
                let Some(v) = self.get(ix, iy) else { continue };
                let mut is_max = true;
                'probe: for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let nx = ix as i64 + dx;
                        let ny = iy as i64 + dy;
                        if nx < 0 || ny < 0 || nx >= self.side as i64 || ny >= self.side as i64 {
                            continue;
                        }
                        if let Some(n) = self.get(nx as usize, ny as usize) {
                            if n >= v {
                                is_max = false;
                                break 'probe;
                            }
                        }
                    }
                }
                if is_max {
                    count += 1;
                }
            }
        }
        count
    }

    /// CSV rows over y offsets, columns over x offsets; missing values are
    /// empty cells.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for iy in 0..self.side {
            for ix in 0..self.side {
                if ix > 0 {
                    out.push(',');
                }
                if let Some(v) = self.get(ix, iy) {
                    out.push_str(&format!("{v}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Present values normalized to [0, 1] (constant surfaces map to 0.5);
    /// missing points render as 0.
    pub fn heatmap(&self) -> Image {
        let present: Vec<f64> = self.values.iter().flatten().cloned().collect();
        let lo = present.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = present.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Image::from_fn(self.side, self.side, |x, y| match self.get(x, y) {
            None => 0.0,
            Some(v) if hi > lo => (v - lo) / (hi - lo),
            Some(_) => 0.5,
        })
    }

    /// Sidecar mask: 1 where the surface has a value, 0 where it is missing.
    pub fn mask(&self) -> Image {
        Image::from_fn(self.side, self.side, |x, y| {
            if self.get(x, y).is_some() {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// Evaluate the configured measure on the translation grid
/// `t0 + (dx, dy, 0)` for `dx, dy ∈ [-range, range]` in steps of `step`,
/// at full resolution. The JSM is fully recomputed at every grid point.
pub fn similarity_surface(
    reference: &Image,
    floating: &Image,
    t0: &RigidTransform,
    cfg: &RegistrationConfig,
    range: f64,
    step: f64,
) -> Result<SurfaceGrid> {
    cfg.validate()?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "surface step must be positive, got {step}"
        )));
    }
    if range < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "surface range must be non-negative, got {range}"
        )));
    }
    let half = (range / step).floor() as i64;
    let side = (2 * half + 1) as usize;
    let mut engine = MeasureEngine::new(reference, floating, cfg, 1.0, cfg.bins);
    let mut values = Vec::with_capacity(side * side);
    for iy in -half..=half {
        for ix in -half..=half {
            let t = RigidTransform::new(
                t0.tx + ix as f64 * step,
                t0.ty + iy as f64 * step,
                t0.beta,
            );
            let v = engine.evaluate_fresh(&t);
            values.push(v.is_finite().then_some(v));
        }
    }
    Ok(SurfaceGrid {
        step,
        half,
        side,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |x, y| {
            let fx = x as f64 / 7.3;
            let fy = y as f64 / 5.1;
            0.5 + 0.2 * (fx.sin() + (fy + 0.4 * fx).cos()) + 0.1 * ((x * y) % 7) as f64 / 7.0
        })
    }

    fn fast_cfg(measure: MeasureSpec) -> RegistrationConfig {
        RegistrationConfig {
            measure,
            pyramid_levels: Some(2),
            optimizer: SimplexConfig {
                max_evals: 120,
                ..SimplexConfig::default()
            },
            ..RegistrationConfig::default()
        }
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        let ok = RegistrationConfig::default();
        assert!(ok.validate().is_ok());
        let mut bad = RegistrationConfig::default();
        bad.jsm_cadence = 0;
        assert!(bad.validate().is_err());
        bad = RegistrationConfig::default();
        bad.jsm_cadence = 51;
        assert!(bad.validate().is_err());
        bad = RegistrationConfig::default();
        bad.saliency_threshold = 1.0;
        assert!(bad.validate().is_err());
        bad = RegistrationConfig::default();
        bad.bins = 1;
        assert!(bad.validate().is_err());
        bad = RegistrationConfig::default();
        bad.pyramid_levels = Some(0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn self_registration_is_exact_for_both_measures() {
        let img = textured(64, 64);
        for measure in [MeasureSpec::Jmi, MeasureSpec::NmiBaseline] {
            let r = register(&img, &img, &RigidTransform::identity(), &fast_cfg(measure)).unwrap();
            let (d_px, d_deg) = r.transform.delta(&RigidTransform::identity());
            assert!(
                d_px < 0.1 && d_deg < 0.1,
                "{:?} self-registration drifted to {:?}",
                measure,
                r.transform
            );
            assert!(r.similarity.is_finite());
        }
    }

    #[test]
    fn degenerate_start_overlap_is_rejected() {
        let img = textured(64, 64);
        let far = RigidTransform::new(500.0, 0.0, 0.0);
        let err = register(&img, &img, &far, &fast_cfg(MeasureSpec::Jmi));
        assert!(matches!(err, Err(Error::DegenerateOverlap)));
    }

    #[test]
    fn evaluation_budget_is_respected_per_level() {
        let img = textured(64, 64);
        let cfg = fast_cfg(MeasureSpec::NmiBaseline);
        let r = register(&img, &img, &RigidTransform::identity(), &cfg).unwrap();
        assert_eq!(r.levels.len(), 2);
        // The coarsest level spends one capture lattice on top of its
        // simplex budget.
        let lattice = CAPTURE_SCAN_TRANSLATION.len().pow(2) * CAPTURE_SCAN_ROTATION.len();
        assert!(r.total_evaluations <= 2 * cfg.optimizer.max_evals + lattice);
        for level in &r.levels {
            assert!(level.evaluations <= cfg.optimizer.max_evals);
        }
    }

    #[test]
    fn level_reports_run_coarse_to_fine_with_scaled_steps() {
        let img = textured(64, 64);
        let r = register(
            &img,
            &img,
            &RigidTransform::identity(),
            &fast_cfg(MeasureSpec::NmiBaseline),
        )
        .unwrap();
        assert_eq!(r.levels[0].level, 1);
        assert_eq!(r.levels[1].level, 0);
        assert_eq!(r.levels[0].width, 32);
        assert_eq!(r.levels[1].width, 64);
    }

    #[test]
    fn best_so_far_trace_is_monotone() {
        let img = textured(64, 64);
        let r = register(
            &img,
            &img,
            &RigidTransform::new(2.0, -1.0, 1.0),
            &fast_cfg(MeasureSpec::Jmi),
        )
        .unwrap();
        for level in &r.levels {
            let mut best = f64::NEG_INFINITY;
            let mut bests = Vec::new();
            for rec in &level.trace {
                best = best.max(rec.value.unwrap_or(f64::NEG_INFINITY));
                bests.push(best);
            }
            assert!(bests.windows(2).all(|w| w[1] >= w[0]));
            assert_eq!(
                level.best_value.unwrap(),
                best,
                "level best must equal the best traced value"
            );
        }
    }

    #[test]
    fn result_serialization_round_trips() {
        let img = textured(64, 64);
        let r = register(
            &img,
            &img,
            &RigidTransform::identity(),
            &fast_cfg(MeasureSpec::NmiBaseline),
        )
        .unwrap();
        let line = r.record_line();
        assert_eq!(line.split_whitespace().count(), 6);
        let doc: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(doc["transform"]["tx"].is_number());
        assert!(doc["levels"].as_array().unwrap().len() == 2);
        assert!(doc["similarity"].is_number());
    }

    #[test]
    fn surface_peaks_at_identity_for_identical_images() {
        let img = textured(48, 48);
        let cfg = RegistrationConfig {
            pyramid_levels: Some(1),
            ..fast_cfg(MeasureSpec::Jmi)
        };
        let grid = similarity_surface(&img, &img, &RigidTransform::identity(), &cfg, 2.0, 1.0)
            .unwrap();
        assert_eq!(grid.side(), 5);
        let (dx, dy, _) = grid.argmax().unwrap();
        assert_eq!((dx, dy), (0.0, 0.0));
        assert_eq!(grid.offset(0), -2.0);
        assert_eq!(grid.offset(4), 2.0);
    }

    #[test]
    fn surface_dimensions_follow_range_and_step() {
        let img = textured(48, 48);
        let cfg = fast_cfg(MeasureSpec::NmiBaseline);
        let grid =
            similarity_surface(&img, &img, &RigidTransform::identity(), &cfg, 3.0, 1.5).unwrap();
        assert_eq!(grid.side(), 5);
        let csv = grid.to_csv_string();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().all(|l| l.split(',').count() == 5));
    }

    #[test]
    fn surface_marks_unscorable_points_missing() {
        let img = textured(48, 48);
        let cfg = fast_cfg(MeasureSpec::NmiBaseline);
        // Base transform nearly off the image: the far column of the grid
        // (tx = 48 against a 48-wide image) has no overlap at all.
        let t0 = RigidTransform::new(45.0, 0.0, 0.0);
        let grid = similarity_surface(&img, &img, &t0, &cfg, 3.0, 3.0).unwrap();
        let missing = grid.values().iter().filter(|v| v.is_none()).count();
        assert!(missing > 0, "expected unscorable points at extreme shifts");
        let mask = grid.mask();
        let zeros = mask.data().iter().filter(|&&v| v == 0.0).count();
        assert_eq!(zeros, missing);
        let heat = grid.heatmap();
        assert!(heat.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn strict_local_maxima_counting() {
        // Hand-built 3x3 grid: peak at center, plus a missing corner.
        let grid = SurfaceGrid {
            step: 1.0,
            half: 1,
            side: 3,
            values: vec![
                Some(0.1),
                Some(0.2),
                Some(0.1),
                Some(0.3),
                Some(0.9),
                Some(0.2),
                None,
                Some(0.1),
                Some(0.05),
            ],
        };
        assert_eq!(grid.count_strict_local_maxima(), 1);
        // A constant surface has no strict maxima.
        let flat = SurfaceGrid {
            step: 1.0,
            half: 1,
            side: 3,
            values: vec![Some(1.0); 9],
        };
        assert_eq!(flat.count_strict_local_maxima(), 0);
    }

    #[test]
    fn recovers_small_translation_on_plain_pair() {
        // A quick end-to-end sanity check on a pure translation; the full
        // accuracy suite lives in the integration tests.
        let img = textured(96, 96);
        // The floating image shows the reference content shifted: the pixel
        // at u displays img(u + 2), so the reference-to-floating transform
        // that aligns them is tx = -2.
        let flt = Image::from_fn(96, 96, |x, y| {
            img.sample_bilinear(x as f64 + 2.0, y as f64).unwrap_or(0.5)
        });
        let cfg = RegistrationConfig {
            pyramid_levels: Some(2),
            ..fast_cfg(MeasureSpec::NmiBaseline)
        };
        let r = register(&img, &flt, &RigidTransform::identity(), &cfg).unwrap();
        assert!(
            (r.transform.tx + 2.0).abs() < 0.5 && r.transform.ty.abs() < 0.5,
            "recovered {:?}",
            r.transform
        );
    }
}
