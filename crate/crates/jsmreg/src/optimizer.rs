//! Derivative-free maximization over rigid-transform parameters with the
//! Nelder-Mead simplex method.
//!
//! Parameters are searched in scaled coordinates (each divided by its
//! initial step) so that pixels and degrees are commensurate and the simplex
//! stays well-conditioned. The method is deterministic: the same cost
//! function, start, and config always walk the same path.

use crate::transform::RigidTransform;

/// Simplex shape and stopping configuration.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SimplexConfig {
    /// Initial offset per parameter (x pixels, y pixels, degrees); also the
    /// coordinate scale used for the termination test.
    pub initial_step: [f64; 3],
    /// Terminate when the largest vertex-to-centroid distance in scaled
    /// coordinates falls below this.
    pub min_step: f64,
    /// Hard budget of cost evaluations.
    pub max_evals: usize,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            initial_step: [8.0, 8.0, 4.0],
            min_step: 1e-5,
            max_evals: 200,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

impl SimplexConfig {
    /// Copy of this config with every initial step multiplied by `factor`
    /// (used when descending pyramid levels).
    pub fn with_steps_scaled(mut self, factor: f64) -> Self {
        for s in &mut self.initial_step {
            *s *= factor;
        }
        self
    }
}

/// Why the search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StepTolerance,
    EvalLimit,
}

/// One cost evaluation, for convergence traces.
#[derive(Debug, Clone, Copy)]
pub struct TraceEntry {
    pub eval: usize,
    pub params: RigidTransform,
    pub value: f64,
}

/// Outcome of a simplex run: the best parameters ever evaluated, their cost,
/// and how the search ended.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub best: RigidTransform,
    pub best_value: f64,
    pub evaluations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceEntry>,
}

struct Budget<'a, F> {
    cost: F,
    used: usize,
    max: usize,
    best: Option<(RigidTransform, f64)>,
    trace: &'a mut Vec<TraceEntry>,
    steps: [f64; 3],
}

impl<F: FnMut(&RigidTransform) -> f64> Budget<'_, F> {
    /// Evaluate the cost at scaled coordinates `z`, or `None` when the
    /// budget is spent.
    fn eval(&mut self, z: [f64; 3]) -> Option<f64> {
        if self.used >= self.max {
            return None;
        }
        let t = RigidTransform::from_params([
            z[0] * self.steps[0],
            z[1] * self.steps[1],
            z[2] * self.steps[2],
        ]);
        let v = (self.cost)(&t);
        self.used += 1;
        self.trace.push(TraceEntry {
            eval: self.used,
            params: t,
            value: v,
        });
        if self.best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            self.best = Some((t, v));
        }
        Some(v)
    }
}

/// Maximize `cost` starting from `start`. The simplex is seeded with the
/// start vertex plus one vertex per parameter offset by that parameter's
/// initial step. Returns the best parameters ever evaluated, which is never
/// worse than any point the search visited.
pub fn maximize(
    cost: impl FnMut(&RigidTransform) -> f64,
    start: &RigidTransform,
    cfg: &SimplexConfig,
) -> OptResult {
    assert!(cfg.min_step > 0.0, "min_step must be positive");
    assert!(cfg.max_evals >= 1, "need at least one evaluation");
    assert!(
        cfg.initial_step.iter().all(|&s| s > 0.0),
        "initial steps must be positive"
    );

    let mut trace = Vec::new();
    let mut budget = Budget {
        cost,
        used: 0,
        max: cfg.max_evals,
        best: None,
        trace: &mut trace,
        steps: cfg.initial_step,
    };

    // Internally we minimize the negated cost with the textbook algorithm.
    let mut run = || -> Termination {
        let z0 = [
            start.tx / cfg.initial_step[0],
            start.ty / cfg.initial_step[1],
            start.beta / cfg.initial_step[2],
        ];
        let mut verts: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
        for i in 0..4 {
            let mut z = z0;
            if i > 0 {
                z[i - 1] += 1.0;
            }
            match budget.eval(z) {
                Some(v) => verts.push((z, -v)),
                None => return Termination::EvalLimit,
            }
        }
        loop {
            verts.sort_by(|a, b| a.1.total_cmp(&b.1));
            if max_centroid_distance(&verts) < cfg.min_step {
                return Termination::StepTolerance;
            }
            // Centroid of all but the worst vertex.
            let mut c = [0.0; 3];
            for (z, _) in &verts[..3] {
                for k in 0..3 {
                    c[k] += z[k] / 3.0;
                }
            }
            let worst = verts[3];
            let at = |t: f64| {
                let mut z = [0.0; 3];
                for k in 0..3 {
                    z[k] = c[k] + t * (c[k] - worst.0[k]);
                }
                z
            };
            let zr = at(cfg.reflection);
            let Some(fr) = budget.eval(zr).map(|v| -v) else {
                return Termination::EvalLimit;
            };
            if fr < verts[0].1 {
                // Best so far: try to expand further along the same ray.
                let ze = at(cfg.reflection * cfg.expansion);
                let Some(fe) = budget.eval(ze).map(|v| -v) else {
                    return Termination::EvalLimit;
                };
                verts[3] = if fe < fr { (ze, fe) } else { (zr, fr) };
                continue;
            }
            if fr < verts[2].1 {
                verts[3] = (zr, fr);
                continue;
            }
            // Contraction: outside if the reflection at least beat the
            // worst vertex, inside otherwise. The inside acceptance is
            // strict so that a flat landscape falls through to shrink steps
            // and reaches the step tolerance instead of creeping one vertex
            // at a time until the evaluation limit.
            let outside = fr < worst.1;
            let zc = if outside {
                at(cfg.reflection * cfg.contraction)
            } else {
                at(-cfg.contraction)
            };
            let Some(fc) = budget.eval(zc).map(|v| -v) else {
                return Termination::EvalLimit;
            };
            let accepted = if outside { fc <= fr } else { fc < worst.1 };
            if accepted {
                verts[3] = (zc, fc);
                continue;
            }
            // Shrink everything toward the best vertex.
            let z_best = verts[0].0;
            for i in 1..4 {
                let mut z = [0.0; 3];
                for k in 0..3 {
                    z[k] = z_best[k] + cfg.shrink * (verts[i].0[k] - z_best[k]);
                }
                let Some(f) = budget.eval(z).map(|v| -v) else {
                    return Termination::EvalLimit;
                };
                verts[i] = (z, f);
            }
        }
    };

    let termination = run();
    let (best, best_value) = budget.best.expect("max_evals >= 1 guarantees one eval");
    let evaluations = budget.used;
    OptResult {
        best,
        best_value,
        evaluations,
        termination,
        trace,
    }
}

/// Largest distance from any vertex to the centroid of the whole simplex,
/// in scaled coordinates.
fn max_centroid_distance(verts: &[([f64; 3], f64)]) -> f64 {
    let mut c = [0.0; 3];
    for (z, _) in verts {
        for k in 0..3 {
            c[k] += z[k] / verts.len() as f64;
        }
    }
    verts
        .iter()
        .map(|(z, _)| {
            (0..3)
                .map(|k| (z[k] - c[k]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}
