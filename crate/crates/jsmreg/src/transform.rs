//! Rigid 2D transforms over image coordinates.
//!
//! Coordinate convention, used everywhere in this crate: `x` is the column
//! index growing rightward, `y` is the row index growing downward. A
//! transform maps *reference* coordinates into *floating* coordinates as
//!
//! ```text
//! p' = R(beta) * (p - c) + c + (tx, ty)
//! R(beta) = [cos b  -sin b]      (b = beta in radians)
//!           [sin b   cos b]
//! ```
//!
//! where `c` is the rotation center, normally the continuous center of the
//! reference image `((w-1)/2, (h-1)/2)`. The rotation is counterclockwise
//! with respect to the (x, y) axes; with y pointing down this appears
//! clockwise on screen.

use serde::{Deserialize, Serialize};

/// Rigid motion: translation in pixels, rotation in degrees about a center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    /// Translation along x, pixels.
    pub tx: f64,
    /// Translation along y, pixels.
    pub ty: f64,
    /// Rotation in degrees (counterclockwise in the x-right/y-down frame).
    pub beta: f64,
}

impl RigidTransform {
    pub fn new(tx: f64, ty: f64, beta: f64) -> Self {
        Self { tx, ty, beta }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    /// The continuous center of a `w`x`h` image, the conventional rotation
    /// center for registration transforms.
    pub fn image_center(width: usize, height: usize) -> [f64; 2] {
        [(width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0]
    }

    /// Map a continuous point through the transform (see module docs).
    pub fn apply(&self, p: [f64; 2], center: [f64; 2]) -> [f64; 2] {
        let b = self.beta.to_radians();
        let (sin, cos) = b.sin_cos();
        let dx = p[0] - center[0];
        let dy = p[1] - center[1];
        [
            cos * dx - sin * dy + center[0] + self.tx,
            sin * dx + cos * dy + center[1] + self.ty,
        ]
    }

    /// The transform that undoes this one (about the same center).
    pub fn inverse(&self) -> Self {
        let b = (-self.beta).to_radians();
        let (sin, cos) = b.sin_cos();
        Self {
            tx: -(cos * self.tx - sin * self.ty),
            ty: -(sin * self.tx + cos * self.ty),
            beta: -self.beta,
        }
    }

    /// Composition: apply `self` first, then `next` (same center for both).
    pub fn then(&self, next: &RigidTransform) -> Self {
        let b = next.beta.to_radians();
        let (sin, cos) = b.sin_cos();
        Self {
            tx: cos * self.tx - sin * self.ty + next.tx,
            ty: sin * self.tx + cos * self.ty + next.ty,
            beta: self.beta + next.beta,
        }
    }

    /// Translation magnitude and absolute rotation separating two transforms.
    pub fn delta(&self, other: &RigidTransform) -> (f64, f64) {
        let dt = ((self.tx - other.tx).powi(2) + (self.ty - other.ty).powi(2)).sqrt();
        (dt, (self.beta - other.beta).abs())
    }

    pub fn params(&self) -> [f64; 3] {
        [self.tx, self.ty, self.beta]
    }

    pub fn from_params(p: [f64; 3]) -> Self {
        Self::new(p[0], p[1], p[2])
    }
}

impl std::fmt::Display for RigidTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "tx {:+.3} px, ty {:+.3} px, beta {:+.3} deg",
            self.tx, self.ty, self.beta
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: [f64; 2], b: [f64; 2], tol: f64) {
        assert!(
            (a[0] - b[0]).abs() < tol && (a[1] - b[1]).abs() < tol,
            "{a:?} vs {b:?}"
        );
    }

    #[test]
    fn identity_maps_point_to_itself() {
        let t = RigidTransform::identity();
        assert_close(t.apply([10.0, 20.0], [5.0, 5.0]), [10.0, 20.0], 1e-12);
    }

    #[test]
    fn pure_translation() {
        let t = RigidTransform::new(5.0, -3.0, 0.0);
        assert_close(t.apply([0.0, 0.0], [0.0, 0.0]), [5.0, -3.0], 1e-12);
    }

    #[test]
    fn rotation_90_degrees_about_origin() {
        // Closed-form rotation matrix at 90 deg: (1, 0) -> (0, 1).
        let t = RigidTransform::new(0.0, 0.0, 90.0);
        let q = t.apply([1.0, 0.0], [0.0, 0.0]);
        assert_close(q, [0.0, 1.0], 1e-12);
        let norm = (q[0] * q[0] + q[1] * q[1]).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let t = RigidTransform::new(3.7, -1.2, 23.0);
        let c = [12.0, 7.5];
        let p = [4.0, 9.0];
        let q = t.inverse().apply(t.apply(p, c), c);
        assert_close(q, p, 1e-9);
        let composed = t.then(&t.inverse());
        assert!(composed.tx.abs() < 1e-9 && composed.ty.abs() < 1e-9);
        assert!(composed.beta.abs() < 1e-9);
    }

    #[test]
    fn then_matches_sequential_application() {
        let a = RigidTransform::new(2.0, -1.0, 10.0);
        let b = RigidTransform::new(-0.5, 3.0, -4.0);
        let c = [8.0, 3.0];
        let p = [1.0, 6.0];
        let seq = b.apply(a.apply(p, c), c);
        let comp = a.then(&b).apply(p, c);
        assert_close(seq, comp, 1e-9);
    }

    proptest! {
        #[test]
        fn round_trip_within_tolerance(
            tx in -50.0..50.0f64, ty in -50.0..50.0f64, beta in -180.0..180.0f64,
            px in -100.0..100.0f64, py in -100.0..100.0f64,
        ) {
            let t = RigidTransform::new(tx, ty, beta);
            let c = [31.5, 15.0];
            let q = t.inverse().apply(t.apply([px, py], c), c);
            prop_assert!((q[0] - px).abs() < 1e-9);
            prop_assert!((q[1] - py).abs() < 1e-9);
        }
    }
}
