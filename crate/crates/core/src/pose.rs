//! SE(2) poses.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Absolute angular difference, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

/// A planar rigid transform: translation in meters, heading in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    /// Creates a pose with the heading wrapped into `(-π, π]`.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.theta]
    }

    /// `self ∘ other`: applies `other` expressed in the frame of `self`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let (s, c) = self.theta.sin_cos();
        Pose2::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )
    }

    pub fn inverse(&self) -> Pose2 {
        let (s, c) = self.theta.sin_cos();
        Pose2::new(-c * self.x - s * self.y, s * self.x - c * self.y, -self.theta)
    }

    /// Pose of `other` expressed in the frame of `self`, i.e. `self⁻¹ ∘ other`.
    pub fn between(&self, other: &Pose2) -> Pose2 {
        self.inverse().compose(other)
    }

    /// Maps a point from this frame into the parent frame.
    pub fn transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }

    /// Maps a point from the parent frame into this frame.
    pub fn inverse_transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        let dx = p[0] - self.x;
        let dy = p[1] - self.y;
        [c * dx + s * dy, -s * dx + c * dy]
    }

    pub fn translation_distance(&self, other: &Pose2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Rotation by `angle` about the point `center`, as a pose.
    pub fn rotation_about(center: [f64; 2], angle: f64) -> Pose2 {
        let rot = Pose2::new(0.0, 0.0, angle);
        let back = rot.transform_point([-center[0], -center[1]]);
        Pose2::new(center[0] + back[0], center[1] + back[1], angle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: &Pose2, b: &Pose2, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol && angular_distance(a.theta, b.theta) <= tol
    }

    #[test]
    fn normalize_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-FRAC_PI_2) + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(normalize_angle(0.0), 0.0);
    }

    #[test]
    fn compose_examples() {
        let id = Pose2::IDENTITY;
        let p = Pose2::new(1.0, 2.0, 0.3);
        assert_eq!(id.compose(&p), p);

        let a = Pose2::new(1.0, 0.0, FRAC_PI_2);
        let r = a.compose(&Pose2::new(1.0, 0.0, 0.0));
        assert!(close(&r, &Pose2::new(1.0, 1.0, FRAC_PI_2), 1e-15));
    }

    #[test]
    fn inverse_example() {
        let a = Pose2::new(1.0, 0.0, FRAC_PI_2);
        let inv = a.inverse();
        assert!(close(&inv, &Pose2::new(0.0, 1.0, -FRAC_PI_2), 1e-15));
        assert!(close(&a.compose(&inv), &Pose2::IDENTITY, 1e-15));
    }

    #[test]
    fn rotation_about_keeps_center() {
        let r = Pose2::rotation_about([2.0, 3.0], 1.1);
        let c = r.transform_point([2.0, 3.0]);
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] - 3.0).abs() < 1e-12);
    }

    fn pose() -> impl Strategy<Value = Pose2> {
        (-50.0..50.0f64, -50.0..50.0f64, -4.0..4.0f64).prop_map(|(x, y, t)| Pose2::new(x, y, t))
    }

    proptest! {
        #[test]
        fn compose_is_associative(a in pose(), b in pose(), c in pose()) {
            let l = a.compose(&b).compose(&c);
            let r = a.compose(&b.compose(&c));
            prop_assert!(close(&l, &r, 1e-12));
        }

        #[test]
        fn inverse_is_inverse(a in pose()) {
            prop_assert!(close(&a.compose(&a.inverse()), &Pose2::IDENTITY, 1e-12));
            prop_assert!(close(&a.inverse().compose(&a), &Pose2::IDENTITY, 1e-12));
        }

        #[test]
        fn point_transforms_round_trip(a in pose(), px in -20.0..20.0f64, py in -20.0..20.0f64) {
            let q = a.inverse_transform_point(a.transform_point([px, py]));
            prop_assert!((q[0] - px).abs() < 1e-10 && (q[1] - py).abs() < 1e-10);
        }
    }
}
