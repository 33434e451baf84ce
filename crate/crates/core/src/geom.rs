//! 2D vectors and angles.
//!
//! Angles follow the usual counterclockwise convention measured from the
//! positive x-axis, reduced into `[0, 2π)`. The clockwise rotation that
//! brings a vector onto the positive x-axis has exactly this magnitude, so
//! [`rho`] serves both readings.

use core::f64::consts::{PI, TAU};
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Tolerance used for every angle comparison.
pub const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("direction of the zero vector is undefined")]
    ZeroVector,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite(), "non-finite Vec2 ({x}, {y})");
        Vec2 { x, y }
    }

    /// Unit vector at `angle` radians counterclockwise from +x.
    #[inline]
    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(libm::cos(angle), libm::sin(angle))
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

    /// `self / ‖self‖`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 {
            Some(self / n)
        } else {
            None
        }
    }

    /// Counterclockwise rotation by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Clockwise rotation by `angle` radians.
    #[inline]
    pub fn rotated_cw(self, angle: f64) -> Vec2 {
        self.rotated(-angle)
    }

    /// Scales the vector down so its norm is at most `max_norm`.
    pub fn clamp_norm(self, max_norm: f64) -> Vec2 {
        let n = self.norm();
        if n > max_norm && n > 0.0 {
            self * (max_norm / n)
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        *self = *self + rhs;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec2) {
        *self = *self - rhs;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// An angle in radians, always reduced into `[0, 2π)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Reduces an arbitrary (finite) radian value into `[0, 2π)`.
    pub fn new(radians: f64) -> Self {
        let mut a = libm::fmod(radians, TAU);
        if a < 0.0 {
            a += TAU;
        }
        // fmod of a tiny negative value plus TAU can round up to TAU itself
        if a >= TAU {
            a = 0.0;
        }
        Angle(a)
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Unit vector pointing along this angle.
    #[inline]
    pub fn unit(self) -> Vec2 {
        Vec2::from_angle(self.0)
    }

    /// `(self + offset) mod 2π`.
    #[inline]
    pub fn offset(self, radians: f64) -> Angle {
        Angle::new(self.0 + radians)
    }

    /// Approximate equality on the circle, within [`ANGLE_EPS`].
    pub fn approx_eq(self, other: Angle) -> bool {
        angular_distance(self, other) <= ANGLE_EPS
    }
}

/// Direction of `v`: the counterclockwise angle from +x to `v`.
pub fn rho(v: Vec2) -> Result<Angle, GeomError> {
    if v.x == 0.0 && v.y == 0.0 {
        return Err(GeomError::ZeroVector);
    }
    Ok(Angle::new(libm::atan2(v.y, v.x)))
}

/// Shortest distance between two angles on the circle, in `[0, π]`.
pub fn angular_distance(a: Angle, b: Angle) -> f64 {
    let d = if a.0 >= b.0 { a.0 - b.0 } else { b.0 - a.0 };
    let d = if d > PI { TAU - d } else { d };
    d.clamp(0.0, PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    use proptest::prelude::*;

    // Rotating `v` clockwise by rho(v) must land on the positive x-axis.
    fn aligns_with_x_axis(v: Vec2, angle: Angle) -> bool {
        let w = v.rotated_cw(angle.radians());
        w.x > 0.0 && libm::fabs(w.y) <= 1e-12 * v.norm().max(1.0)
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(Vec2::new(1.0, 0.0)).unwrap(), Angle::ZERO);
        assert!((rho(Vec2::new(0.0, 1.0)).unwrap().radians() - FRAC_PI_2).abs() < 1e-15);
        let v = Vec2::new(-1.0, -1.0);
        let a = rho(v).unwrap();
        assert!((a.radians() - 5.0 * FRAC_PI_4).abs() < 1e-15);
        assert!(aligns_with_x_axis(v, a));
    }

    #[test]
    fn rho_of_zero_is_an_error() {
        assert_eq!(rho(Vec2::ZERO), Err(GeomError::ZeroVector));
    }

    #[test]
    fn angle_reduction() {
        assert_eq!(Angle::new(TAU).radians(), 0.0);
        assert!((Angle::new(-FRAC_PI_2).radians() - 3.0 * FRAC_PI_2).abs() < 1e-15);
        assert!(Angle::new(-1e-300).radians() < TAU);
        assert!((Angle::new(5.0 * TAU + 0.5).radians() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn angular_distance_examples() {
        assert_eq!(angular_distance(Angle::ZERO, Angle::ZERO), 0.0);
        assert!((angular_distance(Angle::ZERO, Angle::new(PI)) - PI).abs() < 1e-15);
        // brute force: both directions around the circle, keep the shorter one
        let (a, b) = (Angle::new(FRAC_PI_4), Angle::new(7.0 * FRAC_PI_4));
        let fwd = Angle::new(b.radians() - a.radians()).radians();
        let back = Angle::new(a.radians() - b.radians()).radians();
        let brute = fwd.min(back);
        assert!((brute - FRAC_PI_2).abs() < 1e-12);
        assert!((angular_distance(a, b) - brute).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rho_is_rotation_equivariant(
            x in -100.0f64..100.0, y in -100.0f64..100.0, theta in -10.0f64..10.0
        ) {
            let v = Vec2::new(x, y);
            prop_assume!(v.norm() > 1e-6);
            let lhs = rho(v.rotated_cw(theta)).unwrap();
            let rhs = Angle::new(rho(v).unwrap().radians() - theta);
            prop_assert!(angular_distance(lhs, rhs) <= ANGLE_EPS);
            prop_assert!(aligns_with_x_axis(v, rho(v).unwrap()));
        }

        #[test]
        fn angular_distance_is_a_metric(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0) {
            let (a, b, c) = (Angle::new(a), Angle::new(b), Angle::new(c));
            let ab = angular_distance(a, b);
            prop_assert!((0.0..=PI).contains(&ab));
            prop_assert_eq!(ab, angular_distance(b, a));
            prop_assert!(angular_distance(a, c) <= ab + angular_distance(b, c) + ANGLE_EPS);
        }
    }
}
