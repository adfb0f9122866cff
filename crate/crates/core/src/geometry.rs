//! Planar geometry: placements, orientation vectors and the angle convention
//! shared by every engine.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

/// A point (or vector) in the simulation plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn dot(self, other: Point2D) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Point2D) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Point2D> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates the vector counter-clockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Point2D {
        let (s, c) = angle.sin_cos();
        Point2D::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2D {
    type Output = Point2D;
    fn add(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Point2D;
    fn sub(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, rhs: f64) -> Point2D {
        Point2D::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2D {
    type Output = Point2D;
    fn neg(self) -> Point2D {
        Point2D::new(-self.x, -self.y)
    }
}

/// Unit vector at `angle` measured from `+y`, positive toward `+x`.
///
/// Used for surface normals and beam propagation directions alike.
pub fn direction(angle: f64) -> Point2D {
    let (s, c) = angle.sin_cos();
    Point2D::new(s, c)
}

/// Inverse of [`direction`].
pub fn direction_angle(v: Point2D) -> f64 {
    v.x.atan2(v.y)
}

/// Unit tangent of a segment whose normal is at `normal_angle`.
///
/// For the untilted IRS (normal `+y`) this is `+x`, so the tangent is the
/// positive sense for reflection angles and surface coordinates.
pub fn tangent(normal_angle: f64) -> Point2D {
    let (s, c) = normal_angle.sin_cos();
    Point2D::new(c, -s)
}

/// Signed angle of `v` from the normal at `normal_angle`, positive toward
/// the tangent.
pub fn angle_from_normal(normal_angle: f64, v: Point2D) -> f64 {
    v.dot(tangent(normal_angle)).atan2(v.dot(direction(normal_angle)))
}

/// Incidence and reflection angles, both measured from the IRS normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair {
    pub theta_i: f64,
    pub theta_r: f64,
}

impl AnglePair {
    pub fn new(theta_i: f64, theta_r: f64) -> Result<Self> {
        for (name, v) in [("theta_i", theta_i), ("theta_r", theta_r)] {
            if !v.is_finite() || v.abs() >= FRAC_PI_2 {
                return Err(Error::invalid(name, format!("|{v}| must be below pi/2")));
            }
        }
        Ok(AnglePair { theta_i, theta_r })
    }

    pub fn from_degrees(theta_i: f64, theta_r: f64) -> Result<Self> {
        Self::new(theta_i.to_radians(), theta_r.to_radians())
    }

    pub fn is_specular(&self) -> bool {
        self.theta_i == self.theta_r
    }
}

/// Placement of transmitter, IRS and receive lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneLayout {
    pub tx_position: Point2D,
    pub irs_center: Point2D,
    /// Angle of the IRS surface normal from `+y`.
    pub irs_normal_angle: f64,
    pub rx_lens_center: Point2D,
    pub rx_lens_length: f64,
    /// Angle of the lens normal from `+y`; zero keeps the lens parallel to
    /// the x-axis.
    pub rx_lens_normal_angle: f64,
}

impl SceneLayout {
    /// Tx at (-200, 300) m, IRS at the origin on the x-axis and a 10 cm lens
    /// at (0, 500) m parallel to the x-axis.
    pub fn reference() -> Self {
        SceneLayout {
            tx_position: Point2D::new(-200.0, 300.0),
            irs_center: Point2D::ORIGIN,
            irs_normal_angle: 0.0,
            rx_lens_center: Point2D::new(0.0, 500.0),
            rx_lens_length: 0.1,
            rx_lens_normal_angle: 0.0,
        }
    }

    pub fn irs_normal(&self) -> Point2D {
        direction(self.irs_normal_angle)
    }

    pub fn irs_tangent(&self) -> Point2D {
        tangent(self.irs_normal_angle)
    }

    pub fn lens_tangent(&self) -> Point2D {
        tangent(self.rx_lens_normal_angle)
    }

    /// End points of the receive lens segment.
    pub fn lens_endpoints(&self) -> (Point2D, Point2D) {
        let half = self.lens_tangent() * (0.5 * self.rx_lens_length);
        (self.rx_lens_center - half, self.rx_lens_center + half)
    }

    /// Checks the layout invariants.
    pub fn validate(&self) -> Result<()> {
        let points = [self.tx_position, self.irs_center, self.rx_lens_center];
        if !points.iter().all(|p| p.is_finite())
            || !self.irs_normal_angle.is_finite()
            || !self.rx_lens_normal_angle.is_finite()
        {
            return Err(Error::NonFinite("scene layout".into()));
        }
        if !(self.rx_lens_length > 0.0) {
            return Err(Error::invalid("rx_lens_length", "must be positive"));
        }
        incidence_angle(self)?;
        reflection_angle_to_target(self)?;
        Ok(())
    }

    /// Incidence and reflection angles of the layout.
    pub fn angles(&self) -> Result<AnglePair> {
        AnglePair::new(incidence_angle(self)?, reflection_angle_to_target(self)?)
    }

    /// Mirror image of the scene across the IRS normal through its center.
    pub fn mirrored(&self) -> SceneLayout {
        let c = self.irs_center;
        let n = self.irs_normal();
        let reflect = |p: Point2D| {
            let v = p - c;
            c + n * (2.0 * v.dot(n)) - v
        };
        SceneLayout {
            tx_position: reflect(self.tx_position),
            rx_lens_center: reflect(self.rx_lens_center),
            rx_lens_normal_angle: 2.0 * self.irs_normal_angle - self.rx_lens_normal_angle,
            ..*self
        }
    }
}

fn front_side_angle(layout: &SceneLayout, p: Point2D, what: &str) -> Result<f64> {
    let v = p - layout.irs_center;
    if v.norm() == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "{what} coincides with the IRS center"
        )));
    }
    if v.dot(layout.irs_normal()) <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "{what} is on or behind the IRS line"
        )));
    }
    Ok(angle_from_normal(layout.irs_normal_angle, v))
}

/// Incidence angle of the Tx as seen from the IRS center.
///
/// Positive when the Tx lies on the negative-tangent side, so that the
/// specular direction has `theta_r == theta_i`.
pub fn incidence_angle(layout: &SceneLayout) -> Result<f64> {
    front_side_angle(layout, layout.tx_position, "Tx").map(|a| -a)
}

/// Angle from the IRS normal toward the Rx lens center.
pub fn reflection_angle_to_target(layout: &SceneLayout) -> Result<f64> {
    front_side_angle(layout, layout.rx_lens_center, "Rx lens")
}

/// Tx–IRS and IRS–Rx distances.
pub fn path_lengths(layout: &SceneLayout) -> Result<(f64, f64)> {
    let d1 = layout.tx_position.distance(layout.irs_center);
    let d2 = layout.irs_center.distance(layout.rx_lens_center);
    if d1 == 0.0 || d2 == 0.0 {
        return Err(Error::DegenerateGeometry(
            "Tx or Rx coincides with the IRS center".into(),
        ));
    }
    Ok((d1, d2))
}
