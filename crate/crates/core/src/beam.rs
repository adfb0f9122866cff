//! Optical sources illuminating the IRS.
//!
//! Fields are scalar complex amplitudes normalised so that `|E|^2` is the
//! power density per transverse meter (W/m) in the 2D plane.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::geometry::{self, Point2D};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamProfile {
    /// Paraxial Gaussian beam with its waist at the axis origin.
    Gaussian { waist_radius: f64, total_power: f64 },
    /// Uniform plane wave; `power_density` is in W per transverse meter.
    /// Its aperture is the IRS itself.
    Plane { power_density: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSource {
    pub profile: BeamProfile,
    pub wavelength: f64,
    /// Waist location (Gaussian) or phase reference point (plane wave).
    pub axis_origin: Point2D,
    /// Propagation direction, measured from `+y` toward `+x`.
    pub axis_angle: f64,
}

impl BeamSource {
    /// Gaussian beam from `origin` whose axis passes through `target`.
    pub fn gaussian_aimed(
        origin: Point2D,
        target: Point2D,
        wavelength: f64,
        waist_radius: f64,
        total_power: f64,
    ) -> Result<Self> {
        let beam = BeamSource {
            profile: BeamProfile::Gaussian {
                waist_radius,
                total_power,
            },
            wavelength,
            axis_origin: origin,
            axis_angle: aim_angle(origin, target)?,
        };
        beam.validate()?;
        Ok(beam)
    }

    /// Plane wave of the given transverse power density travelling from
    /// `origin` toward `target`.
    pub fn plane_aimed(
        origin: Point2D,
        target: Point2D,
        wavelength: f64,
        power_density: f64,
    ) -> Result<Self> {
        let beam = BeamSource {
            profile: BeamProfile::Plane { power_density },
            wavelength,
            axis_origin: origin,
            axis_angle: aim_angle(origin, target)?,
        };
        beam.validate()?;
        Ok(beam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        if !self.axis_origin.is_finite() || !self.axis_angle.is_finite() {
            return Err(Error::NonFinite("beam axis".into()));
        }
        match self.profile {
            BeamProfile::Gaussian {
                waist_radius,
                total_power,
            } => {
                if !(waist_radius > 0.0 && waist_radius.is_finite()) {
                    return Err(Error::invalid("waist_radius", "must be positive"));
                }
                if !(total_power > 0.0 && total_power.is_finite()) {
                    return Err(Error::invalid("total_power", "must be positive"));
                }
            }
            BeamProfile::Plane { power_density } => {
                if !(power_density > 0.0 && power_density.is_finite()) {
                    return Err(Error::invalid("power_density", "must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn direction(&self) -> Point2D {
        geometry::direction(self.axis_angle)
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.profile, BeamProfile::Gaussian { .. })
    }

    /// Total power for Gaussian beams; plane waves carry no finite total.
    pub fn total_power(&self) -> Option<f64> {
        match self.profile {
            BeamProfile::Gaussian { total_power, .. } => Some(total_power),
            BeamProfile::Plane { .. } => None,
        }
    }

    pub fn waist_radius(&self) -> Option<f64> {
        match self.profile {
            BeamProfile::Gaussian { waist_radius, .. } => Some(waist_radius),
            BeamProfile::Plane { .. } => None,
        }
    }

    /// Rayleigh range `pi w0^2 / lambda` (Gaussian beams).
    pub fn rayleigh_range(&self) -> Option<f64> {
        self.waist_radius()
            .map(|w0| PI * w0 * w0 / self.wavelength)
    }

    /// Beam radius `w(z)` at axial distance `z` from the waist.
    pub fn beam_radius(&self, z: f64) -> Option<f64> {
        let w0 = self.waist_radius()?;
        let zr = self.rayleigh_range()?;
        Some(w0 * (1.0 + (z / zr).powi(2)).sqrt())
    }

    /// Wavefront curvature `1/R(z)`; zero at the waist.
    pub fn wavefront_curvature(&self, z: f64) -> Option<f64> {
        let zr = self.rayleigh_range()?;
        Some(z / (z * z + zr * zr))
    }

    /// Beam-local coordinates `(z, x)` of a global point: `z` along the
    /// axis from the origin, `x` transverse.
    pub fn to_local(&self, p: Point2D) -> (f64, f64) {
        let rel = p - self.axis_origin;
        (
            rel.dot(self.direction()),
            rel.dot(geometry::tangent(self.axis_angle)),
        )
    }

    /// Shifts the beam axis sideways by `offset` meters.
    pub fn shifted(&self, offset: f64) -> BeamSource {
        BeamSource {
            axis_origin: self.axis_origin + geometry::tangent(self.axis_angle) * offset,
            ..*self
        }
    }

    /// Gaussian field in beam-local coordinates.
    ///
    /// `|E|^2` integrates over `x` to the total power at every `z`.
    pub fn gaussian_field_local(&self, z: f64, x: f64) -> Result<Complex64> {
        let BeamProfile::Gaussian {
            waist_radius,
            total_power,
        } = self.profile
        else {
            return Err(Error::invalid("beam", "not a Gaussian beam"));
        };
        let k = self.wavenumber();
        let zr = PI * waist_radius * waist_radius / self.wavelength;
        let w = waist_radius * (1.0 + (z / zr).powi(2)).sqrt();
        let inv_r = z / (z * z + zr * zr);
        let gouy = (z / zr).atan();
        let amplitude = (total_power * FRAC_2_PI.sqrt() / w).sqrt() * (-(x * x) / (w * w)).exp();
        let phase = -(k * z + 0.5 * k * x * x * inv_r - 0.5 * gouy);
        Ok(Complex64::from_polar(amplitude, phase))
    }

    /// Field at a global point. Plane waves are unbounded here; their
    /// aperture is applied by the illuminated grid.
    pub fn field_at(&self, p: Point2D) -> Complex64 {
        let (z, x) = self.to_local(p);
        match self.profile {
            BeamProfile::Gaussian { .. } => self
                .gaussian_field_local(z, x)
                .expect("profile checked"),
            BeamProfile::Plane { power_density } => {
                Complex64::from_polar(power_density.sqrt(), -self.wavenumber() * z)
            }
        }
    }

    /// Local propagation direction at `p`: radial from the waist for a
    /// Gaussian beam, the axis for a plane wave.
    pub fn local_direction(&self, p: Point2D) -> Point2D {
        match self.profile {
            BeamProfile::Gaussian { .. } => (p - self.axis_origin)
                .normalized()
                .unwrap_or_else(|| self.direction()),
            BeamProfile::Plane { .. } => self.direction(),
        }
    }
}

fn aim_angle(origin: Point2D, target: Point2D) -> Result<f64> {
    let v = target - origin;
    if v.norm() == 0.0 {
        return Err(Error::DegenerateGeometry(
            "beam origin coincides with its target".into(),
        ));
    }
    Ok(geometry::direction_angle(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn beam() -> BeamSource {
        BeamSource::gaussian_aimed(
            Point2D::new(-200.0, 300.0),
            Point2D::ORIGIN,
            1.55e-6,
            1e-3,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn peak_density_at_waist() {
        let b = beam();
        let e = b.gaussian_field_local(0.0, 0.0).unwrap();
        let expected = (2.0 / PI).sqrt() / 1e-3;
        assert_relative_eq!(e.norm_sqr(), expected, max_relative = 1e-12);
    }

    #[test]
    fn power_is_conserved_along_axis() {
        let b = beam();
        for z in [0.0, 2.0, 100.0, 360.0] {
            let w = b.beam_radius(z).unwrap();
            // Composite midpoint rule over +-8 beam radii.
            let n = 20_000;
            let h = 16.0 * w / n as f64;
            let total: f64 = (0..n)
                .map(|i| {
                    let x = -8.0 * w + (i as f64 + 0.5) * h;
                    b.gaussian_field_local(z, x).unwrap().norm_sqr() * h
                })
                .sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn rayleigh_identity() {
        let b = beam();
        let zr = b.rayleigh_range().unwrap();
        assert_relative_eq!(b.beam_radius(zr).unwrap(), 2f64.sqrt() * 1e-3, max_relative = 1e-14);
    }

    #[test]
    fn plane_wave_is_not_gaussian() {
        let p = BeamSource::plane_aimed(Point2D::new(0.0, 1.0), Point2D::ORIGIN, 1e-6, 1.0)
            .unwrap();
        assert!(p.gaussian_field_local(0.0, 0.0).is_err());
        assert_relative_eq!(p.field_at(Point2D::new(3.0, 0.0)).norm(), 1.0);
    }

    #[test]
    fn validation() {
        let mut b = beam();
        b.wavelength = 0.0;
        assert!(b.validate().is_err());
        assert!(BeamSource::gaussian_aimed(Point2D::ORIGIN, Point2D::ORIGIN, 1e-6, 1e-3, 1.0).is_err());
        assert!(
            BeamSource::gaussian_aimed(Point2D::new(0.0, 1.0), Point2D::ORIGIN, 1e-6, -1.0, 1.0)
                .is_err()
        );
    }
}
