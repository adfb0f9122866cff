//! Geometric-optics approximation: the beam is a ray bundle with a Gaussian
//! (or top-hat) envelope whose width follows the wavefront curvature.
//! Diffraction at the IRS and lens edges is ignored; apertures only clip
//! power via error-function integrals.

use std::f64::consts::{FRAC_2_PI, SQRT_2};

use crate::beam::{BeamProfile, BeamSource};
use crate::geometry::{self, Point2D, SceneLayout};
use crate::phase::IrsDesign;
use crate::wave::UnitCellGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    /// `exp(-2 x^2 / w^2)` intensity, `w` the 1/e^2 radius.
    Gaussian,
    /// Uniform intensity over `|x| <= w`.
    TopHat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoBeamState {
    pub axis_origin: Point2D,
    pub axis_angle: f64,
    pub beam_radius_at_origin: f64,
    /// `1/R`; positive diverging, negative converging.
    pub wavefront_curvature: f64,
    /// Power carried by the bundle, watts.
    pub power: f64,
    pub envelope: Envelope,
}

impl GoBeamState {
    pub fn direction(&self) -> Point2D {
        geometry::direction(self.axis_angle)
    }

    /// Envelope radius a distance `z` down the axis.
    pub fn radius_at(&self, z: f64) -> f64 {
        self.beam_radius_at_origin * (1.0 + z * self.wavefront_curvature).abs()
    }

    /// Transverse power density (W/m) at `p`.
    pub fn density_at(&self, p: Point2D) -> f64 {
        let rel = p - self.axis_origin;
        let z = rel.dot(self.direction());
        let x = rel.dot(geometry::tangent(self.axis_angle));
        if z < 0.0 {
            return 0.0;
        }
        let w = self.radius_at(z);
        if w == 0.0 {
            return 0.0;
        }
        match self.envelope {
            Envelope::Gaussian => self.power * FRAC_2_PI.sqrt() / w * (-2.0 * x * x / (w * w)).exp(),
            Envelope::TopHat => {
                if x.abs() <= w {
                    self.power / (2.0 * w)
                } else {
                    0.0
                }
            }
        }
    }

    /// Fraction of the bundle's power between transverse offsets `a < b`
    /// at axial distance `z`.
    pub fn fraction_between(&self, z: f64, a: f64, b: f64) -> f64 {
        let w = self.radius_at(z);
        if w == 0.0 {
            return if a <= 0.0 && 0.0 <= b { 1.0 } else { 0.0 };
        }
        envelope_fraction(self.envelope, w, a, b)
    }
}

fn envelope_fraction(envelope: Envelope, w: f64, a: f64, b: f64) -> f64 {
    match envelope {
        Envelope::Gaussian => 0.5 * (libm::erf(SQRT_2 * b / w) - libm::erf(SQRT_2 * a / w)),
        Envelope::TopHat => ((b.min(w) - a.max(-w)) / (2.0 * w)).clamp(0.0, 1.0),
    }
    .max(0.0)
}

/// Where the beam axis meets the grid line: the point and its surface
/// coordinate.
fn axis_hit(beam: &BeamSource, grid: &UnitCellGrid) -> Result<(Point2D, f64)> {
    let dir = beam.direction();
    let n = grid.normal();
    let toward = dir.dot(n);
    if toward >= 0.0 {
        return Err(Error::DegenerateGeometry(
            "beam axis does not travel toward the IRS face".into(),
        ));
    }
    let z = (grid.center() - beam.axis_origin).dot(n) / toward;
    if z <= 0.0 {
        return Err(Error::DegenerateGeometry("IRS is behind the source".into()));
    }
    let hit = beam.axis_origin + dir * z;
    let s = (hit - grid.center()).dot(grid.tangent());
    Ok((hit, s))
}

/// Incident bundle evaluated where its axis meets the IRS.
pub fn incident_state(beam: &BeamSource, grid: &UnitCellGrid) -> Result<GoBeamState> {
    let (hit, _) = axis_hit(beam, grid)?;
    let z = (hit - beam.axis_origin).dot(beam.direction());
    Ok(match beam.profile {
        BeamProfile::Gaussian { total_power, .. } => GoBeamState {
            axis_origin: hit,
            axis_angle: beam.axis_angle,
            beam_radius_at_origin: beam.beam_radius(z).expect("gaussian"),
            wavefront_curvature: beam.wavefront_curvature(z).expect("gaussian"),
            power: total_power,
            envelope: Envelope::Gaussian,
        },
        BeamProfile::Plane { power_density } => {
            // The plane wave's aperture is the projected IRS.
            let cos_in = -beam.direction().dot(grid.normal());
            let half = 0.5 * grid.length() * cos_in;
            GoBeamState {
                axis_origin: hit,
                axis_angle: beam.axis_angle,
                beam_radius_at_origin: half,
                wavefront_curvature: 0.0,
                power: power_density * 2.0 * half,
                envelope: Envelope::TopHat,
            }
        }
    })
}

/// Fraction of the incident bundle falling on the IRS segment.
pub fn irs_clipping(state: &GoBeamState, grid: &UnitCellGrid) -> f64 {
    let cos_in = -state.direction().dot(grid.normal());
    let s_hit = (state.axis_origin - grid.center()).dot(grid.tangent());
    let half = 0.5 * grid.length();
    // Surface coordinate s maps to transverse offset (s - s_hit) cos_in.
    let a = (-half - s_hit) * cos_in;
    let b = (half - s_hit) * cos_in;
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    envelope_fraction(state.envelope, state.beam_radius_at_origin, a, b)
}

/// Reflects the bundle off the IRS according to the design.
///
/// `grid` is the untilted IRS; mirror designs rotate it. The returned state
/// starts at the hit point and carries the clipped power.
pub fn go_reflect(beam: &BeamSource, grid: &UnitCellGrid, design: &IrsDesign) -> Result<GoBeamState> {
    let surface = match design {
        IrsDesign::Mirror(m) => grid.tilted(m.tilt_angle)?,
        _ => grid.clone(),
    };
    let (_, s_hit) = axis_hit(beam, &surface)?;
    if s_hit.abs() > 0.5 * surface.length() {
        return Err(Error::MissedAperture(s_hit));
    }
    let incident = incident_state(beam, &surface)?;
    let clip = irs_clipping(&incident, &surface);
    let n = surface.normal();
    let t = surface.tangent();
    let d_in = incident.direction();
    let cos_in = -d_in.dot(n);

    let (d_out, curvature_out) = match strip_quantization(design) {
        IrsDesign::Uniform | IrsDesign::Mirror(_) => {
            (d_in - n * (2.0 * d_in.dot(n)), incident.wavefront_curvature)
        }
        IrsDesign::Linear(angles) => {
            // Phase-gradient law: tangential wavenumber shifts by
            // k (sin theta_r - sin theta_i).
            let sin_out = d_in.dot(t) + angles.theta_r.sin() - angles.theta_i.sin();
            if sin_out.abs() >= 1.0 {
                return Err(Error::DegenerateGeometry(
                    "linear design steers the beam past grazing".into(),
                ));
            }
            let cos_out = (1.0 - sin_out * sin_out).sqrt();
            let c = incident.wavefront_curvature * (cos_in / cos_out).powi(2);
            (n * cos_out + t * sin_out, c)
        }
        IrsDesign::Focusing(focus) => {
            let v = *focus - incident.axis_origin;
            let f = v.norm();
            (v * (1.0 / f), -1.0 / f)
        }
        IrsDesign::Quantized { .. } => unreachable!("stripped above"),
    };
    let cos_out = d_out.dot(n);
    if cos_out <= 0.0 {
        return Err(Error::DegenerateGeometry("reflected axis runs into the IRS".into()));
    }
    let scale = match incident.envelope {
        // A top-hat spans the whole IRS; its width follows the projection.
        Envelope::TopHat | Envelope::Gaussian => cos_out / cos_in,
    };
    Ok(GoBeamState {
        axis_origin: incident.axis_origin,
        axis_angle: geometry::direction_angle(d_out),
        beam_radius_at_origin: incident.beam_radius_at_origin * scale,
        wavefront_curvature: curvature_out,
        power: incident.power * clip,
        envelope: incident.envelope,
    })
}

fn strip_quantization(design: &IrsDesign) -> &IrsDesign {
    match design {
        IrsDesign::Quantized { base, .. } => strip_quantization(base),
        d => d,
    }
}

/// Fraction of a bundle collected by the scene's receive lens.
///
/// The lens end points are projected onto the transverse axis, which
/// accounts for foreshortening of a tilted lens.
pub fn lens_fraction(state: &GoBeamState, scene: &SceneLayout) -> f64 {
    let dir = state.direction();
    let perp = geometry::tangent(state.axis_angle);
    let z = (scene.rx_lens_center - state.axis_origin).dot(dir);
    if z <= 0.0 {
        return 0.0;
    }
    let (a, b) = scene.lens_endpoints();
    let xa = (a - state.axis_origin).dot(perp);
    let xb = (b - state.axis_origin).dot(perp);
    state.fraction_between(z, xa.min(xb), xa.max(xb))
}

/// Geometric-optics estimate of the power collected by the lens, watts.
pub fn go_captured_power(
    scene: &SceneLayout,
    beam: &BeamSource,
    grid: &UnitCellGrid,
    design: &IrsDesign,
) -> Result<f64> {
    scene.validate()?;
    let reflected = go_reflect(beam, grid, design)?;
    Ok(reflected.power * lens_fraction(&reflected, scene))
}
