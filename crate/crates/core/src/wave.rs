//! Scalar wave-optics engine.
//!
//! Each unit cell re-radiates the incident field it intercepts as a 2D
//! point scatterer. For cell `n` at surface coordinate `s_n`, with
//! surface-flux amplitude `u_n`, phase shift `phi_n` and distance `rho_n` to
//! the observation point,
//!
//! ```text
//! E(r) = sum_n C * u_n * exp(j phi_n) * sqrt(cos theta_n) * exp(-j k rho_n) / sqrt(rho_n)
//! ```
//!
//! with `C = d / sqrt(lambda)` and `theta_n` the departure angle from the
//! surface normal. `|u_n|^2` is the power crossing the surface per meter
//! (transverse density times the cosine of the local incidence angle), so
//! the incidence obliquity is already folded into `u_n`. With half-wavelength
//! spacing the far-field power of any phase profile equals the intercepted
//! power exactly.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::beam::{BeamProfile, BeamSource};
use crate::exec::Execution;
use crate::geometry::{self, Point2D, SceneLayout};
use crate::phase::PhaseProfile;
use crate::{Error, Result};

pub type ComplexAmplitude = Complex64;

/// Minimum number of quadrature samples across a receive lens.
pub const MIN_LENS_SAMPLES: usize = 16;
/// Quadrature samples per local oscillation period of the field.
pub const SAMPLES_PER_PERIOD: f64 = 8.0;
/// Cells whose weight is below this fraction of the strongest are skipped.
const ACTIVE_THRESHOLD: f64 = 1e-9;

/// Uniformly spaced unit cells along a straight IRS segment.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCellGrid {
    center: Point2D,
    normal_angle: f64,
    spacing: f64,
    offsets: Vec<f64>,
    positions: Vec<Point2D>,
}

impl UnitCellGrid {
    pub fn new(center: Point2D, normal_angle: f64, count: usize, spacing: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("cell_count", "must be at least 1"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid("cell_spacing", "must be positive"));
        }
        if !center.is_finite() || !normal_angle.is_finite() {
            return Err(Error::NonFinite("grid placement".into()));
        }
        let t = geometry::tangent(normal_angle);
        let mid = 0.5 * (count as f64 - 1.0);
        let offsets: Vec<f64> = (0..count).map(|i| (i as f64 - mid) * spacing).collect();
        let positions = offsets.iter().map(|&s| center + t * s).collect();
        Ok(UnitCellGrid {
            center,
            normal_angle,
            spacing,
            offsets,
            positions,
        })
    }

    /// Grid of length `length` (rounded to a whole number of cells, at least
    /// one) centred on the scene's IRS.
    pub fn for_scene(scene: &SceneLayout, length: f64, spacing: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::invalid("irs_length", "must be positive"));
        }
        let count = ((length / spacing).round() as usize).max(1);
        Self::new(scene.irs_center, scene.irs_normal_angle, count, spacing)
    }

    /// Same cells rotated about the center so the normal turns by `-tilt`.
    pub fn tilted(&self, tilt: f64) -> Result<Self> {
        Self::new(self.center, self.normal_angle - tilt, self.len(), self.spacing)
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn center(&self) -> Point2D {
        self.center
    }

    pub fn normal_angle(&self) -> f64 {
        self.normal_angle
    }

    pub fn normal(&self) -> Point2D {
        geometry::direction(self.normal_angle)
    }

    pub fn tangent(&self) -> Point2D {
        geometry::tangent(self.normal_angle)
    }

    /// `L = N d`.
    pub fn length(&self) -> f64 {
        self.len() as f64 * self.spacing
    }

    /// Surface coordinate of each cell relative to the center.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn positions(&self) -> &[Point2D] {
        &self.positions
    }

    /// Whether `p` lies on the (closed) IRS segment.
    pub fn contains(&self, p: Point2D) -> bool {
        let v = p - self.center;
        let h = v.dot(self.normal());
        let s = v.dot(self.tangent());
        h.abs() <= 1e-12 * (1.0 + v.norm()) && s.abs() <= 0.5 * self.length()
    }
}

/// Sampled field along an observation line.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    pub sample_points: Vec<Point2D>,
    pub amplitudes: Vec<ComplexAmplitude>,
    /// `|E|^2`, W per transverse meter.
    pub power_density: Vec<f64>,
}

/// Per-cell incident surface-flux amplitude.
///
/// Gaussian beams are evaluated at each cell; plane waves are truncated to
/// the grid. Cells lit from behind receive nothing.
pub fn incident_field_on_irs(beam: &BeamSource, grid: &UnitCellGrid) -> Result<Vec<ComplexAmplitude>> {
    beam.validate()?;
    let n = grid.normal();
    grid.positions()
        .iter()
        .map(|&p| {
            let cos_in = (-beam.local_direction(p).dot(n)).max(0.0);
            let u = beam.field_at(p) * cos_in.sqrt();
            if u.is_finite() {
                Ok(u)
            } else {
                Err(Error::NonFinite("incident field".into()))
            }
        })
        .collect()
}

/// Power intercepted by the grid, `sum |u_n|^2 d`.
pub fn incident_power(grid: &UnitCellGrid, incident: &[ComplexAmplitude]) -> f64 {
    incident.iter().map(|u| u.norm_sqr()).sum::<f64>() * grid.spacing()
}

/// The re-radiated field of an illuminated, phase-programmed grid.
#[derive(Debug, Clone)]
pub struct ReflectedField<'g> {
    grid: &'g UnitCellGrid,
    wavenumber: f64,
    /// `(s_n, s_n^2, C u_n e^{j phi_n})` for cells that matter.
    active: Vec<(f64, f64, Complex64)>,
}

impl<'g> ReflectedField<'g> {
    pub fn new(
        grid: &'g UnitCellGrid,
        incident: &[ComplexAmplitude],
        phases: &PhaseProfile,
        wavelength: f64,
    ) -> Result<Self> {
        if incident.len() != grid.len() || phases.len() != grid.len() {
            return Err(Error::invalid(
                "phases",
                format!(
                    "grid has {} cells but {} incident samples and {} phases were given",
                    grid.len(),
                    incident.len(),
                    phases.len()
                ),
            ));
        }
        if !(wavelength > 0.0) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        let c = grid.spacing() / wavelength.sqrt();
        let weights: Vec<Complex64> = incident
            .iter()
            .zip(phases.phases())
            .map(|(&u, &phi)| u * Complex64::from_polar(c, phi))
            .collect();
        let peak = weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
        let active = grid
            .offsets()
            .iter()
            .zip(&weights)
            .filter(|(_, w)| peak > 0.0 && w.norm() >= ACTIVE_THRESHOLD * peak)
            .map(|(&s, &w)| (s, s * s, w))
            .collect();
        Ok(ReflectedField {
            grid,
            wavenumber: TAU / wavelength,
            active,
        })
    }

    /// Illuminates `grid` with `beam` and applies `phases`.
    pub fn from_beam(grid: &'g UnitCellGrid, beam: &BeamSource, phases: &PhaseProfile) -> Result<Self> {
        let incident = incident_field_on_irs(beam, grid)?;
        Self::new(grid, &incident, phases, beam.wavelength)
    }

    pub fn grid(&self) -> &UnitCellGrid {
        self.grid
    }

    /// Surface-coordinate range of cells carrying non-negligible power.
    pub fn active_extent(&self) -> Option<(f64, f64)> {
        Some((self.active.first()?.0, self.active.last()?.0))
    }

    /// Complex field at `p`.
    pub fn at(&self, p: Point2D) -> Result<ComplexAmplitude> {
        if self.grid.contains(p) {
            return Err(Error::DegenerateGeometry(
                "observation point lies on the IRS".into(),
            ));
        }
        let v = p - self.grid.center();
        let h = v.dot(self.grid.normal());
        if h <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let q = v.dot(self.grid.tangent());
        let r0_sq = v.norm_sq();
        let r0 = r0_sq.sqrt();
        let k = self.wavenumber;
        let mut sum = Complex64::new(0.0, 0.0);
        for &(s, s2, w) in &self.active {
            // rho_n - r0 without cancellation.
            let excess = s2 - 2.0 * s * q;
            let rho = (r0_sq + excess).sqrt();
            let delta = excess / (rho + r0);
            let (sin, cos) = (-k * delta).sin_cos();
            sum += w * Complex64::new(cos, sin) / rho;
        }
        let common = Complex64::from_polar(h.sqrt(), -(k * r0).rem_euclid(TAU));
        let e = sum * common;
        if e.is_finite() {
            Ok(e)
        } else {
            Err(Error::NonFinite("scattered field".into()))
        }
    }

    /// Far-field pattern `F(theta)`: at distance `R -> inf` along angle
    /// `theta` from the normal, `|E|^2 = |F|^2 / R`.
    pub fn far_field(&self, theta: f64) -> ComplexAmplitude {
        let cos = theta.cos();
        if cos <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ks = self.wavenumber * theta.sin();
        let sum: Complex64 = self
            .active
            .iter()
            .map(|&(s, _, w)| w * Complex64::from_polar(1.0, ks * s))
            .sum();
        sum * cos.sqrt()
    }

    /// Power radiated into the front half-plane, `int |F|^2 dtheta`, by the
    /// composite midpoint rule with `samples` points.
    pub fn far_field_power(&self, samples: usize, exec: Execution) -> f64 {
        let h = PI / samples as f64;
        exec.map_indexed(samples, |i| {
            self.far_field(-0.5 * PI + (i as f64 + 0.5) * h).norm_sqr()
        })
        .into_iter()
        .sum::<f64>()
            * h
    }

    /// Power through a circular arc of radius `radius` about the grid
    /// center spanning the front half-plane, from the exact field.
    pub fn arc_power(&self, radius: f64, samples: usize, exec: Execution) -> Result<f64> {
        let h = PI / samples as f64;
        let values = exec.map_indexed(samples, |i| {
            let theta = -0.5 * PI + (i as f64 + 0.5) * h;
            let dir = self.grid.normal() * theta.cos() + self.grid.tangent() * theta.sin();
            self.at(self.grid.center() + dir * radius).map(|e| e.norm_sqr())
        });
        let mut total = 0.0;
        for v in values {
            total += v?;
        }
        Ok(total * h * radius)
    }
}

/// Field scattered by `grid` toward a single observation point.
pub fn scatter_field(
    grid: &UnitCellGrid,
    incident: &[ComplexAmplitude],
    phases: &PhaseProfile,
    wavelength: f64,
    observation: Point2D,
) -> Result<ComplexAmplitude> {
    ReflectedField::new(grid, incident, phases, wavelength)?.at(observation)
}

/// Samples the reflected power density along the horizontal line
/// `y = line_y` for `x` in `x_range`.
pub fn power_density_profile(
    beam: &BeamSource,
    grid: &UnitCellGrid,
    phases: &PhaseProfile,
    line_y: f64,
    x_range: (f64, f64),
    n_samples: usize,
) -> Result<FieldProfile> {
    power_density_profile_with(beam, grid, phases, line_y, x_range, n_samples, Execution::default())
}

pub fn power_density_profile_with(
    beam: &BeamSource,
    grid: &UnitCellGrid,
    phases: &PhaseProfile,
    line_y: f64,
    x_range: (f64, f64),
    n_samples: usize,
    exec: Execution,
) -> Result<FieldProfile> {
    if n_samples < 2 {
        return Err(Error::invalid("n_samples", "must be at least 2"));
    }
    let field = ReflectedField::from_beam(grid, beam, phases)?;
    let sample_points = line_samples(x_range, line_y, n_samples);
    let amplitudes = exec
        .map_indexed(n_samples, |i| field.at(sample_points[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let power_density = amplitudes.iter().map(|e| e.norm_sqr()).collect();
    Ok(FieldProfile {
        sample_points,
        amplitudes,
        power_density,
    })
}

/// Evenly spaced points from `x_range.0` to `x_range.1` inclusive.
pub fn line_samples(x_range: (f64, f64), y: f64, n: usize) -> Vec<Point2D> {
    let step = (x_range.1 - x_range.0) / (n.max(2) - 1) as f64;
    (0..n)
        .map(|i| Point2D::new(x_range.0 + i as f64 * step, y))
        .collect()
}

/// Number of midpoint samples needed across the receive lens.
///
/// The local spatial frequency of the field along the lens is bounded by
/// `k` times the spread of direction cosines (along the lens) from the lit
/// part of the IRS to the lens.
pub fn lens_sample_count(field: &ReflectedField<'_>, scene: &SceneLayout) -> usize {
    match field.active_extent() {
        Some(extent) => lens_samples_for(field.grid(), extent, scene, field.wavenumber),
        None => MIN_LENS_SAMPLES,
    }
}

/// Samples needed when cells between surface coordinates `extent` radiate.
/// Taking the whole grid gives an upper bound usable before any field is
/// computed.
pub fn lens_samples_for(grid: &UnitCellGrid, extent: (f64, f64), scene: &SceneLayout, wavenumber: f64) -> usize {
    let t_lens = scene.lens_tangent();
    let (a, b) = scene.lens_endpoints();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in [extent.0, extent.1] {
        let cell = grid.center() + grid.tangent() * s;
        for p in [a, b] {
            if let Some(dir) = (p - cell).normalized() {
                let c = dir.dot(t_lens);
                lo = lo.min(c);
                hi = hi.max(c);
            }
        }
    }
    let bandwidth = wavenumber * (hi - lo).max(0.0);
    let periods = scene.rx_lens_length * bandwidth / TAU;
    ((SAMPLES_PER_PERIOD * periods).ceil() as usize).max(MIN_LENS_SAMPLES)
}

/// Power collected by the receive lens, watts.
///
/// Integrates the flux `|E|^2 cos(alpha)` over the lens segment, where
/// `alpha` is the angle between the lens normal and the ray from the IRS
/// center. For a lens facing the IRS this is plain `int |E|^2 ds`.
pub fn lens_captured_power(
    scene: &SceneLayout,
    beam: &BeamSource,
    grid: &UnitCellGrid,
    phases: &PhaseProfile,
) -> Result<f64> {
    lens_captured_power_with(scene, beam, grid, phases, None, Execution::default())
}

/// As [`lens_captured_power`]; `samples` overrides the adaptive count.
pub fn lens_captured_power_with(
    scene: &SceneLayout,
    beam: &BeamSource,
    grid: &UnitCellGrid,
    phases: &PhaseProfile,
    samples: Option<usize>,
    exec: Execution,
) -> Result<f64> {
    scene.validate()?;
    let field = ReflectedField::from_beam(grid, beam, phases)?;
    field_lens_power(&field, scene, samples, exec)
}

/// Lens power for an already-built field.
pub fn field_lens_power(
    field: &ReflectedField<'_>,
    scene: &SceneLayout,
    samples: Option<usize>,
    exec: Execution,
) -> Result<f64> {
    if field.active.is_empty() {
        return Ok(0.0);
    }
    let m = samples.unwrap_or_else(|| lens_sample_count(field, scene));
    let (a, _) = scene.lens_endpoints();
    let t_lens = scene.lens_tangent();
    let n_lens = geometry::direction(scene.rx_lens_normal_angle);
    let h = scene.rx_lens_length / m as f64;
    let center = field.grid().center();
    let values = exec.map_indexed(m, |i| {
        let p = a + t_lens * ((i as f64 + 0.5) * h);
        let cos_alpha = (p - center)
            .normalized()
            .map_or(1.0, |d| d.dot(n_lens).abs());
        field.at(p).map(|e| e.norm_sqr() * cos_alpha)
    });
    let mut total = 0.0;
    for v in values {
        total += v?;
    }
    Ok(total * h)
}

/// Total power carried by `beam` toward the grid: the Gaussian total, or
/// the plane-wave density times the projected grid aperture.
pub fn source_power(beam: &BeamSource, grid: &UnitCellGrid) -> f64 {
    match beam.profile {
        BeamProfile::Gaussian { total_power, .. } => total_power,
        BeamProfile::Plane { power_density } => {
            power_density * grid.length() * (-beam.direction().dot(grid.normal())).max(0.0)
        }
    }
}
