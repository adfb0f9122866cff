//! Phase-shift designs for meta-surfaces, mirror orientation, phase
//! quantisation and IRS-induced delay dispersion.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::beam::BeamSource;
use crate::geometry::{AnglePair, Point2D, SceneLayout};
use crate::wave::{self, UnitCellGrid};
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignTag {
    Uniform,
    Linear,
    Focusing,
    Quantized(u32),
    Mirror,
}

/// One phase shift per unit cell, each in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    phases: Vec<f64>,
    tag: DesignTag,
}

impl PhaseProfile {
    /// Wraps `phases` into `[0, 2 pi)`.
    pub fn new(phases: Vec<f64>, tag: DesignTag) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("phase profile".into()));
        }
        let phases = phases.into_iter().map(wrap_phase).collect();
        Ok(PhaseProfile { phases, tag })
    }

    /// All-zero profile (specular reflection).
    pub fn uniform(len: usize) -> Self {
        PhaseProfile {
            phases: vec![0.0; len],
            tag: DesignTag::Uniform,
        }
    }

    /// Zero profile for a mirror.
    pub fn mirror(len: usize) -> Self {
        PhaseProfile {
            phases: vec![0.0; len],
            tag: DesignTag::Mirror,
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn tag(&self) -> DesignTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Maps any finite phase into `[0, 2 pi)`.
pub fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2 pi for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Anomalous-reflection gradient `k (sin theta_i - sin theta_r) s_n`.
///
/// With the incident phase convention of [`wave::incident_field_on_irs`]
/// this sends a plane wave arriving at `theta_i` toward `theta_r`.
pub fn linear_profile(grid: &UnitCellGrid, angles: AnglePair, wavelength: f64) -> PhaseProfile {
    let k = TAU / wavelength;
    let slope = k * (angles.theta_i.sin() - angles.theta_r.sin());
    PhaseProfile {
        phases: grid.offsets().iter().map(|&s| wrap_phase(slope * s)).collect(),
        tag: DesignTag::Linear,
    }
}

/// Phase-conjugating design that brings every cell's contribution to
/// `focus` in phase. The center cell (index `N / 2`) gets phase zero.
pub fn focusing_profile(grid: &UnitCellGrid, beam: &BeamSource, focus: Point2D) -> Result<PhaseProfile> {
    let incident = wave::incident_field_on_irs(beam, grid)?;
    focusing_profile_for(grid, &incident, beam.wavelength, focus)
}

/// As [`focusing_profile`] for an explicit incident field.
pub fn focusing_profile_for(
    grid: &UnitCellGrid,
    incident: &[wave::ComplexAmplitude],
    wavelength: f64,
    focus: Point2D,
) -> Result<PhaseProfile> {
    if incident.len() != grid.len() {
        return Err(Error::invalid("incident", "length differs from the grid"));
    }
    if !focus.is_finite() || grid.contains(focus) {
        return Err(Error::DegenerateGeometry("focus lies on the IRS".into()));
    }
    let k = TAU / wavelength;
    let v = focus - grid.center();
    let q = v.dot(grid.tangent());
    let r0_sq = v.norm_sq();
    let r0 = r0_sq.sqrt();
    // Same stable path-excess evaluation as the scattering kernel, so the
    // contributions cancel to rounding at the focus.
    let raw: Vec<f64> = grid
        .offsets()
        .iter()
        .zip(incident)
        .map(|(&s, u)| {
            let excess = s * s - 2.0 * s * q;
            let rho = (r0_sq + excess).sqrt();
            let delta = excess / (rho + r0);
            -u.arg() + (k * delta).rem_euclid(TAU)
        })
        .collect();
    let reference = raw[grid.len() / 2];
    PhaseProfile::new(
        raw.into_iter().map(|p| p - reference).collect(),
        DesignTag::Focusing,
    )
}

/// Orientation of a rigid mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorConfig {
    /// Rotation of the segment about its center; positive turns the normal
    /// toward the Tx side (the negative tangent).
    pub tilt_angle: f64,
}

impl MirrorConfig {
    pub fn new(tilt_angle: f64) -> Result<Self> {
        if !tilt_angle.is_finite() || tilt_angle.abs() >= FRAC_PI_2 {
            return Err(Error::invalid("tilt_angle", "|tilt| must be below pi/2"));
        }
        Ok(MirrorConfig { tilt_angle })
    }

    /// Angles seen from the tilted mirror's normal.
    pub fn local_angles(&self, angles: AnglePair) -> Result<AnglePair> {
        AnglePair::new(angles.theta_i - self.tilt_angle, angles.theta_r + self.tilt_angle)
    }
}

/// Tilt that makes the mirror normal bisect the Tx and Rx directions.
pub fn mirror_tilt_for(angles: AnglePair) -> Result<MirrorConfig> {
    MirrorConfig::new(0.5 * (angles.theta_i - angles.theta_r))
}

/// Number of uniformly spaced phase levels on `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizationSpec {
    levels: u32,
}

impl QuantizationSpec {
    pub fn new(levels: u32) -> Result<Self> {
        if levels < 2 {
            return Err(Error::invalid("levels", "need at least 2 phase levels"));
        }
        Ok(QuantizationSpec { levels })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }
}

/// Snaps each phase to the nearest allowed level (circular distance, ties
/// to the lower level).
pub fn quantize_profile(profile: &PhaseProfile, spec: QuantizationSpec) -> PhaseProfile {
    let m = spec.levels as f64;
    let step = TAU / m;
    let phases = profile
        .phases()
        .iter()
        .map(|&p| {
            let level = (p / step - 0.5).ceil().rem_euclid(m);
            level * step
        })
        .collect();
    PhaseProfile {
        phases,
        tag: DesignTag::Quantized(spec.levels),
    }
}

/// Worst-case spread of arrival times across an anomalously reflecting
/// surface of length `length`: `(L / c) |sin theta_i - sin theta_r|`.
pub fn delay_dispersion(length: f64, angles: AnglePair) -> Result<f64> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid("length", "must be positive"));
    }
    Ok(length / SPEED_OF_LIGHT * (angles.theta_i.sin() - angles.theta_r.sin()).abs())
}

/// Number of earlier symbols overlapped by a delay spread at `rate_bps`.
pub fn symbols_affected(delay: f64, rate_bps: f64) -> u64 {
    // Guard against 2.9999999 style rounding on exact multiples.
    let x = delay * rate_bps;
    (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as u64
}

/// Design families a simulation can sweep over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignFamily {
    Uniform,
    Linear,
    Focusing,
    Mirror,
}

impl DesignFamily {
    pub fn name(&self) -> &'static str {
        match self {
            DesignFamily::Uniform => "uniform",
            DesignFamily::Linear => "linear",
            DesignFamily::Focusing => "focusing",
            DesignFamily::Mirror => "mirror",
        }
    }
}

/// A concrete IRS configuration: either a phase design on the fixed
/// surface or a rigid, tilted mirror.
#[derive(Debug, Clone, PartialEq)]
pub enum IrsDesign {
    Uniform,
    /// Anomalous reflection designed for the given angle pair.
    Linear(AnglePair),
    /// Phase conjugation toward a focal point.
    Focusing(Point2D),
    Quantized {
        base: Box<IrsDesign>,
        spec: QuantizationSpec,
    },
    Mirror(MirrorConfig),
}

impl IrsDesign {
    /// Design of `family` serving the scene's Tx and Rx lens center.
    pub fn for_scene(family: DesignFamily, scene: &SceneLayout) -> Result<Self> {
        Ok(match family {
            DesignFamily::Uniform => IrsDesign::Uniform,
            DesignFamily::Linear => IrsDesign::Linear(scene.angles()?),
            DesignFamily::Focusing => IrsDesign::Focusing(scene.rx_lens_center),
            DesignFamily::Mirror => IrsDesign::Mirror(mirror_tilt_for(scene.angles()?)?),
        })
    }

    pub fn quantized(self, levels: u32) -> Result<Self> {
        Ok(IrsDesign::Quantized {
            base: Box::new(self),
            spec: QuantizationSpec::new(levels)?,
        })
    }

    /// Grid actually used (tilted for mirrors) and its phase profile.
    pub fn realize(&self, grid: &UnitCellGrid, beam: &BeamSource) -> Result<(UnitCellGrid, PhaseProfile)> {
        Ok(match self {
            IrsDesign::Uniform => (grid.clone(), PhaseProfile::uniform(grid.len())),
            IrsDesign::Linear(angles) => (grid.clone(), linear_profile(grid, *angles, beam.wavelength)),
            IrsDesign::Focusing(focus) => (grid.clone(), focusing_profile(grid, beam, *focus)?),
            IrsDesign::Quantized { base, spec } => {
                let (g, p) = base.realize(grid, beam)?;
                (g, quantize_profile(&p, *spec))
            }
            IrsDesign::Mirror(m) => (grid.tilted(m.tilt_angle)?, PhaseProfile::mirror(grid.len())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;
    use crate::wave::ReflectedField;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: usize, d: f64) -> UnitCellGrid {
        UnitCellGrid::new(Point2D::ORIGIN, 0.0, n, d).unwrap()
    }

    #[test]
    fn specular_linear_profile_is_flat() {
        let a = AnglePair::from_degrees(25.0, 25.0).unwrap();
        let p = linear_profile(&grid(16, 0.5e-6), a, 1e-6);
        assert!(p.phases().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_profile_half_turn_per_wavelength() {
        let lambda = 1.55e-6;
        let a = AnglePair::from_degrees(30.0, 0.0).unwrap();
        let p = linear_profile(&grid(2, lambda), a, lambda);
        let d = (p.phases()[1] - p.phases()[0]).rem_euclid(TAU);
        assert_abs_diff_eq!(d, PI, epsilon = 1e-9);
    }

    #[test]
    fn mirror_tilt_examples() {
        let t = mirror_tilt_for(AnglePair::from_degrees(20.0, 20.0).unwrap()).unwrap();
        assert_eq!(t.tilt_angle, 0.0);
        let a = AnglePair::from_degrees(30.0, 0.0).unwrap();
        let t = mirror_tilt_for(a).unwrap();
        assert_relative_eq!(t.tilt_angle, 15f64.to_radians(), max_relative = 1e-12);
        let local = t.local_angles(a).unwrap();
        assert_relative_eq!(local.theta_i, local.theta_r, max_relative = 1e-12);
        assert!(MirrorConfig::new(FRAC_PI_2).is_err());
    }

    #[test]
    fn quantize_two_levels() {
        let p = PhaseProfile::new(vec![0.1, 3.0], DesignTag::Linear).unwrap();
        let q = quantize_profile(&p, QuantizationSpec::new(2).unwrap());
        assert_eq!(q.phases(), &[0.0, PI]);
        assert_eq!(q.tag(), DesignTag::Quantized(2));
    }

    #[test]
    fn quantize_ties_go_down_and_wrap() {
        let spec = QuantizationSpec::new(2).unwrap();
        let p = PhaseProfile::new(vec![0.5 * PI, 1.5 * PI, 6.2], DesignTag::Linear).unwrap();
        let q = quantize_profile(&p, spec);
        assert_eq!(q.phases(), &[0.0, PI, 0.0]);
        assert!(QuantizationSpec::new(1).is_err());
    }

    #[test]
    fn delay_examples() {
        let a = AnglePair::from_degrees(0.0, 60.0).unwrap();
        let d = delay_dispersion(0.1, a).unwrap();
        assert_relative_eq!(d, 2.888_6e-10, max_relative = 1e-4);
        assert_eq!(symbols_affected(d, 10e9), 3);
        let s = AnglePair::from_degrees(10.0, 10.0).unwrap();
        assert_eq!(delay_dispersion(0.1, s).unwrap(), 0.0);
        assert!(delay_dispersion(0.0, a).is_err());
        assert_eq!(symbols_affected(3e-10, 10e9), 3);
    }

    #[test]
    fn focusing_cophases_contributions_at_focus() {
        let lambda = 1.55e-6;
        let beam = BeamSource::gaussian_aimed(Point2D::new(-2.0, 3.0), Point2D::ORIGIN, lambda, 1e-4, 1.0)
            .unwrap();
        let g = grid(301, lambda / 2.0);
        let focus = Point2D::new(0.01, 0.5);
        let inc = wave::incident_field_on_irs(&beam, &g).unwrap();
        let p = focusing_profile_for(&g, &inc, lambda, focus).unwrap();
        assert_eq!(p.phases()[150], 0.0);
        // Each single-cell contribution must share one phase.
        let k = TAU / lambda;
        let v = focus - g.center();
        let (q, r0) = (v.dot(g.tangent()), v.norm());
        let arg0 = inc[150].arg() + p.phases()[150];
        for (n, &s) in g.offsets().iter().enumerate() {
            let excess = s * s - 2.0 * s * q;
            let delta = excess / ((r0 * r0 + excess).sqrt() + r0);
            let phase = inc[n].arg() + p.phases()[n] - k * delta;
            let diff = (phase - arg0).rem_euclid(TAU);
            assert!(diff.min(TAU - diff) < 1e-9, "cell {n}: {diff}");
        }
    }

    #[test]
    fn focusing_rejects_focus_on_surface() {
        let g = grid(10, 1e-6);
        let inc = vec![Complex64::new(1.0, 0.0); 10];
        assert!(focusing_profile_for(&g, &inc, 1e-6, Point2D::new(1e-6, 0.0)).is_err());
    }

    #[test]
    fn far_focus_matches_linear_gradient() {
        let lambda = 1e-6;
        let g = grid(128, lambda / 2.0);
        let theta_i = 30f64.to_radians();
        let theta_r = 10f64.to_radians();
        let beam = BeamSource::plane_aimed(
            Point2D::new(-theta_i.sin(), theta_i.cos()),
            Point2D::ORIGIN,
            lambda,
            1.0,
        )
        .unwrap();
        let far = 1e6 * g.length().powi(2) / lambda;
        let focus = Point2D::new(theta_r.sin(), theta_r.cos()) * far;
        let f = focusing_profile(&g, &beam, focus).unwrap();
        let k = TAU / lambda;
        let expected = k * (theta_i.sin() - theta_r.sin()) * g.spacing();
        let unwrapped = unwrap(f.phases());
        let slope = fit_slope(&unwrapped);
        assert_relative_eq!(slope, expected, max_relative = 0.01);
        // Linear design has the same per-cell step.
        let l = linear_profile(&g, AnglePair::new(theta_i, theta_r).unwrap(), lambda);
        assert_relative_eq!(fit_slope(&unwrap(l.phases())), expected, max_relative = 1e-9);
    }

    fn unwrap(p: &[f64]) -> Vec<f64> {
        let mut out = vec![p[0]];
        for w in p.windows(2) {
            let mut d = w[1] - w[0];
            d -= TAU * (d / TAU).round();
            out.push(out.last().unwrap() + d);
        }
        out
    }

    fn fit_slope(y: &[f64]) -> f64 {
        let n = y.len() as f64;
        let mx = (n - 1.0) / 2.0;
        let my = y.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, v) in y.iter().enumerate() {
            let dx = i as f64 - mx;
            sxy += dx * (v - my);
            sxx += dx * dx;
        }
        sxy / sxx
    }

    #[test]
    fn quantization_loses_power_at_focus() {
        let lambda = 1.55e-6;
        let g = grid(400, lambda / 2.0);
        let beam = BeamSource::plane_aimed(Point2D::new(-0.5, 0.8), Point2D::ORIGIN, lambda, 1.0)
            .unwrap();
        let focus = Point2D::new(0.0, 1e-3);
        let f = focusing_profile(&g, &beam, focus).unwrap();
        let q = quantize_profile(&f, QuantizationSpec::new(2).unwrap());
        let e_f = ReflectedField::from_beam(&g, &beam, &f).unwrap().at(focus).unwrap();
        let e_q = ReflectedField::from_beam(&g, &beam, &q).unwrap().at(focus).unwrap();
        assert!(e_q.norm_sqr() < e_f.norm_sqr());
    }

    proptest! {
        #[test]
        fn linear_profile_is_arithmetic_mod_2pi(
            n in 2usize..64,
            ti in -1.2..1.2f64,
            tr in -1.2..1.2f64,
        ) {
            let lambda = 1.55e-6;
            let g = grid(n, lambda / 2.0);
            let p = linear_profile(&g, AnglePair::new(ti, tr).unwrap(), lambda);
            let step = TAU / lambda * g.spacing() * (ti.sin() - tr.sin());
            for w in p.phases().windows(2) {
                let d = (w[1] - w[0] - step).rem_euclid(TAU);
                prop_assert!(d.min(TAU - d) < 1e-9);
            }
        }

        #[test]
        fn quantization_error_bounded_and_idempotent(
            phases in proptest::collection::vec(0.0..TAU, 1..50),
            levels in 2u32..16,
        ) {
            let spec = QuantizationSpec::new(levels).unwrap();
            let p = PhaseProfile::new(phases, DesignTag::Linear).unwrap();
            let q = quantize_profile(&p, spec);
            for (a, b) in p.phases().iter().zip(q.phases()) {
                let d = (a - b).rem_euclid(TAU);
                prop_assert!(d.min(TAU - d) <= PI / levels as f64 + 1e-12);
                prop_assert!((0.0..TAU).contains(b));
            }
            let again = quantize_profile(&q, spec);
            prop_assert_eq!(again.phases(), q.phases());
        }

        #[test]
        fn focusing_ignores_global_incident_phase(offset in 0.0..TAU) {
            let lambda = 1e-6;
            let g = grid(33, lambda / 2.0);
            let inc: Vec<Complex64> = (0..33)
                .map(|i| Complex64::from_polar(1.0 + i as f64 * 0.01, 0.3 * i as f64))
                .collect();
            let shifted: Vec<Complex64> =
                inc.iter().map(|u| u * Complex64::from_polar(1.0, offset)).collect();
            let focus = Point2D::new(0.0, 1e-4);
            let a = focusing_profile_for(&g, &inc, lambda, focus).unwrap();
            let b = focusing_profile_for(&g, &shifted, lambda, focus).unwrap();
            for (x, y) in a.phases().iter().zip(b.phases()) {
                let d = (x - y).rem_euclid(TAU);
                prop_assert!(d.min(TAU - d) < 1e-9);
            }
        }

        #[test]
        fn delay_symmetric_and_monotone(
            l in 1e-3..10.0f64,
            ti in -1.5..1.5f64,
            tr in -1.5..1.5f64,
        ) {
            let a = AnglePair::new(ti, tr).unwrap();
            let b = AnglePair::new(tr, ti).unwrap();
            let d = delay_dispersion(l, a).unwrap();
            prop_assert_eq!(d, delay_dispersion(l, b).unwrap());
            prop_assert!(delay_dispersion(2.0 * l, a).unwrap() >= d);
        }
    }
}
