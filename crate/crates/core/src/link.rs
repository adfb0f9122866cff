//! Link-level metrics: SNR, Monte-Carlo outage for IRS links and the
//! decode-and-forward relay baseline, power-scaling sweeps and the helpers
//! used to read regimes and SNR gains off the resulting curves.

use std::f64::consts::SQRT_2;

use crate::beam::BeamSource;
use crate::channel::{self, FadingModel, TurbulencePath};
use crate::exec::{Execution, MonteCarlo, SimRng, Tally};
use crate::geometric;
use crate::geometry::{self, Point2D, SceneLayout};
use crate::phase::{DesignFamily, IrsDesign};
use crate::wave::{self, UnitCellGrid};
use crate::{Error, Result};

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrConfig {
    /// Transmit SNR, dB.
    pub transmit_snr_db: f64,
    /// Outage threshold, dB.
    pub snr_threshold_db: f64,
}

impl SnrConfig {
    pub fn new(transmit_snr_db: f64, snr_threshold_db: f64) -> Result<Self> {
        let c = SnrConfig {
            transmit_snr_db,
            snr_threshold_db,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.transmit_snr_db.is_finite() {
            return Err(Error::invalid("transmit_snr_db", "must be finite"));
        }
        if !self.snr_threshold_db.is_finite() {
            return Err(Error::invalid("snr_threshold_db", "must be finite"));
        }
        Ok(())
    }

    pub fn transmit_snr(&self) -> f64 {
        db_to_linear(self.transmit_snr_db)
    }

    pub fn threshold(&self) -> f64 {
        db_to_linear(self.snr_threshold_db)
    }

    /// Smallest channel coefficient that avoids outage at `snr_scale`
    /// times the transmit SNR.
    fn min_channel(&self, snr_scale: f64) -> f64 {
        (self.threshold() / (snr_scale * self.transmit_snr())).sqrt()
    }
}

/// `gamma = gamma_bar h^2`, linear scale.
pub fn instantaneous_snr(config: &SnrConfig, h: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::invalid("h", format!("{h} must be non-negative")));
    }
    Ok(config.transmit_snr() * h * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_out: f64,
    pub trials: u64,
    pub ci95_halfwidth: f64,
}

impl From<Tally> for OutageEstimate {
    fn from(t: Tally) -> Self {
        OutageEstimate {
            p_out: t.fraction(),
            trials: t.trials,
            ci95_halfwidth: t.ci95_halfwidth(),
        }
    }
}

/// Which model computes the geometric gain `h_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Wave,
    Geometric,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Wave => "wave",
            Engine::Geometric => "geometric",
        }
    }
}

/// Fraction of the beam's power collected by the lens via the IRS.
pub fn captured_fraction(
    scene: &SceneLayout,
    beam: &BeamSource,
    grid: &UnitCellGrid,
    design: &IrsDesign,
    engine: Engine,
) -> Result<f64> {
    captured_fraction_with(scene, beam, grid, design, engine, None)
}

/// As [`captured_fraction`]; `lens_samples` fixes the wave engine's lens
/// quadrature instead of choosing it adaptively.
pub fn captured_fraction_with(
    scene: &SceneLayout,
    beam: &BeamSource,
    grid: &UnitCellGrid,
    design: &IrsDesign,
    engine: Engine,
    lens_samples: Option<usize>,
) -> Result<f64> {
    let total = wave::source_power(beam, grid);
    let captured = match engine {
        Engine::Wave => {
            let (g, phases) = design.realize(grid, beam)?;
            wave::lens_captured_power_with(scene, beam, &g, &phases, lens_samples, Execution::default())?
        }
        Engine::Geometric => geometric::go_captured_power(scene, beam, grid, design)?,
    };
    finite_fraction(captured / total)
}

fn finite_fraction(f: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::NonFinite(format!("captured fraction {f}")));
    }
    Ok(f.max(0.0))
}

/// `h_g` as a function of the beam-center offset along the IRS, sampled on
/// a uniform grid and linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct PointingTable {
    max_offset: f64,
    values: Vec<f64>,
}

impl PointingTable {
    /// Offsets beyond this many standard deviations are clamped.
    pub const SPAN_SIGMAS: f64 = 6.0;

    /// Tabulates `h_g` over `[-6 sigma, 6 sigma]` with `points` samples.
    /// The IRS phases stay those of the nominal beam.
    pub fn build(
        scene: &SceneLayout,
        beam: &BeamSource,
        grid: &UnitCellGrid,
        design: &IrsDesign,
        engine: Engine,
        sigma: f64,
        points: usize,
        exec: Execution,
    ) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("pointing_sigma", "must be positive"));
        }
        if points < 2 {
            return Err(Error::invalid("points", "need at least 2"));
        }
        let max_offset = Self::SPAN_SIGMAS * sigma;
        let (g, phases) = design.realize(grid, beam)?;
        // Beam shift that moves the footprint by one unit along the IRS.
        let cos_in = (-beam.direction().dot(g.normal())).max(f64::EPSILON);
        let total = wave::source_power(beam, grid);
        let step = 2.0 * max_offset / (points - 1) as f64;
        let values = exec.map_indexed(points, |i| {
            let offset = -max_offset + step * i as f64;
            let shifted = beam.shifted(offset * cos_in);
            let captured = match engine {
                Engine::Wave => wave::lens_captured_power_with(
                    scene,
                    &shifted,
                    &g,
                    &phases,
                    None,
                    Execution::Sequential,
                ),
                // An axis off the segment still clips some power, but the
                // ray model has no answer for it; count it as lost.
                Engine::Geometric => match geometric::go_captured_power(scene, &shifted, grid, design) {
                    Err(Error::MissedAperture(_)) => Ok(0.0),
                    r => r,
                },
            };
            captured.and_then(|c| finite_fraction(c / total))
        });
        Ok(PointingTable {
            max_offset,
            values: values.into_iter().collect::<Result<_>>()?,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lookup(&self, offset: f64) -> f64 {
        let n = self.values.len();
        let u = ((offset + self.max_offset) / (2.0 * self.max_offset)).clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (u.floor() as usize).min(n - 2);
        let t = u - i as f64;
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }
}

/// Geometric gain of an IRS link, fixed or jitter-dependent.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometricGain {
    Fixed(f64),
    Pointing { sigma: f64, table: PointingTable },
}

impl GeometricGain {
    fn draw(&self, rng: &mut SimRng) -> f64 {
        match self {
            GeometricGain::Fixed(g) => *g,
            GeometricGain::Pointing { sigma, table } => {
                table.lookup(channel::sample_pointing_offset(*sigma, rng))
            }
        }
    }
}

/// Everything about an IRS link that does not change with the SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsChannel {
    pub h_g: GeometricGain,
    pub h_l: f64,
    /// Rytov variance of each independent turbulence factor.
    pub sigma_r2: Vec<f64>,
    pub responsivity: f64,
}

/// Table resolution used when pointing jitter is enabled.
pub const POINTING_TABLE_POINTS: usize = 121;

impl IrsChannel {
    pub fn new(
        scene: &SceneLayout,
        beam: &BeamSource,
        grid: &UnitCellGrid,
        design: &IrsDesign,
        fading: &FadingModel,
        engine: Engine,
    ) -> Result<Self> {
        scene.validate()?;
        fading.validate()?;
        let (d1, d2) = geometry::path_lengths(scene)?;
        let h_g = if fading.pointing_sigma > 0.0 {
            GeometricGain::Pointing {
                sigma: fading.pointing_sigma,
                table: PointingTable::build(
                    scene,
                    beam,
                    grid,
                    design,
                    engine,
                    fading.pointing_sigma,
                    POINTING_TABLE_POINTS,
                    Execution::default(),
                )?,
            }
        } else {
            GeometricGain::Fixed(captured_fraction(scene, beam, grid, design, engine)?.min(1.0))
        };
        let lambda = beam.wavelength;
        let sigma_r2 = match fading.turbulence_path {
            TurbulencePath::EndToEnd => vec![channel::rytov_variance(fading.cn2, lambda, d1 + d2)],
            TurbulencePath::PerHop => vec![
                channel::rytov_variance(fading.cn2, lambda, d1),
                channel::rytov_variance(fading.cn2, lambda, d2),
            ],
        };
        Ok(IrsChannel {
            h_g,
            h_l: channel::attenuation_gain(fading.kappa, d1 + d2),
            sigma_r2,
            responsivity: fading.responsivity,
        })
    }

    pub fn draw(&self, rng: &mut SimRng) -> Result<channel::ChannelDraw> {
        let h_a = self
            .sigma_r2
            .iter()
            .map(|&s| channel::sample_turbulence(s, rng))
            .product();
        let h_g = self.h_g.draw(rng).min(1.0);
        channel::compose_channel(self.responsivity, self.h_l, h_a, h_g)
    }

    pub fn outage(&self, snr: &SnrConfig, mc: &MonteCarlo) -> Result<OutageEstimate> {
        snr.validate()?;
        let h_min = snr.min_channel(1.0);
        let tally = mc.count(|rng| {
            let h_a: f64 = self
                .sigma_r2
                .iter()
                .map(|&s| channel::sample_turbulence(s, rng))
                .product();
            let h = self.responsivity * self.h_l * h_a * self.h_g.draw(rng).min(1.0);
            h < h_min
        });
        Ok(tally.into())
    }
}

/// Outage of the IRS link at one SNR point, wave engine for `h_g`.
pub fn irs_outage_mc(
    scene: &SceneLayout,
    beam: &BeamSource,
    grid: &UnitCellGrid,
    design: &IrsDesign,
    fading: &FadingModel,
    snr: &SnrConfig,
    mc: &MonteCarlo,
) -> Result<OutageEstimate> {
    check_trials(mc)?;
    IrsChannel::new(scene, beam, grid, design, fading, Engine::Wave)?.outage(snr, mc)
}

fn check_trials(mc: &MonteCarlo) -> Result<()> {
    if mc.trials < 1000 {
        return Err(Error::invalid("trials", "need at least 1000"));
    }
    Ok(())
}

/// Two-hop relay configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayLinkSpec {
    pub relay_position: Point2D,
    /// Share of the transmit power used by the Tx; the relay gets the rest.
    pub power_split: f64,
    pub relay_lens_length: f64,
    /// Beam launched by the relay toward the Rx lens.
    pub relay_beam: BeamSource,
}

impl RelayLinkSpec {
    /// Relay at `position` reusing the Tx beam parameters and the Rx lens,
    /// with equal power split.
    pub fn matching(scene: &SceneLayout, tx_beam: &BeamSource, position: Point2D) -> Result<Self> {
        let w0 = tx_beam
            .waist_radius()
            .ok_or_else(|| Error::invalid("beam", "relay needs a Gaussian beam"))?;
        Ok(RelayLinkSpec {
            relay_position: position,
            power_split: 0.5,
            relay_lens_length: scene.rx_lens_length,
            relay_beam: BeamSource::gaussian_aimed(
                position,
                scene.rx_lens_center,
                tx_beam.wavelength,
                w0,
                tx_beam.total_power().unwrap_or(1.0),
            )?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power_split > 0.0 && self.power_split < 1.0) {
            return Err(Error::invalid("power_split", "must lie in (0, 1)"));
        }
        if !(self.relay_lens_length > 0.0 && self.relay_lens_length.is_finite()) {
            return Err(Error::invalid("relay_lens_length", "must be positive"));
        }
        if !self.relay_position.is_finite() {
            return Err(Error::invalid("relay_position", "must be finite"));
        }
        if !self.relay_beam.is_gaussian() {
            return Err(Error::invalid("relay_beam", "must be Gaussian"));
        }
        self.relay_beam.validate()
    }
}

/// Fraction of a Gaussian beam collected by a lens segment, from the
/// closed-form beam radius and an error-function integral over the lens
/// end points projected onto the transverse axis.
pub fn gaussian_lens_fraction(beam: &BeamSource, lens_center: Point2D, lens_length: f64, lens_normal_angle: f64) -> Result<f64> {
    let t = geometry::tangent(lens_normal_angle) * (0.5 * lens_length);
    let (za, xa) = beam.to_local(lens_center - t);
    let (zb, xb) = beam.to_local(lens_center + t);
    let (z, _) = beam.to_local(lens_center);
    if z <= 0.0 || za <= 0.0 || zb <= 0.0 {
        return Ok(0.0);
    }
    let w = beam
        .beam_radius(z)
        .ok_or_else(|| Error::invalid("beam", "must be Gaussian"))?;
    let (lo, hi) = (xa.min(xb), xa.max(xb));
    Ok((0.5 * (libm::erf(SQRT_2 * hi / w) - libm::erf(SQRT_2 * lo / w))).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Hop {
    h_g: f64,
    h_l: f64,
    sigma_r2: f64,
    snr_scale: f64,
}

/// Deterministic per-hop quantities of the relay link.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayChannel {
    hops: [Hop; 2],
    responsivity: f64,
}

impl RelayChannel {
    pub fn new(scene: &SceneLayout, tx_beam: &BeamSource, relay: &RelayLinkSpec, fading: &FadingModel) -> Result<Self> {
        scene.validate()?;
        relay.validate()?;
        fading.validate()?;
        let lambda = tx_beam.wavelength;
        let d1 = scene.tx_position.distance(relay.relay_position);
        let d2 = relay.relay_position.distance(scene.rx_lens_center);
        if d1 == 0.0 || d2 == 0.0 {
            return Err(Error::DegenerateGeometry("relay coincides with an end point".into()));
        }
        // Hop 1 lands on a relay lens facing the Tx.
        let to_tx = geometry::direction_angle(scene.tx_position - relay.relay_position);
        let tx_aimed = BeamSource {
            axis_angle: geometry::direction_angle(relay.relay_position - tx_beam.axis_origin),
            ..*tx_beam
        };
        let g1 = gaussian_lens_fraction(&tx_aimed, relay.relay_position, relay.relay_lens_length, to_tx)?;
        let g2 = gaussian_lens_fraction(
            &relay.relay_beam,
            scene.rx_lens_center,
            scene.rx_lens_length,
            scene.rx_lens_normal_angle,
        )?;
        let hop = |h_g: f64, d: f64, share: f64| Hop {
            h_g: h_g.min(1.0),
            h_l: channel::attenuation_gain(fading.kappa, d),
            sigma_r2: channel::rytov_variance(fading.cn2, lambda, d),
            snr_scale: share,
        };
        Ok(RelayChannel {
            hops: [
                hop(g1, d1, relay.power_split),
                hop(g2, d2, 1.0 - relay.power_split),
            ],
            responsivity: fading.responsivity,
        })
    }

    /// Deterministic `h_g` of each hop.
    pub fn geometric_gains(&self) -> [f64; 2] {
        [self.hops[0].h_g, self.hops[1].h_g]
    }

    pub fn outage(&self, snr: &SnrConfig, mc: &MonteCarlo) -> Result<OutageEstimate> {
        snr.validate()?;
        let limits = self.hops.map(|h| snr.min_channel(h.snr_scale));
        let rho = self.responsivity;
        let hop_fails = |i: usize, rng: &mut SimRng| {
            let h = &self.hops[i];
            rho * h.h_l * channel::sample_turbulence(h.sigma_r2, rng) * h.h_g < limits[i]
        };
        Ok(decode_forward_outage(mc, |rng| hop_fails(0, rng), |rng| hop_fails(1, rng)))
    }
}

/// Decode-and-forward outage: a trial fails when either hop fails. Both
/// hops are always drawn so the random stream does not depend on the
/// outcome.
pub fn decode_forward_outage<F1, F2>(mc: &MonteCarlo, hop1_fails: F1, hop2_fails: F2) -> OutageEstimate
where
    F1: Fn(&mut SimRng) -> bool + Sync + Send,
    F2: Fn(&mut SimRng) -> bool + Sync + Send,
{
    mc.count(|rng| {
        let a = hop1_fails(rng);
        let b = hop2_fails(rng);
        a || b
    })
    .into()
}

/// Outage of the decode-and-forward relay link at one SNR point.
pub fn relay_outage_mc(
    scene: &SceneLayout,
    tx_beam: &BeamSource,
    relay: &RelayLinkSpec,
    fading: &FadingModel,
    snr: &SnrConfig,
    mc: &MonteCarlo,
) -> Result<OutageEstimate> {
    check_trials(mc)?;
    RelayChannel::new(scene, tx_beam, relay, fading)?.outage(snr, mc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub length: f64,
    pub cells: usize,
    pub fraction: f64,
}

/// Captured-power fraction versus IRS length for one design family.
///
/// The design is re-derived for the scene at each length; `spacing` is
/// the unit-cell pitch, so the cell count grows linearly with `L`.
pub fn power_scaling_sweep(
    scene: &SceneLayout,
    beam: &BeamSource,
    family: DesignFamily,
    lengths: &[f64],
    engine: Engine,
    spacing: f64,
    lens_samples: Option<usize>,
) -> Result<Vec<ScalingPoint>> {
    let design = IrsDesign::for_scene(family, scene)?;
    power_scaling_sweep_for(scene, beam, &design, lengths, engine, spacing, lens_samples)
}

/// As [`power_scaling_sweep`] for an explicit design, e.g. a quantized one.
pub fn power_scaling_sweep_for(
    scene: &SceneLayout,
    beam: &BeamSource,
    design: &IrsDesign,
    lengths: &[f64],
    engine: Engine,
    spacing: f64,
    lens_samples: Option<usize>,
) -> Result<Vec<ScalingPoint>> {
    if lengths.is_empty() {
        return Err(Error::invalid("lengths", "must not be empty"));
    }
    for w in lengths.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid("lengths", "must be strictly ascending"));
        }
    }
    if !(lengths[0] > 0.0) {
        return Err(Error::invalid("lengths", "must be positive"));
    }
    lengths
        .iter()
        .map(|&length| {
            let grid = UnitCellGrid::for_scene(scene, length, spacing)?;
            let fraction = captured_fraction_with(scene, beam, &grid, design, engine, lens_samples)?;
            Ok(ScalingPoint {
                length,
                cells: grid.len(),
                fraction,
            })
        })
        .collect()
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("points", "need at least two (x, y) pairs"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("points", "log-log fit needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("points", "x values must differ"));
    }
    Ok(sxy / sxx)
}

/// Slope fitted over one window of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSlope {
    pub x_start: f64,
    pub x_end: f64,
    pub slope: f64,
}

/// Log-log slopes over every window spanning `decades` decades that starts
/// at a sample point and is fully covered by the data.
pub fn sliding_slopes(xs: &[f64], ys: &[f64], decades: f64) -> Result<Vec<WindowSlope>> {
    let span = 10f64.powf(decades);
    let last = *xs.last().ok_or_else(|| Error::invalid("points", "empty curve"))?;
    let mut out = Vec::new();
    for (i, &x0) in xs.iter().enumerate() {
        let x1 = x0 * span;
        if x1 > last * (1.0 + 1e-9) {
            break;
        }
        let j = xs.iter().rposition(|&x| x <= x1 * (1.0 + 1e-9)).unwrap_or(i);
        if j <= i {
            continue;
        }
        out.push(WindowSlope {
            x_start: x0,
            x_end: xs[j],
            slope: loglog_slope(&xs[i..=j], &ys[i..=j])?,
        });
    }
    Ok(out)
}

/// Transmit SNR (dB) at which a decreasing outage curve crosses
/// `p_target`, interpolating `log10 p` linearly in dB.
pub fn crossing_snr(p_target: f64, curve: &[(f64, f64)]) -> Result<f64> {
    for w in curve.windows(2) {
        let ((x0, p0), (x1, p1)) = (w[0], w[1]);
        if p0 >= p_target && p1 < p_target {
            let t = if p1 > 0.0 {
                (p0.log10() - p_target.log10()) / (p0.log10() - p1.log10())
            } else {
                (p0 - p_target) / (p0 - p1)
            };
            return Ok(x0 + t * (x1 - x0));
        }
    }
    Err(Error::NoCrossing(p_target))
}

/// SNR gain of curve `a` over curve `b` at outage level `p_target`:
/// `snr_b(p) - snr_a(p)` in dB.
pub fn snr_gain_at(p_target: f64, curve_a: &[(f64, f64)], curve_b: &[(f64, f64)]) -> Result<f64> {
    if !(p_target > 0.0 && p_target < 1.0) {
        return Err(Error::invalid("p_target", "must lie in (0, 1)"));
    }
    Ok(crossing_snr(p_target, curve_b)? - crossing_snr(p_target, curve_a)?)
}
