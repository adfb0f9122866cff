//! Random FSO channel states: atmospheric loss, log-normal turbulence,
//! pointing jitter and the composite coefficient `h = rho h_l h_a h_g`.

use std::f64::consts::TAU;

use rand_distr::{Distribution, Normal};

use crate::exec::SimRng;
use crate::{Error, Result};

/// Prefactor of the plane-wave Rytov variance.
pub const RYTOV_PLANE_WAVE: f64 = 1.23;

/// Where turbulence acts on an IRS link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TurbulencePath {
    /// One draw over the end-to-end distance `d1 + d2`.
    #[default]
    EndToEnd,
    /// Independent draws over each hop, multiplied.
    PerHop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingModel {
    /// Weather attenuation coefficient, 1/m.
    pub kappa: f64,
    /// Refractive-index structure parameter, m^(-2/3).
    pub cn2: f64,
    /// Beam-center jitter on the IRS plane, m (0 = perfect tracking).
    pub pointing_sigma: f64,
    /// Photodetector responsivity, A/W.
    pub responsivity: f64,
    pub turbulence_path: TurbulencePath,
}

impl Default for FadingModel {
    fn default() -> Self {
        FadingModel {
            kappa: 0.43e-3,
            cn2: 1.4e-14,
            pointing_sigma: 0.0,
            responsivity: 0.5,
            turbulence_path: TurbulencePath::EndToEnd,
        }
    }
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid("kappa", "must be non-negative"));
        }
        if !(self.cn2 >= 0.0 && self.cn2.is_finite()) {
            return Err(Error::invalid("cn2", "must be non-negative"));
        }
        if !(self.pointing_sigma >= 0.0 && self.pointing_sigma.is_finite()) {
            return Err(Error::invalid("pointing_sigma", "must be non-negative"));
        }
        if !(self.responsivity > 0.0 && self.responsivity <= 1.0) {
            return Err(Error::invalid("responsivity", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Turbulence-free, jitter-free model with unit responsivity.
    pub fn ideal() -> Self {
        FadingModel {
            kappa: 0.0,
            cn2: 0.0,
            pointing_sigma: 0.0,
            responsivity: 1.0,
            turbulence_path: TurbulencePath::EndToEnd,
        }
    }
}

/// `exp(-kappa z)`.
pub fn attenuation_gain(kappa: f64, distance: f64) -> f64 {
    (-kappa * distance).exp()
}

/// Plane-wave Rytov variance `1.23 C_n^2 k^(7/6) z^(11/6)`.
pub fn rytov_variance(cn2: f64, wavelength: f64, distance: f64) -> f64 {
    let k = TAU / wavelength;
    RYTOV_PLANE_WAVE * cn2 * k.powf(7.0 / 6.0) * distance.powf(11.0 / 6.0)
}

/// Log-normal turbulence gain with unit mean.
///
/// `h_a = exp(2X)` with `X ~ N(-s, s)` and `s = sigma_r2 / 4`, so
/// `Var[ln h_a] = sigma_r2`.
pub fn sample_turbulence(sigma_r2: f64, rng: &mut SimRng) -> f64 {
    if sigma_r2 <= 0.0 {
        return 1.0;
    }
    let var_x = 0.25 * sigma_r2;
    let x = Normal::new(-var_x, var_x.sqrt())
        .expect("finite variance")
        .sample(rng);
    (2.0 * x).exp()
}

/// Zero-mean Gaussian beam-center displacement along the IRS, meters.
pub fn sample_pointing_offset(pointing_sigma: f64, rng: &mut SimRng) -> f64 {
    if pointing_sigma <= 0.0 {
        return 0.0;
    }
    Normal::new(0.0, pointing_sigma)
        .expect("finite sigma")
        .sample(rng)
}

/// One realisation of the channel coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    /// Geometric and misalignment gain, `[0, 1]`.
    pub h_g: f64,
    /// Turbulence gain, `> 0`.
    pub h_a: f64,
    /// Atmospheric loss, `(0, 1]`.
    pub h_l: f64,
    pub responsivity: f64,
    pub h: f64,
}

/// `h = rho h_l h_a h_g` with range checks on each factor.
pub fn compose_channel(responsivity: f64, h_l: f64, h_a: f64, h_g: f64) -> Result<ChannelDraw> {
    if !(responsivity > 0.0 && responsivity <= 1.0) {
        return Err(Error::invalid("responsivity", "must lie in (0, 1]"));
    }
    if !(h_l > 0.0 && h_l <= 1.0) {
        return Err(Error::invalid("h_l", format!("{h_l} outside (0, 1]")));
    }
    if !(h_a > 0.0 && h_a.is_finite()) {
        return Err(Error::invalid("h_a", format!("{h_a} must be positive")));
    }
    if !(0.0..=1.0).contains(&h_g) {
        return Err(Error::invalid("h_g", format!("{h_g} outside [0, 1]")));
    }
    Ok(ChannelDraw {
        h_g,
        h_a,
        h_l,
        responsivity,
        h: responsivity * h_l * h_a * h_g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{substream, MonteCarlo};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn attenuation_examples() {
        assert_relative_eq!(attenuation_gain(0.43e-3, 500.0), 0.8065, epsilon = 1e-4);
        assert_eq!(attenuation_gain(0.43e-3, 0.0), 1.0);
    }

    #[test]
    fn rytov_reference_value() {
        let s = rytov_variance(1.4e-14, 1.55e-6, 500.0);
        assert_relative_eq!(s, 0.078, epsilon = 5e-4);
    }

    #[test]
    fn rytov_distance_doubling() {
        let r = rytov_variance(1.4e-14, 1.55e-6, 860.0) / rytov_variance(1.4e-14, 1.55e-6, 430.0);
        assert_relative_eq!(r, 2f64.powf(11.0 / 6.0), max_relative = 1e-14);
        assert_relative_eq!(r, 3.5636, epsilon = 1e-4);
    }

    #[test]
    fn no_turbulence_no_jitter() {
        let mut rng = substream(1, 0);
        assert_eq!(sample_turbulence(0.0, &mut rng), 1.0);
        assert_eq!(sample_pointing_offset(0.0, &mut rng), 0.0);
    }

    #[test]
    fn pointing_jitter_statistics() {
        let sigma = 0.02;
        let v = MonteCarlo::new(1_000_000, 11).collect(|rng| sample_pointing_offset(sigma, rng));
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert_relative_eq!(var.sqrt(), sigma, max_relative = 0.01);
        assert!(mean.abs() < 3.0 * sigma / n.sqrt());
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose_channel(1.0, 1.0, 1.0, 1.0).unwrap().h, 1.0);
        let d = compose_channel(0.5, 0.8065, 1.0, 0.5).unwrap();
        assert_relative_eq!(d.h, 0.2016, epsilon = 1e-4);
        assert_eq!(compose_channel(0.5, 0.8, 1.2, 0.0).unwrap().h, 0.0);
        assert!(compose_channel(0.5, 1.1, 1.0, 0.5).is_err());
        assert!(compose_channel(0.5, 0.9, 1.0, 1.5).is_err());
        assert!(compose_channel(0.0, 0.9, 1.0, 0.5).is_err());
    }

    #[test]
    fn seeded_draws_repeat() {
        let a: Vec<f64> = MonteCarlo::new(1000, 5).collect(|r| sample_turbulence(0.2, r));
        let b: Vec<f64> = MonteCarlo::new(1000, 5).collect(|r| sample_turbulence(0.2, r));
        assert_eq!(a, b);
    }

    #[test]
    fn validation() {
        assert!(FadingModel::default().validate().is_ok());
        let bad = FadingModel {
            kappa: -1.0,
            ..FadingModel::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn attenuation_is_multiplicative(k in 0.0..1e-2f64, a in 0.0..2e3f64, b in 0.0..2e3f64) {
            let lhs = attenuation_gain(k, a + b);
            let rhs = attenuation_gain(k, a) * attenuation_gain(k, b);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
            prop_assert!(lhs > 0.0 && lhs <= 1.0);
        }

        #[test]
        fn rytov_linear_in_cn2(c in 1e-17..1e-12f64, z in 1.0..5e3f64) {
            let a = rytov_variance(c, 1.55e-6, z);
            let b = rytov_variance(2.0 * c, 1.55e-6, z);
            prop_assert!((b / a - 2.0).abs() < 1e-12);
        }

        #[test]
        fn composite_monotone(g1 in 0.0..1.0f64, g2 in 0.0..1.0f64, ha in 0.1..3.0f64) {
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let a = compose_channel(0.5, 0.8, ha, lo).unwrap().h;
            let b = compose_channel(0.5, 0.8, ha, hi).unwrap().h;
            prop_assert!(a <= b);
        }
    }
}
