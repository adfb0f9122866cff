//! Monte-Carlo channel statistics against closed forms.

use irsfso_core::channel::{attenuation_gain, rytov_variance, sample_turbulence, FadingModel, TurbulencePath};
use irsfso_core::exec::{substream, Execution, MonteCarlo};
use irsfso_core::geometry::{Point2D, SceneLayout};
use irsfso_core::link::{GeometricGain, IrsChannel, RelayChannel, RelayLinkSpec, SnrConfig};
use irsfso_core::beam::BeamSource;

/// Standard normal CDF.
fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(c h_a < h_min)` for log-normal `h_a` with `Var[ln h_a] = s2`.
fn lognormal_outage(c: f64, s2: f64, h_min: f64) -> f64 {
    let s = s2.sqrt();
    phi(((h_min / c).ln() + 0.5 * s2) / s)
}

// [DERIVED] unit mean and log-variance sigma_r2.
#[test]
fn turbulence_moments() {
    let s2 = 0.21;
    let mut rng = substream(7, 0);
    let n = 400_000;
    let draws: Vec<f64> = (0..n).map(|_| sample_turbulence(s2, &mut rng)).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let logs: Vec<f64> = draws.iter().map(|h| h.ln()).collect();
    let lm = logs.iter().sum::<f64>() / n as f64;
    let lv = logs.iter().map(|l| (l - lm).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((mean - 1.0).abs() < 0.005, "{mean}");
    assert!((lv / s2 - 1.0).abs() < 0.01, "{lv}");
    assert!((lm + 0.5 * s2).abs() < 0.005, "{lm}");
}

// [PAPER] doubling the path scales the Rytov variance by 2^(11/6).
#[test]
fn rytov_distance_scaling() {
    let r = rytov_variance(1.4e-14, 1.55e-6, 800.0) / rytov_variance(1.4e-14, 1.55e-6, 400.0);
    assert!((r - 2f64.powf(11.0 / 6.0)).abs() < 1e-12);
}

fn fixed_channel(h_g: f64, s2: f64) -> IrsChannel {
    IrsChannel {
        h_g: GeometricGain::Fixed(h_g),
        h_l: 0.8,
        sigma_r2: vec![s2],
        responsivity: 0.5,
    }
}

// [DERIVED] IRS outage equals the log-normal CDF at the threshold.
#[test]
fn irs_outage_matches_lognormal_cdf() {
    let ch = fixed_channel(0.3, 0.2);
    let mc = MonteCarlo::new(200_000, 3);
    for snr_db in [10.0, 16.0, 20.0, 24.0] {
        let snr = SnrConfig::new(snr_db, 0.0).unwrap();
        let est = ch.outage(&snr, &mc).unwrap();
        let h_min = (snr.threshold() / snr.transmit_snr()).sqrt();
        let exact = lognormal_outage(0.5 * 0.8 * 0.3, 0.2, h_min);
        let tol = 4.0 * (exact * (1.0 - exact) / 200_000.0).sqrt() + 1e-5;
        assert!((est.p_out - exact).abs() < tol, "{snr_db} dB: {} vs {exact}", est.p_out);
    }
}

// [DERIVED] two independent turbulence factors add their log-variances.
#[test]
fn per_hop_turbulence_adds_log_variance() {
    let mut ch = fixed_channel(0.3, 0.0);
    ch.sigma_r2 = vec![0.12, 0.08];
    let snr = SnrConfig::new(18.0, 0.0).unwrap();
    let est = ch.outage(&snr, &MonteCarlo::new(200_000, 5)).unwrap();
    let h_min = (snr.threshold() / snr.transmit_snr()).sqrt();
    let exact = lognormal_outage(0.12, 0.2, h_min);
    assert!((est.p_out - exact).abs() < 0.004, "{} vs {exact}", est.p_out);
}

// [DERIVED] decode-and-forward: 1 - (1 - p1)(1 - p2) from the per-hop CDFs.
#[test]
fn relay_outage_matches_two_hop_formula() {
    let scene = SceneLayout::reference();
    let beam = BeamSource::gaussian_aimed(scene.tx_position, scene.irs_center, 1.55e-6, 2.5e-3, 1.0).unwrap();
    let spec = RelayLinkSpec::matching(&scene, &beam, Point2D::ORIGIN).unwrap();
    let fading = FadingModel::default();
    let ch = RelayChannel::new(&scene, &beam, &spec, &fading).unwrap();
    let [g1, g2] = ch.geometric_gains();
    let d1 = scene.tx_position.distance(Point2D::ORIGIN);
    let d2 = scene.rx_lens_center.distance(Point2D::ORIGIN);
    let mc = MonteCarlo::new(200_000, 11);
    for snr_db in [14.0, 20.0, 26.0] {
        let snr = SnrConfig::new(snr_db, 0.0).unwrap();
        let p = |g: f64, d: f64| {
            let c = fading.responsivity * attenuation_gain(fading.kappa, d) * g;
            let h_min = (snr.threshold() / (0.5 * snr.transmit_snr())).sqrt();
            lognormal_outage(c, rytov_variance(fading.cn2, 1.55e-6, d), h_min)
        };
        let exact = 1.0 - (1.0 - p(g1, d1)) * (1.0 - p(g2, d2));
        let est = ch.outage(&snr, &mc).unwrap();
        let tol = 4.0 * (exact * (1.0 - exact) / 200_000.0).sqrt() + 1e-5;
        assert!((est.p_out - exact).abs() < tol, "{snr_db} dB: {} vs {exact}", est.p_out);
    }
}

// [TRIVIAL] identical tallies regardless of execution mode.
#[test]
fn execution_mode_does_not_change_results() {
    let ch = fixed_channel(0.3, 0.2);
    let snr = SnrConfig::new(20.0, 0.0).unwrap();
    let seq = ch.outage(&snr, &MonteCarlo::new(100_000, 9).with_execution(Execution::Sequential)).unwrap();
    let par = ch.outage(&snr, &MonteCarlo::new(100_000, 9).with_execution(Execution::Parallel)).unwrap();
    assert_eq!(seq, par);
}

#[cfg(feature = "parallel")]
#[test]
fn worker_count_does_not_change_results() {
    let ch = fixed_channel(0.3, 0.2);
    let snr = SnrConfig::new(20.0, 0.0).unwrap();
    let mc = MonteCarlo::new(100_000, 9).with_execution(Execution::Parallel);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ch.outage(&snr, &mc).unwrap())
    };
    assert_eq!(run(1), run(3));
}

// [TRIVIAL] end-to-end turbulence covers the full path once.
#[test]
fn end_to_end_rytov_over_full_path() {
    let scene = SceneLayout::reference();
    let beam = BeamSource::gaussian_aimed(scene.tx_position, scene.irs_center, 1.55e-6, 1e-3, 1.0).unwrap();
    let grid = irsfso_core::wave::UnitCellGrid::for_scene(&scene, 0.01, 10.0 * 1.55e-6).unwrap();
    let design = irsfso_core::phase::IrsDesign::Uniform;
    let mut fading = FadingModel::default();
    let ch = IrsChannel::new(&scene, &beam, &grid, &design, &fading, irsfso_core::link::Engine::Geometric).unwrap();
    let (d1, d2) = irsfso_core::geometry::path_lengths(&scene).unwrap();
    assert_eq!(ch.sigma_r2, vec![rytov_variance(fading.cn2, 1.55e-6, d1 + d2)]);
    fading.turbulence_path = TurbulencePath::PerHop;
    let ch = IrsChannel::new(&scene, &beam, &grid, &design, &fading, irsfso_core::link::Engine::Geometric).unwrap();
    assert_eq!(ch.sigma_r2.len(), 2);
}
