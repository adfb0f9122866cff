//! One function per subcommand, each turning a validated config into a
//! result table.

use irsfso_core::beam::BeamSource;
use irsfso_core::channel::TurbulencePath;
use irsfso_core::exec::MonteCarlo;
use irsfso_core::geometric::go_reflect;
use irsfso_core::geometry::AnglePair;
use irsfso_core::link::{
    power_scaling_sweep_for, Engine, GeometricGain, IrsChannel, OutageEstimate, RelayChannel, SnrConfig,
};
use irsfso_core::phase::{delay_dispersion, symbols_affected, DesignFamily};
use irsfso_core::wave::{line_samples, power_density_profile};

use crate::config::{ExperimentConfig, System};
use crate::table::{Cell, ResultTable};
use crate::AppError;

pub const TOOL: &str = concat!("irsfso ", env!("CARGO_PKG_VERSION"));

fn preamble(table: &mut ResultTable, command: &str, cfg: &ExperimentConfig) {
    table.meta("command", command);
    table.meta("config_hash", cfg.hash());
    table.meta("seed", cfg.seed());
    table.meta("tool", TOOL);
    table.meta("technology", cfg.irs.technology.name());
    table.meta("control", cfg.irs.technology.control());
}

fn design_label(family: DesignFamily, levels: Option<u32>) -> String {
    match levels {
        Some(m) if family != DesignFamily::Mirror => format!("{}-{m}level", family.name()),
        _ => family.name().to_string(),
    }
}

/// Power density along the line `y = field_map.y` for every requested
/// wavelength and engine.
pub fn run_field_map(cfg: &ExperimentConfig) -> Result<ResultTable, AppError> {
    let fm = &cfg.field_map;
    let mut t = ResultTable::new(&[
        ("x_m", "m"),
        ("power_density_per_m", "W/m"),
        ("engine", "-"),
        ("wavelength_m", "m"),
    ]);
    preamble(&mut t, "field-map", cfg);
    t.meta("line_y_m", fm.line_y);
    t.meta("design", design_label(cfg.irs.family, cfg.irs.quantization));
    t.meta("irs_length_m", cfg.irs.length);
    let design = cfg.irs.design(cfg.irs.family, &cfg.scene)?;
    let x_range = (fm.x.start, fm.x.stop);
    for &lambda in &fm.wavelengths {
        let beam = BeamSource {
            wavelength: lambda,
            ..cfg.beam
        };
        let grid = cfg.irs.grid(&cfg.scene, cfg.irs.length, lambda)?;
        for &engine in &fm.engines {
            let (points, density): (Vec<_>, Vec<f64>) = match engine {
                Engine::Wave => {
                    let (g, phases) = design.realize(&grid, &beam)?;
                    let p = power_density_profile(&beam, &g, &phases, fm.line_y, x_range, fm.x.points)?;
                    (p.sample_points, p.power_density)
                }
                Engine::Geometric => {
                    let state = go_reflect(&beam, &grid, &design)?;
                    let pts = line_samples(x_range, fm.line_y, fm.x.points);
                    let d = pts.iter().map(|&p| state.density_at(p)).collect();
                    (pts, d)
                }
            };
            for (p, d) in points.iter().zip(density) {
                if !d.is_finite() {
                    return Err(AppError::Numerical(format!("non-finite power density at x = {}", p.x)));
                }
                t.push(vec![p.x.into(), d.into(), engine.name().into(), lambda.into()]);
            }
        }
    }
    Ok(t)
}

/// Captured-power fraction versus IRS length for each design and engine.
pub fn run_power_sweep(cfg: &ExperimentConfig) -> Result<ResultTable, AppError> {
    let ps = &cfg.power_sweep;
    let mut t = ResultTable::new(&[
        ("L_m", "m"),
        ("N", "-"),
        ("fraction", "-"),
        ("engine", "-"),
        ("design", "-"),
    ]);
    preamble(&mut t, "power-sweep", cfg);
    let spacing = cfg.irs.spacing_for(cfg.beam.wavelength);
    t.meta("cell_spacing_m", spacing);
    let lengths = ps.lengths.values();
    for &family in &ps.designs {
        let design = cfg.irs.design(family, &cfg.scene)?;
        let label = design_label(family, cfg.irs.quantization);
        for &engine in &ps.engines {
            let points =
                power_scaling_sweep_for(&cfg.scene, &cfg.beam, &design, &lengths, engine, spacing, cfg.lens_samples)?;
            for p in points {
                t.push(vec![
                    p.length.into(),
                    p.cells.into(),
                    p.fraction.into(),
                    engine.name().into(),
                    label.as_str().into(),
                ]);
            }
        }
    }
    Ok(t)
}

/// Outage probability versus transmit SNR for the IRS designs and the
/// relay baseline, per beam waist.
pub fn run_outage(cfg: &ExperimentConfig) -> Result<ResultTable, AppError> {
    let oc = &cfg.outage;
    let mut t = ResultTable::new(&[
        ("snr_db", "dB"),
        ("p_out", "-"),
        ("ci95", "-"),
        ("trials", "-"),
        ("system", "-"),
        ("w0_m", "m"),
    ]);
    preamble(&mut t, "outage", cfg);
    t.meta("snr_threshold_db", cfg.snr.snr_threshold_db);
    t.meta("irs_length_m", cfg.irs.length);
    t.meta("hg_engine", oc.engine.name());
    t.meta("relay", "decode-and-forward, outage when either hop SNR is below threshold");
    t.meta(
        "turbulence",
        match cfg.fading.turbulence_path {
            TurbulencePath::EndToEnd => "end-to-end for IRS links, per hop for the relay",
            TurbulencePath::PerHop => "per hop",
        },
    );
    let meta_family = match cfg.irs.family {
        DesignFamily::Mirror => DesignFamily::Focusing,
        f => f,
    };
    t.meta("metasurface_design", design_label(meta_family, cfg.irs.quantization));
    let mc = MonteCarlo::new(cfg.mc.trials, cfg.mc.seed).with_early_exit(cfg.mc.early_exit);
    let snrs = oc.snr_db.values();
    let lambda = cfg.beam.wavelength;
    let grid = cfg.irs.grid(&cfg.scene, cfg.irs.length, lambda)?;
    for &w0 in &oc.waists {
        let beam = BeamSource::gaussian_aimed(
            cfg.scene.tx_position,
            cfg.scene.irs_center,
            lambda,
            w0,
            cfg.beam.total_power().unwrap_or(1.0),
        )?;
        for &system in &oc.systems {
            let estimates: Vec<OutageEstimate> = match system {
                System::Relay => {
                    let spec = cfg.relay.spec(&cfg.scene, &beam)?;
                    let ch = RelayChannel::new(&cfg.scene, &beam, &spec, &cfg.fading)?;
                    let [g1, g2] = ch.geometric_gains();
                    t.meta(&format!("h_g[relay,w0={w0:e}]"), format!("{g1:e}; {g2:e}"));
                    snrs.iter()
                        .map(|&s| Ok(ch.outage(&SnrConfig::new(s, cfg.snr.snr_threshold_db)?, &mc)?))
                        .collect::<Result<_, AppError>>()?
                }
                System::Mirror | System::Metasurface => {
                    let family = if system == System::Mirror {
                        DesignFamily::Mirror
                    } else {
                        meta_family
                    };
                    let design = cfg.irs.design(family, &cfg.scene)?;
                    let ch = IrsChannel::new(&cfg.scene, &beam, &grid, &design, &cfg.fading, oc.engine)?;
                    if let GeometricGain::Fixed(g) = ch.h_g {
                        t.meta(&format!("h_g[{},w0={w0:e}]", system.name()), format!("{g:e}"));
                    }
                    snrs.iter()
                        .map(|&s| Ok(ch.outage(&SnrConfig::new(s, cfg.snr.snr_threshold_db)?, &mc)?))
                        .collect::<Result<_, AppError>>()?
                }
            };
            for (&snr, e) in snrs.iter().zip(estimates) {
                t.push(vec![
                    snr.into(),
                    e.p_out.into(),
                    e.ci95_halfwidth.into(),
                    e.trials.into(),
                    system.name().into(),
                    w0.into(),
                ]);
            }
        }
    }
    Ok(t)
}

/// Delay spread of anomalous reflection over every configured
/// (L, theta_i, theta_r) combination.
pub fn run_delay(cfg: &ExperimentConfig) -> Result<ResultTable, AppError> {
    let dc = &cfg.delay;
    let mut t = ResultTable::new(&[
        ("L_m", "m"),
        ("theta_i_deg", "deg"),
        ("theta_r_deg", "deg"),
        ("d_max_s", "s"),
        ("symbols_affected_at_rate", "-"),
    ]);
    preamble(&mut t, "delay", cfg);
    t.meta("rate_bps", dc.rate);
    for &l in &dc.lengths {
        for &ti in &dc.theta_i_deg {
            for &tr in &dc.theta_r_deg {
                let d = delay_dispersion(l, AnglePair::from_degrees(ti, tr)?)?;
                t.push(vec![
                    l.into(),
                    ti.into(),
                    tr.into(),
                    d.into(),
                    Cell::Integer(symbols_affected(d, dc.rate)),
                ]);
            }
        }
    }
    Ok(t)
}
