//! Sequential versus parallel execution of the two hot paths: the wave
//! engine's field profile and the Monte-Carlo outage counter.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use irsfso_core::beam::BeamSource;
use irsfso_core::channel::FadingModel;
use irsfso_core::exec::{Execution, MonteCarlo};
use irsfso_core::geometry::SceneLayout;
use irsfso_core::link::{Engine, IrsChannel, SnrConfig};
use irsfso_core::phase::{DesignFamily, IrsDesign};
use irsfso_core::wave::{power_density_profile_with, UnitCellGrid};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn field_profile(c: &mut Criterion) {
    let scene = SceneLayout::reference();
    let beam = BeamSource::gaussian_aimed(scene.tx_position, scene.irs_center, 1.55e-6, 1e-3, 1.0).unwrap();
    let grid = UnitCellGrid::for_scene(&scene, 0.02, 7.75e-7).unwrap();
    let (grid, phases) = IrsDesign::for_scene(DesignFamily::Linear, &scene)
        .unwrap()
        .realize(&grid, &beam)
        .unwrap();
    let mut group = c.benchmark_group("field_profile");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| power_density_profile_with(&beam, &grid, &phases, 200.0, (-2.0, 2.0), 256, exec).unwrap())
        });
    }
    group.finish();
}

fn outage(c: &mut Criterion) {
    let scene = SceneLayout::reference();
    let beam = BeamSource::gaussian_aimed(scene.tx_position, scene.irs_center, 1.55e-6, 1e-3, 1.0).unwrap();
    let grid = UnitCellGrid::for_scene(&scene, 0.5, 1e-3).unwrap();
    let design = IrsDesign::for_scene(DesignFamily::Mirror, &scene).unwrap();
    let channel = IrsChannel::new(&scene, &beam, &grid, &design, &FadingModel::default(), Engine::Geometric).unwrap();
    let snr = SnrConfig::new(20.0, 0.0).unwrap();
    let mut group = c.benchmark_group("outage_mc");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mc = MonteCarlo::new(200_000, 1).with_execution(exec);
        group.bench_with_input(BenchmarkId::from_parameter(name), &mc, |b, mc| {
            b.iter(|| channel.outage(&snr, mc).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, field_profile, outage);
criterion_main!(benches);
