use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use pucvsim::detection::{ratio_table, DetectorConfig, RatioSetup};
use pucvsim::report::{nm_grid, rainbow};
use pucvsim::{ExecMode, MatchProblem, Polarization, ProcessKind, PumpWave, UniaxialCrystal};

const MODES: [ExecMode; 2] = [ExecMode::Sequential, ExecMode::Parallel];

fn rainbow_sweep(c: &mut Criterion) {
    let crystal = UniaxialCrystal::bbo();
    let problem = MatchProblem::new(ProcessKind::Puc, &crystal, PumpWave::new(0.351, Polarization::Ordinary));
    let grid = nm_grid(481.0, 850.0, 0.5).unwrap();
    let mut group = c.benchmark_group("rainbow_481_850_nm");
    for mode in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| rainbow(black_box(&problem), black_box(&grid), mode).unwrap())
        });
    }
    group.finish();
}

fn ratio_sweep(c: &mut Criterion) {
    let crystal = UniaxialCrystal::bbo();
    let setup = RatioSetup::default();
    let det = DetectorConfig::default();
    let grid: Vec<f64> = nm_grid(482.0, 700.0, 0.25)
        .unwrap()
        .into_iter()
        .map(|l| l / 1e3)
        .collect();
    let mut group = c.benchmark_group("ratio_table_482_700_nm");
    for mode in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| ratio_table(black_box(&crystal), &setup, black_box(&grid), &det, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, rainbow_sweep, ratio_sweep);
criterion_main!(benches);
