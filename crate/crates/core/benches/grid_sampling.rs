use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pr_filtration::eos::critical_point;
use pr_filtration::field::{sample_grid, FiltrationField, GridSpec, PointSource, SourceSet};
use pr_filtration::isentrope::{s0_threshold, Isentrope};
use pr_filtration::parallel::Execution;
use pr_filtration::phase::trace_coexistence_curve;
use pr_filtration::potential::{Mobility, QPotential};

fn five_source_field() -> FiltrationField {
    let curve = trace_coexistence_curve(0.25 * critical_point().temperature, 200).unwrap();
    let iso = Isentrope::new(3, 2.0 * s0_threshold(3).unwrap()).unwrap();
    let q = QPotential::build(iso, Mobility::new(1.0).unwrap(), 9.5).unwrap();
    let sources = [
        [0.0, 0.0, 0.0],
        [2.0, 1.0, 0.0],
        [-2.0, 1.0, 0.0],
        [1.0, -2.0, 0.0],
        [-1.0, -2.0, 0.0],
    ]
    .into_iter()
    .map(|position| PointSource {
        position,
        intensity: 4e-4,
    })
    .collect();
    FiltrationField::new(q, SourceSet::new(sources, 9.5).unwrap(), curve).unwrap()
}

fn bench_sampling(c: &mut Criterion) {
    let field = five_source_field();
    let mut group = c.benchmark_group("sample_grid");
    group.sample_size(10);
    for res in [17usize, 33] {
        let grid = GridSpec {
            lower: [-3.5, -3.5, -1.0],
            upper: [3.5, 2.5, 1.0],
            resolution: [res, res, res / 2 + 1],
        };
        for exec in [Execution::Sequential, Execution::Parallel] {
            let label = format!("{exec:?}").to_lowercase();
            group.bench_with_input(BenchmarkId::new(label, grid.len()), &grid, |b, g| {
                b.iter(|| sample_grid(&field, g, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_inversion(c: &mut Criterion) {
    let field = five_source_field();
    let q = field.potential();
    let targets: Vec<f64> = (0..256)
        .map(|i| q.q_sup() * (-1.0 + 1.9 * i as f64 / 256.0))
        .collect();
    c.bench_function("invert_q_256", |b| {
        b.iter(|| targets.iter().map(|&t| q.invert(t).unwrap()).sum::<f64>())
    });
}

criterion_group!(benches, bench_sampling, bench_inversion);
criterion_main!(benches);
