use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use viscorom::rom::{fit_reduced_model, FitSettings};
use viscorom::snapshots::{generate_snapshots, sample_uniform};
use viscorom::{generate_mesh, Alg2Config, DomainSpec, ParameterBounds, PodBasis, Shape, TrainConfig, YieldField};

fn full_solve(c: &mut Criterion) {
    let mesh = generate_mesh(&DomainSpec::new(Shape::UnitSquare, 32)).unwrap();
    let cfg = Alg2Config { r: 8.0, ..Default::default() };
    let solver = viscorom::alg2::Alg2Solver::new(&mesh, cfg).unwrap();
    let field = YieldField::constant(&mesh, 0.1).unwrap();
    let mut group = c.benchmark_group("alg2");
    group.sample_size(10);
    group.bench_function("square_n32_B0.1", |b| b.iter(|| solver.solve(black_box(&field)).unwrap()));
    group.finish();
}

fn rom_evaluate(c: &mut Criterion) {
    let mesh = generate_mesh(&DomainSpec::new(Shape::UnitSquare, 32)).unwrap();
    let bounds = ParameterBounds::cube(1, 0.0, 1.0).unwrap();
    let samples = sample_uniform(40, &bounds, 7).unwrap();
    let cfg = Alg2Config { r: 8.0, ..Default::default() };
    let set = generate_snapshots(&mesh, &samples, &cfg, YieldField::from_params, 7, 1).unwrap();
    let basis = PodBasis::from_snapshots(&set, 20).unwrap();
    let settings = FitSettings {
        hidden: vec![60, 50, 40],
        train: TrainConfig { epochs: 50, ..Default::default() },
        test_fraction: 0.33,
        bounds,
    };
    let model = fit_reduced_model(&mesh, &set, &basis, &settings).unwrap().model;
    c.bench_function("rom_evaluate_square_n32", |b| b.iter(|| model.evaluate(black_box(&[0.15])).unwrap()));
    c.bench_function("mlp_forward_1_60_50_40_20", |b| {
        let net = model.network();
        b.iter(|| net.predict(black_box(&[0.15])).unwrap())
    });
}

criterion_group!(benches, full_solve, rom_evaluate);
criterion_main!(benches);
