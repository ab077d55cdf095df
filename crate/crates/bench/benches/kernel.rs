use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use ellipse_contact::oracle::stratified_configurations;
use ellipse_contact::{
    closest_approach, excluded_area, overlap, quartic_coefficients, solve_contact_quartic, EllipseShape,
    QuadratureScheme, QuadratureSpec, UnitVec2,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn closest(c: &mut Criterion) {
    let cases: Vec<_> = stratified_configurations(1024, 1, 20.0)
        .into_iter()
        .map(|(_, c)| c)
        .collect();
    let mut i = 0;
    c.bench_function("closest_approach", |b| {
        b.iter(|| {
            i = (i + 1) % cases.len();
            closest_approach(black_box(&cases[i])).unwrap().d
        })
    });
    c.bench_function("overlap", |b| {
        b.iter(|| {
            i = (i + 1) % cases.len();
            let cfg = &cases[i];
            overlap(cfg.shape1, cfg.shape2, cfg.k1, cfg.k2, black_box(cfg.dhat.vec() * 3.0)).unwrap()
        })
    });
}

fn quartic(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    c.bench_function("solve_contact_quartic", |b| {
        b.iter_batched(
            || {
                let (bp, delta, t) = (
                    10f64.powf(rng.gen_range(-2.0..2.0)),
                    10f64.powf(rng.gen_range(-6.0..3.0)),
                    10f64.powf(rng.gen_range(-6.0..6.0)),
                );
                (quartic_coefficients(bp, delta, t), delta)
            },
            |(q, delta)| solve_contact_quartic(&q, delta).unwrap().0,
            BatchSize::SmallInput,
        )
    });
}

fn area(c: &mut Criterion) {
    let s = EllipseShape::new(2.0, 1.0).unwrap();
    let mut g = c.benchmark_group("excluded_area");
    g.sample_size(20);
    for (name, scheme) in [
        ("trapezoid", QuadratureScheme::FixedTrapezoid),
        ("gauss", QuadratureScheme::GaussLegendrePanels),
        ("simpson", QuadratureScheme::AdaptiveSimpson),
    ] {
        let spec = QuadratureSpec::with_panels(scheme, 2048);
        g.bench_function(name, |b| {
            b.iter(|| excluded_area(s, s, UnitVec2::X, UnitVec2::from_degrees(30.0), &spec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, closest, quartic, area);
criterion_main!(benches);
