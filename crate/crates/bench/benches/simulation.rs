use criterion::{criterion_group, criterion_main, Criterion};
use ellipse_contact::mcsim::audit;
use ellipse_contact::{MCConfig, Simulation};

fn sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group("mc");
    g.sample_size(20);
    for packing in [0.1, 0.4] {
        let cfg = MCConfig::single_species(256, 2.0, 1.0, packing, 1);
        let mut sim = Simulation::new(cfg).unwrap();
        g.bench_function(format!("mc_sweep_256_phi{packing}"), |b| b.iter(|| sim.sweep()));
        g.bench_function(format!("audit_256_phi{packing}"), |b| {
            b.iter(|| audit(&sim.state).passed())
        });
    }
    g.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
