// Parallel vs sequential map over the two embarrassingly parallel workloads:
// gamma over a ray grid, and independent amplitude points of a sweep.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use holoww::harness::config::ExperimentConfig;
use holoww::harness::experiments::sweep_point;
use holoww::normalform::to_normal_form;
use holoww::packets::{v_grid, GammaForm, GammaProbe};
use holoww::par;
use holoww::spectral::{Grid, GridSpec};
use holoww::waterwave::{make_peak_data, Stepper};

fn gamma_rays(c: &mut Criterion) {
    let grid = Grid::with(4096, 4096.0, 2.0 / 3.0).unwrap();
    let s0 = make_peak_data(0.2, 2.0, 0.25, &grid);
    let mut st = Stepper::new(s0, 0.2, 0.5);
    st.advance_to(60.0).unwrap();
    let nf = to_normal_form(&st.state);
    let probe = GammaProbe::new(&nf, 4).unwrap();
    let rays = v_grid(40.0, 400.0, 129);
    let t = nf.time;
    let f = |&v: &f64| probe.gamma(v, t, GammaForm::Full).ok();

    let mut g = c.benchmark_group("gamma_rays");
    g.bench_function("parallel", |b| b.iter(|| black_box(par::map(&rays, f))));
    g.bench_function("sequential", |b| b.iter(|| black_box(par::map_seq(&rays, f))));
    g.finish();
}

fn sweep_points(c: &mut Criterion) {
    let cfg = ExperimentConfig {
        grid: GridSpec { n_points: 256, length: 64.0, dealias_fraction: 2.0 / 3.0 },
        width: 1.0,
        carrier: 1.0,
        eps_list: vec![0.04, 0.02, 0.01, 0.005],
        ..ExperimentConfig::default()
    };
    let grid = Grid::new(cfg.grid).unwrap();
    let f = |&e: &f64| sweep_point(&cfg, &grid, e).ok();

    let mut g = c.benchmark_group("sweep_points");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| black_box(par::map(&cfg.eps_list, f))));
    g.bench_function("sequential", |b| b.iter(|| black_box(par::map_seq(&cfg.eps_list, f))));
    g.finish();
}

criterion_group!(benches, gamma_rays, sweep_points);
criterion_main!(benches);
