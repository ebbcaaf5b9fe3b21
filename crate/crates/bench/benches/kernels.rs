use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use stochascope_bench::{blur, deblur_problem, gaussian};
use stochascope_core::linalg::operator_norm_sq;
use stochascope_core::operators::diff_operator;
use stochascope_core::prox::tv_prox_fgp;
use stochascope_core::{make_partition, run, Algorithm, SaAnalyzer, Scheme, SolverConfig};

fn norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("operator_norm_sq");
    for (n, d) in [(200, 100), (200, 1000)] {
        let a = gaussian(n, d);
        g.bench_with_input(BenchmarkId::new("gaussian", format!("{n}x{d}")), &a, |b, a| {
            b.iter(|| operator_norm_sq(black_box(a.matrix())).unwrap())
        });
    }
    let a = blur(32);
    g.bench_function("blur_32x32", |b| b.iter(|| operator_norm_sq(black_box(a.matrix())).unwrap()));
    g.finish();
}

fn sa_factor(c: &mut Criterion) {
    let mut g = c.benchmark_group("sa_report");
    g.sample_size(20);
    let a = blur(32);
    let an = SaAnalyzer::new(a.matrix()).unwrap();
    for k in [10, 50] {
        let p = make_partition(Scheme::Interleaved, 1024, k).unwrap();
        g.bench_with_input(BenchmarkId::new("blur_32x32", k), &p, |b, p| b.iter(|| an.report(black_box(p)).unwrap()));
    }
    g.finish();
}

fn tv_prox(c: &mut Criterion) {
    let d = diff_operator(32, 32).unwrap();
    let v: Vec<f64> = (0..1024).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
    c.bench_function("tv_prox_fgp_32x32_50", |b| b.iter(|| tv_prox_fgp(black_box(&v), 0.05, 50, &d).unwrap()));
}

fn solver_epochs(c: &mut Criterion) {
    let mut g = c.benchmark_group("deblur_5_epochs");
    g.sample_size(10);
    let p = deblur_problem(32);
    let configs = [
        ("pdhg", SolverConfig::new(Algorithm::Pdhg, 5)),
        ("fista", SolverConfig::new(Algorithm::Fista, 5)),
        ("acc_pd_sgd", SolverConfig::new(Algorithm::AccPdSgd, 5).partition(Scheme::Interleaved, 10)),
    ];
    for (name, cfg) in configs {
        g.bench_function(name, |b| b.iter(|| run(&p, black_box(&cfg)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, norms, sa_factor, tv_prox, solver_epochs);
criterion_main!(benches);
