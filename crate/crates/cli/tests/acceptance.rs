//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, then fails if any criterion failed.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochascope_core::linalg::Matrix;
use stochascope_core::operators::{
    build_random_ensemble, build_space_varying_blur, diff_operator, identical_rows_operator,
    identity_operator, BlurSpec, EnsembleKind,
};
use stochascope_core::oracle;
use stochascope_core::prox::{tv_prox_fgp, Term};
use stochascope_core::safactor::{bound_beta, max_dim_for_delta, SaAnalyzer, CERTIFIED_DELTA};
use stochascope_core::solvers::synth::{make_signal, measure, SignalKind};
use stochascope_core::{
    make_partition, run, run_experiment, Algorithm, ForwardOperator, Partition, Problem,
    RegularizerSpec, SAReport, Scheme, SolverConfig,
};
use tempfile::TempDir;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mixed_instance(seed: u64, n: usize, d: usize) -> Matrix {
    let kind = match seed % 4 {
        0 => EnsembleKind::Gaussian { mean: 0.0, var: 1.0 },
        1 => EnsembleKind::Uniform01,
        2 => EnsembleKind::Gaussian { mean: 0.25, var: 1.0 },
        _ => {
            let mut r = seeded(seed);
            let trip = (0..n)
                .flat_map(|i| {
                    let mut row = vec![(i, r.gen_range(0..d), r.gen_range(0.5..2.0))];
                    for j in 0..d {
                        if r.gen_bool(0.25) && row[0].1 != j {
                            row.push((i, j, r.gen_range(-1.0..1.0)));
                        }
                    }
                    row
                })
                .collect();
            return Matrix::from_triplets(n, d, trip).unwrap();
        }
    };
    build_random_ensemble(kind, n, d, seed).unwrap().into_matrix()
}

fn blur_fixture() -> ForwardOperator {
    build_space_varying_blur(&BlurSpec { d1: 32, d2: 32, r_min: 1.0, r_max: 3.0 }).unwrap()
}

fn chain_violation(r: &SAReport) -> Option<String> {
    let le = |a: f64, b: f64| a <= b * (1.0 + 1e-9);
    let pairs = [
        ("α_s", r.alpha_s, "α_u", r.alpha_u),
        ("α_u", r.alpha_u, "α_ℓ", r.alpha_ell),
        ("α_ℓ", r.alpha_ell, "Υ", r.upsilon),
        ("Υ", r.upsilon, "β", r.beta_value()),
    ];
    pairs
        .iter()
        .find(|p| !le(p.1, p.3))
        .map(|p| format!("{} = {} > {} = {}", p.0, p.1, p.2, p.3))
}

fn c01_bound_chain() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for seed in 0..100u64 {
        let n = 8 * (1 + seed as usize % 4);
        let d = 1 + (seed as usize * 7 + 3) % 32;
        let a = mixed_instance(seed, n, d);
        let an = SaAnalyzer::new(&a).map_err(|e| e.to_string())?;
        for scheme in [Scheme::Interleaved, Scheme::Random { seed }, Scheme::Consecutive] {
            for k in [1, 2, 4, 8] {
                let r = an.report(&make_partition(scheme, n, k).unwrap()).map_err(|e| e.to_string())?;
                if let Some(v) = chain_violation(&r) {
                    return Err(format!("seed {seed} {scheme} K={k}: {v}"));
                }
                count += 1;
            }
        }
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("{count} reports, chain holds to 1e-9 ({t:.2?})"))
}

fn c02_tightness() -> Outcome {
    let row = [0.7, -1.2, 0.4, 2.0, -0.3];
    let a = identical_rows_operator(&row, 48).unwrap();
    let an = SaAnalyzer::new(a.matrix()).unwrap();
    let id = identity_operator(48);
    let ai = SaAnalyzer::new(id.matrix()).unwrap();
    let mut cases = 0;
    for k in [1, 2, 3, 4, 6, 8, 12, 16, 24, 48] {
        for scheme in [Scheme::Interleaved, Scheme::Random { seed: k as u64 }, Scheme::Consecutive] {
            let p = make_partition(scheme, 48, k).unwrap();
            let r = an.report(&p).unwrap();
            let kf = k as f64;
            check((r.upsilon - kf).abs() <= 1e-12 * kf && (r.alpha_u - kf).abs() <= 1e-12 * kf, || {
                format!("identical rows K={k} {scheme}: Υ = {}, α_u = {}", r.upsilon, r.alpha_u)
            })?;
            let r = ai.report(&p).unwrap();
            check((r.upsilon - 1.0).abs() <= 1e-12, || format!("identity K={k} {scheme}: Υ = {}", r.upsilon))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} partitions: Υ = α_u = K for identical rows, Υ = 1 for identity"))
}

fn c03_exhaustive_bipartitions() -> Outcome {
    let start = Instant::now();
    let a = build_random_ensemble(EnsembleKind::Gaussian { mean: 0.0, var: 1.0 }, 8, 8, 3)
        .unwrap()
        .into_matrix();
    let beta = bound_beta(&a, 2).unwrap();
    let an = SaAnalyzer::new(&a).unwrap();
    let parts = oracle::equal_bipartitions(8);
    check(parts.len() == 35, || format!("{} bipartitions", parts.len()))?;
    let mut worst = 0.0f64;
    for [b0, b1] in parts {
        let r = an.report(&Partition::custom(vec![b0, b1], 8).unwrap()).unwrap();
        worst = worst.max(r.upsilon);
    }
    let t = start.elapsed();
    check(worst <= beta * (1.0 + 1e-12), || format!("max Υ = {worst} > β = {beta}"))?;
    check(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("max Υ = {worst:.4} ≤ β(A,2) = {beta:.4} over 35 bipartitions ({t:.2?})"))
}

fn c04_table() -> Outcome {
    let table = [
        (15.0, 1.16e5),
        (17.0, 1.85e6),
        (19.0, 3.32e7),
        (21.0, 6.65e8),
        (23.0, 1.46e10),
        (25.0, 3.51e11),
    ];
    let mut worst = 0.0f64;
    for (delta, expect) in table {
        let v = max_dim_for_delta(delta, 0.9).unwrap();
        let rel = (v / expect - 1.0).abs();
        check(rel < 0.01, || format!("δ = {delta}: {v:.4e} vs {expect:.2e}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("six entries within {:.3}%", 100.0 * worst))
}

fn c05_sgd_envelope() -> Outcome {
    let start = Instant::now();
    let (n, d, k) = (40, 16, 4);
    let a = build_random_ensemble(EnsembleKind::Gaussian { mean: 0.0, var: 1.0 }, n, d, 5).unwrap();
    let x = make_signal(SignalKind::Uniform01, d, 5).unwrap();
    let b = a.matrix().mul_vec(&x);
    let mu_c = oracle::min_eigenvalue(a.matrix()) / n as f64;
    check(mu_c > 0.0, || "operator is rank deficient".into())?;
    let reg = RegularizerSpec::none().with_h(Term::Nonneg, 1.0);
    let p = Problem::new(a, b, Some(x), reg).unwrap();
    let part = make_partition(Scheme::Interleaved, n, k).unwrap();
    let l_b = stochascope_core::safactor::batch_lipschitz(p.matrix(), &part).unwrap();
    let epochs = 60;
    let configs: Vec<SolverConfig> = (0..20)
        .map(|s| {
            SolverConfig::new(Algorithm::MinibatchSgd, epochs)
                .partition(Scheme::Interleaved, k)
                .step(1.0 / l_b)
                .seed(s)
        })
        .collect();
    let runs: Vec<_> = run_experiment(&p, &configs).into_iter().map(Result::unwrap).collect();
    let e0 = runs[0].trace.records[0].est_error.unwrap().sqrt();
    let mut tightest = f64::INFINITY;
    for j in 0..=epochs {
        let mean = runs.iter().map(|r| r.trace.records[j].est_error.unwrap().sqrt()).sum::<f64>() / 20.0;
        let i = (j * k) as f64;
        let bound = 1.1 * (1.0 - mu_c / l_b).powf(i / 2.0) * e0;
        check(mean <= bound, || format!("iteration {i}: mean error {mean:e} > {bound:e}"))?;
        tightest = tightest.min(bound / mean.max(f64::MIN_POSITIVE));
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(10), || format!("took {t:?}"))?;
    Ok(format!("{} logged points, min slack {tightest:.2}x ({t:.2?})", epochs + 1))
}

fn c06_unbiasedness() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..4u64 {
        for n in [4usize, 6] {
            let a = mixed_instance(seed, n, 3);
            let mut r = seeded(seed + 50);
            let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            let x: Vec<f64> = (0..3).map(|_| r.gen_range(-1.0..1.0)).collect();
            let full = oracle::full_gradient(&a, &b, &x);
            let p = Problem::new(ForwardOperator::new(a, "t", None).unwrap(), b, None, RegularizerSpec::none())
                .unwrap();
            let mut g = vec![0.0; 3];
            let mut cmp = |avg: &[f64]| {
                for (u, v) in avg.iter().zip(&full) {
                    worst = worst.max((u - v).abs());
                }
            };
            for k in (1..=n).filter(|k| n % k == 0) {
                for scheme in [Scheme::Interleaved, Scheme::Random { seed }, Scheme::Consecutive] {
                    let part = make_partition(scheme, n, k).unwrap();
                    let mut avg = vec![0.0; 3];
                    for blk in part.blocks() {
                        p.block_gradient(blk, k as f64 / n as f64, &x, &mut g);
                        avg.iter_mut().zip(&g).for_each(|(s, v)| *s += v / k as f64);
                    }
                    cmp(&avg);
                }
            }
            for m in 1..=2 {
                let subsets = oracle::subsets(n, m);
                let mut avg = vec![0.0; 3];
                for s in &subsets {
                    p.block_gradient(s, 1.0 / m as f64, &x, &mut g);
                    avg.iter_mut().zip(&g).for_each(|(t, v)| *t += v / subsets.len() as f64);
                }
                cmp(&avg);
            }
        }
    }
    check(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("block and subset averages match ∇f, max deviation {worst:.1e}"))
}

fn curve(a: &Matrix, ks: &[usize]) -> Vec<f64> {
    SaAnalyzer::new(a)
        .unwrap()
        .curve(Scheme::Interleaved, ks)
        .unwrap()
        .iter()
        .map(|r| r.upsilon)
        .collect()
}

fn c07_sa_curves() -> Outcome {
    let start = Instant::now();
    let ks = [2, 5, 10, 20, 50];
    let uni = build_random_ensemble(EnsembleKind::Uniform01, 200, 1000, 1).unwrap();
    let gau = build_random_ensemble(EnsembleKind::Gaussian { mean: 0.0, var: 1.0 }, 200, 400, 1).unwrap();
    let row = build_random_ensemble(EnsembleKind::Gaussian { mean: 0.0, var: 1.0 }, 1, 400, 2).unwrap();
    let ident = identical_rows_operator(&row.matrix().to_dense_rows()[0], 200).unwrap();
    let blur = blur_fixture();
    let (cu, cg, ci) = (curve(uni.matrix(), &ks), curve(gau.matrix(), &ks), curve(ident.matrix(), &ks));
    let cb = curve(blur.matrix(), &[10, 50]);
    for (i, k) in ks.iter().enumerate() {
        check(cu[i] > cg[i], || format!("K={k}: uniform01 Υ = {} ≤ gaussian Υ = {}", cu[i], cg[i]))?;
        check((ci[i] - *k as f64).abs() <= 1e-9 * *k as f64, || format!("identical rows K={k}: Υ = {}", ci[i]))?;
    }
    let flat = cb[1] / cb[0];
    check(flat < 2.0, || format!("blur Υ(50)/Υ(10) = {flat}"))?;
    let t = start.elapsed();
    check(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    Ok(format!(
        "Υ(K=50): uniform01 {:.2}, gaussian {:.2}, identical {:.0}; blur Υ(50)/Υ(10) = {flat:.3} ({t:.2?})",
        cu[4], cg[4], ci[4]
    ))
}

fn c08_partition_ordering() -> Outcome {
    let blur = blur_fixture();
    let an = SaAnalyzer::new(blur.matrix()).unwrap();
    let r: Vec<SAReport> = [Scheme::Interleaved, Scheme::Random { seed: 0 }, Scheme::Consecutive]
        .iter()
        .map(|&s| an.report(&make_partition(s, 1024, 10).unwrap()).unwrap())
        .collect();
    let a: Vec<f64> = r.iter().map(|x| x.alpha_ell).collect();
    let u: Vec<f64> = r.iter().map(|x| x.upsilon).collect();
    check(a[0] > a[1] && a[1] > a[2], || format!("α_ℓ interleaved/random/consecutive = {a:?}"))?;
    check(u[0] > u[1] && u[1] > u[2], || format!("Υ interleaved/random/consecutive = {u:?}"))?;
    Ok(format!(
        "α_ℓ {:.3} > {:.3} > {:.3}; Υ {:.3} > {:.3} > {:.3}",
        a[0], a[1], a[2], u[0], u[1], u[2]
    ))
}

fn c09_random_bound_frequency() -> Outcome {
    let blur = blur_fixture();
    let an = SaAnalyzer::new(blur.matrix()).unwrap().with_deltas(&[CERTIFIED_DELTA]).unwrap();
    let ks = [8usize, 16, 32, 64];
    let (mut held, mut trials) = (0, 0);
    for seed in 0..200u64 {
        let k = ks[seed as usize % ks.len()];
        let r = an.report(&make_partition(Scheme::Random { seed }, 1024, k).unwrap()).unwrap();
        let b = r.random_bound(CERTIFIED_DELTA).unwrap();
        check(b.in_window, || format!("K={k} is outside the validity window"))?;
        trials += 1;
        if b.alpha_r <= r.upsilon {
            held += 1;
        }
    }
    let rate = held as f64 / trials as f64;
    check(rate >= 0.99, || format!("bound held in {held}/{trials}"))?;
    Ok(format!("α_r(δ=15) ≤ Υ in {held}/{trials} random partitions"))
}

fn c10_cross_validation() -> Outcome {
    let start = Instant::now();
    let (lambda, n) = (0.002, 64usize);
    let x = make_signal(SignalKind::Phantom { d1: 8, d2: 8 }, n, 0).unwrap();
    let (b, _) = measure(&Matrix::identity(n), &x, Some(1.0), 3).unwrap();
    let p = Problem::new(identity_operator(n), b.clone(), Some(x), RegularizerSpec::tv(8, 8, lambda)).unwrap();
    // ½‖x − b‖² + nλ‖Dx‖₁ has the same minimizer as the 1/n-scaled objective.
    let fgp = tv_prox_fgp(&b, n as f64 * lambda, 5000, &diff_operator(8, 8).unwrap()).unwrap();
    let pdhg = run(&p, &SolverConfig::new(Algorithm::Pdhg, 5000)).unwrap().solution;
    let acc = run(
        &p,
        &SolverConfig::new(Algorithm::AccPdSgd, 1).partition(Scheme::Interleaved, 1).loops(20, 1000),
    )
    .unwrap()
    .solution;
    let linf = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max);
    let (d1, d2) = (linf(&pdhg, &fgp), linf(&acc, &fgp));
    check(d1 < 1e-4 && d2 < 1e-4, || format!("ℓ∞ gaps: pdhg {d1:e}, acc {d2:e}"))?;

    let x_star = tv_prox_fgp(&b, n as f64 * lambda, 50_000, &diff_operator(8, 8).unwrap()).unwrap();
    let f_star = p.objective(&x_star);
    let fista = run(&p, &SolverConfig::new(Algorithm::Fista, 300)).unwrap();
    let x0 = p.backprojection();
    let r0: f64 = x0.iter().zip(&x_star).map(|(u, v)| (u - v) * (u - v)).sum();
    let l = p.lipschitz().unwrap();
    for (k, obj) in fista.trace.objectives().iter().enumerate().skip(1) {
        let bound = 4.0 * l * r0 / ((k + 1) as f64).powi(2);
        check(obj - f_star <= bound, || format!("FISTA k={k}: gap {:e} > {bound:e}", obj - f_star))?;
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("ℓ∞ to FGP: pdhg {d1:.1e}, acc {d2:.1e}; FISTA within envelope for 300 iterations ({t:.2?})"))
}

fn c11_deblur() -> Outcome {
    let start = Instant::now();
    let blur = blur_fixture();
    let x = make_signal(SignalKind::Phantom { d1: 32, d2: 32 }, 1024, 0).unwrap();
    let (b, _) = measure(blur.matrix(), &x, Some(3.0), 1).unwrap();
    let p = Problem::new(blur, b, Some(x), RegularizerSpec::tv(32, 32, 3e-5)).unwrap();
    let epochs = 40;
    let mut configs = vec![SolverConfig::new(Algorithm::Pdhg, epochs)];
    configs.extend((0..5).map(|s| {
        SolverConfig::new(Algorithm::AccPdSgd, epochs).partition(Scheme::Interleaved, 10).seed(s)
    }));
    let out: Vec<_> = run_experiment(&p, &configs).into_iter().map(Result::unwrap).collect();
    let pd = out[0].trace.est_errors().unwrap();
    let mut min_ratio = f64::INFINITY;
    for e in 5..=epochs {
        let mut vals: Vec<f64> = out[1..]
            .iter()
            .map(|o| {
                let r = o.trace.records.iter().find(|r| r.epoch == e as f64).expect("epoch logged");
                r.est_error.unwrap()
            })
            .collect();
        vals.sort_by(f64::total_cmp);
        let med = vals[2];
        check(med < pd[e], || format!("epoch {e}: acc median {med:.4} ≥ pdhg {:.4}", pd[e]))?;
        min_ratio = min_ratio.min(pd[e] / med);
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    Ok(format!(
        "epoch 40: acc median {:.3} vs pdhg {:.3}; pdhg/acc ≥ {min_ratio:.2} from epoch 5 ({t:.2?})",
        {
            let mut v: Vec<f64> = out[1..].iter().map(|o| o.trace.last().unwrap().est_error.unwrap()).collect();
            v.sort_by(f64::total_cmp);
            v[2]
        },
        pd[epochs]
    ))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stochascope"))
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let o = bin().args(args).arg("--out-dir").arg(out).output().map_err(|e| e.to_string())?;
    check(o.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))
}

/// File contents with wall-clock fields removed: the last CSV column of a
/// trace, and `wall_ms` lines of JSON.
fn normalized(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    let name = path.file_name().unwrap().to_string_lossy();
    if name.starts_with("trace_") {
        text.lines().map(|l| l.rsplit_once(',').map_or(l, |p| p.0)).collect::<Vec<_>>().join("\n")
    } else {
        text.lines().filter(|l| !l.contains("\"wall_ms\"")).collect::<Vec<_>>().join("\n")
    }
}

fn c12_determinism() -> Outcome {
    let work = TempDir::new().map_err(|e| e.to_string())?;
    let w = work.path();
    let spec = w.join("spec.json");
    fs::write(
        &spec,
        r#"{"operator":{"kind":"blur","d1":16,"d2":16,"r_min":0.5,"r_max":2.5},"snr":3.0,
            "reg":{"g":{"kind":"l1"},"lambda":1e-4,"d":{"kind":"finite_diff","d1":16,"d2":16}}}"#,
    )
    .unwrap();
    let configs = w.join("configs.json");
    fs::write(
        &configs,
        r#"[{"algorithm":"fista","epochs":4},
            {"algorithm":"pdhg","epochs":4},
            {"algorithm":"acc_pd_sgd","epochs":4,"seed":2,
             "sampling":{"kind":"partition","scheme":"random","k":8}}]"#,
    )
    .unwrap();
    let mut files = 0;
    let mut outputs = Vec::new();
    for rep in 0..2 {
        let out = w.join(format!("run{rep}"));
        let bundle = out.join("bundle");
        let bs = bundle.to_str().unwrap();
        run_cli(&["synth", spec.to_str().unwrap(), "--seed", "11"], &bundle)?;
        let a = out.join("a");
        run_cli(&["analyze", bs, "--k-list", "2,4,8", "--scheme", "interleaved,random,consecutive", "--seed", "4"], &a)?;
        run_cli(&["analyze", bs, "--k-list", "4", "--scheme", "random", "--format", "json", "--seed", "4"], &a.join("json"))?;
        run_cli(&["compare-partitions", bs, "--k", "8", "--seed", "4"], &out.join("c"))?;
        run_cli(&["compare-partitions", bs, "--k", "8", "--seed", "4", "--format", "json"], &out.join("cj"))?;
        run_cli(&["solve", bs, configs.to_str().unwrap()], &out.join("s"))?;
        let mut listing: Vec<(String, String)> = walk(&out)
            .into_iter()
            .map(|p| (p.strip_prefix(&out).unwrap().display().to_string(), normalized(&p)))
            .collect();
        listing.sort();
        files = listing.len();
        outputs.push(listing);
    }
    if let Some(((name, _), _)) = outputs[0].iter().zip(&outputs[1]).find(|(x, y)| x != y) {
        return Err(format!("{name} differs between runs"));
    }
    check(outputs[0].len() == outputs[1].len(), || "file sets differ".into())?;
    Ok(format!("synth, analyze, compare-partitions, solve: {files} files identical across runs"))
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("bound chain on seeded instances", c01_bound_chain),
        ("tightness cases", c02_tightness),
        ("exhaustive bipartition upper bound", c03_exhaustive_bipartitions),
        ("maximum dimension table", c04_table),
        ("minibatch SGD contraction envelope", c05_sgd_envelope),
        ("stochastic gradient unbiasedness", c06_unbiasedness),
        ("SA curves by ensemble", c07_sa_curves),
        ("partition scheme ordering on blur", c08_partition_ordering),
        ("random-partition bound frequency", c09_random_bound_frequency),
        ("solver cross-validation on TV denoising", c10_cross_validation),
        ("deblurring: Acc-PD-SGD below PDHG", c11_deblur),
        ("command determinism", c12_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("[PASS] {:>2}. {name}: {detail}", i + 1),
            Err(why) => {
                println!("[FAIL] {:>2}. {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
