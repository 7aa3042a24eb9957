//! Acceptance suite: one PASS/FAIL line per criterion. Runs under a custom
//! harness so every line is printed; pass a substring (e.g. `C7`) to run a
//! subset. Exits nonzero when any selected criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use lesskit::data::{gen_sparse_synthetic, gen_synthetic, write_csv, Coherence};
use lesskit::diagnostics::{
    hat_matrix_expectation_check, hw_tail_compare, psi2_estimate, sketch_leverage_uniformity, subspace_distortion,
    whitener_from,
};
use lesskit::estimators::{
    constrained_full_solve, constrained_sketch_solve, loo_cv_loss, ols_error_law, statdim, statdim_inverse,
};
use lesskit::harness::{emit_svg_plot, run_ols_sweep, run_svd_sweep};
use lesskit::linalg::{qr_thin, solve_least_squares, stable_rank};
use lesskit::rng::stream_rng;
use lesskit::sketch::{sample_hard_example, sketch_pair, sketch_srht, SketchOperator};
use lesskit::{
    ConstrainedProblem, DenseMatrix, DenseVector, ExperimentConfig, RegressionProblem, SketchFamily, SketchSpec,
    SweepResult,
};

type Outcome = (bool, String);
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = stream_rng(seed, 0);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn ols_cfg(coherence: &str, operators: &str, grid: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "synthetic.rows = 2000\nsynthetic.dim = 10\nsynthetic.coherence = {coherence}\nsynthetic.seed = 1\n\
         operators = {operators}\nn_grid = {grid}\ntrials = 2000\nseed = 20240601\n"
    ))
    .expect("valid config")
}

fn cell_summary(r: &SweepResult) -> String {
    format!("n={} mean={:.5} se={:.5} law={:.5}", r.n, r.mean_norm_err, r.stderr, r.gaussian_formula)
}

fn c1_gaussian_law() -> Outcome {
    let res = run_ols_sweep(&ols_cfg("low", "gaussian", "25, 40, 80")).unwrap();
    let ok = res.iter().all(|r| (r.mean_norm_err - r.gaussian_formula).abs() <= 3.0 * r.stderr);
    (ok, res.iter().map(cell_summary).collect::<Vec<_>>().join("; "))
}

fn within_less_budget(r: &SweepResult) -> bool {
    let budget = (3.0 * r.stderr).max(0.05 * r.gaussian_formula);
    (r.mean_norm_err - r.gaussian_formula).abs() <= budget
}

fn c2_less_law() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for coherence in ["low", "high"] {
        let res = run_ols_sweep(&ols_cfg(coherence, "less", "25, 40, 80")).unwrap();
        for r in &res {
            ok &= within_less_budget(r);
            detail.push(format!("{coherence} {}", cell_summary(r)));
        }
    }
    (ok, detail.join("; "))
}

fn c3_uniform_degrades() -> Outcome {
    let res = run_ols_sweep(&ols_cfg("high", "uniform, less", "40")).unwrap();
    let uniform = res.iter().find(|r| r.operator == "uniform").unwrap();
    let less = res.iter().find(|r| r.operator == "less").unwrap();
    let law = ols_error_law(10, 40).unwrap();
    let ok = uniform.mean_norm_err >= 1.5 * law && within_less_budget(less);
    (
        ok,
        format!(
            "uniform/law = {:.2}, less mean = {:.5} vs law {:.5}",
            uniform.mean_norm_err / law,
            less.mean_norm_err,
            law
        ),
    )
}

/// Refits without each sketched row in turn.
fn naive_loo(sa: &DenseMatrix, sb: &[f64]) -> f64 {
    let n = sa.rows();
    let mut total = 0.0;
    for i in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&r| r != i).collect();
        let sub = DenseMatrix::from_fn(n - 1, sa.cols(), |r, c| sa[(keep[r], c)]);
        let y: Vec<f64> = keep.iter().map(|&r| sb[r]).collect();
        let w = solve_least_squares(&sub, &y).unwrap();
        let pred: f64 = (0..sa.cols()).map(|c| sa[(i, c)] * w[c]).sum();
        total += (pred - sb[i]).powi(2);
    }
    total
}

fn c4_cv_shortcut() -> Outcome {
    let mut rng = stream_rng(404, 0);
    let mut worst = 0.0f64;
    for inst in 0..200u64 {
        let d = rng.random_range(1..=8usize);
        let n = rng.random_range(d + 2..=40usize);
        let rows = rng.random_range(n.max(d + 1)..=200usize);
        let a = gaussian_matrix(rows, d, 1000 + inst);
        let b = DenseVector::from(gaussian_matrix(rows, 1, 5000 + inst).into_vec());
        let p = RegressionProblem::new(a, b).unwrap();
        let family = [SketchFamily::Gaussian, SketchFamily::Less, SketchFamily::Srht][inst as usize % 3];
        let spec = SketchSpec::new(family, n, if family == SketchFamily::Less { d } else { 0 }, inst);
        let pair = sketch_pair(&spec, p.a(), p.b(), Some(p.leverage())).unwrap();
        let fast = loo_cv_loss(&p, &pair).unwrap();
        let slow = naive_loo(&pair.sa, &pair.sb);
        worst = worst.max((fast - slow).abs() / slow.abs().max(f64::MIN_POSITIVE));
    }
    (worst <= 1e-8, format!("max relative gap {worst:.2e} over 200 instances"))
}

fn c5_leverage_uniformity() -> Outcome {
    let ds = gen_synthetic(4000, 20, Coherence::Low, 1.0, 5).unwrap();
    let p = ds.problem().unwrap();
    let op = p.operator(SketchSpec::less(2000, 20, 0)).unwrap();
    let mut hits = 0;
    let mut devs = Vec::new();
    for seed in 0..100 {
        let sa = op.apply_with_seed(p.a(), seed).unwrap();
        let dev = sketch_leverage_uniformity(&sa).unwrap();
        devs.push(dev);
        if dev <= 0.5 {
            hits += 1;
        }
    }
    devs.sort_by(f64::total_cmp);
    (
        hits >= 95,
        format!("{hits}/100 seeds with max deviation <= 0.5 (median deviation {:.3}, min {:.3})", devs[50], devs[0]),
    )
}

fn c6_hat_matrix() -> Outcome {
    let p = gen_synthetic(500, 5, Coherence::Low, 1.0, 6).unwrap().problem().unwrap();
    let g = hat_matrix_expectation_check(&p, &SketchSpec::gaussian(25, 0), 20_000, 61).unwrap();
    let l = hat_matrix_expectation_check(&p, &SketchSpec::less(25, 5, 0), 20_000, 62).unwrap();
    (g <= 0.05 && l <= 0.10, format!("gaussian deviation {g:.4}, less deviation {l:.4}"))
}

fn c7_hanson_wright() -> Outcome {
    let d = 10;
    let p = gen_synthetic(2000, d, Coherence::Low, 1.0, 7).unwrap().problem().unwrap();
    let op = SketchOperator::new(SketchSpec::less(1, d, 0), 2000, Some(p.leverage())).unwrap();
    let whitener = whitener_from(p.a()).unwrap();
    let sampler = |s: u64| DenseVector::from(op.apply_with_seed(p.a(), s).unwrap().row(0));

    let g = gaussian_matrix(d, d, 71);
    let psd = g.matmul(&g.transpose()).scaled(1.0 / d as f64);
    let u = gaussian_matrix(d, 1, 72);
    let u = u.scaled(1.0 / u.frobenius_norm());
    let rank1 = u.matmul(&u.transpose());

    let mut ok = true;
    let mut detail = Vec::new();
    for (name, b, seed) in [("identity", DenseMatrix::identity(d), 73), ("psd", psd, 74), ("rank1", rank1, 75)] {
        let report = hw_tail_compare(sampler, &whitener, &b, 100_000, seed).unwrap();
        let ratio = report.ratio(0.99).unwrap();
        ok &= ratio <= 2.0;
        detail.push(format!("less/{name} q0.99 ratio {ratio:.3}"));
    }

    let hd = 64;
    let hard = |s: u64| DenseVector::from(sample_hard_example((hd as f64).sqrt(), hd, 1, s).unwrap().row(0));
    let eye = DenseMatrix::identity(hd);
    let report = hw_tail_compare(hard, &eye, &eye, 100_000, 76).unwrap();
    let ratio = report.ratio(0.999).unwrap();
    ok &= ratio >= 3.0;
    detail.push(format!("hard example q0.999 ratio {ratio:.3}"));
    (ok, detail.join("; "))
}

fn c8_psi2() -> Outcome {
    let mut rng = stream_rng(8, 0);
    let rad: Vec<f64> = (0..1_000_000).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let mut rng = stream_rng(8, 1);
    let normal: Vec<f64> = (0..1_000_000).map(|_| rng.sample(StandardNormal)).collect();
    let r = psi2_estimate(&rad).unwrap() / (1.0 / std::f64::consts::LN_2.sqrt());
    let n = psi2_estimate(&normal).unwrap() / (8.0f64 / 3.0).sqrt();
    ((r - 1.0).abs() <= 0.02 && (n - 1.0).abs() <= 0.03, format!("rademacher ratio {r:.4}, normal ratio {n:.4}"))
}

fn c9_statdim_inverse() -> Outcome {
    let d = 10;
    let q = qr_thin(&gaussian_matrix(50, d, 9)).unwrap().q;
    let mut identity_gap = 0.0f64;
    for n in [0.5, 1.0, 2.5, 5.0, 7.0, 9.0, 9.9] {
        let lam = statdim_inverse(&q, n).unwrap();
        identity_gap = identity_gap.max((lam - (d as f64 / n - 1.0)).abs());
    }
    let mut rng = stream_rng(90, 0);
    let mut round_trip = 0.0f64;
    for i in 0..100u64 {
        let rows = rng.random_range(5..40usize);
        let cols = rng.random_range(2..=rows.min(15));
        let a = gaussian_matrix(rows, cols, 900 + i);
        let lam = 10f64.powf(rng.random_range(-3.0..3.0));
        let n = statdim(&a, lam).unwrap();
        let back = statdim_inverse(&a, n).unwrap();
        round_trip = round_trip.max((back - lam).abs() / lam);
    }
    (
        identity_gap <= 1e-10 && round_trip <= 1e-9,
        format!("identity gap {identity_gap:.2e}, round trip relative gap {round_trip:.2e}"),
    )
}

fn c10_rsvd_parity() -> Outcome {
    let cfg = ExperimentConfig::parse(
        "mode = svd\nsynthetic.rows = 1000\nsynthetic.dim = 200\nsynthetic.decay = 0.15\nsynthetic.seed = 10\n\
         operators = gaussian, less\nn_grid = 10\ntrials = 2000\nseed = 10\n",
    )
    .unwrap();
    let (ds, _) = cfg.load_dataset().unwrap();
    let sr = stable_rank(&ds.a).unwrap();
    let res = run_svd_sweep(&cfg).unwrap();
    let g = res.iter().find(|r| r.operator == "gaussian").unwrap().mean_norm_err;
    let l = res.iter().find(|r| r.operator == "less").unwrap().mean_norm_err;
    let ratio = l / g;
    (
        sr >= 40.0 && (0.9..=1.1).contains(&ratio),
        format!("stable rank {sr:.1}, less/gaussian mean error ratio {ratio:.4}"),
    )
}

fn c11_lasso() -> Outcome {
    let mut hits = 0;
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let (ds, w_true) = gen_sparse_synthetic(2000, 40, Coherence::Low, 1.0, 3, 1100 + seed).unwrap();
        let cp = ConstrainedProblem::new(ds.problem().unwrap(), w_true.norm_l1(), 3).unwrap();
        let full = constrained_full_solve(&cp, 1e-8).unwrap();
        let sketched = constrained_sketch_solve(&cp, &SketchSpec::less(400, 40, seed), 1e-8).unwrap();
        let ratio = cp.base.loss(&sketched) / cp.base.loss(&full);
        worst = worst.max(ratio);
        if ratio <= 1.1 {
            hits += 1;
        }
    }
    (hits >= 95, format!("{hits}/100 seeds within 1.1x (worst ratio {worst:.4})"))
}

fn c12_distortion() -> Outcome {
    let ds = gen_synthetic(1024, 10, Coherence::Low, 1.0, 12).unwrap();
    let full = sketch_srht(&ds.a, &ds.b, 1024, 3).unwrap();
    let srht = subspace_distortion(&full.sa, &ds.a).unwrap();

    let p = gen_synthetic(4000, 10, Coherence::Low, 1.0, 13).unwrap().problem().unwrap();
    let op = p.operator(SketchSpec::less(1000, 10, 0)).unwrap();
    let mut hits = 0;
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let e = subspace_distortion(&op.apply_with_seed(p.a(), seed).unwrap(), p.a()).unwrap();
        worst = worst.max(e);
        if e <= 0.35 {
            hits += 1;
        }
    }
    (
        srht <= 1e-8 && hits >= 95,
        format!("full SRHT distortion {srht:.2e}; less {hits}/100 seeds <= 0.35 (worst {worst:.3})"),
    )
}

fn render(results: &[SweepResult]) -> (Vec<u8>, Vec<u8>) {
    let mut csv = Vec::new();
    write_csv(results, &mut csv).unwrap();
    let mut svg = Vec::new();
    emit_svg_plot(results, &mut svg).unwrap();
    (csv, svg)
}

fn c13_determinism() -> Outcome {
    let cfg = ExperimentConfig::parse(
        "synthetic.rows = 500\nsynthetic.dim = 6\nsynthetic.coherence = high\nn_grid = 12, 30, 60\ntrials = 300\nseed = 13\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 3, 1] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        outputs.push(pool.install(|| render(&run_ols_sweep(&cfg).unwrap())));
    }
    let ok = outputs.windows(2).all(|w| w[0] == w[1]);
    (ok, format!("3 reruns (1, 3, 1 threads): csv {} bytes, svg {} bytes", outputs[0].0.len(), outputs[0].1.len()))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("C1", "gaussian exact error law", c1_gaussian_law),
        ("C2", "LESS matches the gaussian law", c2_less_law),
        ("C3", "uniform sampling degrades on high coherence", c3_uniform_degrades),
        ("C4", "leave-one-out shortcut exactness", c4_cv_shortcut),
        ("C5", "sketch leverage uniformity", c5_leverage_uniformity),
        ("C6", "sketched hat matrix expectation", c6_hat_matrix),
        ("C7", "hanson-wright tails", c7_hanson_wright),
        ("C8", "psi2 estimator calibration", c8_psi2),
        ("C9", "statistical dimension inverse", c9_statdim_inverse),
        ("C10", "randomized SVD parity", c10_rsvd_parity),
        ("C11", "lasso sketch-and-solve", c11_lasso),
        ("C12", "low distortion embeddings", c12_distortion),
        ("C13", "determinism", c13_determinism),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (id, title, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| id == f || title.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(outcome) => outcome,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {id:<3} {title}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
        if !ok {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria passed");
}
