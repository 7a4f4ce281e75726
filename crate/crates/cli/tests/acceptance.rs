//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line with its measured runtime (visible under --nocapture).
//!
//! The tests serialize on a process-wide lock so each runtime budget is
//! measured on an otherwise idle process.

use std::fmt::Write as _;
use std::process::Command;
use std::sync::Mutex;
use std::time::Instant;

use randls_core::basis::BasisKind;
use randls_core::coeff::CoefficientFunction;
use randls_core::complexity::{self, m_of_n, Count, Criterion};
use randls_core::error_lab;
use randls_core::instance::ProblemInstance;
use randls_core::sampler::SamplingDensity;
use randls_core::spectral::SpectralData;
use randls_core::stream::{experiment_seed, replication_rng, StreamId};
use randls_core::weights::WeightFamily;
use randls_core::wls;

static GATE: Mutex<()> = Mutex::new(());

fn exclusive() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(tag: &str, pass: bool, started: Instant, budget_s: f64, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    let in_budget = elapsed < budget_s;
    println!(
        "ACCEPTANCE {tag}: {} ({detail}; {elapsed:.1}s of {budget_s:.0}s budget)",
        if pass && in_budget { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{tag} failed: {detail}");
    assert!(
        in_budget,
        "{tag} exceeded its runtime budget: {elapsed:.1}s >= {budget_s}s"
    );
}

fn algebraic_instance(kind: BasisKind, d: usize, m_max: usize) -> ProblemInstance {
    ProblemInstance::new(kind, WeightFamily::algebraic(1.0), d, m_max).unwrap()
}

/// C1: the solve reproduces every unit-ball function of the fitted span to
/// relative G-error 1e-10, across all basis families, d in {1,2}, m in
/// {1,4,8}, 20 random functions each.
#[test]
fn c01_reproduction() {
    let _g = exclusive();
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut solves = 0;
    for kind in [BasisKind::Fourier, BasisKind::Legendre, BasisKind::Cosine] {
        for d in [1usize, 2] {
            let inst = algebraic_instance(kind, d, 16);
            for (mi, m) in [1usize, 4, 8].into_iter().enumerate() {
                let n = 64 * m;
                let seed = experiment_seed(0xC1, (d * 100 + mi) as u64 + kind as u64 * 7);
                let (set, _) =
                    wls::draw_accepted(&inst, m, n, StreamId::new(seed, 0), 100).unwrap();
                for rep in 0..20u64 {
                    let mut rng = replication_rng(seed ^ 0x5a5a, rep);
                    let f =
                        CoefficientFunction::random_unit_f_norm(inst.spectral(), m, &mut rng)
                            .unwrap();
                    let samples = wls::evaluate_at_nodes(&inst, &f, &set).unwrap();
                    let model = wls::solve(&inst, m, &set, &samples).unwrap();
                    let rel =
                        wls::g_error(&inst, &model, &f).unwrap() / f.g_norm_sq().sqrt();
                    worst = worst.max(rel);
                    solves += 1;
                }
            }
        }
    }
    report(
        "C01 reproduction",
        worst <= 1e-10,
        started,
        10.0,
        &format!("{solves} solves, worst relative error {worst:.2e}"),
    );
}

/// C2: on accepted draws the inverse Gram norm bound holds with zero
/// tolerance, 100/100 per configuration.
#[test]
fn c02_inverse_norm_bound() {
    let _g = exclusive();
    let started = Instant::now();
    let mut held = 0;
    let mut total = 0;
    let mut worst_margin: f64 = 0.0;
    for d in [1usize, 2] {
        let inst = algebraic_instance(BasisKind::Legendre, d, 16);
        for m in [4usize, 8] {
            let n = 64 * m;
            for rep in 0..100u64 {
                let seed = experiment_seed(0xC2, (d * 1000 + m) as u64);
                let (set, _) =
                    wls::draw_accepted(&inst, m, n, StreamId::new(seed, rep), 100).unwrap();
                let matrices = wls::assemble(&inst, m, &set).unwrap();
                let check = wls::inverse_norm_bound_check(&matrices).unwrap();
                total += 1;
                if check.holds {
                    held += 1;
                }
                worst_margin = worst_margin.max(check.value / check.bound);
            }
        }
    }
    report(
        "C02 inverse-norm bound",
        held == total && total == 400,
        started,
        60.0,
        &format!("{held}/{total} draws, worst value/bound ratio {worst_margin:.3}"),
    );
}

/// C3: empirical tail probabilities of the Gram deviation never exceed the
/// concentration bound on the full (m, n, t) grid at R = 2000.
#[test]
fn c03_concentration_grid() {
    let _g = exclusive();
    let started = Instant::now();
    let inst = algebraic_instance(BasisKind::Legendre, 1, 16);
    let mut detail = String::new();
    let mut all_hold = true;
    let mut experiment = 0u64;
    for m in [2usize, 4, 8] {
        for n in [256usize, 1024, 4096] {
            for t in [0.3f64, 0.5] {
                let rep = error_lab::concentration_experiment(
                    &inst,
                    m,
                    n,
                    t,
                    2000,
                    experiment_seed(0xC3, experiment),
                )
                .unwrap();
                experiment += 1;
                if rep.empirical_prob > rep.bound {
                    all_hold = false;
                    write!(
                        detail,
                        " VIOLATION m={m} n={n} t={t}: {} > {}",
                        rep.empirical_prob, rep.bound
                    )
                    .unwrap();
                }
            }
        }
    }
    report(
        "C03 concentration grid",
        all_hold,
        started,
        300.0,
        &format!("18 cells at R=2000{detail}"),
    );
}

/// C4: Monte Carlo mean squared errors stay under the squared theorem bound
/// plus three standard errors for the whole test battery.
#[test]
fn c04_error_bound() {
    let _g = exclusive();
    let started = Instant::now();
    let inst = algebraic_instance(BasisKind::Legendre, 2, 64);
    let delta = 0.5;
    let r = 200;
    let mut cases = 0;
    let mut all_hold = true;
    let mut detail = String::new();
    let mut experiment = 0u64;
    for n in [512usize, 2048] {
        let m = m_of_n(n, delta).unwrap();
        assert!(m >= 1);
        let battery =
            error_lab::test_battery(&inst, m, experiment_seed(0xC4, 1_000 + experiment)).unwrap();
        for (label, f) in battery {
            let est = error_lab::randomized_error_mc(
                &inst,
                &f,
                n,
                delta,
                r,
                experiment_seed(0xC4, experiment),
            )
            .unwrap();
            experiment += 1;
            cases += 1;
            if est.mean_sq > est.bound_sq + 3.0 * est.std_err {
                all_hold = false;
                write!(
                    detail,
                    " VIOLATION n={n} f={label}: {} > {} + 3*{}",
                    est.mean_sq, est.bound_sq, est.std_err
                )
                .unwrap();
            }
        }
    }
    report(
        "C04 expected-error bound",
        all_hold,
        started,
        300.0,
        &format!("{cases} battery cases at R={r}, delta={delta}{detail}"),
    );
}

/// C5: with (m, n) tied by the budget rule, the unconditioned acceptance
/// frequency is at least 1 - delta - 0.03 over 1000 trials.
#[test]
fn c05_acceptance_frequency() {
    let _g = exclusive();
    let started = Instant::now();
    let inst = algebraic_instance(BasisKind::Legendre, 2, 16);
    let trials = 1000u64;
    let n = 2048;
    let mut all_hold = true;
    let mut detail = String::new();
    for (i, delta) in [0.1f64, 0.5].into_iter().enumerate() {
        let m = m_of_n(n, delta).unwrap();
        assert!(m >= 1);
        let density = SamplingDensity::new(&inst, m).unwrap();
        let seed = experiment_seed(0xC5, i as u64);
        let mut accepted = 0u64;
        for rep in 0..trials {
            let set = density.draw_nodes(n, StreamId::new(seed, rep)).unwrap();
            if wls::assemble(&inst, m, &set).unwrap().is_accepted() {
                accepted += 1;
            }
        }
        let rate = accepted as f64 / trials as f64;
        let floor = 1.0 - delta - 0.03;
        write!(detail, " delta={delta}: rate={rate} (floor {floor});").unwrap();
        if rate < floor {
            all_hold = false;
        }
    }
    report(
        "C05 acceptance frequency",
        all_hold,
        started,
        300.0,
        detail.trim(),
    );
}

/// C6: on the geometric spectrum the Monte Carlo randomized-error estimate
/// sits under the inner decay curve at every grid n, and both curves are
/// evaluated (outer dominating inner).
#[test]
fn c06_exponential_decay() {
    let _g = exclusive();
    let started = Instant::now();
    let inst = ProblemInstance::new(
        BasisKind::Fourier,
        WeightFamily::exponential(1.0, 0.5),
        1,
        64,
    )
    .unwrap();
    let report_data =
        error_lab::exp_decay_check(&inst, &[200, 400, 800, 1600], 200, 0xC6).unwrap();
    let mut all_hold = true;
    let mut detail = String::new();
    for row in &report_data.rows {
        let se_rmse = if row.rmse > 0.0 {
            row.std_err / (2.0 * row.rmse)
        } else {
            0.0
        };
        let inner_ok = row.rmse <= row.bound_inner + 3.0 * se_rmse;
        let curves_ok = row.bound_outer >= row.bound_inner;
        if !(inner_ok && curves_ok) {
            all_hold = false;
        }
        write!(
            detail,
            " n={}: rmse={:.4} inner={:.4} outer={:.4};",
            row.n, row.rmse, row.bound_inner, row.bound_outer
        )
        .unwrap();
    }
    report(
        "C06 exponential decay",
        all_hold,
        started,
        120.0,
        detail.trim(),
    );
}

/// C7: the binary-search complexity count matches a linear-scan oracle
/// exactly on 500 random spectra times 20 accuracies.
#[test]
fn c07_complexity_oracle() {
    let _g = exclusive();
    let started = Instant::now();
    use rand::Rng;
    let mut rng = replication_rng(0xC7, 0);
    let mut checked = 0u64;
    let mut all_match = true;
    for _ in 0..500 {
        let len = rng.gen_range(1..=10_000);
        let mut lambdas = Vec::with_capacity(len);
        let mut v: f64 = rng.gen_range(0.05..20.0);
        for _ in 0..len {
            lambdas.push(v);
            v *= rng.gen_range(0.3..1.0);
            if v < 1e-280 {
                v = 1e-280;
            }
        }
        let spectral = SpectralData::from_sorted_lambdas(lambdas).unwrap();
        for _ in 0..20 {
            let eps: f64 = rng.gen_range(1e-9..1.0f64);
            for criterion in [Criterion::Abs, Criterion::Nor] {
                let fast = complexity::n_wor(&spectral, eps, criterion).unwrap();
                // Independent oracle: first index passing the target.
                let target = eps
                    * match criterion {
                        Criterion::Abs => 1.0,
                        Criterion::Nor => spectral.lambdas()[0].sqrt(),
                    };
                let slow = spectral
                    .lambdas()
                    .iter()
                    .position(|&l| l.sqrt() <= target)
                    .map_or(Count::Exceeded, |i| Count::Finite(i as u64));
                if fast != slow {
                    all_match = false;
                }
                checked += 1;
            }
        }
    }
    report(
        "C07 complexity oracle",
        all_match,
        started,
        10.0,
        &format!("{checked} comparisons, exact match"),
    );
}

/// C8: the closed-form suprema agree with a million-point grid search to
/// relative 1e-6.
#[test]
fn c08_constant_cross_check() {
    let _g = exclusive();
    let started = Instant::now();
    let mut all_hold = true;
    let mut detail = String::new();
    for omega in [0.1f64, 0.5, 1.0, 2.0] {
        let closed = complexity::power_transfer_constant(omega).unwrap();
        let mut grid_best = f64::NEG_INFINITY;
        let points = 1_000_000;
        for i in 0..=points {
            let x = 10f64.powf(5.0 * i as f64 / points as f64);
            let v = 96.0 * std::f64::consts::SQRT_2 * (x.ln() + (192.0 * std::f64::consts::SQRT_2).ln())
                / x.powf(omega);
            grid_best = grid_best.max(v);
        }
        let rel = ((closed - grid_best) / grid_best).abs();
        write!(detail, " omega={omega}: rel={rel:.2e};").unwrap();
        if !(rel < 1e-6 && closed >= grid_best) {
            all_hold = false;
        }
    }
    report(
        "C08 constant cross-check",
        all_hold,
        started,
        60.0,
        detail.trim(),
    );
}

/// C9: stochastic commands rerun with the same seed produce byte-identical
/// artifacts.
#[test]
fn c09_artifact_determinism() {
    let _g = exclusive();
    let started = Instant::now();
    let bin = env!("CARGO_BIN_EXE_randls");
    let base = std::env::temp_dir().join("randls-acceptance-c9");
    let _ = std::fs::remove_dir_all(&base);
    std::fs::create_dir_all(&base).unwrap();
    let config = base.join("problem.json");
    std::fs::write(
        &config,
        r#"{"basis":{"kind":"legendre"},"weights":{"kind":"algebraic","alpha":1.0},"d":1,"M":64}"#,
    )
    .unwrap();
    let exp_config = base.join("exp.json");
    std::fs::write(
        &exp_config,
        r#"{"basis":{"kind":"fourier"},"weights":{"kind":"exponential","a":1.0,"q":0.5},"d":1,"M":64}"#,
    )
    .unwrap();

    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("sample", vec!["sample", "-m", "3", "-n", "16"]),
        (
            "error-curve",
            vec!["error-curve", "--n-grid", "512", "--delta", "0.5", "--replications", "5"],
        ),
        (
            "concentration",
            vec![
                "concentration",
                "--m-grid",
                "2",
                "--n-grid",
                "256",
                "--t-grid",
                "0.5",
                "--replications",
                "20",
            ],
        ),
        (
            "exp-decay",
            vec!["exp-decay", "--n-grid", "800,1600", "--replications", "5"],
        ),
    ];

    let mut all_identical = true;
    let mut detail = String::new();
    for (name, args) in &commands {
        let cfg = if *name == "exp-decay" { &exp_config } else { &config };
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = base.join(format!("{name}-{run}"));
            // Vary the thread count too: artifacts must not depend on it.
            let threads = if run == 0 { "1" } else { "2" };
            let status = Command::new(bin)
                .args(args)
                .arg("--config")
                .arg(cfg)
                .arg("--seed")
                .arg("20240131")
                .arg("--threads")
                .arg(threads)
                .arg("--out")
                .arg(&out)
                .status()
                .unwrap();
            assert!(status.success(), "{name} run {run} failed");
            let mut files: Vec<_> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            let bytes: Vec<(String, Vec<u8>)> = files
                .into_iter()
                .map(|p| {
                    (
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        std::fs::read(&p).unwrap(),
                    )
                })
                .collect();
            outputs.push(bytes);
        }
        let identical = outputs[0] == outputs[1];
        if !identical {
            all_identical = false;
        }
        write!(
            detail,
            " {name}: {} files {};",
            outputs[0].len(),
            if identical { "identical" } else { "DIFFER" }
        )
        .unwrap();
    }
    report(
        "C09 artifact determinism",
        all_identical,
        started,
        120.0,
        detail.trim(),
    );
}

/// C10: the averaged empirical Gram matrix matches the identity entrywise at
/// the four-standard-error level.
#[test]
fn c10_mixture_mean_identity() {
    let _g = exclusive();
    let started = Instant::now();
    let inst = algebraic_instance(BasisKind::Legendre, 1, 16);
    let check = error_lab::mixture_mean_check(&inst, 4, 32, 2000, 0xC10).unwrap();
    report(
        "C10 mixture mean identity",
        check.holds_at_4_sigma,
        started,
        120.0,
        &format!("max entry deviation {:.2} standard errors", check.max_sigma),
    );
}
