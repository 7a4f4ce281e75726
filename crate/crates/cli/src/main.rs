//! Command line surface: ties problem configurations to experiments and
//! emits reproducible CSV/JSON artifacts.

mod report;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

use randls_core::coeff::CoefficientFunction;
use randls_core::complexity::{complexity_row, m_of_n, ComplexityParams, ComplexityTable, Criterion};
use randls_core::error_lab;
use randls_core::instance::{ProblemConfig, ProblemInstance};
use randls_core::sampler::SamplingDensity;
use randls_core::stream::{experiment_seed, StreamId};
use randls_core::tract;
use randls_core::wls;
use randls_core::Error as CoreError;

use report::{write_csv, write_json, Provenance};

#[derive(Parser)]
#[command(name = "randls", version, about = "Randomized L2 approximation from function values: weighted least squares on Christoffel-sampled nodes, with experiment and complexity tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem configuration JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Base seed; mandatory so every run is reproducible.
    #[arg(long)]
    seed: u64,
    /// Output directory for artifacts.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = rayon default). Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a node set from the mixture density and store it as JSON.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Mixture size (number of leading basis functions).
        #[arg(short, long)]
        m: usize,
        /// Number of nodes.
        #[arg(short, long)]
        n: usize,
    },
    /// Fit one weighted least squares model and report its exact G-error.
    Approximate {
        #[command(flatten)]
        common: Common,
        #[arg(short, long)]
        m: usize,
        #[arg(short, long)]
        n: usize,
        /// Test function: unit-norm mode at this flat index.
        #[arg(long, default_value_t = 1, conflicts_with = "f_random")]
        f_mode: usize,
        /// Test function: random unit-norm coefficients over the spectrum.
        #[arg(long)]
        f_random: bool,
        #[arg(long, default_value_t = 100)]
        max_retries: u32,
    },
    /// Monte Carlo error estimates over an n grid against the theorem bound.
    ErrorCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        replications: usize,
    },
    /// Tail frequencies of the Gram deviation against the concentration bound.
    Concentration {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        m_grid: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        t_grid: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        replications: usize,
    },
    /// Worst-case information complexity and its transfer bounds on an eps grid.
    Complexity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_grid: Vec<f64>,
        #[arg(long, value_enum, default_value_t = CriterionArg::Abs)]
        criterion: CriterionArg,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        omega: f64,
        /// Treat truncation markers in the table as a failure (exit 5).
        #[arg(long)]
        fail_on_truncation: bool,
    },
    /// Tractability-notion diagnostics over (eps, d) grids.
    Tractability {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        d_grid: Vec<usize>,
        #[arg(long, value_enum, default_value_t = CriterionArg::Nor)]
        criterion: CriterionArg,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        omega: f64,
    },
    /// Randomized-error decay on an n grid for a geometric spectrum.
    ExpDecay {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        replications: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CriterionArg {
    Abs,
    Nor,
}

impl From<CriterionArg> for Criterion {
    fn from(value: CriterionArg) -> Self {
        match value {
            CriterionArg::Abs => Criterion::Abs,
            CriterionArg::Nor => Criterion::Nor,
        }
    }
}

/// Failure with the exit code contract: 2 config, 3 parameter, 4 acceptance,
/// 5 truncation, 1 anything else.
struct Failure {
    kind: &'static str,
    message: String,
    exit: u8,
}

impl Failure {
    fn config(message: String) -> Self {
        Failure {
            kind: "config",
            message,
            exit: 2,
        }
    }

    fn io(err: std::io::Error) -> Self {
        Failure {
            kind: "io",
            message: err.to_string(),
            exit: 1,
        }
    }

    fn truncation(message: String) -> Self {
        Failure {
            kind: "truncation_exceeded",
            message,
            exit: 5,
        }
    }
}

impl From<CoreError> for Failure {
    fn from(err: CoreError) -> Self {
        let (kind, exit) = match &err {
            CoreError::InvalidParameter(_) | CoreError::OutsideDomain(_) => ("parameter", 3),
            CoreError::AcceptanceFailure { .. } => ("acceptance_failure", 4),
            CoreError::TruncationExceeded { .. } => ("truncation_exceeded", 5),
            _ => ("internal", 1),
        };
        Failure {
            kind,
            message: err.to_string(),
            exit,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let body = json!({
                "error": {
                    "kind": failure.kind,
                    "message": failure.message,
                    "exit_code": failure.exit,
                }
            });
            eprintln!("{body}");
            ExitCode::from(failure.exit)
        }
    }
}

struct Loaded {
    instance: ProblemInstance,
    config: ProblemConfig,
}

fn load(common: &Common, command: &str) -> Result<(Loaded, Provenance), Failure> {
    let bytes = std::fs::read(&common.config)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", common.config.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| Failure::config(format!("config is not UTF-8: {e}")))?;
    let config = ProblemConfig::from_json(&text).map_err(|e| Failure::config(e.to_string()))?;
    let instance = config.build()?;
    let provenance = Provenance::new(command, common.seed, &bytes);
    Ok((Loaded { instance, config }, provenance))
}

fn with_pool<T>(threads: usize, body: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    if threads == 0 {
        body()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(body)
    }
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Sample { common, m, n } => cmd_sample(common, m, n),
        Command::Approximate {
            common,
            m,
            n,
            f_mode,
            f_random,
            max_retries,
        } => cmd_approximate(common, m, n, f_mode, f_random, max_retries),
        Command::ErrorCurve {
            common,
            n_grid,
            delta,
            replications,
        } => cmd_error_curve(common, n_grid, delta, replications),
        Command::Concentration {
            common,
            m_grid,
            n_grid,
            t_grid,
            replications,
        } => cmd_concentration(common, m_grid, n_grid, t_grid, replications),
        Command::Complexity {
            common,
            eps_grid,
            criterion,
            delta,
            omega,
            fail_on_truncation,
        } => cmd_complexity(common, eps_grid, criterion.into(), delta, omega, fail_on_truncation),
        Command::Tractability {
            common,
            eps_grid,
            d_grid,
            criterion,
            delta,
            omega,
        } => cmd_tractability(common, eps_grid, d_grid, criterion.into(), delta, omega),
        Command::ExpDecay {
            common,
            n_grid,
            replications,
        } => cmd_exp_decay(common, n_grid, replications),
    }
}

#[derive(Serialize)]
struct SampleArtifact<'a> {
    meta: &'a Provenance,
    sample: &'a randls_core::sampler::SampleSet,
}

fn cmd_sample(common: Common, m: usize, n: usize) -> Result<String, Failure> {
    let (loaded, provenance) = load(&common, "sample")?;
    let density = SamplingDensity::new(&loaded.instance, m)?;
    let set = density.draw_nodes(n, StreamId::new(common.seed, 0))?;
    let path = write_json(
        &common.out,
        "sample.json",
        &SampleArtifact {
            meta: &provenance,
            sample: &set,
        },
    )
    .map_err(Failure::io)?;
    Ok(format!(
        "sample: m={m} n={n} seed={} -> {}",
        common.seed,
        path.display()
    ))
}

#[derive(Serialize)]
struct ApproximateArtifact<'a> {
    meta: &'a Provenance,
    m: usize,
    n: usize,
    f_label: String,
    g_error: f64,
    model: &'a wls::WlsModel,
}

fn cmd_approximate(
    common: Common,
    m: usize,
    n: usize,
    f_mode: usize,
    f_random: bool,
    max_retries: u32,
) -> Result<String, Failure> {
    let (loaded, provenance) = load(&common, "approximate")?;
    let instance = &loaded.instance;
    let spectral = instance.spectral();
    let (label, f) = if f_random {
        let mut rng = StreamId::new(common.seed, u64::MAX).rng();
        (
            "random".to_string(),
            CoefficientFunction::random_unit_f_norm(spectral, spectral.len(), &mut rng)?,
        )
    } else {
        (
            format!("mode_{f_mode}"),
            CoefficientFunction::single_mode(
                f_mode,
                Complex64::new(spectral.lambda(f_mode)?.sqrt(), 0.0),
            )?,
        )
    };
    let model = with_pool(common.threads, || {
        wls::approximate(instance, m, n, &f, StreamId::new(common.seed, 0), max_retries)
    })?;
    let g_error = wls::g_error(instance, &model, &f)?;
    let path = write_json(
        &common.out,
        "approximate.json",
        &ApproximateArtifact {
            meta: &provenance,
            m,
            n,
            f_label: label.clone(),
            g_error,
            model: &model,
        },
    )
    .map_err(Failure::io)?;
    Ok(format!(
        "approximate: f={label} m={m} n={n} retries={} deviation={:.3e} g_error={:.3e} -> {}",
        model.retries,
        model.deviation,
        g_error,
        path.display()
    ))
}

#[derive(Serialize)]
struct ErrorCurveArtifact<'a> {
    meta: &'a Provenance,
    delta: f64,
    replications: usize,
    config: &'a ProblemConfig,
    rows: Vec<ErrorCurveRow>,
}

#[derive(Serialize)]
struct ErrorCurveRow {
    n: usize,
    m: usize,
    delta: f64,
    mean_sq: f64,
    std_err: f64,
    bound_sq: f64,
    retries_mean: f64,
    f_label: String,
    passes_at_3_sigma: bool,
}

fn cmd_error_curve(
    common: Common,
    n_grid: Vec<usize>,
    delta: f64,
    replications: usize,
) -> Result<String, Failure> {
    let (loaded, provenance) = load(&common, "error-curve")?;
    let instance = &loaded.instance;
    let mut rows = Vec::new();
    let mut experiment = 0u64;
    with_pool(common.threads, || -> Result<(), Failure> {
        for &n in &n_grid {
            let m = m_of_n(n, delta)?;
            if m == 0 {
                return Err(Failure::from(CoreError::InvalidParameter(format!(
                    "m evaluates to 0 for n = {n}, delta = {delta}; increase n or delta"
                ))));
            }
            let battery =
                error_lab::test_battery(instance, m, experiment_seed(common.seed, experiment))?;
            experiment += 1;
            for (label, f) in battery {
                let est = error_lab::randomized_error_mc(
                    instance,
                    &f,
                    n,
                    delta,
                    replications,
                    experiment_seed(common.seed, experiment),
                )?;
                experiment += 1;
                rows.push(ErrorCurveRow {
                    n,
                    m,
                    delta,
                    mean_sq: est.mean_sq,
                    std_err: est.std_err,
                    bound_sq: est.bound_sq,
                    retries_mean: est.retries_mean,
                    f_label: label,
                    passes_at_3_sigma: est.mean_sq <= est.bound_sq + 3.0 * est.std_err,
                });
            }
        }
        Ok(())
    })?;
    let csv_rows: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{}",
                r.n, r.m, r.delta, r.mean_sq, r.std_err, r.bound_sq, r.retries_mean, r.f_label
            )
        })
        .collect();
    let csv = write_csv(
        &common.out,
        "error_curve.csv",
        &provenance.csv_comment(&format!("delta={delta} R={replications}")),
        "n,m,delta,mean_sq,std_err,bound_sq,retries_mean,f_label",
        &csv_rows,
    )
    .map_err(Failure::io)?;
    write_json(
        &common.out,
        "error_curve.json",
        &ErrorCurveArtifact {
            meta: &provenance,
            delta,
            replications,
            config: &loaded.config,
            rows,
        },
    )
    .map_err(Failure::io)?;
    Ok(format!(
        "error-curve: {} rows (delta={delta}, R={replications}) -> {}",
        csv_rows.len(),
        csv.display()
    ))
}

#[derive(Serialize)]
struct ConcentrationArtifact<'a> {
    meta: &'a Provenance,
    replications: usize,
    config: &'a ProblemConfig,
    rows: Vec<error_lab::ConcentrationReport>,
}

fn cmd_concentration(
    common: Common,
    m_grid: Vec<usize>,
    n_grid: Vec<usize>,
    t_grid: Vec<f64>,
    replications: usize,
) -> Result<String, Failure> {
    let (loaded, provenance) = load(&common, "concentration")?;
    let instance = &loaded.instance;
    let mut rows = Vec::new();
    let mut experiment = 0u64;
    with_pool(common.threads, || -> Result<(), Failure> {
        for &m in &m_grid {
            for &n in &n_grid {
                for &t in &t_grid {
                    let report = error_lab::concentration_experiment(
                        instance,
                        m,
                        n,
                        t,
                        replications,
                        experiment_seed(common.seed, experiment),
                    )?;
                    experiment += 1;
                    rows.push(report);
                }
            }
        }
        Ok(())
    })?;
    let csv_rows: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.m, r.n, r.t, r.r, r.empirical_prob, r.bound
            )
        })
        .collect();
    let csv = write_csv(
        &common.out,
        "concentration.csv",
        &provenance.csv_comment(&format!("R={replications}")),
        "m,n,t,r,empirical_prob,bound",
        &csv_rows,
    )
    .map_err(Failure::io)?;
    write_json(
        &common.out,
        "concentration.json",
        &ConcentrationArtifact {
            meta: &provenance,
            replications,
            config: &loaded.config,
            rows,
        },
    )
    .map_err(Failure::io)?;
    Ok(format!(
        "concentration: {} cells (R={replications}) -> {}",
        csv_rows.len(),
        csv.display()
    ))
}

#[derive(Serialize)]
struct ComplexityArtifact<'a> {
    meta: &'a Provenance,
    config: &'a ProblemConfig,
    table: &'a ComplexityTable,
}

fn cmd_complexity(
    common: Common,
    eps_grid: Vec<f64>,
    criterion: Criterion,
    delta: f64,
    omega: f64,
    fail_on_truncation: bool,
) -> Result<String, Failure> {
    let (loaded, provenance) = load(&common, "complexity")?;
    let params = ComplexityParams {
        criterion,
        delta,
        omega,
    };
    let spectral = loaded.instance.spectral();
    let mut rows = Vec::new();
    for &eps in &eps_grid {
        rows.push(complexity_row(spectral, loaded.instance.d(), eps, &params)?);
    }
    let table = ComplexityTable { params, rows };
    if fail_on_truncation {
        let marked = table
            .rows
            .iter()
            .any(|r| r.n_wor.finite().is_none() || r.bound_log.finite().is_none());
        if marked {
            return Err(Failure::truncation(
                "complexity table holds truncation markers; enlarge M".into(),
            ));
        }
    }
    let csv = write_csv(
        &common.out,
        "complexity.csv",
        &provenance.csv_comment(&format!(
            "criterion={criterion:?} delta={delta} omega={omega}"
        )),
        ComplexityTable::csv_header(),
        &table.csv_rows(),
    )
    .map_err(Failure::io)?;
    write_json(
        &common.out,
        "complexity.json",
        &ComplexityArtifact {
            meta: &provenance,
            config: &loaded.config,
            table: &table,
        },
    )
    .map_err(Failure::io)?;
    Ok(format!(
        "complexity: {} rows -> {}",
        table.rows.len(),
        csv.display()
    ))
}

#[derive(Serialize)]
struct TractabilityArtifact<'a> {
    meta: &'a Provenance,
    config: &'a ProblemConfig,
    criterion: Criterion,
    delta: f64,
    omega: f64,
    reports: Vec<tract::TractabilityReport>,
    transfer: tract::TransferReport,
}

fn cmd_tractability(
    common: Common,
    eps_grid: Vec<f64>,
    d_grid: Vec<usize>,
    criterion: Criterion,
    delta: f64,
    omega: f64,
) -> Result<String, Failure> {
    let (loaded, provenance) = load(&common, "tractability")?;
    let params = ComplexityParams {
        criterion,
        delta,
        omega,
    };
    let table = tract::probe_grid(
        loaded.instance.weights(),
        &d_grid,
        &eps_grid,
        &params,
        loaded.config.m_max,
    )?;
    // Classification needs a fully finite grid, so markers are fatal here.
    if table.rows.iter().any(|r| r.n_wor.finite().is_none()) {
        return Err(Failure::truncation(
            "probe grid holds truncation markers; enlarge M".into(),
        ));
    }
    let mut reports = Vec::new();
    for notion in tract::Notion::all() {
        reports.push(tract::classify(&table, notion)?);
    }
    let transfer = tract::transfer_report(&table);
    let mut summary = String::new();
    summary.push_str(&provenance.csv_comment(&format!(
        "criterion={criterion:?} delta={delta} omega={omega}"
    )));
    summary.push('\n');
    summary.push_str(
        "heuristic verdicts from finite grids; asymptotic statements are not provable this way\n",
    );
    for r in &reports {
        let exponents: Vec<String> = r
            .exponents
            .iter()
            .map(|(name, val)| format!("{name}={val:.3}"))
            .collect();
        summary.push_str(&format!(
            "{:<12} {:<13} residual={:.3} {}\n",
            r.notion,
            format!("{:?}", r.verdict).to_lowercase(),
            r.residual,
            exponents.join(" ")
        ));
    }
    std::fs::create_dir_all(&common.out).map_err(Failure::io)?;
    std::fs::write(common.out.join("tractability_summary.txt"), &summary).map_err(Failure::io)?;
    write_csv(
        &common.out,
        "transfer.csv",
        &provenance.csv_comment(&format!(
            "criterion={criterion:?} delta={delta} omega={omega}"
        )),
        tract::TransferReport::csv_header(),
        &transfer.csv_rows(),
    )
    .map_err(Failure::io)?;
    let path = write_json(
        &common.out,
        "tractability.json",
        &TractabilityArtifact {
            meta: &provenance,
            config: &loaded.config,
            criterion,
            delta,
            omega,
            reports,
            transfer,
        },
    )
    .map_err(Failure::io)?;
    Ok(format!(
        "tractability: {} notions over {} cells -> {}",
        tract::Notion::all().len(),
        table.rows.len(),
        path.display()
    ))
}

#[derive(Serialize)]
struct DecayArtifact<'a> {
    meta: &'a Provenance,
    config: &'a ProblemConfig,
    report: &'a error_lab::DecayReport,
}

fn cmd_exp_decay(
    common: Common,
    n_grid: Vec<usize>,
    replications: usize,
) -> Result<String, Failure> {
    let (loaded, provenance) = load(&common, "exp-decay")?;
    let report = with_pool(common.threads, || {
        error_lab::exp_decay_check(&loaded.instance, &n_grid, replications, common.seed)
    })?;
    let csv = write_csv(
        &common.out,
        "exp_decay.csv",
        &provenance.csv_comment(&format!(
            "R={replications} envelope_a={} envelope_q={} q2={}",
            report.envelope_a, report.envelope_q, report.q2
        )),
        error_lab::DecayReport::csv_header(),
        &report.csv_rows(),
    )
    .map_err(Failure::io)?;
    write_json(
        &common.out,
        "exp_decay.json",
        &DecayArtifact {
            meta: &provenance,
            config: &loaded.config,
            report: &report,
        },
    )
    .map_err(Failure::io)?;
    Ok(format!(
        "exp-decay: {} grid points (R={replications}) -> {}",
        report.rows.len(),
        csv.display()
    ))
}
