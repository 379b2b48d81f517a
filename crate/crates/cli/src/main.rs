//! Command-line surface: simulate datasets, run the Bayes and frequentist
//! fits, orchestrate benchmarks, and self-validate the samplers.
//!
//! Every flag can also be set through an environment variable with the
//! `RB_` prefix (e.g. `RB_SEED=7 robust-bayes simulate ...`).

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use robust_bayes_core::baselines::{
    cross_validate, fit_lad, fit_ls, fit_penalized, CvConfig, Lambda, Loss, Penalty, PenaltySpec,
};
use robust_bayes_core::bench::{
    consistency_contrast, emit_report, run_benchmark, EstimatorKind, ExperimentPlan,
};
use robust_bayes_core::diagnostics::moment_suite;
use robust_bayes_core::geweke::{geweke_joint_test, GewekeConfig};
use robust_bayes_core::gibbs::{resume_chain, run_chain_with, ChainOptions};
use robust_bayes_core::io;
use robust_bayes_core::model::{Dataset, GibbsConfig, ThetaShapeMode};
use robust_bayes_core::sim::{generate_dataset, SimDesign};
use robust_bayes_core::{PriorHyperparams, RngStream};

#[derive(Parser)]
#[command(name = "robust-bayes", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset and write it with its truth sidecar.
    Simulate(SimulateArgs),
    /// Run the Gibbs sampler on a dataset CSV.
    FitBayes(FitBayesArgs),
    /// Run a frequentist estimator on a dataset CSV.
    FitFreq(FitFreqArgs),
    /// Run a benchmark plan and emit report files.
    Benchmark(BenchmarkArgs),
    /// Consistency contrast: error medians across increasing n.
    Contrast(ContrastArgs),
    /// Joint-distribution test plus the sampler moment suite.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, env = "RB_N")]
    n: usize,
    #[arg(long, env = "RB_KAPPA")]
    kappa: f64,
    #[arg(long, env = "RB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "RB_STREAM", default_value_t = 0)]
    stream: u64,
    /// Also write the binary matrix container next to the CSV.
    #[arg(long, env = "RB_BINARY")]
    binary: bool,
    #[arg(long, env = "RB_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct FitBayesArgs {
    #[arg(long, env = "RB_DATA")]
    data: PathBuf,
    #[arg(long, env = "RB_ITERS", default_value_t = 1000)]
    iters: usize,
    /// Defaults to half the iterations.
    #[arg(long, env = "RB_BURN_IN")]
    burn_in: Option<usize>,
    #[arg(long, env = "RB_THIN", default_value_t = 1)]
    thin: usize,
    #[arg(long, env = "RB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "RB_STREAM", default_value_t = 0)]
    stream: u64,
    /// Hyperparameter scaling requires the aspect ratio; defaults to p/n.
    #[arg(long, env = "RB_KAPPA")]
    kappa: Option<f64>,
    /// Use the n/2+1 shape convention for the squared-rate conditional.
    #[arg(long, env = "RB_PAPER_LITERAL_THETA")]
    paper_literal_theta: bool,
    /// Append every sweep to this CSV trace.
    #[arg(long, env = "RB_DRAW_LOG")]
    draw_log: Option<PathBuf>,
    /// Write a resumable checkpoint here every --checkpoint-every sweeps.
    #[arg(long, env = "RB_CHECKPOINT")]
    checkpoint: Option<PathBuf>,
    #[arg(long, env = "RB_CHECKPOINT_EVERY", default_value_t = 100)]
    checkpoint_every: usize,
    /// Resume from a checkpoint file instead of starting fresh.
    #[arg(long, env = "RB_RESUME")]
    resume: Option<PathBuf>,
    #[arg(long, env = "RB_OUT")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FreqEstimator {
    Ls,
    Lad,
    LassoLs,
    LassoLad,
    RidgeLs,
    RidgeLad,
}

#[derive(Args)]
struct FitFreqArgs {
    #[arg(long, env = "RB_DATA")]
    data: PathBuf,
    #[arg(long, env = "RB_ESTIMATOR", value_enum)]
    estimator: FreqEstimator,
    /// Explicit tuning constant for the penalized estimators.
    #[arg(long, env = "RB_LAMBDA", conflicts_with = "cv")]
    lambda: Option<f64>,
    /// Select the tuning constant by cross-validation.
    #[arg(long, env = "RB_CV")]
    cv: bool,
    #[arg(long, env = "RB_FOLDS", default_value_t = 5)]
    folds: usize,
    #[arg(long, env = "RB_GRID_SIZE", default_value_t = 50)]
    grid_size: usize,
    #[arg(long, env = "RB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "RB_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// JSON plan document (mirrors the ExperimentPlan schema).
    #[arg(long, env = "RB_PLAN")]
    plan: PathBuf,
    /// Overrides the plan's worker count when set.
    #[arg(long, env = "RB_WORKERS")]
    workers: Option<usize>,
    #[arg(long, env = "RB_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct ContrastArgs {
    #[arg(long, env = "RB_KAPPA")]
    kappa: f64,
    /// Comma-separated increasing sample sizes, e.g. 200,800.
    #[arg(long, env = "RB_N_LIST", value_delimiter = ',')]
    n_list: Vec<usize>,
    #[arg(long, env = "RB_REPS", default_value_t = 50)]
    reps: usize,
    #[arg(long, env = "RB_ITERS", default_value_t = 1000)]
    iters: usize,
    #[arg(long, env = "RB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "RB_WORKERS", default_value_t = 0)]
    workers: usize,
    #[arg(long, env = "RB_OUT")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, env = "RB_CYCLES", default_value_t = 100_000)]
    cycles: usize,
    #[arg(long, env = "RB_DRAWS", default_value_t = 100_000)]
    draws: usize,
    #[arg(long, env = "RB_GEWEKE_N", default_value_t = 20)]
    n: usize,
    #[arg(long, env = "RB_GEWEKE_P", default_value_t = 5)]
    p: usize,
    #[arg(long, env = "RB_SEED", default_value_t = 2024)]
    seed: u64,
    /// |z| bound for the joint-distribution test.
    #[arg(long, env = "RB_Z_BOUND", default_value_t = 4.0)]
    z_bound: f64,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::FitBayes(args) => fit_bayes(args),
        Command::FitFreq(args) => fit_freq(args),
        Command::Benchmark(args) => benchmark(args),
        Command::Contrast(args) => contrast(args),
        Command::Validate(args) => validate(args),
    }
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let design = SimDesign::new(args.n, args.kappa, RngStream::new(args.seed, args.stream))?;
    let dataset = generate_dataset(&design)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let csv_path = args.out.join("data.csv");
    io::write_dataset_csv(&csv_path, &dataset)?;
    io::write_truth_json(&args.out.join("truth.json"), dataset.truth().unwrap())?;
    if args.binary {
        io::write_dataset_binary(&args.out.join("data.rbd"), &dataset)?;
    }
    println!(
        "wrote {} ({} rows, {} predictors, hash {:016x})",
        csv_path.display(),
        dataset.n(),
        dataset.p(),
        dataset.content_hash()
    );
    Ok(())
}

fn load_dataset(path: &PathBuf) -> anyhow::Result<Dataset> {
    let dataset = if path.extension().is_some_and(|e| e == "rbd") {
        io::read_dataset_binary(path)?
    } else {
        io::read_dataset_csv(path)?
    };
    Ok(dataset)
}

fn fit_bayes(args: FitBayesArgs) -> anyhow::Result<()> {
    let dataset = load_dataset(&args.data)?;
    let kappa = args
        .kappa
        .unwrap_or(dataset.p() as f64 / dataset.n() as f64);
    let hyper = PriorHyperparams::scaled(dataset.n(), kappa)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let options = ChainOptions {
        checkpoint: args.checkpoint.map(|p| (p, args.checkpoint_every)),
        draw_log: args.draw_log,
    };
    let draws = match args.resume {
        Some(ck_path) => {
            let ck = io::read_checkpoint(&ck_path)?;
            resume_chain(&dataset, &hyper, ck, &options)?
        }
        None => {
            let burn = args.burn_in.unwrap_or(args.iters / 2);
            let mut config = GibbsConfig::with_schedule(
                args.iters,
                burn,
                args.thin,
                RngStream::new(args.seed, args.stream),
            )?;
            if args.paper_literal_theta {
                config = config.with_theta_shape(ThetaShapeMode::PaperLiteral);
            }
            run_chain_with(&dataset, &hyper, &config, &options, None)?
        }
    };

    io::write_draws_csv(&args.out.join("draws.csv"), &draws)?;
    io::write_posterior_summary_json(&args.out.join("summary.json"), &draws)?;
    println!(
        "retained {} draws; posterior mean written to {}",
        draws.states.len(),
        args.out.join("summary.json").display()
    );
    Ok(())
}

fn fit_freq(args: FitFreqArgs) -> anyhow::Result<()> {
    let dataset = load_dataset(&args.data)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let (loss, penalty) = match args.estimator {
        FreqEstimator::Ls => (Loss::Squared, Penalty::None),
        FreqEstimator::Lad => (Loss::Absolute, Penalty::None),
        FreqEstimator::LassoLs => (Loss::Squared, Penalty::L1),
        FreqEstimator::LassoLad => (Loss::Absolute, Penalty::L1),
        FreqEstimator::RidgeLs => (Loss::Squared, Penalty::L2),
        FreqEstimator::RidgeLad => (Loss::Absolute, Penalty::L2),
    };

    let beta = match (penalty, args.cv, args.lambda) {
        (Penalty::None, _, _) => match loss {
            Loss::Squared => fit_ls(&dataset)?,
            Loss::Absolute => fit_lad(&dataset)?,
        },
        (_, true, _) => {
            let spec = PenaltySpec::new(loss, penalty, Lambda::CrossValidate)?;
            let cv = CvConfig {
                folds: args.folds,
                grid_size: args.grid_size,
                ..CvConfig::default()
            };
            let mut rng = RngStream::new(args.seed, 0).rng();
            let (lambda, beta) = cross_validate(&dataset, &spec, &cv, &mut rng)?;
            println!("cross-validated lambda = {lambda}");
            beta
        }
        (_, false, Some(lambda)) => {
            let spec = PenaltySpec::new(loss, penalty, Lambda::Fixed(lambda))?;
            fit_penalized(&dataset, &spec)?
        }
        (_, false, None) => bail!("penalized estimators need --lambda <v> or --cv"),
    };

    let path = args.out.join("estimate.csv");
    io::write_estimate_csv(&path, &beta)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.plan)
        .with_context(|| format!("reading {}", args.plan.display()))?;
    let mut plan: ExperimentPlan = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.plan.display()))?;
    if let Some(w) = args.workers {
        plan.workers = w;
    }
    let results = run_benchmark(&plan)?;
    let files = emit_report(&results, &args.out)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    let failures = results.records.iter().filter(|r| !r.success).count();
    if failures > 0 {
        eprintln!("{failures} fits failed; see records.csv");
    }
    Ok(())
}

fn contrast(args: ContrastArgs) -> anyhow::Result<()> {
    let report = consistency_contrast(
        args.kappa,
        &args.n_list,
        args.reps,
        &[EstimatorKind::Bayes, EstimatorKind::Ls],
        args.iters,
        args.seed,
        args.workers,
    )?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let path = args.out.join("contrast.csv");
    let mut text = String::from("n,kappa,estimator,median_l2_sq_error,successes,failures\n");
    for cell in &report.medians {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell.n,
            cell.kappa,
            cell.estimator,
            cell.median_l2_sq_error
                .map(|v| v.to_string())
                .unwrap_or_default(),
            cell.successes,
            cell.failures
        ));
    }
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    for cell in &report.medians {
        println!(
            "n={:>6} {}: median l2^2 = {}",
            cell.n,
            cell.estimator,
            cell.median_l2_sq_error
                .map(|v| format!("{v:.4}"))
                .unwrap_or_else(|| "-".into())
        );
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> anyhow::Result<()> {
    let mut failed = false;

    println!(
        "joint-distribution test: n={}, p={}, {} cycles",
        args.n, args.p, args.cycles
    );
    let report = geweke_joint_test(&GewekeConfig::new(
        args.n,
        args.p,
        args.cycles,
        RngStream::new(args.seed, 0),
    ))?;
    for (name, z) in &report.z_scores {
        let ok = z.abs() < args.z_bound;
        failed |= !ok;
        println!(
            "  {:<10} z = {z:+.3}  [{}]",
            name,
            if ok { "ok" } else { "FAIL" }
        );
    }

    println!("sampler moment suite: {} draws per setting", args.draws);
    let checks = moment_suite(RngStream::new(args.seed, 1), args.draws)?;
    let mut pass_count = 0usize;
    for c in &checks {
        if c.pass {
            pass_count += 1;
        } else {
            failed = true;
            println!(
                "  FAIL {}: observed {:.6}, expected {:.6} +/- {:.6}",
                c.name, c.observed, c.expected, c.tolerance
            );
        }
    }
    println!("  {pass_count}/{} moment checks passed", checks.len());

    if failed {
        std::process::exit(1);
    }
    println!("all validation checks passed");
    Ok(())
}
