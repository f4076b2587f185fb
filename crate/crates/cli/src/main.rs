//! `imbal`: synthetic data, one-shot resampling, cross-validated experiment
//! grids, rank statistics and reports.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 internal invariant violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use imbal_core::dataset::{generate_synthetic, load_csv, write_csv, SyntheticSpec};
use imbal_core::experiment::{
    apply_strategy, report, run_experiment, runner, ExperimentConfig, Strategy, StrategyParams,
};
use imbal_core::resampling::SmoteAmount;
use imbal_core::stats::{self, paper, ResultMatrix};
use imbal_core::Error;

#[derive(Parser)]
#[command(
    name = "imbal",
    version,
    about = "Resampling experiments for imbalanced binary classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a two-Gaussian synthetic dataset as CSV.
    Gen(GenArgs),
    /// Resample one CSV dataset and write the result plus a provenance sidecar.
    Resample(ResampleArgs),
    /// Run a cross-validated experiment grid described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Friedman, Iman-Davenport and control post-hoc tests on a result matrix.
    Stats(StatsArgs),
    /// Markdown summary of a results directory.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Majority fraction in (0.5, 1), or a majority:minority ratio above 1.
    #[arg(long)]
    ratio: f64,
    #[arg(long)]
    features: usize,
    #[arg(long)]
    separation: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ru,
    Ro,
    Smote,
    Pso,
    Integrated,
}

impl From<Method> for Strategy {
    fn from(m: Method) -> Self {
        match m {
            Method::Ru => Strategy::Ru,
            Method::Ro => Strategy::Ro,
            Method::Smote => Strategy::Smote,
            Method::Pso => Strategy::Pso,
            Method::Integrated => Strategy::Integrated,
        }
    }
}

#[derive(Args)]
struct ResampleArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label_col: String,
    #[arg(long)]
    positive: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    smote_k: Option<usize>,
    /// SMOTE percentage (multiple of 100). Defaults to balancing for `smote`
    /// and 100 for `integrated`.
    #[arg(long)]
    smote_amount: Option<u32>,
    #[arg(long)]
    pso_iters: Option<usize>,
    #[arg(long)]
    pso_swarm: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    /// Result matrix CSV: one row per case, one numeric column per approach.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    matrix: Option<PathBuf>,
    /// Rank larger values first (metrics). Without it, smaller values rank first.
    #[arg(long, requires = "matrix")]
    higher_is_better: bool,
    /// Replicate the published rank and post-hoc tables from shipped fixtures.
    #[arg(long, value_parser = ["paper"])]
    fixture: Option<String>,
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Config(_) | Error::InvalidParameter(_) => 1,
        Error::Invariant(_) => 3,
        _ => 2,
    }
}

fn majority_fraction(ratio: f64) -> imbal_core::Result<f64> {
    if ratio > 0.5 && ratio < 1.0 {
        Ok(ratio)
    } else if ratio > 1.0 && ratio.is_finite() {
        Ok(ratio / (1.0 + ratio))
    } else {
        Err(Error::InvalidParameter(format!(
            "--ratio {ratio}: expected a majority fraction in (0.5, 1) or a ratio above 1"
        )))
    }
}

fn write_file(path: &Path, text: &str) -> imbal_core::Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn gen(a: &GenArgs) -> imbal_core::Result<()> {
    let spec = SyntheticSpec {
        n_total: a.n,
        majority_fraction: majority_fraction(a.ratio)?,
        n_features: a.features,
        class_separation: a.separation,
        seed: a.seed,
    };
    let ds = generate_synthetic(&spec)?;
    write_csv(&ds, &a.out)?;
    let (pos, neg) = ds.class_counts();
    log::info!(
        "wrote {} rows ({pos} positive, {neg} negative) to {}",
        ds.len(),
        a.out.display()
    );
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("resampled");
    out.with_file_name(format!("{stem}.provenance.csv"))
}

fn resample(a: &ResampleArgs) -> imbal_core::Result<()> {
    let ds = load_csv(&a.input, &a.label_col, &a.positive)?;
    let mut params = StrategyParams::default();
    if let Some(k) = a.smote_k {
        params.smote_k = k;
        params.integrated.smote_k = k;
    }
    if let Some(pct) = a.smote_amount {
        params.smote_amount = SmoteAmount::Percent(pct);
        params.integrated.smote_amount = SmoteAmount::Percent(pct);
    }
    for pso in [&mut params.pso, &mut params.integrated.pso] {
        if let Some(it) = a.pso_iters {
            pso.max_iterations = it;
        }
        if let Some(s) = a.pso_swarm {
            pso.swarm_size = s;
        }
    }
    let out = apply_strategy(a.method.into(), &ds, &params, a.seed)?;
    write_csv(&out.dataset, &a.out)?;

    out.write_provenance_csv(&sidecar_path(&a.out))?;
    let (pos, neg) = out.dataset.class_counts();
    log::info!(
        "{} rows ({pos} positive, {neg} negative, {} synthetic) to {}",
        out.dataset.len(),
        out.synthetic_count(),
        a.out.display()
    );
    Ok(())
}

fn run(config: &Path) -> imbal_core::Result<()> {
    let cfg = ExperimentConfig::from_path(config)?;
    let result = run_experiment(&cfg)?;
    runner::write_outputs(&result, &cfg.output_dir)?;
    println!("{}", cfg.output_dir.display());
    Ok(())
}

fn stats_cmd(a: &StatsArgs) -> imbal_core::Result<()> {
    if a.fixture.is_some() {
        let rep = paper::replicate_paper_stats()?;
        print!("{}", rep.render());
        return Ok(());
    }
    let path = a
        .matrix
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("--matrix is required".into()))?;
    let matrix = ResultMatrix::from_csv_path(path, a.higher_is_better)?;
    let summary = stats::friedman(&matrix)?;
    let report = stats::posthoc(&summary)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("matrix");
    let dir = path.parent().unwrap_or(Path::new("."));
    write_file(&dir.join(format!("{stem}_ranks.csv")), &stats::ranks_csv(&summary))?;
    write_file(&dir.join(format!("{stem}_omnibus.csv")), &stats::omnibus_csv(&summary))?;
    write_file(&dir.join(format!("{stem}_posthoc.csv")), &stats::posthoc_csv(&report))?;
    print!("{}", stats::render_summary(&summary, &report));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Resample(a) => resample(a),
        Command::Run { config } => run(config),
        Command::Stats(a) => stats_cmd(a),
        Command::Report { results, out } => report::write_report(results, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
