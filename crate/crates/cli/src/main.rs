use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pumtune::harness::{
    fit_fixed, format_results, run_bench, run_pum, sci3, BenchPreset, Dataset, ExperimentConfig,
    Optimizer, RunOutcome, TestFunction,
};
use pumtune::{emit_results, GridSpec, KernelFamily, PointSet};

mod config;

use config::ConfigFile;

/// RBF partition-of-unity interpolation with per-subdomain (eps, delta) tuning.
#[derive(Debug, Parser)]
#[command(name = "pumtune", version)]
struct Cli {
    /// Flat `key = value` file; command-line flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for subdomain tuning (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write uniform random training (and optionally test) points to CSV.
    Generate(GenerateArgs),
    /// Fit with one fixed (eps, delta) pair in every subdomain.
    Fit(FitArgs),
    /// Tune every subdomain with LOOCV or BO and report one result row.
    Tune(TuneArgs),
    /// Run a named experiment matrix and write the results table.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    /// gaussian | matern4
    #[arg(long)]
    kernel: Option<KernelFamily>,
    /// loocv | bo
    #[arg(long)]
    optimizer: Option<Optimizer>,
    /// BO stopping tolerance on the validation error.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shape-parameter samples of the LOOCV grid.
    #[arg(long)]
    grid_eps: Option<usize>,
    /// Radius samples of the LOOCV grid.
    #[arg(long)]
    grid_delta: Option<usize>,
    /// Random initial BO evaluations.
    #[arg(long)]
    bo_init: Option<usize>,
    /// Maximum EI-guided BO evaluations.
    #[arg(long)]
    bo_iters: Option<usize>,
    /// Fraction of each subdomain used for BO sub-training.
    #[arg(long)]
    split: Option<f64>,
    /// Neighbours used to size the minimal radius.
    #[arg(long)]
    n_min: Option<usize>,
    /// `franke` or a constant value.
    #[arg(long)]
    function: Option<TestFunction>,
    /// Output file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Also write the test set here.
    #[arg(long, value_name = "FILE")]
    test_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Training CSV (x1,x2,f); generated from the seed when absent.
    #[arg(long, value_name = "FILE")]
    train: Option<PathBuf>,
    /// Test CSV (x1,x2,f); generated from the seed when absent.
    #[arg(long, value_name = "FILE")]
    test: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    eps: Option<f64>,
    /// Radius, clamped into each subdomain's [delta_min, 2 delta_min].
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Write the tuned parameters of every subdomain here.
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// table1 | desk | reduced | smoke
    #[arg(long)]
    preset: Option<String>,
}

const KNOWN_KEYS: &[&str] = &[
    "n_train",
    "n_test",
    "kernel",
    "optimizer",
    "tau",
    "seed",
    "grid_eps",
    "grid_delta",
    "bo_init",
    "bo_iters",
    "split",
    "n_min",
    "function",
    "out",
    "threads",
    "eps",
    "delta",
    "preset",
    "train",
    "test",
    "test_out",
    "params",
];

/// Flag value if given, else the config-file value.
fn pick<T>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

fn experiment_config(args: &ExperimentArgs, file: &ConfigFile) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::default();
    if let Some(v) = pick(args.n_train, file, "n_train")? {
        c.n_train = v;
    }
    if let Some(v) = pick(args.n_test, file, "n_test")? {
        c.n_test = v;
    }
    if let Some(v) = pick(args.kernel, file, "kernel")? {
        c.kernel = v;
    }
    if let Some(v) = pick(args.optimizer, file, "optimizer")? {
        c.optimizer = v;
    }
    if let Some(v) = pick(args.tau, file, "tau")? {
        c.tau = v;
    }
    if let Some(v) = pick(args.seed, file, "seed")? {
        c.seed = v;
        c.bo.seed = v;
    }
    let n_eps = pick(args.grid_eps, file, "grid_eps")?.unwrap_or(c.grid.n_eps);
    let n_delta = pick(args.grid_delta, file, "grid_delta")?.unwrap_or(c.grid.n_delta);
    c.grid = GridSpec::new(n_eps, n_delta)?;
    if let Some(v) = pick(args.bo_init, file, "bo_init")? {
        c.bo.n_init = v;
    }
    if let Some(v) = pick(args.bo_iters, file, "bo_iters")? {
        c.bo.max_bayes_iters = v;
    }
    if let Some(v) = pick(args.split, file, "split")? {
        c.split_fraction = v;
    }
    if let Some(v) = pick(args.n_min, file, "n_min")? {
        c.n_min = v;
    }
    if let Some(v) = pick(args.function, file, "function")? {
        c.function = v;
    }
    Ok(c)
}

fn out_path(args: &ExperimentArgs, file: &ConfigFile) -> Result<Option<PathBuf>> {
    pick(args.out.clone(), file, "out")
}

fn load_points(path: &Path) -> Result<PointSet> {
    let set = PointSet::read_csv(path, 2, true)?;
    set.require_values()
        .with_context(|| format!("{} has no value column", path.display()))?;
    Ok(set)
}

fn load_dataset(
    data: &DataArgs,
    file: &ConfigFile,
    config: &mut ExperimentConfig,
) -> Result<Dataset> {
    let generated = Dataset::for_config(config)?;
    let train = match pick(data.train.clone(), file, "train")? {
        Some(p) => load_points(&p)?,
        None => generated.train,
    };
    let test = match pick(data.test.clone(), file, "test")? {
        Some(p) => load_points(&p)?,
        None => generated.test,
    };
    config.n_train = train.len();
    config.n_test = test.len();
    Ok(Dataset { train, test })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn generate(args: &GenerateArgs, file: &ConfigFile) -> Result<()> {
    let config = experiment_config(&args.common, file)?;
    let data = Dataset::generate(config.n_train, config.n_test, config.seed, config.function)?;
    let Some(out) = out_path(&args.common, file)? else {
        bail!("generate needs --out");
    };
    data.train.write_csv(&out, true)?;
    if let Some(test_out) = pick(args.test_out.clone(), file, "test_out")? {
        data.test.write_csv(&test_out, true)?;
    }
    Ok(())
}

fn fit(args: &FitArgs, file: &ConfigFile) -> Result<()> {
    let mut config = experiment_config(&args.common, file)?;
    let Some(eps) = pick(args.eps, file, "eps")? else {
        bail!("fit needs --eps");
    };
    let Some(delta) = pick(args.delta, file, "delta")? else {
        bail!("fit needs --delta");
    };
    let data = load_dataset(&args.data, file, &mut config)?;
    let interp = fit_fixed(&data.train, config.kernel, eps, delta, config.n_min)?;
    pumtune::harness::check_covering(&interp, &data.test)?;
    let predictions = interp.evaluate_set(&data.test)?;
    let mae = interp.max_abs_error(&data.test)?;
    eprintln!(
        "m = {}, mae = {}, max jitter = {}",
        interp.locals().len(),
        sci3(mae),
        sci3(interp.max_jitter())
    );
    if let Some(out) = out_path(&args.common, file)? {
        data.test
            .clone()
            .with_values(predictions)?
            .write_csv(&out, true)?;
    }
    Ok(())
}

fn params_table(outcome: &RunOutcome) -> String {
    let mut s = String::from(
        "subdomain,c1,c2,delta_min,eps,delta,score,evaluations,bayes_iterations,jitter\n",
    );
    for (j, (t, local)) in outcome
        .tuned
        .iter()
        .zip(outcome.interpolant.locals())
        .enumerate()
    {
        let c = local.center().coords();
        let _ = writeln!(
            s,
            "{j},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{:?}",
            c[0],
            c[1],
            t.delta_min,
            t.eps,
            t.delta,
            t.score,
            t.evaluations,
            t.bayes_iterations,
            t.jitter_used
        );
    }
    s
}

fn tune(args: &TuneArgs, file: &ConfigFile) -> Result<()> {
    let mut config = experiment_config(&args.common, file)?;
    let data = load_dataset(&args.data, file, &mut config)?;
    let outcome = run_pum(&config, &data)?;
    match out_path(&args.common, file)? {
        Some(out) => emit_results(std::slice::from_ref(&outcome.row), &out)?,
        None => write_text(None, &format_results(std::slice::from_ref(&outcome.row)))?,
    }
    if let Some(params) = pick(args.params.clone(), file, "params")? {
        write_text(Some(&params), &params_table(&outcome))?;
    }
    Ok(())
}

fn bench(args: &BenchArgs, file: &ConfigFile) -> Result<()> {
    let base = experiment_config(&args.common, file)?;
    let name = pick(args.preset.clone(), file, "preset")?.unwrap_or_else(|| "desk".into());
    let mut preset = BenchPreset::by_name(&name)?;
    // explicit sizes and grids replace the preset's
    if pick(args.common.n_train, file, "n_train")?.is_some() {
        preset.sizes = vec![base.n_train];
    }
    if pick(args.common.n_test, file, "n_test")?.is_some() {
        preset.n_test = base.n_test;
    }
    if pick(args.common.kernel, file, "kernel")?.is_some() {
        preset.kernels = vec![base.kernel];
    }
    if pick(args.common.tau, file, "tau")?.is_some() {
        preset.taus = vec![base.tau];
    }
    if pick(args.common.grid_eps, file, "grid_eps")?.is_some()
        || pick(args.common.grid_delta, file, "grid_delta")?.is_some()
    {
        preset.grid = base.grid;
    }
    let rows = run_bench(&preset, &base)?;
    match out_path(&args.common, file)? {
        Some(out) => emit_results(&rows, &out)?,
        None => write_text(None, &format_results(&rows))?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let unknown = file.unknown_keys(KNOWN_KEYS);
    if !unknown.is_empty() {
        bail!("unknown config keys: {}", unknown.join(", "));
    }
    if let Some(n) = pick(cli.threads, &file, "threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Generate(a) => generate(a, &file),
        Command::Fit(a) => fit(a, &file),
        Command::Tune(a) => tune(a, &file),
        Command::Bench(a) => bench(a, &file),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
