//! `iscore`: command-line access to I-score screening, backward dropping,
//! simulation and the experiment / pruning / ablation workflows.
//!
//! JSON artifacts go to `--out` (or stdout when a command has no `--out`);
//! everything else goes to stderr. Exit codes: 0 success, 2 usage or
//! configuration error, 3 data error, 4 numeric degeneracy.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use iscore_core::bda::{run_bda, select_top_fraction, union_of, BdaConfig, ModuleRecord};
use iscore_core::data::{
    binarize_by_cutoff, fit_cutoffs, load_csv, Cutoff, DiscreteDataset, Discretization,
};
use iscore_core::iscore::{iscore, IScoreRecord};
use iscore_core::pipeline::{
    ablation, feature_prune_pipeline, render_table, run_all_variables_baseline, run_experiment,
    CsvSplits, DataSource, ExperimentPlan, ExperimentReport,
};
use iscore_core::simgen::{generate, Model, SimSpec};
use iscore_core::Error;

const SEED_ENV: &str = "ISCORE_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "iscore",
    version,
    about = "Interaction-based variable selection with the I-score and backward dropping",
    after_help = "Seeds default to the ISCORE_SEED environment variable when --seed is not given (0 if unset)."
)]
struct Cli {
    /// Worker threads (default: available parallelism). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Raw and standardized I-score of one variable subset (JSON on stdout).
    Iscore(IscoreArgs),
    /// Backward Dropping Algorithm; writes the ranked module set as JSON.
    Bda(BdaArgs),
    /// Writes a simulated dataset as CSV with a `label` column.
    Simulate(SimulateArgs),
    /// Runs an experiment plan and its all-variables baseline.
    Experiment(ExperimentArgs),
    /// Feature pruning on train/validate/test CSVs.
    Prune(PruneArgs),
    /// Removes a report's selected features and reruns its pipeline.
    Ablate(AblateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Discretize {
    Median,
    Iscore,
    Twomeans,
}

impl From<Discretize> for Discretization {
    fn from(d: Discretize) -> Self {
        match d {
            Discretize::Median => Discretization::Median,
            Discretize::Iscore => Discretization::Iscore,
            Discretize::Twomeans => Discretization::Twomeans,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct DataArgs {
    /// CSV with a header row; every non-label column is a feature.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "label")]
    label: String,
    /// Binarize features with fitted cutoffs. Without it, values must already be
    /// non-negative integer codes.
    #[arg(long, value_enum)]
    discretize: Option<Discretize>,
}

#[derive(Args, Debug, Serialize)]
struct IscoreArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Comma-separated feature names.
    #[arg(long, value_delimiter = ',', required = true)]
    subset: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
struct BdaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArgs,
    /// Number of starting subsets (default ceil(20p/k)).
    #[arg(long)]
    b: Option<usize>,
    /// Starting subset size (default min(10, p)).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    min_size: usize,
    /// Fraction of ranked modules whose union is reported as selected.
    #[arg(long, default_value_t = 1.0)]
    top_frac: f64,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    model: Model,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    validate: Option<PathBuf>,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value = "label")]
    label: String,
}

impl SplitArgs {
    fn load(&self) -> Result<CsvSplits> {
        Ok(CsvSplits::load(
            &self.train,
            self.validate.as_deref(),
            &self.test,
            &self.label,
        )?)
    }

    fn source(&self) -> DataSource {
        DataSource::Csv {
            train: self.train.clone(),
            validate: self.validate.clone(),
            test: self.test.clone(),
            label: self.label.clone(),
        }
    }
}

#[derive(Args, Debug)]
struct PruneArgs {
    #[command(flatten)]
    splits: SplitArgs,
    /// Plan JSON; its `data` section is replaced by the CSV paths given here.
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AblateArgs {
    /// Report written by `prune`.
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    splits: SplitArgs,
    /// Where to write the report with `ablation_auc` filled in (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Context chain joined by ": ", skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !parts.last().is_some_and(|prev| prev.contains(&msg)) {
            parts.push(msg);
        }
    }
    parts.join(": ")
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_numeric_degeneracy() => 4,
        Some(
            Error::InvalidConfig(_)
            | Error::InvalidSubset(_)
            | Error::CombinatorialGuard { .. }
            | Error::UnknownModel(_)
            | Error::Json(_),
        ) => 2,
        _ => 3,
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Iscore(a) => cmd_iscore(a),
        Command::Bda(a) => cmd_bda(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Prune(a) => cmd_prune(a),
        Command::Ablate(a) => cmd_ablate(a),
    }
}

/// Loads `--data` as codes, binarizing first when `--discretize` is set.
fn load_discrete(a: &DataArgs) -> Result<(DiscreteDataset, Option<Vec<Cutoff>>)> {
    let raw = load_csv(&a.data, &a.label)?;
    match a.discretize {
        None => Ok((raw.to_codes()?, None)),
        Some(method) => {
            let rule = fit_cutoffs(&raw, method.into())?;
            let ds = binarize_by_cutoff(&raw, &rule)?;
            Ok((ds, Some(rule.cutoffs)))
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct IscoreOutput<'a> {
    config: &'a IscoreArgs,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoffs: Option<Vec<Cutoff>>,
    #[serde(flatten)]
    value: IScoreRecord,
}

fn cmd_iscore(a: IscoreArgs) -> Result<()> {
    let (ds, cutoffs) = load_discrete(&a.data)?;
    let subset = a
        .subset
        .iter()
        .map(|name| ds.index_of(name.trim()))
        .collect::<iscore_core::Result<Vec<_>>>()?;
    let value = iscore(&ds, &subset)?.record(ds.names());
    print_json(&IscoreOutput {
        config: &a,
        cutoffs,
        value,
    })
}

#[derive(Serialize)]
struct BdaOutput<'a> {
    input: &'a BdaArgs,
    config: BdaConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoffs: Option<Vec<Cutoff>>,
    modules: Vec<ModuleRecord>,
    selected: Vec<ModuleRecord>,
    selected_variables: Vec<String>,
}

fn cmd_bda(a: BdaArgs) -> Result<()> {
    let (ds, cutoffs) = load_discrete(&a.data)?;
    let defaults = BdaConfig::defaults_for(ds.p(), a.seed);
    let k = a.k.unwrap_or(defaults.k);
    let config = BdaConfig {
        b: a.b
            .unwrap_or_else(|| (20 * ds.p()).div_ceil(k.max(1)).max(1)),
        k,
        seed: a.seed,
        min_size: a.min_size,
    };
    let ms = run_bda(&ds, &config)?;
    let (kept, union) = select_top_fraction(&ms, a.top_frac)?;
    debug_assert_eq!(union, union_of(&kept));
    let names = ds.names();
    let out = BdaOutput {
        input: &a,
        config,
        cutoffs,
        modules: ms.modules.iter().map(|m| m.record(names)).collect(),
        selected: kept.iter().map(|m| m.record(names)).collect(),
        selected_variables: union.iter().map(|&v| names[v].clone()).collect(),
    };
    write_json(&a.out, &out)?;
    if let Some(top) = out.modules.first() {
        eprintln!(
            "{} modules; top {{{}}} score {:.3}",
            out.modules.len(),
            top.variables.join(","),
            top.score
        );
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let spec = SimSpec {
        model: a.model,
        n: a.n,
        p: a.p,
        seed: a.seed,
    };
    generate(&spec)?.write_csv(&a.out)?;
    eprintln!(
        "wrote {} rows x {} features ({:?}, seed {}) to {}",
        a.n,
        a.p,
        a.model,
        a.seed,
        a.out.display()
    );
    Ok(())
}

fn load_plan(path: &Path) -> Result<ExperimentPlan> {
    ExperimentPlan::load(path).with_context(|| format!("plan {}", path.display()))
}

#[derive(Serialize)]
struct ExperimentOutput {
    plan: ExperimentPlan,
    selected: ExperimentReport,
    all_variables: ExperimentReport,
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let plan = load_plan(&a.plan)?;
    let selected = run_experiment(&plan)?;
    let all_variables = run_all_variables_baseline(&plan)?;
    let title = match &plan.data {
        DataSource::Simulated {
            model, n_train, p, ..
        } => {
            format!(
                "{model:?}, n_train={n_train}, p={p}, {} repeats",
                plan.repeats
            )
        }
        DataSource::Csv { train, .. } => format!("{}, {} repeats", train.display(), plan.repeats),
    };
    print!("{}", render_table(&title, &[&selected, &all_variables]));
    eprintln!(
        "selection {:.2?}, baseline {:.2?}",
        selected.wall_clock, all_variables.wall_clock
    );
    write_json(
        &a.out,
        &ExperimentOutput {
            plan,
            selected,
            all_variables,
        },
    )
}

fn cmd_prune(a: PruneArgs) -> Result<()> {
    let mut plan = load_plan(&a.plan)?;
    plan.data = a.splits.source();
    let splits = a.splits.load()?;
    let report = feature_prune_pipeline(&splits, &plan)?;
    eprintln!(
        "test AUC {:.4}; {} features selected",
        report.mean_auc,
        report.selected_variables.len()
    );
    write_json(&a.out, &report)
}

fn cmd_ablate(a: AblateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.report)
        .with_context(|| format!("reading {}", a.report.display()))?;
    let mut report: ExperimentReport = serde_json::from_str(&text)
        .map_err(Error::from)
        .with_context(|| format!("report {}", a.report.display()))?;
    let splits = a.splits.load()?;
    let after = ablation(&report, &splits)?;
    eprintln!(
        "test AUC {:.4} -> {:.4} after ablation",
        report.mean_auc, after
    );
    report.ablation_auc = Some(after);
    match &a.out {
        Some(path) => write_json(path, &report),
        None => print_json(&report),
    }
}
