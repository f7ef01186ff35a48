//! `dpdt` command-line tool: train trees, compare against the greedy
//! baseline, run the XOR demonstration and boost trees.
//!
//! Every command prints one JSON report on stdout; tables, rendered trees and
//! warnings go to stderr.

mod args;
mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dpdt::boosting::{fit_adaboost, RoundReport, StopReason};
use dpdt::{Dataset, FitConfig, GeneratorKind, Model, Tree, WeakLearner};
use serde::Serialize;

use args::{Algo, Budgets, DataArgs, LearnerArgs, EXHAUSTIVE_WARN_SAMPLES};
use report::{fit_and_report, table, RunReport};

#[derive(Debug, Parser)]
#[command(name = "dpdt", version, about = "Dynamic-programming decision trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one tree and optionally save it as a model document.
    Train(TrainArgs),
    /// Fit the greedy baseline and DPDT variants on the same data.
    Compare(CompareArgs),
    /// Fit greedy and DPDT depth-2 trees on XOR data.
    XorDemo(XorDemoArgs),
    /// AdaBoost (SAMME) over greedy or DPDT trees.
    Boost(BoostArgs),
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    #[arg(long, value_enum, default_value_t = Algo::Dpdt)]
    algo: Algo,
    /// Per-depth candidate budgets, e.g. 8,1,1. Default (8, 1, ..., 1).
    #[arg(long)]
    budgets: Option<Budgets>,
    #[command(flatten)]
    learner: LearnerArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Where to write the model document.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct CompareArgs {
    /// Budget list for a DPDT row; repeat for several rows.
    #[arg(long)]
    budgets: Vec<Budgets>,
    /// Add a row with the exhaustive generator.
    #[arg(long)]
    exhaustive: bool,
    #[command(flatten)]
    learner: LearnerArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct XorDemoArgs {
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the exactly balanced lattice instead of uniform random points.
    #[arg(long)]
    lattice: bool,
    #[arg(long, default_value = "2,2")]
    budgets: Budgets,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Dump predictions on a GRID × GRID lattice of the unit square.
    #[arg(long, requires = "out")]
    grid: Option<usize>,
    /// Destination of the grid dump.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct BoostArgs {
    #[arg(long, value_enum, default_value_t = Algo::Dpdt)]
    weak: Algo,
    #[arg(long, default_value_t = 50)]
    rounds: usize,
    #[arg(long, default_value_t = 1.0)]
    learning_rate: f64,
    /// Per-depth candidate budgets of DPDT weak learners.
    #[arg(long)]
    budgets: Option<Budgets>,
    #[command(flatten)]
    learner: LearnerArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Where to write the ensemble document.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Train(a) => train(a),
        Command::Compare(a) => compare(a),
        Command::XorDemo(a) => xor_demo(a),
        Command::Boost(a) => boost(a),
    });
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

/// Honours `DPDT_THREADS` (unset or 0 means one thread per core).
fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("DPDT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .with_context(|| format!("DPDT_THREADS={value:?} is not a thread count"))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<String> {
    let text = serde_json::to_string_pretty(value)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}")?;
    stdout.flush()?;
    Ok(text)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn warn_exhaustive(config: &FitConfig, data: &Dataset) {
    if let FitConfig::Dpdt(c) = config {
        if c.generator.kind == GeneratorKind::Exhaustive
            && data.n_samples() > EXHAUSTIVE_WARN_SAMPLES
        {
            eprintln!(
                "warning: the exhaustive generator on {} samples may take exponentially long",
                data.n_samples()
            );
        }
    }
}

fn train(args: TrainArgs) -> Result<()> {
    let loaded = args.data.load()?;
    let config = args.learner.config(args.algo, args.budgets.as_ref())?;
    warn_exhaustive(&config, &loaded.train);
    let (tree, report) = fit_and_report(
        &config,
        args.learner.alpha,
        &loaded.train,
        loaded.test.as_ref(),
        loaded.seed,
    )?;
    eprint!("{}", tree.render(loaded.train.feature_names()));
    if let Some(path) = &args.out {
        let model = Model::new(&loaded.train, config, tree);
        write_file(path, &model.to_json())?;
    }
    print_json(&report)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct RowFailure {
    algorithm: String,
    error: String,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    runs: Vec<RunReport>,
    failures: Vec<RowFailure>,
    /// Whether every cart_call or exhaustive row has regularized loss no
    /// larger than the greedy row's; absent when there is nothing to compare.
    never_worse_than_greedy: Option<bool>,
}

fn compare(args: CompareArgs) -> Result<()> {
    let loaded = args.data.load()?;
    let alpha = args.learner.alpha;
    let depth = args.learner.depth_for(args.budgets.first())?;
    let mut learner = args.learner.clone();
    learner.depth = Some(depth);

    let mut configs: Vec<(String, Result<FitConfig>)> =
        vec![("cart".into(), learner.config(Algo::Cart, None))];
    let budget_rows = if args.budgets.is_empty() {
        vec![Budgets(args::light_budgets(depth))]
    } else {
        args.budgets.clone()
    };
    if learner.generator != GeneratorKind::Exhaustive {
        for b in &budget_rows {
            configs.push((
                format!("dpdt{:?}", b.0),
                learner.config(Algo::Dpdt, Some(b)),
            ));
        }
    }
    if args.exhaustive || learner.generator == GeneratorKind::Exhaustive {
        let mut ex = learner.clone();
        ex.generator = GeneratorKind::Exhaustive;
        configs.push(("dpdt-exhaustive".into(), ex.config(Algo::Dpdt, None)));
    }

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (name, config) in configs {
        let outcome = config.and_then(|c| {
            warn_exhaustive(&c, &loaded.train);
            fit_and_report(&c, alpha, &loaded.train, loaded.test.as_ref(), loaded.seed)
        });
        match outcome {
            Ok((_, report)) => runs.push(report),
            Err(e) => failures.push(RowFailure {
                algorithm: name,
                error: format!("{e:#}"),
            }),
        }
    }

    let greedy_loss = runs
        .iter()
        .find(|r| r.algorithm == "cart")
        .map(|r| r.regularized_loss);
    let guaranteed: Vec<&RunReport> = runs
        .iter()
        .filter(|r| match &r.config {
            FitConfig::Dpdt(c) => c.generator.kind != GeneratorKind::TopB,
            FitConfig::Cart(_) => false,
        })
        .collect();
    let never_worse = match greedy_loss {
        Some(g) if !guaranteed.is_empty() => {
            Some(guaranteed.iter().all(|r| r.regularized_loss <= g + 1e-12))
        }
        _ => None,
    };

    eprint!("{}", table(&runs));
    for f in &failures {
        eprintln!("{}: failed: {}", f.algorithm, f.error);
    }
    match never_worse {
        Some(true) => eprintln!("never worse than greedy: holds"),
        Some(false) => eprintln!("warning: a DPDT row has larger regularized loss than greedy"),
        None => {}
    }

    let report = CompareReport {
        runs,
        failures,
        never_worse_than_greedy: never_worse,
    };
    let text = print_json(&report)?;
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct XorDemoReport {
    samples: usize,
    lattice: bool,
    seed: u64,
    greedy: RunReport,
    dpdt: RunReport,
    greedy_tree: Tree,
    dpdt_tree: Tree,
}

fn xor_demo(args: XorDemoArgs) -> Result<()> {
    if args.budgets.0.len() != 2 {
        bail!("the XOR demo fits depth-2 trees; give two budgets");
    }
    let data = if args.lattice {
        dpdt::dataset::xor_lattice(args::lattice_side(args.samples))?
    } else {
        dpdt::dataset::generate_xor(args.samples, args.seed)?
    };
    let learner = LearnerArgs {
        generator: GeneratorKind::CartCall,
        depth: Some(2),
        alpha: args.alpha,
        impurity: dpdt::Impurity::Gini,
    };
    let seed = (!args.lattice).then_some(args.seed);
    let (greedy_tree, greedy) = fit_and_report(
        &learner.config(Algo::Cart, None)?,
        args.alpha,
        &data,
        None,
        seed,
    )?;
    let (dpdt_tree, dp) = fit_and_report(
        &learner.config(Algo::Dpdt, Some(&args.budgets))?,
        args.alpha,
        &data,
        None,
        seed,
    )?;

    let names = data.feature_names();
    eprintln!(
        "greedy: accuracy {:.4}, expected splits {:.3}, ops {}",
        greedy.train_accuracy, greedy.expected_splits, greedy.ops.candidate_splits_generated
    );
    eprint!("{}", greedy_tree.render(names));
    eprintln!(
        "dpdt:   accuracy {:.4}, expected splits {:.3}, ops {}",
        dp.train_accuracy, dp.expected_splits, dp.ops.candidate_splits_generated
    );
    eprint!("{}", dpdt_tree.render(names));

    if let (Some(grid), Some(path)) = (args.grid, &args.out) {
        dump_grid(path, grid, &greedy_tree, &dpdt_tree)?;
    }
    print_json(&XorDemoReport {
        samples: data.n_samples(),
        lattice: args.lattice,
        seed: args.seed,
        greedy,
        dpdt: dp,
        greedy_tree,
        dpdt_tree,
    })?;
    Ok(())
}

/// Writes predictions of both trees at the centres of a `grid × grid`
/// lattice on the unit square.
fn dump_grid(path: &Path, grid: usize, greedy: &Tree, dp: &Tree) -> Result<()> {
    if grid == 0 {
        bail!("--grid must be at least 1");
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["x", "y", "greedy", "dpdt"])?;
    for i in 0..grid {
        for j in 0..grid {
            let x = (i as f64 + 0.5) / grid as f64;
            let y = (j as f64 + 0.5) / grid as f64;
            let point = [x, y];
            w.write_record([
                x.to_string(),
                y.to_string(),
                greedy.predict(&point)?.to_string(),
                dp.predict(&point)?.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct BoostReport {
    weak: WeakLearner,
    rounds_requested: usize,
    rounds_completed: usize,
    learning_rate: f64,
    stop: StopReason,
    rounds: Vec<RoundReport>,
    train_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_accuracy: Option<f64>,
    /// Accuracy of one weak learner fitted on the unweighted data.
    single_tree_train_accuracy: f64,
    seconds: f64,
    seed: Option<u64>,
}

fn boost(args: BoostArgs) -> Result<()> {
    let loaded = args.data.load()?;
    let weak: WeakLearner = args
        .learner
        .config(args.weak, args.budgets.as_ref())?
        .into();
    let view = loaded.train.view();
    let single = weak.fit(&view)?.accuracy(&view);

    let start = Instant::now();
    let fit = fit_adaboost(&loaded.train, &weak, args.rounds, args.learning_rate)?;
    let seconds = start.elapsed().as_secs_f64();

    for r in &fit.rounds {
        eprintln!(
            "round {:>3}: weighted error {:.6}, beta {:.6}{}",
            r.round,
            r.weighted_error,
            r.beta,
            if r.retained { "" } else { " (discarded)" }
        );
    }
    if let Some(path) = &args.out {
        write_file(path, &fit.ensemble.to_json())?;
    }
    print_json(&BoostReport {
        weak,
        rounds_requested: args.rounds,
        rounds_completed: fit.rounds_completed(),
        learning_rate: args.learning_rate,
        stop: fit.stop,
        rounds: fit.rounds.clone(),
        train_accuracy: fit.ensemble.accuracy(&view),
        test_accuracy: loaded
            .test
            .as_ref()
            .map(|t| fit.ensemble.accuracy(&t.view())),
        single_tree_train_accuracy: single,
        seconds,
        seed: loaded.seed,
    })?;
    Ok(())
}
