use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtqo::bench::{self, BenchOutput, Experiment, ExperimentConfig};
use mtqo::store::store_load;
use mtqo::{Error, UpdateRule};

#[derive(Parser)]
#[command(
    name = "mtqo",
    version,
    about = "Multi-target quantum optimization benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cold-optimize K_B random targets per n.
    Optimize(RunArgs),
    /// Warm start from the nearest pre-optimized target vs cold start.
    WarmBench(RunArgs),
    /// Sequential Taylor-estimator protocol vs cold start.
    EstBench(RunArgs),
    /// Hierarchical tree flooding vs independent cold starts.
    TreeBench(RunArgs),
    /// Expected minimum distance to a random store of size K.
    DistStudy(RunArgs),
    /// Optimized-target store tooling.
    Store {
        #[command(subcommand)]
        action: StoreCommand,
    },
}

#[derive(Subcommand)]
enum StoreCommand {
    /// Validate a store file and print a summary.
    Inspect { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Gd,
    Adam,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated qubit counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    ka: Option<usize>,
    #[arg(long)]
    kb: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    optimizer: Option<Rule>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    branching: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
}

impl RunArgs {
    fn config(&self, experiment: Experiment) -> mtqo::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load_for(experiment, path)?,
            None => ExperimentConfig::for_experiment(experiment),
        };
        if let Some(v) = self.seed {
            c.master_seed = v;
        }
        if let Some(v) = &self.out {
            c.output_dir = v.clone();
        }
        if let Some(v) = &self.n {
            c.n_values = v.clone();
        }
        if let Some(v) = self.ka {
            c.k_a = v;
        }
        if let Some(v) = self.kb {
            c.k_b = v;
        }
        if let Some(v) = self.max_iter {
            c.optimizer.max_iterations = v;
        }
        if let Some(v) = self.tau {
            c.optimizer.threshold_tau = v;
        }
        if let Some(v) = self.optimizer {
            c.optimizer.rule = match v {
                Rule::Gd => UpdateRule::Gd,
                Rule::Adam => UpdateRule::Adam,
            };
        }
        if let Some(v) = self.lr {
            c.optimizer.learning_rate = v;
        }
        if let Some(v) = self.candidates {
            c.strategy.candidate_count = v;
        }
        if let Some(v) = self.depth {
            c.tree.depth = v;
        }
        if let Some(v) = self.branching {
            c.tree.branching = v;
        }
        if let Some(v) = self.trials {
            c.distance.trials = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn run_experiment(experiment: Experiment, args: &RunArgs) -> mtqo::Result<()> {
    let config = args.config(experiment)?;
    let out = bench::run(&config)?;
    let files = bench::write_outputs(&config, &out)?;
    print_summary(&config, &out);
    for path in &files.paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_summary(config: &ExperimentConfig, out: &BenchOutput) {
    println!(
        "{} (master_seed {})",
        config.experiment.as_str(),
        config.master_seed
    );
    if config.experiment == Experiment::SingleOptimize {
        for &n in &config.n_values {
            let rows: Vec<_> = out.rows.iter().filter(|r| r.n == n).collect();
            let iters = rows.iter().map(|r| r.n_iter).sum::<usize>() as f64 / rows.len() as f64;
            let cost = rows.iter().map(|r| r.final_cost).sum::<f64>() / rows.len() as f64;
            let conv = rows.iter().filter(|r| r.converged).count();
            println!(
                "  n={n}: mean iter {iters:.2}, mean cost {cost:.6}, converged {conv}/{}",
                rows.len()
            );
        }
    } else {
        for s in &out.summary {
            println!(
                "  n={}: iter {:.2} vs {:.2} (transfer vs control), cost {:.6} vs {:.6}, converged {:.0}% vs {:.0}%",
                s.n,
                s.mean_iter_transfer,
                s.mean_iter_control,
                s.mean_cost_transfer,
                s.mean_cost_control,
                100.0 * s.converged_frac_transfer,
                100.0 * s.converged_frac_control
            );
        }
    }
    for t in &out.tree_runs {
        println!(
            "  tree n={}: {} nodes, total iter {} vs {} cold, total QE {} vs {}, flooding order ok: {}",
            t.n,
            t.tree.root.nodes().len(),
            t.tree_total_iterations,
            t.control_total_iterations,
            t.tree_total_qe,
            t.control_total_qe,
            t.flooding_order_ok
        );
    }
    if let Some(study) = &out.distance {
        let k = *study.k_values.last().expect("non-empty K grid");
        for &n in &config.n_values {
            if let Some(r) = study.row(n, k) {
                println!(
                    "  n={n} K={k}: mean min distance {:.4} +- {:.4}",
                    r.mean_min_distance, r.std_min_distance
                );
            }
        }
        println!(
            "  nested per-trial curves non-increasing: {}",
            study.nested_monotone()
        );
    }
}

fn inspect(path: &Path) -> mtqo::Result<()> {
    let store = store_load(path)?;
    let spec = store.ansatz();
    println!("{}: valid", path.display());
    println!(
        "  ansatz: n={} L={} m={} entangler {:?}",
        spec.num_qubits(),
        spec.num_layers(),
        spec.param_count(),
        spec.entangler()
    );
    println!("  entries: {}", store.len());
    if !store.is_empty() {
        let costs: Vec<f64> = store.entries().iter().map(|e| e.final_cost).collect();
        let mean = costs.iter().sum::<f64>() / costs.len() as f64;
        let max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("  final cost: mean {mean:.6}, max {max:.6}");
        let mut by_kind = std::collections::BTreeMap::new();
        for e in store.entries() {
            *by_kind.entry(e.provenance.as_str()).or_insert(0usize) += 1;
        }
        for (kind, count) in by_kind {
            println!("  provenance {kind}: {count}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Optimize(a) => run_experiment(Experiment::SingleOptimize, a),
        Command::WarmBench(a) => run_experiment(Experiment::WarmStartBench, a),
        Command::EstBench(a) => run_experiment(Experiment::EstimatorBench, a),
        Command::TreeBench(a) => run_experiment(Experiment::TreeBench, a),
        Command::DistStudy(a) => run_experiment(Experiment::DistanceStudy, a),
        Command::Store {
            action: StoreCommand::Inspect { path },
        } => inspect(path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mtqo: {}", report(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report(e: &Error) -> String {
    match e {
        Error::NumericalFailure {
            iteration, reason, ..
        } => {
            format!("numerical failure at iteration {iteration}: {reason}")
        }
        other => other.to_string(),
    }
}
