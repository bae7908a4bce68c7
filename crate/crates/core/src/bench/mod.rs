//! Experiment harness: seeded benchmark runs comparing transfer strategies
//! against paired cold starts, plus the distance study.
//!
//! Seeds are derived per `(stream, n, index)` from the master seed, so the
//! transfer and control arms see identical targets and identical cold-start
//! points, and parallel execution never changes results.

mod config;
mod output;

use serde::{Deserialize, Serialize};

pub use config::{DistanceConfig, Experiment, ExperimentConfig, LayerRule};
pub use output::{write_outputs, OutputFiles, ARTIFACT_VERSION, ROWS_SCHEMA, SUMMARY_SCHEMA};

use crate::ansatz::AnsatzSpec;
use crate::cluster_tree::{build_tree, train_tree, ClusterTree, TreeConfig, TreeTraining};
use crate::error::Result;
use crate::metrics::{self, DistanceStudy};
use crate::optimizer::{cold_start_theta, optimize, InitProvenance, OptimizationRecord};
use crate::statevector::QuantumState;
use crate::store::{OptimizedEntry, OptimizedStore};
use crate::transfer::{estimator_optimize, warm_start_optimize, TransferStrategy};
use crate::{par, seeds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    /// Uses knowledge from previously optimized targets.
    Transfer,
    /// Independent cold start from the paired seed.
    Control,
}

impl Arm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Arm::Transfer => "transfer",
            Arm::Control => "control",
        }
    }
}

/// One optimized evaluation target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub target_id: usize,
    pub arm: Arm,
    pub strategy_kind: InitProvenance,
    pub n_iter: usize,
    pub final_cost: f64,
    pub qe_total: u64,
    /// `n_iter * (g + 1)`: the tally without the terminal check or transfer overhead.
    pub qe_loop: u64,
    pub converged: bool,
    pub seed: u64,
}

impl BenchRow {
    pub fn from_record(n: usize, target_id: usize, arm: Arm, record: &OptimizationRecord) -> Self {
        Self {
            n,
            target_id,
            arm,
            strategy_kind: record.init_provenance,
            n_iter: record.n_iter,
            final_cost: record.final_cost,
            qe_total: record.qe_total,
            qe_loop: record.qe_loop_without_terminal_check(),
            converged: record.converged,
            seed: record.seed,
        }
    }
}

/// Per-n comparison in the shape of a results table: transfer vs control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub targets: usize,
    pub mean_cost_transfer: f64,
    pub mean_cost_control: f64,
    pub mean_iter_transfer: f64,
    pub mean_iter_control: f64,
    pub converged_frac_transfer: f64,
    pub converged_frac_control: f64,
    pub mean_qe_transfer: f64,
    pub mean_qe_control: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRun {
    pub n: usize,
    pub tree: ClusterTree,
    pub training: TreeTraining,
    pub tree_total_iterations: usize,
    pub control_total_iterations: usize,
    pub tree_total_qe: u64,
    pub control_total_qe: u64,
    pub flooding_order_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<SummaryRow>,
    /// Final optimized set A per n.
    pub stores: Vec<(usize, OptimizedStore)>,
    pub tree_runs: Vec<TreeRun>,
    pub distance: Option<DistanceStudy>,
}

impl BenchOutput {
    fn finish(mut self) -> Self {
        self.rows.sort_by_key(|r| (r.n, r.target_id, r.arm));
        self.summary = summarize(&self.rows);
        self
    }

    pub fn summary_for(&self, n: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.n == n)
    }
}

/// Per-n arithmetic means over the emitted rows.
pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let arm = |a: Arm| rows.iter().filter(move |r| r.n == n && r.arm == a);
            let mean = |a: Arm, f: &dyn Fn(&BenchRow) -> f64| {
                let v: Vec<f64> = arm(a).map(f).collect();
                v.iter().sum::<f64>() / v.len().max(1) as f64
            };
            SummaryRow {
                n,
                targets: arm(Arm::Transfer).count(),
                mean_cost_transfer: mean(Arm::Transfer, &|r| r.final_cost),
                mean_cost_control: mean(Arm::Control, &|r| r.final_cost),
                mean_iter_transfer: mean(Arm::Transfer, &|r| r.n_iter as f64),
                mean_iter_control: mean(Arm::Control, &|r| r.n_iter as f64),
                converged_frac_transfer: mean(Arm::Transfer, &|r| r.converged as u8 as f64),
                converged_frac_control: mean(Arm::Control, &|r| r.converged as u8 as f64),
                mean_qe_transfer: mean(Arm::Transfer, &|r| r.qe_total as f64),
                mean_qe_control: mean(Arm::Control, &|r| r.qe_total as f64),
            }
        })
        .collect()
}

fn sample_targets(master: u64, stream: &str, n: usize, count: usize) -> Result<Vec<QuantumState>> {
    (0..count)
        .map(|k| QuantumState::random(n, seeds::derive(master, stream, &[n as u64, k as u64])))
        .collect()
}

fn init_seed(master: u64, stream: &str, n: usize, k: usize) -> u64 {
    seeds::derive(master, stream, &[n as u64, k as u64])
}

/// Cold runs for each target, in parallel, with seeds from `stream`.
fn cold_runs(
    config: &ExperimentConfig,
    spec: &AnsatzSpec,
    n: usize,
    targets: &[QuantumState],
    stream: &str,
) -> Result<Vec<OptimizationRecord>> {
    par::try_map(targets, |k, y| {
        let seed = init_seed(config.master_seed, stream, n, k);
        optimize(
            spec,
            &cold_start_theta(spec, seed),
            y,
            &config.optimizer,
            seed,
        )
    })
}

/// Builds A from `k_a` cold-optimized targets, then optimizes `k_b` fresh
/// targets both warm-started from A and cold.
pub fn run_warm_start_bench(config: &ExperimentConfig) -> Result<BenchOutput> {
    config.validate()?;
    let mut out = BenchOutput::default();
    for &n in &config.n_values {
        let spec = config.ansatz_for(n)?;
        let a_targets = sample_targets(config.master_seed, "A-target", n, config.k_a)?;
        let a_records = cold_runs(config, &spec, n, &a_targets, "A-init")?;
        let mut store = OptimizedStore::new(spec.clone());
        for (k, (target, rec)) in a_targets.into_iter().zip(&a_records).enumerate() {
            store.push(OptimizedEntry::from_record(
                format!("n{n}-A-{k}"),
                target,
                rec,
            ))?;
        }

        let b_targets = sample_targets(config.master_seed, "B-target", n, config.k_b)?;
        let control = cold_runs(config, &spec, n, &b_targets, "B-init")?;
        let warm = par::try_map(&b_targets, |k, y| {
            warm_start_optimize(
                y,
                &store,
                &config.optimizer,
                init_seed(config.master_seed, "B-init", n, k),
            )
        })?;

        for (k, (w, c)) in warm.iter().zip(&control).enumerate() {
            out.rows.push(BenchRow::from_record(n, k, Arm::Transfer, w));
            out.rows.push(BenchRow::from_record(n, k, Arm::Control, c));
        }
        out.stores.push((n, store));
    }
    Ok(out.finish())
}

/// Sequential protocol: B drains into an initially empty A. The first target
/// is optimized cold; each later one goes through the estimator against the
/// growing A. The control arm cold-starts every target from the same seeds.
pub fn run_estimator_bench(config: &ExperimentConfig) -> Result<BenchOutput> {
    config.validate()?;
    let mut out = BenchOutput::default();
    for &n in &config.n_values {
        let spec = config.ansatz_for(n)?;
        let targets = sample_targets(config.master_seed, "B-target", n, config.k_b)?;
        let control = cold_runs(config, &spec, n, &targets, "B-init")?;

        let mut store = OptimizedStore::new(spec.clone());
        let mut transfer = Vec::with_capacity(targets.len());
        for (k, y) in targets.iter().enumerate() {
            let seed = init_seed(config.master_seed, "B-init", n, k);
            let rec = if store.is_empty() {
                // identical to the control arm's run for this target
                control[k].clone()
            } else {
                let strategy = TransferStrategy {
                    candidate_count: config.strategy.candidate_count.min(store.len()),
                    ..config.strategy
                };
                estimator_optimize(y, &store, &strategy, &config.optimizer, seed)?
            };
            store.push(OptimizedEntry::from_record(
                format!("n{n}-B-{k}"),
                y.clone(),
                &rec,
            ))?;
            transfer.push(rec);
        }

        for (k, (t, c)) in transfer.iter().zip(&control).enumerate() {
            out.rows.push(BenchRow::from_record(n, k, Arm::Transfer, t));
            out.rows.push(BenchRow::from_record(n, k, Arm::Control, c));
        }
        out.stores.push((n, store));
    }
    Ok(out.finish())
}

/// Clusters `k_b` targets into a tree, trains it by flooding, and compares
/// against independent cold starts.
pub fn run_tree_bench(config: &ExperimentConfig) -> Result<BenchOutput> {
    config.validate()?;
    let mut out = BenchOutput::default();
    for &n in &config.n_values {
        let spec = config.ansatz_for(n)?;
        let targets = sample_targets(config.master_seed, "B-target", n, config.k_b)?;
        let tree_config = TreeConfig {
            cluster_seed: seeds::derive(
                config.master_seed,
                "cluster",
                &[n as u64, config.tree.cluster_seed],
            ),
            ..config.tree
        };
        let tree = build_tree(&targets, &tree_config)?;
        let training = train_tree(
            &tree,
            &spec,
            &config.optimizer,
            seeds::derive(config.master_seed, "tree", &[n as u64]),
        )?;
        let control = cold_runs(config, &spec, n, &targets, "B-init")?;

        for (k, rec) in training.target_records() {
            out.rows
                .push(BenchRow::from_record(n, k, Arm::Transfer, &rec.record));
        }
        for (k, rec) in control.iter().enumerate() {
            out.rows
                .push(BenchRow::from_record(n, k, Arm::Control, rec));
        }
        out.tree_runs.push(TreeRun {
            n,
            tree_total_iterations: training.total_iterations(),
            control_total_iterations: control.iter().map(|r| r.n_iter).sum(),
            tree_total_qe: training.total_qe(),
            control_total_qe: control.iter().map(|r| r.qe_total).sum(),
            flooding_order_ok: training.flooding_order_ok(),
            tree,
            training,
        });
    }
    Ok(out.finish())
}

pub fn run_distance_study(config: &ExperimentConfig) -> Result<BenchOutput> {
    config.validate()?;
    let d = &config.distance;
    let study = metrics::distance_study(
        &config.n_values,
        &d.k_values,
        d.trials,
        d.queries,
        config.master_seed,
    )?;
    Ok(BenchOutput {
        distance: Some(study),
        ..BenchOutput::default()
    })
}

/// Cold-optimizes `k_b` random targets per n.
pub fn run_single_optimize(config: &ExperimentConfig) -> Result<BenchOutput> {
    config.validate()?;
    let mut out = BenchOutput::default();
    for &n in &config.n_values {
        let spec = config.ansatz_for(n)?;
        let targets = sample_targets(config.master_seed, "B-target", n, config.k_b)?;
        let records = cold_runs(config, &spec, n, &targets, "B-init")?;
        let mut store = OptimizedStore::new(spec);
        for (k, (target, rec)) in targets.into_iter().zip(&records).enumerate() {
            out.rows
                .push(BenchRow::from_record(n, k, Arm::Control, rec));
            store.push(OptimizedEntry::from_record(
                format!("n{n}-B-{k}"),
                target,
                rec,
            ))?;
        }
        out.stores.push((n, store));
    }
    Ok(out.finish())
}

pub fn run(config: &ExperimentConfig) -> Result<BenchOutput> {
    match config.experiment {
        Experiment::WarmStartBench => run_warm_start_bench(config),
        Experiment::EstimatorBench => run_estimator_bench(config),
        Experiment::TreeBench => run_tree_bench(config),
        Experiment::DistanceStudy => run_distance_study(config),
        Experiment::SingleOptimize => run_single_optimize(config),
    }
}
