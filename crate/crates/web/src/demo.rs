use serde::Serialize;

use mtqo::bench::{Experiment, ExperimentConfig};
use mtqo::cluster_tree::{build_tree, train_tree, TreeConfig, TreeSubject};
use mtqo::metrics::distance_study;
use mtqo::optimizer::{cold_start_theta, optimize};
use mtqo::seeds::derive;
use mtqo::transfer::{estimator_optimize, nearest_target, warm_start_optimize, TransferStrategy};
use mtqo::{Error, OptimizedEntry, OptimizedStore, OptimizerConfig, QuantumState, Result};

const MAX_DEMO_QUBITS: usize = 8;

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_DEMO_QUBITS).contains(&n) {
        return Err(Error::InvalidConfig(format!(
            "demo supports 2..={MAX_DEMO_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct Curve {
    n: usize,
    mean: Vec<f64>,
    std: Vec<f64>,
}

#[derive(Serialize)]
struct Curves {
    k_values: Vec<usize>,
    curves: Vec<Curve>,
}

pub fn distance_curves(
    n_values: &[usize],
    k_max: usize,
    trials: usize,
    seed: u64,
) -> Result<String> {
    for &n in n_values {
        check_n(n)?;
    }
    if k_max == 0 || k_max > 500 {
        return Err(Error::InvalidConfig("K must lie in 1..=500".into()));
    }
    let mut k_values = vec![1usize];
    while *k_values.last().unwrap() < k_max {
        let k = *k_values.last().unwrap();
        k_values.push((k * 2).min(k_max));
    }
    let study = distance_study(n_values, &k_values, trials, 1, seed)?;
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let curves = ns
        .iter()
        .map(|&n| {
            let rows: Vec<_> = study.rows.iter().filter(|r| r.num_qubits == n).collect();
            Curve {
                n,
                mean: rows.iter().map(|r| r.mean_min_distance).collect(),
                std: rows.iter().map(|r| r.std_min_distance).collect(),
            }
        })
        .collect();
    json(&Curves { k_values, curves })
}

#[derive(Serialize)]
struct Trace {
    label: &'static str,
    costs: Vec<f64>,
    n_iter: usize,
    qe_total: u64,
    converged: bool,
}

#[derive(Serialize)]
struct Traces {
    n: usize,
    tau: f64,
    nearest_distance: f64,
    traces: Vec<Trace>,
}

pub fn transfer_traces(n: usize, k_a: usize, learning_rate: f64, seed: u64) -> Result<String> {
    check_n(n)?;
    if k_a == 0 || k_a > 200 {
        return Err(Error::InvalidConfig("K_A must lie in 1..=200".into()));
    }
    let base = ExperimentConfig::for_experiment(Experiment::WarmStartBench);
    let spec = base.ansatz_for(n)?;
    let config = OptimizerConfig {
        learning_rate,
        ..OptimizerConfig::default()
    };
    config.validate()?;

    let mut store = OptimizedStore::new(spec.clone());
    for k in 0..k_a {
        let x = QuantumState::random(n, derive(seed, "demo-A-target", &[k as u64]))?;
        let s = derive(seed, "demo-A-init", &[k as u64]);
        let rec = optimize(&spec, &cold_start_theta(&spec, s), &x, &config, s)?;
        store.push(OptimizedEntry::from_record(format!("a{k}"), x, &rec))?;
    }
    let y = QuantumState::random(n, derive(seed, "demo-B-target", &[]))?;
    let s = derive(seed, "demo-B-init", &[]);
    let (_, nearest_distance) = nearest_target(&y, &store)?;
    let strategy = TransferStrategy {
        candidate_count: TransferStrategy::default().candidate_count.min(store.len()),
        ..TransferStrategy::default()
    };
    let runs = [
        (
            "cold",
            optimize(&spec, &cold_start_theta(&spec, s), &y, &config, s)?,
        ),
        ("warm start", warm_start_optimize(&y, &store, &config, s)?),
        (
            "estimator",
            estimator_optimize(&y, &store, &strategy, &config, s)?,
        ),
    ];
    let traces = runs
        .into_iter()
        .map(|(label, r)| Trace {
            label,
            costs: r.cost_trace,
            n_iter: r.n_iter,
            qe_total: r.qe_total,
            converged: r.converged,
        })
        .collect();
    json(&Traces {
        n,
        tau: config.threshold_tau,
        nearest_distance,
        traces,
    })
}

#[derive(Serialize)]
struct NodeRun {
    kind: &'static str,
    node_id: usize,
    level: usize,
    n_iter: usize,
    parent: Option<usize>,
}

#[derive(Serialize)]
struct Flooding {
    records: Vec<NodeRun>,
    tree_total: usize,
    target_total: usize,
    cold_total: usize,
}

pub fn tree_flooding(
    n: usize,
    targets: usize,
    depth: usize,
    branching: usize,
    seed: u64,
) -> Result<String> {
    check_n(n)?;
    if targets == 0 || targets > 100 {
        return Err(Error::InvalidConfig("targets must lie in 1..=100".into()));
    }
    let base = ExperimentConfig::for_experiment(Experiment::TreeBench);
    let spec = base.ansatz_for(n)?;
    let config = OptimizerConfig::default();
    let states = (0..targets)
        .map(|k| QuantumState::random(n, derive(seed, "demo-tree-target", &[k as u64])))
        .collect::<Result<Vec<_>>>()?;
    let tree = build_tree(
        &states,
        &TreeConfig {
            depth,
            branching,
            cluster_seed: seed,
            ..TreeConfig::default()
        },
    )?;
    let training = train_tree(&tree, &spec, &config, seed)?;
    let mut cold_total = 0;
    for (k, y) in states.iter().enumerate() {
        let s = derive(seed, "demo-tree-cold", &[k as u64]);
        cold_total += optimize(&spec, &cold_start_theta(&spec, s), y, &config, s)?.n_iter;
    }
    let records = training
        .records
        .iter()
        .map(|r| NodeRun {
            kind: match r.subject {
                TreeSubject::Centroid(_) => "centroid",
                TreeSubject::Target(_) => "target",
            },
            node_id: r.node_id,
            level: r.level,
            n_iter: r.record.n_iter,
            parent: r.parent_sequence,
        })
        .collect();
    json(&Flooding {
        records,
        tree_total: training.total_iterations(),
        target_total: training
            .target_records()
            .map(|(_, r)| r.record.n_iter)
            .sum(),
        cold_total,
    })
}
