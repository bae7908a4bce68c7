use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{BenchOutput, Experiment, ExperimentConfig, TreeRun};
use crate::error::{Error, Result};
use crate::metrics::DistanceStudy;
use crate::objective;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const ROWS_SCHEMA: &str = "mtqo-rows/1";
pub const SUMMARY_SCHEMA: &str = "mtqo-summary/1";
pub const DIST_SCHEMA: &str = "mtqo-dist-study/1";
pub const TREE_SCHEMA: &str = "mtqo-tree-report/1";

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputFiles {
    pub paths: Vec<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut OutputFiles) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(io_err(&path))?;
    files.paths.push(path);
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::InvalidConfig(format!("serialization failed: {e}")))
}

/// `# config=...` comment line carried by every CSV.
pub fn config_line(config: &ExperimentConfig) -> Result<String> {
    let mut echoed = config.clone();
    echoed.output_dir = PathBuf::new();
    let text = serde_json::to_string(&echoed)
        .map_err(|e| Error::InvalidConfig(format!("serialization failed: {e}")))?;
    Ok(format!(
        "# master_seed={} config={text}\n",
        config.master_seed
    ))
}

pub fn rows_csv(out: &BenchOutput, config_line: &str) -> String {
    let mut s = format!("# schema={ROWS_SCHEMA}\n{config_line}");
    s.push_str("n,target_id,arm,strategy_kind,n_iter,final_cost,qe_total,qe_loop,converged,seed\n");
    for r in &out.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.target_id,
            r.arm.as_str(),
            r.strategy_kind.as_str(),
            r.n_iter,
            r.final_cost,
            r.qe_total,
            r.qe_loop,
            r.converged,
            r.seed
        );
    }
    s
}

pub fn summary_csv(out: &BenchOutput, config_line: &str) -> String {
    let mut s = format!("# schema={SUMMARY_SCHEMA}\n{config_line}");
    s.push_str(
        "n,targets,mean_cost_transfer,mean_cost_control,mean_iter_transfer,mean_iter_control,\
         converged_frac_transfer,converged_frac_control,mean_qe_transfer,mean_qe_control\n",
    );
    for r in &out.summary {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.targets,
            r.mean_cost_transfer,
            r.mean_cost_control,
            r.mean_iter_transfer,
            r.mean_iter_control,
            r.converged_frac_transfer,
            r.converged_frac_control,
            r.mean_qe_transfer,
            r.mean_qe_control
        );
    }
    s
}

pub fn dist_study_csv(study: &DistanceStudy, config_line: &str) -> String {
    let mut s = format!("# schema={DIST_SCHEMA}\n{config_line}");
    s.push_str("n,K,trials,mean,std,seed\n");
    for r in &study.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.num_qubits,
            r.store_size_k,
            r.trials,
            r.mean_min_distance,
            r.std_min_distance,
            study.seed
        );
    }
    s
}

#[derive(Serialize)]
struct Meta<'a> {
    artifact: &'static str,
    version: &'static str,
    experiment: &'static str,
    master_seed: u64,
    config: ExperimentConfig,
    schemas: Schemas,
    qe_per_iteration: Vec<(usize, u64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance_nested_monotone: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance_sampling: Option<&'a str>,
}

#[derive(Serialize)]
struct Schemas {
    rows: &'static str,
    summary: &'static str,
    dist_study: &'static str,
    tree_report: &'static str,
    store: &'static str,
}

#[derive(Serialize)]
struct TreeReport<'a> {
    schema: &'static str,
    master_seed: u64,
    config: &'a ExperimentConfig,
    runs: &'a [TreeRun],
}

/// Writes every output file for `out` into `config.output_dir`.
///
/// Contents depend only on the config and results; rerunning the same config
/// reproduces identical bytes.
pub fn write_outputs(config: &ExperimentConfig, out: &BenchOutput) -> Result<OutputFiles> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = OutputFiles::default();

    let mut echoed = config.clone();
    echoed.output_dir = PathBuf::new();
    let line = config_line(config)?;
    let qe_per_iteration = if config.experiment == Experiment::DistanceStudy {
        Vec::new()
    } else {
        config
            .n_values
            .iter()
            .map(|&n| Ok((n, objective::iteration_evaluations(&config.ansatz_for(n)?))))
            .collect::<Result<_>>()?
    };
    let meta = Meta {
        artifact: "mtqo",
        version: ARTIFACT_VERSION,
        experiment: config.experiment.as_str(),
        master_seed: config.master_seed,
        config: echoed.clone(),
        schemas: Schemas {
            rows: ROWS_SCHEMA,
            summary: SUMMARY_SCHEMA,
            dist_study: DIST_SCHEMA,
            tree_report: TREE_SCHEMA,
            store: crate::store::STORE_SCHEMA,
        },
        qe_per_iteration,
        distance_nested_monotone: out.distance.as_ref().map(|d| d.nested_monotone()),
        distance_sampling: out
            .distance
            .as_ref()
            .map(|_| "nested: the store of size K is the first K states of one sample per trial"),
    };
    write_file(dir, "meta.json", &json(&meta)?, &mut files)?;

    if !out.rows.is_empty() {
        write_file(dir, "rows.csv", &rows_csv(out, &line), &mut files)?;
        if config.experiment != Experiment::SingleOptimize {
            write_file(dir, "summary.csv", &summary_csv(out, &line), &mut files)?;
        }
    }
    for (n, store) in &out.stores {
        let name = if out.stores.len() == 1 {
            "store.json".to_string()
        } else {
            format!("store_n{n}.json")
        };
        write_file(dir, &name, &(store.to_json()? + "\n"), &mut files)?;
    }
    if !out.tree_runs.is_empty() {
        let report = TreeReport {
            schema: TREE_SCHEMA,
            master_seed: config.master_seed,
            config: &echoed,
            runs: &out.tree_runs,
        };
        write_file(dir, "tree_report.json", &json(&report)?, &mut files)?;
    }
    if let Some(study) = &out.distance {
        write_file(
            dir,
            "dist_study.csv",
            &dist_study_csv(study, &line),
            &mut files,
        )?;
        write_file(dir, "dist_study_trials.json", &json(study)?, &mut files)?;
    }
    Ok(files)
}
