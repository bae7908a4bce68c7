//! Euclidean distance between amplitude vectors and the expected
//! nearest-neighbour distance study.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::QuantumState;
use crate::{par, seeds};

/// `||a - b||_2` over the raw complex amplitudes. Not invariant under global phase.
pub fn distance(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    a.check_same_size(b)?;
    Ok(a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `min_phi ||a - e^{i phi} b||`, which equals `sqrt(2 - 2 |<a|b>|)` for unit vectors.
pub fn phase_aligned_distance(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    let ov = a.overlap(b)?.norm();
    Ok((2.0 - 2.0 * ov).max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    PhaseAligned,
}

impl Metric {
    pub fn eval(&self, a: &QuantumState, b: &QuantumState) -> Result<f64> {
        match self {
            Metric::Euclidean => distance(a, b),
            Metric::PhaseAligned => phase_aligned_distance(a, b),
        }
    }
}

/// Mean over `b` of the distance to the nearest member of `a`.
pub fn avg_min_distance(b: &[QuantumState], a: &[QuantumState]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidDimension(
            "avg_min_distance needs non-empty sets".into(),
        ));
    }
    let mut total = 0.0;
    for y in b {
        let mut best = f64::INFINITY;
        for x in a {
            best = best.min(distance(y, x)?);
        }
        total += best;
    }
    Ok(total / b.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceStudyRow {
    pub num_qubits: usize,
    pub store_size_k: usize,
    pub trials: usize,
    pub mean_min_distance: f64,
    pub std_min_distance: f64,
}

/// Per-trial curve over the (ascending) K grid, for auditing nested sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialCurve {
    pub num_qubits: usize,
    pub trial: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceStudy {
    pub k_values: Vec<usize>,
    pub queries_per_trial: usize,
    pub seed: u64,
    pub rows: Vec<DistanceStudyRow>,
    pub curves: Vec<TrialCurve>,
}

impl DistanceStudy {
    /// True when every per-trial curve is non-increasing in K.
    pub fn nested_monotone(&self) -> bool {
        self.curves
            .iter()
            .all(|c| c.values.windows(2).all(|w| w[1] <= w[0]))
    }

    pub fn row(&self, n: usize, k: usize) -> Option<&DistanceStudyRow> {
        self.rows
            .iter()
            .find(|r| r.num_qubits == n && r.store_size_k == k)
    }
}

/// Expected minimum distance from fresh random targets to a random store of size K.
///
/// Within one trial the stores are nested: the store of size K is the first K
/// states of one sample of size max(K), so each trial's curve is exactly
/// non-increasing in K.
pub fn distance_study(
    n_values: &[usize],
    k_values: &[usize],
    trials: usize,
    queries_per_trial: usize,
    seed: u64,
) -> Result<DistanceStudy> {
    if trials == 0 || queries_per_trial == 0 {
        return Err(Error::InvalidConfig(
            "trials and queries must be >= 1".into(),
        ));
    }
    if n_values.is_empty() || k_values.is_empty() {
        return Err(Error::InvalidConfig(
            "n and K grids must be non-empty".into(),
        ));
    }
    if k_values.contains(&0) {
        return Err(Error::InvalidConfig("K values must be >= 1".into()));
    }
    let mut ks = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let k_max = *ks.last().expect("non-empty");

    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();

    let cells: Vec<(usize, usize)> = ns
        .iter()
        .flat_map(|&n| (0..trials).map(move |t| (n, t)))
        .collect();
    let curves: Vec<TrialCurve> = par::try_map(&cells, |_, &(n, trial)| {
        let store: Vec<QuantumState> = (0..k_max)
            .map(|k| {
                QuantumState::random(
                    n,
                    seeds::derive(seed, "dist-A", &[n as u64, trial as u64, k as u64]),
                )
            })
            .collect::<Result<_>>()?;
        let queries: Vec<QuantumState> = (0..queries_per_trial)
            .map(|q| {
                QuantumState::random(
                    n,
                    seeds::derive(seed, "dist-B", &[n as u64, trial as u64, q as u64]),
                )
            })
            .collect::<Result<_>>()?;
        let values = ks
            .iter()
            .map(|&k| avg_min_distance(&queries, &store[..k]))
            .collect::<Result<Vec<_>>>()?;
        Ok(TrialCurve {
            num_qubits: n,
            trial,
            values,
        })
    })?;

    let mut rows = Vec::with_capacity(ns.len() * ks.len());
    for &n in &ns {
        let per_n: Vec<&TrialCurve> = curves.iter().filter(|c| c.num_qubits == n).collect();
        for (i, &k) in ks.iter().enumerate() {
            let samples: Vec<f64> = per_n.iter().map(|c| c.values[i]).collect();
            let (mean, std) = mean_std(&samples);
            rows.push(DistanceStudyRow {
                num_qubits: n,
                store_size_k: k,
                trials,
                mean_min_distance: mean,
                std_min_distance: std,
            });
        }
    }

    Ok(DistanceStudy {
        k_values: ks,
        queries_per_trial,
        seed,
        rows,
        curves,
    })
}

/// Mean and sample standard deviation (0 for a single sample).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
