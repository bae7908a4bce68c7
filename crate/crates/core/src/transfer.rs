//! Transfer from optimized targets to new ones: nearest-target lookup,
//! warm starting, and the first-order Taylor parameter estimator.

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::metrics;
use crate::objective::{self, QeCounter};
use crate::optimizer::{
    optimize_with_provenance, InitProvenance, OptimizationRecord, OptimizerConfig,
};
use crate::statevector::QuantumState;
use crate::store::{OptimizedEntry, OptimizedStore};

/// Below this gradient norm the estimator leaves the source parameters untouched.
pub const DEGENERATE_GRADIENT_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Cold,
    WarmStart,
    Estimator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferStrategy {
    pub kind: StrategyKind,
    /// Nearest neighbours screened by the estimator.
    pub candidate_count: usize,
}

impl Default for TransferStrategy {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Estimator,
            candidate_count: 5,
        }
    }
}

impl TransferStrategy {
    pub fn validate(&self) -> Result<()> {
        if self.candidate_count == 0 {
            return Err(Error::InvalidConfig("candidate_count must be >= 1".into()));
        }
        Ok(())
    }
}

fn require_entries(store: &OptimizedStore) -> Result<()> {
    if store.is_empty() {
        return Err(Error::NoSource("the optimized store is empty".into()));
    }
    Ok(())
}

/// Index and distance of the stored target closest to `y`; ties go to the lowest index.
pub fn nearest_target(y: &QuantumState, store: &OptimizedStore) -> Result<(usize, f64)> {
    Ok(k_nearest(y, store, 1)?[0])
}

/// The `k` nearest stored targets, ordered by (distance, index).
pub fn k_nearest(y: &QuantumState, store: &OptimizedStore, k: usize) -> Result<Vec<(usize, f64)>> {
    require_entries(store)?;
    let mut scored = store
        .targets()
        .enumerate()
        .map(|(i, x)| Ok((i, metrics::distance(y, x)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    scored.truncate(k.max(1));
    Ok(scored)
}

/// Optimizes `y` starting from the parameters of its nearest stored target.
pub fn warm_start_optimize(
    y: &QuantumState,
    store: &OptimizedStore,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationRecord> {
    let (k, _) = nearest_target(y, store)?;
    let source = &store.entries()[k];
    optimize_with_provenance(
        store.ansatz(),
        &source.theta_star,
        y,
        config,
        seed,
        InitProvenance::WarmStart,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEstimate {
    pub theta_tilde: ParamVector,
    /// `C_y(theta*_x)`.
    pub cost_at_source: f64,
    /// `grad C_y(theta*_x)`.
    pub gradient: Vec<f64>,
    pub grad_norm: f64,
    /// Set when the gradient norm fell below [`DEGENERATE_GRADIENT_NORM`];
    /// `theta_tilde` is then the source parameters unchanged.
    pub degenerate: bool,
}

/// One-shot first-order correction
/// `theta~ = theta*_x - grad / ||grad||^2 * C_y(theta*_x)`,
/// the minimum-norm step that zeroes the linearised cost.
/// Spends `1 + gradient_evaluations` QEs.
pub fn estimate_parameters(
    spec: &AnsatzSpec,
    source: &OptimizedEntry,
    y: &QuantumState,
    counter: &mut QeCounter,
) -> Result<ParameterEstimate> {
    spec.check_params(&source.theta_star)?;
    let c = objective::cost(spec, &source.theta_star, y, counter)?;
    estimate_from_cost(spec, &source.theta_star, y, c, counter)
}

fn estimate_from_cost(
    spec: &AnsatzSpec,
    theta_star: &[f64],
    y: &QuantumState,
    cost_at_source: f64,
    counter: &mut QeCounter,
) -> Result<ParameterEstimate> {
    let gradient = objective::gradient(spec, theta_star, y, counter)?;
    let norm_sq: f64 = gradient.iter().map(|g| g * g).sum();
    let grad_norm = norm_sq.sqrt();
    let degenerate = grad_norm < DEGENERATE_GRADIENT_NORM;
    let theta_tilde: Vec<f64> = if degenerate {
        theta_star.to_vec()
    } else {
        let scale = cost_at_source / norm_sq;
        theta_star
            .iter()
            .zip(&gradient)
            .map(|(t, g)| t - g * scale)
            .collect()
    };
    Ok(ParameterEstimate {
        theta_tilde: theta_tilde.into(),
        cost_at_source,
        gradient,
        grad_norm,
        degenerate,
    })
}

/// Screens the nearest candidates, then accepts a source, accepts the
/// estimate, or optimizes from the estimate, in that order.
///
/// Every QE spent on screening and estimation is included in `qe_total` and
/// reported separately as `qe_transfer`.
pub fn estimator_optimize(
    y: &QuantumState,
    store: &OptimizedStore,
    strategy: &TransferStrategy,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationRecord> {
    strategy.validate()?;
    config.validate()?;
    let spec = store.ansatz();
    spec.check_target(y)?;
    let candidates = k_nearest(y, store, strategy.candidate_count)?;

    let mut qe = QeCounter::new();
    let mut best: Option<(f64, &OptimizedEntry)> = None;
    for &(i, _) in &candidates {
        let entry = &store.entries()[i];
        let c = objective::cost(spec, &entry.theta_star, y, &mut qe)?;
        if c <= config.threshold_tau {
            return Ok(accepted(entry.theta_star.clone(), c, qe, config, seed));
        }
        if best.is_none_or(|(b, _)| c < b) {
            best = Some((c, entry));
        }
    }
    let (source_cost, source) = best.expect("at least one candidate");

    let estimate = estimate_from_cost(spec, &source.theta_star, y, source_cost, &mut qe)?;
    let estimate_cost = objective::cost(spec, &estimate.theta_tilde, y, &mut qe)?;
    if estimate_cost <= config.threshold_tau {
        return Ok(accepted(
            estimate.theta_tilde,
            estimate_cost,
            qe,
            config,
            seed,
        ));
    }

    let mut record = optimize_with_provenance(
        spec,
        &estimate.theta_tilde,
        y,
        config,
        seed,
        InitProvenance::Estimator,
    )?;
    record.qe_transfer = qe.total();
    record.qe_total += qe.total();
    Ok(record)
}

// The evaluation that accepted the point counts as the run's terminal check.
fn accepted(
    theta: ParamVector,
    cost: f64,
    qe: QeCounter,
    config: &OptimizerConfig,
    seed: u64,
) -> OptimizationRecord {
    OptimizationRecord {
        final_theta: theta,
        final_cost: cost,
        n_iter: 0,
        cost_trace: vec![cost],
        qe_total: qe.total(),
        qe_transfer: qe.total() - 1,
        converged: cost <= config.threshold_tau,
        init_provenance: InitProvenance::Estimator,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{cold_start_theta, optimize};

    fn store_of(n: usize, count: u64, base_seed: u64) -> OptimizedStore {
        let spec = AnsatzSpec::build(n, n).unwrap();
        let mut store = OptimizedStore::new(spec.clone());
        for k in 0..count {
            let target = QuantumState::random(n, base_seed + k).unwrap();
            let rec = optimize(
                &spec,
                &cold_start_theta(&spec, base_seed + k),
                &target,
                &OptimizerConfig::default(),
                k,
            )
            .unwrap();
            store
                .push(OptimizedEntry::from_record(format!("x{k}"), target, &rec))
                .unwrap();
        }
        store
    }

    #[test]
    fn nearest_target_small_cases() {
        let spec = AnsatzSpec::build(2, 1).unwrap();
        let mut store = OptimizedStore::new(spec.clone());
        assert!(matches!(
            nearest_target(&QuantumState::zero(2).unwrap(), &store),
            Err(Error::NoSource(_))
        ));
        for (id, idx) in [("00", 0), ("11", 3)] {
            store
                .push(OptimizedEntry {
                    id: id.into(),
                    target: QuantumState::basis(2, idx).unwrap(),
                    theta_star: ParamVector::zeros(spec.param_count()),
                    final_cost: 0.0,
                    seed: 0,
                    provenance: InitProvenance::Cold,
                })
                .unwrap();
        }
        assert_eq!(
            nearest_target(&QuantumState::basis(2, 0).unwrap(), &store).unwrap(),
            (0, 0.0)
        );
        let (k, d) = nearest_target(&QuantumState::basis(2, 3).unwrap(), &store).unwrap();
        assert_eq!((k, d), (1, 0.0));
        // equidistant query breaks the tie toward index 0
        let mid = QuantumState::basis(2, 1).unwrap();
        assert_eq!(nearest_target(&mid, &store).unwrap().0, 0);
    }

    #[test]
    fn warm_start_on_stored_target_needs_no_iterations() {
        let store = store_of(2, 4, 10);
        let e = store
            .entries()
            .iter()
            .find(|e| e.final_cost <= 1e-3)
            .unwrap();
        let rec = warm_start_optimize(&e.target, &store, &OptimizerConfig::default(), 1).unwrap();
        assert_eq!(rec.n_iter, 0);
        assert!(rec.converged);
        assert_eq!(rec.init_provenance, InitProvenance::WarmStart);
    }

    #[test]
    fn warm_start_from_a_far_entry_still_runs() {
        let spec = AnsatzSpec::build(2, 2).unwrap();
        let mut store = OptimizedStore::new(spec.clone());
        store
            .push(OptimizedEntry {
                id: "far".into(),
                target: QuantumState::basis(2, 3).unwrap(),
                theta_star: cold_start_theta(&spec, 1),
                final_cost: 0.0,
                seed: 0,
                provenance: InitProvenance::Cold,
            })
            .unwrap();
        let rec = warm_start_optimize(
            &QuantumState::basis(2, 0).unwrap(),
            &store,
            &OptimizerConfig::default(),
            2,
        )
        .unwrap();
        assert!(rec.converged || rec.n_iter == 200);
    }

    #[test]
    fn estimate_satisfies_linearisation_identity() {
        let store = store_of(2, 3, 40);
        let spec = store.ansatz();
        for s in 0..10 {
            let y = QuantumState::random(2, 500 + s).unwrap();
            let mut qe = QeCounter::new();
            let est = estimate_parameters(spec, &store.entries()[0], &y, &mut qe).unwrap();
            assert_eq!(qe.total(), 1 + objective::gradient_evaluations(spec));
            assert!(!est.degenerate);
            let lin: f64 = est
                .gradient
                .iter()
                .zip(
                    est.theta_tilde
                        .iter()
                        .zip(store.entries()[0].theta_star.iter()),
                )
                .map(|(g, (a, b))| g * (a - b))
                .sum();
            assert!((lin + est.cost_at_source).abs() < 1e-9);
        }
    }

    #[test]
    fn estimate_at_zero_residual_barely_moves() {
        let store = store_of(2, 1, 70);
        let e = &store.entries()[0];
        let est = estimate_parameters(store.ansatz(), e, &e.target, &mut QeCounter::new()).unwrap();
        let shift: f64 = est
            .theta_tilde
            .iter()
            .zip(e.theta_star.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if !est.degenerate {
            assert!((shift - est.cost_at_source / est.grad_norm).abs() < 1e-12);
        }
        assert!(est.cost_at_source <= 1e-3);
    }

    #[test]
    fn degenerate_gradient_is_flagged() {
        // theta = 0 prepares |00>; against |11> the cost is 1 and flat to first order
        let spec = AnsatzSpec::build(2, 1).unwrap();
        let entry = OptimizedEntry {
            id: "flat".into(),
            target: QuantumState::zero(2).unwrap(),
            theta_star: ParamVector::zeros(spec.param_count()),
            final_cost: 0.0,
            seed: 0,
            provenance: InitProvenance::Cold,
        };
        let est = estimate_parameters(
            &spec,
            &entry,
            &QuantumState::basis(2, 3).unwrap(),
            &mut QeCounter::new(),
        )
        .unwrap();
        assert!(est.degenerate);
        assert_eq!(est.theta_tilde, entry.theta_star);
    }

    #[test]
    fn estimator_on_stored_target_accepts_source() {
        let store = store_of(2, 6, 90);
        let e = store
            .entries()
            .iter()
            .find(|e| e.final_cost <= 1e-3)
            .unwrap();
        let rec = estimator_optimize(
            &e.target,
            &store,
            &TransferStrategy::default(),
            &OptimizerConfig::default(),
            3,
        )
        .unwrap();
        assert_eq!(rec.n_iter, 0);
        assert!(rec.converged);
        assert_eq!(rec.init_provenance, InitProvenance::Estimator);
        assert_eq!(rec.qe_total - rec.qe_transfer, 1);
    }

    #[test]
    fn estimator_accounting_and_single_candidate() {
        let store = store_of(2, 6, 120);
        let spec = store.ansatz();
        let per_iter = objective::iteration_evaluations(spec);
        for (s, count) in [(0u64, 1usize), (1, 5), (2, 50)] {
            let y = QuantumState::random(2, 900 + s).unwrap();
            let strategy = TransferStrategy {
                kind: StrategyKind::Estimator,
                candidate_count: count,
            };
            let rec =
                estimator_optimize(&y, &store, &strategy, &OptimizerConfig::default(), s).unwrap();
            assert_eq!(
                rec.qe_total - rec.qe_transfer,
                rec.n_iter as u64 * per_iter + 1
            );
            let screened = count.min(store.len()) as u64;
            if rec.n_iter > 0 {
                // screening + gradient + check of the estimate
                assert_eq!(
                    rec.qe_transfer,
                    screened + objective::gradient_evaluations(spec) + 1
                );
            }
        }
        let bad = TransferStrategy {
            kind: StrategyKind::Estimator,
            candidate_count: 0,
        };
        assert!(estimator_optimize(
            &QuantumState::zero(2).unwrap(),
            &store,
            &bad,
            &OptimizerConfig::default(),
            0
        )
        .is_err());
    }
}
