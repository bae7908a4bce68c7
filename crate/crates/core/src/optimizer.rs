//! Check-then-step convergence loop with GD or Adam updates.

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::objective::{self, QeCounter};
use crate::statevector::QuantumState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateRule {
    Gd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub rule: UpdateRule,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub threshold_tau: f64,
    pub max_iterations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            rule: UpdateRule::Adam,
            learning_rate: 0.05,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            threshold_tau: 1e-3,
            max_iterations: 200,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive and finite");
        }
        if !(self.threshold_tau > 0.0 && self.threshold_tau.is_finite()) {
            return bad("threshold_tau must be positive");
        }
        if self.rule == UpdateRule::Adam {
            if !(self.adam_beta1 > 0.0 && self.adam_beta1 < 1.0) {
                return bad("adam_beta1 must lie in (0, 1)");
            }
            if !(self.adam_beta2 > 0.0 && self.adam_beta2 < 1.0) {
                return bad("adam_beta2 must lie in (0, 1)");
            }
            if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
                return bad("adam_epsilon must be positive");
            }
        }
        Ok(())
    }
}

/// How a run's initial parameters were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitProvenance {
    Cold,
    WarmStart,
    Estimator,
    TreeParent,
}

impl InitProvenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitProvenance::Cold => "cold",
            InitProvenance::WarmStart => "warm_start",
            InitProvenance::Estimator => "estimator",
            InitProvenance::TreeParent => "tree_parent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub final_theta: ParamVector,
    pub final_cost: f64,
    pub n_iter: usize,
    pub cost_trace: Vec<f64>,
    /// Every QE spent on this target, including transfer overhead.
    pub qe_total: u64,
    /// QEs spent outside the convergence loop (neighbour screening, estimation).
    /// `qe_total - qe_transfer == n_iter * (g + 1) + 1` where `g` is the
    /// per-gradient QE cost.
    pub qe_transfer: u64,
    pub converged: bool,
    pub init_provenance: InitProvenance,
    pub seed: u64,
}

impl OptimizationRecord {
    /// QE tally without the terminal convergence check, `n_iter * (g + 1)`.
    pub fn qe_loop_without_terminal_check(&self) -> u64 {
        (self.qe_total - self.qe_transfer).saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(m: usize) -> Self {
        Self {
            first_moment: vec![0.0; m],
            second_moment: vec![0.0; m],
            step: 0,
        }
    }
}

/// `theta - lr * grad`.
pub fn gd_step(theta: &[f64], grad: &[f64], config: &OptimizerConfig) -> ParamVector {
    debug_assert_eq!(theta.len(), grad.len());
    theta
        .iter()
        .zip(grad)
        .map(|(t, g)| t - config.learning_rate * g)
        .collect::<Vec<_>>()
        .into()
}

/// Bias-corrected Adam update.
pub fn adam_step(
    mut state: AdamState,
    theta: &[f64],
    grad: &[f64],
    config: &OptimizerConfig,
) -> (ParamVector, AdamState) {
    debug_assert_eq!(theta.len(), grad.len());
    if state.first_moment.len() != theta.len() {
        state = AdamState::new(theta.len());
    }
    state.step += 1;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let t = state.step as i32;
    let correction1 = 1.0 - b1.powi(t);
    let correction2 = 1.0 - b2.powi(t);

    let mut next = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let m = &mut state.first_moment[i];
        let v = &mut state.second_moment[i];
        *m = b1 * *m + (1.0 - b1) * grad[i];
        *v = b2 * *v + (1.0 - b2) * grad[i] * grad[i];
        let m_hat = *m / correction1;
        let v_hat = *v / correction2;
        next.push(theta[i] - config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_epsilon));
    }
    (next.into(), state)
}

enum Stepper {
    Gd,
    Adam(AdamState),
}

impl Stepper {
    fn new(config: &OptimizerConfig, m: usize) -> Self {
        match config.rule {
            UpdateRule::Gd => Stepper::Gd,
            UpdateRule::Adam => Stepper::Adam(AdamState::new(m)),
        }
    }

    fn step(&mut self, theta: &[f64], grad: &[f64], config: &OptimizerConfig) -> ParamVector {
        match self {
            Stepper::Gd => gd_step(theta, grad, config),
            Stepper::Adam(state) => {
                let (next, updated) = adam_step(std::mem::take(state), theta, grad, config);
                *state = updated;
                next
            }
        }
    }
}

/// Runs the convergence loop from `theta0`.
///
/// Each iteration evaluates the cost first and stops without a gradient step
/// once it is at or below `threshold_tau`; a run that exhausts
/// `max_iterations` spends one final evaluation on the last iterate.
pub fn optimize(
    spec: &AnsatzSpec,
    theta0: &[f64],
    target: &QuantumState,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationRecord> {
    optimize_with_provenance(spec, theta0, target, config, seed, InitProvenance::Cold)
}

pub fn optimize_with_provenance(
    spec: &AnsatzSpec,
    theta0: &[f64],
    target: &QuantumState,
    config: &OptimizerConfig,
    seed: u64,
    provenance: InitProvenance,
) -> Result<OptimizationRecord> {
    config.validate()?;
    spec.check_params(theta0)?;
    spec.check_target(target)?;

    let mut qe = QeCounter::new();
    let mut stepper = Stepper::new(config, theta0.len());
    let mut theta = ParamVector::from(theta0.to_vec());
    let mut trace = Vec::new();
    let mut t = 0usize;
    loop {
        let c = objective::cost(spec, &theta, target, &mut qe)?;
        if !c.is_finite() {
            return Err(numerical_failure(t, "cost is not finite", &theta));
        }
        trace.push(c);
        if c <= config.threshold_tau || t == config.max_iterations {
            break;
        }
        let grad = objective::gradient(spec, &theta, target, &mut qe)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(numerical_failure(t, "gradient is not finite", &theta));
        }
        theta = stepper.step(&theta, &grad, config);
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(numerical_failure(
                t,
                "update produced non-finite parameters",
                &theta,
            ));
        }
        t += 1;
    }

    let final_cost = *trace.last().expect("trace holds the initial cost");
    Ok(OptimizationRecord {
        final_theta: theta,
        final_cost,
        n_iter: t,
        cost_trace: trace,
        qe_total: qe.total(),
        qe_transfer: 0,
        converged: final_cost <= config.threshold_tau,
        init_provenance: provenance,
        seed,
    })
}

fn numerical_failure(iteration: usize, reason: &str, theta: &[f64]) -> Error {
    Error::NumericalFailure {
        iteration,
        reason: reason.to_string(),
        theta: theta.to_vec(),
    }
}

/// Cold-start initial point: i.i.d. uniform on `[0, 2pi)`.
pub fn cold_start_theta(spec: &AnsatzSpec, seed: u64) -> ParamVector {
    ParamVector::random_uniform(spec.param_count(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rule: UpdateRule, lr: f64) -> OptimizerConfig {
        OptimizerConfig {
            rule,
            learning_rate: lr,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn gd_arithmetic() {
        let c = cfg(UpdateRule::Gd, 0.1);
        assert_eq!(&*gd_step(&[1.0], &[2.0], &c), &[0.8]);
        let theta = [0.3, -1.2];
        let once = gd_step(&theta, &[0.0, 0.0], &c);
        let twice = gd_step(&once, &[0.0, 0.0], &c);
        assert_eq!(&*twice, &theta);
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let c = cfg(UpdateRule::Adam, 0.01);
        let theta = [0.5, 1.5, 2.5];
        let (next, state) = adam_step(AdamState::new(3), &theta, &[0.0; 3], &c);
        assert_eq!(&*next, &theta);
        assert_eq!(state.first_moment.len(), 3);
        assert_eq!(state.second_moment.len(), 3);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn adam_constant_gradient_step_tends_to_lr() {
        // with g = 1 both bias-corrected moments equal 1 exactly, so each step
        // moves theta by lr / (1 + eps)
        let c = cfg(UpdateRule::Adam, 0.01);
        let mut state = AdamState::new(1);
        let mut theta = vec![0.0];
        let mut last = 0.0;
        for _ in 0..1000 {
            let (next, s) = adam_step(state, &theta, &[1.0], &c);
            last = theta[0] - next[0];
            theta = next.into_inner();
            state = s;
        }
        let limit = c.learning_rate / (1.0 + c.adam_epsilon);
        assert!((last - limit).abs() < 1e-12, "step {last} vs {limit}");
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        assert!(cfg(UpdateRule::Gd, 0.0).validate().is_err());
        let mut c = OptimizerConfig::default();
        c.adam_beta1 = 1.0;
        assert!(c.validate().is_err());
        c = OptimizerConfig::default();
        c.threshold_tau = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn already_converged_start_returns_immediately() {
        let spec = AnsatzSpec::build(2, 2).unwrap();
        let theta = cold_start_theta(&spec, 5);
        let target = spec.prepare_state(&theta).unwrap();
        let rec = optimize(&spec, &theta, &target, &OptimizerConfig::default(), 5).unwrap();
        assert_eq!(rec.n_iter, 0);
        assert!(rec.converged);
        assert_eq!(rec.qe_total, 1);
        assert_eq!(rec.cost_trace.len(), 1);
        assert_eq!(rec.final_theta, theta);
    }

    #[test]
    fn zero_iteration_budget() {
        let spec = AnsatzSpec::build(2, 2).unwrap();
        let theta = cold_start_theta(&spec, 8);
        let target = QuantumState::random(2, 8).unwrap();
        let config = OptimizerConfig {
            max_iterations: 0,
            ..OptimizerConfig::default()
        };
        let rec = optimize(&spec, &theta, &target, &config, 8).unwrap();
        assert_eq!(rec.n_iter, 0);
        assert_eq!(rec.final_theta, theta);
        assert_eq!(rec.converged, rec.final_cost <= config.threshold_tau);
        assert_eq!(rec.qe_total, 1);
    }

    #[test]
    fn record_invariants_hold() {
        let spec = AnsatzSpec::build(2, 2).unwrap();
        for (seed, rule) in [(1, UpdateRule::Adam), (2, UpdateRule::Gd)] {
            let target = QuantumState::random(2, seed).unwrap();
            let config = OptimizerConfig {
                rule,
                learning_rate: if rule == UpdateRule::Gd { 0.5 } else { 0.05 },
                max_iterations: 40,
                ..OptimizerConfig::default()
            };
            let rec = optimize(
                &spec,
                &cold_start_theta(&spec, seed),
                &target,
                &config,
                seed,
            )
            .unwrap();
            assert!(rec.n_iter <= config.max_iterations);
            assert_eq!(rec.cost_trace.len(), rec.n_iter + 1);
            assert_eq!(rec.converged, rec.final_cost <= config.threshold_tau);
            let per_iter = objective::iteration_evaluations(&spec);
            assert_eq!(rec.qe_total, rec.n_iter as u64 * per_iter + 1);
            let again = optimize(
                &spec,
                &cold_start_theta(&spec, seed),
                &target,
                &config,
                seed,
            )
            .unwrap();
            assert_eq!(rec, again);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let spec = AnsatzSpec::build(2, 1).unwrap();
        let target = QuantumState::random(2, 0).unwrap();
        assert!(optimize(&spec, &[0.0; 2], &target, &OptimizerConfig::default(), 0).is_err());
    }
}
