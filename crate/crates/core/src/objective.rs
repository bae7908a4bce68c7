//! Fidelity cost, parameter-shift partial derivatives and the quantum
//! evaluation (QE) tally.
//!
//! `C(theta, x) = 1 - |<x| U(theta) |0...0>|^2`. One QE is one evaluation of
//! `C`. Single-qubit rotations use the two-term shift rule at `+-pi/2`
//! (2 QE per partial); a trainable CRY, whose generator has three distinct
//! eigenvalues, needs the four-term rule at `+-pi/2, +-3pi/2` (4 QE).

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSpec;
use crate::error::{Error, Result};
use crate::statevector::{GateDescriptor, GateKind, QuantumState};

/// Running count of cost-function evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QeCounter(u64);

impl QeCounter {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn total(&self) -> u64 {
        self.0
    }

    pub fn add(&mut self, n: u64) {
        self.0 += n;
    }
}

/// `(coefficient, shift)` pairs such that
/// `dC/dtheta = sum_k coefficient_k * [C(theta + shift_k) - C(theta - shift_k)]`.
pub fn shift_rule(kind: GateKind) -> &'static [(f64, f64)] {
    const TWO_TERM: [(f64, f64); 1] = [(0.5, FRAC_PI_2)];
    // frequencies {1/2, 1}
    const FOUR_TERM: [(f64, f64); 2] = [
        ((SQRT_2 + 1.0) / (4.0 * SQRT_2), FRAC_PI_2),
        (-(SQRT_2 - 1.0) / (4.0 * SQRT_2), 3.0 * FRAC_PI_2),
    ];
    match kind {
        GateKind::Rx | GateKind::Ry | GateKind::Rz => &TWO_TERM,
        GateKind::Cry => &FOUR_TERM,
    }
}

/// QE cost of one partial derivative through a gate of this kind.
pub fn partial_evaluations(kind: GateKind) -> u64 {
    2 * shift_rule(kind).len() as u64
}

/// QE cost of one full gradient. Equals `2m` when every trainable gate is a
/// single-qubit rotation.
pub fn gradient_evaluations(spec: &AnsatzSpec) -> u64 {
    spec.gates()
        .iter()
        .filter(|g| g.param_index().is_some())
        .map(|g| partial_evaluations(g.kind))
        .sum()
}

/// QE cost of one optimizer iteration: a cost check plus a gradient.
pub fn iteration_evaluations(spec: &AnsatzSpec) -> u64 {
    gradient_evaluations(spec) + 1
}

fn fidelity_cost(amplitude: Complex64) -> f64 {
    (1.0 - amplitude.norm_sqr()).max(0.0)
}

fn check_inputs(spec: &AnsatzSpec, theta: &[f64], target: &QuantumState) -> Result<()> {
    spec.check_params(theta)?;
    spec.check_target(target)
}

fn uncounted_cost(spec: &AnsatzSpec, theta: &[f64], target: &QuantumState) -> Result<f64> {
    let prepared = spec.prepare_state(theta)?;
    Ok(fidelity_cost(target.overlap(&prepared)?))
}

/// `C(theta, x)`; one QE.
pub fn cost(
    spec: &AnsatzSpec,
    theta: &[f64],
    target: &QuantumState,
    counter: &mut QeCounter,
) -> Result<f64> {
    check_inputs(spec, theta, target)?;
    let c = uncounted_cost(spec, theta, target)?;
    counter.add(1);
    Ok(c)
}

/// Shift-rule partial derivative `dC/dtheta_j`, re-running the circuit at
/// each shifted point.
pub fn psr_partial(
    spec: &AnsatzSpec,
    theta: &[f64],
    target: &QuantumState,
    j: usize,
    counter: &mut QeCounter,
) -> Result<f64> {
    check_inputs(spec, theta, target)?;
    let gate = spec
        .gate_for_param(j)
        .map(|g| spec.gates()[g])
        .ok_or(Error::ParamOutOfRange {
            index: j,
            count: spec.param_count(),
        })?;
    let mut shifted = theta.to_vec();
    let mut partial = 0.0;
    for &(coef, shift) in shift_rule(gate.kind) {
        shifted[j] = theta[j] + shift;
        let plus = uncounted_cost(spec, &shifted, target)?;
        shifted[j] = theta[j] - shift;
        let minus = uncounted_cost(spec, &shifted, target)?;
        partial += coef * (plus - minus);
    }
    counter.add(partial_evaluations(gate.kind));
    Ok(partial)
}

/// Full shift-rule gradient.
///
/// Produces the same shifted cost values as calling [`psr_partial`] for every
/// `j`, but shares work between them: forward states `G_{g-1}...G_0|0>` and
/// backward bras `<x|G_last...G_{g+1}` are computed once, so each shifted
/// evaluation is a single gate application plus an inner product.
pub fn gradient(
    spec: &AnsatzSpec,
    theta: &[f64],
    target: &QuantumState,
    counter: &mut QeCounter,
) -> Result<Vec<f64>> {
    check_inputs(spec, theta, target)?;
    let gates = spec.gates();

    let mut forward = Vec::with_capacity(gates.len());
    let mut state = QuantumState::zero(spec.num_qubits())?;
    for g in gates {
        forward.push(state.clone());
        state.apply_unchecked(g, AnsatzSpec::angle_of(g, theta));
    }

    let mut grad = vec![0.0; spec.param_count()];
    let mut bra = target.clone();
    let mut scratch = state;
    for (g, before) in gates.iter().zip(&forward).rev() {
        let angle = AnsatzSpec::angle_of(g, theta);
        if let Some(j) = g.param_index() {
            let mut partial = 0.0;
            for &(coef, shift) in shift_rule(g.kind) {
                let plus = shifted_amplitude(g, angle + shift, before, &bra, &mut scratch);
                let minus = shifted_amplitude(g, angle - shift, before, &bra, &mut scratch);
                partial += coef * (fidelity_cost(plus) - fidelity_cost(minus));
            }
            grad[j] = partial;
            counter.add(partial_evaluations(g.kind));
        }
        bra.apply_unchecked(g, -angle);
    }
    Ok(grad)
}

fn shifted_amplitude(
    gate: &GateDescriptor,
    angle: f64,
    before: &QuantumState,
    bra: &QuantumState,
    scratch: &mut QuantumState,
) -> Complex64 {
    scratch.clone_from(before);
    scratch.apply_unchecked(gate, angle);
    bra.amplitudes()
        .iter()
        .zip(scratch.amplitudes())
        .map(|(b, s)| b.conj() * s)
        .sum()
}

/// Cost and gradient together (`iteration_evaluations` QEs).
pub fn cost_and_gradient(
    spec: &AnsatzSpec,
    theta: &[f64],
    target: &QuantumState,
    counter: &mut QeCounter,
) -> Result<(f64, Vec<f64>)> {
    let c = cost(spec, theta, target, counter)?;
    let g = gradient(spec, theta, target, counter)?;
    Ok((c, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{Entangler, ParamVector};
    use std::f64::consts::{PI, TAU};

    #[test]
    fn cost_at_identity() {
        let spec = AnsatzSpec::build(2, 2).unwrap();
        let zeros = ParamVector::zeros(spec.param_count());
        let mut qe = QeCounter::new();
        let c0 = cost(&spec, &zeros, &QuantumState::zero(2).unwrap(), &mut qe).unwrap();
        assert!(c0.abs() < 1e-15);
        let c1 = cost(&spec, &zeros, &QuantumState::basis(2, 3).unwrap(), &mut qe).unwrap();
        assert!((c1 - 1.0).abs() < 1e-15);
        assert_eq!(qe.total(), 2);
    }

    #[test]
    fn dimension_errors() {
        let spec = AnsatzSpec::build(2, 1).unwrap();
        let mut qe = QeCounter::new();
        let theta = ParamVector::zeros(spec.param_count());
        assert!(cost(&spec, &theta, &QuantumState::zero(3).unwrap(), &mut qe).is_err());
        assert!(cost(&spec, &[0.0], &QuantumState::zero(2).unwrap(), &mut qe).is_err());
        assert!(matches!(
            psr_partial(&spec, &theta, &QuantumState::zero(2).unwrap(), 99, &mut qe),
            Err(Error::ParamOutOfRange { index: 99, .. })
        ));
        assert_eq!(qe.total(), 0);
    }

    #[test]
    fn flat_direction_has_zero_partial() {
        // trainable CRY(0 -> 1) with qubit 0 held in |0> at theta = 0
        let spec = AnsatzSpec::with_entangler(2, 1, Entangler::Trainable).unwrap();
        let theta = ParamVector::zeros(spec.param_count());
        let target = QuantumState::random(2, 3).unwrap();
        let mut qe = QeCounter::new();
        let d = psr_partial(&spec, &theta, &target, 0, &mut qe).unwrap();
        assert!(d.abs() < 1e-12);
        assert_eq!(qe.total(), 4);
    }

    #[test]
    fn periodic_in_each_parameter() {
        let spec = AnsatzSpec::build(2, 2).unwrap();
        let target = QuantumState::random(2, 9).unwrap();
        let theta = ParamVector::random_uniform(spec.param_count(), 9);
        let mut qe = QeCounter::new();
        for j in 0..spec.param_count() {
            let mut wrapped = theta.clone();
            wrapped[j] += TAU;
            let a = psr_partial(&spec, &theta, &target, j, &mut qe).unwrap();
            let b = psr_partial(&spec, &wrapped, &target, j, &mut qe).unwrap();
            assert!((a - b).abs() < 1e-10);
            let ca = cost(&spec, &theta, &target, &mut qe).unwrap();
            let cb = cost(&spec, &wrapped, &target, &mut qe).unwrap();
            assert!((ca - cb).abs() < 1e-10);
        }
    }

    #[test]
    fn swept_gradient_matches_per_parameter_reruns() {
        for entangler in [Entangler::default(), Entangler::Trainable] {
            let spec = AnsatzSpec::with_entangler(3, 2, entangler).unwrap();
            let target = QuantumState::random(3, 21).unwrap();
            let theta = ParamVector::random_uniform(spec.param_count(), 21);
            let mut swept_qe = QeCounter::new();
            let swept = gradient(&spec, &theta, &target, &mut swept_qe).unwrap();
            let mut rerun_qe = QeCounter::new();
            for (j, g) in swept.iter().enumerate() {
                let p = psr_partial(&spec, &theta, &target, j, &mut rerun_qe).unwrap();
                assert!((p - g).abs() < 1e-12, "param {j}: {p} vs {g}");
            }
            assert_eq!(swept_qe, rerun_qe);
            assert_eq!(swept_qe.total(), gradient_evaluations(&spec));
        }
    }

    #[test]
    fn qe_per_gradient() {
        let spec = AnsatzSpec::build(2, 1).unwrap();
        assert_eq!(gradient_evaluations(&spec), 2 * spec.param_count() as u64);
        let mut qe = QeCounter::new();
        gradient(
            &spec,
            &ParamVector::zeros(6),
            &QuantumState::zero(2).unwrap(),
            &mut qe,
        )
        .unwrap();
        assert_eq!(qe.total(), 12);

        let trainable = AnsatzSpec::with_entangler(2, 1, Entangler::Trainable).unwrap();
        // 2 CRY x 4 + 6 rotations x 2
        assert_eq!(gradient_evaluations(&trainable), 20);
    }

    #[test]
    fn four_term_rule_on_pure_frequencies() {
        // f = a cos(t/2) + b sin(t) is the family a CRY angle produces
        let f = |t: f64| 0.3 * (t / 2.0).cos() + 0.7 * t.sin();
        let df = |t: f64| -0.15 * (t / 2.0).sin() + 0.7 * t.cos();
        for k in 0..20 {
            let t = -PI + 0.37 * k as f64;
            let est: f64 = shift_rule(GateKind::Cry)
                .iter()
                .map(|&(c, s)| c * (f(t + s) - f(t - s)))
                .sum();
            assert!((est - df(t)).abs() < 1e-14);
        }
    }
}
