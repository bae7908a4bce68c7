use mtqo::objective::{self, QeCounter};
use mtqo::optimizer::{cold_start_theta, optimize};
use mtqo::transfer::{
    estimate_parameters, estimator_optimize, k_nearest, nearest_target, warm_start_optimize,
    StrategyKind, TransferStrategy,
};
use mtqo::{AnsatzSpec, OptimizedEntry, OptimizedStore, OptimizerConfig, QuantumState};
use num_complex::Complex64;

fn optimized_store(n: usize, count: u64, base: u64) -> OptimizedStore {
    let spec = AnsatzSpec::build(n, n).unwrap();
    let config = OptimizerConfig::default();
    let mut store = OptimizedStore::new(spec.clone());
    for k in 0..count {
        let x = QuantumState::random(n, base + k).unwrap();
        let rec = optimize(
            &spec,
            &cold_start_theta(&spec, base + 1000 + k),
            &x,
            &config,
            k,
        )
        .unwrap();
        store
            .push(OptimizedEntry::from_record(format!("a{k}"), x, &rec))
            .unwrap();
    }
    store
}

fn raw_distance(a: &QuantumState, b: &QuantumState) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn perturbed(x: &QuantumState, eps: f64, seed: u64) -> QuantumState {
    let noise = QuantumState::random(x.num_qubits(), seed).unwrap();
    let amps: Vec<Complex64> = x
        .amplitudes()
        .iter()
        .zip(noise.amplitudes())
        .map(|(a, b)| a + b * eps)
        .collect();
    QuantumState::normalized(amps).unwrap()
}

#[test]
fn nearest_target_matches_linear_scan() {
    let spec = AnsatzSpec::build(3, 3).unwrap();
    let mut store = OptimizedStore::new(spec.clone());
    let theta = cold_start_theta(&spec, 0);
    for k in 0..50u64 {
        let x = QuantumState::random(3, 500 + k).unwrap();
        let entry = OptimizedEntry {
            id: format!("e{k}"),
            final_cost: objective::cost(&spec, &theta, &x, &mut QeCounter::new()).unwrap(),
            target: x,
            theta_star: theta.clone(),
            seed: k,
            provenance: mtqo::InitProvenance::Cold,
        };
        store.push(entry).unwrap();
    }
    for q in 0..25u64 {
        let y = QuantumState::random(3, 9000 + q).unwrap();
        let scan: Vec<f64> = store.targets().map(|x| raw_distance(&y, x)).collect();
        let best = (0..scan.len())
            .min_by(|&a, &b| scan[a].total_cmp(&scan[b]))
            .unwrap();
        let (i, d) = nearest_target(&y, &store).unwrap();
        assert_eq!(i, best);
        assert!((d - scan[best]).abs() < 1e-12);
        let top = k_nearest(&y, &store, 5).unwrap();
        assert_eq!(top[0].0, best);
        assert!(top.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}

#[test]
fn estimate_identity_and_pseudo_inverse() {
    let store = optimized_store(2, 5, 40);
    let spec = store.ansatz().clone();
    for (k, entry) in store.entries().iter().enumerate() {
        for q in 0..20u64 {
            let y = QuantumState::random(2, 700 + 100 * k as u64 + q).unwrap();
            let mut qe = QeCounter::new();
            let est = estimate_parameters(&spec, entry, &y, &mut qe).unwrap();
            assert_eq!(qe.total(), 1 + objective::gradient_evaluations(&spec));
            assert!(!est.degenerate);
            let step: Vec<f64> = est
                .theta_tilde
                .iter()
                .zip(entry.theta_star.iter())
                .map(|(a, b)| a - b)
                .collect();
            let lin: f64 = est.gradient.iter().zip(&step).map(|(g, d)| g * d).sum();
            assert!((lin + est.cost_at_source).abs() < 1e-9);
            let norm_sq: f64 = est.gradient.iter().map(|g| g * g).sum();
            for (d, g) in step.iter().zip(&est.gradient) {
                assert!((d + g / norm_sq * est.cost_at_source).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn estimate_helps_for_small_perturbations() {
    let spec = AnsatzSpec::build(2, 2).unwrap();
    let config = OptimizerConfig::default();
    let mut better = 0;
    let mut trials = 0;
    for s in 0..100u64 {
        let x = QuantumState::random(2, 3000 + s).unwrap();
        let rec = optimize(&spec, &cold_start_theta(&spec, 4000 + s), &x, &config, s).unwrap();
        let entry = OptimizedEntry::from_record("x", x.clone(), &rec);
        let y = perturbed(&x, 0.05, 5000 + s);
        let est = estimate_parameters(&spec, &entry, &y, &mut QeCounter::new()).unwrap();
        let after = objective::cost(&spec, &est.theta_tilde, &y, &mut QeCounter::new()).unwrap();
        trials += 1;
        if after < est.cost_at_source {
            better += 1;
        }
    }
    assert!(better * 2 > trials, "{better}/{trials}");
}

#[test]
fn transfer_runs_rarely_end_above_their_start() {
    let store = optimized_store(2, 20, 60);
    let config = OptimizerConfig::default();
    let strategy = TransferStrategy::default();
    let (mut warm_ok, mut est_ok) = (0, 0);
    for q in 0..100u64 {
        let y = QuantumState::random(2, 8000 + q).unwrap();
        let w = warm_start_optimize(&y, &store, &config, q).unwrap();
        if w.final_cost <= w.cost_trace[0] {
            warm_ok += 1;
        }
        let e = estimator_optimize(&y, &store, &strategy, &config, q).unwrap();
        if e.final_cost <= e.cost_trace[0] {
            est_ok += 1;
        }
        let spec = store.ansatz();
        assert_eq!(
            e.qe_total - e.qe_transfer,
            e.n_iter as u64 * objective::iteration_evaluations(spec) + 1
        );
    }
    assert!(warm_ok >= 95 && est_ok >= 95, "warm {warm_ok} est {est_ok}");
}

#[test]
fn sequential_protocol_beats_cold_on_average() {
    let spec = AnsatzSpec::build(2, 2).unwrap();
    let config = OptimizerConfig::default();
    let strategy = TransferStrategy {
        kind: StrategyKind::Estimator,
        candidate_count: 5,
    };
    let mut store = OptimizedStore::new(spec.clone());
    let (mut transfer, mut cold) = (0usize, 0usize);
    for k in 0..30u64 {
        let y = QuantumState::random(2, 100 + k).unwrap();
        let c = optimize(&spec, &cold_start_theta(&spec, 200 + k), &y, &config, k).unwrap();
        let t = if store.is_empty() {
            c.clone()
        } else {
            let s = TransferStrategy {
                candidate_count: strategy.candidate_count.min(store.len()),
                ..strategy
            };
            estimator_optimize(&y, &store, &s, &config, k).unwrap()
        };
        cold += c.n_iter;
        transfer += t.n_iter;
        store
            .push(OptimizedEntry::from_record(format!("b{k}"), y, &t))
            .unwrap();
    }
    assert!(transfer < cold, "{transfer} vs {cold}");
}
