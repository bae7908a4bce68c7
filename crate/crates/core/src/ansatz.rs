//! The CRY-chain + ZXZ layered ansatz.
//!
//! Each layer is a cyclic chain of controlled-RY gates `CRY(i -> (i+1) mod n)`
//! for `i = 0..n`, followed by an `RZ RX RZ` rotation block on every qubit.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{AngleSource, GateDescriptor, GateKind, QuantumState};

/// How the entangling CRY chain gets its angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "angle")]
pub enum Entangler {
    /// Every CRY is a fixed-angle entangler; only the ZXZ rotations train (3nL parameters).
    Fixed(f64),
    /// Every CRY carries its own trainable angle (4nL parameters).
    Trainable,
}

impl Default for Entangler {
    fn default() -> Self {
        Entangler::Fixed(std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    num_qubits: usize,
    num_layers: usize,
    entangler: Entangler,
    gates: Vec<GateDescriptor>,
    param_count: usize,
}

impl AnsatzSpec {
    /// Builds the default ansatz on `n` qubits with `layers` layers.
    pub fn build(n: usize, layers: usize) -> Result<Self> {
        Self::with_entangler(n, layers, Entangler::default())
    }

    pub fn with_entangler(n: usize, layers: usize, entangler: Entangler) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedTopology(format!(
                "cyclic CRY chain needs at least 2 qubits, got {n}"
            )));
        }
        if n > crate::statevector::MAX_QUBITS {
            return Err(Error::InvalidConfig(format!("{n} qubits is too many")));
        }
        if layers < 1 {
            return Err(Error::InvalidConfig(
                "ansatz needs at least one layer".into(),
            ));
        }
        if let Entangler::Fixed(a) = entangler {
            if !a.is_finite() {
                return Err(Error::InvalidConfig(
                    "fixed entangler angle must be finite".into(),
                ));
            }
        }

        let mut gates = Vec::with_capacity(4 * n * layers);
        let mut next = 0usize;
        let mut param = || {
            let j = next;
            next += 1;
            AngleSource::Param(j)
        };
        for _ in 0..layers {
            for i in 0..n {
                let angle = match entangler {
                    Entangler::Fixed(a) => AngleSource::Fixed(a),
                    Entangler::Trainable => param(),
                };
                gates.push(GateDescriptor::cry(i, (i + 1) % n, angle));
            }
            for q in 0..n {
                gates.push(GateDescriptor::single(GateKind::Rz, q, param()));
                gates.push(GateDescriptor::single(GateKind::Rx, q, param()));
                gates.push(GateDescriptor::single(GateKind::Rz, q, param()));
            }
        }
        let param_count = next;

        Ok(Self {
            num_qubits: n,
            num_layers: layers,
            entangler,
            gates,
            param_count,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn entangler(&self) -> Entangler {
        self.entangler
    }

    pub fn gates(&self) -> &[GateDescriptor] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// Re-checks the structural invariants. Used after deserialization.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = Self::with_entangler(self.num_qubits, self.num_layers, self.entangler)?;
        if rebuilt != *self {
            return Err(Error::Integrity {
                entry: "ansatz".into(),
                message: "gate list does not match the CRY-chain + ZXZ layout".into(),
            });
        }
        Ok(())
    }

    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_count {
            return Err(Error::DimensionMismatch {
                expected: self.param_count,
                actual: theta.len(),
            });
        }
        Ok(())
    }

    pub fn check_target(&self, target: &QuantumState) -> Result<()> {
        if target.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: target.num_qubits(),
            });
        }
        Ok(())
    }

    /// Angle that gate `gate` receives under `theta`.
    pub(crate) fn angle_of(gate: &GateDescriptor, theta: &[f64]) -> f64 {
        match gate.angle {
            AngleSource::Param(j) => theta[j],
            AngleSource::Fixed(a) => a,
        }
    }

    /// Position in the gate list of the gate driven by parameter `j`.
    pub fn gate_for_param(&self, j: usize) -> Option<usize> {
        self.gates.iter().position(|g| g.param_index() == Some(j))
    }

    /// `U(theta) |0...0>`.
    pub fn prepare_state(&self, theta: &[f64]) -> Result<QuantumState> {
        self.check_params(theta)?;
        let mut state = QuantumState::zero(self.num_qubits)?;
        for g in &self.gates {
            state.apply_unchecked(g, Self::angle_of(g, theta));
        }
        Ok(state)
    }
}

pub fn build_ansatz(n: usize, layers: usize) -> Result<AnsatzSpec> {
    AnsatzSpec::build(n, layers)
}

pub fn prepare_state(spec: &AnsatzSpec, theta: &ParamVector) -> Result<QuantumState> {
    spec.prepare_state(theta)
}

/// Real-valued angle vector in radians.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("parameter {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    /// i.i.d. uniform angles on `[0, 2pi)`.
    pub fn random_uniform(m: usize, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self(
            (0..m)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect(),
        )
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}
