//! Dense statevector simulation for n-qubit pure states.
//!
//! Basis ordering: qubit 0 is the most significant bit of the basis index, so
//! `|q0 q1 ... q(n-1)>` maps to index `q0 * 2^(n-1) + ... + q(n-1)`.
//!
//! Rotation gates use the half-angle convention, e.g.
//! `RY(phi) = [[cos phi/2, -sin phi/2], [sin phi/2, cos phi/2]]`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest register the simulator accepts. 2^24 amplitudes is already 256 MiB.
pub const MAX_QUBITS: usize = 24;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cry,
}

/// Where a gate takes its rotation angle from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleSource {
    /// Index into the trainable parameter vector.
    Param(usize),
    /// Constant angle, not trainable.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDescriptor {
    pub kind: GateKind,
    pub target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<usize>,
    pub angle: AngleSource,
}

impl GateDescriptor {
    pub fn single(kind: GateKind, target: usize, angle: AngleSource) -> Self {
        Self {
            kind,
            target,
            control: None,
            angle,
        }
    }

    pub fn cry(control: usize, target: usize, angle: AngleSource) -> Self {
        Self {
            kind: GateKind::Cry,
            target,
            control: Some(control),
            angle,
        }
    }

    pub fn param_index(&self) -> Option<usize> {
        match self.angle {
            AngleSource::Param(j) => Some(j),
            AngleSource::Fixed(_) => None,
        }
    }

    /// Checks the descriptor against a register of `num_qubits` qubits.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.target >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: self.target,
                num_qubits,
            });
        }
        match (self.kind, self.control) {
            (GateKind::Cry, Some(c)) => {
                if c >= num_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: c,
                        num_qubits,
                    });
                }
                if c == self.target {
                    return Err(Error::ControlEqualsTarget(c));
                }
                Ok(())
            }
            (GateKind::Cry, None) => Err(Error::InvalidConfig(
                "CRY gate requires a control qubit".into(),
            )),
            (_, Some(_)) => Err(Error::InvalidConfig(format!(
                "{:?} gate does not take a control qubit",
                self.kind
            ))),
            (_, None) => Ok(()),
        }
    }

    /// The 2x2 matrix acting on the target qubit (on the control-1 subspace for CRY),
    /// row-major `[m00, m01, m10, m11]`.
    pub fn target_matrix(&self, angle: f64) -> [Complex64; 4] {
        let (s, c) = (angle / 2.0).sin_cos();
        let zero = Complex64::new(0.0, 0.0);
        match self.kind {
            GateKind::Rx => {
                let d = Complex64::new(c, 0.0);
                let o = Complex64::new(0.0, -s);
                [d, o, o, d]
            }
            GateKind::Ry | GateKind::Cry => [
                Complex64::new(c, 0.0),
                Complex64::new(-s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(c, 0.0),
            ],
            GateKind::Rz => [Complex64::new(c, -s), zero, zero, Complex64::new(c, s)],
        }
    }
}

/// Normalized pure state over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(n)?;
        if index >= state.amplitudes.len() {
            return Err(Error::InvalidDimension(format!(
                "basis index {index} exceeds {} amplitudes",
                state.amplitudes.len()
            )));
        }
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Wraps an amplitude vector that must already be unit-norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = qubits_for_len(amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidDimension(format!(
                "amplitudes have norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = qubits_for_len(amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidDimension(format!(
                "cannot normalize vector of norm {norm}"
            )));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Haar-random pure state: i.i.d. standard complex Gaussians, normalized.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        check_qubit_count(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amplitudes: Vec<Complex64> = (0..1usize << n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self::normalized(amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// `<self|other> = sum_k conj(self_k) * other_k`.
    pub fn overlap(&self, other: &QuantumState) -> Result<Complex64> {
        self.check_same_size(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn check_same_size(&self, other: &QuantumState) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        Ok(())
    }

    /// Applies `gate` with rotation `angle` in place.
    pub fn apply(&mut self, gate: &GateDescriptor, angle: f64) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.apply_unchecked(gate, angle);
        Ok(())
    }

    /// Same as [`apply`](Self::apply) without index validation. Callers must
    /// have validated `gate` against this register.
    pub(crate) fn apply_unchecked(&mut self, gate: &GateDescriptor, angle: f64) {
        let m = gate.target_matrix(angle);
        let n = self.num_qubits;
        let stride = 1usize << (n - 1 - gate.target);
        let control_mask = gate.control.map_or(0, |c| 1usize << (n - 1 - c));
        let amps = &mut self.amplitudes;
        for i in 0..amps.len() {
            if i & stride != 0 || i & control_mask != control_mask {
                continue;
            }
            let j = i | stride;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[j] = m[2] * a0 + m[3] * a1;
        }
    }
}

/// Returns `gate(angle)` applied to a copy of `state`.
pub fn apply_gate(state: &QuantumState, gate: &GateDescriptor, angle: f64) -> Result<QuantumState> {
    let mut out = state.clone();
    out.apply(gate, angle)?;
    Ok(out)
}

pub fn zero_state(n: usize) -> Result<QuantumState> {
    QuantumState::zero(n)
}

pub fn sample_random_state(n: usize, seed: u64) -> Result<QuantumState> {
    QuantumState::random(n, seed)
}

pub fn overlap(a: &QuantumState, b: &QuantumState) -> Result<Complex64> {
    a.overlap(b)
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "a register needs at least one qubit".into(),
        ));
    }
    if n > MAX_QUBITS {
        return Err(Error::InvalidDimension(format!(
            "{n} qubits exceeds the supported maximum of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "amplitude count {len} is not a power of two >= 2"
        )));
    }
    let n = len.trailing_zeros() as usize;
    check_qubit_count(n)?;
    Ok(n)
}

fn l2_norm(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

// Wire format: a JSON array of [re, im] pairs.
impl Serialize for QuantumState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.amplitudes.len()))?;
        for a in &self.amplitudes {
            seq.serialize_element(&[a.re, a.im])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        let amps = pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        QuantumState::from_amplitudes(amps).map_err(serde::de::Error::custom)
    }
}
