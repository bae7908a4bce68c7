//! The optimized-target set and its JSON persistence.
//!
//! File layout (`store.json`):
//!
//! ```json
//! {
//!   "schema": "mtqo-store/1",
//!   "ansatz": { "num_qubits": 2, "num_layers": 2, "entangler": {...}, "gates": [...], "param_count": 12 },
//!   "entries": [
//!     { "id": "n2-A-0", "target": [[re, im], ...], "theta_star": [...],
//!       "final_cost": 0.0009, "seed": 123, "provenance": "cold" }
//!   ]
//! }
//! ```
//!
//! Reals are written in shortest round-trip form, so a save/load cycle is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::objective::{self, QeCounter};
use crate::optimizer::{InitProvenance, OptimizationRecord};
use crate::statevector::QuantumState;

pub const STORE_SCHEMA: &str = "mtqo-store/1";

/// Tolerance between a recorded final cost and a fresh evaluation.
pub const COST_RECHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizedEntry {
    pub id: String,
    pub target: QuantumState,
    pub theta_star: ParamVector,
    pub final_cost: f64,
    pub seed: u64,
    pub provenance: InitProvenance,
}

impl OptimizedEntry {
    pub fn from_record(
        id: impl Into<String>,
        target: QuantumState,
        record: &OptimizationRecord,
    ) -> Self {
        Self {
            id: id.into(),
            target,
            theta_star: record.final_theta.clone(),
            final_cost: record.final_cost,
            seed: record.seed,
            provenance: record.init_provenance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedStore {
    ansatz: AnsatzSpec,
    entries: Vec<OptimizedEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreFile {
    schema: String,
    ansatz: AnsatzSpec,
    entries: Vec<OptimizedEntry>,
}

impl OptimizedStore {
    pub fn new(ansatz: AnsatzSpec) -> Self {
        Self {
            ansatz,
            entries: Vec::new(),
        }
    }

    pub fn ansatz(&self) -> &AnsatzSpec {
        &self.ansatz
    }

    pub fn entries(&self) -> &[OptimizedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&OptimizedEntry> {
        self.entries.get(index)
    }

    pub fn targets(&self) -> impl Iterator<Item = &QuantumState> {
        self.entries.iter().map(|e| &e.target)
    }

    /// Appends an entry after checking its shape against the store's ansatz.
    pub fn push(&mut self, entry: OptimizedEntry) -> Result<()> {
        self.check_shape(&entry)?;
        self.entries.push(entry);
        Ok(())
    }

    fn check_shape(&self, entry: &OptimizedEntry) -> Result<()> {
        let integrity = |message: String| Error::Integrity {
            entry: format!("entry '{}'", entry.id),
            message,
        };
        if entry.target.num_qubits() != self.ansatz.num_qubits() {
            return Err(integrity(format!(
                "target has {} qubits, ansatz has {}",
                entry.target.num_qubits(),
                self.ansatz.num_qubits()
            )));
        }
        if entry.theta_star.len() != self.ansatz.param_count() {
            return Err(integrity(format!(
                "theta_star has {} parameters, ansatz has m = {}",
                entry.theta_star.len(),
                self.ansatz.param_count()
            )));
        }
        if entry.theta_star.iter().any(|v| !v.is_finite()) || !entry.final_cost.is_finite() {
            return Err(integrity("non-finite value".into()));
        }
        Ok(())
    }

    /// Full invariant check, including re-evaluating every recorded final cost.
    pub fn validate(&self) -> Result<()> {
        self.ansatz.validate()?;
        for (i, entry) in self.entries.iter().enumerate() {
            self.check_shape(entry).map_err(|e| match e {
                Error::Integrity { entry, message } => Error::Integrity {
                    entry: format!("entries[{i}] ({entry})"),
                    message,
                },
                other => other,
            })?;
            let fresh = objective::cost(
                &self.ansatz,
                &entry.theta_star,
                &entry.target,
                &mut QeCounter::new(),
            )?;
            if (fresh - entry.final_cost).abs() > COST_RECHECK_TOLERANCE {
                return Err(Error::Integrity {
                    entry: format!("entries[{i}] (entry '{}')", entry.id),
                    message: format!(
                        "recorded final_cost {} disagrees with re-evaluated cost {fresh}",
                        entry.final_cost
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = StoreFile {
            schema: STORE_SCHEMA.to_string(),
            ansatz: self.ansatz.clone(),
            entries: self.entries.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Schema {
            location: "store".into(),
            message: e.to_string(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StoreFile = serde_json::from_str(text).map_err(|e| Error::Schema {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        if file.schema != STORE_SCHEMA {
            return Err(Error::Schema {
                location: "schema".into(),
                message: format!("expected '{STORE_SCHEMA}', found '{}'", file.schema),
            });
        }
        let store = Self {
            ansatz: file.ansatz,
            entries: file.entries,
        };
        store.validate()?;
        Ok(store)
    }
}

pub fn store_save(store: &OptimizedStore, path: &Path) -> Result<()> {
    let text = store.to_json()?;
    std::fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn store_load(path: &Path) -> Result<OptimizedStore> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    OptimizedStore::from_json(&text)
}
