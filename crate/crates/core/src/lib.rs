//! Multi-target optimization of parameterized quantum circuits.
//!
//! A statevector simulator and the CRY-chain + ZXZ ansatz define a fidelity
//! cost per target state. On top of the single-target optimizer sit three
//! transfer strategies that reuse solved targets: warm starting from the
//! nearest solved target, a first-order Taylor parameter estimate, and
//! flooding solutions down a hierarchical clustering of the targets.

pub mod ansatz;
pub mod bench;
pub mod cluster_tree;
pub mod error;
pub mod metrics;
pub mod objective;
pub mod optimizer;
mod par;
pub mod seeds;
pub mod statevector;
pub mod store;
pub mod transfer;

pub use ansatz::{AnsatzSpec, Entangler, ParamVector};
pub use error::{Error, Result};
pub use objective::QeCounter;
pub use optimizer::{InitProvenance, OptimizationRecord, OptimizerConfig, UpdateRule};
pub use statevector::{GateDescriptor, GateKind, QuantumState};
pub use store::{OptimizedEntry, OptimizedStore};
