//! Hierarchical k-means organisation of targets and training-stage flooding.
//!
//! The root (level 0) holds the global centroid; each level below splits its
//! parent's members with k-means. Training optimizes the root centroid from a
//! cold start and floods every solution downward: each child centroid starts
//! from its parent's optimum, and each leaf's member targets start from the
//! leaf centroid's optimum.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::metrics;
use crate::optimizer::{
    cold_start_theta, optimize_with_provenance, InitProvenance, OptimizationRecord, OptimizerConfig,
};
use crate::statevector::QuantumState;
use crate::{par, seeds};

/// Mean norm below which the centroid falls back to the medoid.
pub const CENTROID_COLLAPSE_NORM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    pub depth: usize,
    pub branching: usize,
    pub cluster_seed: u64,
    pub max_kmeans_iters: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            depth: 2,
            branching: 2,
            cluster_seed: 0,
            max_kmeans_iters: 100,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.branching < 2 {
            return Err(Error::InvalidConfig("branching must be >= 2".into()));
        }
        if self.max_kmeans_iters == 0 {
            return Err(Error::InvalidConfig("max_kmeans_iters must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Preorder index, unique within the tree.
    pub id: usize,
    pub level: usize,
    pub centroid: QuantumState,
    /// Every target under this node.
    pub members: Vec<usize>,
    pub children: Vec<TreeNode>,
    /// Targets owned by this node; non-empty only at leaves.
    pub leaf_targets: Vec<usize>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Nodes in preorder.
    pub fn nodes(&self) -> Vec<&TreeNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.nodes());
        }
        out
    }

    pub fn leaves(&self) -> Vec<&TreeNode> {
        self.nodes().into_iter().filter(|n| n.is_leaf()).collect()
    }

    pub fn depth(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTree {
    pub config: TreeConfig,
    pub targets: Vec<QuantumState>,
    pub root: TreeNode,
}

/// Renormalized mean of `states`, or their medoid when the mean collapses.
pub fn centroid(states: &[&QuantumState]) -> Result<QuantumState> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidDimension("centroid of an empty cluster".into()))?;
    let mut sum = vec![Complex64::new(0.0, 0.0); first.dim()];
    for s in states {
        first.check_same_size(s)?;
        for (acc, a) in sum.iter_mut().zip(s.amplitudes()) {
            *acc += a;
        }
    }
    let norm = sum.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() / states.len() as f64;
    if norm < CENTROID_COLLAPSE_NORM {
        return medoid(states);
    }
    QuantumState::normalized(sum)
}

fn medoid(states: &[&QuantumState]) -> Result<QuantumState> {
    let mut best = (f64::INFINITY, 0usize);
    for (i, a) in states.iter().enumerate() {
        let mut total = 0.0;
        for b in states {
            total += metrics::distance(a, b)?;
        }
        if total < best.0 {
            best = (total, i);
        }
    }
    Ok(states[best.1].clone())
}

pub fn build_tree(targets: &[QuantumState], config: &TreeConfig) -> Result<ClusterTree> {
    config.validate()?;
    let first = targets
        .first()
        .ok_or_else(|| Error::InvalidDimension("cannot build a tree over zero targets".into()))?;
    for t in targets {
        first.check_same_size(t)?;
    }
    let mut next_id = 0;
    let members: Vec<usize> = (0..targets.len()).collect();
    let root = build_node(targets, members, 0, config, &mut next_id)?;
    Ok(ClusterTree {
        config: *config,
        targets: targets.to_vec(),
        root,
    })
}

fn build_node(
    targets: &[QuantumState],
    members: Vec<usize>,
    level: usize,
    config: &TreeConfig,
    next_id: &mut usize,
) -> Result<TreeNode> {
    let id = *next_id;
    *next_id += 1;
    let states: Vec<&QuantumState> = members.iter().map(|&i| &targets[i]).collect();
    let centroid = centroid(&states)?;

    let groups = if level >= config.depth || members.len() <= 1 {
        Vec::new()
    } else {
        let points: Vec<&[Complex64]> = states.iter().map(|s| s.amplitudes()).collect();
        let seed = seeds::derive(config.cluster_seed, "kmeans", &[id as u64]);
        let labels = kmeans(
            &points,
            config.branching.min(members.len()),
            config.max_kmeans_iters,
            seed,
        );
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); k];
        for (&m, &l) in members.iter().zip(&labels) {
            groups[l].push(m);
        }
        groups.retain(|g| !g.is_empty());
        if groups.len() < 2 {
            groups.clear();
        }
        groups
    };

    if groups.is_empty() {
        return Ok(TreeNode {
            id,
            level,
            centroid,
            leaf_targets: members.clone(),
            members,
            children: Vec::new(),
        });
    }
    let children = groups
        .into_iter()
        .map(|g| build_node(targets, g, level + 1, config, next_id))
        .collect::<Result<Vec<_>>>()?;
    Ok(TreeNode {
        id,
        level,
        centroid,
        members,
        children,
        leaf_targets: Vec::new(),
    })
}

fn sq_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

fn nearest_center(p: &[Complex64], centers: &[Vec<Complex64>]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(p, center);
        if d < best.0 {
            best = (d, c);
        }
    }
    best.1
}

/// Lloyd's k-means with k-means++ seeding. Points live in C^d, which is R^(2d)
/// with the same Euclidean norm. Returns a label per point.
pub fn kmeans(points: &[&[Complex64]], k: usize, max_iters: usize, seed: u64) -> Vec<usize> {
    if points.is_empty() || k <= 1 {
        return vec![0; points.len()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<Complex64>> = vec![points[rng.random_range(0..points.len())].to_vec()];
    while centers.len() < k {
        let weights: Vec<f64> = points
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| sq_dist(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            // remaining points coincide with existing centers
            break;
        }
        let mut pick = rng.random_range(0.0..total);
        let mut chosen = points.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                chosen = i;
                break;
            }
            pick -= w;
        }
        centers.push(points[chosen].to_vec());
    }

    let dim = points[0].len();
    let mut labels: Vec<usize> = points.iter().map(|p| nearest_center(p, &centers)).collect();
    for _ in 0..max_iters {
        let mut sums = vec![vec![Complex64::new(0.0, 0.0); dim]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, a) in sums[l].iter_mut().zip(p.iter()) {
                *s += a;
            }
        }
        for (c, (sum, &count)) in sums.into_iter().zip(&counts).enumerate() {
            if count > 0 {
                centers[c] = sum.into_iter().map(|s| s / count as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest_center(p, &centers)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    labels
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "id")]
pub enum TreeSubject {
    /// Centroid of the node with this id.
    Centroid(usize),
    /// Original target with this index.
    Target(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRecord {
    /// Position in flooding order.
    pub sequence: usize,
    pub subject: TreeSubject,
    pub node_id: usize,
    pub level: usize,
    /// Sequence number of the record this run was warm-started from.
    pub parent_sequence: Option<usize>,
    pub record: OptimizationRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeTraining {
    pub records: Vec<TreeRecord>,
}

impl TreeTraining {
    pub fn total_iterations(&self) -> usize {
        self.records.iter().map(|r| r.record.n_iter).sum()
    }

    pub fn total_qe(&self) -> u64 {
        self.records.iter().map(|r| r.record.qe_total).sum()
    }

    pub fn target_records(&self) -> impl Iterator<Item = (usize, &TreeRecord)> {
        self.records.iter().filter_map(|r| match r.subject {
            TreeSubject::Target(t) => Some((t, r)),
            TreeSubject::Centroid(_) => None,
        })
    }

    pub fn centroid_record(&self, node_id: usize) -> Option<&TreeRecord> {
        self.records
            .iter()
            .find(|r| r.subject == TreeSubject::Centroid(node_id))
    }

    /// Every warm-started record comes after the record it started from.
    pub fn flooding_order_ok(&self) -> bool {
        self.records
            .iter()
            .enumerate()
            .all(|(i, r)| r.sequence == i && r.parent_sequence.is_none_or(|p| p < r.sequence))
    }
}

struct Job<'a> {
    subject: TreeSubject,
    node: &'a TreeNode,
    state: &'a QuantumState,
    start: ParamVector,
    provenance: InitProvenance,
    parent_sequence: Option<usize>,
}

/// Optimizes every centroid and target of `tree` by flooding solutions downward.
/// Jobs of one wave are independent and run in parallel.
pub fn train_tree(
    tree: &ClusterTree,
    spec: &AnsatzSpec,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<TreeTraining> {
    spec.check_target(&tree.root.centroid)?;
    let mut records: Vec<TreeRecord> = Vec::new();
    let mut wave = vec![Job {
        subject: TreeSubject::Centroid(tree.root.id),
        node: &tree.root,
        state: &tree.root.centroid,
        start: cold_start_theta(spec, seeds::derive(seed, "tree-root", &[])),
        provenance: InitProvenance::Cold,
        parent_sequence: None,
    }];

    while !wave.is_empty() {
        let results = par::try_map(&wave, |_, job| {
            let run_seed = match job.subject {
                TreeSubject::Centroid(id) => seeds::derive(seed, "tree-node", &[id as u64]),
                TreeSubject::Target(t) => seeds::derive(seed, "tree-target", &[t as u64]),
            };
            optimize_with_provenance(
                spec,
                &job.start,
                job.state,
                config,
                run_seed,
                job.provenance,
            )
        })?;

        let mut next = Vec::new();
        for (job, record) in wave.into_iter().zip(results) {
            let sequence = records.len();
            if let TreeSubject::Centroid(_) = job.subject {
                let node = job.node;
                if node.is_leaf() {
                    for &t in &node.leaf_targets {
                        next.push(Job {
                            subject: TreeSubject::Target(t),
                            node,
                            state: &tree.targets[t],
                            start: record.final_theta.clone(),
                            provenance: InitProvenance::TreeParent,
                            parent_sequence: Some(sequence),
                        });
                    }
                } else {
                    for child in &node.children {
                        next.push(Job {
                            subject: TreeSubject::Centroid(child.id),
                            node: child,
                            state: &child.centroid,
                            start: record.final_theta.clone(),
                            provenance: InitProvenance::TreeParent,
                            parent_sequence: Some(sequence),
                        });
                    }
                }
            }
            records.push(TreeRecord {
                sequence,
                subject: job.subject,
                node_id: job.node.id,
                level: job.node.level,
                parent_sequence: job.parent_sequence,
                record,
            });
        }
        wave = next;
    }
    Ok(TreeTraining { records })
}
