//! Bounded-rational decision trees: finite rooted trees with a nonzero
//! inverse temperature on every internal node, prior transition
//! probabilities and rewards on edges, and terminal certainty-equivalents on
//! leaves.
//!
//! Nodes live in an arena in depth-first pre-order with children in edge
//! order, so iterating ids backwards visits children before parents. Every
//! reduction in this module uses that order.

mod build;
mod solve;

use std::collections::HashSet;

pub use build::{
    build_ellsberg_tree, classical_tree, classical_value, summarize_ellsberg, two_step_tree,
    ClassicalRule, EllsbergColor, EllsbergSummary, Role, Skeleton, CHANCE_ALPHA,
};
pub use solve::{backward_induction, path_distribution, path_masses, tree_free_energy, TreePolicy, TreeSolution};

use crate::distribution::MASS_TOLERANCE;
use crate::error::{Error, Result};
use crate::math::neumaier_sum;
use crate::rng::Categorical;

/// Index of a node in a [`DecisionTree`]. The root is `NodeId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub label: String,
    pub prior: f64,
    pub reward: f64,
    pub child: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Internal { alpha: f64, edges: Vec<Edge> },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub depth: usize,
}

/// Recursive description of a tree, used to build one and to serialize it.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeSpec {
    Leaf { value: f64 },
    Internal { alpha: f64, edges: Vec<EdgeSpec> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub label: String,
    pub prior: f64,
    pub reward: f64,
    pub child: NodeSpec,
}

impl NodeSpec {
    pub fn leaf(value: f64) -> Self {
        NodeSpec::Leaf { value }
    }

    pub fn internal(alpha: f64, edges: Vec<EdgeSpec>) -> Self {
        NodeSpec::Internal { alpha, edges }
    }

    /// Longest root-to-leaf edge count.
    pub fn depth(&self) -> usize {
        match self {
            NodeSpec::Leaf { .. } => 0,
            NodeSpec::Internal { edges, .. } => {
                1 + edges.iter().map(|e| e.child.depth()).max().unwrap_or(0)
            }
        }
    }
}

impl EdgeSpec {
    pub fn new(label: impl Into<String>, prior: f64, reward: f64, child: NodeSpec) -> Self {
        Self {
            label: label.into(),
            prior,
            reward,
            child,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    horizon: usize,
    nodes: Vec<Node>,
    samplers: Vec<Option<Categorical>>,
}

impl PartialEq for DecisionTree {
    fn eq(&self, other: &Self) -> bool {
        self.horizon == other.horizon && self.nodes == other.nodes
    }
}

impl DecisionTree {
    pub fn new(horizon: usize, root: NodeSpec) -> Result<Self> {
        let mut nodes = Vec::new();
        flatten(&root, None, 0, &mut nodes);
        validate_tree(Self::from_nodes(horizon, nodes))
    }

    /// A tree whose horizon is the depth of `root`.
    pub fn from_spec(root: NodeSpec) -> Result<Self> {
        let horizon = root.depth().max(1);
        Self::new(horizon, root)
    }

    fn from_nodes(horizon: usize, nodes: Vec<Node>) -> Self {
        let samplers = nodes
            .iter()
            .map(|n| match &n.kind {
                NodeKind::Internal { edges, .. } => {
                    let priors: Vec<f64> = edges.iter().map(|e| e.prior).collect();
                    Some(Categorical::new(&priors))
                }
                NodeKind::Leaf { .. } => None,
            })
            .collect();
        Self {
            horizon,
            nodes,
            samplers,
        }
    }

    /// Rebuilds the recursive description.
    pub fn to_spec(&self) -> NodeSpec {
        self.spec_at(NodeId::ROOT)
    }

    fn spec_at(&self, id: NodeId) -> NodeSpec {
        match &self.node(id).kind {
            NodeKind::Leaf { value } => NodeSpec::leaf(*value),
            NodeKind::Internal { alpha, edges } => NodeSpec::internal(
                *alpha,
                edges
                    .iter()
                    .map(|e| EdgeSpec::new(e.label.clone(), e.prior, e.reward, self.spec_at(e.child)))
                    .collect(),
            ),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn ids(&self) -> impl DoubleEndedIterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        matches!(self.node(id).kind, NodeKind::Leaf { .. })
    }

    /// Inverse temperature of an internal node; `None` for leaves.
    pub fn alpha(&self, id: NodeId) -> Option<f64> {
        match self.node(id).kind {
            NodeKind::Internal { alpha, .. } => Some(alpha),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn edges(&self, id: NodeId) -> &[Edge] {
        match &self.node(id).kind {
            NodeKind::Internal { edges, .. } => edges,
            NodeKind::Leaf { .. } => &[],
        }
    }

    pub fn leaf_value(&self, id: NodeId) -> Option<f64> {
        match self.node(id).kind {
            NodeKind::Leaf { value } => Some(value),
            NodeKind::Internal { .. } => None,
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(|id| self.is_leaf(*id))
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(|id| !self.is_leaf(*id))
    }

    pub(crate) fn edge_sampler(&self, id: NodeId) -> &Categorical {
        self.samplers[id.0].as_ref().expect("leaf has no edges")
    }

    /// Edge labels from the root down to `id`.
    pub fn path_labels(&self, id: NodeId) -> Vec<&str> {
        let mut labels = Vec::new();
        let mut cur = id;
        while let Some(parent) = self.node(cur).parent {
            let edge = self
                .edges(parent)
                .iter()
                .find(|e| e.child == cur)
                .expect("parent lists its child");
            labels.push(edge.label.as_str());
            cur = parent;
        }
        labels.reverse();
        labels
    }

    /// `"ε"` for the root, otherwise edge labels joined by `/`.
    pub fn path_string(&self, id: NodeId) -> String {
        if id == NodeId::ROOT {
            "ε".to_string()
        } else {
            self.path_labels(id).join("/")
        }
    }

    /// Total reward along the path to `leaf` plus its terminal value, summed
    /// root-first.
    pub fn path_value(&self, leaf: NodeId) -> f64 {
        let mut rewards = Vec::new();
        let mut cur = leaf;
        while let Some(parent) = self.node(cur).parent {
            let edge = self.edges(parent).iter().find(|e| e.child == cur).unwrap();
            rewards.push(edge.reward);
            cur = parent;
        }
        let mut total = 0.0;
        for r in rewards.iter().rev() {
            total += r;
        }
        total + self.leaf_value(leaf).unwrap_or(0.0)
    }

    /// Copy with new temperatures and rewards; structure, priors and leaf
    /// values are kept. `alphas[i]` and `rewards[i]` are read only for
    /// internal nodes.
    pub(crate) fn reparameterized(&self, alphas: &[f64], rewards: &[Vec<f64>]) -> Result<Self> {
        let mut nodes = self.nodes.clone();
        for (i, node) in nodes.iter_mut().enumerate() {
            if let NodeKind::Internal { alpha, edges } = &mut node.kind {
                *alpha = alphas[i];
                for (e, r) in edges.iter_mut().zip(&rewards[i]) {
                    e.reward = *r;
                }
            }
        }
        validate_tree(Self::from_nodes(self.horizon, nodes))
    }
}

fn flatten(spec: &NodeSpec, parent: Option<NodeId>, depth: usize, out: &mut Vec<Node>) -> NodeId {
    let id = NodeId(out.len());
    match spec {
        NodeSpec::Leaf { value } => out.push(Node {
            kind: NodeKind::Leaf { value: *value },
            parent,
            depth,
        }),
        NodeSpec::Internal { alpha, edges } => {
            out.push(Node {
                kind: NodeKind::Internal {
                    alpha: *alpha,
                    edges: Vec::with_capacity(edges.len()),
                },
                parent,
                depth,
            });
            let mut built = Vec::with_capacity(edges.len());
            for e in edges {
                let child = flatten(&e.child, Some(id), depth + 1, out);
                built.push(Edge {
                    label: e.label.clone(),
                    prior: e.prior,
                    reward: e.reward,
                    child,
                });
            }
            if let NodeKind::Internal { edges, .. } = &mut out[id.0].kind {
                *edges = built;
            }
        }
    }
    id
}

/// Checks every structural and numeric invariant and returns the tree.
pub fn validate_tree(t: DecisionTree) -> Result<DecisionTree> {
    if t.horizon == 0 {
        return Err(Error::Tree {
            path: "ε".into(),
            reason: "horizon must be positive".into(),
        });
    }
    for id in t.ids() {
        let err = |reason: String| Error::Tree {
            path: t.path_string(id),
            reason,
        };
        let node = t.node(id);
        match &node.kind {
            NodeKind::Leaf { value } => {
                if !value.is_finite() {
                    return Err(err(format!("terminal value {value} is not finite")));
                }
                if node.depth > t.horizon {
                    return Err(err(format!("leaf at depth {} exceeds horizon {}", node.depth, t.horizon)));
                }
            }
            NodeKind::Internal { alpha, edges } => {
                if *alpha == 0.0 {
                    return Err(err("inverse temperature is zero".into()));
                }
                if !alpha.is_finite() {
                    return Err(err(format!("inverse temperature {alpha} is not finite")));
                }
                if edges.is_empty() {
                    return Err(err("internal node has no edges".into()));
                }
                if node.depth >= t.horizon {
                    return Err(err(format!("internal node at depth {} reaches the horizon {}", node.depth, t.horizon)));
                }
                let mut seen = HashSet::new();
                for e in edges {
                    if !seen.insert(e.label.as_str()) {
                        return Err(err(format!("duplicate edge label `{}`", e.label)));
                    }
                    if !e.prior.is_finite() || e.prior < 0.0 {
                        return Err(err(format!("edge `{}` has invalid prior {}", e.label, e.prior)));
                    }
                    if !e.reward.is_finite() {
                        return Err(err(format!("edge `{}` has non-finite reward", e.label)));
                    }
                }
                let total = neumaier_sum(edges.iter().map(|e| e.prior));
                if (total - 1.0).abs() > MASS_TOLERANCE {
                    return Err(err(format!("edge priors sum to {total}, expected 1")));
                }
            }
        }
    }
    Ok(t)
}
