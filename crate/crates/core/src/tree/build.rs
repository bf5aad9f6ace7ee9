//! Constructors for classical decision rules, the two-urn betting tree and
//! two-step agent/environment trees.

use crate::error::{Error, Result};

use super::{backward_induction, DecisionTree, EdgeSpec, NodeId, NodeSpec};

/// Inverse temperature used for chance nodes. Zero is not allowed, and a
/// tiny positive value puts the certainty-equivalent within about
/// `CHANCE_ALPHA · Var[U] / 2` of the plain expectation.
pub const CHANCE_ALPHA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Max,
    Min,
    Chance,
}

/// A classical game tree: leaves with values, and role-tagged nodes whose
/// children carry a prior weight (used by chance nodes and as the
/// bounded-rational prior everywhere).
#[derive(Debug, Clone, PartialEq)]
pub enum Skeleton {
    Leaf(f64),
    Node { role: Role, children: Vec<(f64, Skeleton)> },
}

impl Skeleton {
    fn uniform(role: Role, children: Vec<Skeleton>) -> Self {
        let w = 1.0 / children.len() as f64;
        Skeleton::Node {
            role,
            children: children.into_iter().map(|c| (w, c)).collect(),
        }
    }

    pub fn max(children: Vec<Skeleton>) -> Self {
        Self::uniform(Role::Max, children)
    }

    pub fn min(children: Vec<Skeleton>) -> Self {
        Self::uniform(Role::Min, children)
    }

    pub fn chance(children: Vec<(f64, Skeleton)>) -> Self {
        Skeleton::Node {
            role: Role::Chance,
            children,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Skeleton::Leaf(_) => 0,
            Skeleton::Node { children, .. } => 1 + children.iter().map(|(_, c)| c.depth()).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalRule {
    Expectimax,
    Minimax,
    Expectiminimax,
}

impl ClassicalRule {
    fn allows(self, role: Role) -> bool {
        match self {
            ClassicalRule::Expectimax => role != Role::Min,
            ClassicalRule::Minimax => role != Role::Chance,
            ClassicalRule::Expectiminimax => true,
        }
    }
}

/// The exact classical value: max, min or prior-weighted mean at each node.
pub fn classical_value(skeleton: &Skeleton) -> f64 {
    match skeleton {
        Skeleton::Leaf(v) => *v,
        Skeleton::Node { role, children } => {
            let values = children.iter().map(|(w, c)| (*w, classical_value(c)));
            match role {
                Role::Max => values.map(|(_, v)| v).fold(f64::NEG_INFINITY, f64::max),
                Role::Min => values.map(|(_, v)| v).fold(f64::INFINITY, f64::min),
                Role::Chance => values.map(|(w, v)| w * v).sum(),
            }
        }
    }
}

/// Bounded-rational stand-in for a classical tree: max nodes get
/// `α = magnitude`, min nodes `α = −magnitude`, chance nodes
/// [`CHANCE_ALPHA`]. Leaf values become terminal values and rewards are 0.
pub fn classical_tree(kind: ClassicalRule, skeleton: &Skeleton, magnitude: f64) -> Result<DecisionTree> {
    if !(magnitude > 0.0 && magnitude.is_finite()) {
        return Err(Error::InvalidArgument(format!("magnitude must be positive, got {magnitude}")));
    }
    let spec = to_spec(kind, skeleton, magnitude, "ε")?;
    DecisionTree::new(skeleton.depth().max(1), spec)
}

fn to_spec(kind: ClassicalRule, skeleton: &Skeleton, magnitude: f64, path: &str) -> Result<NodeSpec> {
    match skeleton {
        Skeleton::Leaf(v) => Ok(NodeSpec::leaf(*v)),
        Skeleton::Node { role, children } => {
            if !kind.allows(*role) {
                return Err(Error::Tree {
                    path: path.to_string(),
                    reason: format!("{role:?} node is not part of {kind:?}"),
                });
            }
            let alpha = match role {
                Role::Max => magnitude,
                Role::Min => -magnitude,
                Role::Chance => CHANCE_ALPHA,
            };
            let mut edges = Vec::with_capacity(children.len());
            for (i, (w, c)) in children.iter().enumerate() {
                let label = (i + 1).to_string();
                let child_path = if path == "ε" { label.clone() } else { format!("{path}/{label}") };
                edges.push(EdgeSpec::new(label, *w, 0.0, to_spec(kind, c, magnitude, &child_path)?));
            }
            Ok(NodeSpec::internal(alpha, edges))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllsbergColor {
    Black,
    White,
}

/// Two-urn betting tree. The root picks the number of black balls `θ ∈
/// {0..100}` in the right urn under a uniform prior at `theta_alpha`; the
/// agent then bets on `left` or `right` at `bet_alpha`; finally a ball is
/// drawn at `draw_alpha` from the chosen urn (left is 50/50, right is
/// `θ/100` black). Drawing the winning color pays 1.
pub fn build_ellsberg_tree(
    theta_alpha: f64,
    bet_alpha: f64,
    draw_alpha: f64,
    winning: EllsbergColor,
) -> Result<DecisionTree> {
    if theta_alpha.is_nan() || theta_alpha >= 0.0 {
        return Err(Error::InvalidArgument(format!("theta temperature must be negative, got {theta_alpha}")));
    }
    if bet_alpha.is_nan() || bet_alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("bet temperature must be positive, got {bet_alpha}")));
    }
    if draw_alpha.is_nan() || draw_alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("draw temperature must be positive, got {draw_alpha}")));
    }
    let (r_black, r_white) = match winning {
        EllsbergColor::Black => (1.0, 0.0),
        EllsbergColor::White => (0.0, 1.0),
    };
    let draw = |black: f64| {
        NodeSpec::internal(draw_alpha, vec![
            EdgeSpec::new("black", black, r_black, NodeSpec::leaf(0.0)),
            EdgeSpec::new("white", 1.0 - black, r_white, NodeSpec::leaf(0.0)),
        ])
    };
    let thetas = (0..=100)
        .map(|theta| {
            let bet = NodeSpec::internal(bet_alpha, vec![
                EdgeSpec::new("left", 0.5, 0.0, draw(0.5)),
                EdgeSpec::new("right", 0.5, 0.0, draw(theta as f64 / 100.0)),
            ]);
            EdgeSpec::new(theta.to_string(), 1.0 / 101.0, 0.0, bet)
        })
        .collect();
    DecisionTree::new(3, NodeSpec::internal(theta_alpha, thetas))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllsbergSummary {
    /// Marginal probability of betting on the left urn.
    pub p_left: f64,
    pub p_right: f64,
    /// Mean of `θ` under the optimal root row minus its prior mean of 50.
    pub theta_tilt: f64,
    pub root_value: f64,
}

/// Solves a tree from [`build_ellsberg_tree`] and reads off the bet.
pub fn summarize_ellsberg(t: &DecisionTree) -> Result<EllsbergSummary> {
    let root = t.root();
    if t.edges(root).len() != 101 {
        return Err(Error::InvalidArgument("not a two-urn betting tree".into()));
    }
    let solution = backward_induction(t);
    let theta_row = solution.policy.row(root).expect("root is internal");
    let mut p_left = 0.0;
    let mut mean = 0.0;
    for (theta, (edge, p_theta)) in t.edges(root).iter().zip(theta_row).enumerate() {
        let bet_row = solution.policy.row(edge.child).ok_or_else(|| Error::Tree {
            path: t.path_string(edge.child),
            reason: "expected a bet node".into(),
        })?;
        p_left += p_theta * bet_row[0];
        mean += p_theta * theta as f64;
    }
    Ok(EllsbergSummary {
        p_left,
        p_right: 1.0 - p_left,
        theta_tilt: mean - 50.0,
        root_value: solution.value(NodeId::ROOT),
    })
}

/// Agent node at `agent_alpha` choosing among `outcomes.len()` actions
/// `a1, a2, ...`, each followed by an environment node at `env_alpha` over
/// outcomes `o1, o2, ...` whose leaves hold the given values. Priors are
/// uniform.
pub fn two_step_tree(agent_alpha: f64, env_alpha: f64, outcomes: &[Vec<f64>]) -> Result<DecisionTree> {
    if outcomes.is_empty() || outcomes.iter().any(|o| o.is_empty()) {
        return Err(Error::Empty("two-step tree".into()));
    }
    let n = outcomes.len() as f64;
    let actions = outcomes
        .iter()
        .enumerate()
        .map(|(i, leaves)| {
            let m = leaves.len() as f64;
            let env = NodeSpec::internal(
                env_alpha,
                leaves
                    .iter()
                    .enumerate()
                    .map(|(j, v)| EdgeSpec::new(format!("o{}", j + 1), 1.0 / m, 0.0, NodeSpec::leaf(*v)))
                    .collect(),
            );
            EdgeSpec::new(format!("a{}", i + 1), 1.0 / n, 0.0, env)
        })
        .collect();
    DecisionTree::new(2, NodeSpec::internal(agent_alpha, actions))
}
