//! Seeded random instances for tests, benchmarks and the CLI's self-checks.

use crate::distribution::Distribution;
use crate::math::neumaier_sum;
use crate::problem::SingleStepProblem;
use crate::rng::RngStream;
use crate::tree::{ClassicalRule, DecisionTree, EdgeSpec, NodeSpec, Skeleton};

fn uniform_in(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

/// Integer uniform on `lo..=hi`.
pub fn int_in(rng: &mut RngStream, lo: usize, hi: usize) -> usize {
    lo + ((rng.uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo)
}

/// Nonzero inverse temperature uniform on `[lo, hi]`, redrawn while its
/// magnitude is below `1e-3`.
pub fn alpha_in(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    loop {
        let a = uniform_in(rng, lo, hi);
        if a.abs() >= 1e-3 {
            return a;
        }
    }
}

/// Random point of the simplex. With `zero_rate > 0` some entries are set to
/// exactly zero (at least one entry stays positive).
pub fn simplex(rng: &mut RngStream, n: usize, zero_rate: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.uniform() < zero_rate { 0.0 } else { -rng.uniform().ln() })
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        let i = int_in(rng, 0, n - 1);
        w[i] = 1.0;
    }
    let total = neumaier_sum(w.iter().copied());
    w.iter_mut().for_each(|x| *x /= total);
    w
}

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// Problem with `n` outcomes, a random prior (some zero masses when
/// `zero_rate > 0`), utilities uniform on `[0, 1]` and `α` uniform on
/// `alpha_range`.
pub fn problem(rng: &mut RngStream, n: usize, alpha_range: (f64, f64), zero_rate: f64) -> SingleStepProblem {
    let alpha = alpha_in(rng, alpha_range.0, alpha_range.1);
    let prior = Distribution::new(labels(n), simplex(rng, n, zero_rate)).expect("normalized prior");
    let utility = (0..n).map(|_| rng.uniform()).collect();
    SingleStepProblem::new(alpha, prior, utility, None).expect("valid problem")
}

/// Random policy supported inside the prior's support.
pub fn policy(rng: &mut RngStream, prior: &Distribution, zero_rate: f64) -> Distribution {
    let mut w: Vec<f64> = prior
        .probs()
        .iter()
        .map(|q| {
            if *q == 0.0 || rng.uniform() < zero_rate {
                0.0
            } else {
                -rng.uniform().ln()
            }
        })
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        let i = prior.probs().iter().position(|q| *q > 0.0).expect("prior has support");
        w[i] = 1.0;
    }
    let total = neumaier_sum(w.iter().copied());
    w.iter_mut().for_each(|x| *x /= total);
    prior.reweighted(w).expect("normalized policy")
}

/// How temperatures are assigned to the internal nodes of a random tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperatures {
    /// Independent draws from `[lo, hi]` (zero excluded).
    Uniform(f64, f64),
    /// The same value at every node.
    Homogeneous(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeShape {
    pub max_depth: usize,
    pub max_branching: usize,
    pub temperatures: Temperatures,
    /// Rewards and terminal values are multiples of `1/grid` in `[0, 1]`;
    /// `grid = 0` draws continuous values.
    pub grid: u32,
    /// Probability that a node above the deepest level becomes a leaf.
    pub early_leaf_rate: f64,
}

fn value(rng: &mut RngStream, grid: u32) -> f64 {
    if grid == 0 {
        rng.uniform()
    } else {
        int_in(rng, 0, grid as usize) as f64 / grid as f64
    }
}

/// Random tree whose root is internal and whose horizon is `max_depth`.
pub fn tree(rng: &mut RngStream, shape: &TreeShape) -> DecisionTree {
    let root = node(rng, shape, 0);
    DecisionTree::new(shape.max_depth, root).expect("valid random tree")
}

fn node(rng: &mut RngStream, shape: &TreeShape, depth: usize) -> NodeSpec {
    let leaf_here = depth == shape.max_depth || (depth > 0 && rng.uniform() < shape.early_leaf_rate);
    if leaf_here {
        return NodeSpec::leaf(value(rng, shape.grid));
    }
    let alpha = match shape.temperatures {
        Temperatures::Uniform(lo, hi) => alpha_in(rng, lo, hi),
        Temperatures::Homogeneous(a) => a,
    };
    let k = int_in(rng, 1, shape.max_branching);
    let priors = simplex(rng, k, 0.0);
    let edges = priors
        .into_iter()
        .enumerate()
        .map(|(i, q)| {
            let reward = value(rng, shape.grid);
            EdgeSpec::new((i + 1).to_string(), q, reward, node(rng, shape, depth + 1))
        })
        .collect();
    NodeSpec::internal(alpha, edges)
}

/// Random classical game tree for `rule` whose leaves lie on a `0.1` grid.
///
/// Max and min nodes are binary and each root-to-leaf path crosses at most
/// one of each, so the bounded-rational value at magnitude `m` stays within
/// `ln 2 / m` of the classical one. Chance nodes have two or three children.
pub fn skeleton(rng: &mut RngStream, rule: ClassicalRule, depth: usize) -> Skeleton {
    skeleton_at(rng, rule, depth, false, false)
}

fn skeleton_at(rng: &mut RngStream, rule: ClassicalRule, depth: usize, used_max: bool, used_min: bool) -> Skeleton {
    if depth == 0 {
        return Skeleton::Leaf(int_in(rng, 0, 10) as f64 / 10.0);
    }
    let mut options = Vec::new();
    if !used_max {
        options.push(0);
    }
    if !used_min && rule != ClassicalRule::Expectimax {
        options.push(1);
    }
    if rule != ClassicalRule::Minimax {
        options.push(2);
    }
    if options.is_empty() {
        return Skeleton::Leaf(int_in(rng, 0, 10) as f64 / 10.0);
    }
    match options[int_in(rng, 0, options.len() - 1)] {
        0 => Skeleton::max((0..2).map(|_| skeleton_at(rng, rule, depth - 1, true, used_min)).collect()),
        1 => Skeleton::min((0..2).map(|_| skeleton_at(rng, rule, depth - 1, used_max, true)).collect()),
        _ => {
            let k = int_in(rng, 2, 3);
            let w = simplex(rng, k, 0.0);
            Skeleton::chance(
                w.into_iter()
                    .map(|q| (q, skeleton_at(rng, rule, depth - 1, used_max, used_min)))
                    .collect(),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Role;

    #[test]
    fn trees_respect_shape() {
        let shape = TreeShape {
            max_depth: 3,
            max_branching: 3,
            temperatures: Temperatures::Uniform(0.5, 2.0),
            grid: 8,
            early_leaf_rate: 0.2,
        };
        let mut rng = RngStream::new(1, 0);
        for _ in 0..50 {
            let t = tree(&mut rng, &shape);
            for id in t.internal_nodes() {
                assert!(t.edges(id).len() <= 3);
                assert!(t.alpha(id).unwrap() >= 0.5);
            }
            for l in t.leaves() {
                assert!(t.node(l).depth <= 3);
                assert_eq!((t.leaf_value(l).unwrap() * 8.0).fract(), 0.0);
            }
        }
    }

    fn roles(s: &Skeleton, out: &mut Vec<Role>) {
        if let Skeleton::Node { role, children } = s {
            out.push(*role);
            for (_, c) in children {
                roles(c, out);
            }
        }
    }

    #[test]
    fn skeletons_follow_the_rule() {
        let mut rng = RngStream::new(2, 0);
        for rule in [ClassicalRule::Expectimax, ClassicalRule::Minimax, ClassicalRule::Expectiminimax] {
            for _ in 0..50 {
                let mut r = Vec::new();
                roles(&skeleton(&mut rng, rule, 3), &mut r);
                match rule {
                    ClassicalRule::Expectimax => assert!(!r.contains(&Role::Min)),
                    ClassicalRule::Minimax => assert!(!r.contains(&Role::Chance)),
                    ClassicalRule::Expectiminimax => {}
                }
            }
        }
    }
}
