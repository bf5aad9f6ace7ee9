//! Recursive rejection sampling of whole paths through a bounded-rational
//! decision tree, without computing any free energy.
//!
//! At node `s` the sampler proposes `x ~ Q(·|s)`. If `sx` is a leaf it runs
//! one accept/reject test against `exp{α(s)[R(x|s) + F(sx) − U*]}`.
//! Otherwise it needs `ξ = |α(s)/α(sx)|` successes from the subtree at `sx`
//! with target `U* − R(x|s)`: `⌊ξ⌋` whole successes, then a fractional stage
//! driven by the coefficient series of `ξ − ⌊ξ⌋`. (Writing the remainder as
//! `⌊ξ⌋ − ξ` negates every coefficient and leaves the running sum
//! nonpositive, so the positive remainder is used.) The sign flag `σ` flips
//! whenever `α(s)/α(sx) < 0`; the leaf test then uses reciprocal
//! probabilities.
//!
//! With every `α(s)` of one sign the accepted paths follow the
//! backward-induction path distribution. Trees with mixed signs are only
//! sampled when [`PlannerOptions::allow_mixed_signs`] is set, and nothing is
//! claimed about their output distribution.
//!
//! A subtree that can never meet its converted target is simply rejected
//! until the caller's attempt budget runs out.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampling::{CoefficientSeries, Proposal, TrialReport};
use crate::tree::{DecisionTree, NodeId};

/// One proposed transition.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDraw<N> {
    pub index: usize,
    pub reward: f64,
    pub child: N,
}

/// Sampler-only access to a tree: enough to run the planner on trees too
/// large to enumerate.
pub trait TreeModel {
    type Node: Clone + PartialEq;

    fn root(&self) -> Self::Node;
    /// Inverse temperature of an internal node.
    fn alpha(&self, node: &Self::Node) -> f64;
    fn is_leaf(&self, node: &Self::Node) -> bool;
    fn leaf_value(&self, node: &Self::Node) -> f64;
    /// Draws an outgoing edge from `Q(·|node)`.
    fn sample_edge(&self, node: &Self::Node, rng: &mut RngStream) -> EdgeDraw<Self::Node>;
    /// Deepest level a leaf may sit at.
    fn horizon(&self) -> usize;

    /// The tightest valid global target, when the model can compute it.
    fn target_bound(&self) -> Option<f64> {
        None
    }
}

impl TreeModel for DecisionTree {
    type Node = NodeId;

    fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    fn alpha(&self, node: &NodeId) -> f64 {
        DecisionTree::alpha(self, *node).expect("alpha of a leaf")
    }

    fn is_leaf(&self, node: &NodeId) -> bool {
        DecisionTree::is_leaf(self, *node)
    }

    fn leaf_value(&self, node: &NodeId) -> f64 {
        DecisionTree::leaf_value(self, *node).expect("value of an internal node")
    }

    fn sample_edge(&self, node: &NodeId, rng: &mut RngStream) -> EdgeDraw<NodeId> {
        let index = self.edge_sampler(*node).sample(rng);
        let edge = &self.edges(*node)[index];
        EdgeDraw {
            index,
            reward: edge.reward,
            child: edge.child,
        }
    }

    fn horizon(&self) -> usize {
        DecisionTree::horizon(self)
    }

    fn target_bound(&self) -> Option<f64> {
        Some(global_target_bound(self))
    }
}

/// Largest total path value (rewards plus terminal value) when the root's
/// inverse temperature is positive, smallest when it is negative.
pub fn global_target_bound(t: &DecisionTree) -> f64 {
    let values = t.leaves().map(|l| t.path_value(l));
    if DecisionTree::alpha(t, t.root()).unwrap_or(1.0) > 0.0 {
        values.fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.fold(f64::INFINITY, f64::min)
    }
}

/// True when internal nodes disagree on the sign of their temperature.
pub fn has_mixed_signs(t: &DecisionTree) -> bool {
    let mut signs = t.internal_nodes().map(|id| DecisionTree::alpha(t, id).unwrap() > 0.0);
    match signs.next() {
        Some(first) => signs.any(|s| s != first),
        None => false,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlannerOptions {
    /// Permit sign flips of `α` along a path. Experimental.
    pub allow_mixed_signs: bool,
}

/// A node entered by the sampler, reported to trace observers.
#[derive(Debug, Clone, PartialEq)]
pub struct Visit<N> {
    pub node: N,
    pub depth: usize,
    /// Target handed to this node.
    pub target: f64,
    pub sigma: i8,
    /// Product of the exponents `ξ` along the edges taken to get here.
    pub exponent: f64,
}

/// One leaf acceptance test, reported to trace observers.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafTest<N> {
    pub parent: N,
    pub leaf: N,
    pub target: f64,
    /// `exponent` of the parent's visit; the leaf test itself uses `α(parent)`.
    pub exponent: f64,
    pub accepted: bool,
}

/// Receives every node visit and leaf test, in order.
pub trait Observer<N> {
    fn visit(&mut self, _visit: &Visit<N>) {}
    fn leaf_test(&mut self, _test: &LeafTest<N>) {}
}

struct Silent;

impl<N> Observer<N> for Silent {}

struct Recursion<'a, M: TreeModel, O> {
    model: &'a M,
    options: PlannerOptions,
    observer: O,
}

impl<M: TreeModel, O: Observer<M::Node>> Recursion<'_, M, O> {
    fn sample(
        &mut self,
        node: M::Node,
        u_star: f64,
        sigma: i8,
        depth: usize,
        exponent: f64,
        rng: &mut RngStream,
    ) -> Result<TrialReport<M::Node>> {
        self.observer.visit(&Visit {
            node: node.clone(),
            depth,
            target: u_star,
            sigma,
            exponent,
        });
        if depth >= self.model.horizon() {
            return Err(Error::InvalidArgument(format!(
                "internal node at depth {depth} reaches the horizon {}",
                self.model.horizon()
            )));
        }
        let alpha = self.model.alpha(&node);
        let draw = self.model.sample_edge(&node, rng);
        let mut report = TrialReport::empty();
        report.proposals_drawn = 1;

        if self.model.is_leaf(&draw.child) {
            let u = rng.uniform();
            let log_p = alpha * (draw.reward + self.model.leaf_value(&draw.child) - u_star);
            let accepted = if sigma > 0 { u.ln() <= log_p } else { -u.ln() >= log_p };
            self.observer.leaf_test(&LeafTest {
                parent: node,
                leaf: draw.child.clone(),
                target: u_star,
                exponent,
                accepted,
            });
            report.base_trials = 1;
            report.accepted = accepted;
            report.payload = accepted.then_some(draw.child);
            return Ok(report);
        }

        let ratio = alpha / self.model.alpha(&draw.child);
        let sigma = if ratio < 0.0 {
            if !self.options.allow_mixed_signs {
                return Err(Error::InvalidArgument(
                    "inverse temperature changes sign along a path; mixed-sign sampling is experimental and must be enabled explicitly".into(),
                ));
            }
            -sigma
        } else {
            sigma
        };
        let xi = ratio.abs();
        let whole = xi.floor();
        let fraction = xi - whole;
        let target = u_star - draw.reward;

        for _ in 0..whole as u64 {
            let sub = self.sample(draw.child.clone(), target, sigma, depth + 1, exponent * xi, rng)?;
            absorb_call(&mut report, sub);
            if !report.accepted {
                return Ok(report.fail());
            }
        }
        if fraction == 0.0 {
            return Ok(report);
        }

        let threshold = rng.uniform();
        let mut series = CoefficientSeries::new(fraction);
        let sub = self.sample(draw.child.clone(), target, sigma, depth + 1, exponent * xi, rng)?;
        absorb_call(&mut report, sub);
        while !report.accepted {
            let (_, f) = series.next().expect("series is infinite");
            let sub = self.sample(draw.child.clone(), target, sigma, depth + 1, exponent * xi, rng)?;
            absorb_call(&mut report, sub);
            if threshold <= f {
                return Ok(report.fail());
            }
        }
        Ok(report)
    }
}

fn absorb_call<N>(report: &mut TrialReport<N>, sub: TrialReport<N>) {
    report.elapsed_trial_depth += 1;
    report.absorb(sub);
}

fn check_target<M: TreeModel>(model: &M, u_star: f64) -> Result<()> {
    if !u_star.is_finite() {
        return Err(Error::NonFinite("target".into()));
    }
    if let Some(bound) = model.target_bound() {
        let root = model.root();
        if model.is_leaf(&root) {
            return Ok(());
        }
        if model.alpha(&root) > 0.0 && u_star < bound {
            return Err(Error::TargetBound {
                target: u_star,
                detail: format!("must be at least the largest path value {bound}"),
            });
        }
        if model.alpha(&root) < 0.0 && u_star > bound {
            return Err(Error::TargetBound {
                target: u_star,
                detail: format!("must be at most the smallest path value {bound}"),
            });
        }
    }
    Ok(())
}

/// One attempt of the recursive sampler from `node`. The payload is the
/// accepted leaf. Plan from the root with `sigma = 1`.
pub fn sample_path<M: TreeModel>(
    model: &M,
    node: M::Node,
    u_star: f64,
    sigma: i8,
    rng: &mut RngStream,
    options: PlannerOptions,
) -> Result<TrialReport<M::Node>> {
    sample_path_observed(model, node, u_star, sigma, rng, options, Silent)
}

/// [`sample_path`] reporting every visit and leaf test to `observer`.
pub fn sample_path_observed<M: TreeModel, O: Observer<M::Node>>(
    model: &M,
    node: M::Node,
    u_star: f64,
    sigma: i8,
    rng: &mut RngStream,
    options: PlannerOptions,
    observer: O,
) -> Result<TrialReport<M::Node>> {
    // The bound covers whole paths; subtree calls with a converted target
    // are the caller's responsibility.
    if node == model.root() {
        check_target(model, u_star)?;
    }
    let mut recursion = Recursion {
        model,
        options,
        observer,
    };
    let mut report = recursion.sample(node, u_star, sigma, 0, 1.0, rng)?;
    report.attempts = 1;
    Ok(report)
}

/// Repeats root attempts until one is accepted or `max_attempts` are spent,
/// summing the counters of every attempt.
pub fn sample_path_until_accept<M: TreeModel>(
    model: &M,
    u_star: f64,
    rng: &mut RngStream,
    max_attempts: u64,
    options: PlannerOptions,
) -> Result<TrialReport<M::Node>> {
    if max_attempts == 0 {
        return Err(Error::InvalidArgument("max_attempts must be at least 1".into()));
    }
    check_target(model, u_star)?;
    let mut total = TrialReport::empty();
    while total.attempts < max_attempts {
        let mut recursion = Recursion {
            model,
            options,
            observer: Silent,
        };
        let report = recursion.sample(model.root(), u_star, 1, 0, 1.0, rng)?;
        total.attempts += 1;
        total.absorb(report);
        if total.accepted {
            break;
        }
    }
    Ok(total)
}

/// Result of racing several workers for the first accepted path.
#[derive(Debug, Clone, PartialEq)]
pub struct RaceOutcome<N> {
    /// The winning worker's counters, or the merged counters of all workers
    /// when none succeeded.
    pub report: TrialReport<N>,
    pub winner: Option<usize>,
}

/// Runs `workers` independent samplers on streams `first_stream..` of
/// `seed`, each retrying up to `max_attempts` times, and returns the first
/// accepted path. Losing workers stop at their next attempt boundary.
pub fn race_until_accept<M>(
    model: &M,
    u_star: f64,
    seed: u64,
    first_stream: u64,
    workers: usize,
    max_attempts: u64,
    options: PlannerOptions,
) -> Result<RaceOutcome<M::Node>>
where
    M: TreeModel + Sync,
    M::Node: Send,
{
    if workers == 0 || max_attempts == 0 {
        return Err(Error::InvalidArgument("need at least one worker and one attempt".into()));
    }
    check_target(model, u_star)?;
    let done = AtomicBool::new(false);
    let winner: Mutex<Option<(usize, TrialReport<M::Node>)>> = Mutex::new(None);
    let losers: Result<Vec<TrialReport<M::Node>>> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = RngStream::new(seed, first_stream + w as u64);
            let mut total = TrialReport::empty();
            while total.attempts < max_attempts && !done.load(Ordering::Acquire) {
                let mut recursion = Recursion {
                    model,
                    options,
                    observer: Silent,
                };
                let report = recursion.sample(model.root(), u_star, 1, 0, 1.0, &mut rng)?;
                total.attempts += 1;
                total.absorb(report);
                if total.accepted {
                    if !done.swap(true, Ordering::AcqRel) {
                        *winner.lock().expect("poisoned") = Some((w, total));
                    }
                    return Ok(TrialReport::empty());
                }
            }
            Ok(total)
        })
        .collect();
    let losers = losers?;
    match winner.into_inner().expect("poisoned") {
        Some((w, report)) => Ok(RaceOutcome {
            report,
            winner: Some(w),
        }),
        None => {
            let mut merged = TrialReport::empty();
            for r in losers {
                merged.attempts += r.attempts;
                merged.absorb(r);
            }
            merged.accepted = false;
            merged.payload = None;
            Ok(RaceOutcome {
                report: merged,
                winner: None,
            })
        }
    }
}

/// Proposes a leaf of a tree by ancestral sampling from the edge priors,
/// consuming exactly the uniforms the recursive sampler uses for its
/// proposals.
#[derive(Debug, Clone)]
pub struct TreePathProposal<'a> {
    tree: &'a DecisionTree,
    leaf_index: Vec<usize>,
}

impl<'a> TreePathProposal<'a> {
    pub fn new(tree: &'a DecisionTree) -> Self {
        let mut leaf_index = vec![usize::MAX; tree.len()];
        for (i, leaf) in tree.leaves().enumerate() {
            leaf_index[leaf.0] = i;
        }
        Self { tree, leaf_index }
    }
}

impl Proposal for TreePathProposal<'_> {
    fn propose(&self, rng: &mut RngStream) -> usize {
        let mut node = self.tree.root();
        while !self.tree.is_leaf(node) {
            node = self.tree.sample_edge(&node, rng).child;
        }
        self.leaf_index[node.0]
    }
}

/// The single-step problem over whole paths of a tree whose internal nodes
/// all share one temperature: outcomes are leaves in pre-order, the prior
/// is the product of edge priors and the utility is the total path value.
pub fn homogeneous_problem(t: &DecisionTree) -> Result<crate::problem::SingleStepProblem> {
    let alpha = DecisionTree::alpha(t, t.root())
        .ok_or_else(|| Error::InvalidArgument("tree has no internal node".into()))?;
    if t.internal_nodes().any(|id| DecisionTree::alpha(t, id) != Some(alpha)) {
        return Err(Error::InvalidArgument("tree temperatures are not homogeneous".into()));
    }
    let prior = crate::tree::path_distribution(t, &crate::tree::TreePolicy::prior(t));
    let utility = t.leaves().map(|l| t.path_value(l)).collect();
    let prior = Distribution::new(prior.labels().to_vec(), prior.probs().to_vec())?;
    crate::problem::SingleStepProblem::new(alpha, prior, utility, None)
}
