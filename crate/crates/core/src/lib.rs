//! Information-theoretic bounded rationality: free-energy decision problems
//! and their Gibbs solutions, equivalence transformations, rejection-sampling
//! choice (including fractional Bernoulli powers), and bounded-rational
//! decision trees with an exact solver and a recursive sampling planner.
//!
//! ```
//! use brplan_core::{certainty_equivalent, gibbs_posterior, SingleStepProblem};
//!
//! let p = SingleStepProblem::uniform(1.0, vec![0.0, 1.0], None).unwrap();
//! let posterior = gibbs_posterior(&p).unwrap();
//! assert!((posterior.probs()[1] - 0.73106).abs() < 1e-5);
//! assert!((certainty_equivalent(&p).unwrap() - 0.62011).abs() < 1e-5);
//! ```

pub mod complexity;
pub mod distribution;
pub mod equivalence;
pub mod error;
pub mod generate;
pub mod math;
pub mod planner;
pub mod problem;
pub mod rng;
pub mod sampling;
pub mod tree;

pub use complexity::{decision_complexity, FiniteMeasureSpace, PointSet};
pub use distribution::{utility_pushforward, Distribution, ValueDistribution, MASS_TOLERANCE};
pub use equivalence::{equivalent_problem, equivalent_target, equivalent_tree, exponent_spec, ExponentSpec};
pub use error::{Error, Result};
pub use planner::{
    global_target_bound, has_mixed_signs, homogeneous_problem, race_until_accept, sample_path,
    sample_path_observed, sample_path_until_accept, EdgeDraw, LeafTest, Observer, PlannerOptions,
    RaceOutcome, TreeModel, TreePathProposal, Visit,
};
pub use problem::{
    certainty_equivalent, free_energy, gibbs_posterior, limit_posterior, log_partition_function,
    partition_function, refine_problem, validate_problem, LimitRegime, Refinement, SingleStepProblem,
};
pub use rng::{Categorical, RngStream};
pub use sampling::{
    accept_trial, bernoulli_power_coefficients, inverse_acceptance_probability, power_trial_fractional,
    power_trial_general, power_trial_integer, power_trial_inverse, required_samples, sample_choice,
    success_probability, BernoulliTrial, CoefficientSeries, CoinTrial, InverseRejectionTrial, Proposal,
    RejectionSampler, TrialReport,
};
pub use tree::{
    backward_induction, build_ellsberg_tree, classical_tree, classical_value, path_distribution, path_masses,
    summarize_ellsberg, tree_free_energy, two_step_tree, validate_tree, ClassicalRule, DecisionTree, Edge,
    EdgeSpec, EllsbergColor, EllsbergSummary, Node, NodeId, NodeKind, NodeSpec, Role, Skeleton, TreePolicy,
    TreeSolution, CHANCE_ALPHA,
};
