//! Equivalence transformations. Two problems with inverse temperatures `α`
//! and `β` share their Gibbs posterior and certainty-equivalent when
//!
//! ```text
//! V(x) = (α/β) U(x) + (1/α − 1/β) log Z_α
//! ```
//!
//! The same map converts rejection-sampling targets, and the ratio `ξ = α/β`
//! is the exponent relating their per-trial success probabilities.

use crate::error::{Error, Result};
use crate::problem::{log_partition_function, SingleStepProblem};
use crate::tree::{backward_induction, DecisionTree, NodeId};

/// `ξ = α/β` split into sign, `⌊|ξ|⌋` and the remainder in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSpec {
    pub xi: f64,
    pub sign: i8,
    pub integer_part: u64,
    pub fractional_part: f64,
}

impl ExponentSpec {
    pub fn from_ratio(xi: f64) -> Result<Self> {
        if xi == 0.0 || !xi.is_finite() {
            return Err(Error::InvalidArgument(format!("exponent must be finite and nonzero, got {xi}")));
        }
        let magnitude = xi.abs();
        let whole = magnitude.floor();
        Ok(Self {
            xi,
            sign: if xi > 0.0 { 1 } else { -1 },
            integer_part: whole as u64,
            fractional_part: magnitude - whole,
        })
    }

    pub fn magnitude(&self) -> f64 {
        self.xi.abs()
    }
}

fn nonzero(value: f64, name: &str) -> Result<()> {
    if value == 0.0 {
        return Err(Error::ZeroTemperature(name.into()));
    }
    if !value.is_finite() {
        return Err(Error::NonFinite(name.into()));
    }
    Ok(())
}

pub fn exponent_spec(alpha: f64, beta: f64) -> Result<ExponentSpec> {
    nonzero(alpha, "alpha")?;
    nonzero(beta, "beta")?;
    ExponentSpec::from_ratio(alpha / beta)
}

/// `V* = (α/β) U* + (1/α − 1/β) log Z_α`.
pub fn equivalent_target(u_star: f64, alpha: f64, beta: f64, log_z_alpha: f64) -> f64 {
    if alpha == beta {
        return u_star;
    }
    (alpha / beta) * u_star + (1.0 / alpha - 1.0 / beta) * log_z_alpha
}

/// The problem at inverse temperature `beta` with the same prior, posterior
/// and certainty-equivalent. A target, if present, is converted as well.
pub fn equivalent_problem(p: &SingleStepProblem, beta: f64) -> Result<SingleStepProblem> {
    nonzero(beta, "beta")?;
    let alpha = p.alpha();
    if alpha == beta {
        return Ok(p.clone());
    }
    let log_z = log_partition_function(p)?;
    let utility = p
        .utility()
        .iter()
        .map(|&u| equivalent_target(u, alpha, beta, log_z))
        .collect();
    let target = p.target().map(|t| equivalent_target(t, alpha, beta, log_z));
    SingleStepProblem::new(beta, p.prior().clone(), utility, target)
}

/// Retemperatures every internal node of `t` to `new_alpha(node)` while
/// keeping every node's optimal transition table and certainty-equivalent.
///
/// Each node's local problem `U_s(x) = R(x|s) + F(sx)` is mapped to its
/// equivalent `V_s` and the rewards become `R'(x|s) = V_s(x) − F(sx)`.
/// Terminal values are unchanged.
pub fn equivalent_tree(t: &DecisionTree, new_alpha: impl Fn(NodeId) -> f64) -> Result<DecisionTree> {
    let solution = backward_induction(t);
    let mut alphas = vec![0.0; t.len()];
    let mut rewards = vec![Vec::new(); t.len()];
    for id in t.internal_nodes() {
        let alpha = t.alpha(id).expect("internal");
        let beta = new_alpha(id);
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Tree {
                path: t.path_string(id),
                reason: format!("new inverse temperature {beta} must be finite and nonzero"),
            });
        }
        alphas[id.0] = beta;
        let edges = t.edges(id);
        rewards[id.0] = if alpha == beta {
            edges.iter().map(|e| e.reward).collect()
        } else {
            let log_z = alpha * solution.value(id);
            edges
                .iter()
                .map(|e| {
                    let f_child = solution.value(e.child);
                    equivalent_target(e.reward + f_child, alpha, beta, log_z) - f_child
                })
                .collect()
        };
    }
    t.reparameterized(&alphas, &rewards)
}
