//! Single-step bounded-rational decision problems `(α, X, Q, U)`.
//!
//! The free energy of a policy `P̃` is
//!
//! ```text
//! F[P̃] = Σ_x P̃(x) U(x) − (1/α) Σ_x P̃(x) log(P̃(x)/Q(x))
//! ```
//!
//! and its extremum is the Gibbs distribution `P(x) ∝ Q(x) exp{α U(x)}`, with
//! value `(1/α) log Z_α` (the certainty-equivalent). For `α > 0` the Gibbs
//! distribution maximizes `F`; for `α < 0` it minimizes it.
//!
//! Every exponential sum goes through a max-shifted log-sum-exp, so `|αU|`
//! far beyond 700 is fine.

use std::sync::Arc;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::math::{gibbs_weights, kl_divergence, weighted_log_sum_exp};

/// Tolerance for the coarse-utility check in [`refine_problem`].
pub const REFINEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SingleStepProblem {
    alpha: f64,
    prior: Distribution,
    utility: Vec<f64>,
    target: Option<f64>,
}

impl SingleStepProblem {
    /// Validates and builds a problem. `alpha = 0` is accepted here; the Gibbs
    /// operations reject it.
    pub fn new(
        alpha: f64,
        prior: Distribution,
        utility: Vec<f64>,
        target: Option<f64>,
    ) -> Result<Self> {
        validate_problem(Self {
            alpha,
            prior,
            utility,
            target,
        }, false)
    }

    /// Convenience constructor from `(id, q, u)` triples.
    pub fn from_outcomes<S: Into<String>>(
        alpha: f64,
        outcomes: impl IntoIterator<Item = (S, f64, f64)>,
        target: Option<f64>,
    ) -> Result<Self> {
        let mut labels = Vec::new();
        let mut probs = Vec::new();
        let mut utility = Vec::new();
        for (id, q, u) in outcomes {
            labels.push(id.into());
            probs.push(q);
            utility.push(u);
        }
        let prior = Distribution::with_labels(labels.into(), probs, "prior")?;
        Self::new(alpha, prior, utility, target)
    }

    /// Uniform prior over outcomes labeled `1..=n`.
    pub fn uniform(alpha: f64, utility: Vec<f64>, target: Option<f64>) -> Result<Self> {
        let n = utility.len();
        let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let prior = Distribution::with_labels(labels.into(), vec![1.0 / n as f64; n], "prior")?;
        Self::new(alpha, prior, utility, target)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn prior(&self) -> &Distribution {
        &self.prior
    }

    pub fn outcomes(&self) -> &[String] {
        self.prior.labels()
    }

    pub fn utility(&self) -> &[f64] {
        &self.utility
    }

    pub fn target(&self) -> Option<f64> {
        self.target
    }

    pub fn len(&self) -> usize {
        self.utility.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utility.is_empty()
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.prior.clone(), self.utility.clone(), self.target)
    }

    pub fn with_target(mut self, target: Option<f64>) -> Result<Self> {
        self.target = target;
        validate_problem(self, false)
    }

    /// Largest and smallest utility among outcomes with positive prior mass.
    pub fn utility_range(&self) -> (f64, f64) {
        self.support_utilities()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| {
                (lo.min(u), hi.max(u))
            })
    }

    fn support_utilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.prior
            .probs()
            .iter()
            .zip(&self.utility)
            .filter(|(q, _)| **q > 0.0)
            .map(|(_, u)| *u)
    }

    fn exponents(&self) -> Vec<f64> {
        self.utility.iter().map(|u| self.alpha * u).collect()
    }
}

/// Checks every invariant of `p` and hands it back. With `solve = true` a
/// zero inverse temperature is also an error.
pub fn validate_problem(p: SingleStepProblem, solve: bool) -> Result<SingleStepProblem> {
    if !p.alpha.is_finite() {
        return Err(Error::NonFinite("alpha".into()));
    }
    if solve && p.alpha == 0.0 {
        return Err(Error::ZeroTemperature("single-step problem".into()));
    }
    if p.utility.len() != p.prior.len() {
        return Err(Error::LengthMismatch {
            what: "utilities",
            expected: p.prior.len(),
            got: p.utility.len(),
        });
    }
    if let Some(i) = p.utility.iter().position(|u| !u.is_finite()) {
        return Err(Error::NonFinite(format!("utility of `{}`", p.outcomes()[i])));
    }
    if let Some(t) = p.target {
        if !t.is_finite() {
            return Err(Error::NonFinite("target".into()));
        }
    }
    // Re-run the distribution checks in case the prior came from elsewhere.
    Distribution::with_labels(
        Arc::clone(p.prior.shared_labels()),
        p.prior.probs().to_vec(),
        "prior",
    )?;
    Ok(p)
}

fn require_solvable(p: &SingleStepProblem) -> Result<()> {
    if p.alpha == 0.0 {
        return Err(Error::ZeroTemperature("single-step problem".into()));
    }
    Ok(())
}

/// `log Z_α = log Σ_x Q(x) exp{α U(x)}`, computed with a max shift.
pub fn log_partition_function(p: &SingleStepProblem) -> Result<f64> {
    require_solvable(p)?;
    Ok(weighted_log_sum_exp(p.prior.probs(), &p.exponents()))
}

/// `Z_α`. Overflows to `+inf` for `log Z_α > 709`; prefer
/// [`log_partition_function`] when that matters.
pub fn partition_function(p: &SingleStepProblem) -> Result<f64> {
    log_partition_function(p).map(f64::exp)
}

/// The optimal posterior `P(x) = Q(x) exp{α U(x)} / Z_α`.
pub fn gibbs_posterior(p: &SingleStepProblem) -> Result<Distribution> {
    require_solvable(p)?;
    Ok(p.prior.sibling(gibbs_weights(p.prior.probs(), &p.exponents())))
}

/// `(1/α) log Z_α`.
pub fn certainty_equivalent(p: &SingleStepProblem) -> Result<f64> {
    Ok(log_partition_function(p)? / p.alpha)
}

/// Free energy of an arbitrary policy:
/// expected utility minus `(1/α)` times `KL(policy ‖ prior)`.
pub fn free_energy(p: &SingleStepProblem, policy: &Distribution) -> Result<f64> {
    require_solvable(p)?;
    if !policy.same_support_labels(&p.prior) {
        return Err(Error::LabelMismatch);
    }
    let kl = kl_divergence(policy.probs(), p.prior.probs()).map_err(|i| {
        Error::SupportViolation {
            label: p.outcomes()[i].clone(),
        }
    })?;
    let expected: f64 = crate::math::neumaier_sum(
        policy
            .probs()
            .iter()
            .zip(&p.utility)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, u)| w * u),
    );
    Ok(expected - kl / p.alpha)
}

/// Which end of the inverse-temperature axis to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitRegime {
    PlusInfinity,
    Zero,
    MinusInfinity,
}

/// Limit of the posterior and certainty-equivalent as `α → ±∞` or `α → 0`.
///
/// The infinite limits return the uniform distribution over the maximizing
/// (minimizing) outcomes within the prior's support, found by exact equality.
/// The `α` stored in the problem is ignored.
pub fn limit_posterior(p: &SingleStepProblem, regime: LimitRegime) -> (Distribution, f64) {
    let (lo, hi) = p.utility_range();
    let extreme = match regime {
        LimitRegime::Zero => {
            let mean = crate::math::neumaier_sum(
                p.prior.probs().iter().zip(&p.utility).map(|(q, u)| q * u),
            );
            return (p.prior.clone(), mean);
        }
        LimitRegime::PlusInfinity => hi,
        LimitRegime::MinusInfinity => lo,
    };
    let members: Vec<bool> = p
        .prior
        .probs()
        .iter()
        .zip(&p.utility)
        .map(|(q, u)| *q > 0.0 && *u == extreme)
        .collect();
    let count = members.iter().filter(|m| **m).count();
    let probs = members
        .iter()
        .map(|m| if *m { 1.0 / count as f64 } else { 0.0 })
        .collect();
    (p.prior.sibling(probs), extreme)
}

/// How one coarse outcome splits into finer sub-outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub conditional: Distribution,
    pub utilities: Vec<f64>,
}

/// Builds the problem over `X × Y` with `Q(x, y) = Q(x) Q(y|x)` and utilities
/// `U(x, y)`. Each coarse utility must already be the certainty-equivalent of
/// its refinement, so the partition function is unchanged.
///
/// Refined outcome labels are `"{x}/{y}"`.
pub fn refine_problem(p: &SingleStepProblem, refinements: &[Refinement]) -> Result<SingleStepProblem> {
    require_solvable(p)?;
    if refinements.len() != p.len() {
        return Err(Error::LengthMismatch {
            what: "refinements",
            expected: p.len(),
            got: refinements.len(),
        });
    }
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    let mut utility = Vec::new();
    for (i, r) in refinements.iter().enumerate() {
        let x = &p.outcomes()[i];
        if r.utilities.len() != r.conditional.len() {
            return Err(Error::LengthMismatch {
                what: "sub-utilities",
                expected: r.conditional.len(),
                got: r.utilities.len(),
            });
        }
        let exps: Vec<f64> = r.utilities.iter().map(|u| p.alpha * u).collect();
        let implied = weighted_log_sum_exp(r.conditional.probs(), &exps) / p.alpha;
        if (implied - p.utility[i]).abs() > REFINEMENT_TOLERANCE || implied.is_nan() {
            return Err(Error::CoarseUtility {
                label: x.clone(),
                declared: p.utility[i],
                implied,
            });
        }
        let qx = p.prior.probs()[i];
        for ((y, qy), u) in r.conditional.iter().zip(&r.utilities) {
            labels.push(format!("{x}/{y}"));
            probs.push(qx * qy);
            utility.push(*u);
        }
    }
    let prior = Distribution::with_labels(labels.into(), probs, "refined prior")?;
    SingleStepProblem::new(p.alpha, prior, utility, p.target)
}
