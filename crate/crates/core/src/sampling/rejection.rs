use crate::error::{Error, Result};
use crate::problem::{log_partition_function, SingleStepProblem};
use crate::rng::{Categorical, RngStream};

use super::{BernoulliTrial, TrialReport};

/// Draws outcome indices from a prior.
pub trait Proposal {
    fn propose(&self, rng: &mut RngStream) -> usize;
}

impl Proposal for Categorical {
    fn propose(&self, rng: &mut RngStream) -> usize {
        self.sample(rng)
    }
}

fn check_upper_bound(p: &SingleStepProblem, u_star: f64, sign: f64) -> Result<()> {
    if !u_star.is_finite() {
        return Err(Error::NonFinite("target".into()));
    }
    let (lo, hi) = p.utility_range();
    let s = sign * p.alpha();
    if s > 0.0 && u_star < hi {
        return Err(Error::TargetBound {
            target: u_star,
            detail: format!("must be at least the largest utility {hi}"),
        });
    }
    if s < 0.0 && u_star > lo {
        return Err(Error::TargetBound {
            target: u_star,
            detail: format!("must be at most the smallest utility {lo}"),
        });
    }
    Ok(())
}

/// Rejection sampler for the Gibbs posterior of a problem: propose `x ~ Q`,
/// accept with probability `min{1, exp(α[U(x) − U*])}`.
///
/// Valid for `α > 0` with `U* ≥ max U`, or `α < 0` with `U* ≤ min U`; any
/// target works at `α = 0`, where every proposal is accepted.
#[derive(Debug, Clone)]
pub struct RejectionSampler<'a, S = Categorical> {
    problem: &'a SingleStepProblem,
    target: f64,
    proposal: S,
}

impl<'a> RejectionSampler<'a, Categorical> {
    pub fn new(problem: &'a SingleStepProblem, target: f64) -> Result<Self> {
        Self::with_proposal(problem, target, Categorical::new(problem.prior().probs()))
    }
}

impl<'a, S: Proposal> RejectionSampler<'a, S> {
    /// Uses a caller-supplied sampler for the prior. It must draw indices
    /// with the prior's probabilities.
    pub fn with_proposal(problem: &'a SingleStepProblem, target: f64, proposal: S) -> Result<Self> {
        check_upper_bound(problem, target, 1.0)?;
        Ok(Self {
            problem,
            target,
            proposal,
        })
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    /// Repeats trials until one is accepted or `max_proposals` are spent.
    pub fn sample(&self, rng: &mut RngStream, max_proposals: u64) -> TrialReport<usize> {
        let mut report = TrialReport::empty();
        while report.attempts < max_proposals {
            report.attempts += 1;
            report.absorb(self.attempt(rng));
            if report.accepted {
                break;
            }
        }
        report
    }
}

impl<S: Proposal> BernoulliTrial for RejectionSampler<'_, S> {
    type Payload = usize;

    fn attempt(&self, rng: &mut RngStream) -> TrialReport<usize> {
        let x = self.proposal.propose(rng);
        let u = rng.uniform();
        let exponent = self.problem.alpha() * (self.problem.utility()[x] - self.target);
        let accepted = u.ln() <= exponent;
        TrialReport {
            payload: accepted.then_some(x),
            accepted,
            proposals_drawn: 1,
            base_trials: 1,
            elapsed_trial_depth: 0,
            attempts: 1,
        }
    }
}

/// One proposal and one accept/reject decision.
pub fn accept_trial(p: &SingleStepProblem, u_star: f64, rng: &mut RngStream) -> Result<TrialReport<usize>> {
    Ok(RejectionSampler::new(p, u_star)?.attempt(rng))
}

/// Repeats [`accept_trial`] until acceptance, giving up after `max_proposals`.
/// Accepted payloads are distributed as the Gibbs posterior.
pub fn sample_choice(
    p: &SingleStepProblem,
    u_star: f64,
    rng: &mut RngStream,
    max_proposals: u64,
) -> Result<TrialReport<usize>> {
    if max_proposals == 0 {
        return Err(Error::InvalidArgument("max_proposals must be at least 1".into()));
    }
    Ok(RejectionSampler::new(p, u_star)?.sample(rng, max_proposals))
}

/// Exact per-trial acceptance probability `p_α = Z_α / exp(α U*)`.
pub fn success_probability(p: &SingleStepProblem, u_star: f64) -> Result<f64> {
    check_upper_bound(p, u_star, 1.0)?;
    if p.alpha() == 0.0 {
        return Ok(1.0);
    }
    let log_p = log_partition_function(p)? - p.alpha() * u_star;
    Ok(log_p.exp().min(1.0))
}

/// Smallest `n` with `(1 − p)^n ≤ δ`: the proposals needed to see at least
/// one acceptance with failure probability at most `δ`.
pub fn required_samples(p: f64, delta: f64) -> Result<u64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("success probability must lie in (0, 1), got {p}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("failure tolerance must lie in (0, 1), got {delta}")));
    }
    let log_fail = (-p).ln_1p();
    let log_delta = delta.ln();
    let fails = |n: u64| n as f64 * log_fail > log_delta;
    let mut n = (log_delta / log_fail).ceil().max(1.0) as u64;
    // The ratio can land a hair off an integer; settle on the exact minimum.
    while fails(n) {
        n += 1;
    }
    while n > 1 && !fails(n - 1) {
        n -= 1;
    }
    Ok(n)
}

/// Trial with the acceptance test inverted to reciprocal probabilities:
/// propose `x ~ Q`, draw `u`, fail iff `1/u < exp(β[V(x) − U*])`.
///
/// The target sits on the opposite side of the utility range from the
/// ordinary sampler: `U* ≤ min V` for `β > 0`, `U* ≥ max V` for `β < 0`.
#[derive(Debug, Clone)]
pub struct InverseRejectionTrial<'a> {
    problem: &'a SingleStepProblem,
    target: f64,
    proposal: Categorical,
}

impl<'a> InverseRejectionTrial<'a> {
    pub fn new(problem: &'a SingleStepProblem, target: f64) -> Result<Self> {
        check_upper_bound(problem, target, -1.0)?;
        Ok(Self {
            problem,
            target,
            proposal: Categorical::new(problem.prior().probs()),
        })
    }
}

impl BernoulliTrial for InverseRejectionTrial<'_> {
    type Payload = usize;

    fn attempt(&self, rng: &mut RngStream) -> TrialReport<usize> {
        let x = self.proposal.sample(rng);
        let u = rng.uniform();
        let exponent = self.problem.alpha() * (self.problem.utility()[x] - self.target);
        // 1/u < e^{exponent}  <=>  -ln u < exponent
        let accepted = -u.ln() >= exponent;
        TrialReport {
            payload: accepted.then_some(x),
            accepted,
            proposals_drawn: 1,
            base_trials: 1,
            elapsed_trial_depth: 0,
            attempts: 1,
        }
    }
}

pub fn power_trial_inverse(p: &SingleStepProblem, u_star: f64, rng: &mut RngStream) -> Result<TrialReport<usize>> {
    Ok(InverseRejectionTrial::new(p, u_star)?.attempt(rng))
}

/// Exact per-trial acceptance of [`InverseRejectionTrial`]:
/// `Σ_x Q(x) min{1, exp(−β[V(x) − U*])}`.
///
/// This matches `exp(β U*) / Z_β` only when `V` is constant; callers comparing
/// against that expression should expect the gap.
pub fn inverse_acceptance_probability(p: &SingleStepProblem, u_star: f64) -> Result<f64> {
    check_upper_bound(p, u_star, -1.0)?;
    Ok(crate::math::neumaier_sum(
        p.prior()
            .probs()
            .iter()
            .zip(p.utility())
            .map(|(q, v)| q * (-p.alpha() * (v - u_star)).exp().min(1.0)),
    ))
}
