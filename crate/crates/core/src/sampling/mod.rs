//! Stochastic choice: rejection sampling from Gibbs posteriors, success
//! probability analytics, and trials that succeed with probability `p^ξ`
//! given only a `Bernoulli(p)` trial.

mod power;
mod rejection;

pub use power::{
    bernoulli_power_coefficients, power_trial_fractional, power_trial_general,
    power_trial_integer, CoefficientSeries, CoinTrial,
};
pub use rejection::{
    accept_trial, inverse_acceptance_probability, power_trial_inverse, required_samples,
    sample_choice, success_probability, InverseRejectionTrial, Proposal, RejectionSampler,
};

use crate::rng::RngStream;

/// Outcome of one trial (or of a loop of trials), with its cost counters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrialReport<P> {
    pub payload: Option<P>,
    pub accepted: bool,
    /// Proposals drawn from the prior, across every level of recursion.
    pub proposals_drawn: u64,
    /// Elementary accept/reject tests performed.
    pub base_trials: u64,
    /// Recursive calls made below the entry point; 0 for single-step trials.
    pub elapsed_trial_depth: u64,
    /// Top-level attempts aggregated into this report.
    pub attempts: u64,
}

impl<P> TrialReport<P> {
    pub(crate) fn empty() -> Self {
        Self {
            payload: None,
            accepted: false,
            proposals_drawn: 0,
            base_trials: 0,
            elapsed_trial_depth: 0,
            attempts: 0,
        }
    }

    /// Adds `other`'s counters to `self` and takes its verdict and payload.
    pub(crate) fn absorb(&mut self, other: TrialReport<P>) {
        self.proposals_drawn += other.proposals_drawn;
        self.base_trials += other.base_trials;
        self.elapsed_trial_depth += other.elapsed_trial_depth;
        self.accepted = other.accepted;
        self.payload = other.payload;
    }

    pub(crate) fn fail(mut self) -> Self {
        self.accepted = false;
        self.payload = None;
        self
    }

    pub fn map<Q>(self, f: impl FnOnce(P) -> Q) -> TrialReport<Q> {
        TrialReport {
            payload: self.payload.map(f),
            accepted: self.accepted,
            proposals_drawn: self.proposals_drawn,
            base_trials: self.base_trials,
            elapsed_trial_depth: self.elapsed_trial_depth,
            attempts: self.attempts,
        }
    }
}

/// A procedure that performs one independent attempt and either succeeds
/// with a payload or fails.
pub trait BernoulliTrial {
    type Payload;

    fn attempt(&self, rng: &mut RngStream) -> TrialReport<Self::Payload>;
}

impl<T: BernoulliTrial + ?Sized> BernoulliTrial for &T {
    type Payload = T::Payload;

    fn attempt(&self, rng: &mut RngStream) -> TrialReport<Self::Payload> {
        (**self).attempt(rng)
    }
}
