use crate::equivalence::ExponentSpec;
use crate::error::{Error, Result};
use crate::rng::RngStream;

use super::{BernoulliTrial, TrialReport};

/// The coefficients `b_n = (−1)^{n+1} ξ(ξ−1)⋯(ξ−n+1)/n!` of
/// `p^ξ = 1 − Σ_n b_n (1−p)^n` and their running sums `f_n`, produced by the
/// recurrence `b ← −b(ξ−k+1)/k` starting from `b = −1`, `k = 1`.
///
/// `f` is clamped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct CoefficientSeries {
    xi: f64,
    b: f64,
    f: f64,
    k: u64,
}

impl CoefficientSeries {
    pub fn new(xi: f64) -> Self {
        Self {
            xi,
            b: -1.0,
            f: 0.0,
            k: 1,
        }
    }

    /// Current running sum (`f_0 = 0` before the first step).
    pub fn running_sum(&self) -> f64 {
        self.f
    }
}

impl Iterator for CoefficientSeries {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let k = self.k as f64;
        self.b = -self.b * (self.xi - (k - 1.0)) / k;
        self.f = (self.f + self.b).clamp(0.0, 1.0);
        self.k += 1;
        Some((self.b, self.f))
    }
}

/// The first `n_max` pairs `(b_n, f_n)`, `n = 1..=n_max`.
pub fn bernoulli_power_coefficients(xi: f64, n_max: usize) -> Result<Vec<(f64, f64)>> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidArgument(format!("fractional exponent must lie in (0, 1), got {xi}")));
    }
    Ok(CoefficientSeries::new(xi).take(n_max).collect())
}

/// Plain `Bernoulli(p)` coin with no payload; one uniform per attempt.
#[derive(Debug, Clone, Copy)]
pub struct CoinTrial {
    pub p: f64,
}

impl BernoulliTrial for CoinTrial {
    type Payload = ();

    fn attempt(&self, rng: &mut RngStream) -> TrialReport<()> {
        let accepted = rng.uniform() <= self.p;
        TrialReport {
            payload: accepted.then_some(()),
            accepted,
            proposals_drawn: 1,
            base_trials: 1,
            elapsed_trial_depth: 0,
            attempts: 1,
        }
    }
}

/// Succeeds iff `k` consecutive base trials succeed; keeps the last payload.
/// Stops at the first failure.
pub fn power_trial_integer<T: BernoulliTrial>(trial: &T, k: u64, rng: &mut RngStream) -> TrialReport<T::Payload> {
    let mut report = TrialReport::empty();
    report.attempts = 1;
    for _ in 0..k {
        report.absorb(trial.attempt(rng));
        if !report.accepted {
            return report.fail();
        }
    }
    report
}

/// Succeeds with probability `p^ξ` for `ξ ∈ (0, 1)`.
///
/// Draws a threshold `f* ~ U(0,1)`, then runs base trials. After each
/// failure the running coefficient sum `f` advances and another base trial is
/// drawn; the whole attempt fails once `f* ≤ f`. The first base success ends
/// the attempt with its payload.
pub fn power_trial_fractional<T: BernoulliTrial>(
    trial: &T,
    xi: f64,
    rng: &mut RngStream,
) -> Result<TrialReport<T::Payload>> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidArgument(format!("fractional exponent must lie in (0, 1), got {xi}")));
    }
    Ok(fractional_stage(trial, xi, rng))
}

fn fractional_stage<T: BernoulliTrial>(trial: &T, xi: f64, rng: &mut RngStream) -> TrialReport<T::Payload> {
    let threshold = rng.uniform();
    let mut series = CoefficientSeries::new(xi);
    let mut report = TrialReport::empty();
    report.attempts = 1;
    report.absorb(trial.attempt(rng));
    while !report.accepted {
        let (_, f) = series.next().expect("series is infinite");
        report.absorb(trial.attempt(rng));
        if threshold <= f {
            return report.fail();
        }
    }
    report
}

/// Succeeds with probability `p^{|ξ|}` where `p` is the success probability
/// of `trial` (sign +1) or of `inverse_trial` (sign −1).
///
/// `|ξ|` is split into `⌊|ξ|⌋` consecutive successes followed, when the
/// fractional part is nonzero, by one fractional stage. The payload comes
/// from the final stage.
pub fn power_trial_general<T, I>(
    trial: &T,
    spec: &ExponentSpec,
    inverse_trial: Option<&I>,
    rng: &mut RngStream,
) -> Result<TrialReport<T::Payload>>
where
    T: BernoulliTrial,
    I: BernoulliTrial<Payload = T::Payload>,
{
    if spec.sign > 0 {
        Ok(chained(trial, spec, rng))
    } else {
        let inverse = inverse_trial.ok_or_else(|| {
            Error::InvalidArgument("negative exponent needs a reciprocal-probability trial".into())
        })?;
        Ok(chained(inverse, spec, rng))
    }
}

fn chained<T: BernoulliTrial>(base: &T, spec: &ExponentSpec, rng: &mut RngStream) -> TrialReport<T::Payload> {
    let mut report = TrialReport::empty();
    report.attempts = 1;
    if spec.integer_part > 0 {
        let stage = power_trial_integer(base, spec.integer_part, rng);
        report.absorb(stage);
        if !report.accepted || spec.fractional_part == 0.0 {
            return report;
        }
    }
    report.absorb(fractional_stage(base, spec.fractional_part, rng));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::exponent_spec;

    #[test]
    fn half_power_coefficients() {
        let c = bernoulli_power_coefficients(0.5, 4).unwrap();
        let b: Vec<f64> = c.iter().map(|x| x.0).collect();
        assert_eq!(b, vec![0.5, 0.125, 0.0625, 0.0390625]);
        assert_eq!(c[2].1, 0.6875);
    }

    #[test]
    fn first_coefficient_is_xi() {
        for &xi in &[0.01, 0.3, 0.77, 0.999] {
            assert_eq!(bernoulli_power_coefficients(xi, 1).unwrap()[0].0, xi);
        }
        assert!(bernoulli_power_coefficients(1.0, 3).is_err());
        assert!(bernoulli_power_coefficients(0.0, 3).is_err());
    }

    // 1 − f_N telescopes to Π_{k≤N} (1 − ξ/k), an oracle independent of the
    // recurrence.
    #[test]
    fn tail_matches_product_form() {
        for &xi in &[0.1, 0.5, 0.9] {
            let mut tail = 1.0;
            for (k, (_, f)) in CoefficientSeries::new(xi).take(10_000).enumerate() {
                tail *= 1.0 - xi / (k + 1) as f64;
                assert!(((1.0 - f) - tail).abs() < 1e-12, "xi={xi} k={k}");
            }
        }
    }

    #[test]
    fn certain_base_always_succeeds() {
        let mut rng = RngStream::new(1, 0);
        let coin = CoinTrial { p: 1.0 };
        for _ in 0..1000 {
            assert!(power_trial_integer(&coin, 5, &mut rng).accepted);
            let r = power_trial_fractional(&coin, 0.3, &mut rng).unwrap();
            assert!(r.accepted);
            assert_eq!(r.base_trials, 1);
        }
    }

    #[test]
    fn integer_one_is_the_base_trial() {
        let coin = CoinTrial { p: 0.4 };
        let mut a = RngStream::new(8, 0);
        let mut b = RngStream::new(8, 0);
        for _ in 0..1000 {
            assert_eq!(power_trial_integer(&coin, 1, &mut a).accepted, coin.attempt(&mut b).accepted);
        }
    }

    #[test]
    fn general_with_integral_exponent_matches_integer_run_for_run() {
        let coin = CoinTrial { p: 0.6 };
        let spec = exponent_spec(2.0, 1.0).unwrap();
        let mut a = RngStream::new(13, 2);
        let mut b = RngStream::new(13, 2);
        for _ in 0..5000 {
            let g = power_trial_general(&coin, &spec, None::<&CoinTrial>, &mut a).unwrap();
            let i = power_trial_integer(&coin, 2, &mut b);
            assert_eq!(g, i);
        }
    }

    #[test]
    fn negative_exponent_requires_inverse_trial() {
        let coin = CoinTrial { p: 0.6 };
        let spec = exponent_spec(-1.0, 1.0).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert!(power_trial_general(&coin, &spec, None::<&CoinTrial>, &mut rng).is_err());
        let inverse = CoinTrial { p: 1.0 };
        assert!(power_trial_general(&coin, &spec, Some(&inverse), &mut rng).unwrap().accepted);
    }

    fn rate(mut f: impl FnMut(&mut RngStream) -> bool, seed: u64, n: usize) -> f64 {
        let mut rng = RngStream::new(seed, 0);
        (0..n).filter(|_| f(&mut rng)).count() as f64 / n as f64
    }

    #[test]
    fn power_examples() {
        let n = 100_000;
        let quarter = CoinTrial { p: 0.25 };
        let r = rate(|g| power_trial_fractional(&quarter, 0.5, g).unwrap().accepted, 1, n);
        assert!((r - 0.5).abs() < 0.01);
        let big = CoinTrial { p: 0.81 };
        let r = rate(|g| power_trial_fractional(&big, 0.5, g).unwrap().accepted, 2, n);
        assert!((r - 0.9).abs() < 0.01);
        let half = CoinTrial { p: 0.5 };
        let r = rate(|g| power_trial_integer(&half, 2, g).accepted, 3, n);
        assert!((r - 0.25).abs() < 0.01);
        let spec = exponent_spec(3.0, 2.0).unwrap();
        let r = rate(
            |g| power_trial_general(&quarter, &spec, None::<&CoinTrial>, g).unwrap().accepted,
            4,
            n,
        );
        assert!((r - 0.125).abs() < 0.005);
    }
}
