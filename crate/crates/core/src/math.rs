//! Numerical helpers shared by the solvers.

/// Compensated (Neumaier) summation. Used wherever a mass total is compared
/// against a 1e-12 tolerance, since plain summation of 10^5 equal terms drifts
/// by more than that.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `log Σ_i w_i exp(a_i)` with max-shift, skipping entries whose weight is zero.
///
/// Returns `-inf` when every weight is zero. Summation runs in index order.
pub fn weighted_log_sum_exp(weights: &[f64], exponents: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), exponents.len());
    let shift = weights
        .iter()
        .zip(exponents)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, a)| *a)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let total = neumaier_sum(
        weights
            .iter()
            .zip(exponents)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, a)| w * (a - shift).exp()),
    );
    shift + total.ln()
}

/// Normalized Gibbs weights `w_i exp(a_i) / Σ_j w_j exp(a_j)`; zero-weight
/// entries get exactly zero.
pub fn gibbs_weights(weights: &[f64], exponents: &[f64]) -> Vec<f64> {
    let shift = weights
        .iter()
        .zip(exponents)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, a)| *a)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = weights
        .iter()
        .zip(exponents)
        .map(|(w, a)| if *w > 0.0 { w * (a - shift).exp() } else { 0.0 })
        .collect();
    let total = neumaier_sum(out.iter().copied());
    for p in &mut out {
        *p /= total;
    }
    out
}

/// `Σ p log(p/q)` with `0 log 0 = 0`. Fails when `p > 0` meets `q = 0`,
/// reporting the offending index.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64, usize> {
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(i);
            }
            terms.push(pi * (pi / qi).ln());
        }
    }
    Ok(neumaier_sum(terms))
}

/// Total-variation distance between two aligned probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_unit_mass() {
        let n = 100_000;
        let v = vec![1.0 / n as f64; n];
        assert!((neumaier_sum(v.iter().copied()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lse_survives_large_exponents() {
        let w = [0.5, 0.5];
        let a = [1000.0, 1001.0];
        let got = weighted_log_sum_exp(&w, &a);
        let want = 1000.0 + (0.5 * (1.0 + 1f64.exp())).ln();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn lse_ignores_zero_weights() {
        assert_eq!(weighted_log_sum_exp(&[0.0, 1.0], &[1e308, 2.0]), 2.0);
        assert_eq!(weighted_log_sum_exp(&[0.0], &[1.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn kl_reports_support_violation() {
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), Err(1));
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]), Ok(2f64.ln()));
    }
}
