//! Finite probability tables over labeled outcomes.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::math::neumaier_sum;

/// Tolerance on total mass for every distribution in the crate.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A probability table over uniquely labeled outcomes, kept in insertion order.
///
/// Labels are shared behind an `Arc`, so a posterior built from a prior does
/// not copy them.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    labels: Arc<[String]>,
    probs: Vec<f64>,
}

impl Distribution {
    /// Builds a validated distribution. `context` names the owner in mass errors.
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        Self::with_labels(labels.into(), probs, "distribution")
    }

    pub(crate) fn with_labels(
        labels: Arc<[String]>,
        probs: Vec<f64>,
        context: &str,
    ) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::LengthMismatch {
                what: "probabilities",
                expected: labels.len(),
                got: probs.len(),
            });
        }
        if labels.is_empty() {
            return Err(Error::Empty(context.to_string()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in labels.iter() {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        check_masses(&labels, &probs, context)?;
        Ok(Self { labels, probs })
    }

    /// Shares labels with `self`; used for posteriors and policies that are
    /// normalized by construction.
    pub(crate) fn sibling(&self, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), self.labels.len());
        Self {
            labels: Arc::clone(&self.labels),
            probs,
        }
    }

    /// Unchecked assembly for tables normalized by construction.
    pub(crate) fn from_parts(labels: Arc<[String]>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), labels.len());
        Self { labels, probs }
    }

    /// Same labels as `self`, validated masses.
    pub fn reweighted(&self, probs: Vec<f64>) -> Result<Self> {
        Self::with_labels(Arc::clone(&self.labels), probs, "policy")
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, vec![1.0 / n as f64; n])
    }

    /// A point mass on `label` among `labels`.
    pub fn point_mass(labels: Vec<String>, label: &str) -> Result<Self> {
        let probs = labels
            .iter()
            .map(|l| if l == label { 1.0 } else { 0.0 })
            .collect();
        Self::new(labels, probs)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub(crate) fn shared_labels(&self) -> &Arc<[String]> {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn prob(&self, label: &str) -> Option<f64> {
        self.index_of(label).map(|i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.labels.iter().map(String::as_str).zip(self.probs.iter().copied())
    }

    pub fn same_support_labels(&self, other: &Distribution) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }

    pub fn total_variation(&self, other: &Distribution) -> Result<f64> {
        if !self.same_support_labels(other) {
            return Err(Error::LabelMismatch);
        }
        Ok(crate::math::total_variation(&self.probs, &other.probs))
    }
}

pub(crate) fn check_masses(labels: &[String], probs: &[f64], context: &str) -> Result<()> {
    for (label, &p) in labels.iter().zip(probs) {
        if !p.is_finite() {
            return Err(Error::NonFinite(format!("probability of `{label}`")));
        }
        if p < 0.0 {
            return Err(Error::NegativeProbability {
                label: label.clone(),
                value: p,
            });
        }
    }
    let total = neumaier_sum(probs.iter().copied());
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::MassSum {
            context: context.to_string(),
            total,
        });
    }
    Ok(())
}

/// Law of a utility random variable: distinct values in ascending order with
/// their masses.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueDistribution {
    pub atoms: Vec<(f64, f64)>,
}

impl ValueDistribution {
    pub fn mass_of(&self, value: f64) -> f64 {
        self.atoms
            .iter()
            .find(|(v, _)| *v == value)
            .map_or(0.0, |(_, m)| *m)
    }
}

/// Pushes a joint distribution over realizations forward through a utility
/// map: `P(U = u) = Σ_{pairs with utility u} P(pair)`. Values are merged on
/// exact equality.
pub fn utility_pushforward(joint: &Distribution, utility: &[f64]) -> Result<ValueDistribution> {
    if utility.len() != joint.len() {
        return Err(Error::LengthMismatch {
            what: "utilities",
            expected: joint.len(),
            got: utility.len(),
        });
    }
    if let Some(i) = utility.iter().position(|u| !u.is_finite()) {
        return Err(Error::NonFinite(format!("utility of `{}`", joint.labels()[i])));
    }
    // `+ 0.0` folds -0.0 into 0.0 so that sorting agrees with `==`.
    let mut pairs: Vec<(f64, f64)> = utility
        .iter()
        .zip(joint.probs())
        .map(|(u, p)| (u + 0.0, *p))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (u, p) in pairs {
        match atoms.last_mut() {
            Some((v, m)) if *v == u => *m += p,
            _ => atoms.push((u, p)),
        }
    }
    Ok(ValueDistribution { atoms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn rejects_bad_mass() {
        let err = Distribution::new(labels(2), vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, Error::MassSum { .. }));
        let err = Distribution::new(labels(2), vec![1.5, -0.5]).unwrap_err();
        assert!(matches!(err, Error::NegativeProbability { .. }));
    }

    #[test]
    fn rejects_duplicates() {
        let err = Distribution::new(vec!["a".into(), "a".into()], vec![0.5, 0.5]).unwrap_err();
        assert_eq!(err, Error::DuplicateLabel("a".into()));
    }

    #[test]
    fn pushforward_merges_equal_utilities() {
        let joint = Distribution::uniform(labels(4)).unwrap();
        let law = utility_pushforward(&joint, &[0.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(law.atoms, vec![(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)]);

        let joint = Distribution::uniform(labels(2)).unwrap();
        let law = utility_pushforward(&joint, &[1.0, 1.0]).unwrap();
        assert_eq!(law.atoms, vec![(1.0, 1.0)]);
    }

    #[test]
    fn pushforward_of_point_mass() {
        let joint = Distribution::point_mass(labels(3), "2").unwrap();
        let law = utility_pushforward(&joint, &[0.3, 0.7, 0.9]).unwrap();
        assert_eq!(law.mass_of(0.7), 1.0);
        assert_eq!(law.mass_of(0.3), 0.0);
    }

    #[test]
    fn pushforward_treats_signed_zero_as_equal() {
        let joint = Distribution::uniform(labels(2)).unwrap();
        let law = utility_pushforward(&joint, &[-0.0, 0.0]).unwrap();
        assert_eq!(law.atoms.len(), 1);
    }
}
