use std::sync::Arc;

use crate::distribution::{check_masses, Distribution};
use crate::error::{Error, Result};
use crate::math::{gibbs_weights, neumaier_sum, weighted_log_sum_exp};

use super::{DecisionTree, NodeId};

/// One transition table per internal node, aligned with that node's edges.
/// Leaves have no row.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePolicy {
    rows: Vec<Option<Vec<f64>>>,
}

impl TreePolicy {
    /// Validates `rows` against `t`: every internal node needs a normalized,
    /// nonnegative row with one entry per edge.
    pub fn new(t: &DecisionTree, rows: Vec<Option<Vec<f64>>>) -> Result<Self> {
        if rows.len() != t.len() {
            return Err(Error::LengthMismatch {
                what: "policy rows",
                expected: t.len(),
                got: rows.len(),
            });
        }
        for id in t.internal_nodes() {
            let path = t.path_string(id);
            let row = rows[id.0].as_ref().ok_or_else(|| Error::Tree {
                path: path.clone(),
                reason: "policy has no row for this node".into(),
            })?;
            let labels: Vec<String> = t.edges(id).iter().map(|e| e.label.clone()).collect();
            if row.len() != labels.len() {
                return Err(Error::Tree {
                    path,
                    reason: format!("policy row has {} entries for {} edges", row.len(), labels.len()),
                });
            }
            check_masses(&labels, row, &path).map_err(|e| Error::Tree {
                path: path.clone(),
                reason: e.to_string(),
            })?;
        }
        Ok(Self { rows })
    }

    /// The prior transition tables `Q(·|s)`.
    pub fn prior(t: &DecisionTree) -> Self {
        let rows = t
            .ids()
            .map(|id| (!t.is_leaf(id)).then(|| t.edges(id).iter().map(|e| e.prior).collect()))
            .collect();
        Self { rows }
    }

    pub fn row(&self, id: NodeId) -> Option<&[f64]> {
        self.rows.get(id.0).and_then(|r| r.as_deref())
    }

    /// The row at `id` as a distribution over edge labels.
    pub fn row_distribution(&self, t: &DecisionTree, id: NodeId) -> Option<Distribution> {
        let row = self.row(id)?;
        let labels: Arc<[String]> = t.edges(id).iter().map(|e| e.label.clone()).collect();
        Some(Distribution::from_parts(labels, row.to_vec()))
    }
}

/// Certainty-equivalents `F(s)` for every node and the optimal transition
/// tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSolution {
    pub node_values: Vec<f64>,
    pub policy: TreePolicy,
}

impl TreeSolution {
    pub fn value(&self, id: NodeId) -> f64 {
        self.node_values[id.0]
    }

    pub fn root_value(&self) -> f64 {
        self.node_values[0]
    }

    /// `log Z(s) = α(s) F(s)` for an internal node.
    pub fn log_partition(&self, t: &DecisionTree, id: NodeId) -> Option<f64> {
        t.alpha(id).map(|a| a * self.value(id))
    }
}

/// Solves a validated tree exactly: leaves keep their terminal values, and
/// each internal node, visited after its children, gets
/// `F(s) = (1/α) log Σ_x Q(x|s) exp{α [R(x|s) + F(sx)]}` and the matching
/// Gibbs row.
pub fn backward_induction(t: &DecisionTree) -> TreeSolution {
    let mut values = vec![0.0; t.len()];
    let mut rows = vec![None; t.len()];
    for id in t.ids().rev() {
        match t.alpha(id) {
            None => values[id.0] = t.leaf_value(id).expect("leaf"),
            Some(alpha) => {
                let edges = t.edges(id);
                let priors: Vec<f64> = edges.iter().map(|e| e.prior).collect();
                let exponents: Vec<f64> = edges
                    .iter()
                    .map(|e| alpha * (e.reward + values[e.child.0]))
                    .collect();
                values[id.0] = weighted_log_sum_exp(&priors, &exponents) / alpha;
                rows[id.0] = Some(gibbs_weights(&priors, &exponents));
            }
        }
    }
    TreeSolution {
        node_values: values,
        policy: TreePolicy { rows },
    }
}

/// Free energy of an arbitrary policy, by the recursion
/// `F[P̃](s) = Σ_x P̃(x|s) [R(x|s) − (1/α) log(P̃(x|s)/Q(x|s)) + F[P̃](sx)]`.
pub fn tree_free_energy(t: &DecisionTree, policy: &TreePolicy) -> Result<f64> {
    let mut values = vec![0.0; t.len()];
    for id in t.ids().rev() {
        let Some(alpha) = t.alpha(id) else {
            values[id.0] = t.leaf_value(id).expect("leaf");
            continue;
        };
        let row = policy.row(id).ok_or_else(|| Error::Tree {
            path: t.path_string(id),
            reason: "policy has no row for this node".into(),
        })?;
        let mut terms = Vec::with_capacity(row.len());
        for (e, &p) in t.edges(id).iter().zip(row) {
            if p == 0.0 {
                continue;
            }
            if e.prior == 0.0 {
                return Err(Error::SupportViolation {
                    label: t.path_string(e.child),
                });
            }
            terms.push(p * (e.reward - (p / e.prior).ln() / alpha + values[e.child.0]));
        }
        values[id.0] = neumaier_sum(terms);
    }
    Ok(values[0])
}

/// Probability of reaching each leaf under `policy`, in pre-order.
pub fn path_masses(t: &DecisionTree, policy: &TreePolicy) -> Vec<(NodeId, f64)> {
    let mut reach = vec![0.0; t.len()];
    reach[0] = 1.0;
    for id in t.ids() {
        if let Some(row) = policy.row(id) {
            for (e, p) in t.edges(id).iter().zip(row) {
                reach[e.child.0] = reach[id.0] * p;
            }
        }
    }
    t.leaves().map(|l| (l, reach[l.0])).collect()
}

/// Distribution over root-to-leaf paths, labeled by their `/`-joined edge
/// labels.
pub fn path_distribution(t: &DecisionTree, policy: &TreePolicy) -> Distribution {
    let masses = path_masses(t, policy);
    let labels: Arc<[String]> = masses.iter().map(|(l, _)| t.path_string(*l)).collect();
    Distribution::from_parts(labels, masses.into_iter().map(|(_, m)| m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{EdgeSpec, NodeSpec};

    fn depth_one() -> DecisionTree {
        DecisionTree::new(1, NodeSpec::internal(1.0, vec![
            EdgeSpec::new("1", 0.5, 0.0, NodeSpec::leaf(0.0)),
            EdgeSpec::new("2", 0.5, 1.0, NodeSpec::leaf(0.0)),
        ]))
        .unwrap()
    }

    #[test]
    fn depth_one_solution() {
        let t = depth_one();
        let s = backward_induction(&t);
        assert!((s.root_value() - 0.62011).abs() < 1e-5);
        let row = s.policy.row(t.root()).unwrap();
        assert!((row[0] - 0.26894).abs() < 1e-5);
        assert!((row[1] - 0.73106).abs() < 1e-5);
        let fe = tree_free_energy(&t, &s.policy).unwrap();
        assert!((fe - s.root_value()).abs() < 1e-12);
        let greedy = TreePolicy::new(&t, vec![Some(vec![1.0, 0.0]), None, None]).unwrap();
        assert!((tree_free_energy(&t, &greedy).unwrap() + std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn composed_children() {
        let child = |f: f64| NodeSpec::internal(3.0, vec![EdgeSpec::new("z", 1.0, 0.0, NodeSpec::leaf(f))]);
        let t = DecisionTree::new(2, NodeSpec::internal(1.0, vec![
            EdgeSpec::new("a", 0.5, 0.0, child(0.0)),
            EdgeSpec::new("b", 0.5, 0.0, child(1.0)),
        ]))
        .unwrap();
        let s = backward_induction(&t);
        assert!((s.root_value() - 0.62011).abs() < 1e-5);
    }

    #[test]
    fn constant_tree() {
        let leaf = || NodeSpec::leaf(2.5);
        let inner = |a: f64| NodeSpec::internal(a, vec![EdgeSpec::new("u", 0.3, 0.0, leaf()), EdgeSpec::new("v", 0.7, 0.0, leaf())]);
        let t = DecisionTree::new(2, NodeSpec::internal(-4.0, vec![
            EdgeSpec::new("a", 0.2, 0.0, inner(2.0)),
            EdgeSpec::new("b", 0.8, 0.0, inner(-0.5)),
        ]))
        .unwrap();
        let s = backward_induction(&t);
        for id in t.ids() {
            assert!((s.value(id) - 2.5).abs() < 1e-12);
            if let Some(row) = s.policy.row(id) {
                for (p, e) in row.iter().zip(t.edges(id)) {
                    assert!((p - e.prior).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn prior_policy_gives_expected_total() {
        let t = depth_one();
        let fe = tree_free_energy(&t, &TreePolicy::prior(&t)).unwrap();
        assert!((fe - 0.5).abs() < 1e-15);
        let d = path_distribution(&t, &TreePolicy::prior(&t));
        assert_eq!(d.labels(), &["1".to_string(), "2".to_string()]);
        assert_eq!(d.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn support_violation_names_the_path() {
        let t = DecisionTree::new(1, NodeSpec::internal(1.0, vec![
            EdgeSpec::new("1", 1.0, 0.0, NodeSpec::leaf(0.0)),
            EdgeSpec::new("2", 0.0, 1.0, NodeSpec::leaf(0.0)),
        ]))
        .unwrap();
        let bad = TreePolicy::new(&t, vec![Some(vec![0.5, 0.5]), None, None]).unwrap();
        assert_eq!(tree_free_energy(&t, &bad).unwrap_err(), Error::SupportViolation { label: "2".into() });
    }

    #[test]
    fn rejects_malformed_rows() {
        let t = depth_one();
        assert!(TreePolicy::new(&t, vec![Some(vec![0.5, 0.6]), None, None]).is_err());
        assert!(TreePolicy::new(&t, vec![None, None, None]).is_err());
        assert!(TreePolicy::new(&t, vec![Some(vec![1.0]), None, None]).is_err());
    }
}
