//! JSON documents for single-step problems and decision trees.
//!
//! Problem: `{"alpha": a, "target": t?, "outcomes": [{"id", "q", "u"}]}`.
//! Tree: `{"horizon": h, "root": NODE}` where an internal node is
//! `{"alpha": a, "edges": [{"x", "q", "r", "child": NODE}]}` and a leaf is
//! `{"f": v}` with `f` defaulting to 0.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use brplan_core::{DecisionTree, EdgeSpec, NodeSpec, SingleStepProblem};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub outcomes: Vec<OutcomeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeDoc {
    pub id: String,
    pub q: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub horizon: usize,
    pub root: NodeDoc,
}

/// Internal nodes carry `alpha` and `edges`, leaves at most `f`. One flat
/// record keeps serde's line/column positions in error messages, which an
/// untagged enum would lose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub x: String,
    pub q: f64,
    pub r: f64,
    pub child: NodeDoc,
}

impl ProblemDoc {
    pub fn to_problem(&self) -> Result<SingleStepProblem> {
        let outcomes = self.outcomes.iter().map(|o| (o.id.clone(), o.q, o.u));
        Ok(SingleStepProblem::from_outcomes(self.alpha, outcomes, self.target)?)
    }

    pub fn from_problem(p: &SingleStepProblem) -> Self {
        let outcomes = p
            .outcomes()
            .iter()
            .zip(p.prior().probs())
            .zip(p.utility())
            .map(|((id, q), u)| OutcomeDoc {
                id: id.clone(),
                q: *q,
                u: *u,
            })
            .collect();
        Self {
            alpha: p.alpha(),
            target: p.target(),
            outcomes,
        }
    }
}

impl TreeDoc {
    pub fn to_tree(&self) -> Result<DecisionTree> {
        let root = node_spec(&self.root, &mut Vec::new())?;
        Ok(DecisionTree::new(self.horizon, root)?)
    }

    pub fn from_tree(t: &DecisionTree) -> Self {
        Self {
            horizon: t.horizon(),
            root: node_doc(&t.to_spec()),
        }
    }
}

fn path_of(labels: &[String]) -> String {
    if labels.is_empty() {
        "ε".to_string()
    } else {
        labels.join("/")
    }
}

fn node_spec(doc: &NodeDoc, path: &mut Vec<String>) -> Result<NodeSpec> {
    match (doc.alpha, &doc.edges, doc.f) {
        (None, None, f) => Ok(NodeSpec::leaf(f.unwrap_or(0.0))),
        (Some(alpha), Some(edges), None) => {
            let mut out = Vec::with_capacity(edges.len());
            for e in edges {
                path.push(e.x.clone());
                let child = node_spec(&e.child, path)?;
                path.pop();
                out.push(EdgeSpec::new(e.x.clone(), e.q, e.r, child));
            }
            Ok(NodeSpec::internal(alpha, out))
        }
        _ => bail!(
            "invalid tree at node {}: a node has either \"alpha\" and \"edges\" or only \"f\"",
            path_of(path)
        ),
    }
}

fn node_doc(spec: &NodeSpec) -> NodeDoc {
    match spec {
        NodeSpec::Leaf { value } => NodeDoc {
            alpha: None,
            edges: None,
            f: Some(*value),
        },
        NodeSpec::Internal { alpha, edges } => NodeDoc {
            alpha: Some(*alpha),
            edges: Some(
                edges
                    .iter()
                    .map(|e| EdgeDoc {
                        x: e.label.clone(),
                        q: e.prior,
                        r: e.reward,
                        child: node_doc(&e.child),
                    })
                    .collect(),
            ),
            f: None,
        },
    }
}

pub fn parse_problem_str(text: &str) -> Result<SingleStepProblem> {
    let doc: ProblemDoc = serde_json::from_str(text).context("malformed problem document")?;
    doc.to_problem()
}

pub fn parse_tree_str(text: &str) -> Result<DecisionTree> {
    let doc: TreeDoc = serde_json::from_str(text).context("malformed tree document")?;
    doc.to_tree()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn parse_problem_file(path: &Path) -> Result<SingleStepProblem> {
    parse_problem_str(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn parse_tree_file(path: &Path) -> Result<DecisionTree> {
    parse_tree_str(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn problem_to_json(p: &SingleStepProblem) -> String {
    serde_json::to_string_pretty(&ProblemDoc::from_problem(p)).expect("plain data serializes")
}

pub fn tree_to_json(t: &DecisionTree) -> String {
    serde_json::to_string_pretty(&TreeDoc::from_tree(t)).expect("plain data serializes")
}
