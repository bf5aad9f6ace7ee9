//! Decision complexity `C(A|B) = −(1/α) log P(A|B)` and the finite measure
//! spaces used to check its decomposition over a choice partition.

use crate::error::{Error, Result};
use crate::math::neumaier_sum;

/// Information cost of narrowing a reference set down to a target set that
/// holds conditional probability `p`.
pub fn decision_complexity(p: f64, alpha: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "conditional probability must lie in (0, 1], got {p}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "complexity needs a positive finite alpha, got {alpha}"
        )));
    }
    // -0.0 for p = 1 would print oddly.
    Ok((-p.ln() / alpha).max(0.0))
}

/// A finite sample space with point masses and a labeled partition into cells
/// (the choice set).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasureSpace {
    masses: Vec<f64>,
    cell_of: Vec<usize>,
    cell_labels: Vec<String>,
}

/// A subset of the points of a [`FiniteMeasureSpace`], as a membership mask.
pub type PointSet = Vec<bool>;

impl FiniteMeasureSpace {
    /// `cell_of[i]` is the index into `cell_labels` of the cell containing
    /// point `i`. Cells are disjoint and exhaustive by construction.
    pub fn new(masses: Vec<f64>, cell_of: Vec<usize>, cell_labels: Vec<String>) -> Result<Self> {
        if masses.len() != cell_of.len() {
            return Err(Error::LengthMismatch {
                what: "cell assignment",
                expected: masses.len(),
                got: cell_of.len(),
            });
        }
        if let Some(&m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidArgument(format!("point mass {m} is not a nonnegative real")));
        }
        if let Some(&c) = cell_of.iter().find(|c| **c >= cell_labels.len()) {
            return Err(Error::InvalidArgument(format!("cell index {c} out of range")));
        }
        Ok(Self {
            masses,
            cell_of,
            cell_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.cell_labels.len()
    }

    pub fn cell_labels(&self) -> &[String] {
        &self.cell_labels
    }

    pub fn measure(&self, set: &[bool]) -> f64 {
        neumaier_sum(
            self.masses
                .iter()
                .zip(set)
                .filter(|(_, inside)| **inside)
                .map(|(m, _)| *m),
        )
    }

    /// `P(A|B)`; requires `A ⊂ B` and `P(B) > 0`.
    pub fn conditional(&self, a: &[bool], b: &[bool]) -> Result<f64> {
        if a.iter().zip(b).any(|(x, y)| *x && !*y) {
            return Err(Error::InvalidArgument("target set is not nested in the reference set".into()));
        }
        let mb = self.measure(b);
        if mb <= 0.0 {
            return Err(Error::InvalidArgument("reference set has zero measure".into()));
        }
        Ok(self.measure(a) / mb)
    }

    pub fn complexity(&self, a: &[bool], b: &[bool], alpha: f64) -> Result<f64> {
        decision_complexity(self.conditional(a, b)?, alpha)
    }

    /// `x ∩ set` for cell `x`.
    pub fn restrict_to_cell(&self, cell: usize, set: &[bool]) -> PointSet {
        set.iter()
            .zip(&self.cell_of)
            .map(|(inside, c)| *inside && *c == cell)
            .collect()
    }

    /// The distribution over cells induced by conditioning on `set`:
    /// `P(x | set)`.
    pub fn cell_distribution(&self, set: &[bool]) -> Vec<f64> {
        let total = self.measure(set);
        let mut per_cell = vec![Vec::new(); self.cell_count()];
        for ((m, c), inside) in self.masses.iter().zip(&self.cell_of).zip(set) {
            if *inside {
                per_cell[*c].push(*m);
            }
        }
        per_cell
            .into_iter()
            .map(|ms| neumaier_sum(ms) / total)
            .collect()
    }

    /// Splits `C(P|Q)` into the expected per-cell complexity
    /// `Σ_x P(x|P) C(x∩P | x∩Q)` and the information penalty
    /// `(1/α) KL(P(·|P) ‖ P(·|Q))`, returned in that order.
    pub fn complexity_decomposition(
        &self,
        target: &[bool],
        reference: &[bool],
        alpha: f64,
    ) -> Result<(f64, f64)> {
        let posterior = self.cell_distribution(target);
        let prior = self.cell_distribution(reference);
        let mut expected = Vec::new();
        for (cell, &w) in posterior.iter().enumerate() {
            if w > 0.0 {
                let a = self.restrict_to_cell(cell, target);
                let b = self.restrict_to_cell(cell, reference);
                expected.push(w * self.complexity(&a, &b, alpha)?);
            }
        }
        let kl = crate::math::kl_divergence(&posterior, &prior)
            .map_err(|i| Error::SupportViolation {
                label: self.cell_labels[i].clone(),
            })?;
        Ok((neumaier_sum(expected), kl / alpha))
    }
}
