//! Fixed, seeded workloads shared by the benchmarks in `benches/`.

use brplan_core::generate::{self, Temperatures, TreeShape};
use brplan_core::{DecisionTree, RngStream, SingleStepProblem};

/// Problem with `n` outcomes and `α = 5`.
pub fn problem(n: usize) -> SingleStepProblem {
    let p = generate::problem(&mut RngStream::new(1, n as u64), n, (1.0, 2.0), 0.0);
    p.with_alpha(5.0).expect("nonzero temperature")
}

/// Full tree of the given depth and branching with positive temperatures.
pub fn tree(depth: usize, branching: usize) -> DecisionTree {
    let shape = TreeShape {
        max_depth: depth,
        max_branching: branching,
        temperatures: Temperatures::Uniform(0.5, 3.0),
        grid: 0,
        early_leaf_rate: 0.0,
    };
    generate::tree(&mut RngStream::new(2, (depth * 100 + branching) as u64), &shape)
}
