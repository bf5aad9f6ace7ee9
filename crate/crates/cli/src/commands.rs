//! The subcommands, each rendering a CSV table into a string.

use anyhow::{bail, ensure, Context, Result};
use brplan_core::{
    backward_induction, build_ellsberg_tree, certainty_equivalent, equivalent_problem, gibbs_posterior,
    global_target_bound, has_mixed_signs, path_masses, sample_path_until_accept, success_probability,
    summarize_ellsberg, two_step_tree, DecisionTree, EllsbergColor, NodeId, PlannerOptions,
    RejectionSampler, RngStream, SingleStepProblem, CHANCE_ALPHA,
};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::output::{num, Table};

/// Column reference printed by `--help`.
pub const PROBLEM_COLUMNS: &str = "\
CSV columns (one row per outcome):
  outcome               outcome id
  prior                 prior probability Q(x)
  utility               utility U(x)
  posterior             Gibbs posterior P(x) proportional to Q(x) exp(alpha U(x))
  certainty_equivalent  (1/alpha) log Z, repeated on every row
  success_probability   acceptance probability Z / exp(alpha U*) for the target, empty without one
  equivalent_utility    utility of the equivalent problem at --beta, empty without it";

pub const SOLVE_COLUMNS: &str = "\
CSV columns:
  record  `node` for a (node, edge) pair or a leaf, `marginal` for an edge label aggregated over a depth
  node    node path, edge labels joined by '/', the root is 'ε' (empty for marginal rows)
  depth   depth of the node taking the edge
  alpha   inverse temperature of the node (empty for leaves and marginal rows)
  value   certainty-equivalent F of the node (empty for marginal rows)
  edge    edge label (empty for leaves)
  prior   prior probability of the edge
  reward  reward of the edge
  policy  optimal probability of the edge given the node
  mass    probability that the optimal path takes this edge (for marginal rows: any edge with this label at this depth)
Node rows follow the tree in path order (edges in declared order); marginal rows follow by depth, then first appearance of the label.";

pub const SAMPLE_COLUMNS: &str = "\
CSV columns:
  record           `sample` for a planner run, `frequency` for a leaf summary
  index            sample index (empty for frequency rows)
  accepted         true if a path was accepted within --max-attempts
  path             accepted path, edge labels joined by '/' (empty if rejected)
  attempts         root attempts spent
  proposals        edge proposals drawn across the whole recursion
  base_trials      leaf accept/reject tests performed
  recursive_calls  recursive sampler calls below the root
  count            accepted samples ending in this leaf (frequency rows)
  frequency        count divided by the number of accepted samples
  oracle           exact path probability from backward induction
No rows at all are written for --samples 0.";

pub const SWEEP_COLUMNS: &str = "\
CSV columns (one row per alpha):
  alpha                     inverse temperature
  mean_utility              mean utility of the accepted policies
  decile10                  10% nearest-rank quantile of the accepted utilities
  decile90                  90% nearest-rank quantile of the accepted utilities
  mean_trials               mean number of policies inspected per run
  analytic_expected_trials  exact 1/p_alpha by summation over all policies";

pub const MAP_COLUMNS: &str = "\
CSV columns (one row per (alpha, beta) pair):
  alpha   agent inverse temperature at the root (0 is replaced by 1e-6)
  beta    environment inverse temperature at depth 1 (0 is replaced by 1e-6)
  value   certainty-equivalent of the root
  p_aK    optimal probability of action K";

pub const ELLSBERG_COLUMNS: &str = "\
CSV columns (one row):
  winning_color  color that pays 1
  theta_alpha    inverse temperature of the urn-composition node (negative)
  bet_alpha      inverse temperature of the bet (positive)
  draw_alpha     inverse temperature of the draw (positive)
  p_left         probability of betting on the known urn
  p_right        probability of betting on the ambiguous urn
  theta_tilt     mean number of black balls under the optimal composition row minus 50
  root_value     certainty-equivalent of the root";

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Solves a single-step problem. `target` overrides the file's target.
pub fn problem(p: &SingleStepProblem, target: Option<f64>, beta: Option<f64>) -> Result<String> {
    let posterior = gibbs_posterior(p)?;
    let ce = certainty_equivalent(p)?;
    let target = target.or(p.target());
    let success = target.map(|t| success_probability(p, t)).transpose()?;
    let equivalent = beta.map(|b| equivalent_problem(p, b)).transpose()?;
    let mut table = Table::new(&[
        "outcome",
        "prior",
        "utility",
        "posterior",
        "certainty_equivalent",
        "success_probability",
        "equivalent_utility",
    ])?;
    for i in 0..p.len() {
        table.row([
            p.outcomes()[i].clone(),
            num(p.prior().probs()[i]),
            num(p.utility()[i]),
            num(posterior.probs()[i]),
            num(ce),
            opt(success),
            opt(equivalent.as_ref().map(|v| v.utility()[i])),
        ])?;
    }
    table.finish()
}

/// Exact solution of a tree by backward induction.
pub fn solve(t: &DecisionTree) -> Result<String> {
    let solution = backward_induction(t);
    let mut reach = vec![0.0; t.len()];
    reach[NodeId::ROOT.0] = 1.0;
    let mut table = Table::new(&["record", "node", "depth", "alpha", "value", "edge", "prior", "reward", "policy", "mass"])?;
    // (depth, label) -> mass, kept in first-appearance order.
    let mut marginals: Vec<(usize, String, f64)> = Vec::new();
    for id in t.ids() {
        let depth = t.node(id).depth;
        let path = t.path_string(id);
        let value = num(solution.value(id));
        let Some(row) = solution.policy.row(id) else {
            table.row(["node", &path, &depth.to_string(), "", &value, "", "", "", "", ""])?;
            continue;
        };
        let alpha = num(t.alpha(id).expect("internal"));
        for (e, p) in t.edges(id).iter().zip(row) {
            let mass = reach[id.0] * p;
            reach[e.child.0] = mass;
            table.row([
                "node",
                &path,
                &depth.to_string(),
                &alpha,
                &value,
                &e.label,
                &num(e.prior),
                &num(e.reward),
                &num(*p),
                &num(mass),
            ])?;
            match marginals.iter_mut().find(|(d, l, _)| *d == depth && *l == e.label) {
                Some(m) => m.2 += mass,
                None => marginals.push((depth, e.label.clone(), mass)),
            }
        }
    }
    marginals.sort_by_key(|(d, _, _)| *d);
    for (depth, label, mass) in marginals {
        table.row(["marginal", "", &depth.to_string(), "", "", &label, "", "", "", &num(mass)])?;
    }
    table.finish()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub seed: u64,
    pub samples: u64,
    /// Defaults to the tight bound over all paths.
    pub target: Option<f64>,
    pub max_attempts: u64,
    pub allow_mixed_signs: bool,
}

/// Draws `samples` paths with the recursive planner, sample `i` on stream
/// `i` of the seed.
pub fn sample(t: &DecisionTree, cfg: &SampleConfig) -> Result<String> {
    let mut table = Table::new(&[
        "record",
        "index",
        "accepted",
        "path",
        "attempts",
        "proposals",
        "base_trials",
        "recursive_calls",
        "count",
        "frequency",
        "oracle",
    ])?;
    if cfg.samples == 0 {
        return table.finish();
    }
    ensure!(
        cfg.allow_mixed_signs || !has_mixed_signs(t),
        "the tree mixes positive and negative temperatures; pass --allow-mixed-signs to run the experimental sampler"
    );
    let u_star = cfg.target.unwrap_or_else(|| global_target_bound(t));
    let options = PlannerOptions {
        allow_mixed_signs: cfg.allow_mixed_signs,
    };
    let reports = (0..cfg.samples)
        .into_par_iter()
        .map(|i| sample_path_until_accept(t, u_star, &mut RngStream::new(cfg.seed, i), cfg.max_attempts, options))
        .collect::<brplan_core::Result<Vec<_>>>()?;
    let mut counts = vec![0u64; t.len()];
    for (i, r) in reports.iter().enumerate() {
        if let Some(leaf) = r.payload {
            counts[leaf.0] += 1;
        }
        table.row([
            "sample".to_string(),
            i.to_string(),
            r.accepted.to_string(),
            r.payload.map(|l| t.path_string(l)).unwrap_or_default(),
            r.attempts.to_string(),
            r.proposals_drawn.to_string(),
            r.base_trials.to_string(),
            r.elapsed_trial_depth.to_string(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    let accepted: u64 = counts.iter().sum();
    let oracle = path_masses(t, &backward_induction(t).policy);
    for (leaf, mass) in oracle {
        let c = counts[leaf.0];
        let freq = if accepted > 0 { num(c as f64 / accepted as f64) } else { String::new() };
        table.row([
            "frequency".to_string(),
            String::new(),
            String::new(),
            t.path_string(leaf),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            c.to_string(),
            freq,
            num(mass),
        ])?;
    }
    table.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub enum UtilityShape {
    /// `(i/(N−1))²` for `i = 0..N`.
    Square,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Ignored for a custom table, whose length is the policy count.
    pub policy_count: usize,
    pub utility_shape: UtilityShape,
    pub alpha_grid: Vec<f64>,
    pub runs_per_alpha: usize,
    pub target: f64,
    pub seed: u64,
    pub max_attempts: u64,
}

pub const DEFAULT_SWEEP_GRID: [f64; 7] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            policy_count: 100_000,
            utility_shape: UtilityShape::Square,
            alpha_grid: DEFAULT_SWEEP_GRID.to_vec(),
            runs_per_alpha: 300,
            target: 1.0,
            seed: 0,
            max_attempts: u64::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub mean_utility: f64,
    pub decile10: f64,
    pub decile90: f64,
    pub mean_trials: f64,
    pub analytic_expected_trials: f64,
}

/// Smallest element with at least a fraction `q` of the sorted data at or
/// below it.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn sweep_utilities(cfg: &SweepConfig) -> Vec<f64> {
    let mut u = match &cfg.utility_shape {
        UtilityShape::Custom(table) => table.clone(),
        UtilityShape::Square => {
            let n = cfg.policy_count;
            let step = if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
            (0..n).map(|i| (i as f64 * step).powi(2)).collect()
        }
    };
    // Random assignment of utilities to policies; stream 0 is reserved for it.
    u.shuffle(&mut RngStream::new(cfg.seed, 0));
    u
}

/// Runs `runs_per_alpha` independent satisficing searches per grid value
/// under a uniform prior over the policies.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    ensure!(cfg.runs_per_alpha >= 1, "runs per alpha must be at least 1");
    ensure!(!cfg.alpha_grid.is_empty(), "the alpha grid is empty");
    ensure!(cfg.max_attempts >= 1, "max attempts must be at least 1");
    if let UtilityShape::Custom(t) = &cfg.utility_shape {
        ensure!(!t.is_empty(), "the utility table is empty");
    } else {
        ensure!(cfg.policy_count >= 1, "the policy count must be at least 1");
    }
    let base = SingleStepProblem::uniform(1.0, sweep_utilities(cfg), Some(cfg.target))?;
    let runs = cfg.runs_per_alpha as u64;
    let mut rows = Vec::with_capacity(cfg.alpha_grid.len());
    for (a, &alpha) in cfg.alpha_grid.iter().enumerate() {
        let p = base.with_alpha(alpha)?;
        let sampler = RejectionSampler::new(&p, cfg.target).with_context(|| format!("alpha {alpha}"))?;
        let analytic = 1.0 / success_probability(&p, cfg.target)?;
        let first = 1 + a as u64 * runs;
        let reports: Vec<_> = (0..runs)
            .into_par_iter()
            .map(|r| sampler.sample(&mut RngStream::new(cfg.seed, first + r), cfg.max_attempts))
            .collect();
        let mut accepted: Vec<f64> = reports.iter().filter_map(|r| r.payload).map(|x| p.utility()[x]).collect();
        let trials: u64 = reports.iter().map(|r| r.proposals_drawn).sum();
        let (mean, lo, hi) = if accepted.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            accepted.sort_by(f64::total_cmp);
            let mean = accepted.iter().sum::<f64>() / accepted.len() as f64;
            (mean, nearest_rank(&accepted, 0.1), nearest_rank(&accepted, 0.9))
        };
        rows.push(SweepRow {
            alpha,
            mean_utility: mean,
            decile10: lo,
            decile90: hi,
            mean_trials: trials as f64 / runs as f64,
            analytic_expected_trials: analytic,
        });
    }
    Ok(rows)
}

pub fn sweep(cfg: &SweepConfig) -> Result<String> {
    let mut table = Table::new(&[
        "alpha",
        "mean_utility",
        "decile10",
        "decile90",
        "mean_trials",
        "analytic_expected_trials",
    ])?;
    for r in sweep_rows(cfg)? {
        table.row([r.alpha, r.mean_utility, r.decile10, r.decile90, r.mean_trials, r.analytic_expected_trials].map(num))?;
    }
    table.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Leaf values per action; uniform priors at both levels.
    pub leaves: Vec<Vec<f64>>,
}

impl Default for MapConfig {
    fn default() -> Self {
        let grid = vec![-50.0, -5.0, -0.5, 0.0, 0.5, 5.0, 50.0];
        Self {
            alphas: grid.clone(),
            betas: grid,
            leaves: vec![vec![0.0, 1.0], vec![0.3, 0.5]],
        }
    }
}

fn nonzero(x: f64) -> f64 {
    if x == 0.0 {
        CHANCE_ALPHA
    } else {
        x
    }
}

/// Root values of two-step agent/environment trees over an `(α, β)` grid.
pub fn map(cfg: &MapConfig) -> Result<String> {
    ensure!(!cfg.alphas.is_empty() && !cfg.betas.is_empty(), "both grids must be nonempty");
    let mut header = vec!["alpha".to_string(), "beta".to_string(), "value".to_string()];
    header.extend((1..=cfg.leaves.len()).map(|k| format!("p_a{k}")));
    let mut table = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>())?;
    for &a in &cfg.alphas {
        for &b in &cfg.betas {
            let (a, b) = (nonzero(a), nonzero(b));
            let t = two_step_tree(a, b, &cfg.leaves)?;
            let s = backward_induction(&t);
            let mut row = vec![num(a), num(b), num(s.root_value())];
            row.extend(s.policy.row(t.root()).expect("internal root").iter().map(|p| num(*p)));
            table.row(row)?;
        }
    }
    table.finish()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllsbergConfig {
    pub theta_alpha: f64,
    pub bet_alpha: f64,
    pub draw_alpha: f64,
    pub winning: EllsbergColor,
}

impl Default for EllsbergConfig {
    fn default() -> Self {
        Self {
            theta_alpha: -10.0,
            bet_alpha: 10.0,
            draw_alpha: CHANCE_ALPHA,
            winning: EllsbergColor::Black,
        }
    }
}

impl EllsbergConfig {
    pub fn tree(&self) -> Result<DecisionTree> {
        Ok(build_ellsberg_tree(self.theta_alpha, self.bet_alpha, self.draw_alpha, self.winning)?)
    }
}

pub fn ellsberg(cfg: &EllsbergConfig) -> Result<String> {
    let s = summarize_ellsberg(&cfg.tree()?)?;
    let color = match cfg.winning {
        EllsbergColor::Black => "black",
        EllsbergColor::White => "white",
    };
    let mut table = Table::new(&[
        "winning_color",
        "theta_alpha",
        "bet_alpha",
        "draw_alpha",
        "p_left",
        "p_right",
        "theta_tilt",
        "root_value",
    ])?;
    let mut row = vec![color.to_string()];
    row.extend(
        [cfg.theta_alpha, cfg.bet_alpha, cfg.draw_alpha, s.p_left, s.p_right, s.theta_tilt, s.root_value].map(num),
    );
    table.row(row)?;
    table.finish()
}

/// Parses `"0,1;0.3,0.5"` into leaf values per action.
pub fn parse_leaves(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|group| {
            group
                .split(',')
                .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad leaf value `{v}`")))
                .collect()
        })
        .collect()
}

/// Reads one utility per nonempty line.
pub fn parse_utilities(text: &str) -> Result<Vec<f64>> {
    let values = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.trim().parse::<f64>().with_context(|| format!("line {}: bad utility `{}`", i + 1, l.trim())))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("the utility table is empty");
    }
    Ok(values)
}
