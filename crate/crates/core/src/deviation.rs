//! Deviation minimization: given greedy endpoints and a spanning tree to
//! realize, find end-of-epoch positions inside each robot's reachable disk
//! that keep every tree edge within communication range, keep robots at
//! least `r_s` apart, and move as little as possible (weighted) from the
//! greedy endpoints.
//!
//! The safety constraints make the problem non-convex, so the solver is a
//! multi-start augmented Lagrangian method. Reach disks are handled exactly
//! by projection; tree and safety constraints are penalized with PHR
//! multipliers. An exhaustive grid search is provided as a reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CsmError, Result};
use crate::geometry::{Disk, Point};
use crate::netgraph::{is_connected, mst_within, ProximityGraph, SpanningTree, WeightedCompleteGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveMode {
    /// `Σ w_i ‖x_i − x_i^g‖`
    Norm,
    /// `Σ w_i ‖x_i − x_i^g‖²`
    #[default]
    SquaredNorm,
}

impl ObjectiveMode {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveMode::Norm => "norm",
            ObjectiveMode::SquaredNorm => "squared_norm",
        }
    }

    fn cost(self, d: f64) -> f64 {
        match self {
            ObjectiveMode::Norm => d,
            ObjectiveMode::SquaredNorm => d * d,
        }
    }
}

impl std::str::FromStr for ObjectiveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "norm" => Ok(ObjectiveMode::Norm),
            "squared_norm" | "squared" => Ok(ObjectiveMode::SquaredNorm),
            other => Err(format!("unknown objective mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeviationProblem {
    /// Start-of-epoch positions; centers of the reach disks.
    pub current: Vec<Point>,
    pub greedy: Vec<Point>,
    pub reach: Vec<f64>,
    pub weights: Vec<f64>,
    pub tree: SpanningTree,
    pub r_c: f64,
    pub r_s: f64,
    pub mode: ObjectiveMode,
}

/// Largest violation of each constraint family, in meters (0 when satisfied).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub tree: f64,
    pub reach: f64,
    pub safety: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.tree.max(self.reach).max(self.safety)
    }
}

impl DeviationProblem {
    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.current.len();
        let bad = |m: String| Err(CsmError::InvalidProblem(m));
        if n == 0 {
            return bad("no robots".into());
        }
        if self.greedy.len() != n || self.reach.len() != n || self.weights.len() != n {
            return bad("per-robot vectors differ in length".into());
        }
        if self.tree.n != n {
            return bad(format!("tree spans {} vertices, team has {n}", self.tree.n));
        }
        if !(self.r_s >= 0.0 && self.r_c > self.r_s) {
            return bad(format!("need r_c > r_s >= 0, got r_c={} r_s={}", self.r_c, self.r_s));
        }
        for i in 0..n {
            if !(self.weights[i] >= 0.0) {
                return bad(format!("weight {i} is negative"));
            }
            if !(self.reach[i] > 0.0) {
                return bad(format!("reach radius {i} must be positive"));
            }
            let d = (self.greedy[i] - self.current[i]).norm();
            if d > self.reach[i] * (1.0 + 1e-9) + 1e-9 {
                return bad(format!("greedy endpoint {i} lies outside its reach disk"));
            }
        }
        Ok(())
    }

    pub fn disk(&self, i: usize) -> Disk {
        Disk::new(self.current[i], self.reach[i])
    }

    pub fn objective(&self, x: &[Point]) -> f64 {
        x.iter()
            .zip(&self.greedy)
            .zip(&self.weights)
            .map(|((xi, gi), wi)| wi * self.mode.cost((xi - gi).norm()))
            .sum()
    }

    pub fn residuals(&self, x: &[Point]) -> Residuals {
        residuals_for(self, &self.tree, x)
    }
}

fn residuals_for(p: &DeviationProblem, tree: &SpanningTree, x: &[Point]) -> Residuals {
    let mut r = Residuals::default();
    for &(i, j) in &tree.edges {
        r.tree = r.tree.max((x[i] - x[j]).norm() - p.r_c);
    }
    for (i, xi) in x.iter().enumerate() {
        r.reach = r.reach.max((xi - p.current[i]).norm() - p.reach[i]);
    }
    if p.r_s > 0.0 {
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                r.safety = r.safety.max(p.r_s - (x[i] - x[j]).norm());
            }
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    OptimalLocal,
    Fallback,
    InfeasibleReported,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::OptimalLocal => "optimal_local",
            SolveStatus::Fallback => "fallback",
            SolveStatus::InfeasibleReported => "infeasible_reported",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeviationSolution {
    pub positions: Vec<Point>,
    pub objective: f64,
    pub status: SolveStatus,
    pub residuals: Residuals,
    /// Tree the positions realize; differs from the requested tree only for
    /// fallback solutions.
    pub tree: SpanningTree,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Feasibility tolerance in meters.
    pub tol: f64,
    /// Projected-gradient steps per augmented Lagrangian round.
    pub max_iter: usize,
    pub outer_rounds: usize,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    /// Greedy endpoints, current positions, then random blends of the two.
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_iter: 200,
            outer_rounds: 5,
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            n_starts: 4,
            seed: 0,
        }
    }
}

/// Width of the quadratic zone used to smooth `‖·‖` at the origin.
const HUBER_WIDTH: f64 = 1e-5;

/// Tightened constraint set plus PHR multipliers for one local solve.
struct Lagrangian<'a> {
    p: &'a DeviationProblem,
    weights: Vec<f64>,
    r_c: f64,
    r_s: f64,
    pairs: Vec<(usize, usize)>,
    tree_mult: Vec<f64>,
    safety_mult: Vec<f64>,
    rho: f64,
}

impl<'a> Lagrangian<'a> {
    fn new(p: &'a DeviationProblem, weights: Vec<f64>, margin: f64, rho: f64) -> Self {
        let n = p.len();
        let pairs = if p.r_s > 0.0 {
            (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .collect()
        } else {
            Vec::new()
        };
        Lagrangian {
            p,
            weights,
            r_c: p.r_c - margin,
            r_s: if p.r_s > 0.0 { p.r_s + margin } else { 0.0 },
            tree_mult: vec![0.0; p.tree.edges.len()],
            safety_mult: vec![0.0; pairs.len()],
            pairs,
            rho,
        }
    }

    /// Value of the augmented Lagrangian; writes its gradient into `grad`.
    fn eval(&self, x: &[Point], grad: &mut [Point]) -> f64 {
        let mut total = 0.0;
        for (i, g) in grad.iter_mut().enumerate() {
            let delta = x[i] - self.p.greedy[i];
            let w = self.weights[i];
            match self.p.mode {
                ObjectiveMode::SquaredNorm => {
                    total += w * delta.norm_squared();
                    *g = delta * (2.0 * w);
                }
                ObjectiveMode::Norm => {
                    let d = delta.norm();
                    if d >= HUBER_WIDTH {
                        total += w * (d - 0.5 * HUBER_WIDTH);
                        *g = delta * (w / d);
                    } else {
                        total += w * d * d / (2.0 * HUBER_WIDTH);
                        *g = delta * (w / HUBER_WIDTH);
                    }
                }
            }
        }
        let rho = self.rho;
        for (k, &(i, j)) in self.p.tree.edges.iter().enumerate() {
            let diff = x[i] - x[j];
            let d = diff.norm();
            let shifted = (d - self.r_c + self.tree_mult[k] / rho).max(0.0);
            total += 0.5 * rho * shifted * shifted;
            if shifted > 0.0 && d > 0.0 {
                let step = diff * (rho * shifted / d);
                grad[i] += step;
                grad[j] -= step;
            }
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let diff = x[i] - x[j];
            let d = diff.norm();
            let shifted = (self.r_s - d + self.safety_mult[k] / rho).max(0.0);
            total += 0.5 * rho * shifted * shifted;
            if shifted > 0.0 {
                let dir = if d > 0.0 {
                    diff / d
                } else {
                    // coincident robots: push apart along a fixed direction
                    let angle = k as f64;
                    Point::new(angle.cos(), angle.sin())
                };
                let step = dir * (rho * shifted);
                grad[i] -= step;
                grad[j] += step;
            }
        }
        total
    }

    /// Violations of the tightened constraints (positive when violated).
    fn violations(&self, x: &[Point]) -> (Vec<f64>, Vec<f64>) {
        let tree = self
            .p
            .tree
            .edges
            .iter()
            .map(|&(i, j)| (x[i] - x[j]).norm() - self.r_c)
            .collect();
        let safety = self
            .pairs
            .iter()
            .map(|&(i, j)| self.r_s - (x[i] - x[j]).norm())
            .collect();
        (tree, safety)
    }

    fn project(&self, x: &mut [Point]) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = self.p.disk(i).project(xi);
        }
    }

    /// Projected gradient with Barzilai-Borwein steps and Armijo backtracking.
    fn minimize(&self, x: &mut Vec<Point>, max_iter: usize) {
        let n = x.len();
        let mut grad = vec![Point::zeros(); n];
        let mut value = self.eval(x, &mut grad);
        let mut alpha = 1.0 / self.rho.max(1.0);
        let mut trial = vec![Point::zeros(); n];
        let mut trial_grad = vec![Point::zeros(); n];
        for _ in 0..max_iter {
            // stationarity: unit projected-gradient step
            let mut probe: Vec<Point> = x.iter().zip(&grad).map(|(xi, gi)| xi - gi).collect();
            self.project(&mut probe);
            let stationarity = probe
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (a - b).amax())
                .fold(0.0, f64::max);
            if stationarity < 1e-10 {
                break;
            }
            let mut accepted = false;
            for _ in 0..60 {
                for i in 0..n {
                    trial[i] = x[i] - grad[i] * alpha;
                }
                self.project(&mut trial);
                let descent: f64 = (0..n).map(|i| grad[i].dot(&(trial[i] - x[i]))).sum();
                let trial_value = self.eval(&trial, &mut trial_grad);
                if trial_value <= value + 1e-4 * descent {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
            let mut ss = 0.0;
            let mut sy = 0.0;
            for i in 0..n {
                let s = trial[i] - x[i];
                let y = trial_grad[i] - grad[i];
                ss += s.norm_squared();
                sy += s.dot(&y);
            }
            std::mem::swap(x, &mut trial);
            std::mem::swap(&mut grad, &mut trial_grad);
            value = self.eval(x, &mut grad);
            if ss == 0.0 {
                break;
            }
            alpha = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e6) } else { alpha * 4.0 };
        }
    }
}

/// One augmented Lagrangian run from `start`.
fn local_solve(p: &DeviationProblem, weights: &[f64], start: &[Point], opts: &SolverOptions) -> Vec<Point> {
    let margin = opts.tol;
    let mut al = Lagrangian::new(p, weights.to_vec(), margin, opts.initial_penalty);
    let mut x = start.to_vec();
    al.project(&mut x);
    let mut previous = f64::INFINITY;
    for _ in 0..opts.outer_rounds {
        al.minimize(&mut x, opts.max_iter);
        let (tree, safety) = al.violations(&x);
        let worst = tree.iter().chain(&safety).fold(0.0f64, |m, v| m.max(*v));
        let rho = al.rho;
        for (m, v) in al.tree_mult.iter_mut().zip(&tree) {
            *m = (*m + rho * v).max(0.0);
        }
        for (m, v) in al.safety_mult.iter_mut().zip(&safety) {
            *m = (*m + rho * v).max(0.0);
        }
        if worst <= 0.5 * margin {
            break;
        }
        if worst > 0.25 * previous {
            al.rho = (al.rho * opts.penalty_growth).min(1e10);
        }
        previous = worst;
    }
    if residuals_for(p, &p.tree, &x).max() > 0.0 {
        restore_feasibility(p, &mut x, margin, opts.max_iter * 10);
    }
    x
}

/// Drives `x` towards the tightened feasible set, ignoring the objective.
fn restore_feasibility(p: &DeviationProblem, x: &mut Vec<Point>, margin: f64, max_iter: usize) {
    let zero = vec![0.0; p.len()];
    let mut al = Lagrangian::new(p, zero, margin, 1.0);
    for _ in 0..4 {
        al.minimize(x, max_iter);
        let (tree, safety) = al.violations(x);
        if tree.iter().chain(&safety).all(|v| *v <= 0.5 * margin) {
            return;
        }
        al.rho *= 10.0;
    }
}

/// Solves the deviation problem from several starting points and keeps the
/// best feasible result. Reports `InfeasibleReported` when no start reaches
/// feasibility.
pub fn solve_deviation(p: &DeviationProblem, opts: &SolverOptions) -> Result<DeviationSolution> {
    p.validate()?;
    let n = p.len();
    // the unconstrained optimum is the greedy configuration itself
    if p.residuals(&p.greedy).max() <= 0.0 {
        return Ok(finish(p, p.greedy.clone(), SolveStatus::OptimalLocal));
    }

    // Normalizing makes the iterates invariant to a uniform rescaling of w.
    let w_max = p.weights.iter().fold(0.0f64, |m, w| m.max(*w));
    let weights: Vec<f64> = if w_max > 0.0 {
        p.weights.iter().map(|w| w / w_max).collect()
    } else {
        vec![0.0; n]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![p.greedy.clone(), p.current.clone()];
    while starts.len() < opts.n_starts.max(1) {
        let blend = (0..n)
            .map(|i| {
                let t: f64 = rng.random();
                p.greedy[i] * t + p.current[i] * (1.0 - t)
            })
            .collect();
        starts.push(blend);
    }
    starts.truncate(opts.n_starts.max(1));

    let mut best: Option<(f64, Vec<Point>)> = None;
    let mut least_infeasible: Option<(f64, Vec<Point>)> = None;
    for start in &starts {
        let x = local_solve(p, &weights, start, opts);
        let residual = p.residuals(&x).max();
        if residual <= opts.tol {
            let obj = p.objective(&x);
            let better = match &best {
                None => true,
                Some((b, _)) => obj < b - 1e-9 * (1.0 + b.abs()),
            };
            if better {
                best = Some((obj, x));
            }
        } else if least_infeasible.as_ref().is_none_or(|(r, _)| residual < *r) {
            least_infeasible = Some((residual, x));
        }
    }
    Ok(match (best, least_infeasible) {
        (Some((_, x)), _) => finish(p, x, SolveStatus::OptimalLocal),
        (None, Some((_, x))) => finish(p, x, SolveStatus::InfeasibleReported),
        (None, None) => unreachable!("at least one start is always tried"),
    })
}

fn finish(p: &DeviationProblem, positions: Vec<Point>, status: SolveStatus) -> DeviationSolution {
    DeviationSolution {
        objective: p.objective(&positions),
        residuals: p.residuals(&positions),
        status,
        tree: p.tree.clone(),
        positions,
    }
}

/// Largest number of joint configurations [`grid_oracle`] will consider.
pub const GRID_LIMIT: f64 = 1e7;

/// Exhaustive search over a square lattice (anchored at each greedy
/// endpoint, clipped to the reach disk). Exact up to `resolution`; intended
/// for teams of at most four robots.
pub fn grid_oracle(p: &DeviationProblem, resolution: f64) -> Result<DeviationSolution> {
    p.validate()?;
    let n = p.len();
    if n > 4 {
        return Err(CsmError::InstanceTooLarge {
            size: n as f64,
            limit: 4.0,
        });
    }
    if !(resolution > 0.0) {
        return Err(CsmError::InvalidProblem("grid resolution must be positive".into()));
    }
    // candidate points per robot, sorted by own cost
    let mut candidates: Vec<Vec<(f64, f64, Point)>> = Vec::with_capacity(n);
    // rough lattice count, to refuse hopeless instances before enumerating
    let estimate: f64 = (0..n)
        .map(|i| std::f64::consts::PI * (p.reach[i] / resolution + 1.0).powi(2))
        .product();
    if estimate > 4.0 * GRID_LIMIT {
        return Err(CsmError::InstanceTooLarge {
            size: estimate,
            limit: GRID_LIMIT,
        });
    }
    let mut size = 1.0;
    for i in 0..n {
        let disk = p.disk(i);
        let g = p.greedy[i];
        let span = ((2.0 * p.reach[i]) / resolution).ceil() as i64 + 1;
        let mut pts = vec![];
        for a in -span..=span {
            for b in -span..=span {
                let q = g + Point::new(a as f64, b as f64) * resolution;
                if disk.contains(&q) || (a == 0 && b == 0) {
                    let d = (q - g).norm();
                    pts.push((p.weights[i] * p.mode.cost(d), p.weights[i] * d * d, q));
                }
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        size *= pts.len() as f64;
        candidates.push(pts);
    }
    if size > GRID_LIMIT {
        return Err(CsmError::InstanceTooLarge {
            size,
            limit: GRID_LIMIT,
        });
    }

    // constraints checked when the later robot of a pair is placed
    let mut tree_adj = vec![vec![]; n];
    for &(i, j) in &p.tree.edges {
        tree_adj[i.max(j)].push(i.min(j));
    }
    // suffix sums of the cheapest candidate per robot
    let mut rest = vec![0.0; n + 1];
    for i in (0..n).rev() {
        rest[i] = rest[i + 1] + candidates[i][0].0;
    }

    struct Search<'a> {
        p: &'a DeviationProblem,
        candidates: &'a [Vec<(f64, f64, Point)>],
        tree_adj: &'a [Vec<usize>],
        rest: &'a [f64],
        chosen: Vec<Point>,
        best: Option<(f64, f64, Vec<Point>)>,
    }

    impl Search<'_> {
        // Equal costs are broken by the smaller weighted squared deviation,
        // which makes the answer unique in the degenerate norm case.
        fn run(&mut self, depth: usize, cost: f64, secondary: f64) {
            let n = self.candidates.len();
            if depth == n {
                let better = match &self.best {
                    None => true,
                    Some((b, b2, _)) => cost < *b - tie(*b) || (cost <= *b + tie(*b) && secondary < *b2),
                };
                if better {
                    self.best = Some((cost, secondary, self.chosen.clone()));
                }
                return;
            }
            for &(c, c2, q) in &self.candidates[depth] {
                let bound = cost + c + self.rest[depth + 1];
                if let Some((b, _, _)) = &self.best {
                    if bound > *b + tie(*b) {
                        break;
                    }
                }
                let ok_tree = self.tree_adj[depth]
                    .iter()
                    .all(|&j| (q - self.chosen[j]).norm() <= self.p.r_c);
                let ok_safety = self.p.r_s <= 0.0
                    || self.chosen[..depth]
                        .iter()
                        .all(|o| (q - o).norm() >= self.p.r_s);
                if ok_tree && ok_safety {
                    self.chosen[depth] = q;
                    self.run(depth + 1, cost + c, secondary + c2);
                }
            }
        }
    }

    fn tie(b: f64) -> f64 {
        1e-12 * b.abs().max(1.0)
    }

    let mut search = Search {
        p,
        candidates: &candidates,
        tree_adj: &tree_adj,
        rest: &rest,
        chosen: vec![Point::zeros(); n],
        best: None,
    };
    search.run(0, 0.0, 0.0);
    Ok(match search.best {
        Some((_, _, x)) => finish(p, x, SolveStatus::OptimalLocal),
        None => finish(p, p.current.clone(), SolveStatus::InfeasibleReported),
    })
}

/// The "stay" solution: every robot keeps its current position. When the
/// requested tree is not realized at the current positions it is replaced
/// by the cheapest spanning tree of `current_graph` (weighted by deviation
/// cost over the greedy endpoints), which stay always realizes.
pub fn feasibility_fallback(
    p: &DeviationProblem,
    current_graph: &ProximityGraph,
) -> Result<DeviationSolution> {
    if !is_connected(current_graph) {
        return Err(CsmError::Disconnected);
    }
    let stay = p.current.clone();
    let realized = p
        .tree
        .edges
        .iter()
        .all(|&(i, j)| (stay[i] - stay[j]).norm() <= p.r_c);
    let tree = if realized {
        p.tree.clone()
    } else {
        let k = WeightedCompleteGraph::from_endpoints(&p.greedy, p.r_c);
        mst_within(&k, current_graph).ok_or(CsmError::Disconnected)?
    };
    Ok(DeviationSolution {
        objective: p.objective(&stay),
        residuals: residuals_for(p, &tree, &stay),
        status: SolveStatus::Fallback,
        tree,
        positions: stay,
    })
}
