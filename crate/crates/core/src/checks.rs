//! Randomized correctness checks against exhaustive oracles.
//!
//! Each routine builds small random instances from a seed, compares the
//! fast algorithm with an exact (or near-exact) reference, and counts
//! violations. The CLI `check` command and the acceptance tests both run
//! these.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deviation::{grid_oracle, solve_deviation, DeviationProblem, ObjectiveMode, SolveStatus, SolverOptions};
use crate::geometry::{point, Disk, Point};
use crate::netgraph::{bottleneck, build_proximity_graph, is_connected, mst, SpanningTree, WeightedCompleteGraph};
use crate::submodular::{brute_force_opt, greedy_partition_matroid, sgg, PartitionedGroundSet, SetFunction, Trajectory};
use crate::tracking::coverage::CoverageObjective;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    /// Worst observed ratio or margin, free-form.
    pub detail: String,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.violations == 0
    }

    /// The report without its verdict.
    pub fn outcome(&self) -> String {
        format!(
            "{}: {} cases, {} violations; {}",
            self.name, self.cases, self.violations, self.detail
        )
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}", self.outcome())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_point<R: Rng>(rng: &mut R, side: f64) -> Point {
    point(rng.random_range(0.0..side), rng.random_range(0.0..side))
}

/// Greedy value against the brute-force optimum on instances with at most
/// four robots and five trajectories each.
pub fn check_greedy_bound(cases: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let anywhere = Disk::new(Point::zeros(), 1e9);
    for _ in 0..cases {
        let n = rng.random_range(1..=4);
        let groups = (0..n)
            .map(|i| {
                let k = rng.random_range(1..=5);
                (0..k)
                    .map(|t| Trajectory::new(i, t, random_point(&mut rng, 20.0), &anywhere).expect("unbounded reach"))
                    .collect()
            })
            .collect();
        let ground = PartitionedGroundSet::new(groups).expect("well-formed groups");
        let m = rng.random_range(5..=40);
        let targets = (0..m).map(|_| random_point(&mut rng, 20.0)).collect();
        let f = CoverageObjective::new(targets, rng.random_range(2.0..6.0));
        let g = greedy_partition_matroid(&f, &ground).expect("non-empty groups");
        let opt = brute_force_opt(&f, &ground).expect("small instance");
        if opt.value > 0.0 {
            worst = worst.min(g.value / opt.value);
        }
        if g.value < 0.5 * opt.value {
            violations += 1;
        }
    }
    CheckReport {
        name: "greedy >= 1/2 optimum".into(),
        cases,
        violations,
        detail: format!("worst greedy/opt ratio {worst:.3}"),
    }
}

/// Every labelled spanning tree on `n` vertices, via Prüfer sequences.
pub fn all_spanning_trees(n: usize) -> Vec<SpanningTree> {
    match n {
        0 => return vec![],
        1 => return vec![SpanningTree::new(1, vec![]).expect("trivial tree")],
        2 => return vec![SpanningTree::new(2, vec![(0, 1)]).expect("single edge")],
        _ => {}
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut seq = Vec::with_capacity(len);
        let mut c = code;
        for _ in 0..len {
            seq.push(c % n);
            c /= n;
        }
        let mut degree = vec![1usize; n];
        for &v in &seq {
            degree[v] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        for &v in &seq {
            let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf always exists");
            edges.push((leaf.min(v), leaf.max(v)));
            degree[leaf] -= 1;
            degree[v] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
        edges.push((rest[0], rest[1]));
        out.push(SpanningTree::new(n, edges).expect("Prüfer decoding yields a tree"));
    }
    out
}

/// MST total weight and bottleneck against enumeration of every spanning
/// tree of random complete graphs with at most six vertices.
pub fn check_mst_exhaustive(cases: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let mut violations = 0;
    for case in 0..cases {
        let n = rng.random_range(2..=6);
        // alternate between geometric graphs (many zero weights) and
        // arbitrary symmetric matrices
        let k = if case % 2 == 0 {
            let pts: Vec<Point> = (0..n).map(|_| random_point(&mut rng, 40.0)).collect();
            WeightedCompleteGraph::from_endpoints(&pts, 10.0)
        } else {
            let mut w = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let x = rng.random_range(0.0..10.0_f64).round();
                    w[i][j] = x;
                    w[j][i] = x;
                }
            }
            WeightedCompleteGraph::from_matrix(&w).expect("symmetric matrix")
        };
        let t = mst(&k).expect("complete graph");
        let trees = all_spanning_trees(n);
        let best_total = trees.iter().map(|s| s.total_weight(&k)).fold(f64::INFINITY, f64::min);
        let best_bottleneck = trees.iter().map(|s| bottleneck(s, &k)).fold(f64::INFINITY, f64::min);
        if t.total_weight(&k) > best_total + 1e-9 || bottleneck(&t, &k) > best_bottleneck + 1e-9 {
            violations += 1;
        }
    }
    CheckReport {
        name: "MST minimal total and bottleneck".into(),
        cases,
        violations,
        detail: "exhaustive Prüfer enumeration".into(),
    }
}

/// Random deviation instance with two or three robots: a connected chain
/// of current positions near full range and greedy endpoints pulled
/// outward, so the tree constraints usually bind.
fn random_deviation_problem<R: Rng>(rng: &mut R, mode: ObjectiveMode) -> DeviationProblem {
    let n = rng.random_range(2..=3);
    let r_c = 3.0;
    let mut current = vec![point(0.0, 0.0)];
    for i in 1..n {
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let d = rng.random_range(0.9..1.0) * r_c;
        current.push(current[i - 1] + point(a.cos(), a.sin()) * d);
    }
    let reach: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..0.6)).collect();
    let centroid = current.iter().sum::<Point>() / n as f64;
    let greedy: Vec<Point> = current
        .iter()
        .zip(&reach)
        .map(|(c, r)| {
            // mostly away from the team
            let out = c - centroid;
            let a = out.y.atan2(out.x) + rng.random_range(-1.2..1.2);
            *c + point(a.cos(), a.sin()) * *r * rng.random_range(0.5..1.0)
        })
        .collect();
    let tree = mst(&WeightedCompleteGraph::from_endpoints(&greedy, r_c)).expect("complete graph");
    DeviationProblem {
        current,
        greedy,
        reach,
        weights: (0..n).map(|_| rng.random_range(0.2..2.0)).collect(),
        tree,
        r_c,
        r_s: 0.3,
        mode,
    }
}

/// Solver objective against the grid oracle, both required to be feasible;
/// instances the grid proves infeasible are skipped and replaced.
pub fn check_deviation_vs_grid(cases: usize, seed: u64, mode: ObjectiveMode) -> CheckReport {
    const RESOLUTION: f64 = 0.08;
    let mut rng = rng(seed);
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut done = 0;
    let mut active = 0;
    let mut attempts = 0;
    while done < cases && attempts < 20 * cases {
        attempts += 1;
        let p = random_deviation_problem(&mut rng, mode);
        let Ok(grid) = grid_oracle(&p, RESOLUTION) else {
            continue;
        };
        if grid.status != SolveStatus::OptimalLocal {
            continue;
        }
        done += 1;
        let s = solve_deviation(&p, &SolverOptions::default()).expect("valid problem");
        let residual = s.residuals.max();
        worst_residual = worst_residual.max(residual);
        if grid.objective > 0.0 {
            active += 1;
            worst_ratio = worst_ratio.max(s.objective / grid.objective);
        }
        if s.status != SolveStatus::OptimalLocal || residual > 1e-6 || s.objective > 1.05 * grid.objective + RESOLUTION {
            violations += 1;
        }
    }
    CheckReport {
        name: format!("deviation solver vs grid ({})", mode.name()),
        cases: done,
        violations: violations + (cases - done),
        detail: format!(
            "{active} needed motion, worst solver/grid ratio {worst_ratio:.4}, worst residual {worst_residual:.2e}"
        ),
    }
}

/// Two robots whose greedy endpoints are 12 m apart with `r_c = 10` must
/// each give up exactly one meter.
pub fn check_two_robot() -> CheckReport {
    let mut violations = 0;
    let mut moves = vec![];
    for mode in [ObjectiveMode::Norm, ObjectiveMode::SquaredNorm] {
        let p = DeviationProblem {
            current: vec![point(-5.0, 0.0), point(5.0, 0.0)],
            greedy: vec![point(-6.0, 0.0), point(6.0, 0.0)],
            reach: vec![2.0, 2.0],
            weights: vec![1.0, 1.0],
            tree: SpanningTree::new(2, vec![(0, 1)]).expect("single edge"),
            r_c: 10.0,
            r_s: 0.5,
            mode,
        };
        for s in [solve_deviation(&p, &SolverOptions::default()), grid_oracle(&p, 0.1)] {
            let s = s.expect("valid problem");
            for (x, g) in s.positions.iter().zip(&p.greedy) {
                let inward = (x - g).norm();
                moves.push(inward);
                if (inward - 1.0).abs() > 0.01 || x.x.abs() > g.x.abs() {
                    violations += 1;
                }
            }
        }
    }
    let spread = moves.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), m| (lo.min(*m), hi.max(*m)));
    CheckReport {
        name: "two-robot symmetric case".into(),
        cases: moves.len(),
        violations,
        detail: format!("moves in [{:.4}, {:.4}] m", spread.0, spread.1),
    }
}

/// Monotonicity and diminishing returns of the coverage objective on random
/// triples `A ⊆ B`, `s ∉ B`.
pub fn check_coverage_submodularity(cases: usize, seed: u64) -> CheckReport {
    let mut rng = rng(seed);
    let mut violations = 0;
    let anywhere = Disk::new(Point::zeros(), 1e9);
    for _ in 0..cases {
        let m = rng.random_range(0..60);
        let targets = (0..m).map(|_| random_point(&mut rng, 30.0)).collect();
        let f = CoverageObjective::new(targets, rng.random_range(1.0..8.0));
        let n = rng.random_range(1..=8);
        let pool: Vec<Trajectory> = (0..n)
            .map(|i| Trajectory::new(i, 0, random_point(&mut rng, 30.0), &anywhere).expect("unbounded reach"))
            .collect();
        let s_idx = rng.random_range(0..n);
        let s = pool[s_idx];
        let mut a = vec![];
        let mut b = vec![];
        for (i, t) in pool.iter().enumerate() {
            if i == s_idx {
                continue;
            }
            match rng.random_range(0..3) {
                0 => {
                    a.push(*t);
                    b.push(*t);
                }
                1 => b.push(*t),
                _ => {}
            }
        }
        let with = |set: &[Trajectory]| {
            let mut v = set.to_vec();
            v.push(s);
            f.value(&v)
        };
        let (fa, fb) = (f.value(&a), f.value(&b));
        let gain_a = with(&a) - fa;
        let gain_b = with(&b) - fb;
        if fa > fb || gain_a < 0.0 || gain_b < 0.0 || gain_a < gain_b || f.value(&[]) != 0.0 {
            violations += 1;
        }
    }
    CheckReport {
        name: "coverage monotone and submodular".into(),
        cases,
        violations,
        detail: "f(A) <= f(B), gains >= 0, gain(A) >= gain(B)".into(),
    }
}

/// Three robots: robot 0 can watch `k + 1` targets below, robots 1 and 2
/// can each reach `k` targets up top, but only by leaving range of robot
/// 0's pick. SGG takes robot 0's cluster first and then cannot follow the
/// others, ending at `k + 1` against greedy's `3k + 1`.
pub fn sgg_pathology_instance(k: usize) -> (CoverageObjective, PartitionedGroundSet, f64) {
    let anywhere = Disk::new(Point::zeros(), 1e9);
    let t = |robot, id, x, y| Trajectory::new(robot, id, point(x, y), &anywhere).expect("unbounded reach");
    let mut targets = vec![];
    targets.extend((0..=k).map(|j| point(j as f64 * 0.1 / k as f64, -10.0)));
    targets.extend((0..k).map(|j| point(-10.0 + j as f64 * 0.1 / k as f64, 14.0)));
    targets.extend((0..k).map(|j| point(10.0 + j as f64 * 0.1 / k as f64, 14.0)));
    let ground = PartitionedGroundSet::new(vec![
        vec![t(0, 0, 0.0, 0.0), t(0, 1, 0.1, -10.0)],
        vec![t(1, 0, -5.0, 0.0), t(1, 1, -10.0, 14.0)],
        vec![t(2, 0, 5.0, 0.0), t(2, 1, 10.0, 14.0)],
    ])
    .expect("well-formed groups");
    (CoverageObjective::new(targets, 1.0), ground, 12.0)
}

/// The SGG gap on the pathological instance grows linearly in `k`.
pub fn check_sgg_pathology() -> CheckReport {
    let mut violations = 0;
    let mut detail = vec![];
    for k in [4, 16, 64] {
        let (f, ground, r_c) = sgg_pathology_instance(k);
        let g = greedy_partition_matroid(&f, &ground).expect("non-empty groups");
        let s = sgg(&f, &ground, r_c).expect("non-empty groups");
        let connected = is_connected(&build_proximity_graph(&s.selection.endpoints(), r_c));
        if s.selection.value >= g.value || !connected {
            violations += 1;
        }
        detail.push(format!("k={k}: greedy {} vs sgg {}", g.value, s.selection.value));
    }
    CheckReport {
        name: "SGG pathology".into(),
        cases: 3,
        violations,
        detail: detail.join(", "),
    }
}

/// Every check at the acceptance sizes.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    vec![
        check_greedy_bound(200, seed),
        check_mst_exhaustive(200, seed),
        check_deviation_vs_grid(50, seed, ObjectiveMode::Norm),
        check_deviation_vs_grid(50, seed, ObjectiveMode::SquaredNorm),
        check_two_robot(),
        check_coverage_submodularity(1000, seed),
        check_sgg_pathology(),
    ]
}
