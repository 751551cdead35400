//! The simulated world and the per-epoch planning pipeline.

use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::deviation::{feasibility_fallback, solve_deviation, DeviationProblem, SolveStatus, SolverOptions};
use crate::error::{CsmError, Result};
use crate::geometry::Point;
use crate::netgraph::{build_proximity_graph, is_connected, mst, ProximityGraph, SpanningTree, WeightedCompleteGraph};
use crate::submodular::{greedy_partition_matroid, sgg, PartitionedGroundSet, SetFunction};
use crate::tracking::config::{Algorithm, ScenarioConfig};
use crate::tracking::coverage::CoverageObjective;
use crate::tracking::robot::{discretize_reachable, RobotState};
use crate::tracking::target::{kf_predict, kf_update, TargetEstimate, TargetState};
use crate::tracking::weights::{compute_weights, WeightScheme};

/// Independent random streams of one round. Every draw is keyed by
/// (seed, round, stream, epoch), so results do not depend on scheduling or
/// on which algorithm is being simulated.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Scenario = 1,
    Noise = 2,
    Weights = 3,
    Solver = 4,
}

fn stream_rng(seed: u64, round: usize, stream: Stream, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(((stream as u64) << 32) | epoch as u64);
    rng
}

/// Measurement noise for every target at time step `t`.
fn noise_draws(cfg: &ScenarioConfig, round: usize, t: usize, targets: usize) -> Vec<Point> {
    let mut rng = stream_rng(cfg.seed, round, Stream::Noise, t);
    let normal = Normal::new(0.0, cfg.noise_std).expect("noise_std validated positive");
    (0..targets)
        .map(|_| Point::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect()
}

/// Lattice with spacing `0.8 · r_c`, as close to square as possible,
/// centered in the arena.
pub fn initial_lattice(cfg: &ScenarioConfig) -> Vec<Point> {
    let n = cfg.robots;
    let spacing = 0.8 * cfg.comm_radius;
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let origin = Point::new(
        0.5 * cfg.arena_width - 0.5 * spacing * (cols - 1) as f64,
        0.5 * cfg.arena_height - 0.5 * spacing * (rows - 1) as f64,
    );
    (0..n)
        .map(|i| origin + Point::new((i % cols) as f64, (i / cols) as f64) * spacing)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub round: usize,
    /// Epochs completed so far; also the current time step.
    pub epoch: usize,
    pub robots: Vec<RobotState>,
    pub targets: Vec<TargetState>,
    pub estimates: Vec<TargetEstimate>,
}

impl WorldState {
    /// Start of a round. Every target has been measured once at time 0.
    pub fn initial(cfg: &ScenarioConfig, round: usize) -> Self {
        let robots = initial_lattice(cfg)
            .into_iter()
            .enumerate()
            .map(|(id, position)| RobotState {
                id,
                position,
                reach: cfg.reach_radius,
                sense_radius: cfg.sense_radius,
            })
            .collect();
        let mut rng = stream_rng(cfg.seed, round, Stream::Scenario, 0);
        let v = cfg.max_target_speed;
        let targets: Vec<TargetState> = (0..cfg.targets)
            .map(|id| {
                let position = Point::new(
                    rng.random_range(0.0..=cfg.arena_width),
                    rng.random_range(0.0..=cfg.arena_height),
                );
                let velocity = if v > 0.0 {
                    Point::new(rng.random_range(-v..=v), rng.random_range(-v..=v))
                } else {
                    Point::zeros()
                };
                TargetState { id, position, velocity }
            })
            .collect();
        let noise = noise_draws(cfg, round, 0, targets.len());
        let estimates = targets
            .iter()
            .zip(&noise)
            .map(|(t, n)| TargetEstimate::from_measurement(t.id, t.position + n, cfg.noise_std, 0))
            .collect();
        WorldState {
            round,
            epoch: 0,
            robots,
            targets,
            estimates,
        }
    }

    pub fn positions(&self) -> Vec<Point> {
        self.robots.iter().map(|r| r.position).collect()
    }

    /// Estimates predicted one step ahead, to the end of the current epoch.
    pub fn predicted(&self, cfg: &ScenarioConfig) -> Vec<TargetEstimate> {
        self.estimates
            .iter()
            .map(|e| kf_predict(e, cfg.process_noise_std))
            .collect()
    }

    /// Targets whose true position lies inside some footprint.
    pub fn observed_targets(&self) -> Vec<usize> {
        self.targets
            .iter()
            .filter(|t| {
                self.robots
                    .iter()
                    .any(|r| (t.position - r.position).norm() <= r.sense_radius)
            })
            .map(|t| t.id)
            .collect()
    }

    /// Executes one epoch: robots move to `positions`, targets step, and
    /// targets inside a footprint are measured. Returns how many were seen.
    pub fn advance(&mut self, cfg: &ScenarioConfig, positions: &[Point]) -> usize {
        assert_eq!(positions.len(), self.robots.len());
        for t in &mut self.targets {
            t.step(cfg.arena_width, cfg.arena_height);
        }
        for (r, p) in self.robots.iter_mut().zip(positions) {
            r.position = *p;
        }
        let now = self.epoch + 1;
        let noise = noise_draws(cfg, self.round, now, self.targets.len());
        let mut estimates = self.predicted(cfg);
        let seen = self.observed_targets();
        for &j in &seen {
            let z = self.targets[j].position + noise[j];
            estimates[j] = kf_update(&estimates[j], z, cfg.noise_std, now);
        }
        self.estimates = estimates;
        self.epoch = now;
        seen.len()
    }
}

/// What a planner decided for one epoch.
#[derive(Debug, Clone)]
pub struct EpochPlan {
    pub algorithm: Algorithm,
    pub positions: Vec<Point>,
    pub greedy_endpoints: Vec<Point>,
    /// Proximity graph at `positions`.
    pub graph: ProximityGraph,
    /// Topology handed to the deviation solver (proposed only).
    pub tree: Option<SpanningTree>,
    pub status: Option<SolveStatus>,
    pub weights: Option<Vec<f64>>,
    /// Coverage of the predicted targets at `positions`.
    pub objective: f64,
    /// Coverage of the predicted targets at the selection's own endpoints.
    pub selection_objective: f64,
    /// `Σ ‖x_i − x_i^g‖` against the algorithm's own selection.
    pub deviation: f64,
    pub connected: bool,
    pub solve_seconds: f64,
}

/// One result row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub round: usize,
    pub epoch: usize,
    pub algorithm: Algorithm,
    /// Only meaningful for the proposed algorithm.
    pub weight_scheme: Option<WeightScheme>,
    pub observed: usize,
    pub objective: f64,
    pub connected: bool,
    pub deviation_m: f64,
    pub solve_s: f64,
}

fn ground_set(world: &WorldState, cfg: &ScenarioConfig) -> Result<PartitionedGroundSet> {
    let groups = world
        .robots
        .iter()
        .map(|r| discretize_reachable(r, cfg.radial_steps, cfg.angular_step_deg))
        .collect::<Result<Vec<_>>>()?;
    PartitionedGroundSet::new(groups)
}

/// Plans one epoch for `algorithm` against the one-step-predicted estimates.
pub fn plan_epoch(world: &WorldState, cfg: &ScenarioConfig, algorithm: Algorithm) -> Result<EpochPlan> {
    let started = Instant::now();
    let current = world.positions();
    let start_graph = build_proximity_graph(&current, cfg.comm_radius);
    if algorithm == Algorithm::Proposed && !is_connected(&start_graph) {
        return Err(CsmError::Disconnected);
    }
    let f = CoverageObjective::from_estimates(&world.predicted(cfg), cfg.sense_radius);
    let ground = ground_set(world, cfg)?;

    let (selection, positions, tree, status, weights) = match algorithm {
        Algorithm::Greedy => {
            let sel = greedy_partition_matroid(&f, &ground)?;
            let pos = sel.endpoints();
            (sel, pos, None, None, None)
        }
        Algorithm::Sgg => {
            let out = sgg(&f, &ground, cfg.comm_radius)?;
            let pos = out.selection.endpoints();
            (out.selection, pos, None, None, None)
        }
        Algorithm::Proposed => {
            let sel = greedy_partition_matroid(&f, &ground)?;
            let greedy = sel.endpoints();
            let tree = mst(&WeightedCompleteGraph::from_endpoints(&greedy, cfg.comm_radius))?;
            let mut rng = stream_rng(cfg.seed, world.round, Stream::Weights, world.epoch);
            let w = compute_weights(
                cfg.weight_scheme,
                &sel,
                &f,
                cfg.weight3_samples,
                cfg.weight3_radius,
                &mut rng,
            )?;
            let problem = DeviationProblem {
                current: current.clone(),
                greedy: greedy.clone(),
                reach: world.robots.iter().map(|r| r.reach).collect(),
                weights: w.clone(),
                tree,
                r_c: cfg.comm_radius,
                r_s: cfg.safety_radius,
                mode: cfg.objective_mode,
            };
            let opts = SolverOptions {
                n_starts: cfg.solver_starts,
                seed: stream_rng(cfg.seed, world.round, Stream::Solver, world.epoch).next_u64(),
                ..Default::default()
            };
            let solution = realize_connected(&problem, &start_graph, &opts, world.epoch)?;
            (sel, solution.positions, Some(solution.tree), Some(solution.status), Some(w))
        }
    };

    let graph = build_proximity_graph(&positions, cfg.comm_radius);
    let connected = is_connected(&graph);
    let deviation = positions
        .iter()
        .zip(selection.picks.iter())
        .map(|(x, s)| (x - s.endpoint).norm())
        .sum();
    let elapsed = started.elapsed().as_secs_f64();
    Ok(EpochPlan {
        algorithm,
        objective: f.value_at(&positions),
        selection_objective: f.value(&selection.picks),
        greedy_endpoints: selection.endpoints(),
        positions,
        graph,
        tree,
        status,
        weights,
        deviation,
        connected,
        solve_seconds: elapsed,
    })
}

/// Deviation minimization with the fallback chain that guarantees a
/// connected end-of-epoch graph: the MST over greedy endpoints first, then
/// the cheapest spanning tree of the current graph, then staying put.
fn realize_connected(
    problem: &DeviationProblem,
    start_graph: &ProximityGraph,
    opts: &SolverOptions,
    epoch: usize,
) -> Result<crate::deviation::DeviationSolution> {
    let connects = |x: &[Point]| is_connected(&build_proximity_graph(x, problem.r_c));
    let first = solve_deviation(problem, opts)?;
    if first.status == SolveStatus::OptimalLocal && connects(&first.positions) {
        return Ok(first);
    }
    let stay = feasibility_fallback(problem, start_graph)?;
    let retry = DeviationProblem {
        tree: stay.tree.clone(),
        ..problem.clone()
    };
    let second = solve_deviation(&retry, opts)?;
    if second.status == SolveStatus::OptimalLocal && connects(&second.positions) {
        return Ok(crate::deviation::DeviationSolution {
            status: SolveStatus::Fallback,
            ..second
        });
    }
    if connects(&stay.positions) {
        return Ok(stay);
    }
    Err(CsmError::InfeasibleEpoch { epoch })
}

/// Plans and executes one epoch, returning the plan and its result row.
pub fn run_epoch(world: &mut WorldState, cfg: &ScenarioConfig, algorithm: Algorithm) -> Result<(EpochPlan, EpochMetrics)> {
    let plan = plan_epoch(world, cfg, algorithm)?;
    let epoch = world.epoch;
    let observed = world.advance(cfg, &plan.positions);
    let metrics = EpochMetrics {
        round: world.round,
        epoch,
        algorithm,
        weight_scheme: (algorithm == Algorithm::Proposed).then_some(cfg.weight_scheme),
        observed,
        objective: plan.objective,
        connected: plan.connected,
        deviation_m: plan.deviation,
        solve_s: if cfg.record_timing { plan.solve_seconds } else { 0.0 },
    };
    Ok((plan, metrics))
}
