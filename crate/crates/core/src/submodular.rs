//! Set functions over partitioned trajectory ground sets and the selection
//! algorithms that run on them: the partition-matroid greedy, the sequential
//! graph greedy baseline, and an exhaustive optimum used as a test oracle.

use crate::error::{CsmError, Result};
use crate::geometry::{Disk, Point};
use crate::netgraph::{build_proximity_graph, is_connected};

/// One candidate motion for one robot within an epoch. Only the endpoint
/// matters to the planner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub robot_id: usize,
    pub traj_id: usize,
    pub endpoint: Point,
}

impl Trajectory {
    /// Builds a trajectory whose endpoint must lie inside `reach`.
    pub fn new(robot_id: usize, traj_id: usize, endpoint: Point, reach: &Disk) -> Result<Self> {
        let distance = (endpoint - reach.center).norm();
        // Allow for rounding in polar-to-cartesian conversions on the rim.
        if distance > reach.radius * (1.0 + 1e-12) + 1e-12 {
            return Err(CsmError::OutOfReach {
                robot: robot_id,
                traj: traj_id,
                distance,
                reach: reach.radius,
            });
        }
        Ok(Trajectory {
            robot_id,
            traj_id,
            endpoint,
        })
    }

    pub fn key(&self) -> (usize, usize) {
        (self.robot_id, self.traj_id)
    }
}

/// The ground set `T_1 ∪ … ∪ T_N`, one non-empty group per robot.
#[derive(Debug, Clone)]
pub struct PartitionedGroundSet {
    groups: Vec<Vec<Trajectory>>,
}

impl PartitionedGroundSet {
    pub fn new(groups: Vec<Vec<Trajectory>>) -> Result<Self> {
        for (robot, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(CsmError::EmptyGroup { robot });
            }
            for (k, t) in group.iter().enumerate() {
                if t.robot_id != robot {
                    return Err(CsmError::MisfiledTrajectory {
                        robot: t.robot_id,
                        traj: t.traj_id,
                        group: robot,
                    });
                }
                if group[..k].iter().any(|u| u.traj_id == t.traj_id) {
                    return Err(CsmError::DuplicateTrajectory {
                        robot,
                        traj: t.traj_id,
                    });
                }
            }
        }
        Ok(PartitionedGroundSet { groups })
    }

    /// Number of robots.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group(&self, robot: usize) -> &[Trajectory] {
        &self.groups[robot]
    }

    pub fn groups(&self) -> &[Vec<Trajectory>] {
        &self.groups
    }

    pub fn iter(&self) -> impl Iterator<Item = &Trajectory> {
        self.groups.iter().flatten()
    }
}

/// A normalized set function `f: 2^V -> R≥0` over trajectories.
///
/// Implementations used with the greedy selectors are expected to be
/// monotone and submodular; nothing here enforces that.
pub trait SetFunction {
    fn value(&self, set: &[Trajectory]) -> f64;
}

impl<F> SetFunction for F
where
    F: Fn(&[Trajectory]) -> f64,
{
    fn value(&self, set: &[Trajectory]) -> f64 {
        self(set)
    }
}

/// `f(S ∪ {s}) − f(S)`.
pub fn marginal_gain<F: SetFunction + ?Sized>(
    f: &F,
    s: &Trajectory,
    set: &[Trajectory],
) -> Result<f64> {
    if set.iter().any(|t| t.key() == s.key()) {
        return Err(CsmError::AlreadySelected {
            robot: s.robot_id,
            traj: s.traj_id,
        });
    }
    let mut extended = Vec::with_capacity(set.len() + 1);
    extended.extend_from_slice(set);
    extended.push(*s);
    Ok(f.value(&extended) - f.value(set))
}

/// One trajectory per robot.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// `picks[i]` is robot `i`'s trajectory.
    pub picks: Vec<Trajectory>,
    /// Robots in the order they were assigned.
    pub order: Vec<usize>,
    pub value: f64,
}

impl Selection {
    fn from_sequence<F: SetFunction + ?Sized>(f: &F, sequence: Vec<Trajectory>) -> Self {
        let value = f.value(&sequence);
        let order = sequence.iter().map(|t| t.robot_id).collect();
        let mut picks = sequence;
        picks.sort_by_key(|t| t.robot_id);
        Selection {
            picks,
            order,
            value,
        }
    }

    pub fn endpoints(&self) -> Vec<Point> {
        self.picks.iter().map(|t| t.endpoint).collect()
    }
}

/// Candidate currently winning an argmax scan. Ties go to the lower
/// `(robot_id, traj_id)`.
struct Best {
    value: f64,
    traj: Trajectory,
}

impl Best {
    fn offer(best: &mut Option<Best>, value: f64, traj: &Trajectory) {
        let better = match best {
            None => true,
            Some(b) => value > b.value || (value == b.value && traj.key() < b.traj.key()),
        };
        if better {
            *best = Some(Best { value, traj: *traj });
        }
    }
}

/// Scans every trajectory of an unassigned robot that passes `eligible` and
/// returns the one maximizing `f(sol ∪ {s})`.
fn best_extension<F, P>(
    f: &F,
    ground: &PartitionedGroundSet,
    assigned: &[bool],
    sol: &mut Vec<Trajectory>,
    eligible: P,
) -> Option<Best>
where
    F: SetFunction + ?Sized,
    P: Fn(&Trajectory, &[Trajectory]) -> bool,
{
    let mut best = None;
    for (robot, group) in ground.groups().iter().enumerate() {
        if assigned[robot] {
            continue;
        }
        for t in group {
            if !eligible(t, sol) {
                continue;
            }
            sol.push(*t);
            let v = f.value(sol);
            sol.pop();
            Best::offer(&mut best, v, t);
        }
    }
    best
}

/// Greedy maximization under the partition matroid: `N` rounds, each
/// committing the highest-gain trajectory among robots not yet assigned.
pub fn greedy_partition_matroid<F: SetFunction + ?Sized>(
    f: &F,
    ground: &PartitionedGroundSet,
) -> Result<Selection> {
    let n = ground.len();
    let mut assigned = vec![false; n];
    let mut sol = Vec::with_capacity(n);
    for _ in 0..n {
        let best = best_extension(f, ground, &assigned, &mut sol, |_, _| true)
            .expect("every group is non-empty");
        assigned[best.traj.robot_id] = true;
        sol.push(best.traj);
    }
    Ok(Selection::from_sequence(f, sol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SggOutcome {
    pub selection: Selection,
    /// Whether the selected endpoints induce a connected proximity graph.
    pub connected: bool,
    /// Rounds in which no unassigned robot could attach to the grown graph.
    pub forced_picks: usize,
}

/// Sequential graph greedy. Each round only considers trajectories whose
/// endpoint lies within `r_c` of an endpoint already selected (everything is
/// eligible in the first round). When nothing is eligible the best
/// unconstrained trajectory is taken and the outcome is marked.
pub fn sgg<F: SetFunction + ?Sized>(
    f: &F,
    ground: &PartitionedGroundSet,
    r_c: f64,
) -> Result<SggOutcome> {
    if !(r_c > 0.0) {
        return Err(CsmError::InvalidGraph(format!(
            "communication radius must be positive, got {r_c}"
        )));
    }
    let n = ground.len();
    let mut assigned = vec![false; n];
    let mut sol = Vec::with_capacity(n);
    let mut forced_picks = 0;
    let attaches = |t: &Trajectory, sol: &[Trajectory]| {
        sol.is_empty()
            || sol
                .iter()
                .any(|s| (s.endpoint - t.endpoint).norm() <= r_c)
    };
    for _ in 0..n {
        let best = match best_extension(f, ground, &assigned, &mut sol, attaches) {
            Some(b) => b,
            None => {
                forced_picks += 1;
                best_extension(f, ground, &assigned, &mut sol, |_, _| true)
                    .expect("every group is non-empty")
            }
        };
        assigned[best.traj.robot_id] = true;
        sol.push(best.traj);
    }
    let selection = Selection::from_sequence(f, sol);
    let connected = is_connected(&build_proximity_graph(&selection.endpoints(), r_c));
    Ok(SggOutcome {
        selection,
        connected,
        forced_picks,
    })
}

/// Largest number of assignments [`brute_force_opt`] will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e6;

/// Exhaustive maximizer over all one-per-robot assignments, ignoring
/// connectivity. Ties keep the lexicographically first assignment.
pub fn brute_force_opt<F: SetFunction + ?Sized>(
    f: &F,
    ground: &PartitionedGroundSet,
) -> Result<Selection> {
    let size: f64 = ground.groups().iter().map(|g| g.len() as f64).product();
    if size > BRUTE_FORCE_LIMIT {
        return Err(CsmError::InstanceTooLarge {
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let n = ground.len();
    let mut idx = vec![0usize; n];
    let mut current: Vec<Trajectory> = (0..n).map(|i| ground.group(i)[0]).collect();
    let mut best_value = f.value(&current);
    let mut best = current.clone();
    loop {
        // odometer increment
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(Selection {
                    order: (0..n).collect(),
                    picks: best,
                    value: best_value,
                });
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < ground.group(k).len() {
                current[k] = ground.group(k)[idx[k]];
                break;
            }
            idx[k] = 0;
            current[k] = ground.group(k)[0];
        }
        let v = f.value(&current);
        if v > best_value {
            best_value = v;
            best.copy_from_slice(&current);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn anywhere() -> Disk {
        Disk::new(point(0.0, 0.0), 1e9)
    }

    fn traj(robot: usize, id: usize, x: f64, y: f64) -> Trajectory {
        Trajectory::new(robot, id, point(x, y), &anywhere()).unwrap()
    }

    /// Distinct points covered within `radius` of any endpoint.
    fn coverage(points: Vec<Point>, radius: f64) -> impl Fn(&[Trajectory]) -> f64 {
        move |set: &[Trajectory]| {
            points
                .iter()
                .filter(|p| set.iter().any(|t| (t.endpoint - **p).norm() <= radius))
                .count() as f64
        }
    }

    /// Modular function: each trajectory has a fixed weight.
    fn modular(weights: Vec<Vec<f64>>) -> impl Fn(&[Trajectory]) -> f64 {
        move |set: &[Trajectory]| set.iter().map(|t| weights[t.robot_id][t.traj_id]).sum()
    }

    fn ground_from_weights(weights: &[Vec<f64>]) -> PartitionedGroundSet {
        PartitionedGroundSet::new(
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| (0..w.len()).map(|k| traj(i, k, i as f64, k as f64)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn random_instance(
        rng: &mut ChaCha8Rng,
        robots: usize,
        per_robot: usize,
        targets: usize,
    ) -> (PartitionedGroundSet, impl Fn(&[Trajectory]) -> f64) {
        let pts = (0..targets)
            .map(|_| point(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0)))
            .collect();
        let groups = (0..robots)
            .map(|i| {
                (0..per_robot)
                    .map(|k| traj(i, k, rng.random_range(0.0..20.0), rng.random_range(0.0..20.0)))
                    .collect()
            })
            .collect();
        (PartitionedGroundSet::new(groups).unwrap(), coverage(pts, 4.0))
    }

    #[test]
    fn trajectory_outside_reach_is_rejected() {
        let reach = Disk::new(point(0.0, 0.0), 4.0);
        assert!(Trajectory::new(0, 0, point(4.0, 0.0), &reach).is_ok());
        assert!(matches!(
            Trajectory::new(0, 1, point(4.1, 0.0), &reach),
            Err(CsmError::OutOfReach { .. })
        ));
    }

    #[test]
    fn ground_set_invariants() {
        assert!(matches!(
            PartitionedGroundSet::new(vec![vec![traj(0, 0, 0.0, 0.0)], vec![]]),
            Err(CsmError::EmptyGroup { robot: 1 })
        ));
        assert!(matches!(
            PartitionedGroundSet::new(vec![vec![traj(0, 0, 0.0, 0.0), traj(0, 0, 1.0, 0.0)]]),
            Err(CsmError::DuplicateTrajectory { robot: 0, traj: 0 })
        ));
        assert!(matches!(
            PartitionedGroundSet::new(vec![vec![traj(1, 0, 0.0, 0.0)]]),
            Err(CsmError::MisfiledTrajectory { .. })
        ));
    }

    #[test]
    fn gain_from_empty_set_is_singleton_value() {
        let f = coverage(vec![point(0.0, 0.0), point(1.0, 0.0), point(0.0, 1.0)], 2.0);
        let s = traj(0, 0, 0.0, 0.0);
        assert_eq!(marginal_gain(&f, &s, &[]).unwrap(), 3.0);
    }

    #[test]
    fn duplicated_footprint_gains_nothing() {
        let f = coverage(vec![point(0.0, 0.0), point(1.0, 0.0)], 2.0);
        let held = [traj(0, 0, 0.5, 0.0)];
        let s = traj(1, 0, 0.5, 0.0);
        assert_eq!(marginal_gain(&f, &s, &held).unwrap(), 0.0);
    }

    #[test]
    fn gain_rejects_member() {
        let f = coverage(vec![], 1.0);
        let s = traj(0, 0, 0.0, 0.0);
        assert!(matches!(
            marginal_gain(&f, &s, &[s]),
            Err(CsmError::AlreadySelected { robot: 0, traj: 0 })
        ));
    }

    #[test]
    fn gain_matches_double_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (ground, f) = random_instance(&mut rng, 4, 3, 25);
            let held: Vec<_> = (0..3).map(|i| ground.group(i)[0]).collect();
            let s = ground.group(3)[rng.random_range(0..3)];
            let mut with = held.clone();
            with.push(s);
            let expected = f(&with) - f(&held);
            assert_eq!(marginal_gain(&f, &s, &held).unwrap(), expected);
        }
    }

    #[test]
    fn modular_greedy_picks_largest_gains() {
        let w = vec![vec![5.0, 1.0], vec![3.0, 2.0]];
        let ground = ground_from_weights(&w);
        let sel = greedy_partition_matroid(&modular(w), &ground).unwrap();
        assert_eq!(sel.value, 8.0);
        assert_eq!(sel.order, vec![0, 1]);
        assert_eq!(sel.picks[0].traj_id, 0);
        assert_eq!(sel.picks[1].traj_id, 0);
    }

    #[test]
    fn all_zero_gains_break_ties_to_first_trajectory() {
        let w = vec![vec![0.0; 4]; 3];
        let ground = ground_from_weights(&w);
        let sel = greedy_partition_matroid(&modular(w), &ground).unwrap();
        assert_eq!(sel.value, 0.0);
        assert_eq!(sel.order, vec![0, 1, 2]);
        assert!(sel.picks.iter().all(|t| t.traj_id == 0));
    }

    #[test]
    fn greedy_within_half_of_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let (ground, f) = random_instance(&mut rng, 4, 5, 30);
            let greedy = greedy_partition_matroid(&f, &ground).unwrap();
            let opt = brute_force_opt(&f, &ground).unwrap();
            assert_eq!(greedy.picks.len(), 4);
            assert!(opt.value >= greedy.value);
            assert!(greedy.value >= 0.5 * opt.value, "{} vs {}", greedy.value, opt.value);
        }
    }

    #[test]
    fn greedy_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (ground, f) = random_instance(&mut rng, 5, 6, 40);
        let a = greedy_partition_matroid(&f, &ground).unwrap();
        let b = greedy_partition_matroid(&f, &ground).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn brute_force_single_robot_and_modular() {
        let w = vec![vec![1.0, 7.0, 3.0]];
        let opt = brute_force_opt(&modular(w.clone()), &ground_from_weights(&w)).unwrap();
        assert_eq!(opt.picks[0].traj_id, 1);
        assert_eq!(opt.value, 7.0);

        let w = vec![vec![1.0, 4.0], vec![6.0, 2.0], vec![0.5, 0.5, 3.0]];
        let opt = brute_force_opt(&modular(w.clone()), &ground_from_weights(&w)).unwrap();
        let ids: Vec<_> = opt.picks.iter().map(|t| t.traj_id).collect();
        assert_eq!(ids, vec![1, 0, 2]);
        assert_eq!(opt.value, 13.0);
    }

    #[test]
    fn brute_force_dominates_greedy_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let (ground, f) = random_instance(&mut rng, 3, 4, 20);
            let g = greedy_partition_matroid(&f, &ground).unwrap();
            let o = brute_force_opt(&f, &ground).unwrap();
            assert!(o.value >= g.value);
        }
    }

    #[test]
    fn brute_force_refuses_huge_instances() {
        let w = vec![vec![0.0; 40]; 4];
        let err = brute_force_opt(&modular(w.clone()), &ground_from_weights(&w)).unwrap_err();
        assert!(matches!(err, CsmError::InstanceTooLarge { .. }));
    }

    #[test]
    fn sgg_without_binding_constraint_matches_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let (ground, f) = random_instance(&mut rng, 3, 4, 20);
            // every endpoint lies in a 20 m box, so r_c = 30 never binds
            let out = sgg(&f, &ground, 30.0).unwrap();
            let greedy = greedy_partition_matroid(&f, &ground).unwrap();
            assert!(out.connected);
            assert_eq!(out.forced_picks, 0);
            assert_eq!(out.selection, greedy);
        }
    }

    #[test]
    fn sgg_biased_away_from_rich_area() {
        // Robot 0 sees a small cluster below; robots 1 and 2 could each reach
        // a larger cluster up top, but only by leaving r_c of robot 0.
        let mut targets = vec![];
        targets.extend((0..5).map(|k| point(k as f64 * 0.1, -10.0)));
        targets.extend((0..4).map(|k| point(-10.0 + k as f64 * 0.1, 14.0)));
        targets.extend((0..4).map(|k| point(10.0 + k as f64 * 0.1, 14.0)));
        let f = coverage(targets, 1.0);
        let ground = PartitionedGroundSet::new(vec![
            vec![traj(0, 0, 0.0, 0.0), traj(0, 1, 0.1, -10.0)],
            vec![traj(1, 0, -5.0, 0.0), traj(1, 1, -10.0, 14.0)],
            vec![traj(2, 0, 5.0, 0.0), traj(2, 1, 10.0, 14.0)],
        ])
        .unwrap();
        let g = greedy_partition_matroid(&f, &ground).unwrap();
        let s = sgg(&f, &ground, 12.0).unwrap();
        assert_eq!(g.value, 13.0);
        assert_eq!(s.selection.value, 5.0);
        assert!(s.selection.value < g.value);
    }

    #[test]
    fn sgg_flags_unreachable_team() {
        // endpoints of the two robots are 50 m apart, r_c = 10
        let f = coverage(vec![point(0.0, 0.0)], 1.0);
        let ground = PartitionedGroundSet::new(vec![
            vec![traj(0, 0, 0.0, 0.0), traj(0, 1, 2.0, 0.0)],
            vec![traj(1, 0, 50.0, 0.0), traj(1, 1, 48.0, 0.0)],
        ])
        .unwrap();
        let out = sgg(&f, &ground, 10.0).unwrap();
        assert!(!out.connected);
        assert_eq!(out.forced_picks, 1);
        assert_eq!(out.selection.picks.len(), 2);
    }

    proptest::proptest! {
        #[test]
        fn greedy_half_bound_and_feasibility(seed in 0u64..10_000, robots in 1usize..=4, per_robot in 1usize..=5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (ground, f) = random_instance(&mut rng, robots, per_robot, 25);
            let g = greedy_partition_matroid(&f, &ground).unwrap();
            let opt = brute_force_opt(&f, &ground).unwrap();
            proptest::prop_assert!(g.value >= 0.5 * opt.value);
            proptest::prop_assert!(g.value <= opt.value);
            for (i, pick) in g.picks.iter().enumerate() {
                proptest::prop_assert_eq!(pick.robot_id, i);
                proptest::prop_assert!(ground.group(i).contains(pick));
            }
            let mut order = g.order.clone();
            order.sort_unstable();
            proptest::prop_assert_eq!(order, (0..robots).collect::<Vec<_>>());
        }
    }
}
