//! Monte Carlo runner and the results CSV.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{CsmError, Result};
use crate::geometry::Point;
use crate::tracking::config::{Algorithm, ScenarioConfig};
use crate::tracking::weights::WeightScheme;
use crate::tracking::world::{run_epoch, EpochMetrics, WorldState};

pub const RESULTS_HEADER: [&str; 9] = [
    "round",
    "epoch",
    "algorithm",
    "weight_scheme",
    "observed",
    "objective",
    "connected",
    "deviation_m",
    "solve_s",
];

/// Robot positions and communication edges at the end of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSnapshot {
    pub round: usize,
    pub epoch: usize,
    pub algorithm: Algorithm,
    pub positions: Vec<Point>,
    /// Proximity-graph edges, `i < j`.
    pub edges: Vec<(usize, usize)>,
    /// Topology the deviation solver realized, if any.
    pub tree: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Sorted by round, epoch, then the configured algorithm order.
    pub rows: Vec<EpochMetrics>,
    /// Every epoch of round 0.
    pub snapshots: Vec<NetworkSnapshot>,
}

fn run_round(
    cfg: &ScenarioConfig,
    round: usize,
    algorithm: Algorithm,
) -> Result<(Vec<EpochMetrics>, Vec<NetworkSnapshot>)> {
    let mut world = WorldState::initial(cfg, round);
    let mut rows = Vec::with_capacity(cfg.epochs);
    let mut snapshots = vec![];
    for _ in 0..cfg.epochs {
        let (plan, metrics) = run_epoch(&mut world, cfg, algorithm)?;
        if round == 0 {
            snapshots.push(NetworkSnapshot {
                round,
                epoch: metrics.epoch,
                algorithm,
                positions: plan.positions.clone(),
                edges: plan.graph.edges.clone(),
                tree: plan.tree.map(|t| t.edges).unwrap_or_default(),
            });
        }
        rows.push(metrics);
    }
    Ok((rows, snapshots))
}

/// Runs every configured algorithm over `cfg.rounds` rounds. Algorithms in
/// the same round start from the same world and see the same target motion
/// and measurement noise.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.rounds)
        .flat_map(|r| (0..cfg.algorithms.len()).map(move |a| (r, a)))
        .collect();
    let outputs = jobs
        .par_iter()
        .map(|&(r, a)| run_round(cfg, r, cfg.algorithms[a]).map(|out| (a, out)))
        .collect::<Result<Vec<_>>>()?;

    let mut keyed = vec![];
    let mut snapshots = vec![];
    for (a, (rows, snaps)) in outputs {
        keyed.extend(rows.into_iter().map(|m| ((m.round, m.epoch, a), m)));
        snapshots.extend(snaps.into_iter().map(|s| ((s.epoch, a), s)));
    }
    keyed.sort_by_key(|(k, _)| *k);
    snapshots.sort_by_key(|(k, _)| *k);
    Ok(ExperimentResult {
        rows: keyed.into_iter().map(|(_, m)| m).collect(),
        snapshots: snapshots.into_iter().map(|(_, s)| s).collect(),
    })
}

pub(crate) fn csv_error(e: csv::Error) -> CsmError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CsmError::Io(io),
        other => CsmError::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

pub fn write_results<W: Write>(rows: &[EpochMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER).map_err(csv_error)?;
    for m in rows {
        w.write_record([
            m.round.to_string(),
            m.epoch.to_string(),
            m.algorithm.to_string(),
            m.weight_scheme.map_or("none".to_string(), |s| s.to_string()),
            m.observed.to_string(),
            m.objective.to_string(),
            m.connected.to_string(),
            m.deviation_m.to_string(),
            m.solve_s.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<EpochMetrics>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(RESULTS_HEADER) {
        return Err(CsmError::Parse {
            line: 1,
            message: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = vec![];
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |col: &str| CsmError::Parse {
            line,
            message: format!("bad `{col}` value"),
        };
        let field = |i: usize| rec.get(i).ok_or_else(|| bad(RESULTS_HEADER[i]));
        macro_rules! parse {
            ($i:expr) => {
                field($i)?.parse().map_err(|_| bad(RESULTS_HEADER[$i]))?
            };
        }
        let scheme = match field(3)? {
            "none" => None,
            s => Some(s.parse::<WeightScheme>().map_err(|_| bad("weight_scheme"))?),
        };
        rows.push(EpochMetrics {
            round: parse!(0),
            epoch: parse!(1),
            algorithm: parse!(2),
            weight_scheme: scheme,
            observed: parse!(4),
            objective: parse!(5),
            connected: parse!(6),
            deviation_m: parse!(7),
            solve_s: parse!(8),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ScenarioConfig {
        ScenarioConfig {
            robots: 3,
            targets: 20,
            rounds: 2,
            epochs: 2,
            ..Default::default()
        }
    }

    #[test]
    fn no_targets_means_nothing_observed() {
        let cfg = ScenarioConfig {
            rounds: 1,
            epochs: 1,
            targets: 0,
            algorithms: vec![Algorithm::Greedy],
            ..tiny()
        };
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.rows[0].observed, 0);
        assert_eq!(res.rows[0].objective, 0.0);
    }

    #[test]
    fn rows_are_complete_and_ordered() {
        let cfg = tiny();
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.rows.len(), cfg.rounds * cfg.epochs * cfg.algorithms.len());
        let keys: Vec<_> = res.rows.iter().map(|m| (m.round, m.epoch, m.algorithm.name())).collect();
        assert_eq!(keys[0], (0, 0, "proposed"));
        assert_eq!(keys[1], (0, 0, "greedy"));
        assert_eq!(keys[2], (0, 0, "sgg"));
        assert_eq!(keys[3], (0, 1, "proposed"));
        assert!(res.rows.iter().all(|m| m.observed <= cfg.targets));
        assert_eq!(res.snapshots.len(), cfg.epochs * cfg.algorithms.len());
    }

    #[test]
    fn algorithms_share_the_first_world() {
        // before anyone moves, all algorithms face the same estimates; with
        // no connectivity pressure greedy and proposed coincide
        let cfg = ScenarioConfig {
            comm_radius: 1000.0,
            ..tiny()
        };
        let res = run_experiment(&cfg).unwrap();
        let first: Vec<_> = res.rows.iter().filter(|m| m.round == 0 && m.epoch == 0).collect();
        assert_eq!(first[0].objective, first[1].objective);
        assert_eq!(first[0].observed, first[1].observed);
    }

    #[test]
    fn csv_round_trips() {
        let res = run_experiment(&tiny()).unwrap();
        let mut buf = vec![];
        write_results(&res.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("round,epoch,algorithm,weight_scheme,observed,objective,connected,deviation_m,solve_s\n"));
        assert!(text.contains(",none,"));
        assert_eq!(read_results(buf.as_slice()).unwrap(), res.rows);
    }

    #[test]
    fn bad_csv_is_rejected() {
        assert!(matches!(read_results("a,b\n1,2\n".as_bytes()), Err(CsmError::Parse { line: 1, .. })));
        let text = "round,epoch,algorithm,weight_scheme,observed,objective,connected,deviation_m,solve_s\n0,0,greedy,none,x,1,true,0,0\n";
        assert!(matches!(read_results(text.as_bytes()), Err(CsmError::Parse { line: 2, .. })));
    }

    #[test]
    fn invalid_config_is_reported() {
        let cfg = ScenarioConfig {
            comm_radius: -1.0,
            ..tiny()
        };
        assert!(matches!(run_experiment(&cfg), Err(CsmError::Config { field, .. }) if field == "comm_radius"));
    }
}
