//! Plot-ready data files.
//!
//! `bars.csv` holds grouped-bar data, one row per epoch and series:
//!
//! ```text
//! epoch,algorithm,weight_scheme,mean,std,n
//! ```
//!
//! `network.csv` holds end-of-epoch network snapshots. Each snapshot is a
//! run of `robot` rows (`i` = robot, `x`, `y` set) followed by `edge` rows
//! (proximity graph) and `tree` rows (realized spanning tree), both with
//! `i`, `j` set:
//!
//! ```text
//! round,epoch,algorithm,kind,i,j,x,y
//! ```
//!
//! Coordinates are written with the shortest representation that parses
//! back to the same `f64`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{CsmError, Result};
use crate::geometry::Point;
use crate::harness::experiment::{csv_error, NetworkSnapshot};
use crate::harness::summary::Summary;
use crate::tracking::config::Algorithm;

pub const BARS_HEADER: [&str; 6] = ["epoch", "algorithm", "weight_scheme", "mean", "std", "n"];
pub const NETWORK_HEADER: [&str; 8] = ["round", "epoch", "algorithm", "kind", "i", "j", "x", "y"];

pub fn write_bars<W: Write>(summary: &Summary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BARS_HEADER).map_err(csv_error)?;
    for s in &summary.series {
        for e in &s.per_epoch {
            w.write_record([
                e.epoch.to_string(),
                s.algorithm.to_string(),
                s.weight_scheme.map_or("none".into(), |x| x.to_string()),
                e.mean.to_string(),
                e.std.to_string(),
                e.n.to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots<W: Write>(snapshots: &[NetworkSnapshot], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NETWORK_HEADER).map_err(csv_error)?;
    for s in snapshots {
        let head = [s.round.to_string(), s.epoch.to_string(), s.algorithm.to_string()];
        for (i, p) in s.positions.iter().enumerate() {
            let rest = ["robot".into(), i.to_string(), String::new(), p.x.to_string(), p.y.to_string()];
            w.write_record(head.iter().chain(&rest)).map_err(csv_error)?;
        }
        for (kind, edges) in [("edge", &s.edges), ("tree", &s.tree)] {
            for (i, j) in edges {
                let rest = [kind.into(), i.to_string(), j.to_string(), String::new(), String::new()];
                w.write_record(head.iter().chain(&rest)).map_err(csv_error)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshots<R: Read>(input: R) -> Result<Vec<NetworkSnapshot>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers().map_err(csv_error)?.iter().ne(NETWORK_HEADER) {
        return Err(CsmError::Parse {
            line: 1,
            message: "unexpected network header".into(),
        });
    }
    let mut out: Vec<NetworkSnapshot> = vec![];
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |col: &str| CsmError::Parse {
            line,
            message: format!("bad `{col}` value"),
        };
        let get = |i: usize| rec.get(i).ok_or_else(|| bad(NETWORK_HEADER[i]));
        let round: usize = get(0)?.parse().map_err(|_| bad("round"))?;
        let epoch: usize = get(1)?.parse().map_err(|_| bad("epoch"))?;
        let algorithm: Algorithm = get(2)?.parse().map_err(|_| bad("algorithm"))?;
        let i: usize = get(4)?.parse().map_err(|_| bad("i"))?;
        let same = out
            .last()
            .is_some_and(|s| (s.round, s.epoch, s.algorithm) == (round, epoch, algorithm));
        if !same {
            out.push(NetworkSnapshot {
                round,
                epoch,
                algorithm,
                positions: vec![],
                edges: vec![],
                tree: vec![],
            });
        }
        let snap = out.last_mut().expect("pushed above");
        match get(3)? {
            "robot" => {
                if i != snap.positions.len() {
                    return Err(bad("i"));
                }
                let x: f64 = get(6)?.parse().map_err(|_| bad("x"))?;
                let y: f64 = get(7)?.parse().map_err(|_| bad("y"))?;
                snap.positions.push(Point::new(x, y));
            }
            kind @ ("edge" | "tree") => {
                let j: usize = get(5)?.parse().map_err(|_| bad("j"))?;
                if kind == "edge" {
                    snap.edges.push((i, j));
                } else {
                    snap.tree.push((i, j));
                }
            }
            _ => return Err(bad("kind")),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PlotFiles {
    pub bars: PathBuf,
    pub network: PathBuf,
}

/// Writes `bars.csv` and `network.csv` into `dir`, creating it if needed.
pub fn emit_plotdata(summary: &Summary, snapshots: &[NetworkSnapshot], dir: &Path) -> Result<PlotFiles> {
    std::fs::create_dir_all(dir)?;
    let files = PlotFiles {
        bars: dir.join("bars.csv"),
        network: dir.join("network.csv"),
    };
    write_bars(summary, BufWriter::new(File::create(&files.bars)?))?;
    write_snapshots(snapshots, BufWriter::new(File::create(&files.network)?))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiment::run_experiment;
    use crate::harness::summary::summarize;
    use crate::tracking::ScenarioConfig;

    #[test]
    fn empty_summary_gives_header_only_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plotdata(&Summary::default(), &[], dir.path()).unwrap();
        assert_eq!(std::fs::read_to_string(files.bars).unwrap(), "epoch,algorithm,weight_scheme,mean,std,n\n");
        assert_eq!(
            std::fs::read_to_string(files.network).unwrap(),
            "round,epoch,algorithm,kind,i,j,x,y\n"
        );
    }

    #[test]
    fn three_series_and_lossless_snapshots() {
        let cfg = ScenarioConfig {
            robots: 4,
            targets: 30,
            rounds: 1,
            epochs: 2,
            ..Default::default()
        };
        let res = run_experiment(&cfg).unwrap();
        let summary = summarize(&res.rows).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plotdata(&summary, &res.snapshots, dir.path()).unwrap();

        let bars = std::fs::read_to_string(files.bars).unwrap();
        for a in Algorithm::ALL {
            assert_eq!(bars.lines().filter(|l| l.split(',').nth(1) == Some(a.name())).count(), 2);
        }
        let back = read_snapshots(File::open(files.network).unwrap()).unwrap();
        assert_eq!(back, res.snapshots);
        assert!(back.iter().any(|s| !s.tree.is_empty()));
    }

    #[test]
    fn awkward_coordinates_survive() {
        let snap = NetworkSnapshot {
            round: 0,
            epoch: 0,
            algorithm: Algorithm::Greedy,
            positions: vec![Point::new(0.1 + 0.2, -1e-300), Point::new(f64::MAX, 1.0 / 3.0)],
            edges: vec![(0, 1)],
            tree: vec![],
        };
        let mut buf = vec![];
        write_snapshots(std::slice::from_ref(&snap), &mut buf).unwrap();
        assert_eq!(read_snapshots(buf.as_slice()).unwrap(), vec![snap]);
    }

    #[test]
    fn unwritable_path_fails() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        assert!(matches!(
            emit_plotdata(&Summary::default(), &[], &blocker.join("sub")),
            Err(CsmError::Io(_))
        ));
    }
}
