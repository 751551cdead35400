//! Per-robot reluctance to deviate from the greedy endpoint.

use rand::Rng;

use crate::error::Result;
use crate::geometry::{Disk, Point};
use crate::submodular::{SetFunction, Selection, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightScheme {
    /// `w_i = f({s_i})`
    #[default]
    Weight1,
    /// `w_i = f(S) − f(S ∖ {s_i})`
    Weight2,
    /// `w_i = f(x_i^g) − min_k f(x_k)` over samples `x_k` near `x_i^g`
    Weight3,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 3] = [WeightScheme::Weight1, WeightScheme::Weight2, WeightScheme::Weight3];

    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::Weight1 => "weight1",
            WeightScheme::Weight2 => "weight2",
            WeightScheme::Weight3 => "weight3",
        }
    }
}

impl std::fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for WeightScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "weight1" | "w1" | "1" => Ok(WeightScheme::Weight1),
            "weight2" | "w2" | "2" => Ok(WeightScheme::Weight2),
            "weight3" | "w3" | "3" => Ok(WeightScheme::Weight3),
            other => Err(format!("unknown weight scheme `{other}`")),
        }
    }
}

/// Uniform sample from a disk.
pub(crate) fn sample_in_disk<R: Rng + ?Sized>(rng: &mut R, disk: &Disk) -> Point {
    let r = disk.radius * rng.random::<f64>().sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    disk.center + Point::new(theta.cos(), theta.sin()) * r
}

/// Weights for the deviation problem. Weight3 draws `samples` points
/// uniformly from the disk of radius `sample_radius` around each greedy
/// endpoint and evaluates `f` for a single robot standing there.
pub fn compute_weights<F, R>(
    scheme: WeightScheme,
    selection: &Selection,
    f: &F,
    samples: usize,
    sample_radius: f64,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    F: SetFunction + ?Sized,
    R: Rng + ?Sized,
{
    let picks = &selection.picks;
    let weights = match scheme {
        WeightScheme::Weight1 => picks.iter().map(|s| f.value(std::slice::from_ref(s))).collect(),
        WeightScheme::Weight2 => {
            let full = f.value(picks);
            (0..picks.len())
                .map(|i| {
                    let rest: Vec<Trajectory> = picks
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i)
                        .map(|(_, t)| *t)
                        .collect();
                    (full - f.value(&rest)).max(0.0)
                })
                .collect()
        }
        WeightScheme::Weight3 => {
            let mut out = Vec::with_capacity(picks.len());
            for s in picks {
                let disk = Disk::new(s.endpoint, sample_radius);
                let here = f.value(std::slice::from_ref(s));
                let mut lowest = here;
                for k in 0..samples {
                    let probe = Trajectory::new(s.robot_id, k, sample_in_disk(rng, &disk), &disk)?;
                    lowest = lowest.min(f.value(&[probe]));
                }
                out.push((here - lowest).max(0.0));
            }
            out
        }
    };
    Ok(weights)
}
