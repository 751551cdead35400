use crate::geometry::Point;
use crate::submodular::{SetFunction, Trajectory};
use crate::tracking::target::TargetEstimate;

/// Number of targets whose (predicted) position lies inside at least one
/// sensor footprint centered at a selected endpoint. A coverage function,
/// hence monotone submodular.
#[derive(Debug, Clone)]
pub struct CoverageObjective {
    targets: Vec<Point>,
    sense_radius_sq: f64,
}

impl CoverageObjective {
    pub fn new(targets: Vec<Point>, sense_radius: f64) -> Self {
        CoverageObjective {
            targets,
            sense_radius_sq: sense_radius * sense_radius,
        }
    }

    pub fn from_estimates(estimates: &[TargetEstimate], sense_radius: f64) -> Self {
        Self::new(estimates.iter().map(|e| e.mean).collect(), sense_radius)
    }

    pub fn targets(&self) -> &[Point] {
        &self.targets
    }

    /// Coverage by robots standing at `positions`.
    pub fn value_at(&self, positions: &[Point]) -> f64 {
        self.covered(positions.iter()) as f64
    }

    fn covered<'a>(&self, centers: impl Iterator<Item = &'a Point> + Clone) -> usize {
        self.targets
            .iter()
            .filter(|t| {
                centers
                    .clone()
                    .any(|c| (*t - c).norm_squared() <= self.sense_radius_sq)
            })
            .count()
    }
}

impl SetFunction for CoverageObjective {
    fn value(&self, set: &[Trajectory]) -> f64 {
        self.covered(set.iter().map(|t| &t.endpoint)) as f64
    }
}

/// Coverage of `set` against the means of `estimates`.
pub fn coverage_objective(set: &[Trajectory], estimates: &[TargetEstimate], sense_radius: f64) -> f64 {
    CoverageObjective::from_estimates(estimates, sense_radius).value(set)
}
