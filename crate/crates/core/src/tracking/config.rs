use crate::deviation::ObjectiveMode;
use crate::error::{CsmError, Result};
use crate::tracking::weights::WeightScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Greedy selection, MST topology, deviation minimization.
    Proposed,
    /// Greedy selection with no connectivity enforcement.
    Greedy,
    /// Sequential graph greedy baseline.
    Sgg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Proposed, Algorithm::Greedy, Algorithm::Sgg];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Proposed => "proposed",
            Algorithm::Greedy => "greedy",
            Algorithm::Sgg => "sgg",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" | "csm" => Ok(Algorithm::Proposed),
            "greedy" => Ok(Algorithm::Greedy),
            "sgg" => Ok(Algorithm::Sgg),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Team sizes and target counts of the three reference scenarios.
pub const PRESETS: [(&str, usize, usize); 3] = [("small", 5, 80), ("medium", 8, 140), ("large", 12, 200)];

/// Everything needed to reproduce a simulation. Lengths in meters, times in
/// steps (one step per epoch).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub robots: usize,
    pub targets: usize,
    pub comm_radius: f64,
    pub reach_radius: f64,
    pub sense_radius: f64,
    pub safety_radius: f64,
    pub noise_std: f64,
    pub process_noise_std: f64,
    pub max_target_speed: f64,
    pub epochs: usize,
    pub rounds: usize,
    pub radial_steps: usize,
    pub angular_step_deg: u32,
    pub weight_scheme: WeightScheme,
    pub weight3_samples: usize,
    pub weight3_radius: f64,
    pub algorithms: Vec<Algorithm>,
    pub objective_mode: ObjectiveMode,
    pub solver_starts: usize,
    pub seed: u64,
    pub arena_width: f64,
    pub arena_height: f64,
    /// Wall-clock timings are not reproducible; off by default so result
    /// files stay byte-identical across runs.
    pub record_timing: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            robots: 8,
            targets: 140,
            comm_radius: 10.0,
            reach_radius: 4.0,
            sense_radius: 5.0,
            safety_radius: 0.5,
            noise_std: 0.5,
            process_noise_std: 0.1,
            max_target_speed: 0.3,
            epochs: 10,
            rounds: 10,
            radial_steps: 3,
            angular_step_deg: 30,
            weight_scheme: WeightScheme::Weight1,
            weight3_samples: 16,
            weight3_radius: 1.0,
            algorithms: Algorithm::ALL.to_vec(),
            objective_mode: ObjectiveMode::SquaredNorm,
            solver_starts: 4,
            seed: 0,
            arena_width: 60.0,
            arena_height: 60.0,
            record_timing: false,
        }
    }
}

impl ScenarioConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let (_, robots, targets) = PRESETS
            .iter()
            .find(|(n, _, _)| *n == name)
            .ok_or_else(|| CsmError::config("preset", format!("unknown preset `{name}`")))?;
        Ok(ScenarioConfig {
            robots: *robots,
            targets: *targets,
            ..Default::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CsmError::config(field, format!("must be positive, got {v}")))
            }
        }
        if self.robots == 0 {
            return Err(CsmError::config("robots", "must be at least 1"));
        }
        for (field, v) in [("epochs", self.epochs), ("rounds", self.rounds), ("radial_steps", self.radial_steps)] {
            if v == 0 {
                return Err(CsmError::config(field, "must be at least 1"));
            }
        }
        positive("comm_radius", self.comm_radius)?;
        positive("reach_radius", self.reach_radius)?;
        positive("sense_radius", self.sense_radius)?;
        positive("noise_std", self.noise_std)?;
        positive("arena_width", self.arena_width)?;
        positive("arena_height", self.arena_height)?;
        positive("weight3_radius", self.weight3_radius)?;
        if !(self.safety_radius >= 0.0 && self.safety_radius < self.comm_radius) {
            return Err(CsmError::config("safety_radius", "need 0 <= safety_radius < comm_radius"));
        }
        if !(self.process_noise_std >= 0.0) {
            return Err(CsmError::config("process_noise_std", "must be non-negative"));
        }
        if !(self.max_target_speed >= 0.0) {
            return Err(CsmError::config("max_target_speed", "must be non-negative"));
        }
        if self.angular_step_deg == 0 || 360 % self.angular_step_deg != 0 {
            return Err(CsmError::config("angular_step_deg", "must divide 360"));
        }
        if self.algorithms.is_empty() {
            return Err(CsmError::config("algorithms", "at least one algorithm is required"));
        }
        if self.solver_starts == 0 {
            return Err(CsmError::config("solver_starts", "must be at least 1"));
        }
        // the initial lattice must keep robots apart
        if self.safety_radius >= 0.8 * self.comm_radius {
            return Err(CsmError::config("safety_radius", "must be below the initial spacing 0.8·comm_radius"));
        }
        Ok(())
    }
}
