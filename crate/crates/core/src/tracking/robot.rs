use crate::error::{CsmError, Result};
use crate::geometry::{Disk, Point};
use crate::submodular::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub id: usize,
    pub position: Point,
    /// Radius of the disk reachable within one epoch.
    pub reach: f64,
    pub sense_radius: f64,
}

impl RobotState {
    pub fn reach_disk(&self) -> Disk {
        Disk::new(self.position, self.reach)
    }
}

/// Candidate trajectories on a polar lattice over the reach disk: the
/// "stay" trajectory first (`traj_id` 0), then `radial_steps` rings of
/// `360 / angular_step_deg` endpoints each, inner ring first, angles
/// counter-clockwise from +x.
pub fn discretize_reachable(
    robot: &RobotState,
    radial_steps: usize,
    angular_step_deg: u32,
) -> Result<Vec<Trajectory>> {
    if radial_steps == 0 {
        return Err(CsmError::InvalidStep("need at least one radial step".into()));
    }
    if angular_step_deg == 0 || 360 % angular_step_deg != 0 {
        return Err(CsmError::InvalidStep(format!(
            "angular step {angular_step_deg}° does not divide 360°"
        )));
    }
    let disk = robot.reach_disk();
    let angles = (360 / angular_step_deg) as usize;
    let mut out = Vec::with_capacity(1 + radial_steps * angles);
    out.push(Trajectory::new(robot.id, 0, robot.position, &disk)?);
    for ring in 1..=radial_steps {
        let radius = robot.reach * ring as f64 / radial_steps as f64;
        for a in 0..angles {
            let theta = ((a as u32 * angular_step_deg) as f64).to_radians();
            let endpoint = robot.position + Point::new(theta.cos(), theta.sin()) * radius;
            out.push(Trajectory::new(robot.id, out.len(), endpoint, &disk)?);
        }
    }
    Ok(out)
}
