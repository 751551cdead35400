//! Planar primitives shared by every module.

use nalgebra::Vector2;

/// A position in the 2D workspace, in meters.
pub type Point = Vector2<f64>;

pub fn point(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Closed disk, used for reachable sets and sensor footprints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Self {
        Disk { center, radius }
    }

    pub fn contains(&self, p: &Point) -> bool {
        (p - self.center).norm_squared() <= self.radius * self.radius
    }

    /// Nearest point of the disk to `p`.
    pub fn project(&self, p: &Point) -> Point {
        let d = p - self.center;
        let n = d.norm();
        if n <= self.radius {
            *p
        } else {
            self.center + d * (self.radius / n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_lands_on_boundary() {
        let disk = Disk::new(point(1.0, 1.0), 2.0);
        let p = disk.project(&point(1.0, 10.0));
        assert!((p - point(1.0, 3.0)).norm() < 1e-12);
        assert_eq!(disk.project(&point(2.0, 1.0)), point(2.0, 1.0));
    }
}
