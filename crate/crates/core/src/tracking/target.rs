//! Ground targets and their position filters.
//!
//! Targets follow a single-integrator model `p(t+1) = p(t) + v(t)`. The
//! filter tracks position only; the velocity used for prediction is a
//! finite difference of the two latest raw measurements.

use nalgebra::Matrix2;

use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub id: usize,
    pub position: Point,
    pub velocity: Point,
}

impl TargetState {
    /// One time step, reflecting off the walls of `[0, width] × [0, height]`.
    pub fn step(&mut self, width: f64, height: f64) {
        self.position += self.velocity;
        for (axis, limit) in [(0, width), (1, height)] {
            if self.position[axis] < 0.0 {
                self.position[axis] = -self.position[axis];
                self.velocity[axis] = -self.velocity[axis];
            } else if self.position[axis] > limit {
                self.position[axis] = 2.0 * limit - self.position[axis];
                self.velocity[axis] = -self.velocity[axis];
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetEstimate {
    pub id: usize,
    pub mean: Point,
    pub velocity: Point,
    pub covariance: Matrix2<f64>,
    /// Latest raw measurement and the time step it was taken at.
    pub last_measurement: Option<(Point, usize)>,
}

impl TargetEstimate {
    /// Estimate seeded from a single measurement at time `t`, with zero
    /// velocity.
    pub fn from_measurement(id: usize, z: Point, noise_std: f64, t: usize) -> Self {
        TargetEstimate {
            id,
            mean: z,
            velocity: Point::zeros(),
            covariance: Matrix2::identity() * (noise_std * noise_std),
            last_measurement: Some((z, t)),
        }
    }

    pub fn last_observed(&self) -> Option<usize> {
        self.last_measurement.map(|(_, t)| t)
    }
}

/// Advances the mean by the estimated velocity and inflates the covariance
/// by `process_std² · I`.
pub fn kf_predict(e: &TargetEstimate, process_std: f64) -> TargetEstimate {
    TargetEstimate {
        mean: e.mean + e.velocity,
        covariance: e.covariance + Matrix2::identity() * (process_std * process_std),
        ..e.clone()
    }
}

/// Fuses measurement `z` taken at time step `t`.
pub fn kf_update(e: &TargetEstimate, z: Point, noise_std: f64, t: usize) -> TargetEstimate {
    let r = Matrix2::identity() * (noise_std * noise_std);
    let p = e.covariance;
    let s = p + r;
    let gain = match s.try_inverse() {
        Some(inv) => p * inv,
        // zero prior and zero noise: keep the prior
        None => Matrix2::zeros(),
    };
    let mean = e.mean + gain * (z - e.mean);
    // Joseph form keeps the covariance symmetric positive semidefinite.
    let i_k = Matrix2::identity() - gain;
    let covariance = i_k * p * i_k.transpose() + gain * r * gain.transpose();
    let covariance = (covariance + covariance.transpose()) * 0.5;
    let velocity = match e.last_measurement {
        Some((prev, t_prev)) if t > t_prev => (z - prev) / (t - t_prev) as f64,
        _ => e.velocity,
    };
    TargetEstimate {
        id: e.id,
        mean,
        velocity,
        covariance,
        last_measurement: Some((z, t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn prior() -> TargetEstimate {
        TargetEstimate::from_measurement(0, point(1.0, 2.0), 0.5, 0)
    }

    #[test]
    fn zero_velocity_prediction_only_grows_uncertainty() {
        let e = prior();
        let p = kf_predict(&e, 0.1);
        assert_eq!(p.mean, e.mean);
        assert!(p.covariance.trace() > e.covariance.trace());
    }

    #[test]
    fn prediction_applies_velocity() {
        let e = TargetEstimate {
            velocity: point(1.0, 0.0),
            ..prior()
        };
        assert_eq!(kf_predict(&e, 0.1).mean, point(2.0, 2.0));
    }

    #[test]
    fn repeated_prediction_never_shrinks_covariance() {
        let mut e = prior();
        let mut trace = e.covariance.trace();
        for _ in 0..10 {
            e = kf_predict(&e, 0.1);
            assert!(e.covariance.trace() >= trace);
            trace = e.covariance.trace();
        }
    }

    #[test]
    fn precise_measurement_overrides_prior() {
        let z = point(7.0, -3.0);
        let e = kf_update(&kf_predict(&prior(), 0.1), z, 1e-9, 1);
        assert!((e.mean - z).norm() < 1e-9);
    }

    #[test]
    fn velocity_from_consecutive_measurements() {
        let e = TargetEstimate::from_measurement(0, point(0.0, 0.0), 0.5, 3);
        let e = kf_update(&kf_predict(&e, 0.1), point(2.0, 0.0), 0.5, 4);
        assert_eq!(e.velocity, point(2.0, 0.0));
        // a gap of two steps halves the difference
        let e = kf_update(&e, point(4.0, 2.0), 0.5, 6);
        assert_eq!(e.velocity, point(1.0, 1.0));
    }

    #[test]
    fn update_does_not_increase_trace() {
        let predicted = kf_predict(&prior(), 0.1);
        let updated = kf_update(&predicted, point(1.2, 2.1), 0.5, 1);
        assert!(updated.covariance.trace() <= predicted.covariance.trace());
        let c = updated.covariance;
        assert_eq!(c[(0, 1)], c[(1, 0)]);
        assert!(c.symmetric_eigenvalues().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn filtering_beats_raw_measurements_on_stationary_target() {
        let truth = point(10.0, -4.0);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let mut sq_err = 0.0;
        let seeds = 100;
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || truth + point(noise.sample(&mut rng), noise.sample(&mut rng));
            let mut e = TargetEstimate::from_measurement(0, draw(), 0.5, 0);
            for t in 1..=20 {
                e = kf_update(&e, draw(), 0.5, t);
            }
            sq_err += (e.mean - truth).norm_squared();
        }
        let rmse = (sq_err / seeds as f64).sqrt();
        // a single raw measurement has 2D RMSE 0.5·√2
        assert!(rmse < 0.5, "rmse {rmse}");
    }

    #[test]
    fn targets_reflect_at_walls() {
        let mut t = TargetState {
            id: 0,
            position: point(0.2, 59.9),
            velocity: point(-0.3, 0.3),
        };
        t.step(60.0, 60.0);
        assert!((t.position - point(0.1, 59.8)).norm() < 1e-12);
        assert_eq!(t.velocity, point(0.3, -0.3));
    }

    proptest::proptest! {
        #[test]
        fn covariance_stays_symmetric_positive_definite(
            zs in proptest::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..30),
            noise in 0.05..3.0f64,
            process in 0.0..1.0f64,
        ) {
            let mut e = TargetEstimate::from_measurement(0, point(zs[0].0, zs[0].1), noise, 0);
            for (t, &(x, y)) in zs.iter().enumerate().skip(1) {
                let predicted = kf_predict(&e, process);
                proptest::prop_assert!(predicted.covariance.trace() >= e.covariance.trace());
                e = kf_update(&predicted, point(x, y), noise, t);
                let p = e.covariance;
                proptest::prop_assert!((p[(0, 1)] - p[(1, 0)]).abs() < 1e-12);
                proptest::prop_assert!(p[(0, 0)] > 0.0 && p.determinant() > 0.0);
                // a measurement never leaves more uncertainty than it has itself
                proptest::prop_assert!(p[(0, 0)] <= noise * noise + 1e-12);
            }
        }
    }
}
