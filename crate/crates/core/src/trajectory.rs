//! Desired joint trajectories with analytic derivatives.
//!
//! Link 1 follows `A1·sin(w1·t)·e^(-d·t)` and link 2 follows
//! `A2·cos(w2·t)·e^(-d·t)`.

use crate::dynamics::Vec2;
use crate::error::SimError;

/// Desired position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredState {
    pub qd: Vec2,
    pub qd_dot: Vec2,
    pub qd_ddot: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTrajectory {
    /// Amplitudes (rad).
    pub amplitude: Vec2,
    /// Angular rates of the sine (link 1) and cosine (link 2) carriers (rad/s).
    pub rate: Vec2,
    /// Exponential envelope decay (1/s).
    pub decay: f64,
}

impl Default for ReferenceTrajectory {
    fn default() -> Self {
        Self {
            amplitude: Vec2::new(114.95_f64.to_radians(), 85.94_f64.to_radians()),
            rate: Vec2::new(1.5, 2.0),
            decay: 0.03,
        }
    }
}

impl ReferenceTrajectory {
    pub fn validate(&self) -> Result<(), SimError> {
        let finite = self.amplitude.iter().chain(self.rate.iter()).all(|v| v.is_finite());
        if !(finite && self.decay.is_finite()) {
            return Err(SimError::config("trajectory", "all values must be finite"));
        }
        if self.decay < 0.0 {
            return Err(SimError::config("trajectory.decay", "must be >= 0"));
        }
        Ok(())
    }

    pub fn desired(&self, t: f64) -> DesiredState {
        let d = self.decay;
        let env = (-d * t).exp();

        let (a1, w1) = (self.amplitude[0], self.rate[0]);
        let (s1, c1) = (w1 * t).sin_cos();
        let q1 = a1 * env * s1;
        let q1_dot = a1 * env * (w1 * c1 - d * s1);
        let q1_ddot = a1 * env * ((d * d - w1 * w1) * s1 - 2.0 * d * w1 * c1);

        let (a2, w2) = (self.amplitude[1], self.rate[1]);
        let (s2, c2) = (w2 * t).sin_cos();
        let q2 = a2 * env * c2;
        let q2_dot = a2 * env * (-w2 * s2 - d * c2);
        let q2_ddot = a2 * env * ((d * d - w2 * w2) * c2 + 2.0 * d * w2 * s2);

        DesiredState {
            qd: Vec2::new(q1, q2),
            qd_dot: Vec2::new(q1_dot, q2_dot),
            qd_ddot: Vec2::new(q1_ddot, q2_ddot),
        }
    }
}

/// The default reference evaluated at `t`.
pub fn desired(t: f64) -> DesiredState {
    ReferenceTrajectory::default().desired(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn initial_conditions() {
        let d = desired(0.0);
        assert_eq!(d.qd[0], 0.0);
        assert!((d.qd[1].to_degrees() - 85.94).abs() < 1e-12);
        assert!((d.qd[1] - 1.499936).abs() < 1e-6);
    }

    #[test]
    fn initial_velocity() {
        let traj = ReferenceTrajectory::default();
        let d = traj.desired(0.0);
        assert!((d.qd_dot[0] - 3.00938).abs() < 1e-5);
        assert!((d.qd_dot[1] + 0.04500).abs() < 1e-5);

        let h = 1e-6;
        // one-sided at t = 0 would lose an order; the formula is valid for t < 0 too
        let fd = (traj.desired(h).qd - traj.desired(-h).qd) / (2.0 * h);
        assert!((fd - d.qd_dot).abs().max() < 1e-6);
    }

    #[test]
    fn amplitudes_keep_degree_precision() {
        let traj = ReferenceTrajectory::default();
        assert!((traj.amplitude[0] - 2.00626).abs() < 1e-5);
        assert_ne!(traj.amplitude[0], 2.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn derivatives_match_finite_differences(t in 1e-3f64..20.0) {
            let traj = ReferenceTrajectory::default();
            let h = 1e-6;
            let (plus, minus, mid) = (traj.desired(t + h), traj.desired(t - h), traj.desired(t));
            let vel = (plus.qd - minus.qd) / (2.0 * h);
            let acc = (plus.qd_dot - minus.qd_dot) / (2.0 * h);
            prop_assert!((vel - mid.qd_dot).abs().max() < 1e-6);
            prop_assert!((acc - mid.qd_ddot).abs().max() < 1e-4);
        }

        #[test]
        fn stays_inside_envelope(t in 0.0f64..50.0) {
            let traj = ReferenceTrajectory::default();
            let env = (-traj.decay * t).exp();
            let d = traj.desired(t);
            prop_assert!(d.qd[0].abs() <= traj.amplitude[0] * env + 1e-15);
            prop_assert!(d.qd[1].abs() <= traj.amplitude[1] * env + 1e-15);
        }
    }
}
