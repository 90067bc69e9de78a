//! Closed-form rigid-body dynamics of the planar two-link arm.
//!
//! The model is the point-mass form
//!
//! ```text
//! M(q) q̈ + V_m(q, q̇) q̇ + G(q) = τ_net
//! ```
//!
//! with `M` written in its symmetric form (the `cos(q2)` coupling appears in
//! both off-diagonal entries and in `M11`) and `V_m` chosen from the
//! Christoffel symbols so that `Ṁ - 2 V_m` is skew-symmetric.

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::error::SimError;

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Smallest admissible |det M| before forward dynamics refuses to invert.
pub const MIN_INERTIA_DET: f64 = 1e-12;

/// Physical parameters of the two-link arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotParams {
    /// Mass of link 1 (kg).
    pub m1: f64,
    /// Mass of link 2 (kg).
    pub m2: f64,
    /// Length of link 1 (m).
    pub l1: f64,
    /// Length of link 2 (m).
    pub l2: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            m1: 0.5,
            m2: 0.4,
            l1: 0.6,
            l2: 0.5,
            g: 9.807,
        }
    }
}

impl RobotParams {
    pub fn new(m1: f64, m2: f64, l1: f64, l2: f64, g: f64) -> Result<Self, SimError> {
        let p = Self { m1, m2, l1, l2, g };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, v) in [
            ("robot.m1", self.m1),
            ("robot.m2", self.m2),
            ("robot.l1", self.l1),
            ("robot.l2", self.l2),
            ("robot.g", self.g),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::config(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// The grouped inertial parameters `[(m1+m2)·l1², m2·l2², m2·l1·l2]`.
    ///
    /// The whole model is linear in these three numbers once lengths and
    /// gravity are known.
    pub fn inertial_parameters(&self) -> Vector3<f64> {
        Vector3::new(
            (self.m1 + self.m2) * self.l1 * self.l1,
            self.m2 * self.l2 * self.l2,
            self.m2 * self.l1 * self.l2,
        )
    }
}

/// Joint angles (rad) and velocities (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub q: Vec2,
    pub qdot: Vec2,
}

impl PlantState {
    pub fn new(q: Vec2, qdot: Vec2) -> Self {
        Self { q, qdot }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qdot.iter()).all(|v| v.is_finite())
    }
}

pub fn mass_matrix(p: &RobotParams, q: &Vec2) -> Mat2 {
    let phi = p.inertial_parameters();
    let c2 = q[1].cos();
    let m11 = phi[0] + phi[1] + 2.0 * phi[2] * c2;
    let m12 = phi[1] + phi[2] * c2;
    Mat2::new(m11, m12, m12, phi[1])
}

pub fn coriolis_matrix(p: &RobotParams, q: &Vec2, qdot: &Vec2) -> Mat2 {
    let h = p.m2 * p.l1 * p.l2 * q[1].sin();
    Mat2::new(
        -h * qdot[1],
        -h * (qdot[0] + qdot[1]),
        h * qdot[0],
        0.0,
    )
}

pub fn gravity_vector(p: &RobotParams, q: &Vec2) -> Vec2 {
    let c1 = q[0].cos();
    let c12 = (q[0] + q[1]).cos();
    let g2 = p.m2 * p.g * p.l2 * c12;
    Vec2::new((p.m1 + p.m2) * p.g * p.l1 * c1 + g2, g2)
}

/// Joint accelerations `q̈ = M⁻¹ (τ_net - V_m q̇ - G)`.
///
/// `tau_net` is the applied torque with the external disturbances already
/// subtracted.
pub fn forward_dynamics(p: &RobotParams, s: &PlantState, tau_net: &Vec2) -> Result<Vec2, SimError> {
    let m = mass_matrix(p, &s.q);
    let rhs = tau_net - coriolis_matrix(p, &s.q, &s.qdot) * s.qdot - gravity_vector(p, &s.q);
    solve2(&m, &rhs)
}

pub(crate) fn solve2(m: &Mat2, b: &Vec2) -> Result<Vec2, SimError> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.is_nan() || det.abs() < MIN_INERTIA_DET {
        return Err(SimError::DegenerateInertia { det });
    }
    Ok(Vec2::new(
        (m[(1, 1)] * b[0] - m[(0, 1)] * b[1]) / det,
        (m[(0, 0)] * b[1] - m[(1, 0)] * b[0]) / det,
    ))
}

/// A joint-space rigid-body plant.
///
/// The simulation engine only talks to the arm through this trait; the
/// two-link [`RobotParams`] model is the one implementation shipped.
pub trait Plant {
    fn mass_matrix(&self, q: &Vec2) -> Mat2;
    fn coriolis_matrix(&self, q: &Vec2, qdot: &Vec2) -> Mat2;
    fn gravity(&self, q: &Vec2) -> Vec2;

    fn forward_dynamics(&self, s: &PlantState, tau_net: &Vec2) -> Result<Vec2, SimError> {
        let rhs = tau_net - self.coriolis_matrix(&s.q, &s.qdot) * s.qdot - self.gravity(&s.q);
        solve2(&self.mass_matrix(&s.q), &rhs)
    }
}

impl Plant for RobotParams {
    fn mass_matrix(&self, q: &Vec2) -> Mat2 {
        mass_matrix(self, q)
    }

    fn coriolis_matrix(&self, q: &Vec2, qdot: &Vec2) -> Mat2 {
        coriolis_matrix(self, q, qdot)
    }

    fn gravity(&self, q: &Vec2) -> Vec2 {
        gravity_vector(self, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn default_params_match_table() {
        let p = RobotParams::default();
        assert_eq!((p.m1, p.m2, p.l1, p.l2, p.g), (0.5, 0.4, 0.6, 0.5, 9.807));
        let phi = p.inertial_parameters();
        assert!(close(phi[0], 0.324, 1e-15));
        assert!(close(phi[1], 0.1, 1e-15));
        assert!(close(phi[2], 0.12, 1e-15));
    }

    #[test]
    fn rejects_non_positive_params() {
        let err = RobotParams::new(0.5, -0.4, 0.6, 0.5, 9.807).unwrap_err();
        assert!(matches!(err, SimError::InvalidConfig { ref field, .. } if field == "robot.m2"));
        assert!(RobotParams::new(0.5, 0.4, 0.0, 0.5, 9.807).is_err());
        assert!(RobotParams::new(0.5, 0.4, 0.6, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn mass_matrix_at_straight_arm() {
        // Entries evaluated by hand: M11 = 0.9·0.36 + 0.4·0.25 + 2·0.4·0.6·0.5,
        // M12 = 0.4·0.25 + 0.4·0.6·0.5, M22 = 0.4·0.25.
        let m = mass_matrix(&RobotParams::default(), &Vec2::new(0.3, 0.0));
        let expected = Mat2::new(0.664, 0.22, 0.22, 0.1);
        assert!((m - expected).abs().max() < 1e-14, "{m}");
    }

    #[test]
    fn mass_matrix_off_diagonal_at_right_angle() {
        let m = mass_matrix(&RobotParams::default(), &Vec2::new(-1.0, FRAC_PI_2));
        assert!(close(m[(0, 1)], 0.1, 1e-15));
        assert!(close(m[(1, 0)], 0.1, 1e-15));
    }

    #[test]
    fn mass_matrix_positive_definite_on_grid() {
        let p = RobotParams::default();
        for i in 0..100 {
            for j in 0..100 {
                let q = Vec2::new(-PI + 2.0 * PI * i as f64 / 99.0, -PI + 2.0 * PI * j as f64 / 99.0);
                let m = mass_matrix(&p, &q);
                assert_eq!(m, m.transpose());
                let tr = m.trace();
                let det = m.determinant();
                let disc = (tr * tr / 4.0 - det).sqrt();
                assert!(tr / 2.0 - disc > 0.0, "not PD at {q}");
            }
        }
    }

    #[test]
    fn coriolis_vanishes_at_rest() {
        let v = coriolis_matrix(&RobotParams::default(), &Vec2::new(0.4, 1.1), &Vec2::zeros());
        assert_eq!(v, Mat2::zeros());
    }

    #[test]
    fn coriolis_product_at_right_angle() {
        let p = RobotParams::default();
        let qdot = Vec2::new(1.0, 1.0);
        let v = coriolis_matrix(&p, &Vec2::new(0.0, FRAC_PI_2), &qdot) * qdot;
        assert!(close(v[0], -0.36, 1e-14));
        assert!(close(v[1], 0.12, 1e-14));
    }

    #[test]
    fn gravity_examples() {
        let p = RobotParams::default();
        let g0 = gravity_vector(&p, &Vec2::zeros());
        assert!(close(g0[0], 7.2572, 1e-4) && close(g0[1], 1.9614, 1e-4));
        let up = gravity_vector(&p, &Vec2::new(FRAC_PI_2, 0.0));
        assert!(up.abs().max() < 1e-15);
        let down = gravity_vector(&p, &Vec2::new(PI, 0.0));
        assert!(close(down[0], -7.2572, 1e-4) && close(down[1], -1.9614, 1e-4));
    }

    #[test]
    fn forward_dynamics_equilibria() {
        let p = RobotParams::default();
        let q = Vec2::new(0.2, -0.7);
        let s = PlantState::new(q, Vec2::zeros());
        let acc = forward_dynamics(&p, &s, &gravity_vector(&p, &q)).unwrap();
        assert!(acc.abs().max() < 1e-12);

        let up = PlantState::new(Vec2::new(FRAC_PI_2, 0.0), Vec2::zeros());
        let acc = forward_dynamics(&p, &up, &Vec2::zeros()).unwrap();
        assert!(acc.abs().max() < 1e-12);
    }

    #[test]
    fn solve_rejects_singular_matrix() {
        let err = solve2(&Mat2::new(1.0, 2.0, 2.0, 4.0), &Vec2::new(1.0, 1.0)).unwrap_err();
        assert!(matches!(err, SimError::DegenerateInertia { .. }));
    }

    #[test]
    fn plant_trait_matches_free_functions() {
        let p = RobotParams::default();
        let s = PlantState::new(Vec2::new(0.3, -0.2), Vec2::new(1.0, -2.0));
        let tau = Vec2::new(0.5, 0.1);
        assert_eq!(
            Plant::forward_dynamics(&p, &s, &tau).unwrap(),
            forward_dynamics(&p, &s, &tau).unwrap()
        );
    }
}
