//! Adaptive-sliding mode tracking law and a PD-plus-gravity baseline.
//!
//! With the filtered error `η = Δq̇ + σΔq` the commanded torque is
//!
//! ```text
//! τ = Y φ̂ + K1 η + K2 sgn(η),      φ̂̇ = Λ Yᵀ η
//! ```
//!
//! where `Y φ = V_m (q̇_d + σΔq) + M (q̈_d + σΔq̇) + G` for the grouped
//! parameters `φ = [(m1+m2)·l1², m2·l2², m2·l1·l2]`. The law reads positions
//! and velocities only; joint accelerations are never used.

use nalgebra::{Matrix2x3, Vector3};

use crate::dynamics::Vec2;
use crate::error::SimError;

/// Diagonal controller gains and the optional boundary-layer width.
///
/// Diagonals are stored as vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSet {
    pub k1: Vec2,
    pub k2: Vec2,
    pub sigma: Vec2,
    pub lambda: Vector3<f64>,
    /// Boundary-layer width; `0` selects the pure signum.
    pub epsilon: f64,
}

impl Default for GainSet {
    fn default() -> Self {
        Self {
            k1: Vec2::new(80.0, 60.0),
            k2: Vec2::new(2.0, 1.5),
            sigma: Vec2::new(5.0, 5.0),
            lambda: Vector3::new(1.0, 1.0, 1.0),
            epsilon: 0.0,
        }
    }
}

fn check_positive(field: &str, vals: &[f64]) -> Result<(), SimError> {
    match vals.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        Some(i) => Err(SimError::config(
            field,
            format!("diagonal entry {} must be > 0, got {}", i + 1, vals[i]),
        )),
        None => Ok(()),
    }
}

impl GainSet {
    pub fn validate(&self) -> Result<(), SimError> {
        check_positive("gains.k1", self.k1.as_slice())?;
        check_positive("gains.k2", self.k2.as_slice())?;
        check_positive("gains.sigma", self.sigma.as_slice())?;
        check_positive("gains.lambda", self.lambda.as_slice())?;
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(SimError::config("gains.epsilon", format!("must be >= 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Proportional and derivative diagonals of the baseline controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdGains {
    pub kp: Vec2,
    pub kd: Vec2,
}

impl PdGains {
    /// The PD pair whose feedback equals `K1 η`, i.e. `Kp = K1 σ`, `Kd = K1`.
    pub fn matching(gains: &GainSet) -> Self {
        Self {
            kp: gains.k1.component_mul(&gains.sigma),
            kd: gains.k1,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        check_positive("sim.pd_kp", self.kp.as_slice())?;
        check_positive("sim.pd_kd", self.kd.as_slice())
    }
}

impl Default for PdGains {
    fn default() -> Self {
        Self::matching(&GainSet::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorState {
    pub phi_hat: Vector3<f64>,
}

impl EstimatorState {
    pub fn new(phi_hat: Vector3<f64>) -> Self {
        Self { phi_hat }
    }
}

impl Default for EstimatorState {
    fn default() -> Self {
        Self::new(Vector3::zeros())
    }
}

/// The 2×3 regression matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regressor(pub Matrix2x3<f64>);

impl Regressor {
    pub fn apply(&self, phi: &Vector3<f64>) -> Vec2 {
        self.0 * phi
    }
}

/// Lengths and gravity; the only plant constants the controller may use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownGeometry {
    pub l1: f64,
    pub l2: f64,
    pub g: f64,
}

impl From<&crate::dynamics::RobotParams> for KnownGeometry {
    fn from(p: &crate::dynamics::RobotParams) -> Self {
        Self {
            l1: p.l1,
            l2: p.l2,
            g: p.g,
        }
    }
}

/// Measured and reference signals available to the controller at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingSignals {
    pub q: Vec2,
    pub qdot: Vec2,
    pub qd_dot: Vec2,
    pub qd_ddot: Vec2,
    /// `q_d - q`
    pub dq: Vec2,
    /// `q̇_d - q̇`
    pub dq_dot: Vec2,
}

pub fn filtered_error(dq: &Vec2, dq_dot: &Vec2, sigma: &Vec2) -> Vec2 {
    dq_dot + sigma.component_mul(dq)
}

pub fn regressor(s: &TrackingSignals, sigma: &Vec2, geom: &KnownGeometry) -> Regressor {
    // Y φ = V_m a + M b + G
    let a = s.qd_dot + sigma.component_mul(&s.dq);
    let b = s.qd_ddot + sigma.component_mul(&s.dq_dot);
    let (s2, c2) = s.q[1].sin_cos();
    let c1 = s.q[0].cos();
    let c12 = (s.q[0] + s.q[1]).cos();

    let grav1 = geom.g * c1 / geom.l1;
    let grav12 = geom.g * c12 / geom.l2;
    let coriolis1 = -s2 * (s.qdot[1] * a[0] + (s.qdot[0] + s.qdot[1]) * a[1]);
    let coriolis2 = s2 * s.qdot[0] * a[0];

    Regressor(Matrix2x3::new(
        b[0] + grav1,
        b[0] + b[1] + grav12,
        c2 * (2.0 * b[0] + b[1]) + coriolis1,
        0.0,
        b[0] + b[1] + grav12,
        c2 * b[0] + coriolis2,
    ))
}

/// Componentwise signum, or the saturation `clamp(η/ε, -1, 1)` when `ε > 0`.
pub fn signum(eta: &Vec2, epsilon: f64) -> Vec2 {
    eta.map(|e| {
        if epsilon > 0.0 {
            (e / epsilon).clamp(-1.0, 1.0)
        } else if e > 0.0 {
            1.0
        } else if e < 0.0 {
            -1.0
        } else {
            0.0
        }
    })
}

pub fn control_torque(y: &Regressor, est: &EstimatorState, eta: &Vec2, gains: &GainSet) -> Vec2 {
    y.apply(&est.phi_hat) + gains.k1.component_mul(eta) + gains.k2.component_mul(&signum(eta, gains.epsilon))
}

/// Time derivative of the parameter estimate, `Λ Yᵀ η`.
pub fn adaptation_rate(y: &Regressor, eta: &Vec2, lambda: &Vector3<f64>) -> Vector3<f64> {
    lambda.component_mul(&(y.0.transpose() * eta))
}

pub fn pd_baseline(dq: &Vec2, dq_dot: &Vec2, gains: &PdGains, gravity: &Vec2) -> Vec2 {
    gains.kp.component_mul(dq) + gains.kd.component_mul(dq_dot) + gravity
}
