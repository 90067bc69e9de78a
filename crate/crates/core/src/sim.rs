//! Fixed-step closed-loop simulation of plant, controller, estimator and
//! disturbances.
//!
//! The integrated state is `(q, q̇, φ̂)` (seven components). Each step the
//! torque command and both disturbances are evaluated at the step start and
//! held over the step; the adaptation law `φ̂̇ = Λ Yᵀ η` is evaluated at every
//! Runge-Kutta stage.

use log::warn;
use nalgebra::{SVector, Vector3};
use sha2::{Digest, Sha256};

use crate::controller::{
    adaptation_rate, control_torque, filtered_error, pd_baseline, regressor, EstimatorState, GainSet,
    KnownGeometry, PdGains, TrackingSignals,
};
use crate::disturbance::{
    disturbance_magnitude_bound, PayloadProfile, VibrationConfig, VibrationSource, RNG_NAME,
};
use crate::dynamics::{gravity_vector, mass_matrix, Mat2, PlantState, Plant, RobotParams, Vec2};
use crate::error::SimError;
use crate::integrator::rk4_step;
use crate::trajectory::{DesiredState, ReferenceTrajectory};

/// Any state component above this magnitude aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

type SimState = SVector<f64, 7>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    AdaptiveSmc,
    PdBaseline,
}

/// When the torque command is re-evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Once per step, held across the step.
    ZeroOrderHold,
    /// At every Runge-Kutta stage, from the stage state. Only sensible with a
    /// smooth law (`epsilon > 0`); used for integrator convergence checks.
    PerStage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub duration: f64,
    pub step: f64,
    pub plant_init: PlantState,
    pub robot: RobotParams,
    pub gains: GainSet,
    pub pd_gains: PdGains,
    pub trajectory: ReferenceTrajectory,
    pub vibration: VibrationConfig,
    pub payload: PayloadProfile,
    pub phi_hat_init: Vector3<f64>,
    pub controller: ControllerKind,
    pub sample_mode: SampleMode,
    pub log_decimation: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        let trajectory = ReferenceTrajectory::default();
        Self {
            duration: 20.0,
            step: 2.5e-4,
            plant_init: PlantState::new(trajectory.desired(0.0).qd, Vec2::zeros()),
            robot: RobotParams::default(),
            gains: GainSet::default(),
            pd_gains: PdGains::default(),
            trajectory,
            vibration: VibrationConfig::default(),
            payload: PayloadProfile::default(),
            phi_hat_init: Vector3::zeros(),
            controller: ControllerKind::AdaptiveSmc,
            sample_mode: SampleMode::ZeroOrderHold,
            log_decimation: 1,
        }
    }
}

impl SimConfig {
    /// Same scenario with both disturbance channels switched off.
    pub fn without_disturbances(mut self) -> Self {
        self.vibration = VibrationConfig {
            seed: self.vibration.seed,
            ..VibrationConfig::silent()
        };
        self.payload = PayloadProfile::empty();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.vibration.seed = seed;
        self
    }

    pub fn seed(&self) -> u64 {
        self.vibration.seed
    }

    /// Number of integration steps over the horizon.
    pub fn steps(&self) -> u64 {
        (self.duration / self.step).round() as u64
    }

    /// Integration steps per vibration hold interval.
    pub fn hold_ratio(&self) -> u64 {
        (self.vibration.sample_period / self.step).round() as u64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.robot.validate()?;
        self.gains.validate()?;
        self.pd_gains.validate()?;
        self.trajectory.validate()?;
        self.vibration.validate()?;
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(SimError::config("sim.duration", "must be >= 0"));
        }
        if !(self.step.is_finite() && self.step > 0.0 && self.step <= 0.01) {
            return Err(SimError::config("sim.step", format!("must lie in (0, 0.01], got {}", self.step)));
        }
        let ratio = self.vibration.sample_period / self.step;
        if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(SimError::config(
                "sim.step",
                format!("vibration sample period / step must be an integer, got {ratio}"),
            ));
        }
        let spans = (self.duration / self.step).round() * self.step;
        if (spans - self.duration).abs() > 1e-9 * self.duration.max(1.0) {
            return Err(SimError::config("sim.duration", "must be a whole number of steps"));
        }
        if self.log_decimation == 0 {
            return Err(SimError::config("sim.log_decimation", "must be >= 1"));
        }
        if !self.plant_init.is_finite() || self.phi_hat_init.iter().any(|v| !v.is_finite()) {
            return Err(SimError::config("sim", "initial state must be finite"));
        }
        Ok(())
    }

    /// Short content hash of the resolved configuration.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(format!("{self:?}").as_bytes());
        hex::encode(&hash[..8])
    }
}

/// Result of comparing the switching gain against the disturbance bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K2Check {
    /// Worst-case |τ_v + τ_l| per joint.
    pub bound: Vec2,
    pub k2: Vec2,
}

impl K2Check {
    pub fn dominates(&self) -> bool {
        self.k2[0] > self.bound[0] && self.k2[1] > self.bound[1]
    }
}

pub fn k2_dominance(cfg: &SimConfig) -> K2Check {
    K2Check {
        bound: disturbance_magnitude_bound(&cfg.vibration, &cfg.payload),
        k2: cfg.gains.k2,
    }
}

/// A torque law driven by the tracking signals.
pub trait ControlLaw {
    fn torque(&self, s: &TrackingSignals, eta: &Vec2, est: &EstimatorState) -> Vec2;

    /// Parameter-estimate derivative. Non-adaptive laws keep the default.
    fn phi_rate(&self, _s: &TrackingSignals, _eta: &Vec2) -> Vector3<f64> {
        Vector3::zeros()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveSmc {
    pub gains: GainSet,
    pub geometry: KnownGeometry,
}

impl ControlLaw for AdaptiveSmc {
    fn torque(&self, s: &TrackingSignals, eta: &Vec2, est: &EstimatorState) -> Vec2 {
        let y = regressor(s, &self.gains.sigma, &self.geometry);
        control_torque(&y, est, eta, &self.gains)
    }

    fn phi_rate(&self, s: &TrackingSignals, eta: &Vec2) -> Vector3<f64> {
        let y = regressor(s, &self.gains.sigma, &self.geometry);
        adaptation_rate(&y, eta, &self.gains.lambda)
    }
}

/// PD feedback plus exact gravity compensation.
#[derive(Debug, Clone, Copy)]
pub struct PdPlusGravity {
    pub gains: PdGains,
    pub robot: RobotParams,
}

impl ControlLaw for PdPlusGravity {
    fn torque(&self, s: &TrackingSignals, _eta: &Vec2, _est: &EstimatorState) -> Vec2 {
        pd_baseline(&s.dq, &s.dq_dot, &self.gains, &gravity_vector(&self.robot, &s.q))
    }
}

/// The law selected by `cfg.controller`.
pub enum Controller {
    AdaptiveSmc(AdaptiveSmc),
    PdBaseline(PdPlusGravity),
}

impl Controller {
    pub fn from_config(cfg: &SimConfig) -> Self {
        match cfg.controller {
            ControllerKind::AdaptiveSmc => Controller::AdaptiveSmc(AdaptiveSmc {
                gains: cfg.gains,
                geometry: KnownGeometry::from(&cfg.robot),
            }),
            ControllerKind::PdBaseline => Controller::PdBaseline(PdPlusGravity {
                gains: cfg.pd_gains,
                robot: cfg.robot,
            }),
        }
    }
}

impl ControlLaw for Controller {
    fn torque(&self, s: &TrackingSignals, eta: &Vec2, est: &EstimatorState) -> Vec2 {
        match self {
            Controller::AdaptiveSmc(c) => c.torque(s, eta, est),
            Controller::PdBaseline(c) => c.torque(s, eta, est),
        }
    }

    fn phi_rate(&self, s: &TrackingSignals, eta: &Vec2) -> Vector3<f64> {
        match self {
            Controller::AdaptiveSmc(c) => c.phi_rate(s, eta),
            Controller::PdBaseline(c) => c.phi_rate(s, eta),
        }
    }
}

/// Signals evaluated at a sampling instant; the torques are the values held
/// over the following step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSample {
    pub desired: DesiredState,
    pub dq: Vec2,
    pub eta: Vec2,
    pub tau: Vec2,
    pub tau_v: Vec2,
    pub tau_l: Vec2,
}

fn tracking_signals(state: &PlantState, desired: &DesiredState) -> TrackingSignals {
    TrackingSignals {
        q: state.q,
        qdot: state.qdot,
        qd_dot: desired.qd_dot,
        qd_ddot: desired.qd_ddot,
        dq: desired.qd - state.q,
        dq_dot: desired.qd_dot - state.qdot,
    }
}

fn pack(state: &PlantState, est: &EstimatorState) -> SimState {
    let p = &est.phi_hat;
    SimState::from_column_slice(&[state.q[0], state.q[1], state.qdot[0], state.qdot[1], p[0], p[1], p[2]])
}

fn unpack(x: &SimState) -> (PlantState, EstimatorState) {
    (
        PlantState::new(Vec2::new(x[0], x[1]), Vec2::new(x[2], x[3])),
        EstimatorState::new(Vector3::new(x[4], x[5], x[6])),
    )
}

/// Evaluates the reference, errors, command and disturbances at `t`.
pub fn sample_at<L: ControlLaw>(
    cfg: &SimConfig,
    law: &L,
    vib: &mut VibrationSource,
    state: &PlantState,
    est: &EstimatorState,
    t: f64,
) -> StepSample {
    let desired = cfg.trajectory.desired(t);
    let s = tracking_signals(state, &desired);
    let eta = filtered_error(&s.dq, &s.dq_dot, &cfg.gains.sigma);
    StepSample {
        desired,
        dq: s.dq,
        eta,
        tau: law.torque(&s, &eta, est),
        tau_v: vib.torque(t),
        tau_l: cfg.payload.torque(t),
    }
}

/// Advances plant and estimator by one step from `t`.
pub fn step<L: ControlLaw>(
    cfg: &SimConfig,
    law: &L,
    vib: &mut VibrationSource,
    state: &PlantState,
    est: &EstimatorState,
    t: f64,
) -> Result<(PlantState, EstimatorState, StepSample), SimError> {
    let sample = sample_at(cfg, law, vib, state, est, t);
    let disturbance = sample.tau_v + sample.tau_l;
    let sigma = cfg.gains.sigma;

    let deriv = |tau_t: f64, x: &SimState| -> Result<SimState, SimError> {
        let (ps, pe) = unpack(x);
        let desired = cfg.trajectory.desired(tau_t);
        let s = tracking_signals(&ps, &desired);
        let eta = filtered_error(&s.dq, &s.dq_dot, &sigma);
        let tau = match cfg.sample_mode {
            SampleMode::ZeroOrderHold => sample.tau,
            SampleMode::PerStage => law.torque(&s, &eta, &pe),
        };
        let acc = cfg.robot.forward_dynamics(&ps, &(tau - disturbance))?;
        let rate = law.phi_rate(&s, &eta);
        Ok(SimState::from_column_slice(&[
            ps.qdot[0], ps.qdot[1], acc[0], acc[1], rate[0], rate[1], rate[2],
        ]))
    };

    let next = rk4_step(t, &pack(state, est), cfg.step, deriv)?;
    if next.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
        return Err(SimError::Diverged {
            t: t + cfg.step,
            limit: DIVERGENCE_LIMIT,
        });
    }
    let (ps, pe) = unpack(&next);
    Ok((ps, pe, sample))
}

/// `½ ηᵀ M η + ½ φ̃ᵀ Λ⁻¹ φ̃` with `Λ` given by its diagonal.
pub fn lyapunov_value(eta: &Vec2, phi_tilde: &Vector3<f64>, m: &Mat2, lambda: &Vector3<f64>) -> f64 {
    0.5 * (eta.transpose() * m * eta)[0] + 0.5 * phi_tilde.component_div(lambda).dot(phi_tilde)
}

/// One logged instant. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub q: Vec2,
    pub qdot: Vec2,
    pub qd: Vec2,
    pub dq: Vec2,
    pub eta: Vec2,
    pub tau: Vec2,
    pub tau_v: Vec2,
    pub tau_l: Vec2,
    pub phi_hat: Vector3<f64>,
    pub lyapunov_v: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub tool_version: String,
    pub seed: u64,
    pub rng: String,
    pub config_digest: String,
}

impl TraceHeader {
    pub fn for_config(cfg: &SimConfig) -> Self {
        Self {
            tool_version: crate::VERSION.to_string(),
            seed: cfg.seed(),
            rng: RNG_NAME.to_string(),
            config_digest: cfg.digest(),
        }
    }

    /// Comment line written at the top of every output file.
    pub fn comment_line(&self) -> String {
        format!(
            "# asmc-sim {} seed={} rng={} config={}",
            self.tool_version, self.seed, self.rng, self.config_digest
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    /// Spacing of logged records (s).
    pub dt: f64,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn combined_disturbance(&self) -> Vec<Vec2> {
        self.records.iter().map(|r| r.tau_v + r.tau_l).collect()
    }
}

fn record(cfg: &SimConfig, t: f64, state: &PlantState, est: &EstimatorState, s: &StepSample) -> TraceRecord {
    let phi_tilde = cfg.robot.inertial_parameters() - est.phi_hat;
    TraceRecord {
        t,
        q: state.q,
        qdot: state.qdot,
        qd: s.desired.qd,
        dq: s.dq,
        eta: s.eta,
        tau: s.tau,
        tau_v: s.tau_v,
        tau_l: s.tau_l,
        phi_hat: est.phi_hat,
        lyapunov_v: lyapunov_value(&s.eta, &phi_tilde, &mass_matrix(&cfg.robot, &state.q), &cfg.gains.lambda),
    }
}

/// Runs the configured scenario with the law selected by `cfg.controller`.
pub fn run(cfg: &SimConfig) -> Result<Trace, SimError> {
    run_with(cfg, &Controller::from_config(cfg))
}

/// Runs `cfg` under an arbitrary control law.
///
/// Records `0, K, 2K, …` of the `steps + 1` sampling instants are kept, where
/// `K` is the log decimation.
pub fn run_with<L: ControlLaw>(cfg: &SimConfig, law: &L) -> Result<Trace, SimError> {
    cfg.validate()?;
    if cfg.controller == ControllerKind::AdaptiveSmc {
        let check = k2_dominance(cfg);
        if !check.dominates() {
            warn!(
                "switching gain K2 = {:?} does not dominate the disturbance bound {:?}",
                check.k2.as_slice(),
                check.bound.as_slice()
            );
        }
    }

    let steps = cfg.steps();
    let keep = cfg.log_decimation as u64;
    let mut vib = VibrationSource::new(cfg.vibration)?;
    let mut state = cfg.plant_init;
    let mut est = EstimatorState::new(cfg.phi_hat_init);
    let mut records = Vec::with_capacity((steps / keep + 1) as usize);

    for n in 0..steps {
        let t = n as f64 * cfg.step;
        let (next_state, next_est, sample) = step(cfg, law, &mut vib, &state, &est, t)?;
        if n % keep == 0 {
            records.push(record(cfg, t, &state, &est, &sample));
        }
        state = next_state;
        est = next_est;
    }
    if steps.is_multiple_of(keep) {
        let t = steps as f64 * cfg.step;
        let sample = sample_at(cfg, law, &mut vib, &state, &est, t);
        records.push(record(cfg, t, &state, &est, &sample));
    }

    Ok(Trace {
        header: TraceHeader::for_config(cfg),
        dt: cfg.step * keep as f64,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    struct GravityOnly(RobotParams);

    impl ControlLaw for GravityOnly {
        fn torque(&self, s: &TrackingSignals, _: &Vec2, _: &EstimatorState) -> Vec2 {
            gravity_vector(&self.0, &s.q)
        }
    }

    fn short(duration: f64) -> SimConfig {
        SimConfig {
            duration,
            ..SimConfig::default()
        }
    }

    #[test]
    fn upright_equilibrium_is_preserved() {
        let cfg = SimConfig::default().without_disturbances();
        let law = GravityOnly(cfg.robot);
        let mut vib = VibrationSource::new(cfg.vibration).unwrap();
        let up = PlantState::new(Vec2::new(FRAC_PI_2, 0.0), Vec2::zeros());
        let (next, _, _) = step(&cfg, &law, &mut vib, &up, &EstimatorState::default(), 0.0).unwrap();
        assert!((next.q - up.q).abs().max() <= 1e-12);
        assert!(next.qdot.abs().max() <= 1e-12);
    }

    #[test]
    fn zero_duration_gives_initial_record() {
        let trace = run(&short(0.0)).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].t, 0.0);
        assert_eq!(trace.records[0].q, SimConfig::default().plant_init.q);
    }

    #[test]
    fn decimation_keeps_every_kth_record() {
        let cfg = SimConfig {
            log_decimation: 4,
            ..short(0.1)
        };
        let trace = run(&cfg).unwrap();
        assert_eq!(trace.records.len(), 101);
        assert!((trace.records[1].t - 1e-3).abs() < 1e-15);
        assert_eq!(trace.dt, 1e-3);
    }

    #[test]
    fn record_invariants_hold() {
        let cfg = short(0.5);
        let trace = run(&cfg).unwrap();
        let traj = cfg.trajectory;
        for r in &trace.records {
            assert_eq!(r.dq, r.qd - r.q);
            let qd_dot = traj.desired(r.t).qd_dot;
            assert_eq!(r.eta, (qd_dot - r.qdot) + cfg.gains.sigma.component_mul(&r.dq));
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let bad_step = SimConfig {
            step: 3e-4,
            ..SimConfig::default()
        };
        let err = bad_step.validate().unwrap_err();
        assert!(err.to_string().contains("sim.step"));
        assert!(SimConfig { step: 0.02, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { log_decimation: 0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { duration: -1.0, ..SimConfig::default() }.validate().is_err());
    }

    #[test]
    fn digest_tracks_config() {
        let a = SimConfig::default();
        assert_eq!(a.digest(), SimConfig::default().digest());
        assert_ne!(a.digest(), a.clone().with_seed(9).digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn divergence_is_reported() {
        // huge mismatch between plant and a wildly wrong controller
        struct Kick;
        impl ControlLaw for Kick {
            fn torque(&self, _: &TrackingSignals, _: &Vec2, _: &EstimatorState) -> Vec2 {
                Vec2::new(1e9, -1e9)
            }
        }
        let err = run_with(&short(1.0), &Kick).unwrap_err();
        assert!(matches!(err, SimError::Diverged { .. }), "{err:?}");
    }

    #[test]
    fn lyapunov_examples() {
        let m = Mat2::new(0.664, 0.22, 0.22, 0.1);
        let unit = Vector3::new(1.0, 1.0, 1.0);
        assert_eq!(lyapunov_value(&Vec2::zeros(), &Vector3::zeros(), &m, &unit), 0.0);
        assert!((lyapunov_value(&Vec2::new(1.0, 0.0), &Vector3::zeros(), &m, &unit) - 0.332).abs() < 1e-15);
        assert!((lyapunov_value(&Vec2::zeros(), &unit, &m, &unit) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn k2_check_for_defaults() {
        let c = k2_dominance(&SimConfig::default());
        assert!(c.dominates());
        let weak = SimConfig {
            gains: GainSet {
                k2: Vec2::new(2.0, 1.0),
                ..GainSet::default()
            },
            ..SimConfig::default()
        };
        assert!(!k2_dominance(&weak).dominates());
    }
}
