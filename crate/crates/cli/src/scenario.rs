//! Scenario files.
//!
//! A scenario is a TOML document with the sections `[robot]`, `[gains]`,
//! `[trajectory]`, `[vibration]`, `[payload.N]` and `[sim]`. Unknown keys
//! are rejected. Missing keys take the built-in defaults and each applied
//! default is logged. Angles are given in degrees.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::path::Path;

use asmc_core::controller::{GainSet, PdGains};
use asmc_core::disturbance::{PayloadProfile, PayloadSegment, VibrationConfig};
use asmc_core::dynamics::{PlantState, RobotParams, Vec2};
use asmc_core::sim::{ControllerKind, SampleMode, SimConfig};
use asmc_core::trajectory::ReferenceTrajectory;
use log::info;
use nalgebra::Vector3;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub robot: RobotSection,
    #[serde(default)]
    pub gains: GainsSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub vibration: VibrationSection,
    pub payload: Option<BTreeMap<String, PayloadSection>>,
    #[serde(default)]
    pub sim: SimSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub g: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub k1: Option<[f64; 2]>,
    pub k2: Option<[f64; 2]>,
    pub sigma: Option<[f64; 2]>,
    pub lambda: Option<[f64; 3]>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub amplitude_deg: Option<[f64; 2]>,
    pub rate: Option<[f64; 2]>,
    pub decay: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibrationSection {
    pub mean: Option<[f64; 2]>,
    pub variance: Option<[f64; 2]>,
    pub sample_period: Option<f64>,
    pub clip_lo: Option<[f64; 2]>,
    pub clip_hi: Option<[f64; 2]>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadSection {
    pub t_start: f64,
    pub t_end: f64,
    pub torque: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerName {
    Asmc,
    Pd,
}

impl From<ControllerName> for ControllerKind {
    fn from(c: ControllerName) -> Self {
        match c {
            ControllerName::Asmc => ControllerKind::AdaptiveSmc,
            ControllerName::Pd => ControllerKind::PdBaseline,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleModeName {
    Hold,
    PerStage,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub duration: Option<f64>,
    pub step: Option<f64>,
    pub controller: Option<ControllerName>,
    pub log_decimation: Option<usize>,
    pub phi_hat_init: Option<[f64; 3]>,
    pub q0_deg: Option<[f64; 2]>,
    pub qdot0_deg: Option<[f64; 2]>,
    pub pd_kp: Option<[f64; 2]>,
    pub pd_kd: Option<[f64; 2]>,
    pub sample_mode: Option<SampleModeName>,
}

/// Collects the keys that fell back to defaults.
#[derive(Debug, Default)]
pub struct Defaults {
    pub applied: Vec<String>,
}

impl Defaults {
    fn pick<T: Debug>(&mut self, key: &str, value: Option<T>, default: T) -> T {
        value.unwrap_or_else(|| {
            info!("{key} not set; using default {default:?}");
            self.applied.push(key.to_string());
            default
        })
    }

    /// Like `pick` for degree-valued keys; the default stays in radians so it
    /// is used bit-for-bit.
    fn pick_deg(&mut self, key: &str, value: Option<[f64; 2]>, default: Vec2) -> Vec2 {
        match value {
            Some(v) => deg2(v),
            None => {
                info!("{key} not set; using default {:?}", default.map(f64::to_degrees).as_slice());
                self.applied.push(key.to_string());
                default
            }
        }
    }
}

fn v2(a: [f64; 2]) -> Vec2 {
    Vec2::new(a[0], a[1])
}

fn arr2(v: &Vec2) -> [f64; 2] {
    [v[0], v[1]]
}

fn deg2(a: [f64; 2]) -> Vec2 {
    Vec2::new(a[0].to_radians(), a[1].to_radians())
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Resolves the file into a validated configuration.
    pub fn resolve(&self) -> Result<(SimConfig, Defaults), CliError> {
        let mut d = Defaults::default();
        let base = SimConfig::default();

        let r = &self.robot;
        let robot = RobotParams {
            m1: d.pick("robot.m1", r.m1, base.robot.m1),
            m2: d.pick("robot.m2", r.m2, base.robot.m2),
            l1: d.pick("robot.l1", r.l1, base.robot.l1),
            l2: d.pick("robot.l2", r.l2, base.robot.l2),
            g: d.pick("robot.g", r.g, base.robot.g),
        };

        let g = &self.gains;
        let bg = GainSet::default();
        let lambda = d.pick("gains.lambda", g.lambda, [bg.lambda[0], bg.lambda[1], bg.lambda[2]]);
        let gains = GainSet {
            k1: v2(d.pick("gains.k1", g.k1, arr2(&bg.k1))),
            k2: v2(d.pick("gains.k2", g.k2, arr2(&bg.k2))),
            sigma: v2(d.pick("gains.sigma", g.sigma, arr2(&bg.sigma))),
            lambda: Vector3::new(lambda[0], lambda[1], lambda[2]),
            epsilon: d.pick("gains.epsilon", g.epsilon, bg.epsilon),
        };

        let t = &self.trajectory;
        let bt = ReferenceTrajectory::default();
        let trajectory = ReferenceTrajectory {
            amplitude: d.pick_deg("trajectory.amplitude_deg", t.amplitude_deg, bt.amplitude),
            rate: v2(d.pick("trajectory.rate", t.rate, arr2(&bt.rate))),
            decay: d.pick("trajectory.decay", t.decay, bt.decay),
        };

        let v = &self.vibration;
        let bv = VibrationConfig::default();
        let vibration = VibrationConfig {
            mean: v2(d.pick("vibration.mean", v.mean, arr2(&bv.mean))),
            variance: v2(d.pick("vibration.variance", v.variance, arr2(&bv.variance))),
            sample_period: d.pick("vibration.sample_period", v.sample_period, bv.sample_period),
            clip_lo: v2(d.pick("vibration.clip_lo", v.clip_lo, arr2(&bv.clip_lo))),
            clip_hi: v2(d.pick("vibration.clip_hi", v.clip_hi, arr2(&bv.clip_hi))),
            seed: d.pick("vibration.seed", v.seed, bv.seed),
        };

        let payload = match &self.payload {
            None => {
                info!("payload not set; using default two-step profile");
                d.applied.push("payload".into());
                PayloadProfile::default()
            }
            Some(sections) => {
                let mut numbered = Vec::with_capacity(sections.len());
                for (name, s) in sections {
                    let idx: u32 = name
                        .parse()
                        .map_err(|_| CliError::Config(format!("payload.{name}: section suffix must be a number")))?;
                    numbered.push((
                        idx,
                        PayloadSegment {
                            start: s.t_start,
                            end: s.t_end,
                            torque: v2(s.torque),
                        },
                    ));
                }
                numbered.sort_by_key(|(i, _)| *i);
                PayloadProfile::new(numbered.into_iter().map(|(_, s)| s).collect()).map_err(config_error)?
            }
        };

        let s = &self.sim;
        let q0 = d.pick_deg("sim.q0_deg", s.q0_deg, trajectory.desired(0.0).qd);
        let qdot0 = d.pick_deg("sim.qdot0_deg", s.qdot0_deg, Vec2::zeros());
        let phi0 = d.pick("sim.phi_hat_init", s.phi_hat_init, [0.0; 3]);
        let pd = PdGains::matching(&gains);
        let controller: ControllerKind = d.pick("sim.controller", s.controller, ControllerName::Asmc).into();
        let sample_mode = match d.pick("sim.sample_mode", s.sample_mode, SampleModeName::Hold) {
            SampleModeName::Hold => SampleMode::ZeroOrderHold,
            SampleModeName::PerStage => SampleMode::PerStage,
        };

        let cfg = SimConfig {
            duration: d.pick("sim.duration", s.duration, base.duration),
            step: d.pick("sim.step", s.step, base.step),
            plant_init: PlantState::new(q0, qdot0),
            robot,
            gains,
            pd_gains: PdGains {
                kp: v2(d.pick("sim.pd_kp", s.pd_kp, arr2(&pd.kp))),
                kd: v2(d.pick("sim.pd_kd", s.pd_kd, arr2(&pd.kd))),
            },
            trajectory,
            vibration,
            payload,
            phi_hat_init: Vector3::new(phi0[0], phi0[1], phi0[2]),
            controller,
            sample_mode,
            log_decimation: d.pick("sim.log_decimation", s.log_decimation, base.log_decimation),
        };
        cfg.validate().map_err(config_error)?;
        Ok((cfg, d))
    }
}

fn config_error(e: asmc_core::SimError) -> CliError {
    CliError::Config(e.to_string())
}
