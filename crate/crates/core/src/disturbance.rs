//! Exogenous disturbance torques: a clipped, sample-and-hold Gaussian
//! vibration torque and a piecewise-constant payload torque.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::Vec2;
use crate::error::SimError;

/// Name of the generator recorded in trace headers.
///
/// Sample `k` of a run is drawn from `ChaCha8Rng::seed_from_u64(seed)` with
/// its stream set to `k`, so any held sample can be regenerated on its own.
pub const RNG_NAME: &str = "chacha8-stream-per-sample";

/// Slack used when mapping a time stamp onto its hold interval.
const HOLD_INDEX_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibrationConfig {
    pub mean: Vec2,
    pub variance: Vec2,
    /// Hold period of each Gaussian draw (s).
    pub sample_period: f64,
    pub clip_lo: Vec2,
    pub clip_hi: Vec2,
    pub seed: u64,
}

impl Default for VibrationConfig {
    fn default() -> Self {
        Self {
            mean: Vec2::zeros(),
            variance: Vec2::new(0.01, 0.015),
            sample_period: 0.01,
            clip_lo: Vec2::new(-0.2873, -0.3518),
            clip_hi: Vec2::new(0.2946, 0.3608),
            seed: 0,
        }
    }
}

impl VibrationConfig {
    /// A vibration source that always emits zero.
    pub fn silent() -> Self {
        Self {
            mean: Vec2::zeros(),
            variance: Vec2::zeros(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for i in 0..2 {
            let vals = [self.mean[i], self.variance[i], self.clip_lo[i], self.clip_hi[i]];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(SimError::config("vibration", "all values must be finite"));
            }
            if self.variance[i] < 0.0 {
                return Err(SimError::config("vibration.variance", "components must be >= 0"));
            }
            if self.clip_lo[i] > self.clip_hi[i] {
                return Err(SimError::config("vibration.clip_lo", "must not exceed clip_hi"));
            }
        }
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            return Err(SimError::config("vibration.sample_period", "must be > 0"));
        }
        Ok(())
    }

    /// Index of the hold interval containing `t`.
    pub fn sample_index(&self, t: f64) -> u64 {
        (t / self.sample_period + HOLD_INDEX_SLACK).floor().max(0.0) as u64
    }

    /// The unclipped Gaussian draw for hold interval `k`.
    pub fn raw_sample(&self, k: u64) -> Vec2 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        Vec2::new(
            self.mean[0] + self.variance[0].sqrt() * z0,
            self.mean[1] + self.variance[1].sqrt() * z1,
        )
    }

    /// The clipped draw for hold interval `k`.
    pub fn sample(&self, k: u64) -> Vec2 {
        let raw = self.raw_sample(k);
        Vec2::new(
            raw[0].clamp(self.clip_lo[0], self.clip_hi[0]),
            raw[1].clamp(self.clip_lo[1], self.clip_hi[1]),
        )
    }
}

/// Per-run vibration generator. Caches the current held sample.
#[derive(Debug, Clone)]
pub struct VibrationSource {
    cfg: VibrationConfig,
    held: Option<(u64, Vec2)>,
}

impl VibrationSource {
    pub fn new(cfg: VibrationConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        Ok(Self { cfg, held: None })
    }

    pub fn config(&self) -> &VibrationConfig {
        &self.cfg
    }

    pub fn torque(&mut self, t: f64) -> Vec2 {
        let k = self.cfg.sample_index(t);
        match self.held {
            Some((idx, v)) if idx == k => v,
            _ => {
                let v = self.cfg.sample(k);
                self.held = Some((k, v));
                v
            }
        }
    }
}

pub fn vibration_torque(gen: &mut VibrationSource, t: f64) -> Vec2 {
    gen.torque(t)
}

/// One constant-torque payload interval, active on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadSegment {
    pub start: f64,
    pub end: f64,
    pub torque: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayloadProfile {
    segments: Vec<PayloadSegment>,
}

impl Default for PayloadProfile {
    fn default() -> Self {
        Self {
            segments: vec![
                PayloadSegment {
                    start: 4.0,
                    end: 8.0,
                    torque: Vec2::new(0.65, 0.75),
                },
                PayloadSegment {
                    start: 8.0,
                    end: 10.0,
                    torque: Vec2::new(0.15, 0.25),
                },
            ],
        }
    }
}

impl PayloadProfile {
    /// Builds a profile, sorting segments by start time.
    pub fn new(mut segments: Vec<PayloadSegment>) -> Result<Self, SimError> {
        for (i, s) in segments.iter().enumerate() {
            let field = format!("payload.{}", i + 1);
            if !(s.start.is_finite() && s.end.is_finite() && s.torque.iter().all(|v| v.is_finite())) {
                return Err(SimError::config(field, "values must be finite"));
            }
            if s.start >= s.end {
                return Err(SimError::config(field, "t_start must be < t_end"));
            }
        }
        segments.sort_by(|a, b| a.start.total_cmp(&b.start));
        if let Some(w) = segments.windows(2).find(|w| w[1].start < w[0].end) {
            return Err(SimError::config(
                "payload",
                format!("segments [{}, {}) and [{}, {}) overlap", w[0].start, w[0].end, w[1].start, w[1].end),
            ));
        }
        Ok(Self { segments })
    }

    pub fn empty() -> Self {
        Self { segments: Vec::new() }
    }

    pub fn segments(&self) -> &[PayloadSegment] {
        &self.segments
    }

    pub fn torque(&self, t: f64) -> Vec2 {
        self.segments
            .iter()
            .find(|s| s.start <= t && t < s.end)
            .map_or_else(Vec2::zeros, |s| s.torque)
    }
}

pub fn payload_torque(profile: &PayloadProfile, t: f64) -> Vec2 {
    profile.torque(t)
}

/// Componentwise box for the combined disturbance `τ_v + τ_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceBounds {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Default for DisturbanceBounds {
    fn default() -> Self {
        Self {
            lo: Vec2::new(-0.2873, -0.3518),
            hi: Vec2::new(0.9446, 1.1108),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundViolation {
    pub sample: usize,
    /// Zero-based joint index.
    pub component: usize,
    pub value: f64,
    /// The bound that was crossed.
    pub bound: f64,
}

impl BoundViolation {
    pub fn excess(&self) -> f64 {
        (self.value - self.bound).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub within: bool,
    pub worst: Option<BoundViolation>,
}

/// Checks every combined sample against `bounds` and reports the largest
/// excursion, if any.
pub fn combined_bounds_check(samples: &[Vec2], bounds: &DisturbanceBounds) -> BoundsReport {
    let mut worst: Option<BoundViolation> = None;
    for (i, s) in samples.iter().enumerate() {
        for c in 0..2 {
            let bound = if s[c] > bounds.hi[c] {
                bounds.hi[c]
            } else if s[c] < bounds.lo[c] {
                bounds.lo[c]
            } else {
                continue;
            };
            let v = BoundViolation {
                sample: i,
                component: c,
                value: s[c],
                bound,
            };
            if worst.is_none_or(|w| v.excess() > w.excess()) {
                worst = Some(v);
            }
        }
    }
    BoundsReport {
        within: worst.is_none(),
        worst,
    }
}

/// Worst-case |τ_v,i + τ_l,i| per joint implied by the clip box and the
/// payload levels (including the zero level outside all segments).
pub fn disturbance_magnitude_bound(vib: &VibrationConfig, payload: &PayloadProfile) -> Vec2 {
    let mut levels: Vec<Vec2> = payload.segments().iter().map(|s| s.torque).collect();
    levels.push(Vec2::zeros());
    let mut out = Vec2::zeros();
    for c in 0..2 {
        out[c] = levels
            .iter()
            .flat_map(|l| [(vib.clip_lo[c] + l[c]).abs(), (vib.clip_hi[c] + l[c]).abs()])
            .fold(0.0, f64::max);
    }
    out
}
