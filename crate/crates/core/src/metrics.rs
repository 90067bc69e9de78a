//! Error and torque statistics over logged traces.
//!
//! All summaries are computed from [`TraceColumns`], which hold values in
//! output units (degrees for angles). The same columns are what the CSV
//! trace stores, so a summary recomputed from a file matches the one
//! produced by the run that wrote it.

use std::fmt;

use crate::error::MetricsError;
use crate::sim::Trace;

/// Trailing window of the moving average removed before settling analysis (s).
pub const SETTLING_TREND_WINDOW: f64 = 1.0;
/// Settling band as a fraction of the torque RMS.
pub const SETTLING_BAND_FRACTION: f64 = 0.05;
/// Sliding window of the oscillation-frequency estimator (s).
pub const OSCILLATION_WINDOW: f64 = 0.05;

pub fn max_abs(series: &[f64]) -> Result<f64, MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    Ok(series.iter().fold(0.0, |m, v| m.max(v.abs())))
}

pub fn rms(series: &[f64]) -> Result<f64, MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    let sum_sq: f64 = series.iter().map(|v| v * v).sum();
    Ok((sum_sq / series.len() as f64).sqrt())
}

/// Earliest `t*` after which `|x(t)| <= band` for every remaining sample.
///
/// Returns the last time stamp when the final sample is outside the band,
/// and `0` for an empty series.
pub fn settling_time(series: &[f64], t: &[f64], band: f64) -> f64 {
    debug_assert_eq!(series.len(), t.len());
    match series.iter().rposition(|v| v.abs() > band) {
        None => t.first().copied().unwrap_or(0.0),
        Some(i) if i + 1 == series.len() => t[i],
        Some(i) => t[i + 1],
    }
}

/// Mean over the trailing `window` seconds (shorter at the start).
pub fn trailing_moving_average(series: &[f64], dt: f64, window: f64) -> Vec<f64> {
    let n = ((window / dt).round() as usize).max(1);
    let mut prefix = Vec::with_capacity(series.len() + 1);
    prefix.push(0.0);
    for v in series {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..series.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(n);
            (prefix[i + 1] - prefix[lo]) / (i + 1 - lo) as f64
        })
        .collect()
}

fn zero_crossings(window: &[f64]) -> usize {
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    let mut last = 0.0f64;
    let mut count = 0;
    for v in window {
        let d = v - mean;
        if d == 0.0 {
            continue;
        }
        if last != 0.0 && (d > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = d;
    }
    count
}

/// Highest oscillation rate (Hz) seen in any sliding window.
///
/// Each window has its mean removed; half its zero-crossing count divided by
/// the window length is its frequency. Windows shorter than ten samples are
/// widened to ten samples.
pub fn max_oscillation_freq(series: &[f64], dt: f64, window: f64) -> f64 {
    let len = ((window / dt).round() as usize).max(10).min(series.len());
    if len < 2 {
        return 0.0;
    }
    let stride = (len / 10).max(1);
    let span = len as f64 * dt;
    let mut best = 0usize;
    let mut start = 0;
    while start + len <= series.len() {
        best = best.max(zero_crossings(&series[start..start + len]));
        start += stride;
    }
    if start - stride + len < series.len() {
        best = best.max(zero_crossings(&series[series.len() - len..]));
    }
    best as f64 / 2.0 / span
}

/// Time axis, position errors (deg) and torques (Nm) of a trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceColumns {
    pub t: Vec<f64>,
    pub dq: [Vec<f64>; 2],
    pub tau: [Vec<f64>; 2],
}

impl TraceColumns {
    pub fn from_trace(trace: &Trace) -> Self {
        let mut c = TraceColumns::default();
        for r in &trace.records {
            c.t.push(r.t);
            for i in 0..2 {
                c.dq[i].push(r.dq[i].to_degrees());
                c.tau[i].push(r.tau[i]);
            }
        }
        c
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Sample spacing inferred from the time axis.
    pub fn dt(&self) -> f64 {
        match self.t.len() {
            0 | 1 => 0.0,
            n => (self.t[n - 1] - self.t[0]) / (n - 1) as f64,
        }
    }
}

/// Per-link indices of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    pub dq_max: [f64; 2],
    pub dq_rms: [f64; 2],
    pub tau_rms: [f64; 2],
    /// Settling time of the detrended torque (s).
    pub settling_time: [f64; 2],
    /// Peak torque oscillation rate (Hz).
    pub max_oscillation: [f64; 2],
}

impl MetricsSummary {
    pub fn from_columns(c: &TraceColumns) -> Result<Self, MetricsError> {
        if c.is_empty() {
            return Err(MetricsError::EmptySeries);
        }
        let dt = c.dt();
        let mut s = MetricsSummary {
            dq_max: [0.0; 2],
            dq_rms: [0.0; 2],
            tau_rms: [0.0; 2],
            settling_time: [0.0; 2],
            max_oscillation: [0.0; 2],
        };
        for i in 0..2 {
            s.dq_max[i] = max_abs(&c.dq[i])?;
            s.dq_rms[i] = rms(&c.dq[i])?;
            s.tau_rms[i] = rms(&c.tau[i])?;
            if dt > 0.0 {
                let trend = trailing_moving_average(&c.tau[i], dt, SETTLING_TREND_WINDOW);
                let detrended: Vec<f64> = c.tau[i].iter().zip(&trend).map(|(x, m)| x - m).collect();
                s.settling_time[i] = settling_time(&detrended, &c.t, SETTLING_BAND_FRACTION * s.tau_rms[i]);
                s.max_oscillation[i] = max_oscillation_freq(&c.tau[i], dt, OSCILLATION_WINDOW);
            }
        }
        Ok(s)
    }

    pub fn from_trace(trace: &Trace) -> Result<Self, MetricsError> {
        Self::from_columns(&TraceColumns::from_trace(trace))
    }

    fn rows(&self) -> [(&'static str, [f64; 2]); 5] {
        [
            ("dq_max_deg", self.dq_max),
            ("dq_rms_deg", self.dq_rms),
            ("tau_rms_nm", self.tau_rms),
            ("settling_time_s", self.settling_time),
            ("max_oscillation_hz", self.max_oscillation),
        ]
    }

    /// Flat `key=value` lines, one per metric and link.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (name, v) in self.rows() {
            for (i, x) in v.iter().enumerate() {
                out.push_str(&format!("{name}{}={x}\n", i + 1));
            }
        }
        out
    }
}

impl fmt::Display for MetricsSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20} {:>24} {:>24}", "metric", "link1", "link2")?;
        for (name, v) in self.rows() {
            writeln!(f, "{:<20} {:>24} {:>24}", name, v[0], v[1])?;
        }
        Ok(())
    }
}
