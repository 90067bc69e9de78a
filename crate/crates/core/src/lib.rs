//! Simulation of a two-link revolute arm tracking a reference trajectory
//! under an adaptive-sliding mode controller, with vibration and payload
//! disturbance torques.
//!
//! The crate is organised bottom-up:
//!
//! - [`dynamics`]: inertia, Coriolis and gravity terms and forward dynamics
//! - [`trajectory`]: the desired joint motion and its derivatives
//! - [`disturbance`]: seeded vibration noise and payload steps
//! - [`controller`]: filtered error, regressor, control law, adaptation law
//! - [`sim`]: fixed-step closed-loop integration and trace logging
//! - [`metrics`]: error/torque statistics over traces
//! - [`trace_io`]: the CSV trace format

pub mod controller;
pub mod disturbance;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod metrics;
pub mod sim;
pub mod trace_io;
pub mod trajectory;

pub use error::{MetricsError, SimError, TraceIoError};

/// Crate version recorded in trace headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
