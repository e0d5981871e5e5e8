//! Deterministic 2D swarm-localization simulator and estimation library.
//!
//! A differential-drive robot explores a walled arena under wheel slip and
//! sensor noise while an extended Kalman filter tracks its pose. While the
//! robot is isolated the filter corrects heading only, from the IMU; when a
//! peer contact occurs (a timed proxy by default) it greedily expands the
//! observation model to the full pose and resets the accumulated drift. A
//! confidence-thresholded occupancy grid maps the arena from the estimated
//! poses, and the harness reproduces the three-scenario drift/convergence
//! comparison end to end.
//!
//! Entry points:
//! - [`harness::run_trial`] runs one scenario and returns the sampled error
//!   trace, update counts, and the final map.
//! - [`harness::run_comparison`] runs baseline / imu / greedy across seeds
//!   with shared noise realizations.
//! - The `kalman-swarm` binary wraps both behind `run`, `compare`, and
//!   `export-world` subcommands.

pub mod comm;
pub mod config;
pub mod controller;
pub mod estimator;
pub mod harness;
pub mod kinematics;
pub mod mapping;
pub mod sensors;
pub mod world;

pub use config::{NoiseConfig, RunConfig, SimConfig};
pub use estimator::{
    kalman_update, predict_covariance, predict_state, select_observation_mode, wrap_angle,
    BeliefState, Covariance3, Measurement, ObservationMode, Pose, ProcessNoise,
};
pub use harness::{
    error_reduction_rate, euclidean_error, run_comparison, run_trial, ScenarioKind, TrialRecord,
};
