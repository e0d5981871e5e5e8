//! Run configuration: the Table-1 noise parameters, filter and simulation
//! settings, and the TOML file format the CLI loads.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comm::CommConfig;
use crate::controller::{WanderParams, V_MAX};
use crate::estimator::{CovariancePropagation, Pose, ProcessNoise};
use crate::kinematics::RobotGeometry;
use crate::mapping::MappingConfig;
use crate::sensors::LidarConfig;
use crate::world::{load_world_file, WorldFileError, WorldModel};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("failed to read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse config file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to load world file: {0}")]
    World(#[from] WorldFileError),
}

/// Noise and communication parameters. Defaults are the experiment values:
/// sigma_slip 0.02, sigma_imu 0.02 rad, sigma_lidar 0.02 m, sigma_sensor
/// 0.02 m, t_sync 4.0 s, r_mask 0.55 m, omega_thresh 0.05 rad/s,
/// tau_conf 30.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Multiplicative wheel slip spread, dimensionless N(1, sigma_slip).
    pub sigma_slip: f64,
    /// IMU heading noise, rad.
    pub sigma_imu: f64,
    /// Lidar range noise, m.
    pub sigma_lidar: f64,
    /// Peer position noise, m.
    pub sigma_sensor: f64,
    /// Peer communication interval, s.
    pub t_sync: f64,
    /// Peer detection radius, m.
    pub r_mask: f64,
    /// Angular mapping threshold, rad/s.
    pub omega_thresh: f64,
    /// Occupancy confidence threshold.
    pub tau_conf: u8,
    /// Correlation time of the wheel slip factors, s. Slip is a surface
    /// effect that persists over floor patches rather than redrawing every
    /// encoder tick; zero redraws independently per timestep.
    pub slip_correlation: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma_slip: 0.02,
            sigma_imu: 0.02,
            sigma_lidar: 0.02,
            sigma_sensor: 0.02,
            t_sync: 4.0,
            r_mask: 0.55,
            omega_thresh: 0.05,
            tau_conf: 30,
            slip_correlation: 16.0,
        }
    }
}

impl NoiseConfig {
    /// All stochastic inputs disabled; deterministic closure configuration.
    pub fn noiseless() -> Self {
        Self {
            sigma_slip: 0.0,
            sigma_imu: 0.0,
            sigma_lidar: 0.0,
            sigma_sensor: 0.0,
            ..Self::default()
        }
    }

    pub fn comm_config(&self) -> CommConfig {
        CommConfig {
            t_sync: self.t_sync,
            r_mask: self.r_mask,
            sigma_sensor: self.sigma_sensor,
        }
    }
}

/// Grid construction settings (thresholds live in [`NoiseConfig`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapSettings {
    /// Meters per grid cell.
    pub resolution: f64,
    pub max_confidence: u8,
    /// Confidence added per hit.
    pub increment: u8,
}

impl Default for MapSettings {
    fn default() -> Self {
        Self {
            resolution: 0.05,
            max_confidence: 100,
            increment: 1,
        }
    }
}

/// Estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSettings {
    /// Per-step process noise diagonal (m^2, m^2, rad^2).
    pub q_diag: [f64; 3],
    /// Propagate covariance through the motion Jacobian instead of the
    /// plain additive inflation.
    pub jacobian_prediction: bool,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self {
            q_diag: [1e-6, 1e-6, 4e-6],
            jacobian_prediction: false,
        }
    }
}

impl FilterSettings {
    pub fn process_noise(&self) -> ProcessNoise {
        ProcessNoise::new(self.q_diag[0], self.q_diag[1], self.q_diag[2])
    }

    pub fn propagation(&self) -> CovariancePropagation {
        if self.jacobian_prediction {
            CovariancePropagation::Jacobian
        } else {
            CovariancePropagation::Additive
        }
    }
}

/// Arena selection and the start pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSettings {
    /// Path to a world file; the builtin maze when absent.
    pub file: Option<PathBuf>,
    /// Start pose `[x, y, theta]`.
    pub start: [f64; 3],
}

impl Default for WorldSettings {
    fn default() -> Self {
        Self {
            file: None,
            start: [-5.7, -5.7, 0.0],
        }
    }
}

/// Everything a config file can set, one section per parameter group.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub noise: NoiseConfig,
    pub mapping: MapSettings,
    pub wander: WanderParams,
    pub geometry: RobotGeometry,
    pub filter: FilterSettings,
    pub lidar: LidarConfig,
    pub world: WorldSettings,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn mapping_config(&self) -> MappingConfig {
        MappingConfig {
            omega_thresh: self.noise.omega_thresh,
            tau_conf: self.noise.tau_conf,
            increment: self.mapping.increment,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |message: String| Err(ConfigError::Invalid(message));
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let n = &self.noise;
        for (name, value) in [
            ("sigma_slip", n.sigma_slip),
            ("sigma_imu", n.sigma_imu),
            ("sigma_lidar", n.sigma_lidar),
            ("sigma_sensor", n.sigma_sensor),
            ("omega_thresh", n.omega_thresh),
            ("slip_correlation", n.slip_correlation),
        ] {
            if !nonneg(value) {
                return invalid(format!("{name} must be non-negative, got {value}"));
            }
        }
        if !positive(n.t_sync) {
            return invalid(format!("t_sync must be positive, got {}", n.t_sync));
        }
        if !positive(n.r_mask) {
            return invalid(format!("r_mask must be positive, got {}", n.r_mask));
        }
        if n.tau_conf > self.mapping.max_confidence {
            return invalid(format!(
                "tau_conf ({}) exceeds max_confidence ({})",
                n.tau_conf, self.mapping.max_confidence
            ));
        }
        if self.mapping.increment == 0 {
            return invalid("mapping increment must be at least 1".into());
        }
        if !positive(self.mapping.resolution) {
            return invalid("mapping resolution must be positive".into());
        }
        let w = &self.wander;
        if !(nonneg(w.cruise_speed) && nonneg(w.noise_factor) && nonneg(w.steering_bias)) {
            return invalid("wander parameters must be non-negative".into());
        }
        if w.cruise_speed > V_MAX {
            return invalid(format!(
                "cruise_speed {} exceeds v_max {V_MAX}",
                w.cruise_speed
            ));
        }
        if !(nonneg(w.avoid_distance) && w.avoid_distance < self.lidar.max_range) {
            return invalid("avoid_distance must sit below the lidar range".into());
        }
        if !(positive(self.geometry.wheel_radius) && positive(self.geometry.axle_length)) {
            return invalid("robot geometry must be positive".into());
        }
        if self.lidar.ray_count == 0 || self.lidar.ray_count > 682 {
            return invalid(format!(
                "lidar ray_count must be in 1..=682, got {}",
                self.lidar.ray_count
            ));
        }
        if !positive(self.lidar.max_range) || !nonneg(self.lidar.fov) {
            return invalid("lidar geometry must be positive".into());
        }
        if self.filter.q_diag.iter().any(|q| !nonneg(*q)) {
            return invalid("filter q_diag entries must be non-negative".into());
        }
        Ok(())
    }
}

/// Whether compared scenarios share noise realizations at a given seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StreamPairing {
    /// Same substreams across scenarios: paired comparison.
    #[default]
    Shared,
    /// Scenario-specific substreams.
    Independent,
}

/// Everything one trial needs: scenario, seed, timing, and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: crate::harness::ScenarioKind,
    pub seed: u64,
    /// Trial length, s.
    pub duration: f64,
    /// Physics and filter timestep, s.
    pub dt: f64,
    pub sim: SimConfig,
    pub pairing: StreamPairing,
}

impl RunConfig {
    pub fn new(scenario: crate::harness::ScenarioKind, seed: u64) -> Self {
        Self {
            scenario,
            seed,
            duration: 600.0,
            dt: 0.032,
            sim: SimConfig::default(),
            pairing: StreamPairing::Shared,
        }
    }

    pub fn start_pose(&self) -> Pose {
        let [x, y, theta] = self.sim.world.start;
        Pose::new(x, y, crate::estimator::wrap_angle(theta))
    }

    pub fn load_world(&self) -> Result<WorldModel, ConfigError> {
        match &self.sim.world.file {
            Some(path) => Ok(load_world_file(path)?),
            None => Ok(crate::world::default_maze()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) || self.dt > self.duration {
            return Err(ConfigError::Invalid(format!(
                "dt must be positive and at most the duration, got {}",
                self.dt
            )));
        }
        self.sim.validate()
    }
}
