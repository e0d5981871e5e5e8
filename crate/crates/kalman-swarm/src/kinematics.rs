//! Differential-drive forward kinematics and the slip-corrupted encoder
//! model feeding odometry into the estimator.

use serde::{Deserialize, Serialize};

use crate::estimator::{wrap_angle, Pose};
use crate::sensors::RandomStream;

/// Wheel arc-length increments over one timestep, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometryDelta {
    pub left: f64,
    pub right: f64,
}

impl OdometryDelta {
    pub fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0)
    }
}

/// Commanded wheel rim speeds in m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelCommand {
    pub left: f64,
    pub right: f64,
}

impl WheelCommand {
    pub fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }

    pub fn stop() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn to_deltas(self, dt: f64) -> OdometryDelta {
        OdometryDelta::new(self.left * dt, self.right * dt)
    }
}

/// Drive geometry. Defaults follow the Pioneer 3-DX datasheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotGeometry {
    pub wheel_radius: f64,
    pub axle_length: f64,
}

impl Default for RobotGeometry {
    fn default() -> Self {
        Self {
            wheel_radius: 0.0975,
            axle_length: 0.33,
        }
    }
}

/// Advance a pose by one pair of wheel increments using midpoint-heading
/// integration: the displacement is applied at the average of the old and
/// new headings.
pub fn diff_drive_delta(pose: Pose, odo: OdometryDelta, geom: &RobotGeometry) -> Pose {
    let d = 0.5 * (odo.left + odo.right);
    let dtheta = (odo.right - odo.left) / geom.axle_length;
    let mid = pose.theta + 0.5 * dtheta;
    Pose::new(
        pose.x + d * mid.cos(),
        pose.y + d * mid.sin(),
        wrap_angle(pose.theta + dtheta),
    )
}

/// Corrupt true wheel increments with independent multiplicative slip
/// factors drawn from N(1.0, sigma_slip).
pub fn apply_slip(
    true_odo: OdometryDelta,
    sigma_slip: f64,
    rng: &mut RandomStream,
) -> OdometryDelta {
    assert!(sigma_slip >= 0.0, "sigma_slip must be non-negative");
    if sigma_slip == 0.0 {
        return true_odo;
    }
    OdometryDelta::new(
        true_odo.left * rng.normal(1.0, sigma_slip),
        true_odo.right * rng.normal(1.0, sigma_slip),
    )
}

/// Encoder slip with temporal correlation.
///
/// Wheel slip comes from surface friction, which varies by floor patch
/// rather than per encoder tick. Each wheel's factor follows a stationary
/// AR(1) process with marginal N(1.0, sigma_slip) and the configured
/// correlation time; a correlation time of zero redraws independently every
/// step, recovering [`apply_slip`] applied per timestep.
#[derive(Debug, Clone)]
pub struct SlipModel {
    sigma: f64,
    /// Per-step autocorrelation exp(-dt / tau).
    rho: f64,
    factor_left: f64,
    factor_right: f64,
    initialized: bool,
}

impl SlipModel {
    pub fn new(sigma_slip: f64, correlation_s: f64, dt: f64) -> Self {
        assert!(sigma_slip >= 0.0, "sigma_slip must be non-negative");
        assert!(
            correlation_s >= 0.0,
            "slip correlation must be non-negative"
        );
        assert!(dt > 0.0, "dt must be positive");
        let rho = if correlation_s == 0.0 {
            0.0
        } else {
            (-dt / correlation_s).exp()
        };
        Self {
            sigma: sigma_slip,
            rho,
            factor_left: 1.0,
            factor_right: 1.0,
            initialized: false,
        }
    }

    /// Corrupt one step of true odometry, evolving the slip factors.
    pub fn corrupt(&mut self, true_odo: OdometryDelta, rng: &mut RandomStream) -> OdometryDelta {
        if self.sigma == 0.0 {
            return true_odo;
        }
        if !self.initialized {
            self.factor_left = rng.normal(1.0, self.sigma);
            self.factor_right = rng.normal(1.0, self.sigma);
            self.initialized = true;
        } else {
            // Stationary AR(1) step keeps the N(1, sigma) marginal exactly.
            let spread = self.sigma * (1.0 - self.rho * self.rho).sqrt();
            self.factor_left = 1.0 + self.rho * (self.factor_left - 1.0) + rng.normal(0.0, spread);
            self.factor_right =
                1.0 + self.rho * (self.factor_right - 1.0) + rng.normal(0.0, spread);
        }
        OdometryDelta::new(
            true_odo.left * self.factor_left,
            true_odo.right * self.factor_right,
        )
    }
}
