//! Stochastic wandering exploration controller: cruise with randomized
//! steering, pivot away from frontal obstacles.

use serde::{Deserialize, Serialize};

use crate::kinematics::WheelCommand;
use crate::sensors::{LidarScan, RandomStream};

/// Actuator limit on wheel rim speed, m/s.
pub const V_MAX: f64 = 1.2;

/// Half-width of the frontal sector checked for obstacles, radians.
const FRONT_SECTOR: f64 = std::f64::consts::PI / 6.0;

/// Wander policy parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WanderParams {
    pub cruise_speed: f64,
    /// Scales the random differential steering, as a fraction of cruise.
    pub noise_factor: f64,
    /// Constant differential steering offset, as a fraction of cruise.
    pub steering_bias: f64,
    /// Frontal range below which avoidance takes over, meters.
    pub avoid_distance: f64,
}

impl Default for WanderParams {
    fn default() -> Self {
        Self {
            cruise_speed: 0.3,
            noise_factor: 0.2,
            steering_bias: 0.05,
            avoid_distance: 0.6,
        }
    }
}

/// One reactive control step.
///
/// Both wheels cruise by default, with the steering bias plus
/// N(0, noise_factor * cruise) applied differentially. When the nearest
/// return in the frontal +-30 degree sector comes closer than
/// `avoid_distance`, the robot pivots in place away from the nearer side:
/// the obstructed side's wheel runs forward, the other backward, which
/// keeps the frontal clearance from shrinking while turning.
pub fn wander_step(
    scan: &LidarScan,
    params: &WanderParams,
    rng: &mut RandomStream,
) -> WheelCommand {
    let mut nearest_left = f64::INFINITY;
    let mut nearest_right = f64::INFINITY;
    for (angle, range) in scan.rays() {
        if angle.abs() > FRONT_SECTOR {
            continue;
        }
        let Some(r) = range else { continue };
        // Positive angles are to the robot's left.
        if angle >= 0.0 {
            nearest_left = nearest_left.min(r);
        }
        if angle <= 0.0 {
            nearest_right = nearest_right.min(r);
        }
    }

    let frontal = nearest_left.min(nearest_right);
    let cruise = params.cruise_speed;
    let (left, right) = if frontal < params.avoid_distance {
        if nearest_left <= nearest_right {
            // Obstacle nearer on the left: pivot right.
            (cruise, -cruise)
        } else {
            (-cruise, cruise)
        }
    } else {
        let differential =
            params.steering_bias * cruise + rng.normal(0.0, params.noise_factor * cruise);
        (cruise + 0.5 * differential, cruise - 0.5 * differential)
    };
    WheelCommand::new(left.clamp(-V_MAX, V_MAX), right.clamp(-V_MAX, V_MAX))
}
