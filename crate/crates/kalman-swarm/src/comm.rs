//! Pseudo-global localization proxy: decides when a peer contact happens and
//! fabricates the localization packet a peer would transmit.
//!
//! The packet is always built from ground truth plus synthetic sensor noise,
//! never from any estimator's belief.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::Pose;
use crate::sensors::{sample_imu, RandomStream};

/// Timing slack so that events scheduled on exact multiples of the timestep
/// are not missed to floating-point rounding.
const EVENT_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CommError {
    #[error("agent {0} is not present in the position snapshot")]
    UnknownAgent(u32),
}

/// Communication parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommConfig {
    /// Interval of the temporal peer proxy, seconds.
    pub t_sync: f64,
    /// Peer detection radius for multi-agent radius mode, meters.
    pub r_mask: f64,
    /// Peer position noise, meters.
    pub sigma_sensor: f64,
}

impl Default for CommConfig {
    fn default() -> Self {
        Self {
            t_sync: 4.0,
            r_mask: 0.55,
            sigma_sensor: 0.02,
        }
    }
}

/// What a peer transmits on contact: its observed pose for the receiver to
/// fuse, with the advertised noise diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationPacket {
    pub position: (f64, f64),
    pub heading: f64,
    /// Diagonal measurement covariance (x, y, theta).
    pub noise: [f64; 3],
    pub sender_id: u32,
    pub timestamp: f64,
}

/// Temporal proxy trigger: a peer becomes visible once `t_sync` seconds have
/// elapsed since the last event. The first event is due at `t = t_sync`,
/// never at the exactly-initialized instant t = 0.
pub fn peer_event_due(t: f64, last_event: f64, cfg: &CommConfig) -> bool {
    debug_assert!(t >= last_event);
    t - last_event >= cfg.t_sync - EVENT_EPS
}

/// Fabricate the packet for a contact at time `t`: true position corrupted
/// by per-axis N(0, sigma_sensor) and an IMU-grade heading.
pub fn make_packet(
    true_pose: Pose,
    cfg: &CommConfig,
    sigma_imu: f64,
    rng: &mut RandomStream,
    t: f64,
) -> LocalizationPacket {
    let x = if cfg.sigma_sensor == 0.0 {
        true_pose.x
    } else {
        true_pose.x + rng.normal(0.0, cfg.sigma_sensor)
    };
    let y = if cfg.sigma_sensor == 0.0 {
        true_pose.y
    } else {
        true_pose.y + rng.normal(0.0, cfg.sigma_sensor)
    };
    LocalizationPacket {
        position: (x, y),
        heading: sample_imu(true_pose.theta, sigma_imu, rng),
        noise: [
            cfg.sigma_sensor * cfg.sigma_sensor,
            cfg.sigma_sensor * cfg.sigma_sensor,
            sigma_imu * sigma_imu,
        ],
        sender_id: 0,
        timestamp: t,
    }
}

/// Radius-based detection for true multi-agent setups: ids of all other
/// agents within `r_mask` of `self_id`. Positions are a ground-truth
/// snapshot taken before any agent updates.
pub fn detect_peers_radius(
    positions: &[(u32, (f64, f64))],
    self_id: u32,
    cfg: &CommConfig,
) -> Result<Vec<u32>, CommError> {
    let (_, own) = positions
        .iter()
        .find(|(id, _)| *id == self_id)
        .ok_or(CommError::UnknownAgent(self_id))?;
    Ok(positions
        .iter()
        .filter(|(id, p)| {
            *id != self_id && {
                let (dx, dy) = (p.0 - own.0, p.1 - own.1);
                (dx * dx + dy * dy).sqrt() <= cfg.r_mask
            }
        })
        .map(|(id, _)| *id)
        .collect())
}
