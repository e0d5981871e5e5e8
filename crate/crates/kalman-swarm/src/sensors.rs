//! Noise-injecting sensor models and the seeded random stream discipline
//! that makes every trial bitwise reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::estimator::{wrap_angle, Pose};
use crate::world::{WorldError, WorldModel};

/// Deterministic random stream. Identical seeds (and labels) yield identical
/// draw sequences on every platform.
///
/// A trial owns one stream per noise source, derived from the trial seed by
/// a fixed label, so scenario comparisons at the same seed share their
/// process-noise realizations.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_label(seed, 0)
    }

    /// Independent substream: same key, distinct ChaCha stream counter.
    pub fn with_label(seed: u64, label: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(label);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draw from N(mean, sigma^2). A zero sigma returns the mean exactly.
    pub fn normal(&mut self, mean: f64, sigma: f64) -> f64 {
        Normal::new(mean, sigma)
            .expect("valid normal parameters")
            .sample(&mut self.rng)
    }

    /// Uniform draw from [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        use rand::Rng;
        self.rng.gen_range(lo..hi)
    }
}

/// Scan geometry: rays span `[-fov/2, +fov/2]` relative to the sensor
/// heading, evenly spaced, with hits beyond `max_range` dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarConfig {
    pub ray_count: usize,
    /// Field of view in radians.
    pub fov: f64,
    pub max_range: f64,
}

impl Default for LidarConfig {
    /// 240 rays over a 240 degree field of view, 5.6 m range.
    fn default() -> Self {
        Self {
            ray_count: 240,
            fov: 240.0_f64.to_radians(),
            max_range: 5.6,
        }
    }
}

impl LidarConfig {
    /// Ray angle relative to the sensor heading.
    pub fn ray_angle(&self, index: usize) -> f64 {
        debug_assert!(index < self.ray_count);
        if self.ray_count <= 1 {
            return 0.0;
        }
        -0.5 * self.fov + self.fov * index as f64 / (self.ray_count - 1) as f64
    }
}

/// One full sweep; `None` marks rays with no return within range.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub ranges: Vec<Option<f64>>,
    pub fov: f64,
    pub max_range: f64,
}

impl LidarScan {
    pub fn ray_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn ray_angle(&self, index: usize) -> f64 {
        if self.ranges.len() <= 1 {
            return 0.0;
        }
        -0.5 * self.fov + self.fov * index as f64 / (self.ranges.len() - 1) as f64
    }

    /// Iterate `(relative angle, range)` pairs.
    pub fn rays(&self) -> impl Iterator<Item = (f64, Option<f64>)> + '_ {
        (0..self.ranges.len()).map(move |i| (self.ray_angle(i), self.ranges[i]))
    }
}

/// Absolute-heading IMU sample: the true heading plus N(0, sigma_imu),
/// wrapped to `(-pi, pi]`.
pub fn sample_imu(true_theta: f64, sigma_imu: f64, rng: &mut RandomStream) -> f64 {
    assert!(sigma_imu >= 0.0, "sigma_imu must be non-negative");
    if sigma_imu == 0.0 {
        return wrap_angle(true_theta);
    }
    wrap_angle(true_theta + rng.normal(0.0, sigma_imu))
}

/// Cast one sweep from the true pose and corrupt each return with
/// N(0, sigma_lidar), clamped into `(0, max_range]`. Misses stay misses.
pub fn sample_lidar(
    world: &WorldModel,
    true_pose: Pose,
    config: &LidarConfig,
    sigma_lidar: f64,
    rng: &mut RandomStream,
) -> Result<LidarScan, WorldError> {
    assert!(sigma_lidar >= 0.0, "sigma_lidar must be non-negative");
    let mut ranges = Vec::with_capacity(config.ray_count);
    for i in 0..config.ray_count {
        let angle = true_pose.theta + config.ray_angle(i);
        let hit = world.ray_cast((true_pose.x, true_pose.y), angle, config.max_range)?;
        ranges.push(hit.map(|r| {
            if sigma_lidar == 0.0 {
                r
            } else {
                (r + rng.normal(0.0, sigma_lidar)).clamp(1e-9, config.max_range)
            }
        }));
    }
    Ok(LidarScan {
        ranges,
        fov: config.fov,
        max_range: config.max_range,
    })
}
