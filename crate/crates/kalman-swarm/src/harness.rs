//! Scenario orchestration: the per-step simulation loop, error metrics,
//! trace/map persistence, and the multi-seed scenario comparison.
//!
//! Loop ordering is fixed: control (on the previous scan) -> ground-truth
//! physics -> sense -> estimate -> map, with the planar error sampled every
//! third step (~10.4 Hz).

use std::fmt;
use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::comm::{make_packet, peer_event_due};
use crate::config::{ConfigError, RunConfig, StreamPairing};
use crate::controller::wander_step;
use crate::estimator::{
    kalman_update, predict_state_with, select_observation_mode, wrap_angle, BeliefState,
    EstimationError, Measurement, ObservationMode, Pose,
};
use crate::kinematics::SlipModel;
use crate::mapping::{extract_occupancy, write_pgm, ConfidenceGrid};
use crate::sensors::{sample_imu, sample_lidar, RandomStream};
use crate::world::{step_ground_truth, GroundTruth, WorldError, BODY_RADIUS};

#[derive(Debug, Error)]
pub enum TrialError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

#[derive(Debug, Error)]
#[error("error reduction rate is undefined for a zero baseline error")]
pub struct UndefinedMetric;

/// The three comparative test cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Dead reckoning on raw odometry; no correction at all.
    Baseline,
    /// Heading-only correction from the IMU every step.
    ImuFused,
    /// Heading-only correction plus full-state resets on peer contact.
    GreedySwarm,
}

impl ScenarioKind {
    pub fn all() -> [ScenarioKind; 3] {
        [
            ScenarioKind::Baseline,
            ScenarioKind::ImuFused,
            ScenarioKind::GreedySwarm,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Baseline => "baseline",
            ScenarioKind::ImuFused => "imu",
            ScenarioKind::GreedySwarm => "greedy",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(ScenarioKind::Baseline),
            "imu" => Ok(ScenarioKind::ImuFused),
            "greedy" => Ok(ScenarioKind::GreedySwarm),
            other => Err(format!(
                "unknown scenario `{other}` (expected baseline, imu, or greedy)"
            )),
        }
    }
}

/// Everything recorded over one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scenario: ScenarioKind,
    pub seed: u64,
    /// `(t, planar error)` samples every third step.
    pub samples: Vec<(f64, f64)>,
    pub final_grid: ConfidenceGrid,
    /// Largest sampled error.
    pub peak_error: f64,
    /// Error at the last sample.
    pub final_error: f64,
    /// Largest per-step |heading error| over the whole trial.
    pub peak_heading_error: f64,
    pub full_update_count: u32,
    pub heading_update_count: u32,
    /// Largest per-step error after the first full-state update, if any.
    pub max_error_after_first_sync: Option<f64>,
    /// Largest error observed immediately after a full-state update.
    pub max_post_update_error: Option<f64>,
    /// Largest excess of any covariance diagonal over the matching
    /// measurement variance right after a full-state update (non-positive
    /// when the collapse property holds).
    pub max_post_update_cov_excess: Option<f64>,
    /// Steps on which wall contact stopped translation.
    pub blocked_steps: u32,
}

impl TrialRecord {
    pub fn mean_error(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|(_, e)| e).sum::<f64>() / self.samples.len() as f64
    }
}

/// Planar Euclidean distance between truth and estimate; heading excluded.
pub fn euclidean_error(truth: &Pose, estimate: &Pose) -> f64 {
    ((truth.x - estimate.x).powi(2) + (truth.y - estimate.y).powi(2)).sqrt()
}

/// Error reduction rate in percent: `(1 - e_swarm / e_base) * 100`.
pub fn error_reduction_rate(e_swarm: f64, e_base: f64) -> Result<f64, UndefinedMetric> {
    if e_base <= 0.0 {
        return Err(UndefinedMetric);
    }
    Ok((1.0 - e_swarm / e_base) * 100.0)
}

/// Substream labels deriving per-source generators from the trial seed.
mod stream_label {
    pub const SLIP: u64 = 1;
    pub const IMU: u64 = 2;
    pub const LIDAR: u64 = 3;
    pub const COMM: u64 = 4;
    pub const WANDER: u64 = 5;
}

fn substream(cfg: &RunConfig, label: u64) -> RandomStream {
    let label = match cfg.pairing {
        StreamPairing::Shared => label,
        StreamPairing::Independent => label + 100 * (cfg.scenario as u64 + 1),
    };
    RandomStream::with_label(cfg.seed, label)
}

/// Run one deterministic trial.
///
/// The belief starts exactly on the ground truth with zero covariance (the
/// one-time pose capture), then every step runs the control -> physics ->
/// sense -> estimate -> map pipeline with the scenario's update policy.
pub fn run_trial(cfg: &RunConfig) -> Result<TrialRecord, TrialError> {
    cfg.validate()?;
    let world = cfg.load_world()?;
    let start = cfg.start_pose();
    if !world.bounds().contains(start.x, start.y)
        || world.min_wall_distance((start.x, start.y)) < BODY_RADIUS
    {
        return Err(ConfigError::Invalid(format!(
            "start pose ({}, {}) is not clear of the walls",
            start.x, start.y
        ))
        .into());
    }

    let sim = &cfg.sim;
    let geom = sim.geometry;
    let map_cfg = sim.mapping_config();
    let comm_cfg = sim.noise.comm_config();
    let q = sim.filter.process_noise();
    let propagation = sim.filter.propagation();
    let r_heading = sim.noise.sigma_imu * sim.noise.sigma_imu;

    let mut slip_rng = substream(cfg, stream_label::SLIP);
    let mut imu_rng = substream(cfg, stream_label::IMU);
    let mut lidar_rng = substream(cfg, stream_label::LIDAR);
    let mut comm_rng = substream(cfg, stream_label::COMM);
    let mut wander_rng = substream(cfg, stream_label::WANDER);
    let mut slip = SlipModel::new(sim.noise.sigma_slip, sim.noise.slip_correlation, cfg.dt);

    let mut gt = GroundTruth::at_rest(start);
    let mut belief = BeliefState::exact(start);
    let mut grid = ConfidenceGrid::covering(
        world.bounds(),
        sim.mapping.resolution,
        sim.mapping.max_confidence,
    );
    let mut scan = sample_lidar(
        &world,
        gt.pose,
        &sim.lidar,
        sim.noise.sigma_lidar,
        &mut lidar_rng,
    )?;

    let steps = (cfg.duration / cfg.dt).round() as u64;
    let mut samples = Vec::with_capacity((steps / 3 + 1) as usize);
    let mut last_sync = 0.0;
    let mut synced = false;
    let mut full_update_count = 0u32;
    let mut heading_update_count = 0u32;
    let mut peak_heading_error = 0.0f64;
    let mut max_error_after_first_sync: Option<f64> = None;
    let mut max_post_update_error: Option<f64> = None;
    let mut max_post_update_cov_excess: Option<f64> = None;
    let mut blocked_steps = 0u32;

    for k in 1..=steps {
        let t = k as f64 * cfg.dt;

        let cmd = wander_step(&scan, &sim.wander, &mut wander_rng);
        let (next, true_odo) = step_ground_truth(&world, &gt, cmd, cfg.dt, &geom);
        if next.linear_velocity == 0.0 && cmd.left + cmd.right != 0.0 {
            blocked_steps += 1;
        }
        gt = next;

        let measured_odo = slip.corrupt(true_odo, &mut slip_rng);
        scan = sample_lidar(
            &world,
            gt.pose,
            &sim.lidar,
            sim.noise.sigma_lidar,
            &mut lidar_rng,
        )?;

        belief = predict_state_with(&belief, measured_odo, &geom, &q, propagation);

        match cfg.scenario {
            ScenarioKind::Baseline => {}
            ScenarioKind::ImuFused => {
                belief =
                    heading_update(&belief, &gt, sim.noise.sigma_imu, r_heading, &mut imu_rng)?;
                heading_update_count += 1;
            }
            ScenarioKind::GreedySwarm => {
                let peer = peer_event_due(t, last_sync, &comm_cfg);
                match select_observation_mode(peer) {
                    ObservationMode::FullPose => {
                        let packet =
                            make_packet(gt.pose, &comm_cfg, sim.noise.sigma_imu, &mut comm_rng, t);
                        let z = Measurement::FullPose {
                            values: nalgebra::Vector3::new(
                                packet.position.0,
                                packet.position.1,
                                packet.heading,
                            ),
                            variances: nalgebra::Vector3::from(packet.noise),
                        };
                        belief = kalman_update(&belief, &z)?;
                        // Anchor the next interval on the schedule, not on
                        // the (step-quantized) firing time, so the event
                        // count stays floor(duration / t_sync) even when
                        // t_sync is not a step multiple.
                        last_sync += comm_cfg.t_sync;
                        synced = true;
                        full_update_count += 1;
                        let post = euclidean_error(&gt.pose, &belief.mean);
                        max_post_update_error =
                            Some(max_post_update_error.map_or(post, |m| m.max(post)));
                        let diag = belief.covariance.diagonal();
                        let excess = (0..3)
                            .map(|i| diag[i] - packet.noise[i])
                            .fold(f64::NEG_INFINITY, f64::max);
                        max_post_update_cov_excess =
                            Some(max_post_update_cov_excess.map_or(excess, |m| m.max(excess)));
                    }
                    ObservationMode::HeadingOnly => {
                        belief = heading_update(
                            &belief,
                            &gt,
                            sim.noise.sigma_imu,
                            r_heading,
                            &mut imu_rng,
                        )?;
                        heading_update_count += 1;
                    }
                }
            }
        }

        grid.integrate_scan(belief.mean, &scan, &map_cfg, gt.angular_velocity);

        let error = euclidean_error(&gt.pose, &belief.mean);
        let heading_error = wrap_angle(belief.mean.theta - gt.pose.theta).abs();
        peak_heading_error = peak_heading_error.max(heading_error);
        if synced {
            max_error_after_first_sync =
                Some(max_error_after_first_sync.map_or(error, |m| m.max(error)));
        }
        if k % 3 == 0 {
            samples.push((t, error));
        }
    }

    let peak_error = samples.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let final_error = samples.last().map_or(0.0, |(_, e)| *e);
    Ok(TrialRecord {
        scenario: cfg.scenario,
        seed: cfg.seed,
        samples,
        final_grid: grid,
        peak_error,
        final_error,
        peak_heading_error,
        full_update_count,
        heading_update_count,
        max_error_after_first_sync,
        max_post_update_error,
        max_post_update_cov_excess,
        blocked_steps,
    })
}

fn heading_update(
    belief: &BeliefState,
    gt: &GroundTruth,
    sigma_imu: f64,
    r_heading: f64,
    rng: &mut RandomStream,
) -> Result<BeliefState, TrialError> {
    let z = Measurement::Heading {
        value: sample_imu(gt.pose.theta, sigma_imu, rng),
        variance: r_heading,
    };
    Ok(kalman_update(belief, &z)?)
}

/// Write the error trace as `Time,Error` CSV rows (seconds to three
/// decimals, meters to six).
pub fn export_csv(record: &TrialRecord, path: &Path) -> io::Result<()> {
    let mut out = String::with_capacity(record.samples.len() * 16 + 16);
    out.push_str("Time,Error\n");
    for (t, e) in &record.samples {
        out.push_str(&format!("{t:.3},{e:.6}\n"));
    }
    std::fs::write(path, out)
}

/// Parse a trace written by [`export_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("Time,Error") => {}
        other => return Err(format!("bad header: {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let (t, e) = line
                .split_once(',')
                .ok_or_else(|| format!("line {}: missing comma", i + 2))?;
            Ok((
                t.parse().map_err(|_| format!("line {}: bad time", i + 2))?,
                e.parse()
                    .map_err(|_| format!("line {}: bad error", i + 2))?,
            ))
        })
        .collect()
}

/// Threshold the final grid and write it as a PGM (plus sidecar).
pub fn export_map(
    record: &TrialRecord,
    cfg: &crate::mapping::MappingConfig,
    path: &Path,
) -> io::Result<()> {
    write_pgm(&extract_occupancy(&record.final_grid, cfg), path)
}

/// Human-readable per-trial summary.
pub fn write_summary(record: &TrialRecord, path: &Path) -> io::Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", record.scenario);
    let _ = writeln!(out, "seed: {}", record.seed);
    let _ = writeln!(out, "samples: {}", record.samples.len());
    let _ = writeln!(out, "peak_error_m: {:.6}", record.peak_error);
    let _ = writeln!(out, "final_error_m: {:.6}", record.final_error);
    let _ = writeln!(out, "mean_error_m: {:.6}", record.mean_error());
    let _ = writeln!(
        out,
        "peak_heading_error_rad: {:.6}",
        record.peak_heading_error
    );
    let _ = writeln!(out, "full_updates: {}", record.full_update_count);
    let _ = writeln!(out, "heading_updates: {}", record.heading_update_count);
    let _ = writeln!(out, "blocked_steps: {}", record.blocked_steps);
    if let Some(m) = record.max_error_after_first_sync {
        let _ = writeln!(out, "max_error_after_first_sync_m: {m:.6}");
    }
    if let Some(m) = record.max_post_update_error {
        let _ = writeln!(out, "max_post_update_error_m: {m:.6}");
    }
    std::fs::write(path, out)
}

/// All three scenarios at one seed, plus the peak-error reduction rate.
#[derive(Debug, Clone)]
pub struct SeedComparison {
    pub seed: u64,
    pub baseline: TrialRecord,
    pub imu_fused: TrialRecord,
    pub greedy: TrialRecord,
    /// Eta on peak errors, greedy vs baseline, percent.
    pub eta_percent: f64,
}

/// Run the three scenarios for every seed. Trials are independent and run
/// in parallel; the base configuration supplies everything but scenario and
/// seed.
pub fn run_comparison(seeds: &[u64], base: &RunConfig) -> Result<Vec<SeedComparison>, TrialError> {
    let jobs: Vec<(u64, ScenarioKind)> = seeds
        .iter()
        .flat_map(|&seed| ScenarioKind::all().into_iter().map(move |s| (seed, s)))
        .collect();
    let records: Vec<Result<TrialRecord, TrialError>> = jobs
        .par_iter()
        .map(|&(seed, scenario)| {
            let mut cfg = base.clone();
            cfg.seed = seed;
            cfg.scenario = scenario;
            run_trial(&cfg)
        })
        .collect();

    let mut by_job = records.into_iter();
    let mut out = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let baseline = by_job.next().expect("job count")?;
        let imu_fused = by_job.next().expect("job count")?;
        let greedy = by_job.next().expect("job count")?;
        let eta_percent =
            error_reduction_rate(greedy.peak_error, baseline.peak_error).unwrap_or(f64::NAN);
        out.push(SeedComparison {
            seed,
            baseline,
            imu_fused,
            greedy,
            eta_percent,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use approx::assert_relative_eq;

    fn short_cfg(scenario: ScenarioKind, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::new(scenario, seed);
        cfg.duration = 12.0;
        cfg
    }

    #[test]
    fn euclidean_error_ignores_heading() {
        let truth = Pose::new(0.0, 0.0, 0.0);
        assert_eq!(euclidean_error(&truth, &truth), 0.0);
        let est = Pose::new(3.0, 4.0, std::f64::consts::PI);
        assert_relative_eq!(euclidean_error(&truth, &est), 5.0, epsilon = 1e-15);
        assert_relative_eq!(
            euclidean_error(&Pose::new(1.0, 1.0, 0.3), &Pose::new(1.0, 2.0, -0.8)),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn error_reduction_rate_formula() {
        // Peak errors from the reported experiment land at 99.41%.
        let eta = error_reduction_rate(0.05, 8.5).unwrap();
        assert_relative_eq!(eta, (1.0 - 0.05 / 8.5) * 100.0, epsilon = 1e-12);
        assert!((99.41..99.42).contains(&eta));
        assert_eq!(error_reduction_rate(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(error_reduction_rate(0.0, 2.0).unwrap(), 100.0);
        // Negative when the swarm does worse.
        assert!(error_reduction_rate(2.0, 1.0).unwrap() < 0.0);
        assert!(error_reduction_rate(1.0, 0.0).is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in ScenarioKind::all() {
            assert_eq!(s.name().parse::<ScenarioKind>().unwrap(), s);
        }
        assert!("gps".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn short_noiseless_trial_closes_exactly() {
        for scenario in ScenarioKind::all() {
            let mut cfg = short_cfg(scenario, 3);
            cfg.sim.noise = crate::config::NoiseConfig::noiseless();
            let record = run_trial(&cfg).unwrap();
            for (t, e) in &record.samples {
                assert!(*e < 1e-9, "{scenario:?} error {e} at t = {t}");
            }
            assert!(record.peak_heading_error < 1e-9);
        }
    }

    #[test]
    fn update_counts_match_the_schedule() {
        let record = run_trial(&short_cfg(ScenarioKind::GreedySwarm, 1)).unwrap();
        let steps = (12.0_f64 / 0.032).round() as u32;
        assert_eq!(record.full_update_count, 3); // floor(12 / 4)
        assert_eq!(
            record.heading_update_count + record.full_update_count,
            steps
        );

        let record = run_trial(&short_cfg(ScenarioKind::ImuFused, 1)).unwrap();
        assert_eq!(record.full_update_count, 0);
        assert_eq!(record.heading_update_count, steps);

        let record = run_trial(&short_cfg(ScenarioKind::Baseline, 1)).unwrap();
        assert_eq!(record.full_update_count, 0);
        assert_eq!(record.heading_update_count, 0);
    }

    #[test]
    fn samples_are_spaced_three_steps_apart() {
        let record = run_trial(&short_cfg(ScenarioKind::Baseline, 2)).unwrap();
        assert_eq!(record.samples.len(), 125); // floor(375 / 3)
        assert_relative_eq!(record.samples[0].0, 3.0 * 0.032, epsilon = 1e-12);
        for pair in record.samples.windows(2) {
            assert_relative_eq!(pair[1].0 - pair[0].0, 0.096, epsilon = 1e-9);
        }
    }

    #[test]
    fn trials_are_bitwise_repeatable() {
        let cfg = short_cfg(ScenarioKind::GreedySwarm, 9);
        let a = run_trial(&cfg).unwrap();
        let b = run_trial(&cfg).unwrap();
        assert_eq!(a, b);
        let c = run_trial(&short_cfg(ScenarioKind::GreedySwarm, 10)).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn bad_configs_are_rejected_before_running() {
        let mut cfg = short_cfg(ScenarioKind::Baseline, 1);
        cfg.sim.noise.tau_conf = 200;
        assert!(matches!(run_trial(&cfg), Err(TrialError::Config(_))));

        let mut cfg = short_cfg(ScenarioKind::Baseline, 1);
        cfg.sim.world.start = [7.4, 7.4, 0.0]; // inside the wall clearance
        assert!(matches!(run_trial(&cfg), Err(TrialError::Config(_))));
    }

    #[test]
    fn csv_export_formats_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let record = TrialRecord {
            scenario: ScenarioKind::GreedySwarm,
            seed: 1,
            samples: vec![(4.0, 0.05), (8.0, 0.125)],
            final_grid: ConfidenceGrid::new((0.0, 0.0), 1.0, 1, 1, 100),
            peak_error: 0.125,
            final_error: 0.125,
            peak_heading_error: 0.0,
            full_update_count: 2,
            heading_update_count: 0,
            max_error_after_first_sync: None,
            max_post_update_error: None,
            max_post_update_cov_excess: None,
            blocked_steps: 0,
        };
        export_csv(&record, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "Time,Error\n4.000,0.050000\n8.000,0.125000\n");
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed, record.samples);
    }
}
