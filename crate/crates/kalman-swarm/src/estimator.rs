//! Belief state and the Kalman predict/update cycle, including the greedy
//! observation-model switch between heading-only and full-pose corrections.
//!
//! The filter tracks a planar pose `[x, y, theta]` with a 3x3 covariance.
//! Prediction advances the mean through differential-drive kinematics and
//! inflates the covariance additively; correction applies the standard
//! Kalman gain under one of two observation models selected by peer
//! availability.

use nalgebra::{Matrix3, RowVector3, Vector3};
use thiserror::Error;

use crate::kinematics::{diff_drive_delta, OdometryDelta, RobotGeometry};

/// Determinant threshold below which the innovation covariance is treated
/// as singular.
pub const SINGULARITY_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EstimationError {
    /// The innovation covariance cannot be inverted. Only reachable when
    /// both the observed block of P and the measurement noise are zero.
    #[error("degenerate update: innovation covariance is singular (|det S| = {det:.3e})")]
    DegenerateUpdate { det: f64 },
}

/// Planar pose: position in meters, heading in radians.
///
/// Heading is kept in `(-pi, pi]` by every operation that writes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.theta)
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

/// Normalize an angle to `(-pi, pi]`.
///
/// Angles already in range are returned unchanged (bit-for-bit), which keeps
/// repeated normalization stable.
pub fn wrap_angle(theta: f64) -> f64 {
    assert!(theta.is_finite(), "wrap_angle requires a finite angle");
    if theta > -std::f64::consts::PI && theta <= std::f64::consts::PI {
        return theta;
    }
    use std::f64::consts::PI;
    // (PI - theta) mod 2*PI lands in [0, 2*PI), so the result is in (-PI, PI].
    PI - (PI - theta).rem_euclid(2.0 * PI)
}

/// 3x3 pose covariance (m^2, m^2, rad^2 on the diagonal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariance3(Matrix3<f64>);

impl Covariance3 {
    pub fn zeros() -> Self {
        Self(Matrix3::zeros())
    }

    pub fn from_diagonal(xx: f64, yy: f64, tt: f64) -> Self {
        Self(Matrix3::from_diagonal(&Vector3::new(xx, yy, tt)))
    }

    /// Wrap an arbitrary matrix without validation; callers own the
    /// symmetry/PSD contract. Use [`Covariance3::validate`] to check it.
    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn diagonal(&self) -> Vector3<f64> {
        self.0.diagonal()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Symmetry check with relative tolerance 1e-9 and PSD check with
    /// eigenvalue floor -1e-9.
    pub fn validate(&self) -> Result<(), String> {
        let m = &self.0;
        let scale = m.amax();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let delta = (m[(i, j)] - m[(j, i)]).abs();
                if delta > 1e-9 * scale {
                    return Err(format!(
                        "asymmetric covariance: |P[{i}][{j}] - P[{j}][{i}]| = {delta:e}"
                    ));
                }
            }
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -1e-9 {
            return Err(format!("indefinite covariance: min eigenvalue {min_eig:e}"));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (self.0 + self.0.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }

    fn resymmetrized(m: Matrix3<f64>) -> Self {
        Self((m + m.transpose()) * 0.5)
    }
}

/// Per-step process noise, diagonal by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessNoise {
    diag: Vector3<f64>,
}

impl ProcessNoise {
    /// Panics if any entry is negative.
    pub fn new(q_x: f64, q_y: f64, q_theta: f64) -> Self {
        assert!(
            q_x >= 0.0 && q_y >= 0.0 && q_theta >= 0.0,
            "process noise entries must be non-negative"
        );
        Self {
            diag: Vector3::new(q_x, q_y, q_theta),
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn diagonal(&self) -> Vector3<f64> {
        self.diag
    }
}

impl Default for ProcessNoise {
    /// Default per-32ms-step inflation: (1e-3 m)^2 on position,
    /// (2e-3 rad)^2 on heading.
    fn default() -> Self {
        Self::new(1e-6, 1e-6, 4e-6)
    }
}

/// Pose estimate paired with its covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefState {
    pub mean: Pose,
    pub covariance: Covariance3,
}

impl BeliefState {
    pub fn new(mean: Pose, covariance: Covariance3) -> Self {
        Self { mean, covariance }
    }

    /// Belief with zero covariance: the one-time exact pose capture used to
    /// align the estimator with the global frame at t = 0.
    pub fn exact(pose: Pose) -> Self {
        Self::new(pose, Covariance3::zeros())
    }
}

/// Observation model selected each step by the greedy policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    /// H = [0 0 1]: heading correction only, available while isolated.
    HeadingOnly,
    /// H = I3: full-pose correction, available on peer contact.
    FullPose,
}

impl ObservationMode {
    pub fn measurement_dim(self) -> usize {
        match self {
            ObservationMode::HeadingOnly => 1,
            ObservationMode::FullPose => 3,
        }
    }
}

/// Greedy policy: take the richest observation model available this step.
pub fn select_observation_mode(peer_available: bool) -> ObservationMode {
    if peer_available {
        ObservationMode::FullPose
    } else {
        ObservationMode::HeadingOnly
    }
}

/// A measurement together with its (diagonal) noise covariance. The variant
/// fixes the observation matrix, so dimensions cannot disagree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measurement {
    Heading {
        value: f64,
        variance: f64,
    },
    FullPose {
        values: Vector3<f64>,
        variances: Vector3<f64>,
    },
}

impl Measurement {
    pub fn mode(&self) -> ObservationMode {
        match self {
            Measurement::Heading { .. } => ObservationMode::HeadingOnly,
            Measurement::FullPose { .. } => ObservationMode::FullPose,
        }
    }
}

/// Covariance inflation for one prediction step: `P + Q`, no Jacobian.
pub fn predict_covariance(p: &Covariance3, q: &ProcessNoise) -> Covariance3 {
    Covariance3::from_matrix(p.matrix() + Matrix3::from_diagonal(&q.diagonal()))
}

/// How prediction propagates covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariancePropagation {
    /// `P + Q`, the default.
    Additive,
    /// `F P F^T + Q` with the differential-drive Jacobian, offered for
    /// comparison.
    Jacobian,
}

/// Advance the belief through one odometry step.
pub fn predict_state(
    belief: &BeliefState,
    odo: OdometryDelta,
    geom: &RobotGeometry,
    q: &ProcessNoise,
) -> BeliefState {
    predict_state_with(belief, odo, geom, q, CovariancePropagation::Additive)
}

pub fn predict_state_with(
    belief: &BeliefState,
    odo: OdometryDelta,
    geom: &RobotGeometry,
    q: &ProcessNoise,
    propagation: CovariancePropagation,
) -> BeliefState {
    let mean = diff_drive_delta(belief.mean, odo, geom);
    let covariance = match propagation {
        CovariancePropagation::Additive => predict_covariance(&belief.covariance, q),
        CovariancePropagation::Jacobian => {
            let d = 0.5 * (odo.left + odo.right);
            let dtheta = (odo.right - odo.left) / geom.axle_length;
            let heading = belief.mean.theta + 0.5 * dtheta;
            let f = Matrix3::new(
                1.0,
                0.0,
                -d * heading.sin(),
                0.0,
                1.0,
                d * heading.cos(),
                0.0,
                0.0,
                1.0,
            );
            Covariance3::from_matrix(
                f * belief.covariance.matrix() * f.transpose()
                    + Matrix3::from_diagonal(&q.diagonal()),
            )
        }
    };
    BeliefState::new(mean, covariance)
}

/// Standard Kalman correction under the measurement's observation model.
///
/// `S = H P H^T + R`, `K = P H^T S^{-1}`, mean += K * innovation with the
/// heading innovation wrapped to the shortest arc, `P <- P - K H P`
/// re-symmetrized as `(M + M^T) / 2`.
pub fn kalman_update(
    belief: &BeliefState,
    z: &Measurement,
) -> Result<BeliefState, EstimationError> {
    let p = *belief.covariance.matrix();
    match *z {
        Measurement::Heading { value, variance } => {
            let s = p[(2, 2)] + variance;
            if s.abs() < SINGULARITY_EPS {
                return Err(EstimationError::DegenerateUpdate { det: s });
            }
            // K = P H^T / s is the third column of P scaled by 1/s.
            let k = Vector3::new(p[(0, 2)], p[(1, 2)], p[(2, 2)]) / s;
            let innovation = wrap_angle(value - belief.mean.theta);
            let mean = Pose::new(
                belief.mean.x + k.x * innovation,
                belief.mean.y + k.y * innovation,
                wrap_angle(belief.mean.theta + k.z * innovation),
            );
            // H P is the third row of P.
            let hp = RowVector3::new(p[(2, 0)], p[(2, 1)], p[(2, 2)]);
            let covariance = Covariance3::resymmetrized(p - k * hp);
            Ok(BeliefState::new(mean, covariance))
        }
        Measurement::FullPose { values, variances } => {
            let s = p + Matrix3::from_diagonal(&variances);
            // det(S) scales with the cube of the entries, so the singularity
            // threshold is taken relative to the matrix scale.
            let scale = s.amax();
            let det = det3(&s);
            if scale == 0.0 || det.abs() < SINGULARITY_EPS * scale.powi(3) {
                return Err(EstimationError::DegenerateUpdate { det });
            }
            let k = p * invert3(&s, det);
            let mut innovation = values - belief.mean.to_vector();
            innovation.z = wrap_angle(innovation.z);
            let correction = k * innovation;
            let mean = Pose::new(
                belief.mean.x + correction.x,
                belief.mean.y + correction.y,
                wrap_angle(belief.mean.theta + correction.z),
            );
            // H = I, so K H P = K P.
            let covariance = Covariance3::resymmetrized(p - k * p);
            Ok(BeliefState::new(mean, covariance))
        }
    }
}

fn det3(m: &Matrix3<f64>) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Direct 3x3 inverse via the adjugate; caller has already screened `det`.
fn invert3(m: &Matrix3<f64>, det: f64) -> Matrix3<f64> {
    let inv_det = 1.0 / det;
    Matrix3::new(
        (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]) * inv_det,
        (m[(0, 2)] * m[(2, 1)] - m[(0, 1)] * m[(2, 2)]) * inv_det,
        (m[(0, 1)] * m[(1, 2)] - m[(0, 2)] * m[(1, 1)]) * inv_det,
        (m[(1, 2)] * m[(2, 0)] - m[(1, 0)] * m[(2, 2)]) * inv_det,
        (m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]) * inv_det,
        (m[(0, 2)] * m[(1, 0)] - m[(0, 0)] * m[(1, 2)]) * inv_det,
        (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]) * inv_det,
        (m[(0, 1)] * m[(2, 0)] - m[(0, 0)] * m[(2, 1)]) * inv_det,
        (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]) * inv_det,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn default_geom() -> RobotGeometry {
        RobotGeometry::default()
    }

    #[test]
    fn wrap_angle_identity_and_boundary() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_eq!(wrap_angle(PI), PI);
        // -pi is equivalent to +pi and must land on the closed end.
        assert_eq!(wrap_angle(-PI), PI);
    }

    #[test]
    fn wrap_angle_matches_direct_arithmetic() {
        // Oracle: -6.2 is one full turn below its representative.
        let expected = -6.2 + 2.0 * PI;
        assert_relative_eq!(wrap_angle(-6.2), expected, max_relative = 1e-12);
    }

    #[test]
    fn wrap_angle_idempotent_and_congruent() {
        let mut t = -50.0;
        while t < 50.0 {
            let w = wrap_angle(t);
            assert!(w > -PI && w <= PI, "wrap({t}) = {w} out of range");
            assert_eq!(wrap_angle(w), w, "wrap not idempotent at {t}");
            let turns = (t - w) / (2.0 * PI);
            assert_relative_eq!(turns, turns.round(), epsilon = 1e-9);
            t += 0.137;
        }
    }

    #[test]
    #[should_panic]
    fn wrap_angle_rejects_non_finite() {
        wrap_angle(f64::NAN);
    }

    #[test]
    fn predict_covariance_is_elementwise_addition() {
        let q = ProcessNoise::new(0.3, 0.7, 0.1);
        let from_zero = predict_covariance(&Covariance3::zeros(), &q);
        assert_eq!(from_zero.diagonal(), Vector3::new(0.3, 0.7, 0.1));

        let identity = Covariance3::from_diagonal(1.0, 1.0, 1.0);
        let unchanged = predict_covariance(&identity, &ProcessNoise::zero());
        assert_eq!(unchanged, identity);

        // Elementwise-addition oracle.
        let p = Covariance3::from_diagonal(0.01, 0.02, 0.005);
        let q = ProcessNoise::new(1e-6, 1e-6, 4e-6);
        let out = predict_covariance(&p, &q);
        let expected = [0.01 + 1e-6, 0.02 + 1e-6, 0.005 + 4e-6];
        for i in 0..3 {
            assert_relative_eq!(out.diagonal()[i], expected[i], max_relative = 1e-15);
        }
    }

    #[test]
    fn predict_state_straight_line() {
        let belief = BeliefState::exact(Pose::origin());
        let out = predict_state(
            &belief,
            OdometryDelta::new(0.1, 0.1),
            &default_geom(),
            &ProcessNoise::zero(),
        );
        assert_relative_eq!(out.mean.x, 0.1, epsilon = 1e-15);
        assert_relative_eq!(out.mean.y, 0.0, epsilon = 1e-15);
        assert_eq!(out.mean.theta, 0.0);
    }

    #[test]
    fn predict_state_pure_rotation() {
        let geom = default_geom();
        let s = 0.02;
        let belief = BeliefState::exact(Pose::origin());
        let out = predict_state(
            &belief,
            OdometryDelta::new(-s, s),
            &geom,
            &ProcessNoise::zero(),
        );
        assert_eq!(out.mean.x, 0.0);
        assert_eq!(out.mean.y, 0.0);
        assert_relative_eq!(
            out.mean.theta,
            2.0 * s / geom.axle_length,
            max_relative = 1e-12
        );
    }

    #[test]
    fn predict_state_rotates_displacement_by_heading() {
        // Independent oracle: integrate the same equal-wheel step in 1000
        // sub-steps. For straight motion the heading never changes, so the
        // composite must agree to machine-level accuracy.
        let geom = default_geom();
        let belief = BeliefState::new(Pose::new(0.0, 0.0, PI / 2.0), Covariance3::zeros());
        let out = predict_state(
            &belief,
            OdometryDelta::new(0.1, 0.1),
            &geom,
            &ProcessNoise::zero(),
        );

        let mut oracle = Pose::new(0.0, 0.0, PI / 2.0);
        for _ in 0..1000 {
            oracle = diff_drive_delta(oracle, OdometryDelta::new(1e-4, 1e-4), &geom);
        }
        assert_relative_eq!(out.mean.x, oracle.x, epsilon = 1e-12);
        assert_relative_eq!(out.mean.y, oracle.y, epsilon = 1e-12);
        assert_relative_eq!(out.mean.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(out.mean.y, 0.1, epsilon = 1e-12);
        assert_eq!(out.mean.theta, PI / 2.0);
    }

    #[test]
    fn exact_full_pose_measurement_snaps_state() {
        let belief = BeliefState::new(
            Pose::new(1.0, -2.0, 0.3),
            Covariance3::from_diagonal(0.5, 0.2, 0.1),
        );
        let z = Measurement::FullPose {
            values: Vector3::new(4.0, 5.0, -0.7),
            variances: Vector3::zeros(),
        };
        let out = kalman_update(&belief, &z).unwrap();
        assert_relative_eq!(out.mean.x, 4.0, epsilon = 1e-12);
        assert_relative_eq!(out.mean.y, 5.0, epsilon = 1e-12);
        assert_relative_eq!(out.mean.theta, -0.7, epsilon = 1e-12);
        for i in 0..3 {
            assert!(out.covariance.diagonal()[i].abs() < 1e-12);
        }
    }

    #[test]
    fn heading_update_scalar_gain() {
        // K = 1 / (1 + 1) = 0.5 by direct arithmetic.
        let belief = BeliefState::new(Pose::origin(), Covariance3::from_diagonal(1.0, 1.0, 1.0));
        let z = Measurement::Heading {
            value: 1.0,
            variance: 1.0,
        };
        let out = kalman_update(&belief, &z).unwrap();
        assert_relative_eq!(out.mean.theta, 0.5, epsilon = 1e-15);
        assert_relative_eq!(out.covariance.diagonal()[2], 0.5, epsilon = 1e-15);
        // Position untouched under a diagonal prior.
        assert_eq!(out.mean.x, 0.0);
        assert_eq!(out.mean.y, 0.0);
        assert_relative_eq!(out.covariance.diagonal()[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(out.covariance.diagonal()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn full_pose_gain_matches_generic_inverse_oracle() {
        // With P = p*I and R = r*I the gain collapses to (p / (p + r)) * I.
        // Cross-check the hand-rolled solve against nalgebra's generic
        // inverse on a non-trivial covariance as well.
        let p = 0.04;
        let r = 0.01;
        let belief = BeliefState::new(
            Pose::new(0.5, -0.5, 0.2),
            Covariance3::from_diagonal(p, p, p),
        );
        let z = Measurement::FullPose {
            values: Vector3::new(1.5, 0.5, 0.4),
            variances: Vector3::new(r, r, r),
        };
        let out = kalman_update(&belief, &z).unwrap();
        let gain = p / (p + r);
        assert_relative_eq!(out.mean.x, 0.5 + gain * 1.0, epsilon = 1e-12);
        assert_relative_eq!(out.mean.y, -0.5 + gain * 1.0, epsilon = 1e-12);
        assert_relative_eq!(out.mean.theta, 0.2 + gain * 0.2, epsilon = 1e-12);

        let p_mat = Matrix3::new(0.05, 0.01, 0.0, 0.01, 0.04, -0.005, 0.0, -0.005, 0.02);
        let r_diag = Vector3::new(0.01, 0.02, 0.03);
        let belief = BeliefState::new(Pose::new(0.1, 0.2, 0.3), Covariance3::from_matrix(p_mat));
        let z = Measurement::FullPose {
            values: Vector3::new(0.0, 0.0, 0.0),
            variances: r_diag,
        };
        let out = kalman_update(&belief, &z).unwrap();

        let s = p_mat + Matrix3::from_diagonal(&r_diag);
        let k_oracle = p_mat * s.try_inverse().expect("oracle inverse");
        let innovation = Vector3::new(-0.1, -0.2, -0.3);
        let mean_oracle = Vector3::new(0.1, 0.2, 0.3) + k_oracle * innovation;
        let p_oracle = p_mat - k_oracle * p_mat;
        assert_relative_eq!(out.mean.x, mean_oracle.x, epsilon = 1e-12);
        assert_relative_eq!(out.mean.y, mean_oracle.y, epsilon = 1e-12);
        assert_relative_eq!(out.mean.theta, mean_oracle.z, epsilon = 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let sym = 0.5 * (p_oracle[(i, j)] + p_oracle[(j, i)]);
                assert_relative_eq!(out.covariance.matrix()[(i, j)], sym, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_innovation_leaves_mean_unchanged() {
        let belief = BeliefState::new(
            Pose::new(2.0, 3.0, 0.4),
            Covariance3::from_diagonal(0.1, 0.1, 0.05),
        );
        let z = Measurement::Heading {
            value: 0.4,
            variance: 0.01,
        };
        let out = kalman_update(&belief, &z).unwrap();
        assert_eq!(out.mean, belief.mean);

        let z = Measurement::FullPose {
            values: belief.mean.to_vector(),
            variances: Vector3::new(0.01, 0.01, 0.01),
        };
        let out = kalman_update(&belief, &z).unwrap();
        assert_eq!(out.mean, belief.mean);
    }

    #[test]
    fn heading_innovation_uses_shortest_arc() {
        let belief = BeliefState::new(
            Pose::new(0.0, 0.0, PI - 0.05),
            Covariance3::from_diagonal(0.0, 0.0, 1.0),
        );
        // Measurement just past the wrap boundary; the raw difference is
        // close to -2*pi but the shortest arc is +0.1.
        let z = Measurement::Heading {
            value: wrap_angle(PI + 0.05),
            variance: 0.0,
        };
        let out = kalman_update(&belief, &z).unwrap();
        assert_relative_eq!(out.mean.theta, wrap_angle(PI + 0.05), epsilon = 1e-12);
    }

    #[test]
    fn singular_innovation_covariance_is_reported() {
        let belief = BeliefState::exact(Pose::origin());
        let z = Measurement::Heading {
            value: 0.1,
            variance: 0.0,
        };
        assert!(matches!(
            kalman_update(&belief, &z),
            Err(EstimationError::DegenerateUpdate { .. })
        ));
        let z = Measurement::FullPose {
            values: Vector3::zeros(),
            variances: Vector3::zeros(),
        };
        assert!(matches!(
            kalman_update(&belief, &z),
            Err(EstimationError::DegenerateUpdate { .. })
        ));
    }

    #[test]
    fn greedy_mode_selection_is_stateless() {
        assert_eq!(select_observation_mode(false), ObservationMode::HeadingOnly);
        assert_eq!(select_observation_mode(true), ObservationMode::FullPose);
        for i in 0..8 {
            let avail = i % 2 == 0;
            let mode = select_observation_mode(avail);
            assert_eq!(mode == ObservationMode::FullPose, avail);
        }
        assert_eq!(ObservationMode::HeadingOnly.measurement_dim(), 1);
        assert_eq!(ObservationMode::FullPose.measurement_dim(), 3);
    }

    #[test]
    fn full_update_bounds_covariance_by_measurement_noise() {
        // Collapse property: after a full-pose update every diagonal of P
        // is at most the matching diagonal of R.
        let belief = BeliefState::new(Pose::origin(), Covariance3::from_diagonal(3.0, 0.7, 12.0));
        let r = Vector3::new(4e-4, 4e-4, 4e-4);
        let z = Measurement::FullPose {
            values: Vector3::new(0.1, -0.1, 0.0),
            variances: r,
        };
        let out = kalman_update(&belief, &z).unwrap();
        for i in 0..3 {
            assert!(out.covariance.diagonal()[i] <= r[i] * (1.0 + 1e-12));
        }
    }
}
