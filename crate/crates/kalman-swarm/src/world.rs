//! The maze arena: wall geometry, ray casting for the rangefinder, and
//! ground-truth motion integration with stop-on-contact collisions.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::estimator::{wrap_angle, Pose};
use crate::kinematics::{diff_drive_delta, OdometryDelta, RobotGeometry, WheelCommand};

/// Robot body radius used for collision clearance, in meters.
pub const BODY_RADIUS: f64 = 0.2;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("ray origin ({0}, {1}) is outside the arena bounds")]
    OriginOutOfBounds(f64, f64),
    #[error("wall endpoint ({0}, {1}) is outside the arena bounds")]
    WallOutOfBounds(f64, f64),
    #[error("arena dimensions must be positive, got {0} x {1}")]
    InvalidBounds(f64, f64),
}

#[derive(Debug, Error)]
pub enum WorldFileError {
    #[error("world file is missing the leading `bounds W H` line")]
    MissingBounds,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Geometry(#[from] WorldError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Axis-aligned arena rectangle centered on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub width: f64,
    pub height: f64,
}

impl Bounds {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x.abs() <= 0.5 * self.width && y.abs() <= 0.5 * self.height
    }
}

/// Wall segment between two points, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl Wall {
    pub fn new(a: (f64, f64), b: (f64, f64)) -> Self {
        Self { a, b }
    }

    /// Distance from a point to this segment.
    pub fn distance_to(&self, p: (f64, f64)) -> f64 {
        let (ax, ay) = self.a;
        let (bx, by) = self.b;
        let (dx, dy) = (bx - ax, by - ay);
        let len_sq = dx * dx + dy * dy;
        let t = if len_sq == 0.0 {
            0.0
        } else {
            (((p.0 - ax) * dx + (p.1 - ay) * dy) / len_sq).clamp(0.0, 1.0)
        };
        let (cx, cy) = (ax + t * dx, ay + t * dy);
        ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
    }

    /// Minimum distance between two segments (zero when they touch).
    pub fn distance_to_wall(&self, other: &Wall) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        self.distance_to(other.a)
            .min(self.distance_to(other.b))
            .min(other.distance_to(self.a))
            .min(other.distance_to(self.b))
    }

    fn intersects(&self, other: &Wall) -> bool {
        fn orient(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> f64 {
            (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
        }
        let d1 = orient(self.a, self.b, other.a);
        let d2 = orient(self.a, self.b, other.b);
        let d3 = orient(other.a, other.b, self.a);
        let d4 = orient(other.a, other.b, self.b);
        d1 * d2 <= 0.0 && d3 * d4 <= 0.0
    }
}

/// Immutable arena geometry: the bounding rectangle (always walled) plus
/// interior wall segments.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldModel {
    bounds: Bounds,
    /// Boundary walls first (4 segments), then interior walls.
    walls: Vec<Wall>,
}

impl WorldModel {
    /// Build an arena of the given outer dimensions. The outer boundary is
    /// added automatically; `interior` lists additional wall segments as
    /// endpoint pairs.
    pub fn new(
        width: f64,
        height: f64,
        interior: Vec<((f64, f64), (f64, f64))>,
    ) -> Result<Self, WorldError> {
        if !(width > 0.0 && height > 0.0) {
            return Err(WorldError::InvalidBounds(width, height));
        }
        let bounds = Bounds { width, height };
        let (hw, hh) = (0.5 * width, 0.5 * height);
        let mut walls = vec![
            Wall::new((-hw, -hh), (hw, -hh)),
            Wall::new((hw, -hh), (hw, hh)),
            Wall::new((hw, hh), (-hw, hh)),
            Wall::new((-hw, hh), (-hw, -hh)),
        ];
        for (a, b) in interior {
            for &(x, y) in &[a, b] {
                if !bounds.contains(x, y) {
                    return Err(WorldError::WallOutOfBounds(x, y));
                }
            }
            walls.push(Wall::new(a, b));
        }
        Ok(Self { bounds, walls })
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    /// Interior walls only (everything after the 4 boundary segments).
    pub fn interior_walls(&self) -> &[Wall] {
        &self.walls[4..]
    }

    /// Minimum distance from a point to any wall.
    pub fn min_wall_distance(&self, p: (f64, f64)) -> f64 {
        self.walls
            .iter()
            .map(|w| w.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance to the nearest wall intersection along a ray, or `None` if
    /// nothing is hit within `max_range`. The origin must lie inside the
    /// arena.
    pub fn ray_cast(
        &self,
        origin: (f64, f64),
        angle: f64,
        max_range: f64,
    ) -> Result<Option<f64>, WorldError> {
        if !self.bounds.contains(origin.0, origin.1) {
            return Err(WorldError::OriginOutOfBounds(origin.0, origin.1));
        }
        let dir = (angle.cos(), angle.sin());
        let mut nearest: Option<f64> = None;
        for wall in &self.walls {
            if let Some(t) = ray_segment_intersection(origin, dir, wall) {
                if t <= max_range && nearest.is_none_or(|n| t < n) {
                    nearest = Some(t);
                }
            }
        }
        Ok(nearest)
    }
}

/// Parameter along the ray (= distance, the direction is unit length) of the
/// intersection with a segment, if any.
fn ray_segment_intersection(origin: (f64, f64), dir: (f64, f64), wall: &Wall) -> Option<f64> {
    let (ax, ay) = wall.a;
    let (sx, sy) = (wall.b.0 - ax, wall.b.1 - ay);
    let denom = dir.0 * sy - dir.1 * sx;
    if denom.abs() < 1e-15 {
        // Parallel (collinear grazing rays are treated as misses).
        return None;
    }
    let (px, py) = (ax - origin.0, ay - origin.1);
    let t = (px * sy - py * sx) / denom;
    let u = (px * dir.1 - py * dir.0) / denom;
    if t > 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Ground-truth kinematic state, playing the role of the simulation
/// supervisor: the estimator never reads it directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub pose: Pose,
    pub angular_velocity: f64,
    pub linear_velocity: f64,
}

impl GroundTruth {
    pub fn at_rest(pose: Pose) -> Self {
        Self {
            pose,
            angular_velocity: 0.0,
            linear_velocity: 0.0,
        }
    }
}

/// Integrate one physics step.
///
/// If the commanded motion would bring the body center within
/// [`BODY_RADIUS`] of a wall, the position holds while the heading still
/// integrates (slide-free stop). Returns the new state together with the
/// wheel increments the drive actually realized, which is what the encoders
/// measure.
pub fn step_ground_truth(
    world: &WorldModel,
    gt: &GroundTruth,
    cmd: WheelCommand,
    dt: f64,
    geom: &RobotGeometry,
) -> (GroundTruth, OdometryDelta) {
    assert!(dt > 0.0, "dt must be positive");
    let deltas = cmd.to_deltas(dt);
    let candidate = diff_drive_delta(gt.pose, deltas, geom);
    let dtheta = (deltas.right - deltas.left) / geom.axle_length;
    if world.min_wall_distance((candidate.x, candidate.y)) < BODY_RADIUS {
        // Blocked: the wheels only realize the rotational component.
        let half_arc = 0.5 * (deltas.right - deltas.left);
        let realized = OdometryDelta::new(-half_arc, half_arc);
        let pose = Pose::new(gt.pose.x, gt.pose.y, wrap_angle(gt.pose.theta + dtheta));
        (
            GroundTruth {
                pose,
                angular_velocity: dtheta / dt,
                linear_velocity: 0.0,
            },
            realized,
        )
    } else {
        let d = 0.5 * (deltas.left + deltas.right);
        (
            GroundTruth {
                pose: candidate,
                angular_velocity: dtheta / dt,
                linear_velocity: d / dt,
            },
            deltas,
        )
    }
}

/// The builtin 15 m x 15 m maze: outer boundary plus eight interior walls
/// forming corridors at least 1.2 m wide. Identical on every call.
pub fn default_maze() -> WorldModel {
    WorldModel::new(
        15.0,
        15.0,
        vec![
            ((-3.9, -5.9), (-3.9, 1.3)),
            ((3.9, -1.3), (3.9, 5.9)),
            ((-1.3, -3.9), (5.9, -3.9)),
            ((-5.9, 3.9), (1.3, 3.9)),
            ((0.7, -0.7), (0.7, 1.9)),
            ((0.7, 1.9), (-1.9, 1.9)),
            ((-7.5, -2.3), (-5.7, -2.3)),
            ((7.5, 2.3), (5.7, 2.3)),
        ],
    )
    .expect("builtin maze is valid")
}

/// Serialize a world to the text format: a `bounds W H` line followed by one
/// interior wall per line as `x1 y1 x2 y2`. The outer boundary is implied by
/// the bounds and never listed.
pub fn world_file_contents(world: &WorldModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# arena walls; the outer boundary is implied by the bounds"
    );
    let _ = writeln!(out, "bounds {} {}", world.bounds.width, world.bounds.height);
    for wall in world.interior_walls() {
        let _ = writeln!(out, "{} {} {} {}", wall.a.0, wall.a.1, wall.b.0, wall.b.1);
    }
    out
}

pub fn parse_world_file(text: &str) -> Result<WorldModel, WorldFileError> {
    let mut bounds: Option<(f64, f64)> = None;
    let mut interior = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if bounds.is_none() {
            if fields.len() != 3 || fields[0] != "bounds" {
                return Err(WorldFileError::MissingBounds);
            }
            let w = parse_float(fields[1], idx)?;
            let h = parse_float(fields[2], idx)?;
            bounds = Some((w, h));
            continue;
        }
        if fields.len() != 4 {
            return Err(WorldFileError::Malformed {
                line: idx + 1,
                message: format!("expected `x1 y1 x2 y2`, got {} fields", fields.len()),
            });
        }
        let v: Result<Vec<f64>, _> = fields.iter().map(|f| parse_float(f, idx)).collect();
        let v = v?;
        interior.push(((v[0], v[1]), (v[2], v[3])));
    }
    let (w, h) = bounds.ok_or(WorldFileError::MissingBounds)?;
    Ok(WorldModel::new(w, h, interior)?)
}

pub fn load_world_file(path: &Path) -> Result<WorldModel, WorldFileError> {
    parse_world_file(&std::fs::read_to_string(path)?)
}

fn parse_float(field: &str, line_idx: usize) -> Result<f64, WorldFileError> {
    field.parse().map_err(|_| WorldFileError::Malformed {
        line: line_idx + 1,
        message: format!("invalid number `{field}`"),
    })
}
