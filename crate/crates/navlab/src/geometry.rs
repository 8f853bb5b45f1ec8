//! Exact 2D geometry: poses, unicycle kinematics, ray-obstacle
//! intersection and disc collision tests.
//!
//! Everything here is a pure function on immutable inputs and is safe to
//! call concurrently.
//!
//! ```
//! use navlab::geometry::{step_kinematics, Pose};
//! use std::f64::consts::FRAC_PI_2;
//!
//! // A quarter circle of radius v/w = 1: the exact arc lands at (1, 1).
//! let pose = step_kinematics(Pose::new(0.0, 0.0, 0.0), 1.0, 1.0, FRAC_PI_2);
//! assert!((pose.position.x - 1.0).abs() < 1e-12);
//! assert!((pose.position.y - 1.0).abs() < 1e-12);
//! assert!((pose.yaw - FRAC_PI_2).abs() < 1e-12);
//! ```

use std::f64::consts::PI;

/// A 2D point or vector, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x + other.x, self.y + other.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x - other.x, self.y - other.y)
    }
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// 2D cross product (z-component of the 3D cross).
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector at the given angle from the +x axis.
    pub fn from_angle(angle: f64) -> Vec2 {
        Vec2::new(angle.cos(), angle.sin())
    }
}

/// Robot pose: position plus yaw, with yaw kept in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec2,
    pub yaw: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            position: Vec2::new(x, y),
            yaw: normalize_angle(yaw),
        }
    }
}

/// Normalize an angle to the half-open interval (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = a % two_pi;
    if r <= -PI {
        r += two_pi;
    } else if r > PI {
        r -= two_pi;
    }
    r
}

/// Axis-aligned rectangle, used for arena bounds and spawn regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            min: Vec2::new(x_min, y_min),
            max: Vec2::new(x_max, y_max),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }
}

/// A static obstacle: a thin wall segment or a solid disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obstacle {
    Segment { a: Vec2, b: Vec2 },
    Circle { center: Vec2, radius: f64 },
}

impl Obstacle {
    /// Distance from a point to the obstacle surface.
    ///
    /// For circles this is signed: negative when the point is inside the
    /// disc. For segments it is the unsigned distance to the closest point.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        match *self {
            Obstacle::Segment { a, b } => point_segment_distance(p, a, b),
            Obstacle::Circle { center, radius } => p.distance(center) - radius,
        }
    }
}

/// Distance from point `p` to the closest point on segment `ab`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b - a;
    let len_sq = e.dot(e);
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let u = ((p - a).dot(e) / len_sq).clamp(0.0, 1.0);
    p.distance(a + e.scale(u))
}

/// Intersection parameter t >= 0 of ray `origin + t*dir` with segment `ab`,
/// or `None` if they do not meet.
pub fn ray_segment_intersection(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let f = a - origin;
    let denom = dir.cross(e);
    if denom.abs() < 1e-12 {
        // Parallel. Collinear rays can still graze the segment end-on.
        if f.cross(dir).abs() < 1e-12 {
            let ta = (a - origin).dot(dir);
            let tb = (b - origin).dot(dir);
            let t = ta.min(tb).max(0.0);
            if t <= ta.max(tb) {
                return Some(t);
            }
        }
        return None;
    }
    let t = f.cross(e) / denom;
    let s = f.cross(dir) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&s) {
        Some(t)
    } else {
        None
    }
}

/// Intersection parameter t >= 0 of a unit-direction ray with a circle.
///
/// An origin strictly inside the disc reports t = 0. Tangent grazes
/// resolve to the nearer root.
pub fn ray_circle_intersection(origin: Vec2, dir: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let f = origin - center;
    let c = f.dot(f) - radius * radius;
    if c < 0.0 {
        return Some(0.0);
    }
    let b = f.dot(dir);
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let t1 = -b - sqrt_disc;
    if t1 >= 0.0 {
        return Some(t1);
    }
    let t2 = -b + sqrt_disc;
    if t2 >= 0.0 {
        return Some(t2);
    }
    None
}

/// Cast a ray through the world and return the distance to the nearest
/// obstacle, or `max_range` when nothing is hit within range.
///
/// `dir` must have unit norm.
pub fn ray_cast(origin: Vec2, dir: Vec2, obstacles: &[Obstacle], max_range: f64) -> f64 {
    let mut nearest = f64::INFINITY;
    for obs in obstacles {
        let hit = match *obs {
            Obstacle::Segment { a, b } => ray_segment_intersection(origin, dir, a, b),
            Obstacle::Circle { center, radius } => {
                ray_circle_intersection(origin, dir, center, radius)
            }
        };
        if let Some(t) = hit {
            if t < nearest {
                nearest = t;
            }
        }
    }
    if nearest <= max_range {
        nearest
    } else {
        max_range
    }
}

/// Below this angular rate the arc update degenerates to a straight line.
pub const OMEGA_SINGULARITY: f64 = 1e-9;

/// Advance a unicycle pose by exact arc integration over `dt` seconds.
///
/// For |omega| below [`OMEGA_SINGULARITY`] the straight-line limit is used;
/// otherwise the pose follows a circular arc of radius v/omega. The
/// resulting yaw is re-normalized to (-pi, pi].
pub fn step_kinematics(pose: Pose, linear: f64, angular: f64, dt: f64) -> Pose {
    let (x, y, yaw) = (pose.position.x, pose.position.y, pose.yaw);
    if angular.abs() < OMEGA_SINGULARITY {
        Pose::new(
            x + linear * yaw.cos() * dt,
            y + linear * yaw.sin() * dt,
            yaw,
        )
    } else {
        let new_yaw = yaw + angular * dt;
        let k = linear / angular;
        Pose::new(
            x + k * (new_yaw.sin() - yaw.sin()),
            y + k * (yaw.cos() - new_yaw.cos()),
            new_yaw,
        )
    }
}

/// True when a robot disc of the given radius touches any obstacle or
/// pokes outside the bounds rectangle.
pub fn collision(pose: Pose, robot_radius: f64, obstacles: &[Obstacle], bounds: &Rect) -> bool {
    let p = pose.position;
    if p.x - robot_radius < bounds.min.x
        || p.x + robot_radius > bounds.max.x
        || p.y - robot_radius < bounds.min.y
        || p.y + robot_radius > bounds.max.y
    {
        return true;
    }
    obstacles.iter().any(|obs| match *obs {
        Obstacle::Segment { a, b } => point_segment_distance(p, a, b) < robot_radius,
        Obstacle::Circle { center, radius } => p.distance(center) < robot_radius + radius,
    })
}

/// Distance and heading deviation from a pose to a target point.
///
/// The heading deviation is `atan2(ty - y, tx - x) - yaw` normalized to
/// (-pi, pi]. A target coincident with the position reports (0, 0).
pub fn polar_to_target(pose: Pose, target: Vec2) -> (f64, f64) {
    let d = target - pose.position;
    let distance = d.norm();
    if distance == 0.0 {
        return (0.0, 0.0);
    }
    let bearing = d.y.atan2(d.x);
    (distance, normalize_angle(bearing - pose.yaw))
}

/// Absolute world-frame bearing from a position to a target.
pub fn bearing_to(position: Vec2, target: Vec2) -> f64 {
    let d = target - position;
    if d.x == 0.0 && d.y == 0.0 {
        return 0.0;
    }
    d.y.atan2(d.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn box_walls(half: f64) -> Vec<Obstacle> {
        let (a, b, c, d) = (
            Vec2::new(-half, -half),
            Vec2::new(half, -half),
            Vec2::new(half, half),
            Vec2::new(-half, half),
        );
        vec![
            Obstacle::Segment { a, b },
            Obstacle::Segment { a: b, b: c },
            Obstacle::Segment { a: c, b: d },
            Obstacle::Segment { a: d, b: a },
        ]
    }

    #[test]
    fn normalize_angle_half_open_interval() {
        assert_relative_eq!(normalize_angle(PI), PI);
        assert_relative_eq!(normalize_angle(-PI), PI);
        assert_relative_eq!(normalize_angle(3.0 * PI), PI);
        assert_relative_eq!(normalize_angle(0.0), 0.0);
        assert_relative_eq!(normalize_angle(2.0 * PI + 0.25), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn ray_misses_wall_beyond_range() {
        let walls = box_walls(5.0);
        let d = ray_cast(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), &walls, 3.5);
        assert_eq!(d, 3.5);
    }

    #[test]
    fn ray_hits_circle_front() {
        let obs = [Obstacle::Circle {
            center: Vec2::new(2.0, 0.0),
            radius: 0.5,
        }];
        let d = ray_cast(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), &obs, 3.5);
        assert_relative_eq!(d, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn ray_inside_circle_reports_zero() {
        let obs = [Obstacle::Circle {
            center: Vec2::new(0.0, 0.0),
            radius: 1.0,
        }];
        let d = ray_cast(Vec2::new(0.1, 0.0), Vec2::new(1.0, 0.0), &obs, 3.5);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn ray_hits_wall_within_range() {
        let walls = box_walls(5.0);
        let d = ray_cast(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), &walls, 10.0);
        assert_relative_eq!(d, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn ray_cast_monotone_in_max_range() {
        let obs = [Obstacle::Circle {
            center: Vec2::new(2.0, 0.0),
            radius: 0.5,
        }];
        let origin = Vec2::new(0.0, 0.0);
        let dir = Vec2::from_angle(0.3);
        let short = ray_cast(origin, dir, &obs, 1.0);
        let long = ray_cast(origin, dir, &obs, 4.0);
        assert!(long >= short);
        // Both hit: identical.
        let d1 = ray_cast(origin, Vec2::new(1.0, 0.0), &obs, 2.0);
        let d2 = ray_cast(origin, Vec2::new(1.0, 0.0), &obs, 4.0);
        assert_eq!(d1, d2);
    }

    #[test]
    fn kinematics_straight_line() {
        let p = step_kinematics(Pose::new(0.0, 0.0, 0.0), 1.0, 0.0, 0.1);
        assert_relative_eq!(p.position.x, 0.1, epsilon = 1e-15);
        assert_relative_eq!(p.position.y, 0.0);
        assert_relative_eq!(p.yaw, 0.0);
    }

    #[test]
    fn kinematics_pure_rotation() {
        let p = step_kinematics(Pose::new(0.0, 0.0, 0.0), 0.0, 1.0, PI);
        assert_relative_eq!(p.position.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.position.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.yaw, normalize_angle(PI));
    }

    #[test]
    fn kinematics_quarter_circle_arc() {
        let p = step_kinematics(Pose::new(0.0, 0.0, 0.0), 1.0, 1.0, FRAC_PI_2);
        assert_relative_eq!(p.position.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.position.y, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.yaw, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn kinematics_continuous_at_omega_singularity() {
        for &omega in &[1e-8, -1e-8] {
            let arc = step_kinematics(Pose::new(0.3, -0.2, 0.7), 0.25, omega, 0.1);
            let line = step_kinematics(Pose::new(0.3, -0.2, 0.7), 0.25, 0.0, 0.1);
            assert!(arc.position.distance(line.position) < 1e-6);
        }
    }

    #[test]
    fn collision_clear_center() {
        let walls = box_walls(5.0);
        let bounds = Rect::new(-5.0, -5.0, 5.0, 5.0);
        assert!(!collision(Pose::new(0.0, 0.0, 0.0), 0.105, &walls, &bounds));
    }

    #[test]
    fn collision_near_wall() {
        let walls = box_walls(5.0);
        let bounds = Rect::new(-5.0, -5.0, 5.0, 5.0);
        // 0.05 m from the x = 5 wall, radius 0.105.
        assert!(collision(Pose::new(4.95, 0.0, 0.0), 0.105, &walls, &bounds));
    }

    #[test]
    fn collision_symmetric_under_reflection() {
        let obs = [Obstacle::Circle {
            center: Vec2::new(1.0, 2.0),
            radius: 0.5,
        }];
        let mirrored = [Obstacle::Circle {
            center: Vec2::new(-1.0, 2.0),
            radius: 0.5,
        }];
        let bounds = Rect::new(-5.0, -5.0, 5.0, 5.0);
        for i in 0..100 {
            let x = -4.0 + 8.0 * (i as f64) / 99.0;
            let p = Pose::new(x, 1.7, 0.0);
            let q = Pose::new(-x, 1.7, 0.0);
            assert_eq!(
                collision(p, 0.105, &obs, &bounds),
                collision(q, 0.105, &mirrored, &bounds)
            );
        }
    }

    #[test]
    fn polar_straight_ahead() {
        let (d, hd) = polar_to_target(Pose::new(0.0, 0.0, 0.0), Vec2::new(1.0, 0.0));
        assert_relative_eq!(d, 1.0);
        assert_relative_eq!(hd, 0.0);
    }

    #[test]
    fn polar_to_the_left() {
        let (d, hd) = polar_to_target(Pose::new(0.0, 0.0, 0.0), Vec2::new(0.0, 2.0));
        assert_relative_eq!(d, 2.0);
        assert_relative_eq!(hd, FRAC_PI_2);
    }

    #[test]
    fn polar_directly_behind_normalizes_to_pi() {
        let (d, hd) = polar_to_target(Pose::new(0.0, 0.0, PI), Vec2::new(1.0, 0.0));
        assert_relative_eq!(d, 1.0);
        assert_relative_eq!(hd, PI);
    }

    #[test]
    fn polar_coincident_target() {
        let (d, hd) = polar_to_target(Pose::new(1.0, 1.0, 0.4), Vec2::new(1.0, 1.0));
        assert_eq!(d, 0.0);
        assert_eq!(hd, 0.0);
    }

    #[test]
    fn polar_invariant_under_translation() {
        let shift = Vec2::new(17.0, -42.0);
        for i in 0..50 {
            let ang = i as f64 * 0.13;
            let pose = Pose::new(0.3 * i as f64, -0.1 * i as f64, ang);
            let target = Vec2::new(1.0 + 0.2 * i as f64, 2.0);
            let (_, hd) = polar_to_target(pose, target);
            let moved = Pose::new(
                pose.position.x + shift.x,
                pose.position.y + shift.y,
                pose.yaw,
            );
            let (_, hd2) = polar_to_target(moved, target + shift);
            assert_relative_eq!(hd, hd2, epsilon = 1e-12);
        }
    }
}
