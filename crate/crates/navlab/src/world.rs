//! Arena definition: obstacles, bounds, spawn, target region, plus the
//! line-oriented world file format.
//!
//! ```text
//! # comment
//! BOUNDS xmin ymin xmax ymax
//! WALL x1 y1 x2 y2
//! CIRCLE cx cy r
//! SPAWN x y yaw
//! TARGET_REGION xmin ymin xmax ymax
//! ```
//!
//! `BOUNDS`, `SPAWN` and `TARGET_REGION` are required, each exactly once.
//! Unknown directives are errors.
//!
//! ```
//! use navlab::world::parse_world_str;
//!
//! let world = parse_world_str(
//!     "BOUNDS -5 -5 5 5\nWALL -5 -5 5 -5\nCIRCLE 1 2 0.5\nSPAWN 0 0 0\nTARGET_REGION -4 -4 4 4\n",
//!     "inline",
//! ).unwrap();
//! assert_eq!(world.obstacles.len(), 2);
//! ```

use crate::geometry::{self, Obstacle, Pose, Rect, Vec2};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

/// Default clearance required between a sampled target and any obstacle.
pub const DEFAULT_TARGET_CLEARANCE: f64 = 0.5;

/// A navigation arena.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub obstacles: Vec<Obstacle>,
    pub bounds: Rect,
    /// Current target position. Starts at the center of the target
    /// region; the environment replaces it on reset and respawn.
    pub target: Vec2,
    pub robot_spawn: Pose,
    pub target_spawn_region: Rect,
    pub min_target_clearance: f64,
}

impl World {
    /// Minimum distance from a point to any obstacle (infinite when the
    /// world has none). Circle distances are signed (negative inside).
    pub fn clearance(&self, p: Vec2) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("world is missing required directive {0}")]
    MissingDirective(&'static str),
    #[error("world failed validation: {0}")]
    Invalid(String),
    #[error("io error reading world: {0}")]
    Io(#[from] std::io::Error),
}

fn parse_floats(
    path: &str,
    line_no: usize,
    parts: &[&str],
    expected: usize,
) -> Result<Vec<f64>, WorldError> {
    if parts.len() != expected {
        return Err(WorldError::Parse {
            path: path.to_string(),
            line: line_no,
            message: format!("expected {expected} values, got {}", parts.len()),
        });
    }
    parts
        .iter()
        .map(|s| {
            s.parse::<f64>().map_err(|_| WorldError::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("not a number: {s:?}"),
            })
        })
        .collect()
}

/// Parse world file content. `path` is used only in error messages.
pub fn parse_world_str(content: &str, path: &str) -> Result<World, WorldError> {
    let mut bounds = None;
    let mut spawn = None;
    let mut region = None;
    let mut obstacles = Vec::new();

    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let directive = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        match directive {
            "BOUNDS" => {
                let v = parse_floats(path, line_no, &rest, 4)?;
                bounds = Some(Rect::new(v[0], v[1], v[2], v[3]));
            }
            "WALL" => {
                let v = parse_floats(path, line_no, &rest, 4)?;
                let a = Vec2::new(v[0], v[1]);
                let b = Vec2::new(v[2], v[3]);
                if a == b {
                    return Err(WorldError::Parse {
                        path: path.to_string(),
                        line: line_no,
                        message: "wall endpoints must be distinct".into(),
                    });
                }
                obstacles.push(Obstacle::Segment { a, b });
            }
            "CIRCLE" => {
                let v = parse_floats(path, line_no, &rest, 3)?;
                if v[2] <= 0.0 {
                    return Err(WorldError::Parse {
                        path: path.to_string(),
                        line: line_no,
                        message: "circle radius must be positive".into(),
                    });
                }
                obstacles.push(Obstacle::Circle {
                    center: Vec2::new(v[0], v[1]),
                    radius: v[2],
                });
            }
            "SPAWN" => {
                let v = parse_floats(path, line_no, &rest, 3)?;
                spawn = Some(Pose::new(v[0], v[1], v[2]));
            }
            "TARGET_REGION" => {
                let v = parse_floats(path, line_no, &rest, 4)?;
                region = Some(Rect::new(v[0], v[1], v[2], v[3]));
            }
            other => {
                return Err(WorldError::Parse {
                    path: path.to_string(),
                    line: line_no,
                    message: format!("unknown directive {other:?}"),
                });
            }
        }
    }

    let bounds = bounds.ok_or(WorldError::MissingDirective("BOUNDS"))?;
    let robot_spawn = spawn.ok_or(WorldError::MissingDirective("SPAWN"))?;
    let target_spawn_region = region.ok_or(WorldError::MissingDirective("TARGET_REGION"))?;

    Ok(World {
        obstacles,
        bounds,
        target: target_spawn_region.center(),
        robot_spawn,
        target_spawn_region,
        min_target_clearance: DEFAULT_TARGET_CLEARANCE,
    })
}

/// Parse a world file from disk.
pub fn parse_world(path: &Path) -> Result<World, WorldError> {
    let content = std::fs::read_to_string(path)?;
    parse_world_str(&content, &path.display().to_string())
}

/// Serialize a world back to the file format. `parse_world_str` of the
/// output reproduces an equal `World`.
pub fn serialize_world(world: &World) -> String {
    let mut out = String::new();
    let b = world.bounds;
    writeln!(out, "BOUNDS {} {} {} {}", b.min.x, b.min.y, b.max.x, b.max.y).unwrap();
    let s = world.robot_spawn;
    writeln!(out, "SPAWN {} {} {}", s.position.x, s.position.y, s.yaw).unwrap();
    let r = world.target_spawn_region;
    writeln!(
        out,
        "TARGET_REGION {} {} {} {}",
        r.min.x, r.min.y, r.max.x, r.max.y
    )
    .unwrap();
    for obs in &world.obstacles {
        match *obs {
            Obstacle::Segment { a, b } => {
                writeln!(out, "WALL {} {} {} {}", a.x, a.y, b.x, b.y).unwrap()
            }
            Obstacle::Circle { center, radius } => {
                writeln!(out, "CIRCLE {} {} {}", center.x, center.y, radius).unwrap()
            }
        }
    }
    out
}

/// Grid resolution for the connectivity check, in meters.
pub const CONNECTIVITY_CELL: f64 = 0.25;

/// Check that every free grid cell is reachable from the spawn cell.
///
/// A cell is free when its center keeps at least `clearance` distance
/// from every obstacle and lies inside the bounds. Two adjacent free
/// cells connect only when the segment between their centers is not cut
/// by an obstacle (thin walls can pass between cell centers otherwise).
/// Returns the number of unreachable free cells (0 means fully
/// connected).
pub fn unreachable_free_cells(world: &World, clearance: f64) -> usize {
    let nx = (world.bounds.width() / CONNECTIVITY_CELL).round() as usize;
    let ny = (world.bounds.height() / CONNECTIVITY_CELL).round() as usize;
    if nx == 0 || ny == 0 {
        return 0;
    }
    let center = |ix: usize, iy: usize| {
        Vec2::new(
            world.bounds.min.x + (ix as f64 + 0.5) * CONNECTIVITY_CELL,
            world.bounds.min.y + (iy as f64 + 0.5) * CONNECTIVITY_CELL,
        )
    };
    let free: Vec<bool> = (0..nx * ny)
        .map(|i| {
            let p = center(i % nx, i / nx);
            world.bounds.contains(p) && world.clearance(p) > clearance
        })
        .collect();
    let passable = |from: Vec2, to: Vec2| {
        let delta = to - from;
        let dist = delta.norm();
        geometry::ray_cast(from, delta.scale(1.0 / dist), &world.obstacles, dist + 1.0) >= dist
    };

    let spawn = world.robot_spawn.position;
    let sx = ((spawn.x - world.bounds.min.x) / CONNECTIVITY_CELL) as usize;
    let sy = ((spawn.y - world.bounds.min.y) / CONNECTIVITY_CELL) as usize;
    let start = sy.min(ny - 1) * nx + sx.min(nx - 1);

    let mut seen = vec![false; nx * ny];
    if free[start] {
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            let (ix, iy) = (i % nx, i / nx);
            let here = center(ix, iy);
            let mut push = |jx: usize, jy: usize| {
                let j = jy * nx + jx;
                if free[j] && !seen[j] && passable(here, center(jx, jy)) {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if ix > 0 {
                push(ix - 1, iy);
            }
            if ix + 1 < nx {
                push(ix + 1, iy);
            }
            if iy > 0 {
                push(ix, iy - 1);
            }
            if iy + 1 < ny {
                push(ix, iy + 1);
            }
        }
    }
    free.iter()
        .zip(&seen)
        .filter(|&(&f, &s)| f && !s)
        .count()
}

/// Validate a world: geometry containment, spawn clearance, target-region
/// sanity and grid connectivity. Returns the list of problems found.
pub fn check_world(world: &World, robot_radius: f64) -> Vec<String> {
    let mut problems = Vec::new();
    let b = &world.bounds;
    if b.width() <= 0.0 || b.height() <= 0.0 {
        problems.push("bounds have non-positive extent".into());
        return problems;
    }
    for (i, obs) in world.obstacles.iter().enumerate() {
        let inside = match *obs {
            Obstacle::Segment { a, b: bb } => b.contains(a) && b.contains(bb),
            Obstacle::Circle { center, radius } => {
                center.x - radius >= b.min.x
                    && center.x + radius <= b.max.x
                    && center.y - radius >= b.min.y
                    && center.y + radius <= b.max.y
            }
        };
        if !inside {
            problems.push(format!("obstacle {i} extends outside bounds"));
        }
    }
    let r = &world.target_spawn_region;
    if !(b.contains(r.min) && b.contains(r.max)) {
        problems.push("target region extends outside bounds".into());
    }
    if r.width() <= 0.0 || r.height() <= 0.0 {
        problems.push("target region has non-positive extent".into());
    }
    if !b.contains(world.robot_spawn.position) {
        problems.push("spawn lies outside bounds".into());
    }
    if geometry::collision(world.robot_spawn, robot_radius, &world.obstacles, b) {
        problems.push("robot spawn collides with an obstacle or wall".into());
    }
    let unreachable = unreachable_free_cells(world, robot_radius);
    if unreachable > 0 {
        problems.push(format!("{unreachable} free grid cells unreachable from spawn"));
    }
    problems
}
