//! Bundled arenas and a generator for randomized test arenas.

use crate::geometry::{Obstacle, Vec2};
use crate::world::{parse_world_str, unreachable_free_cells, World};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Content of the bundled obstacle-free arena file.
pub const SIMPLE_WORLD: &str = include_str!("../../../worlds/simple.world");
/// Content of the bundled obstacle-filled arena file.
pub const COMPLEX_WORLD: &str = include_str!("../../../worlds/complex.world");

/// The obstacle-free 10 x 10 m arena: box walls only, spawn at the
/// center, targets in the 1 m inset region.
pub fn simple_arena() -> World {
    parse_world_str(SIMPLE_WORLD, "simple.world").expect("bundled world must parse")
}

/// The obstacle-filled 10 x 10 m arena: box walls plus four cylinders and
/// a free-standing interior wall.
pub fn complex_arena() -> World {
    parse_world_str(COMPLEX_WORLD, "complex.world").expect("bundled world must parse")
}

/// Bounding circle used for obstacle spacing during generation.
fn bounding_circle(obs: &Obstacle) -> (Vec2, f64) {
    match *obs {
        Obstacle::Circle { center, radius } => (center, radius),
        Obstacle::Segment { a, b } => (
            Vec2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)),
            0.5 * a.distance(b),
        ),
    }
}

/// Generate a randomized arena with `n_obstacles` interior obstacles.
///
/// Obstacles keep at least 0.5 m of mutual clearance and 1 m of clearance
/// from the spawn; grid connectivity from the spawn is guaranteed by
/// rejection. The same seed always yields the same world.
pub fn random_arena(seed: u64, n_obstacles: usize) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: loop {
        let mut world = simple_arena();
        let mut interior: Vec<Obstacle> = Vec::with_capacity(n_obstacles);
        for _ in 0..n_obstacles {
            let mut placed = false;
            for _ in 0..200 {
                let obs = if rng.random::<bool>() {
                    let radius = rng.random_range(0.3..0.6);
                    let margin = 0.5 + radius;
                    Obstacle::Circle {
                        center: Vec2::new(
                            rng.random_range(-5.0 + margin..5.0 - margin),
                            rng.random_range(-5.0 + margin..5.0 - margin),
                        ),
                        radius,
                    }
                } else {
                    let half = rng.random_range(0.4..0.8);
                    let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
                    let margin = 0.5 + half;
                    let c = Vec2::new(
                        rng.random_range(-5.0 + margin..5.0 - margin),
                        rng.random_range(-5.0 + margin..5.0 - margin),
                    );
                    let d = Vec2::from_angle(angle).scale(half);
                    Obstacle::Segment {
                        a: c - d,
                        b: c + d,
                    }
                };
                let (c, r) = bounding_circle(&obs);
                let spawn_ok = c.distance(world.robot_spawn.position) >= 1.0 + r;
                let spaced = interior.iter().all(|other| {
                    let (oc, or) = bounding_circle(other);
                    c.distance(oc) >= r + or + 0.5
                });
                if spawn_ok && spaced {
                    interior.push(obs);
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'attempt;
            }
        }
        world.obstacles.extend(interior);
        if unreachable_free_cells(&world, 0.105) == 0 {
            return world;
        }
    }
}
