//! Hand-written baseline policies for the kick task.

use crate::env::{Action, Sim, MAX_TURN_SPEED, MAX_WALK_SPEED};
use crate::math::DVec3;
use crate::physics::BodyId;
use crate::sim::RngStream;

/// Preferred horizontal stand-off from the ball when kicking.
pub const KICK_STANDOFF: f64 = 1.0;

/// Turns toward the ball, closes to kicking range and kicks.
pub fn go_to_ball(sim: &Sim, agent: usize, ball: BodyId, dt_control: f64) -> Action {
    let a = &sim.agents[agent];
    let Ok(b) = sim.world.body(ball) else {
        return Action::Noop;
    };
    let d = b.position - a.position;
    let d = DVec3::new(d.x, 0.0, d.z);
    let angle = d.dot(a.left()).atan2(d.dot(a.forward()));
    let turn = (angle / dt_control).clamp(-MAX_TURN_SPEED, MAX_TURN_SPEED);
    let dist = d.length();
    let walk = if angle.abs() > 0.6 {
        0.0
    } else {
        ((dist - KICK_STANDOFF) / dt_control).clamp(-MAX_WALK_SPEED, MAX_WALK_SPEED)
    };
    Action::Primitive {
        walk,
        turn,
        kick: angle.abs() < 0.5 && dist < KICK_STANDOFF + 0.4,
        grab: false,
        release: false,
    }
}

/// Uniform random primitive action; kick with probability one half.
pub fn random_primitive(rng: &mut RngStream) -> Action {
    Action::Primitive {
        walk: rng.uniform(-MAX_WALK_SPEED, MAX_WALK_SPEED),
        turn: rng.uniform(-MAX_TURN_SPEED, MAX_TURN_SPEED),
        kick: rng.chance(0.5),
        grab: false,
        release: false,
    }
}
