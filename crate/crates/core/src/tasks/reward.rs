//! Reward formulas as pure functions of logged state.

use serde::{Deserialize, Serialize};

use crate::math::{yaw_forward, DVec3};

/// Helper term coefficients.
pub const KICK_HELPER: f64 = 0.01;
pub const NAV_FORWARD: f64 = 0.05;
pub const NAV_LATERAL: f64 = 0.03;
pub const GRAB_PENALTY: f64 = 0.004;

/// Below this horizontal speed the kick helper is zero.
pub const MIN_SPEED: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub sparse: f64,
    pub helper: f64,
    pub penalty: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.sparse + self.helper + self.penalty
    }

    pub fn is_finite(&self) -> bool {
        self.sparse.is_finite() && self.helper.is_finite() && self.penalty.is_finite()
    }
}

/// Root state an agent ends a control step in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: DVec3,
    pub yaw: f64,
    /// Horizontal root velocity over the step.
    pub velocity: DVec3,
}

impl AgentState {
    pub fn forward(&self) -> DVec3 {
        yaw_forward(self.yaw)
    }

    pub fn left(&self) -> DVec3 {
        DVec3::Y.cross(self.forward())
    }
}

/// What a reached-object event meant for the agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reach {
    Target,
    Wrong,
}

/// Everything a reward depends on for one agent and one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum RewardInput {
    Kick {
        agent: AgentState,
        ball: DVec3,
        kicked: bool,
    },
    Nav {
        agent: AgentState,
        target: DVec3,
        visible: bool,
        reached: Option<Reach>,
    },
    Grab {
        hands: [DVec3; 2],
        object: DVec3,
        object_prev_y: f64,
        prev_distance: f64,
        action: Vec<f64>,
    },
    MultiNav {
        agent: AgentState,
        object: DVec3,
        visible: bool,
        reached_now: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub hold_radius: f64,
    pub helper_rewards: bool,
}

pub fn evaluate(input: &RewardInput, params: &RewardParams) -> RewardBreakdown {
    let mut r = match input {
        RewardInput::Kick { agent, ball, kicked } => kick_the_ball_reward(agent, *ball, *kicked),
        RewardInput::Nav {
            agent,
            target,
            visible,
            reached,
        } => object_nav_reward(agent, *target, *visible, *reached),
        RewardInput::Grab {
            hands,
            object,
            object_prev_y,
            prev_distance,
            action,
        } => grab_object_reward(
            *hands,
            *object,
            *object_prev_y,
            *prev_distance,
            action,
            params.hold_radius,
        ),
        RewardInput::MultiNav {
            agent,
            object,
            visible,
            reached_now,
        } => RewardBreakdown {
            sparse: if *reached_now { 1.0 } else { 0.0 },
            helper: nav_helper(agent, *object, *visible),
            penalty: 0.0,
        },
    };
    if !params.helper_rewards {
        r.helper = 0.0;
    }
    r
}

/// Cosine of the angle between horizontal velocity and the horizontal
/// agent-to-ball offset, scaled by the helper coefficient.
pub fn kick_helper(agent: &AgentState, ball: DVec3) -> f64 {
    let v = DVec3::new(agent.velocity.x, 0.0, agent.velocity.z);
    let d = ball - agent.position;
    let d = DVec3::new(d.x, 0.0, d.z);
    let (sv, sd) = (v.length(), d.length());
    if sv < MIN_SPEED || sd == 0.0 {
        return 0.0;
    }
    KICK_HELPER * (v.dot(d) / (sv * sd))
}

pub fn kick_the_ball_reward(agent: &AgentState, ball: DVec3, kicked: bool) -> RewardBreakdown {
    RewardBreakdown {
        sparse: if kicked { 1.0 } else { 0.0 },
        helper: kick_helper(agent, ball),
        penalty: 0.0,
    }
}

/// `Vis * (0.05 a_f + 0.03 a_l L)` with `L = +1` when the target lies on
/// the agent's left.
pub fn nav_helper(agent: &AgentState, target: DVec3, visible: bool) -> f64 {
    if !visible {
        return 0.0;
    }
    let a_f = agent.velocity.dot(agent.forward());
    let a_l = agent.velocity.dot(agent.left());
    let side = if (target - agent.position).dot(agent.left()) > 0.0 {
        1.0
    } else {
        -1.0
    };
    NAV_FORWARD * a_f + NAV_LATERAL * a_l * side
}

pub fn object_nav_reward(agent: &AgentState, target: DVec3, visible: bool, reached: Option<Reach>) -> RewardBreakdown {
    RewardBreakdown {
        sparse: match reached {
            Some(Reach::Target) => 1.0,
            Some(Reach::Wrong) => -1.0,
            None => 0.0,
        },
        helper: nav_helper(agent, target, visible),
        penalty: 0.0,
    }
}

/// Summed hand-to-object distance.
pub fn hand_distance(hands: [DVec3; 2], object: DVec3) -> f64 {
    hands[0].distance(object) + hands[1].distance(object)
}

pub fn grab_object_reward(
    hands: [DVec3; 2],
    object: DVec3,
    object_prev_y: f64,
    prev_distance: f64,
    action: &[f64],
    hold_radius: f64,
) -> RewardBreakdown {
    let held = hands.iter().all(|h| h.distance(object) < hold_radius);
    let norm2: f64 = action.iter().map(|a| a * a).sum();
    RewardBreakdown {
        sparse: if held { object.y - object_prev_y } else { 0.0 },
        helper: prev_distance - hand_distance(hands, object),
        penalty: -GRAB_PENALTY * norm2,
    }
}
