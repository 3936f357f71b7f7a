//! The four task definitions: placements at reset, per-step events and the
//! reward inputs they produce.

mod reward;
pub mod scripted;

use serde::{Deserialize, Serialize};

pub use reward::{
    evaluate, grab_object_reward, hand_distance, kick_helper, kick_the_ball_reward, nav_helper, object_nav_reward,
    AgentState, Reach, RewardBreakdown, RewardInput, RewardParams, GRAB_PENALTY, KICK_HELPER, MIN_SPEED, NAV_FORWARD,
    NAV_LATERAL,
};

use crate::audio::tone;
use crate::env::scene::{free_spot, horizontal_distance, SceneFile};
use crate::env::{Event, Sim};
use crate::error::{Error, Result};
use crate::humanoid::ActionMode;
use crate::math::DVec3;
use crate::physics::{BodyId, RigidBody, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    KickTheBall,
    ObjectNav,
    GrabObject,
    MultiAgentNav,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::KickTheBall,
        TaskKind::ObjectNav,
        TaskKind::GrabObject,
        TaskKind::MultiAgentNav,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::KickTheBall => "kick_the_ball",
            TaskKind::ObjectNav => "object_nav",
            TaskKind::GrabObject => "grab_object",
            TaskKind::MultiAgentNav => "multi_agent_nav",
        }
    }

    pub fn default_playground(self) -> &'static str {
        match self {
            TaskKind::KickTheBall | TaskKind::GrabObject => "SimpleEnv",
            TaskKind::ObjectNav => "SingleRoomEnv",
            TaskKind::MultiAgentNav => "HouseEnv",
        }
    }

    pub fn default_agents(self) -> u32 {
        match self {
            TaskKind::MultiAgentNav => 4,
            _ => 1,
        }
    }

    pub fn default_max_steps(self) -> u32 {
        match self {
            TaskKind::KickTheBall | TaskKind::ObjectNav => 500,
            TaskKind::GrabObject => 250,
            TaskKind::MultiAgentNav => 1000,
        }
    }

    pub fn action_mode(self) -> ActionMode {
        match self {
            TaskKind::GrabObject => ActionMode::Torque,
            _ => ActionMode::Animation,
        }
    }

    /// Rejects playgrounds and agent counts the task cannot be laid out in.
    pub fn check_compatible(self, scene: &SceneFile, agents: u32) -> Result<()> {
        let rooms = scene.room_count();
        let ok = match self {
            TaskKind::KickTheBall | TaskKind::ObjectNav => rooms >= 1,
            TaskKind::GrabObject => rooms >= 1 && agents == 1,
            TaskKind::MultiAgentNav => rooms >= agents as usize,
        };
        if ok && agents >= 1 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "task {} cannot run {agents} agent(s) in {} ({rooms} rooms)",
                self.name(),
                scene.name
            )))
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<TaskKind> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::NotFound(format!("task {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskParams {
    pub reach_radius: f64,
    pub hold_radius: f64,
    pub helper_rewards: bool,
    pub buzz_hz: f64,
    pub buzz_amplitude: f64,
    pub ball_speed: f64,
    pub ball_radius: f64,
    pub ball_mass: f64,
    pub ball_damping: f64,
    pub nav_objects: usize,
    pub max_steps: Option<u32>,
}

impl Default for TaskParams {
    fn default() -> Self {
        Self {
            reach_radius: 0.5,
            hold_radius: 0.15,
            helper_rewards: true,
            buzz_hz: 440.0,
            buzz_amplitude: 0.2,
            ball_speed: 1.5,
            ball_radius: 0.11,
            ball_mass: 0.45,
            ball_damping: 0.3,
            nav_objects: 3,
            max_steps: None,
        }
    }
}

impl TaskParams {
    pub fn reward_params(&self) -> RewardParams {
        RewardParams {
            hold_radius: self.hold_radius,
            helper_rewards: self.helper_rewards,
        }
    }
}

/// Colours and shapes of the navigation goals, in assignment order.
const NAV_GOALS: [(&str, [f64; 3]); 4] = [
    ("red_ball", [0.9, 0.1, 0.1]),
    ("green_cube", [0.1, 0.8, 0.2]),
    ("blue_cylinder", [0.15, 0.3, 0.9]),
    ("yellow_ball", [0.95, 0.85, 0.1]),
];

fn goal_shape(i: usize) -> (Shape, f64) {
    match i % 3 {
        0 => (Shape::Sphere { radius: 0.2 }, 0.2),
        1 => (
            Shape::Box {
                half_extents: DVec3::splat(0.18),
            },
            0.18,
        ),
        _ => (
            Shape::Capsule {
                radius: 0.15,
                half_height: 0.15,
            },
            0.3,
        ),
    }
}

/// Per-episode task state.
#[derive(Clone, Debug, PartialEq)]
pub enum TaskState {
    KickTheBall {
        ball: BodyId,
        buzz: u64,
    },
    ObjectNav {
        objects: Vec<BodyId>,
        target: usize,
    },
    GrabObject {
        object: BodyId,
        prev_distance: f64,
        prev_y: f64,
    },
    MultiAgentNav {
        object: BodyId,
        room: String,
        reached: Vec<bool>,
    },
}

/// Facts about the control step just simulated.
pub struct StepFacts<'a> {
    pub before: &'a [DVec3],
    pub events: &'a [Event],
    pub actions: &'a [Vec<f64>],
    pub dt_control: f64,
}

impl TaskState {
    /// Spawns the task's agents and objects into a freshly built scene.
    pub fn setup(kind: TaskKind, params: &TaskParams, sim: &mut Sim, agents: u32) -> Result<TaskState> {
        let scene = sim.scene.clone();
        let mut occupied = scene.footprints();
        match kind {
            TaskKind::KickTheBall => {
                let room = scene.rooms().next().expect("checked at construction");
                let region = scene.spawn_region(room);
                for _ in 0..agents {
                    let p = free_spot(&mut sim.rng, &region, 0.4, &occupied)?;
                    let yaw = sim.rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
                    sim.spawn_agent(p, yaw)?;
                    occupied.push((p, 0.4));
                }
                let ball = sim.world.spawn(
                    RigidBody::dynamic("ball", params.ball_mass, DVec3::Y * params.ball_radius)
                        .with_color([0.95, 0.45, 0.1])
                        .with_damping(params.ball_damping),
                    Shape::Sphere {
                        radius: params.ball_radius,
                    },
                )?;
                let clip = tone(params.buzz_hz, params.buzz_amplitude, sim.audio_fs(), 1.0);
                let buzz = sim.add_source(DVec3::ZERO, clip, 1.0, true, Some(ball));
                let state = TaskState::KickTheBall { ball, buzz };
                state.respawn_ball(params, sim)?;
                Ok(state)
            }
            TaskKind::ObjectNav => {
                let room = scene.rooms().next().expect("checked at construction");
                let region = scene.spawn_region(room);
                let mut objects = Vec::new();
                for i in 0..params.nav_objects.max(1) {
                    let (shape, half_height) = goal_shape(i);
                    let r = shape.bounding_radius();
                    let p = free_spot(&mut sim.rng, &region, r + 0.3, &occupied)?;
                    occupied.push((p, r + 0.3));
                    let (name, color) = NAV_GOALS[i % NAV_GOALS.len()];
                    objects.push(sim.world.spawn(
                        RigidBody::fixed(name, p + DVec3::Y * half_height).with_color(color),
                        shape,
                    )?);
                }
                let target = sim.rng.index(objects.len());
                for _ in 0..agents {
                    let p = free_spot(&mut sim.rng, &region, 0.4 + params.reach_radius, &occupied)?;
                    let yaw = sim.rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
                    sim.spawn_agent(p, yaw)?;
                    occupied.push((p, 0.4));
                }
                Ok(TaskState::ObjectNav { objects, target })
            }
            TaskKind::GrabObject => {
                let room = scene.rooms().next().expect("checked at construction");
                let region = scene.spawn_region(room);
                let p = free_spot(&mut sim.rng, &region, 0.6, &occupied)?;
                let yaw = sim.rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
                let i = sim.spawn_agent(p, yaw)?;
                let fwd = sim.agents[i].forward();
                let left = sim.agents[i].left();
                let ahead = 0.3 + sim.rng.uniform(-0.03, 0.03);
                let side = sim.rng.uniform(-0.05, 0.05);
                let base = p + fwd * ahead + left * side;
                sim.world.spawn(
                    RigidBody::fixed("pedestal", base + DVec3::Y * 0.2)
                        .with_color([0.5, 0.5, 0.55])
                        .with_orientation(sim.agents[i].root_pose().rotation),
                    Shape::Box {
                        half_extents: DVec3::new(0.12, 0.2, 0.12),
                    },
                )?;
                let object = sim.world.spawn(
                    RigidBody::dynamic("block", 0.2, base + DVec3::Y * 0.44)
                        .with_color([0.2, 0.7, 0.9])
                        .with_orientation(sim.agents[i].root_pose().rotation),
                    Shape::Box {
                        half_extents: DVec3::splat(0.04),
                    },
                )?;
                let o = sim.world.body(object)?.position;
                sim.agents[i].look_toward_point(o);
                let hands = sim.hand_positions(i);
                Ok(TaskState::GrabObject {
                    object,
                    prev_distance: hand_distance(hands, o),
                    prev_y: o.y,
                })
            }
            TaskKind::MultiAgentNav => {
                let rooms: Vec<_> = scene.rooms().cloned().collect();
                let target_room = rooms[sim.rng.index(rooms.len())].clone();
                let region = scene.spawn_region(&target_room);
                let (shape, half_height) = goal_shape(0);
                let r = shape.bounding_radius();
                let p = free_spot(&mut sim.rng, &region, r + 0.3, &occupied)?;
                occupied.push((p, r + 0.3));
                let object = sim.world.spawn(
                    RigidBody::fixed("goal", p + DVec3::Y * half_height).with_color(NAV_GOALS[0].1),
                    shape,
                )?;
                for room in rooms.iter().take(agents as usize) {
                    let region = scene.spawn_region(room);
                    let p = free_spot(&mut sim.rng, &region, 0.4 + params.reach_radius, &occupied)?;
                    let yaw = sim.rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
                    sim.spawn_agent(p, yaw)?;
                    occupied.push((p, 0.4));
                }
                Ok(TaskState::MultiAgentNav {
                    object,
                    room: target_room.name,
                    reached: vec![false; agents as usize],
                })
            }
        }
    }

    /// Places the ball just inside a random wall, rolling inward.
    fn respawn_ball(&self, params: &TaskParams, sim: &mut Sim) -> Result<()> {
        let TaskState::KickTheBall { ball, .. } = *self else {
            return Ok(());
        };
        let room = sim.scene.rooms().next().expect("checked at construction").clone();
        let [cx, cz] = room.center;
        let (hx, hz) = (room.size[0] * 0.5, room.size[2] * 0.5);
        let inset = params.ball_radius + 0.05;
        let side = sim.rng.index(4);
        let (pos, dir) = match side {
            0 => (
                DVec3::new(cx + hx - inset, 0.0, cz + sim.rng.uniform(-hz + 0.5, hz - 0.5)),
                -DVec3::X,
            ),
            1 => (
                DVec3::new(cx - hx + inset, 0.0, cz + sim.rng.uniform(-hz + 0.5, hz - 0.5)),
                DVec3::X,
            ),
            2 => (
                DVec3::new(cx + sim.rng.uniform(-hx + 0.5, hx - 0.5), 0.0, cz + hz - inset),
                -DVec3::Z,
            ),
            _ => (
                DVec3::new(cx + sim.rng.uniform(-hx + 0.5, hx - 0.5), 0.0, cz - hz + inset),
                DVec3::Z,
            ),
        };
        let b = sim.world.body_mut(ball)?;
        b.position = pos + DVec3::Y * params.ball_radius;
        b.linear_velocity = dir * params.ball_speed;
        b.angular_velocity = DVec3::ZERO;
        b.held_by = None;
        b.kinematic = false;
        for a in sim.agents.iter_mut() {
            if a.held.is_some_and(|h| h.body == ball) {
                a.held = None;
            }
        }
        sim.sync_sources();
        Ok(())
    }

    /// Per-step setup before physics runs.
    pub fn before_physics(&self, sim: &mut Sim) -> Result<()> {
        if let TaskState::GrabObject { object, .. } = self {
            let p = sim.world.body(*object)?.position;
            for a in sim.agents.iter_mut() {
                a.look_toward_point(p);
            }
        }
        Ok(())
    }

    /// Reward inputs for every agent, whether a terminal event happened,
    /// and any follow-up such as respawning the ball.
    pub fn evaluate(
        &mut self,
        params: &TaskParams,
        sim: &mut Sim,
        facts: &StepFacts,
    ) -> Result<(Vec<RewardInput>, bool, Vec<Event>)> {
        let states: Vec<AgentState> = sim
            .agents
            .iter()
            .zip(facts.before)
            .map(|(a, &before)| {
                let v = (a.position - before) / facts.dt_control;
                AgentState {
                    position: a.position,
                    yaw: a.yaw,
                    velocity: DVec3::new(v.x, 0.0, v.z),
                }
            })
            .collect();
        let mut follow_up = Vec::new();
        match self {
            TaskState::KickTheBall { ball, .. } => {
                let ball = *ball;
                let pos = sim.world.body(ball)?.position;
                let inputs: Vec<RewardInput> = states
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        RewardInput::Kick {
                        agent: *s,
                        ball: pos,
                        kicked: facts.events.iter().any(|e| {
                            matches!(e, Event::Kicked { agent, object } if *agent as usize == i && *object == ball.0)
                        }),
                    }
                    })
                    .collect();
                if inputs
                    .iter()
                    .any(|i| matches!(i, RewardInput::Kick { kicked: true, .. }))
                {
                    self.respawn_ball(params, sim)?;
                    follow_up.push(Event::Respawned { object: ball.0 });
                }
                Ok((inputs, false, follow_up))
            }
            TaskState::ObjectNav { objects, target } => {
                let target_id = objects[*target];
                let target_pos = sim.world.body(target_id)?.position;
                let mut terminal = false;
                let mut inputs = Vec::with_capacity(states.len());
                for (i, s) in states.iter().enumerate() {
                    let mut best: Option<(f64, usize)> = None;
                    for (k, &o) in objects.iter().enumerate() {
                        let d = horizontal_distance(sim.world.body(o)?.position, s.position);
                        if d < params.reach_radius && best.is_none_or(|(bd, _)| d < bd) {
                            best = Some((d, k));
                        }
                    }
                    let reached = best.map(|(_, k)| {
                        follow_up.push(Event::Reached {
                            agent: i as u32,
                            object: objects[k].0,
                        });
                        if k == *target {
                            Reach::Target
                        } else {
                            Reach::Wrong
                        }
                    });
                    terminal |= reached.is_some();
                    let scene = sim.agents[i].ray_scene(&sim.world);
                    let visible = sim.agents[i].is_visible(&sim.world, &scene, target_id)?;
                    inputs.push(RewardInput::Nav {
                        agent: *s,
                        target: target_pos,
                        visible,
                        reached,
                    });
                }
                Ok((inputs, terminal, follow_up))
            }
            TaskState::GrabObject {
                object,
                prev_distance,
                prev_y,
            } => {
                let o = sim.world.body(*object)?.position;
                let mut inputs = Vec::new();
                for i in 0..sim.agents.len() {
                    let hands = sim.hand_positions(i);
                    inputs.push(RewardInput::Grab {
                        hands,
                        object: o,
                        object_prev_y: *prev_y,
                        prev_distance: *prev_distance,
                        action: facts.actions.get(i).cloned().unwrap_or_default(),
                    });
                    if i == 0 {
                        *prev_distance = hand_distance(hands, o);
                    }
                }
                *prev_y = o.y;
                Ok((inputs, false, follow_up))
            }
            TaskState::MultiAgentNav { object, reached, .. } => {
                let o = sim.world.body(*object)?.position;
                let mut inputs = Vec::new();
                for (i, s) in states.iter().enumerate() {
                    let now = !reached[i] && horizontal_distance(o, s.position) < params.reach_radius;
                    if now {
                        reached[i] = true;
                        follow_up.push(Event::Reached {
                            agent: i as u32,
                            object: object.0,
                        });
                    }
                    let scene = sim.agents[i].ray_scene(&sim.world);
                    let visible = sim.agents[i].is_visible(&sim.world, &scene, *object)?;
                    inputs.push(RewardInput::MultiNav {
                        agent: *s,
                        object: o,
                        visible,
                        reached_now: now,
                    });
                }
                let all = reached.iter().all(|&r| r);
                Ok((inputs, all, follow_up))
            }
        }
    }

    /// Task facts worth reporting to a learner.
    pub fn describe(&self, sim: &Sim) -> serde_json::Value {
        let label = |id: BodyId| sim.world.body(id).map(|b| b.label.clone()).unwrap_or_default();
        match self {
            TaskState::KickTheBall { ball, .. } => serde_json::json!({ "ball": ball.0 }),
            TaskState::ObjectNav { objects, target } => serde_json::json!({
                "target": objects[*target].0,
                "target_label": label(objects[*target]),
                "objects": objects.iter().map(|o| o.0).collect::<Vec<_>>(),
            }),
            TaskState::GrabObject { object, .. } => serde_json::json!({ "object": object.0 }),
            TaskState::MultiAgentNav { object, room, reached } => serde_json::json!({
                "object": object.0,
                "room": room,
                "reached": reached,
            }),
        }
    }
}
