//! The environment manager: scene setup, the fixed-substep control loop and
//! per-agent observation packing.

pub mod action;
pub mod observation;
pub mod scene;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use action::{Action, MAX_TURN_SPEED, MAX_WALK_SPEED};
pub use observation::{DType, ObservationFrame, Tensor, TensorData};
pub use scene::{SceneBodies, SceneFile};

use crate::audio::{
    advance, fft_magnitude, spatialize, AudioConfig, AudioMode, AudioSource, HrtfTable, Listener, RoomAcoustics,
};
use crate::error::{Error, Result};
use crate::humanoid::{ActionMode, Agent, AgentConfig, Skeleton, SkinMesh};
use crate::math::DVec3;
use crate::physics::{BodyId, PhysicsConfig, World};
use crate::sim::{derive_stream, streams, RngStream, SimClock, DEFAULT_DT_PHYSICS};
use crate::tactile::{sense_agent, TaxelLayout};
use crate::tasks::{evaluate, RewardBreakdown, RewardInput, StepFacts, TaskKind, TaskParams, TaskState};
use crate::vision::{render_binocular, Intrinsics, Lighting, VisionConfig};

pub const KEY_VISION: &str = "vision";
pub const KEY_AUDIO: &str = "audio";
pub const KEY_TACTILE: &str = "tactile";
pub const KEY_PROPRIO: &str = "proprio";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sensors {
    pub vision: bool,
    pub audio: bool,
    pub tactile: bool,
    pub proprio: bool,
}

impl Default for Sensors {
    fn default() -> Self {
        Sensors {
            vision: true,
            audio: true,
            tactile: true,
            proprio: true,
        }
    }
}

impl Sensors {
    pub const NONE: Sensors = Sensors {
        vision: false,
        audio: false,
        tactile: false,
        proprio: false,
    };

    /// Parses a comma-separated list such as `vision,audio`.
    pub fn parse(list: &str) -> Result<Sensors> {
        let mut s = Sensors::NONE;
        for item in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match item {
                KEY_VISION => s.vision = true,
                KEY_AUDIO => s.audio = true,
                KEY_TACTILE => s.tactile = true,
                KEY_PROPRIO => s.proprio = true,
                other => return Err(Error::Config(format!("unknown sensor {other:?}"))),
            }
        }
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AudioEncoding {
    /// Stereo samples, shape `[2, frame_samples]`.
    #[default]
    Raw,
    /// Magnitude spectra, shape `[windows, 2, fft_window / 2 + 1]`.
    Fft,
}

/// Everything needed to build an environment. Also the HELLO document of
/// the wire protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub task: TaskKind,
    /// Playground name or scene-file path; the task default when absent.
    pub playground: Option<String>,
    pub agents: Option<u32>,
    pub sensors: Sensors,
    pub audio_mode: AudioMode,
    pub audio_encoding: AudioEncoding,
    pub seed: u64,
    pub dt_physics: f64,
    pub substeps: u32,
    pub task_params: TaskParams,
    pub vision: VisionConfig,
    pub intrinsics: Intrinsics,
    pub audio: AudioConfig,
    pub physics: PhysicsConfig,
    pub interact_distance: f64,
    pub kick_impulse: f64,
    pub hrtf_file: Option<String>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        let agent = AgentConfig::default();
        EnvConfig {
            task: TaskKind::KickTheBall,
            playground: None,
            agents: None,
            sensors: Sensors::default(),
            audio_mode: AudioMode::Stereo,
            audio_encoding: AudioEncoding::Raw,
            seed: 0,
            dt_physics: DEFAULT_DT_PHYSICS,
            substeps: 5,
            task_params: TaskParams::default(),
            vision: VisionConfig::default(),
            intrinsics: agent.intrinsics,
            audio: AudioConfig::default(),
            physics: PhysicsConfig::default(),
            interact_distance: agent.interact_distance,
            kick_impulse: agent.kick_impulse,
            hrtf_file: None,
        }
    }
}

impl EnvConfig {
    pub fn for_task(task: TaskKind) -> EnvConfig {
        EnvConfig {
            task,
            ..EnvConfig::default()
        }
    }

    pub fn playground_name(&self) -> &str {
        self.playground.as_deref().unwrap_or(self.task.default_playground())
    }

    pub fn agent_count(&self) -> u32 {
        self.agents.unwrap_or(self.task.default_agents())
    }

    pub fn dt_control(&self) -> f64 {
        self.dt_physics * self.substeps as f64
    }

    pub fn max_steps(&self) -> u32 {
        self.task_params.max_steps.unwrap_or(self.task.default_max_steps())
    }

    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            mode: self.task.action_mode(),
            interact_distance: self.interact_distance,
            kick_impulse: self.kick_impulse,
            intrinsics: self.intrinsics,
        }
    }

    pub fn validate(&self) -> Result<()> {
        SimClock::new(self.dt_physics)?;
        if self.substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        if self.max_steps() == 0 {
            return Err(Error::Config("max episode steps must be positive".into()));
        }
        self.intrinsics.validate()?;
        self.audio.validate(self.dt_control())?;
        Ok(())
    }
}

/// Read-only data shared by every environment built from one config.
#[derive(Debug)]
pub struct Assets {
    pub skeleton: Arc<Skeleton>,
    pub skin: Arc<SkinMesh>,
    pub taxels: Arc<TaxelLayout>,
    pub hrtf: Option<Arc<HrtfTable>>,
}

impl Assets {
    pub fn load(config: &EnvConfig) -> Result<Arc<Assets>> {
        let skeleton = Skeleton::simple18();
        let skin = Arc::new(SkinMesh::build(&skeleton));
        let taxels = Arc::new(TaxelLayout::new(&skeleton, &skin));
        let hrtf = match &config.hrtf_file {
            Some(path) => Some(Arc::new(HrtfTable::load(std::path::Path::new(path), config.audio.fs)?)),
            None => None,
        };
        Ok(Arc::new(Assets {
            skeleton,
            skin,
            taxels,
            hrtf,
        }))
    }
}

/// Something that happened during a control step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Kicked { agent: u32, object: u32 },
    Grabbed { agent: u32, object: u32 },
    Released { agent: u32, object: u32 },
    Reached { agent: u32, object: u32 },
    Respawned { object: u32 },
    Voice { agent: u32, samples: usize },
    Refused { agent: u32, action: String, reason: String },
}

/// Mutable world state of one episode.
#[derive(Debug)]
pub struct Sim {
    pub world: World,
    pub scene: Arc<SceneFile>,
    pub bodies: SceneBodies,
    pub agents: Vec<Agent>,
    pub sources: Vec<AudioSource>,
    pub room: Option<RoomAcoustics>,
    pub rng: RngStream,
    assets: Arc<Assets>,
    agent_config: AgentConfig,
    fs: u32,
    next_source: u64,
}

impl Sim {
    pub fn new(
        scene: Arc<SceneFile>,
        assets: Arc<Assets>,
        agent_config: AgentConfig,
        physics: PhysicsConfig,
        fs: u32,
        rng: RngStream,
    ) -> Result<Sim> {
        let mut world = World::new(physics);
        let bodies = scene.build(&mut world)?;
        Ok(Sim {
            world,
            room: scene.acoustics(),
            scene,
            bodies,
            agents: Vec::new(),
            sources: Vec::new(),
            rng,
            assets,
            agent_config,
            fs,
            next_source: 0,
        })
    }

    pub fn spawn_agent(&mut self, position: DVec3, yaw: f64) -> Result<usize> {
        let index = self.agents.len();
        let agent = Agent::spawn(
            &mut self.world,
            index as u32,
            self.assets.skeleton.clone(),
            self.assets.skin.clone(),
            self.agent_config.clone(),
            position,
            yaw,
        )?;
        self.agents.push(agent);
        Ok(index)
    }

    pub fn audio_fs(&self) -> u32 {
        self.fs
    }

    pub fn add_source(
        &mut self,
        position: DVec3,
        clip: Arc<[f32]>,
        gain: f64,
        looping: bool,
        attached: Option<BodyId>,
    ) -> u64 {
        let id = self.next_source;
        self.next_source += 1;
        let mut s = AudioSource::new(id, position, clip, gain, looping);
        s.attached = attached;
        self.sources.push(s);
        self.sync_sources();
        id
    }

    /// Moves body-attached sources onto their bodies.
    pub fn sync_sources(&mut self) {
        for s in self.sources.iter_mut() {
            if let Some(b) = s.attached {
                if let Ok(body) = self.world.body(b) {
                    s.position = body.position;
                }
            }
        }
    }

    /// Registers a one-shot source at the agent's head; empty buffers are
    /// ignored.
    pub fn make_sound(&mut self, agent: usize, samples: &[f32]) -> Option<u64> {
        if samples.is_empty() {
            return None;
        }
        let head = self.head_center(agent);
        Some(self.add_source(head, samples.into(), 1.0, false, None))
    }

    pub fn head_center(&self, agent: usize) -> DVec3 {
        let a = &self.agents[agent];
        let head = a.skeleton.bone_index("head").expect("skeleton has a head");
        a.bone_poses()[head].transform_point(a.skeleton.bones[head].box_center)
    }

    pub fn listener(&self, agent: usize, mode: AudioMode) -> Listener {
        let mut pose = self.agents[agent].head_pose();
        pose.position = self.head_center(agent);
        Listener::new(pose, mode)
    }

    /// Palm centres, left then right.
    pub fn hand_positions(&self, agent: usize) -> [DVec3; 2] {
        let a = &self.agents[agent];
        let poses = a.bone_poses();
        a.palm_bones()
            .map(|b| poses[b].transform_point(a.skeleton.bones[b].box_center))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeState {
    pub steps: u32,
    pub returns: Vec<f64>,
    pub done: bool,
    /// Every event since reset.
    pub events: Vec<Event>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub observations: Vec<ObservationFrame>,
    pub rewards: Vec<RewardBreakdown>,
    pub done: bool,
    /// JSON object with the step's events and task facts.
    pub info: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObsSpec {
    pub key: String,
    pub dtype: DType,
    pub shape: Vec<u32>,
}

/// One accepted action kind; `len` is `None` for variable-length vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionKindSpec {
    pub kind: u8,
    pub name: String,
    pub len: Option<usize>,
}

/// Declared observation layout and action interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub agents: u32,
    pub observations: Vec<ObsSpec>,
    pub action_mode: ActionMode,
    pub dof: usize,
    pub actions: Vec<ActionKindSpec>,
}

pub struct Env {
    config: EnvConfig,
    scene: Arc<SceneFile>,
    assets: Arc<Assets>,
    light: Lighting,
    clock: SimClock,
    sim: Option<Sim>,
    task: Option<TaskState>,
    episode: EpisodeState,
    last_inputs: Vec<RewardInput>,
}

impl Env {
    pub fn new(config: EnvConfig) -> Result<Env> {
        let assets = Assets::load(&config)?;
        Env::with_assets(config, assets)
    }

    pub fn with_assets(config: EnvConfig, assets: Arc<Assets>) -> Result<Env> {
        config.validate()?;
        let scene = Arc::new(SceneFile::resolve(config.playground_name())?);
        config.task.check_compatible(&scene, config.agent_count())?;
        if config.audio_mode == AudioMode::Hrtf
            && assets.hrtf.as_ref().is_none_or(|t| t.is_empty())
            && !config.audio.parametric_fallback
        {
            return Err(Error::Config(
                "hrtf mode needs an HRIR table or the parametric fallback".into(),
            ));
        }
        let light = Lighting {
            background: scene.background,
            ..Lighting::default()
        };
        Ok(Env {
            clock: SimClock::new(config.dt_physics)?,
            config,
            scene,
            assets,
            light,
            sim: None,
            task: None,
            episode: EpisodeState::default(),
            last_inputs: Vec::new(),
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn assets(&self) -> &Arc<Assets> {
        &self.assets
    }

    pub fn scene(&self) -> &SceneFile {
        &self.scene
    }

    pub fn clock(&self) -> SimClock {
        self.clock
    }

    pub fn episode(&self) -> &EpisodeState {
        &self.episode
    }

    pub fn sim(&self) -> Result<&Sim> {
        self.sim.as_ref().ok_or(Error::NotReset)
    }

    pub fn sim_mut(&mut self) -> Result<&mut Sim> {
        self.sim.as_mut().ok_or(Error::NotReset)
    }

    pub fn task_state(&self) -> Option<&TaskState> {
        self.task.as_ref()
    }

    /// Reward inputs of the last step, one per agent.
    pub fn last_reward_inputs(&self) -> &[RewardInput] {
        &self.last_inputs
    }

    pub fn spec(&self) -> EnvSpec {
        let c = &self.config;
        let mut obs = Vec::new();
        let mut add = |key: &str, shape: Vec<u32>| {
            obs.push(ObsSpec {
                key: key.into(),
                dtype: DType::F32,
                shape,
            })
        };
        if c.sensors.vision {
            let i = c.intrinsics;
            add(KEY_VISION, vec![2, c.vision.channels(), i.height, i.width]);
        }
        if c.sensors.audio {
            let n = c.audio.frame_samples;
            let shape = match c.audio_encoding {
                AudioEncoding::Raw => vec![2, n as u32],
                AudioEncoding::Fft => vec![
                    n.div_ceil(c.audio.fft_window).max(1) as u32,
                    2,
                    (c.audio.fft_window / 2 + 1) as u32,
                ],
            };
            add(KEY_AUDIO, shape);
        }
        if c.sensors.tactile {
            add(KEY_TACTILE, vec![self.assets.taxels.len() as u32]);
        }
        if c.sensors.proprio {
            let s = &self.assets.skeleton;
            add(KEY_PROPRIO, vec![(4 * s.bones.len() + 2 * s.total_dof()) as u32]);
        }
        let dof = self.assets.skeleton.total_dof();
        use action::kind::*;
        EnvSpec {
            agents: c.agent_count(),
            observations: obs,
            action_mode: c.task.action_mode(),
            dof,
            actions: [
                (NOOP, "noop", Some(0)),
                (PRIMITIVE, "primitive", Some(5)),
                (TORQUE, "torque", Some(dof)),
                (VOICE, "voice", None),
                (LOOK_AT, "look_at", Some(3)),
                (RELEASE_LOOK, "release_look", Some(0)),
                (ROTATE_HEAD, "rotate_head", Some(2)),
            ]
            .into_iter()
            .map(|(kind, name, len)| ActionKindSpec {
                kind,
                name: name.into(),
                len,
            })
            .collect(),
        }
    }

    /// Rebuilds the scene with placements drawn from `seed` and returns the
    /// first observations.
    pub fn reset(&mut self, seed: u64) -> Result<Vec<ObservationFrame>> {
        let rng = derive_stream(seed, streams::TASK);
        let mut sim = Sim::new(
            self.scene.clone(),
            self.assets.clone(),
            self.config.agent_config(),
            self.config.physics.clone(),
            self.config.audio.fs,
            rng,
        )?;
        let task = TaskState::setup(
            self.config.task,
            &self.config.task_params,
            &mut sim,
            self.config.agent_count(),
        )?;
        sim.sync_sources();
        self.clock.reset();
        self.episode = EpisodeState {
            returns: vec![0.0; sim.agents.len()],
            ..EpisodeState::default()
        };
        self.last_inputs.clear();
        self.sim = Some(sim);
        self.task = Some(task);
        self.observe()
    }

    /// Applies one action per agent, runs the physics substeps, scores the
    /// result and returns fresh observations.
    pub fn step(&mut self, actions: &[Action]) -> Result<StepOutput> {
        let sim = self.sim.as_mut().ok_or(Error::NotReset)?;
        if self.episode.done {
            return Err(Error::EpisodeFinished);
        }
        if actions.len() != sim.agents.len() {
            return Err(Error::invalid_action(
                actions.len(),
                format!("expected {} agent actions", sim.agents.len()),
            ));
        }
        for (agent, a) in sim.agents.iter().zip(actions) {
            validate_action(agent, a)?;
        }
        let dt = self.config.dt_physics;
        let dt_control = self.config.dt_control();
        let substeps = self.config.substeps;

        // every interaction target is chosen from the pre-step state
        let mut targets = Vec::with_capacity(actions.len());
        for (agent, a) in sim.agents.iter().zip(actions) {
            let wants = matches!(
                a,
                Action::Primitive { kick: true, .. } | Action::Primitive { grab: true, .. }
            );
            targets.push(if wants {
                let scene = agent.ray_scene(&sim.world);
                agent.interactable_objects(&sim.world, &scene)?.first().copied()
            } else {
                None
            });
        }
        let before: Vec<DVec3> = sim.agents.iter().map(|a| a.position).collect();

        let mut events = Vec::new();
        for (i, a) in actions.iter().enumerate() {
            apply_action(sim, i, a, targets[i], dt_control, substeps, &mut events)?;
        }
        let task = self.task.as_mut().expect("task set at reset");
        task.before_physics(sim)?;

        for _ in 0..substeps {
            for agent in sim.agents.iter_mut() {
                agent.pre_physics(&mut sim.world, dt);
            }
            sim.world.step(dt)?;
            for agent in sim.agents.iter_mut() {
                agent.post_physics(&mut sim.world);
            }
            self.clock.advance();
        }
        for agent in sim.agents.iter_mut() {
            agent.stop();
        }
        sim.sync_sources();

        let vectors: Vec<Vec<f64>> = actions.iter().map(Action::vector).collect();
        let facts = StepFacts {
            before: &before,
            events: &events,
            actions: &vectors,
            dt_control,
        };
        let (inputs, terminal, follow_up) = task.evaluate(&self.config.task_params, sim, &facts)?;
        events.extend(follow_up);
        let params = self.config.task_params.reward_params();
        let rewards: Vec<RewardBreakdown> = inputs.iter().map(|i| evaluate(i, &params)).collect();
        for (ret, r) in self.episode.returns.iter_mut().zip(&rewards) {
            *ret += r.total();
        }
        self.last_inputs = inputs;

        let observations = self.observe()?;
        let sim = self.sim.as_mut().expect("checked above");
        advance(
            &mut sim.sources,
            self.config.audio.frame_samples,
            self.config.audio.fs as usize,
        );

        self.episode.steps += 1;
        self.episode.done = terminal || self.episode.steps >= self.config.max_steps();
        let info = serde_json::json!({
            "step": self.episode.steps,
            "sim_steps": self.clock.steps(),
            "events": events,
            "task": self.task.as_ref().expect("task set").describe(sim),
        })
        .to_string();
        self.episode.events.extend(events);
        Ok(StepOutput {
            observations,
            rewards,
            done: self.episode.done,
            info,
        })
    }

    fn observe(&self) -> Result<Vec<ObservationFrame>> {
        let sim = self.sim.as_ref().ok_or(Error::NotReset)?;
        let c = &self.config;
        let audio = if c.sensors.audio {
            Some(self.render_audio(sim)?)
        } else {
            None
        };
        let mut frames = Vec::with_capacity(sim.agents.len());
        for (i, agent) in sim.agents.iter().enumerate() {
            let mut f = ObservationFrame::new();
            if c.sensors.vision {
                let [(l, _), (r, _)] = render_binocular(agent, &sim.world, &c.vision, &self.light);
                let mut data = l.data;
                data.extend_from_slice(&r.data);
                f.insert(KEY_VISION, Tensor::f32(vec![2, l.channels, l.height, l.width], data));
            }
            if let Some(audio) = &audio {
                let [left, right] = &audio[i];
                let t = match c.audio_encoding {
                    AudioEncoding::Raw => {
                        let mut data = left.clone();
                        data.extend_from_slice(right);
                        Tensor::f32(vec![2, left.len() as u32], data)
                    }
                    AudioEncoding::Fft => {
                        let (mag, shape) = fft_magnitude(&[left, right], c.audio.fft_window);
                        Tensor::f32(shape.iter().map(|&d| d as u32).collect(), mag)
                    }
                };
                f.insert(KEY_AUDIO, t);
            }
            if c.sensors.tactile {
                let t = sense_agent(agent, &self.assets.taxels, &sim.world);
                f.insert(KEY_TACTILE, Tensor::f32(vec![t.len() as u32], t));
            }
            if c.sensors.proprio {
                let p = agent.proprioception();
                f.insert(KEY_PROPRIO, Tensor::f32(vec![p.len() as u32], p));
            }
            frames.push(f);
        }
        Ok(frames)
    }

    /// One stereo frame per agent; the shoebox applies only when source and
    /// ears are inside it.
    fn render_audio(&self, sim: &Sim) -> Result<Vec<[Vec<f32>; 2]>> {
        let cfg = &self.config.audio;
        let n = cfg.frame_samples;
        let hrtf = self.assets.hrtf.as_deref();
        let mut out = Vec::with_capacity(sim.agents.len());
        for i in 0..sim.agents.len() {
            let listener = sim.listener(i, self.config.audio_mode);
            let mut acc = [vec![0.0f64; n], vec![0.0f64; n]];
            for s in &sim.sources {
                let room = sim.room.as_ref().filter(|r| {
                    r.contains(s.position)
                        && r.contains(listener.head.position)
                        && listener.ears().iter().all(|&e| r.contains(e))
                });
                let y = spatialize(s, &listener, hrtf, room, cfg, n)?;
                for c in 0..2 {
                    for (a, v) in acc[c].iter_mut().zip(&y[c]) {
                        *a += v;
                    }
                }
            }
            out.push(acc.map(|ch| ch.into_iter().map(|v| v.clamp(-1.0, 1.0) as f32).collect()));
        }
        Ok(out)
    }
}

fn validate_action(agent: &Agent, action: &Action) -> Result<()> {
    let mode = agent.config.mode;
    match action {
        Action::Primitive { .. } if mode != ActionMode::Animation => {
            Err(Error::ModeConflict(format!("agent {} is in torque mode", agent.index)))
        }
        Action::Torque(_) if mode != ActionMode::Torque => Err(Error::ModeConflict(format!(
            "agent {} is in animation mode",
            agent.index
        ))),
        Action::Torque(t) => {
            let dof = agent.skeleton.total_dof();
            if t.len() != dof {
                return Err(Error::invalid_action(
                    t.len().min(dof),
                    format!("torque vector has {} values, expected {dof}", t.len()),
                ));
            }
            match t.iter().position(|v| !(-1.0..=1.0).contains(v)) {
                Some(i) => Err(Error::invalid_action(i, format!("torque {} outside [-1, 1]", t[i]))),
                None => Ok(()),
            }
        }
        _ => Ok(()),
    }
}

fn apply_action(
    sim: &mut Sim,
    i: usize,
    action: &Action,
    target: Option<BodyId>,
    dt_control: f64,
    substeps: u32,
    events: &mut Vec<Event>,
) -> Result<()> {
    let agent_id = i as u32;
    let animation = sim.agents[i].config.mode == ActionMode::Animation;
    if animation {
        sim.agents[i].stop();
    } else if !matches!(action, Action::Torque(_)) {
        let dof = sim.agents[i].skeleton.total_dof();
        sim.agents[i].apply_torque(&vec![0.0; dof])?;
    }
    match action {
        Action::Noop => {}
        Action::Primitive {
            walk,
            turn,
            kick,
            grab,
            release,
        } => {
            let walk = walk.clamp(-MAX_WALK_SPEED, MAX_WALK_SPEED);
            let turn = turn.clamp(-MAX_TURN_SPEED, MAX_TURN_SPEED);
            sim.agents[i].walk(walk, turn, dt_control, substeps)?;
            let refused = |what: &str, reason: String| Event::Refused {
                agent: agent_id,
                action: what.into(),
                reason,
            };
            if *release {
                if let Some(object) = sim.agents[i].release(&mut sim.world)? {
                    events.push(Event::Released {
                        agent: agent_id,
                        object: object.0,
                    });
                }
            }
            if *kick {
                match target {
                    Some(t) => match sim.agents[i].kick(&mut sim.world, t) {
                        Ok(_) => events.push(Event::Kicked {
                            agent: agent_id,
                            object: t.0,
                        }),
                        Err(Error::InteractionRefused(r)) => events.push(refused("kick", r)),
                        Err(e) => return Err(e),
                    },
                    None => events.push(refused("kick", "nothing interactable".into())),
                }
            }
            if *grab {
                match target {
                    Some(t) => match sim.agents[i].grab(&mut sim.world, t) {
                        Ok(()) => events.push(Event::Grabbed {
                            agent: agent_id,
                            object: t.0,
                        }),
                        Err(Error::InteractionRefused(r)) => events.push(refused("grab", r)),
                        Err(e) => return Err(e),
                    },
                    None => events.push(refused("grab", "nothing interactable".into())),
                }
            }
        }
        Action::Torque(t) => sim.agents[i].apply_torque(t)?,
        Action::Voice(samples) => {
            if sim.make_sound(i, samples).is_some() {
                events.push(Event::Voice {
                    agent: agent_id,
                    samples: samples.len(),
                });
            }
        }
        Action::LookAt(p) => sim.agents[i].look_toward_point(*p),
        Action::ReleaseLook => sim.agents[i].release_look(),
        Action::RotateHead {
            up_down_deg,
            left_right_deg,
        } => sim.agents[i].rotate_head(*up_down_deg, *left_right_deg),
    }
    Ok(())
}
