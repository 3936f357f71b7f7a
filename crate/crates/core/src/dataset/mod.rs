//! Supervised dataset generators. Each sample is built from its own random
//! stream, so output bytes do not depend on thread count.

pub mod vten;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{spatialize, AudioConfig, AudioMode, AudioSource, HrtfTable};
use crate::env::scene::SceneFile;
use crate::env::{Assets, Sim, Tensor};
use crate::error::{Error, Result};
use crate::humanoid::{ActionMode, AgentConfig};
use crate::math::{DQuat, DVec3};
use crate::physics::{BodyId, PhysicsConfig, RigidBody, Shape, TriMesh};
use crate::sim::{derive_stream, streams, RngStream};
use crate::vision::{render_binocular, Image, Lighting, Rendered, VisionConfig};

pub const DEFAULT_N: usize = 1000;
pub const TACTILE_STEPS: usize = 128;
pub const TACTILE_DT: f64 = 0.004;
pub const SOUND_SAMPLES: usize = 4410;
const PLAYGROUND: &str = "SimpleEnv";
const MAX_TRIES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    ImageClassification,
    Bbox,
    Distance,
    SoundLocalization,
    TactileClassification,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 5] = [
        DatasetKind::ImageClassification,
        DatasetKind::Bbox,
        DatasetKind::Distance,
        DatasetKind::SoundLocalization,
        DatasetKind::TactileClassification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::ImageClassification => "image",
            DatasetKind::Bbox => "bbox",
            DatasetKind::Distance => "distance",
            DatasetKind::SoundLocalization => "sound",
            DatasetKind::TactileClassification => "tactile",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            DatasetKind::ImageClassification => &["class"],
            DatasetKind::Bbox => &["class", "cx", "cy", "h", "w"],
            DatasetKind::Distance => &["class", "distance"],
            DatasetKind::SoundLocalization => &["dx", "dy", "dz"],
            DatasetKind::TactileClassification => &["shape"],
        }
    }

    pub fn classes(self) -> Vec<&'static str> {
        match self {
            DatasetKind::ImageClassification | DatasetKind::Bbox | DatasetKind::Distance => {
                VisualClass::ALL.iter().map(|c| c.name()).collect()
            }
            DatasetKind::SoundLocalization => Vec::new(),
            DatasetKind::TactileClassification => TactileShape::ALL.iter().map(|c| c.name()).collect(),
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "image" | "image_classification" | "image-classification" => DatasetKind::ImageClassification,
            "bbox" => DatasetKind::Bbox,
            "distance" => DatasetKind::Distance,
            "sound" | "sound_localization" | "sound-localization" => DatasetKind::SoundLocalization,
            "tactile" | "tactile_classification" | "tactile-classification" => DatasetKind::TactileClassification,
            other => return Err(Error::NotFound(format!("dataset kind {other:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VisualClass {
    Doll,
    Ball,
    Pyramid,
}

impl VisualClass {
    pub const ALL: [VisualClass; 3] = [VisualClass::Doll, VisualClass::Ball, VisualClass::Pyramid];

    pub fn name(self) -> &'static str {
        match self {
            VisualClass::Doll => "doll",
            VisualClass::Ball => "ball",
            VisualClass::Pyramid => "pyramid",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TactileShape {
    Pyramid,
    Sphere,
    Cube,
    Cylinder,
}

impl TactileShape {
    pub const ALL: [TactileShape; 4] = [
        TactileShape::Pyramid,
        TactileShape::Sphere,
        TactileShape::Cube,
        TactileShape::Cylinder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TactileShape::Pyramid => "pyramid",
            TactileShape::Sphere => "sphere",
            TactileShape::Cube => "cube",
            TactileShape::Cylinder => "cylinder",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenOptions {
    pub kind: DatasetKind,
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub audio_mode: AudioMode,
    pub hrtf_file: Option<PathBuf>,
}

impl GenOptions {
    pub fn new(kind: DatasetKind, n: usize, seed: u64, out: impl Into<PathBuf>) -> GenOptions {
        GenOptions {
            kind,
            n,
            seed,
            out: out.into(),
            audio_mode: AudioMode::Stereo,
            hrtf_file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub shape: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelSchema {
    pub columns: Vec<String>,
    pub classes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: DatasetKind,
    pub count: usize,
    pub seed: u64,
    pub playground: String,
    pub sensor: serde_json::Value,
    pub label_schema: LabelSchema,
    pub labels: String,
    pub notes: Vec<String>,
    pub files: Vec<FileEntry>,
}

/// One generated example before it is written out.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub tensor: Tensor,
    pub label: Vec<String>,
}

/// Shared read-only inputs of a generation run.
pub struct Generator {
    kind: DatasetKind,
    seed: u64,
    assets: Arc<Assets>,
    scene: Arc<SceneFile>,
    audio: AudioConfig,
    audio_mode: AudioMode,
    hrtf: Option<Arc<HrtfTable>>,
    vision: VisionConfig,
    light: Lighting,
}

impl Generator {
    pub fn new(opts: &GenOptions) -> Result<Generator> {
        let scene = Arc::new(SceneFile::builtin(PLAYGROUND)?);
        let audio = AudioConfig::default();
        let hrtf = match &opts.hrtf_file {
            Some(p) => Some(Arc::new(HrtfTable::load(p, audio.fs)?)),
            None => None,
        };
        let assets = Assets::load(&crate::env::EnvConfig::default())?;
        Ok(Generator {
            kind: opts.kind,
            seed: opts.seed,
            light: Lighting {
                background: scene.background,
                ..Lighting::default()
            },
            assets,
            scene,
            audio,
            audio_mode: opts.audio_mode,
            hrtf,
            vision: VisionConfig::default(),
        })
    }

    pub fn assets(&self) -> &Arc<Assets> {
        &self.assets
    }

    pub fn rng(&self, index: usize) -> RngStream {
        derive_stream(self.seed, streams::indexed(streams::DATASET, index as u64))
    }

    pub fn sample(&self, index: usize) -> Result<Sample> {
        let mut rng = self.rng(index);
        match self.kind {
            DatasetKind::ImageClassification => {
                let class = VisualClass::ALL[index % 3];
                let view = self.random_view(&mut rng, class, None)?;
                Ok(Sample {
                    tensor: binocular_tensor(&view.images),
                    label: vec![class.name().into()],
                })
            }
            DatasetKind::Bbox => {
                let class = VisualClass::ALL[index % 3];
                let view = self.random_view(&mut rng, class, None)?;
                let [cx, cy, h, w] = view.bbox.expect("random_view keeps only visible objects");
                Ok(Sample {
                    tensor: image_tensor(&view.images[0]),
                    label: vec![class.name().into(), fmt_f(cx), fmt_f(cy), fmt_f(h), fmt_f(w)],
                })
            }
            DatasetKind::Distance => {
                let class = VisualClass::ALL[index % 3];
                let view = self.random_view(&mut rng, class, None)?;
                Ok(Sample {
                    tensor: binocular_tensor(&view.images),
                    label: vec![class.name().into(), fmt_f(view.distance)],
                })
            }
            DatasetKind::SoundLocalization => {
                let (clip, dir) = self.random_sound(&mut rng)?;
                Ok(Sample {
                    tensor: clip,
                    label: vec![fmt_f(dir.x), fmt_f(dir.y), fmt_f(dir.z)],
                })
            }
            DatasetKind::TactileClassification => {
                let shape = TactileShape::ALL[index % 4];
                Ok(Sample {
                    tensor: self.tactile_drop(&mut rng, shape)?,
                    label: vec![shape.name().into()],
                })
            }
        }
    }

    fn sim(&self, rng: RngStream, mode: ActionMode) -> Result<Sim> {
        Sim::new(
            self.scene.clone(),
            self.assets.clone(),
            AgentConfig {
                mode,
                ..AgentConfig::default()
            },
            PhysicsConfig::default(),
            self.audio.fs,
            rng,
        )
    }

    fn room_region(&self) -> crate::env::scene::SpawnRegion {
        let room = self.scene.rooms().next().expect("SimpleEnv has a room");
        self.scene.spawn_region(room)
    }

    /// Places one object and a camera-carrying agent so the object is in
    /// front of it. `distance` pins the object distance; otherwise it is
    /// drawn at random. Views with the object off-screen are redrawn.
    pub fn random_view(&self, rng: &mut RngStream, class: VisualClass, distance: Option<f64>) -> Result<View> {
        for _ in 0..MAX_TRIES {
            let region = self.room_region();
            let target = region.sample(rng);
            let d = distance.unwrap_or_else(|| rng.uniform(0.9, 2.4));
            let heading = rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
            let agent = target - DVec3::new(heading.sin(), 0.0, heading.cos()) * d;
            let inside =
                |p: DVec3| p.x > region.min[0] && p.x < region.max[0] && p.z > region.min[1] && p.z < region.max[1];
            let scale = rng.uniform(0.8, 1.2);
            let yaw = rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
            let color = [rng.uniform(0.2, 0.95), rng.uniform(0.2, 0.95), rng.uniform(0.2, 0.95)];
            let jitter = DVec3::new(
                rng.uniform(-0.15, 0.15),
                rng.uniform(-0.1, 0.1),
                rng.uniform(-0.15, 0.15),
            );
            if !inside(agent) {
                continue;
            }
            let spec = ViewSpec {
                class,
                object: target,
                scale,
                yaw,
                color,
                agent,
                agent_yaw: heading + rng.uniform(-0.4, 0.4),
                look_jitter: jitter,
            };
            let view = self.render_view(rng.clone(), &spec)?;
            if view.bbox.is_some() {
                return Ok(view);
            }
        }
        Err(Error::InvalidGeometry(format!(
            "no view with the {} on screen after {MAX_TRIES} tries",
            class.name()
        )))
    }

    /// Renders a fully specified view.
    pub fn render_view(&self, rng: RngStream, spec: &ViewSpec) -> Result<View> {
        let mut sim = self.sim(rng, ActionMode::Animation)?;
        let (bodies, center) = spawn_visual(&mut sim, spec)?;
        let i = sim.spawn_agent(spec.agent, spec.agent_yaw)?;
        sim.agents[i].look_toward_point(center + spec.look_jitter);
        let [(l, lr), (r, _)] = render_binocular(&sim.agents[i], &sim.world, &self.vision, &self.light);
        let camera = sim.agents[i].cyclopean_pose().position;
        Ok(View {
            bbox: bbox_of(&lr, &bodies),
            images: [l, r],
            distance: camera.distance(center),
            center,
        })
    }

    pub fn random_sound(&self, rng: &mut RngStream) -> Result<(Tensor, DVec3)> {
        let mut sim = self.sim(rng.clone(), ActionMode::Animation)?;
        let region = self.room_region();
        let pos = region.sample(rng);
        let yaw = rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
        let i = sim.spawn_agent(pos, yaw)?;
        let listener = sim.listener(i, self.audio_mode);
        let room = sim.room.clone();
        for _ in 0..MAX_TRIES {
            let az = rng.uniform(-180.0, 180.0);
            let el = rng.uniform(-20.0, 20.0);
            let dist = rng.uniform(1.0, 2.5);
            let local = crate::audio::direction(az, el) * dist;
            let src = listener.head.transform_point(local);
            if !room.as_ref().is_none_or(|r| r.contains(src)) || src.y < 0.05 {
                continue;
            }
            let clip: Arc<[f32]> = (0..SOUND_SAMPLES).map(|_| rng.uniform(-0.5, 0.5) as f32).collect();
            let (tensor, dir) = self.render_sound(&listener, src, clip, room.as_ref())?;
            return Ok((tensor, dir));
        }
        Err(Error::InvalidGeometry("no source position inside the room".into()))
    }

    /// Renders `clip` from `src` as a `[2, 4410]` stereo tensor and returns
    /// the unit head-frame direction to the source.
    pub fn render_sound(
        &self,
        listener: &crate::audio::Listener,
        src: DVec3,
        clip: Arc<[f32]>,
        room: Option<&crate::audio::RoomAcoustics>,
    ) -> Result<(Tensor, DVec3)> {
        let source = AudioSource::new(0, src, clip, 1.0, false);
        let room = room.filter(|r| listener.ears().iter().all(|&e| r.contains(e)));
        let [l, r] = spatialize(
            &source,
            listener,
            self.hrtf.as_deref(),
            room,
            &self.audio,
            SOUND_SAMPLES,
        )?;
        let data = l.iter().chain(&r).map(|v| v.clamp(-1.0, 1.0) as f32).collect();
        Ok((
            Tensor::f32(vec![2, SOUND_SAMPLES as u32], data),
            listener.local_direction(src).normalize(),
        ))
    }

    /// Drops a shape onto the agent's upturned right palm and records the
    /// hand taxels for 128 physics ticks.
    pub fn tactile_drop(&self, rng: &mut RngStream, shape: TactileShape) -> Result<Tensor> {
        let mut sim = self.sim(rng.clone(), ActionMode::Torque)?;
        let i = sim.spawn_agent(DVec3::ZERO, 0.0)?;
        let skeleton = sim.agents[i].skeleton.clone();
        let shoulder = skeleton.bone_index("r_shoulder")?;
        let palm = sim.agents[i].palm_bones()[1];
        let hand = skeleton.bone_index("r_hand")?;
        {
            let agent = &mut sim.agents[i];
            let joint = agent
                .joints
                .iter_mut()
                .find(|j| j.child_bone as usize == shoulder)
                .ok_or_else(|| Error::NotFound("r_shoulder joint".into()))?;
            // arm straight ahead turns the palm face upward
            joint.angle[0] = -std::f64::consts::FRAC_PI_2;
            agent.sync_bodies(&mut sim.world, None);
        }
        let poses = sim.agents[i].bone_poses();
        let bone = &skeleton.bones[palm];
        let top = poses[palm].transform_point(bone.box_center) + DVec3::Y * bone.box_half.z;

        let s = rng.uniform(0.85, 1.15);
        let (body_shape, half_height) = tactile_shape(shape, s);
        let drop = rng.uniform(0.02, 0.06);
        let offset = DVec3::new(rng.uniform(-0.01, 0.01), 0.0, rng.uniform(-0.01, 0.01));
        let yaw = rng.uniform(-std::f64::consts::PI, std::f64::consts::PI);
        let base_offset = if shape == TactileShape::Pyramid {
            0.0
        } else {
            half_height
        };
        sim.world.spawn(
            RigidBody::dynamic(shape.name(), 0.1, top + offset + DVec3::Y * (drop + base_offset))
                .with_orientation(DQuat::from_rotation_y(yaw)),
            body_shape,
        )?;

        let layout = &self.assets.taxels;
        let mut data = Vec::new();
        let mut width = 0;
        for _ in 0..TACTILE_STEPS {
            sim.world.step(TACTILE_DT)?;
            let reading = crate::tactile::sense_agent(&sim.agents[i], layout, &sim.world);
            let mut row = layout.by_bone(&reading, palm)?;
            row.extend(layout.by_bone(&reading, hand)?);
            width = row.len();
            data.extend(row);
        }
        Ok(Tensor::f32(vec![TACTILE_STEPS as u32, width as u32], data))
    }
}

/// Geometry of one rendered view.
#[derive(Clone, Debug)]
pub struct ViewSpec {
    pub class: VisualClass,
    /// Ground point under the object.
    pub object: DVec3,
    pub scale: f64,
    pub yaw: f64,
    pub color: [f64; 3],
    pub agent: DVec3,
    pub agent_yaw: f64,
    /// Offset of the gaze point from the object centre.
    pub look_jitter: DVec3,
}

#[derive(Clone, Debug)]
pub struct View {
    pub images: [Image; 2],
    /// `[cx, cy, h, w]` in left-eye pixels, `None` when off-screen.
    pub bbox: Option<[f64; 4]>,
    pub distance: f64,
    pub center: DVec3,
}

/// Spawns the object; returns its bodies and the centre of its vertical
/// extent.
fn spawn_visual(sim: &mut Sim, spec: &ViewSpec) -> Result<(Vec<BodyId>, DVec3)> {
    let s = spec.scale;
    let rot = DQuat::from_rotation_y(spec.yaw);
    let at = |y: f64| spec.object + DVec3::Y * y;
    let fixed = |name: &str, y: f64| {
        RigidBody::fixed(name, at(y))
            .with_color(spec.color)
            .with_orientation(rot)
    };
    let mut bodies = Vec::new();
    let height = match spec.class {
        VisualClass::Ball => {
            let r = 0.15 * s;
            bodies.push(sim.world.spawn(fixed("ball", r), Shape::Sphere { radius: r })?);
            2.0 * r
        }
        VisualClass::Pyramid => {
            let (half, h) = (0.16 * s, 0.32 * s);
            let mesh = Arc::new(TriMesh::pyramid(half, h));
            bodies.push(sim.world.spawn(fixed("pyramid", 0.0), Shape::Mesh(mesh))?);
            h
        }
        VisualClass::Doll => {
            // capsule torso with a sphere head
            let (r, hh, head) = (0.08 * s, 0.12 * s, 0.075 * s);
            let torso_top = 2.0 * (r + hh);
            bodies.push(sim.world.spawn(
                fixed("doll_torso", r + hh),
                Shape::Capsule {
                    radius: r,
                    half_height: hh,
                },
            )?);
            bodies.push(
                sim.world
                    .spawn(fixed("doll_head", torso_top + head), Shape::Sphere { radius: head })?,
            );
            torso_top + 2.0 * head
        }
    };
    Ok((bodies, at(height * 0.5)))
}

fn tactile_shape(shape: TactileShape, s: f64) -> (Shape, f64) {
    match shape {
        TactileShape::Sphere => (Shape::Sphere { radius: 0.03 * s }, 0.03 * s),
        TactileShape::Cube => (
            Shape::Box {
                half_extents: DVec3::splat(0.027 * s),
            },
            0.027 * s,
        ),
        TactileShape::Pyramid => (Shape::Mesh(Arc::new(TriMesh::pyramid(0.03 * s, 0.05 * s))), 0.025 * s),
        TactileShape::Cylinder => (
            Shape::Mesh(Arc::new(TriMesh::cylinder(0.025 * s, 0.03 * s, 12))),
            0.03 * s,
        ),
    }
}

/// `[cx, cy, h, w]` of the tight inclusive pixel box around `bodies`.
pub fn bbox_of(r: &Rendered, bodies: &[BodyId]) -> Option<[f64; 4]> {
    let (c0, r0, c1, r1) = r.mask_bounds(|id| bodies.contains(&id))?;
    let (c0, r0, c1, r1) = (c0 as f64, r0 as f64, c1 as f64 + 1.0, r1 as f64 + 1.0);
    Some([(c0 + c1) * 0.5, (r0 + r1) * 0.5, r1 - r0, c1 - c0])
}

fn image_tensor(img: &Image) -> Tensor {
    Tensor::f32(vec![img.channels, img.height, img.width], img.data.clone())
}

fn binocular_tensor(images: &[Image; 2]) -> Tensor {
    let [l, r] = images;
    let mut data = l.data.clone();
    data.extend_from_slice(&r.data);
    Tensor::f32(vec![2, l.channels, l.height, l.width], data)
}

fn fmt_f(v: f64) -> String {
    format!("{v}")
}

pub fn data_file_name(index: usize) -> String {
    format!("data_{index:06}.vten")
}

pub const MANIFEST: &str = "manifest.json";
pub const LABELS: &str = "labels.csv";

/// Generates the dataset described by `opts` into `opts.out`.
pub fn generate(opts: &GenOptions) -> Result<Manifest> {
    if opts.n == 0 {
        return Err(Error::Config("dataset size must be at least 1".into()));
    }
    std::fs::create_dir_all(&opts.out)?;
    let generator = Generator::new(opts)?;
    let rows: Vec<(FileEntry, Vec<String>)> = (0..opts.n)
        .into_par_iter()
        .map(|i| {
            let sample = generator.sample(i)?;
            let name = data_file_name(i);
            let bytes = vten::write(&opts.out.join(&name), &sample.tensor)?;
            Ok((
                FileEntry {
                    name,
                    bytes: bytes as u64,
                    shape: sample.tensor.shape.clone(),
                },
                sample.label,
            ))
        })
        .collect::<Result<_>>()?;

    let kind = opts.kind;
    let mut csv = String::from("index,file");
    for c in kind.columns() {
        csv.push(',');
        csv.push_str(c);
    }
    csv.push('\n');
    for (i, (f, label)) in rows.iter().enumerate() {
        csv.push_str(&format!("{i},{}", f.name));
        for v in label {
            csv.push(',');
            csv.push_str(v);
        }
        csv.push('\n');
    }
    std::fs::write(opts.out.join(LABELS), csv)?;

    let sensor = match kind {
        DatasetKind::SoundLocalization => serde_json::json!({
            "audio_mode": opts.audio_mode,
            "samples": SOUND_SAMPLES,
            "audio": generator.audio,
            "hrtf_file": opts.hrtf_file,
        }),
        DatasetKind::TactileClassification => serde_json::json!({
            "steps": TACTILE_STEPS,
            "dt": TACTILE_DT,
            "bones": ["r_wrist", "r_hand"],
        }),
        _ => serde_json::json!({
            "intrinsics": crate::vision::Intrinsics::default(),
            "vision": generator.vision,
            "binocular": kind != DatasetKind::Bbox,
        }),
    };
    let mut notes = Vec::new();
    if kind.classes().contains(&"doll") {
        notes.push("doll is a proxy built from a capsule torso and a sphere head".into());
    }
    if kind == DatasetKind::Bbox {
        notes.push("box is (cx, cy, h, w) in left-eye pixels".into());
    }
    if kind == DatasetKind::SoundLocalization {
        notes.push("direction is a unit vector in the head frame: +x left, +y up, +z ahead".into());
    }
    let manifest = Manifest {
        kind,
        count: opts.n,
        seed: opts.seed,
        playground: PLAYGROUND.into(),
        sensor,
        label_schema: LabelSchema {
            columns: kind.columns().iter().map(|s| s.to_string()).collect(),
            classes: kind.classes().iter().map(|s| s.to_string()).collect(),
        },
        labels: LABELS.into(),
        notes,
        files: rows.into_iter().map(|(f, _)| f).collect(),
    };
    std::fs::write(opts.out.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Checks that every listed file exists with the declared size and shape.
pub fn verify(dir: &Path) -> Result<Manifest> {
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST))?)?;
    if manifest.count == 0 || manifest.files.len() != manifest.count {
        return Err(Error::Config(format!(
            "manifest lists {} files for {} samples",
            manifest.files.len(),
            manifest.count
        )));
    }
    for f in &manifest.files {
        let path = dir.join(&f.name);
        let len = std::fs::metadata(&path)?.len();
        if len != f.bytes {
            return Err(Error::Config(format!(
                "{} is {len} bytes, manifest says {}",
                f.name, f.bytes
            )));
        }
        let t = vten::read(&path)?;
        if t.shape != f.shape {
            return Err(Error::Config(format!(
                "{} has shape {:?}, manifest says {:?}",
                f.name, t.shape, f.shape
            )));
        }
    }
    let rows = std::fs::read_to_string(dir.join(&manifest.labels))?.lines().count();
    if rows != manifest.count + 1 {
        return Err(Error::Config(format!(
            "labels file has {rows} lines for {} samples",
            manifest.count
        )));
    }
    Ok(manifest)
}
