//! Playground files: rooms with door gaps, furniture props, spawn regions
//! and the acoustic shoebox.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::RoomAcoustics;
use crate::error::{Error, Result};
use crate::math::{yaw_rotation, DVec3};
use crate::physics::{BodyId, RigidBody, Shape, World};
use crate::sim::RngStream;

const WALL_THICKNESS: f64 = 0.2;

const BUILTIN: [(&str, &str); 3] = [
    ("SimpleEnv", include_str!("../../scenes/simple.json")),
    ("SingleRoomEnv", include_str!("../../scenes/single_room.json")),
    ("HouseEnv", include_str!("../../scenes/house.json")),
];

pub fn playground_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallSide {
    #[serde(rename = "+x")]
    PosX,
    #[serde(rename = "-x")]
    NegX,
    #[serde(rename = "+z")]
    PosZ,
    #[serde(rename = "-z")]
    NegZ,
}

impl WallSide {
    const ALL: [WallSide; 4] = [WallSide::PosX, WallSide::NegX, WallSide::PosZ, WallSide::NegZ];

    /// Outward unit normal of the wall.
    pub fn normal(self) -> DVec3 {
        match self {
            WallSide::PosX => DVec3::X,
            WallSide::NegX => -DVec3::X,
            WallSide::PosZ => DVec3::Z,
            WallSide::NegZ => -DVec3::Z,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Door {
    pub wall: WallSide,
    /// World coordinate of the gap centre along the wall.
    pub center: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomDef {
    pub name: String,
    /// Floor-plan centre `(x, z)`.
    pub center: [f64; 2],
    /// Interior extent `(x, height, z)`.
    pub size: [f64; 3],
    pub wall_color: [f64; 3],
    #[serde(default)]
    pub doors: Vec<Door>,
    /// Connecting space that does not count as a room.
    #[serde(default)]
    pub hub: bool,
}

impl RoomDef {
    pub fn contains_xz(&self, p: DVec3) -> bool {
        (p.x - self.center[0]).abs() < self.size[0] * 0.5 && (p.z - self.center[1]).abs() < self.size[2] * 0.5
    }

    /// Interior rectangle shrunk by `margin` on every side.
    pub fn region(&self, margin: f64) -> SpawnRegion {
        let hx = self.size[0] * 0.5 - margin;
        let hz = self.size[2] * 0.5 - margin;
        SpawnRegion {
            room: self.name.clone(),
            min: [self.center[0] - hx, self.center[1] - hz],
            max: [self.center[0] + hx, self.center[1] + hz],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropDef {
    pub name: String,
    pub shape: Shape,
    /// Centre of the shape.
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw_deg: f64,
    pub color: [f64; 3],
    /// Absent for immovable furniture.
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub transparent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpawnRegion {
    pub room: String,
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl SpawnRegion {
    pub fn sample(&self, rng: &mut RngStream) -> DVec3 {
        DVec3::new(
            rng.uniform(self.min[0], self.max[0]),
            0.0,
            rng.uniform(self.min[1], self.max[1]),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AudioRoomDef {
    pub origin: [f64; 3],
    pub room_size: [f64; 3],
    pub beta: f64,
    #[serde(default = "default_max_order")]
    pub max_order: u32,
}

fn default_max_order() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub name: String,
    pub background: [f64; 3],
    pub floor_color: [f64; 3],
    pub rooms: Vec<RoomDef>,
    #[serde(default)]
    pub props: Vec<PropDef>,
    #[serde(default)]
    pub spawn_regions: Vec<SpawnRegion>,
    #[serde(default)]
    pub audio: Option<AudioRoomDef>,
}

impl SceneFile {
    /// A shipped playground by name.
    pub fn builtin(name: &str) -> Result<SceneFile> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::NotFound(format!("playground {name:?}")))?;
        SceneFile::from_json(text)
    }

    /// A playground name, or failing that a path to a scene file.
    pub fn resolve(name_or_path: &str) -> Result<SceneFile> {
        if BUILTIN.iter().any(|(n, _)| *n == name_or_path) {
            return SceneFile::builtin(name_or_path);
        }
        let path = Path::new(name_or_path);
        if path.is_file() {
            return SceneFile::from_file(path);
        }
        Err(Error::NotFound(format!("playground {name_or_path:?}")))
    }

    pub fn from_file(path: &Path) -> Result<SceneFile> {
        SceneFile::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<SceneFile> {
        let s: SceneFile = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rooms.is_empty() {
            return Err(Error::Config(format!("scene {} has no rooms", self.name)));
        }
        for r in &self.rooms {
            if r.size.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
                return Err(Error::Config(format!("room {} needs a positive size", r.name)));
            }
        }
        for p in &self.props {
            p.shape.validate()?;
            if p.mass.is_some_and(|m| m <= 0.0) {
                return Err(Error::Config(format!("prop {} has non-positive mass", p.name)));
            }
        }
        for s in &self.spawn_regions {
            if s.min[0] > s.max[0] || s.min[1] > s.max[1] {
                return Err(Error::Config(format!("spawn region in {} is inverted", s.room)));
            }
        }
        if let Some(a) = &self.audio {
            self.acoustics_of(a).validate()?;
        }
        Ok(())
    }

    fn acoustics_of(&self, a: &AudioRoomDef) -> RoomAcoustics {
        RoomAcoustics {
            origin: DVec3::from_array(a.origin),
            room_size: DVec3::from_array(a.room_size),
            beta: a.beta,
            max_order: a.max_order,
        }
    }

    pub fn acoustics(&self) -> Option<RoomAcoustics> {
        self.audio.as_ref().map(|a| self.acoustics_of(a))
    }

    /// Rooms proper, excluding connecting hubs.
    pub fn room_count(&self) -> usize {
        self.rooms.iter().filter(|r| !r.hub).count()
    }

    pub fn rooms(&self) -> impl Iterator<Item = &RoomDef> {
        self.rooms.iter().filter(|r| !r.hub)
    }

    /// Spawn rectangle of a room: the declared one, or the interior less a
    /// half-metre margin.
    pub fn spawn_region(&self, room: &RoomDef) -> SpawnRegion {
        self.spawn_regions
            .iter()
            .find(|s| s.room == room.name)
            .cloned()
            .unwrap_or_else(|| room.region(0.5))
    }

    /// Adds floor, walls and props to `world`.
    pub fn build(&self, world: &mut World) -> Result<SceneBodies> {
        let floor = world.spawn(
            RigidBody::fixed("floor", DVec3::ZERO).with_color(self.floor_color),
            Shape::Plane {
                normal: DVec3::Y,
                offset: 0.0,
            },
        )?;
        let mut walls = Vec::new();
        for room in &self.rooms {
            for side in WallSide::ALL {
                for (center, half) in wall_segments(room, side) {
                    walls.push(world.spawn(
                        RigidBody::fixed(format!("{}/wall", room.name), center).with_color(room.wall_color),
                        Shape::Box { half_extents: half },
                    )?);
                }
            }
        }
        let mut props = Vec::new();
        for p in &self.props {
            let pos = DVec3::from_array(p.position);
            let body = match p.mass {
                Some(m) => RigidBody::dynamic(&p.name, m, pos),
                None => RigidBody::fixed(&p.name, pos),
            }
            .with_color(p.color)
            .with_orientation(yaw_rotation(p.yaw_deg.to_radians()))
            .transparent(p.transparent);
            props.push(world.spawn(body, p.shape.clone())?);
        }
        Ok(SceneBodies { floor, walls, props })
    }

    /// Horizontal footprints `(centre, radius)` of every prop.
    pub fn footprints(&self) -> Vec<(DVec3, f64)> {
        self.props
            .iter()
            .map(|p| {
                let c = DVec3::from_array(p.position);
                (DVec3::new(c.x, 0.0, c.z), p.shape.bounding_radius())
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneBodies {
    pub floor: BodyId,
    pub walls: Vec<BodyId>,
    pub props: Vec<BodyId>,
}

/// Box centres and half extents of one wall, split around its doors. Walls
/// sit just outside the interior and overlap at the corners.
fn wall_segments(room: &RoomDef, side: WallSide) -> Vec<(DVec3, DVec3)> {
    let [sx, h, sz] = room.size;
    let [cx, cz] = room.center;
    let t = WALL_THICKNESS;
    let along_x = matches!(side, WallSide::PosZ | WallSide::NegZ);
    let (c_tan, half_tan, c_norm, half_norm) = if along_x {
        (cx, sx * 0.5, cz, sz * 0.5)
    } else {
        (cz, sz * 0.5, cx, sx * 0.5)
    };
    let sign = match side {
        WallSide::PosX | WallSide::PosZ => 1.0,
        WallSide::NegX | WallSide::NegZ => -1.0,
    };
    let normal_pos = c_norm + sign * (half_norm + t * 0.5);
    let mut spans = vec![(c_tan - half_tan - t, c_tan + half_tan + t)];
    let mut doors: Vec<&Door> = room.doors.iter().filter(|d| d.wall == side).collect();
    doors.sort_by(|a, b| a.center.total_cmp(&b.center));
    for d in doors {
        let (lo, hi) = (d.center - d.width * 0.5, d.center + d.width * 0.5);
        spans = spans
            .into_iter()
            .flat_map(|(a, b)| [(a, b.min(lo)), (a.max(hi), b)])
            .filter(|(a, b)| b - a > 1e-6)
            .collect();
    }
    spans
        .into_iter()
        .map(|(a, b)| {
            let mid = (a + b) * 0.5;
            let half_len = (b - a) * 0.5;
            if along_x {
                (
                    DVec3::new(mid, h * 0.5, normal_pos),
                    DVec3::new(half_len, h * 0.5, t * 0.5),
                )
            } else {
                (
                    DVec3::new(normal_pos, h * 0.5, mid),
                    DVec3::new(t * 0.5, h * 0.5, half_len),
                )
            }
        })
        .collect()
}

/// Uniform point in `region` whose horizontal disc of `radius` clears every
/// occupied disc, by bounded rejection sampling.
pub fn free_spot(rng: &mut RngStream, region: &SpawnRegion, radius: f64, occupied: &[(DVec3, f64)]) -> Result<DVec3> {
    for _ in 0..256 {
        let p = region.sample(rng);
        if occupied.iter().all(|&(c, r)| horizontal_distance(c, p) > r + radius) {
            return Ok(p);
        }
    }
    Err(Error::Config(format!(
        "no free spot of radius {radius} in room {}",
        region.room
    )))
}

pub fn horizontal_distance(a: DVec3, b: DVec3) -> f64 {
    let d = a - b;
    (d.x * d.x + d.z * d.z).sqrt()
}
