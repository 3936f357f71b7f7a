//! Skeleton description files and forward kinematics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{vec3, DQuat, DVec3, Pose};
use crate::physics::Joint;

const SIMPLE18: &str = include_str!("../../assets/simple18.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoneDef {
    pub name: String,
    pub parent: Option<String>,
    /// Joint origin in the parent bone frame at rest.
    pub offset: [f64; 3],
    /// Rigid core box, relative to the bone frame.
    pub box_center: [f64; 3],
    pub box_half: [f64; 3],
    #[serde(default = "one")]
    pub skin_subdivisions: u32,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDef {
    pub bone: String,
    pub axes: Vec<[f64; 3]>,
    pub limits_deg: Vec<[f64; 2]>,
    #[serde(default)]
    pub rest_deg: Vec<f64>,
    pub max_torque: Vec<f64>,
    pub inertia: f64,
    #[serde(default)]
    pub damping: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapsuleDef {
    pub radius: f64,
    pub half_height: f64,
    pub center_height: f64,
}

/// Explicit skin triangle bound to a bone, vertices in that bone's frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkinTriangleDef {
    pub bone: String,
    pub vertices: [[f64; 3]; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonFile {
    pub name: String,
    pub skin_depth: f64,
    pub ipd: f64,
    /// Midpoint between the eyes in the head frame.
    pub eye_offset: [f64; 3],
    pub root_capsule: CapsuleDef,
    pub bones: Vec<BoneDef>,
    pub joints: Vec<JointDef>,
    /// When absent, the skin is each core box grown by `skin_depth`.
    #[serde(default)]
    pub skin: Vec<SkinTriangleDef>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bone {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: DVec3,
    pub box_center: DVec3,
    pub box_half: DVec3,
    pub skin_subdivisions: u32,
    /// Index into `Skeleton::joints` of the joint driving this bone.
    pub joint: Option<usize>,
}

/// Validated skeleton with joints in radians. Bones are stored parents
/// first.
#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    pub name: String,
    pub bones: Vec<Bone>,
    pub joints: Vec<Joint>,
    pub skin_depth: f64,
    pub ipd: f64,
    pub eye_offset: DVec3,
    pub root_capsule: CapsuleDef,
    pub skin: Vec<(usize, [DVec3; 3])>,
}

impl Skeleton {
    pub fn simple18() -> Arc<Skeleton> {
        let file: SkeletonFile = serde_json::from_str(SIMPLE18).expect("bundled skeleton parses");
        Arc::new(Skeleton::from_file(file).expect("bundled skeleton is valid"))
    }

    pub fn from_json(text: &str) -> Result<Skeleton> {
        Skeleton::from_file(serde_json::from_str(text)?)
    }

    pub fn from_file(file: SkeletonFile) -> Result<Skeleton> {
        let index_of = |name: &str, upto: usize| -> Result<usize> {
            file.bones[..upto]
                .iter()
                .position(|b| b.name == name)
                .ok_or_else(|| Error::Config(format!("bone {name:?} must be declared before use")))
        };
        let mut bones = Vec::with_capacity(file.bones.len());
        for (i, b) in file.bones.iter().enumerate() {
            if file.bones[..i].iter().any(|o| o.name == b.name) {
                return Err(Error::Config(format!("duplicate bone {:?}", b.name)));
            }
            let parent = match &b.parent {
                Some(p) => Some(index_of(p, i)?),
                None if i == 0 => None,
                None => return Err(Error::Config("only the first bone may be the root".into())),
            };
            let half = vec3(b.box_half);
            if half.min_element() <= 0.0 || b.skin_subdivisions == 0 {
                return Err(Error::Config(format!("bone {:?} has an empty box", b.name)));
            }
            bones.push(Bone {
                name: b.name.clone(),
                parent,
                offset: vec3(b.offset),
                box_center: vec3(b.box_center),
                box_half: half,
                skin_subdivisions: b.skin_subdivisions,
                joint: None,
            });
        }
        if bones.is_empty() {
            return Err(Error::Config("skeleton has no bones".into()));
        }
        let mut joints = Vec::with_capacity(file.joints.len());
        for jd in &file.joints {
            let bone = index_of(&jd.bone, bones.len())?;
            let parent = bones[bone]
                .parent
                .ok_or_else(|| Error::Config("the root bone cannot carry a joint".into()))?;
            if bones[bone].joint.is_some() {
                return Err(Error::Config(format!("bone {:?} has two joints", jd.bone)));
            }
            let n = jd.axes.len();
            let rest: Vec<f64> = if jd.rest_deg.is_empty() {
                vec![0.0; n]
            } else {
                jd.rest_deg.iter().map(|d| d.to_radians()).collect()
            };
            let joint = Joint {
                parent_bone: parent as u32,
                child_bone: bone as u32,
                axes: jd.axes.iter().map(|a| vec3(*a)).collect(),
                limits: jd
                    .limits_deg
                    .iter()
                    .map(|[lo, hi]| [lo.to_radians(), hi.to_radians()])
                    .collect(),
                max_torque: jd.max_torque.clone(),
                angle: rest,
                angular_velocity: vec![0.0; n],
                applied_torque: vec![0.0; n],
                inertia: jd.inertia,
                damping: jd.damping,
            };
            joint.validate()?;
            bones[bone].joint = Some(joints.len());
            joints.push(joint);
        }
        let mut skin = Vec::with_capacity(file.skin.len());
        for t in &file.skin {
            let bone = index_of(&t.bone, bones.len())?;
            skin.push((bone, t.vertices.map(vec3)));
        }
        if !(file.skin_depth > 0.0) || !(file.ipd >= 0.0) {
            return Err(Error::Config("skin depth and ipd must be positive".into()));
        }
        Ok(Skeleton {
            name: file.name,
            bones,
            joints,
            skin_depth: file.skin_depth,
            ipd: file.ipd,
            eye_offset: vec3(file.eye_offset),
            root_capsule: file.root_capsule,
            skin,
        })
    }

    pub fn total_dof(&self) -> usize {
        crate::physics::total_dof(&self.joints)
    }

    pub fn bone_index(&self, name: &str) -> Result<usize> {
        self.bones
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| Error::NotFound(format!("bone {name:?}")))
    }

    /// Bone frames in the root frame for the given joint state. `head_extra`
    /// is composed onto the bone named "head" after its joint rotation.
    pub fn forward_kinematics(&self, joints: &[Joint], head_extra: DQuat) -> Vec<Pose> {
        let mut out: Vec<Pose> = Vec::with_capacity(self.bones.len());
        for bone in &self.bones {
            let mut rot = bone.joint.map_or(DQuat::IDENTITY, |j| joints[j].rotation());
            if bone.name == "head" {
                rot *= head_extra;
            }
            let local = Pose::new(bone.offset, rot);
            let pose = match bone.parent {
                Some(p) => out[p].mul(&local),
                None => local,
            };
            out.push(pose);
        }
        out
    }
}
