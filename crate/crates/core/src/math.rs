//! Rigid transforms and frame conventions.
//!
//! World and agent frames are y-up and right-handed. An agent faces +z and
//! its left is +x; positive yaw turns it to the left.

pub use glam::{DMat3, DQuat, DVec3};
use serde::{Deserialize, Serialize};

/// Position plus orientation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: DVec3,
    pub rotation: DQuat,
}

impl Default for Pose {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: DVec3::ZERO,
        rotation: DQuat::IDENTITY,
    };

    pub fn new(position: DVec3, rotation: DQuat) -> Self {
        Self { position, rotation }
    }

    pub fn from_translation(position: DVec3) -> Self {
        Self {
            position,
            rotation: DQuat::IDENTITY,
        }
    }

    pub fn transform_point(&self, p: DVec3) -> DVec3 {
        self.position + self.rotation * p
    }

    pub fn transform_vector(&self, v: DVec3) -> DVec3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.rotation.inverse();
        Pose {
            position: inv * -self.position,
            rotation: inv,
        }
    }

    pub fn inverse_transform_point(&self, p: DVec3) -> DVec3 {
        self.rotation.inverse() * (p - self.position)
    }

    pub fn inverse_transform_vector(&self, v: DVec3) -> DVec3 {
        self.rotation.inverse() * v
    }

    /// `self * other`: apply `other` first, then `self`.
    pub fn mul(&self, other: &Pose) -> Pose {
        Pose {
            position: self.transform_point(other.position),
            rotation: (self.rotation * other.rotation).normalize(),
        }
    }

    pub fn forward(&self) -> DVec3 {
        self.rotation * DVec3::Z
    }

    pub fn left(&self) -> DVec3 {
        self.rotation * DVec3::X
    }

    pub fn up(&self) -> DVec3 {
        self.rotation * DVec3::Y
    }
}

/// Forward direction for a yaw angle: `(sin yaw, 0, cos yaw)`.
pub fn yaw_forward(yaw: f64) -> DVec3 {
    DVec3::new(yaw.sin(), 0.0, yaw.cos())
}

pub fn yaw_rotation(yaw: f64) -> DQuat {
    DQuat::from_rotation_y(yaw)
}

/// Rotation whose +z axis points along `dir`, keeping +y as close to world
/// up as possible.
pub fn look_rotation(dir: DVec3) -> DQuat {
    let f = dir.normalize_or(DVec3::Z);
    let up_hint = if f.y.abs() > 0.999 { DVec3::Z } else { DVec3::Y };
    let left = up_hint.cross(f).normalize();
    let up = f.cross(left);
    DQuat::from_mat3(&DMat3::from_cols(left, up, f)).normalize()
}

pub fn vec3(a: [f64; 3]) -> DVec3 {
    DVec3::from_array(a)
}

pub fn horizontal(v: DVec3) -> DVec3 {
    DVec3::new(v.x, 0.0, v.z)
}
