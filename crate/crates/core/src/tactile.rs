//! Spring-skin touch: six taxels per skin triangle, each reporting how far
//! an object surface has pushed past it.

use crate::error::{Error, Result};
use crate::humanoid::{Agent, Skeleton, SkinMesh};
use crate::math::{DVec3, Pose};
use crate::physics::{RayScene, World};

/// Barycentric weights of the six taxels on a triangle: the edge midpoints,
/// then the three points leaning toward each corner.
pub const TAXEL_BARYCENTRIC: [[f64; 3]; 6] = [
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

/// Normalized response to a compression `d` of a skin with depth `d_max`.
pub fn tactile_response(d: f64, d_max: f64) -> f64 {
    if d <= 0.0 {
        0.0
    } else {
        (d / d_max).min(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taxel {
    pub triangle: usize,
    pub barycentric: [f64; 3],
    /// Bone whose core box is nearest at rest.
    pub bone: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaxelLayout {
    pub taxels: Vec<Taxel>,
    pub d_max: f64,
    /// Taxel indices per bone, ascending.
    pub by_bone: Vec<Vec<usize>>,
}

impl TaxelLayout {
    pub fn new(skeleton: &Skeleton, skin: &SkinMesh) -> TaxelLayout {
        let rest = skeleton.forward_kinematics(&skeleton.joints, crate::math::DQuat::IDENTITY);
        let mut taxels = Vec::with_capacity(skin.len() * 6);
        let mut by_bone = vec![Vec::new(); skeleton.bones.len()];
        for tri in 0..skin.len() {
            let (v, _) = skin.posed(tri, &rest);
            for bary in TAXEL_BARYCENTRIC {
                let p = v[0] * bary[0] + v[1] * bary[1] + v[2] * bary[2];
                let bone = nearest_bone(skeleton, &rest, p);
                by_bone[bone].push(taxels.len());
                taxels.push(Taxel {
                    triangle: tri,
                    barycentric: bary,
                    bone,
                });
            }
        }
        TaxelLayout {
            taxels,
            d_max: skeleton.skin_depth,
            by_bone,
        }
    }

    pub fn len(&self) -> usize {
        self.taxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taxels.is_empty()
    }

    /// Taxel positions and outward normals for the given bone frames.
    pub fn place(&self, skin: &SkinMesh, bone_poses: &[Pose]) -> Vec<(DVec3, DVec3)> {
        let mut cache: Option<(usize, [DVec3; 3], DVec3)> = None;
        self.taxels
            .iter()
            .map(|t| {
                let (v, n) = match cache {
                    Some((tri, v, n)) if tri == t.triangle => (v, n),
                    _ => {
                        let (v, n) = skin.posed(t.triangle, bone_poses);
                        cache = Some((t.triangle, v, n));
                        (v, n)
                    }
                };
                let b = t.barycentric;
                (v[0] * b[0] + v[1] * b[1] + v[2] * b[2], n)
            })
            .collect()
    }

    /// Readings of the taxels assigned to one bone.
    pub fn by_bone(&self, reading: &[f32], bone: usize) -> Result<Vec<f32>> {
        let idx = self
            .by_bone
            .get(bone)
            .ok_or_else(|| Error::NotFound(format!("bone {bone}")))?;
        Ok(idx.iter().map(|&i| reading[i]).collect())
    }
}

fn nearest_bone(skeleton: &Skeleton, rest: &[Pose], p: DVec3) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, b) in skeleton.bones.iter().enumerate() {
        let local = rest[i].inverse_transform_point(p) - b.box_center;
        let q = local.abs() - b.box_half;
        let d = q.max(DVec3::ZERO).length() + q.max_element().min(0.0);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Compression of each taxel: how far along the inward normal the nearest
/// overlapping surface has travelled past it.
pub fn displacements(scene: &RayScene, placed: &[(DVec3, DVec3)]) -> Vec<f64> {
    placed
        .iter()
        .map(|&(p, n)| {
            let mut d: f64 = 0.0;
            for c in &scene.colliders {
                if c.radius.is_finite() && c.center.distance_squared(p) > c.radius * c.radius {
                    continue;
                }
                let lo = c.pose.inverse_transform_point(p);
                let ld = c.pose.inverse_transform_vector(-n);
                if let Some((t_in, t_out)) = c.shape.ray_interval(lo, ld) {
                    if t_in <= 0.0 && t_out > 0.0 {
                        d = d.max(t_out);
                    }
                }
            }
            d
        })
        .collect()
}

pub fn sense(scene: &RayScene, placed: &[(DVec3, DVec3)], d_max: f64) -> Vec<f32> {
    displacements(scene, placed)
        .into_iter()
        .map(|d| tactile_response(d, d_max) as f32)
        .collect()
}

/// Full-body reading for an agent against everything but its own body.
pub fn sense_agent(agent: &Agent, layout: &TaxelLayout, world: &World) -> Vec<f32> {
    let placed = layout.place(&agent.skin, &agent.bone_poses());
    let scene = agent.ray_scene(world);
    sense(&scene, &placed, layout.d_max)
}
