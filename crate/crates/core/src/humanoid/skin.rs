//! Skin triangles bound to bones.

use crate::math::{DVec3, Pose};

use super::Skeleton;

#[derive(Clone, Debug, PartialEq)]
pub struct SkinTriangle {
    pub bone: usize,
    /// Vertices in the bone frame, counter-clockwise seen from outside.
    pub vertices: [DVec3; 3],
    pub normal: DVec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkinMesh {
    pub triangles: Vec<SkinTriangle>,
}

impl SkinMesh {
    pub fn build(skeleton: &Skeleton) -> SkinMesh {
        let mut triangles = Vec::new();
        if !skeleton.skin.is_empty() {
            for (bone, v) in &skeleton.skin {
                triangles.push(SkinTriangle {
                    bone: *bone,
                    vertices: *v,
                    normal: (v[1] - v[0]).cross(v[2] - v[0]).normalize(),
                });
            }
            return SkinMesh { triangles };
        }
        for (i, bone) in skeleton.bones.iter().enumerate() {
            let half = bone.box_half + DVec3::splat(skeleton.skin_depth);
            box_faces(bone.box_center, half, bone.skin_subdivisions, |v| {
                triangles.push(SkinTriangle {
                    bone: i,
                    vertices: v,
                    normal: (v[1] - v[0]).cross(v[2] - v[0]).normalize(),
                })
            });
        }
        SkinMesh { triangles }
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Triangle vertices and normal in the frame that `bone_poses` are
    /// expressed in.
    pub fn posed(&self, tri: usize, bone_poses: &[Pose]) -> ([DVec3; 3], DVec3) {
        let t = &self.triangles[tri];
        let pose = &bone_poses[t.bone];
        (
            t.vertices.map(|v| pose.transform_point(v)),
            pose.transform_vector(t.normal),
        )
    }
}

/// Emits the six faces of a box, each split into `sub × sub` quads of two
/// outward-wound triangles.
fn box_faces(center: DVec3, half: DVec3, sub: u32, mut emit: impl FnMut([DVec3; 3])) {
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut n = DVec3::ZERO;
            n[axis] = sign;
            let mut u = DVec3::ZERO;
            u[(axis + 1) % 3] = 1.0;
            let v = n.cross(u);
            let hu = half[(axis + 1) % 3];
            let hv = half.dot(v.abs());
            let face = center + n * half[axis];
            let s = sub as f64;
            let corner = |a: u32, b: u32| -> DVec3 {
                face + u * hu * (2.0 * a as f64 / s - 1.0) + v * hv * (2.0 * b as f64 / s - 1.0)
            };
            for a in 0..sub {
                for b in 0..sub {
                    let p00 = corner(a, b);
                    let p10 = corner(a + 1, b);
                    let p11 = corner(a + 1, b + 1);
                    let p01 = corner(a, b + 1);
                    emit([p00, p10, p11]);
                    emit([p00, p11, p01]);
                }
            }
        }
    }
}
