//! Narrow-phase contact generation.
//!
//! Every pair returns contacts with the normal pointing from the first
//! shape into the second and a non-negative penetration depth.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::shape::{closest_point_on_triangle, mesh_contains, Shape, TriMesh};
use super::{BodyId, Collider, RigidBody};
use crate::error::{Error, Result};
use crate::math::{DVec3, Pose};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub body_a: BodyId,
    pub body_b: BodyId,
    pub point: DVec3,
    /// Unit normal from `body_a` into `body_b`.
    pub normal: DVec3,
    pub penetration: f64,
    /// Normal impulse applied during resolution (N·s).
    pub impulse: f64,
}

/// Contact geometry before it is tagged with body ids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactPoint {
    pub point: DVec3,
    pub normal: DVec3,
    pub penetration: f64,
}

impl ContactPoint {
    fn flipped(self) -> Self {
        Self {
            normal: -self.normal,
            ..self
        }
    }
}

pub fn world_pose(body: &RigidBody, collider: &Collider) -> Pose {
    Pose::new(body.position, body.orientation).mul(&collider.offset)
}

/// All contacts between colliders of distinct bodies, sorted by
/// `(body_a, body_b, point)`.
pub fn detect_contacts(bodies: &[RigidBody], colliders: &[Collider]) -> Result<Vec<Contact>> {
    detect_contacts_filtered(bodies, colliders, |_, _| true)
}

pub fn detect_contacts_filtered(
    bodies: &[RigidBody],
    colliders: &[Collider],
    mut keep: impl FnMut(&RigidBody, &RigidBody) -> bool,
) -> Result<Vec<Contact>> {
    let lookup = |id: BodyId| -> Result<&RigidBody> {
        bodies
            .get(id.index())
            .filter(|b| b.id == id)
            .ok_or_else(|| Error::NotFound(format!("collider references missing body {id}")))
    };
    let mut placed = Vec::with_capacity(colliders.len());
    for c in colliders {
        let body = lookup(c.body)?;
        placed.push((c, body, world_pose(body, c)));
    }
    let mut out = Vec::new();
    for i in 0..placed.len() {
        for j in i + 1..placed.len() {
            let (ca, ba, pa) = &placed[i];
            let (cb, bb, pb) = &placed[j];
            if ba.id == bb.id {
                continue;
            }
            // a lower id always plays body_a
            let (ca, ba, pa, cb, bb, pb) = if ba.id < bb.id {
                (ca, ba, pa, cb, bb, pb)
            } else {
                (cb, bb, pb, ca, ba, pa)
            };
            if !keep(ba, bb) {
                continue;
            }
            check_supported(&ca.shape, &cb.shape)?;
            if !bounds_overlap(&ca.shape, pa, &cb.shape, pb) {
                continue;
            }
            for cp in shape_contacts(&ca.shape, pa, &cb.shape, pb)? {
                out.push(Contact {
                    body_a: ba.id,
                    body_b: bb.id,
                    point: cp.point,
                    normal: cp.normal,
                    penetration: cp.penetration.max(0.0),
                    impulse: 0.0,
                });
            }
        }
    }
    sort_contacts(&mut out);
    Ok(out)
}

pub fn sort_contacts(contacts: &mut [Contact]) {
    contacts.sort_by(|a, b| {
        (a.body_a, a.body_b)
            .cmp(&(b.body_a, b.body_b))
            .then_with(|| cmp_vec(a.point, b.point))
    });
}

fn cmp_vec(a: DVec3, b: DVec3) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z))
}

fn rank(s: &Shape) -> u8 {
    match s {
        Shape::Plane { .. } => 0,
        Shape::Sphere { .. } => 1,
        Shape::Capsule { .. } => 2,
        Shape::Box { .. } => 3,
        Shape::Mesh(_) => 4,
    }
}

fn check_supported(a: &Shape, b: &Shape) -> Result<()> {
    match (rank(a).min(rank(b)), rank(a).max(rank(b))) {
        (0, 0) | (4, 4) => Err(Error::UnsupportedPair(a.name(), b.name())),
        _ => Ok(()),
    }
}

fn bounds_overlap(a: &Shape, pa: &Pose, b: &Shape, pb: &Pose) -> bool {
    match (a, b) {
        (Shape::Plane { .. }, Shape::Plane { .. }) => true,
        (Shape::Plane { normal, offset }, other) | (other, Shape::Plane { normal, offset }) => {
            let (plane_pose, other_pose) = if matches!(a, Shape::Plane { .. }) {
                (pa, pb)
            } else {
                (pb, pa)
            };
            let (n, d) = world_plane(plane_pose, *normal, *offset);
            n.dot(other_pose.position) - d <= other.bounding_radius()
        }
        _ => {
            let r = a.bounding_radius() + b.bounding_radius();
            pa.position.distance_squared(pb.position) <= r * r
        }
    }
}

fn world_plane(pose: &Pose, normal: DVec3, offset: f64) -> (DVec3, f64) {
    let n = pose.transform_vector(normal);
    (n, offset + n.dot(pose.position))
}

/// Contacts between two placed shapes, normal from `a` into `b`.
pub fn shape_contacts(a: &Shape, pa: &Pose, b: &Shape, pb: &Pose) -> Result<Vec<ContactPoint>> {
    check_supported(a, b)?;
    if rank(a) > rank(b) {
        return Ok(shape_contacts(b, pb, a, pa)?
            .into_iter()
            .map(ContactPoint::flipped)
            .collect());
    }
    let out = match (a, b) {
        (Shape::Plane { normal, offset }, _) => {
            let (n, d) = world_plane(pa, *normal, *offset);
            plane_vs(n, d, b, pb)
        }
        (Shape::Sphere { radius }, _) => sphere_vs(pa.position, *radius, b, pb),
        (Shape::Capsule { radius, half_height }, _) => {
            let (s0, s1) = capsule_segment(pa, *half_height);
            capsule_vs(s0, s1, *radius, b, pb)
        }
        (Shape::Box { half_extents }, Shape::Box { half_extents: hb }) => {
            box_box(pa, *half_extents, pb, *hb).into_iter().collect()
        }
        (Shape::Box { half_extents }, Shape::Mesh(mesh)) => box_mesh(pa, *half_extents, pb, mesh),
        _ => unreachable!("pair ordering covers every supported combination"),
    };
    Ok(out)
}

fn capsule_segment(pose: &Pose, hh: f64) -> (DVec3, DVec3) {
    (
        pose.transform_point(DVec3::new(0.0, -hh, 0.0)),
        pose.transform_point(DVec3::new(0.0, hh, 0.0)),
    )
}

fn plane_vs(n: DVec3, d: f64, b: &Shape, pb: &Pose) -> Vec<ContactPoint> {
    let point_contact = |p: DVec3, r: f64| -> Option<ContactPoint> {
        let side = n.dot(p) - d;
        let pen = r - side;
        (pen >= 0.0).then(|| ContactPoint {
            // midway between the plane surface and the deepest point
            point: p - n * (side + r) * 0.5,
            normal: n,
            penetration: pen,
        })
    };
    match b {
        Shape::Sphere { radius } => point_contact(pb.position, *radius).into_iter().collect(),
        Shape::Capsule { radius, half_height } => {
            let (s0, s1) = capsule_segment(pb, *half_height);
            [s0, s1].into_iter().filter_map(|p| point_contact(p, *radius)).collect()
        }
        Shape::Box { half_extents } => box_vertices(pb, *half_extents)
            .into_iter()
            .filter_map(|p| point_contact(p, 0.0))
            .collect(),
        Shape::Mesh(mesh) => mesh
            .vertices
            .iter()
            .filter_map(|v| point_contact(pb.transform_point(*v), 0.0))
            .collect(),
        Shape::Plane { .. } => Vec::new(),
    }
}

fn sphere_sphere(ca: DVec3, ra: f64, cb: DVec3, rb: f64) -> Option<ContactPoint> {
    let delta = cb - ca;
    let dist = delta.length();
    let pen = ra + rb - dist;
    if pen < 0.0 {
        return None;
    }
    let n = if dist > 1e-12 { delta / dist } else { DVec3::Y };
    Some(ContactPoint {
        point: ca + n * (ra - pen * 0.5),
        normal: n,
        penetration: pen,
    })
}

fn sphere_vs(c: DVec3, r: f64, b: &Shape, pb: &Pose) -> Vec<ContactPoint> {
    match b {
        Shape::Sphere { radius } => sphere_sphere(c, r, pb.position, *radius).into_iter().collect(),
        Shape::Capsule { radius, half_height } => {
            let (s0, s1) = capsule_segment(pb, *half_height);
            let q = closest_on_segment(c, s0, s1);
            sphere_sphere(c, r, q, *radius).into_iter().collect()
        }
        Shape::Box { half_extents } => sphere_box(c, r, pb, *half_extents).into_iter().collect(),
        Shape::Mesh(mesh) => sphere_mesh(c, r, pb, mesh).into_iter().collect(),
        Shape::Plane { .. } => Vec::new(),
    }
}

fn sphere_box(c: DVec3, r: f64, pose: &Pose, he: DVec3) -> Option<ContactPoint> {
    let local = pose.inverse_transform_point(c);
    let q = local.clamp(-he, he);
    let outside = local - q;
    let (n_local, pen, surface) = if outside.length_squared() > 0.0 {
        let dist = outside.length();
        if dist > r {
            return None;
        }
        (outside / dist, r - dist, q)
    } else {
        // centre inside: leave through the nearest face
        let depth = he - local.abs();
        let axis = if depth.x <= depth.y && depth.x <= depth.z {
            0
        } else if depth.y <= depth.z {
            1
        } else {
            2
        };
        let mut n = DVec3::ZERO;
        n[axis] = if local[axis] >= 0.0 { 1.0 } else { -1.0 };
        let mut s = local;
        s[axis] = n[axis] * he[axis];
        (n, r + depth[axis], s)
    };
    // box outward normal points at the sphere; sphere -> box is the opposite
    let n = pose.transform_vector(n_local);
    let surface = pose.transform_point(surface);
    Some(ContactPoint {
        point: (surface + c - n * r) * 0.5,
        normal: -n,
        penetration: pen,
    })
}

fn sphere_mesh(c: DVec3, r: f64, pose: &Pose, mesh: &TriMesh) -> Option<ContactPoint> {
    let local = pose.inverse_transform_point(c);
    let mut best = (f64::INFINITY, DVec3::ZERO);
    for i in 0..mesh.triangles.len() {
        let q = closest_point_on_triangle(local, &mesh.triangle(i));
        let d = local.distance(q);
        if d < best.0 {
            best = (d, q);
        }
    }
    let (dist, q) = best;
    let inside = mesh_contains(mesh, local);
    let pen = if inside { r + dist } else { r - dist };
    if pen < 0.0 {
        return None;
    }
    let toward_surface = if dist > 1e-12 { (q - local) / dist } else { DVec3::Y };
    // sphere leaves along -normal
    let n_local = if inside { -toward_surface } else { toward_surface };
    Some(ContactPoint {
        point: pose.transform_point(q),
        normal: pose.transform_vector(n_local),
        penetration: pen,
    })
}

fn capsule_vs(s0: DVec3, s1: DVec3, r: f64, b: &Shape, pb: &Pose) -> Vec<ContactPoint> {
    match b {
        Shape::Capsule { radius, half_height } => {
            let (t0, t1) = capsule_segment(pb, *half_height);
            let (p, q) = closest_between_segments(s0, s1, t0, t1);
            sphere_sphere(p, r, q, *radius).into_iter().collect()
        }
        Shape::Box { half_extents } => {
            let local0 = pb.inverse_transform_point(s0);
            let local1 = pb.inverse_transform_point(s1);
            let sdf = Shape::Box {
                half_extents: *half_extents,
            };
            let t = golden_min(|t| sdf.signed_distance(local0.lerp(local1, t)));
            sphere_box(s0.lerp(s1, t), r, pb, *half_extents).into_iter().collect()
        }
        Shape::Mesh(mesh) => {
            // deepest of a few spheres swept along the axis
            (0..=8)
                .filter_map(|k| sphere_mesh(s0.lerp(s1, k as f64 / 8.0), r, pb, mesh))
                .max_by(|a, b| a.penetration.total_cmp(&b.penetration))
                .into_iter()
                .collect()
        }
        _ => Vec::new(),
    }
}

fn golden_min(f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [0.0, 1.0, mid]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(mid)
}

pub(crate) fn closest_on_segment(p: DVec3, a: DVec3, b: DVec3) -> DVec3 {
    let ab = b - a;
    let len2 = ab.length_squared();
    if len2 <= 0.0 {
        return a;
    }
    a + ab * ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
}

fn closest_between_segments(p1: DVec3, q1: DVec3, p2: DVec3, q2: DVec3) -> (DVec3, DVec3) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.length_squared();
    let e = d2.length_squared();
    let f = d2.dot(r);
    let (s, t);
    if a <= 1e-18 && e <= 1e-18 {
        return (p1, p2);
    }
    if a <= 1e-18 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= 1e-18 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let s0 = if denom > 1e-18 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

fn box_vertices(pose: &Pose, he: DVec3) -> [DVec3; 8] {
    let mut out = [DVec3::ZERO; 8];
    for (i, v) in out.iter_mut().enumerate() {
        let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
        let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
        let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
        *v = pose.transform_point(DVec3::new(sx * he.x, sy * he.y, sz * he.z));
    }
    out
}

fn inside_box(pose: &Pose, he: DVec3, p: DVec3) -> bool {
    let l = pose.inverse_transform_point(p).abs();
    l.x <= he.x && l.y <= he.y && l.z <= he.z
}

/// Separating-axis test over the 15 candidate axes.
fn box_box(pa: &Pose, ha: DVec3, pb: &Pose, hb: DVec3) -> Option<ContactPoint> {
    let axes_a = [pa.left(), pa.up(), pa.forward()];
    let axes_b = [pb.left(), pb.up(), pb.forward()];
    let delta = pb.position - pa.position;
    let mut best: Option<(f64, DVec3)> = None;
    let mut candidates: Vec<(DVec3, f64)> = Vec::with_capacity(15);
    for a in axes_a.iter().chain(axes_b.iter()) {
        candidates.push((*a, 1.0));
    }
    for a in &axes_a {
        for b in &axes_b {
            let c = a.cross(*b);
            if c.length_squared() > 1e-12 {
                // slight bias toward face axes keeps resting contacts stable
                candidates.push((c.normalize(), 1.0001));
            }
        }
    }
    for (axis, bias) in candidates {
        let ra: f64 = (0..3).map(|i| ha[i] * axes_a[i].dot(axis).abs()).sum();
        let rb: f64 = (0..3).map(|i| hb[i] * axes_b[i].dot(axis).abs()).sum();
        let dist = delta.dot(axis);
        let overlap = ra + rb - dist.abs();
        if overlap < 0.0 {
            return None;
        }
        let n = if dist >= 0.0 { axis } else { -axis };
        if best.is_none_or(|(o, _)| overlap * bias < o) {
            best = Some((overlap * bias, n));
        }
    }
    let (biased, normal) = best?;
    let pen = if biased > 0.0 {
        // undo the bias for the reported depth
        let ra: f64 = (0..3).map(|i| ha[i] * axes_a[i].dot(normal).abs()).sum();
        let rb: f64 = (0..3).map(|i| hb[i] * axes_b[i].dot(normal).abs()).sum();
        ra + rb - delta.dot(normal).abs()
    } else {
        0.0
    };
    let mut inside: Vec<DVec3> = box_vertices(pb, hb)
        .into_iter()
        .filter(|v| inside_box(pa, ha, *v))
        .collect();
    inside.extend(box_vertices(pa, ha).into_iter().filter(|v| inside_box(pb, hb, *v)));
    let point = if inside.is_empty() {
        (pa.position + pb.position) * 0.5
    } else {
        inside.iter().copied().sum::<DVec3>() / inside.len() as f64
    };
    Some(ContactPoint {
        point,
        normal,
        penetration: pen.max(0.0),
    })
}

fn box_mesh(pa: &Pose, he: DVec3, pb: &Pose, mesh: &TriMesh) -> Vec<ContactPoint> {
    let mut out = Vec::new();
    for v in &mesh.vertices {
        let w = pb.transform_point(*v);
        let l = pa.inverse_transform_point(w);
        let depth = he - l.abs();
        if depth.min_element() < 0.0 {
            continue;
        }
        let axis = if depth.x <= depth.y && depth.x <= depth.z {
            0
        } else if depth.y <= depth.z {
            1
        } else {
            2
        };
        let mut n = DVec3::ZERO;
        n[axis] = if l[axis] >= 0.0 { 1.0 } else { -1.0 };
        out.push(ContactPoint {
            point: w,
            normal: pa.transform_vector(n),
            penetration: depth[axis],
        });
    }
    for w in box_vertices(pa, he) {
        let l = pb.inverse_transform_point(w);
        if !mesh_contains(mesh, l) {
            continue;
        }
        let mut best = (f64::INFINITY, DVec3::Y);
        for i in 0..mesh.triangles.len() {
            let tri = mesh.triangle(i);
            let d = l.distance(closest_point_on_triangle(l, &tri));
            if d < best.0 {
                best = (d, (tri[1] - tri[0]).cross(tri[2] - tri[0]).normalize());
            }
        }
        out.push(ContactPoint {
            point: w,
            normal: -pb.transform_vector(best.1),
            penetration: best.0,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::DQuat;

    fn at(x: f64, y: f64, z: f64) -> Pose {
        Pose::from_translation(DVec3::new(x, y, z))
    }

    #[test]
    fn overlapping_spheres() {
        let s = Shape::Sphere { radius: 0.5 };
        let c = shape_contacts(&s, &at(0.0, 0.0, 0.0), &s, &at(0.8, 0.0, 0.0)).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].penetration - 0.2).abs() < 1e-12);
        assert!((c[0].normal - DVec3::X).length() < 1e-12);
    }

    #[test]
    fn touching_spheres_report_zero_depth() {
        let s = Shape::Sphere { radius: 0.5 };
        let c = shape_contacts(&s, &at(0.0, 0.0, 0.0), &s, &at(1.0, 0.0, 0.0)).unwrap();
        assert!(c.iter().all(|c| c.penetration.abs() < 1e-12));
        let c = shape_contacts(&s, &at(0.0, 0.0, 0.0), &s, &at(1.01, 0.0, 0.0)).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn sphere_on_ground_plane() {
        let plane = Shape::Plane {
            normal: DVec3::Y,
            offset: 0.0,
        };
        let s = Shape::Sphere { radius: 0.5 };
        let c = shape_contacts(&plane, &Pose::IDENTITY, &s, &at(0.0, 0.3, 0.0)).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].penetration - 0.2).abs() < 1e-12);
        assert!((c[0].normal - DVec3::Y).length() < 1e-12);
        // reversed order flips the normal only
        let r = shape_contacts(&s, &at(0.0, 0.3, 0.0), &plane, &Pose::IDENTITY).unwrap();
        assert!((r[0].normal + DVec3::Y).length() < 1e-12);
        assert_eq!(r[0].penetration, c[0].penetration);
    }

    #[test]
    fn sphere_box_from_side_and_inside() {
        let b = Shape::Box {
            half_extents: DVec3::splat(0.5),
        };
        let s = Shape::Sphere { radius: 0.2 };
        let c = shape_contacts(&s, &at(0.6, 0.0, 0.0), &b, &Pose::IDENTITY).unwrap();
        assert!((c[0].penetration - 0.1).abs() < 1e-12);
        assert!((c[0].normal - DVec3::NEG_X).length() < 1e-12);
        let c = shape_contacts(&s, &at(0.4, 0.0, 0.0), &b, &Pose::IDENTITY).unwrap();
        assert!((c[0].penetration - 0.3).abs() < 1e-12);
    }

    #[test]
    fn resting_box_on_plane_has_four_contacts() {
        let plane = Shape::Plane {
            normal: DVec3::Y,
            offset: 0.0,
        };
        let b = Shape::Box {
            half_extents: DVec3::splat(0.5),
        };
        let c = shape_contacts(&plane, &Pose::IDENTITY, &b, &at(0.0, 0.49, 0.0)).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|c| (c.penetration - 0.01).abs() < 1e-12));
    }

    #[test]
    fn stacked_boxes_separate_along_y() {
        let b = Shape::Box {
            half_extents: DVec3::splat(0.5),
        };
        let c = shape_contacts(&b, &Pose::IDENTITY, &b, &at(0.1, 0.95, 0.0)).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].normal - DVec3::Y).length() < 1e-9);
        assert!((c[0].penetration - 0.05).abs() < 1e-9);
        let rotated = Pose::new(DVec3::new(0.0, 2.0, 0.0), DQuat::from_rotation_y(0.4));
        assert!(shape_contacts(&b, &Pose::IDENTITY, &b, &rotated).unwrap().is_empty());
    }

    #[test]
    fn capsule_pairs() {
        let cap = Shape::Capsule {
            radius: 0.1,
            half_height: 0.5,
        };
        let plane = Shape::Plane {
            normal: DVec3::Y,
            offset: 0.0,
        };
        let lying = Pose::new(
            DVec3::new(0.0, 0.09, 0.0),
            DQuat::from_rotation_z(std::f64::consts::FRAC_PI_2),
        );
        let c = shape_contacts(&plane, &Pose::IDENTITY, &cap, &lying).unwrap();
        assert_eq!(c.len(), 2);
        let b = Shape::Box {
            half_extents: DVec3::splat(0.5),
        };
        let c = shape_contacts(&cap, &at(0.0, 1.05, 0.0), &b, &Pose::IDENTITY).unwrap();
        assert!((c[0].penetration - 0.05).abs() < 1e-6, "{c:?}");
        let c = shape_contacts(&cap, &at(0.0, 0.0, 0.0), &cap, &at(0.15, 0.0, 0.0)).unwrap();
        assert!((c[0].penetration - 0.05).abs() < 1e-12);
    }

    #[test]
    fn mesh_pairs_and_unsupported() {
        let m = Shape::Mesh(std::sync::Arc::new(TriMesh::pyramid(0.5, 1.0)));
        let s = Shape::Sphere { radius: 0.2 };
        let c = shape_contacts(&s, &at(0.0, -0.1, 0.0), &m, &Pose::IDENTITY).unwrap();
        assert!((c[0].penetration - 0.1).abs() < 1e-12);
        assert!((c[0].normal - DVec3::Y).length() < 1e-12);
        let plane = Shape::Plane {
            normal: DVec3::Y,
            offset: 0.0,
        };
        let c = shape_contacts(&plane, &Pose::IDENTITY, &m, &at(0.0, -0.01, 0.0)).unwrap();
        assert_eq!(c.len(), 4);
        assert!(matches!(
            shape_contacts(&m, &Pose::IDENTITY, &m, &Pose::IDENTITY),
            Err(Error::UnsupportedPair(..))
        ));
        assert!(matches!(
            shape_contacts(&plane, &Pose::IDENTITY, &plane, &Pose::IDENTITY),
            Err(Error::UnsupportedPair(..))
        ));
        let b = Shape::Box {
            half_extents: DVec3::new(0.6, 0.1, 0.6),
        };
        let c = shape_contacts(&b, &Pose::IDENTITY, &m, &at(0.0, 0.08, 0.0)).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|c| (c.penetration - 0.02).abs() < 1e-12));
        assert!(c.iter().all(|c| (c.normal - DVec3::Y).length() < 1e-12));
    }
}
