//! Collider shapes and their local-frame ray queries.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{DVec3, Pose};

/// Closed (or open) triangle soup in the collider's local frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<DVec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<DVec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let mesh = TriMesh { vertices, triangles };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::InvalidGeometry("mesh has no triangles".into()));
        }
        for t in &self.triangles {
            if t.iter().any(|&i| i as usize >= self.vertices.len()) {
                return Err(Error::InvalidGeometry("triangle index out of range".into()));
            }
            let [a, b, c] = self.corners(t);
            if (b - a).cross(c - a).length() <= 0.0 {
                return Err(Error::InvalidGeometry("degenerate triangle".into()));
            }
        }
        Ok(())
    }

    fn corners(&self, t: &[u32; 3]) -> [DVec3; 3] {
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn triangle(&self, i: usize) -> [DVec3; 3] {
        self.corners(&self.triangles[i])
    }

    /// Every undirected edge shared by exactly two triangles.
    pub fn is_closed(&self) -> bool {
        let mut edges: Vec<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        let mut i = 0;
        while i < edges.len() {
            let mut j = i;
            while j < edges.len() && edges[j] == edges[i] {
                j += 1;
            }
            if j - i != 2 {
                return false;
            }
            i = j;
        }
        true
    }

    pub fn bounding_radius(&self) -> f64 {
        self.vertices.iter().map(|v| v.length()).fold(0.0, f64::max)
    }

    /// Square pyramid with its base centred on the origin, apex up.
    pub fn pyramid(base_half: f64, height: f64) -> TriMesh {
        let h = base_half;
        let vertices = vec![
            DVec3::new(-h, 0.0, -h),
            DVec3::new(h, 0.0, -h),
            DVec3::new(h, 0.0, h),
            DVec3::new(-h, 0.0, h),
            DVec3::new(0.0, height, 0.0),
        ];
        let triangles = vec![[0, 1, 2], [0, 2, 3], [0, 4, 1], [1, 4, 2], [2, 4, 3], [3, 4, 0]];
        TriMesh { vertices, triangles }
    }

    /// Closed prism approximating a cylinder with its axis along local y.
    pub fn cylinder(radius: f64, half_height: f64, segments: u32) -> TriMesh {
        let n = segments.max(3);
        let mut vertices = Vec::with_capacity(2 * n as usize + 2);
        for k in 0..n {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            vertices.push(DVec3::new(radius * a.cos(), -half_height, radius * a.sin()));
            vertices.push(DVec3::new(radius * a.cos(), half_height, radius * a.sin()));
        }
        let bottom = vertices.len() as u32;
        vertices.push(DVec3::new(0.0, -half_height, 0.0));
        let top = bottom + 1;
        vertices.push(DVec3::new(0.0, half_height, 0.0));
        let mut triangles = Vec::new();
        for k in 0..n {
            let b0 = 2 * k;
            let t0 = b0 + 1;
            let b1 = 2 * ((k + 1) % n);
            let t1 = b1 + 1;
            triangles.push([b0, t0, b1]);
            triangles.push([b1, t0, t1]);
            triangles.push([bottom, b0, b1]);
            triangles.push([top, t1, t0]);
        }
        TriMesh { vertices, triangles }
    }
}

/// Collision shape in its local frame.
///
/// Capsules run along local y. Planes describe the half-space
/// `normal · x <= offset` (the solid side is opposite the normal).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Sphere { radius: f64 },
    Box { half_extents: DVec3 },
    Capsule { radius: f64, half_height: f64 },
    Plane { normal: DVec3, offset: f64 },
    Mesh(Arc<TriMesh>),
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Sphere { .. } => "sphere",
            Shape::Box { .. } => "box",
            Shape::Capsule { .. } => "capsule",
            Shape::Plane { .. } => "plane",
            Shape::Mesh(_) => "mesh",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Sphere { radius } => *radius > 0.0,
            Shape::Box { half_extents } => half_extents.min_element() > 0.0,
            Shape::Capsule { radius, half_height } => *radius > 0.0 && *half_height > 0.0,
            Shape::Plane { normal, offset } => (normal.length() - 1.0).abs() < 1e-9 && offset.is_finite(),
            Shape::Mesh(mesh) => return mesh.validate(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(format!(
                "{} has non-positive or non-finite dimensions",
                self.name()
            )))
        }
    }

    /// Radius of a sphere around the local origin enclosing the shape;
    /// infinite for planes.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Shape::Sphere { radius } => *radius,
            Shape::Box { half_extents } => half_extents.length(),
            Shape::Capsule { radius, half_height } => radius + half_height,
            Shape::Plane { .. } => f64::INFINITY,
            Shape::Mesh(mesh) => mesh.bounding_radius(),
        }
    }

    /// Parameter interval `[t_in, t_out]` over which the line `o + t d`
    /// (unit `d`, any sign of `t`) lies inside the shape. Infinite ends are
    /// possible for planes.
    pub fn ray_interval(&self, o: DVec3, d: DVec3) -> Option<(f64, f64)> {
        match self {
            Shape::Sphere { radius } => sphere_interval(DVec3::ZERO, *radius, o, d),
            Shape::Box { half_extents } => box_interval(*half_extents, o, d),
            Shape::Capsule { radius, half_height } => capsule_interval(*radius, *half_height, o, d),
            Shape::Plane { normal, offset } => plane_interval(*normal, *offset, o, d),
            Shape::Mesh(mesh) => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..mesh.triangles.len() {
                    if let Some(t) = ray_triangle(o, d, &mesh.triangle(i)) {
                        lo = lo.min(t);
                        hi = hi.max(t);
                    }
                }
                (lo <= hi).then_some((lo, hi))
            }
        }
    }

    /// First surface crossing with `t >= t_min` entering the shape, with the
    /// outward normal at the hit.
    pub fn ray_hit(&self, o: DVec3, d: DVec3, t_min: f64) -> Option<(f64, DVec3)> {
        match self {
            Shape::Mesh(mesh) => {
                let mut best: Option<(f64, DVec3)> = None;
                for i in 0..mesh.triangles.len() {
                    let tri = mesh.triangle(i);
                    if let Some(t) = ray_triangle(o, d, &tri) {
                        if t >= t_min && best.is_none_or(|(bt, _)| t < bt) {
                            let n = (tri[1] - tri[0]).cross(tri[2] - tri[0]).normalize();
                            best = Some((t, if n.dot(d) > 0.0 { -n } else { n }));
                        }
                    }
                }
                best
            }
            _ => {
                let (t_in, _) = self.ray_interval(o, d)?;
                if !(t_in >= t_min) || !t_in.is_finite() {
                    return None;
                }
                Some((t_in, self.normal_at(o + d * t_in)))
            }
        }
    }

    /// Outward normal at a point on (or near) the surface.
    pub fn normal_at(&self, p: DVec3) -> DVec3 {
        match self {
            Shape::Sphere { .. } => p.normalize_or(DVec3::Y),
            Shape::Box { half_extents } => {
                let r = p / *half_extents;
                let a = r.abs();
                if a.x >= a.y && a.x >= a.z {
                    DVec3::new(r.x.signum(), 0.0, 0.0)
                } else if a.y >= a.z {
                    DVec3::new(0.0, r.y.signum(), 0.0)
                } else {
                    DVec3::new(0.0, 0.0, r.z.signum())
                }
            }
            Shape::Capsule { half_height, .. } => {
                let axis = DVec3::new(0.0, p.y.clamp(-half_height, *half_height), 0.0);
                (p - axis).normalize_or(DVec3::Y)
            }
            Shape::Plane { normal, .. } => *normal,
            Shape::Mesh(mesh) => {
                let mut best = (f64::INFINITY, DVec3::Y);
                for i in 0..mesh.triangles.len() {
                    let tri = mesh.triangle(i);
                    let q = closest_point_on_triangle(p, &tri);
                    let dist = (p - q).length_squared();
                    if dist < best.0 {
                        best = (dist, (tri[1] - tri[0]).cross(tri[2] - tri[0]).normalize());
                    }
                }
                best.1
            }
        }
    }

    /// Signed distance from a local point to the surface (negative inside).
    /// Mesh distances assume a closed mesh.
    pub fn signed_distance(&self, p: DVec3) -> f64 {
        match self {
            Shape::Sphere { radius } => p.length() - radius,
            Shape::Box { half_extents } => {
                let q = p.abs() - *half_extents;
                q.max(DVec3::ZERO).length() + q.max_element().min(0.0)
            }
            Shape::Capsule { radius, half_height } => {
                let axis = DVec3::new(0.0, p.y.clamp(-half_height, *half_height), 0.0);
                (p - axis).length() - radius
            }
            Shape::Plane { normal, offset } => normal.dot(p) - offset,
            Shape::Mesh(mesh) => {
                let mut best = f64::INFINITY;
                for i in 0..mesh.triangles.len() {
                    let tri = mesh.triangle(i);
                    best = best.min((p - closest_point_on_triangle(p, &tri)).length());
                }
                if mesh_contains(mesh, p) {
                    -best
                } else {
                    best
                }
            }
        }
    }
}

/// A shape attached to a body at a fixed local offset.
#[derive(Clone, Debug, PartialEq)]
pub struct Collider {
    pub shape: Shape,
    pub body: super::BodyId,
    pub offset: Pose,
}

impl Collider {
    pub fn new(shape: Shape, body: super::BodyId) -> Self {
        Self {
            shape,
            body,
            offset: Pose::IDENTITY,
        }
    }

    pub fn with_offset(mut self, offset: Pose) -> Self {
        self.offset = offset;
        self
    }
}

pub(crate) fn sphere_interval(c: DVec3, r: f64, o: DVec3, d: DVec3) -> Option<(f64, f64)> {
    let oc = o - c;
    let b = oc.dot(d);
    let cc = oc.length_squared() - r * r;
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((-b - s, -b + s))
}

pub(crate) fn box_interval(he: DVec3, o: DVec3, d: DVec3) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for axis in 0..3 {
        let (oa, da, h) = (o[axis], d[axis], he[axis]);
        if da.abs() < 1e-300 {
            if oa < -h || oa > h {
                return None;
            }
        } else {
            let inv = 1.0 / da;
            let mut t0 = (-h - oa) * inv;
            let mut t1 = (h - oa) * inv;
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            lo = lo.max(t0);
            hi = hi.min(t1);
            if lo > hi {
                return None;
            }
        }
    }
    Some((lo, hi))
}

fn capsule_interval(r: f64, hh: f64, o: DVec3, d: DVec3) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut merge = |iv: Option<(f64, f64)>| {
        if let Some((a, b)) = iv {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    };
    merge(sphere_interval(DVec3::new(0.0, hh, 0.0), r, o, d));
    merge(sphere_interval(DVec3::new(0.0, -hh, 0.0), r, o, d));
    // infinite cylinder around y, clipped to the slab |y| <= hh
    let a = d.x * d.x + d.z * d.z;
    let b = o.x * d.x + o.z * d.z;
    let c = o.x * o.x + o.z * o.z - r * r;
    let cyl = if a < 1e-300 {
        (c <= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY))
    } else {
        let disc = b * b - a * c;
        (disc >= 0.0).then(|| {
            let s = disc.sqrt();
            ((-b - s) / a, (-b + s) / a)
        })
    };
    if let Some((c0, c1)) = cyl {
        let slab = if d.y.abs() < 1e-300 {
            (o.y.abs() <= hh).then_some((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            let t0 = (-hh - o.y) / d.y;
            let t1 = (hh - o.y) / d.y;
            Some((t0.min(t1), t0.max(t1)))
        };
        if let Some((s0, s1)) = slab {
            let (x0, x1) = (c0.max(s0), c1.min(s1));
            if x0 <= x1 {
                merge(Some((x0, x1)));
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

fn plane_interval(n: DVec3, offset: f64, o: DVec3, d: DVec3) -> Option<(f64, f64)> {
    let side = n.dot(o) - offset;
    let nd = n.dot(d);
    if nd.abs() < 1e-300 {
        return (side <= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let t0 = -side / nd;
    if nd < 0.0 {
        Some((t0, f64::INFINITY))
    } else {
        Some((f64::NEG_INFINITY, t0))
    }
}

/// Möller–Trumbore without back-face culling; returns the line parameter.
pub(crate) fn ray_triangle(o: DVec3, d: DVec3, tri: &[DVec3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = d.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = o - tri[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = d.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(q) * inv)
}

pub(crate) fn closest_point_on_triangle(p: DVec3, tri: &[DVec3; 3]) -> DVec3 {
    let [a, b, c] = *tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Parity test along a fixed skewed direction.
pub(crate) fn mesh_contains(mesh: &TriMesh, p: DVec3) -> bool {
    let d = DVec3::new(0.5773, 0.5774, 0.5775).normalize();
    let mut crossings = 0;
    for i in 0..mesh.triangles.len() {
        if let Some(t) = ray_triangle(p, d, &mesh.triangle(i)) {
            if t > 0.0 {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_interval_through_centre() {
        let (a, b) = Shape::Sphere { radius: 0.5 }
            .ray_interval(DVec3::new(0.0, 0.0, -2.0), DVec3::Z)
            .unwrap();
        assert!((a - 1.5).abs() < 1e-12 && (b - 2.5).abs() < 1e-12);
    }

    #[test]
    fn box_interval_and_normal() {
        let s = Shape::Box {
            half_extents: DVec3::new(1.0, 2.0, 3.0),
        };
        let (t, n) = s.ray_hit(DVec3::new(-5.0, 0.5, 0.0), DVec3::X, 0.0).unwrap();
        assert!((t - 4.0).abs() < 1e-12);
        assert_eq!(n, DVec3::NEG_X);
        assert!(s.ray_interval(DVec3::new(-5.0, 2.5, 0.0), DVec3::X).is_none());
    }

    #[test]
    fn capsule_interval_hits_cap_and_side() {
        let s = Shape::Capsule {
            radius: 0.2,
            half_height: 0.5,
        };
        let (a, b) = s.ray_interval(DVec3::new(0.0, 5.0, 0.0), DVec3::NEG_Y).unwrap();
        assert!((a - 4.3).abs() < 1e-12 && (b - 5.7).abs() < 1e-12);
        let (a, b) = s.ray_interval(DVec3::new(-1.0, 0.0, 0.0), DVec3::X).unwrap();
        assert!((a - 0.8).abs() < 1e-12 && (b - 1.2).abs() < 1e-12);
        assert!(s.ray_interval(DVec3::new(-1.0, 0.0, 0.3), DVec3::X).is_none());
    }

    #[test]
    fn plane_interval_is_half_infinite() {
        let s = Shape::Plane {
            normal: DVec3::Y,
            offset: 0.0,
        };
        let (a, b) = s.ray_interval(DVec3::new(0.0, 1.0, 0.0), DVec3::NEG_Y).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && b.is_infinite());
    }

    #[test]
    fn generated_meshes_are_closed() {
        assert!(TriMesh::pyramid(0.1, 0.2).is_closed());
        assert!(TriMesh::cylinder(0.1, 0.2, 12).is_closed());
        let open = TriMesh {
            vertices: vec![DVec3::ZERO, DVec3::X, DVec3::Y],
            triangles: vec![[0, 1, 2]],
        };
        assert!(!open.is_closed());
    }

    #[test]
    fn mesh_interval_matches_box_like_pyramid_base() {
        let m = Shape::Mesh(Arc::new(TriMesh::pyramid(0.5, 1.0)));
        let (a, b) = m.ray_interval(DVec3::new(0.0, -1.0, 0.0), DVec3::Y).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        assert!(m.signed_distance(DVec3::new(0.0, 0.2, 0.0)) < 0.0);
        assert!(m.signed_distance(DVec3::new(0.0, 1.2, 0.0)) > 0.0);
    }

    #[test]
    fn validation_rejects_zero_sizes() {
        assert!(Shape::Sphere { radius: 0.0 }.validate().is_err());
        assert!(Shape::Box {
            half_extents: DVec3::new(1.0, 0.0, 1.0)
        }
        .validate()
        .is_err());
        assert!(Shape::Capsule {
            radius: 0.1,
            half_height: 0.2
        }
        .validate()
        .is_ok());
    }
}
