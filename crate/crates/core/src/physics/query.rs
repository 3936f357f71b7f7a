//! Ray queries against a frozen snapshot of world colliders.

use super::{BodyId, RigidBody, Shape, World};
use crate::math::{DVec3, Pose};

#[derive(Clone, Debug)]
pub struct PlacedCollider {
    pub body: BodyId,
    pub shape: Shape,
    pub pose: Pose,
    pub transparent: bool,
    pub color: [f64; 3],
    /// World-space bounding sphere; planes carry an infinite radius.
    pub center: DVec3,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub body: BodyId,
    pub t: f64,
    pub point: DVec3,
    /// Outward surface normal in world space.
    pub normal: DVec3,
    pub transparent: bool,
    pub color: [f64; 3],
}

/// Colliders placed in world space once, then queried many times.
#[derive(Clone, Debug, Default)]
pub struct RayScene {
    pub colliders: Vec<PlacedCollider>,
}

impl RayScene {
    /// Snapshot every collider whose body passes `include`.
    pub fn capture(world: &World, mut include: impl FnMut(&RigidBody) -> bool) -> Self {
        let bodies = world.bodies();
        let colliders = world
            .colliders()
            .iter()
            .filter(|c| include(&bodies[c.body.index()]))
            .map(|c| {
                let body = &bodies[c.body.index()];
                let pose = super::world_pose(body, c);
                PlacedCollider {
                    body: c.body,
                    shape: c.shape.clone(),
                    pose,
                    transparent: body.transparent,
                    color: body.material_color,
                    center: pose.position,
                    radius: c.shape.bounding_radius(),
                }
            })
            .collect();
        Self { colliders }
    }

    /// Nearest surface entry along `o + t d` with `t` in `(t_min, t_max]`
    /// among colliders accepted by `accept`.
    pub fn cast(
        &self,
        o: DVec3,
        d: DVec3,
        t_min: f64,
        t_max: f64,
        mut accept: impl FnMut(&PlacedCollider) -> bool,
    ) -> Option<RayHit> {
        let mut best: Option<RayHit> = None;
        for c in &self.colliders {
            let limit = best.map_or(t_max, |b| b.t);
            if c.radius.is_finite() {
                // reject by bounding sphere before the exact test
                let oc = c.center - o;
                let along = oc.dot(d);
                let perp2 = oc.length_squared() - along * along;
                if perp2 > c.radius * c.radius || along + c.radius < t_min || along - c.radius > limit {
                    continue;
                }
            }
            if !accept(c) {
                continue;
            }
            let lo = c.pose.inverse_transform_point(o);
            let ld = c.pose.inverse_transform_vector(d);
            if let Some((t, n)) = c.shape.ray_hit(lo, ld, t_min) {
                if t <= limit {
                    best = Some(RayHit {
                        body: c.body,
                        t,
                        point: o + d * t,
                        normal: c.pose.transform_vector(n),
                        transparent: c.transparent,
                        color: c.color,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{PhysicsConfig, RigidBody};

    #[test]
    fn nearest_hit_wins_and_filters_apply() {
        let mut w = World::new(PhysicsConfig::default());
        let near = w
            .spawn(
                RigidBody::fixed("near", DVec3::new(0.0, 0.0, 2.0)).transparent(true),
                Shape::Sphere { radius: 0.5 },
            )
            .unwrap();
        let far = w
            .spawn(
                RigidBody::fixed("far", DVec3::new(0.0, 0.0, 5.0)),
                Shape::Box {
                    half_extents: DVec3::splat(0.5),
                },
            )
            .unwrap();
        let scene = RayScene::capture(&w, |_| true);
        let hit = scene.cast(DVec3::ZERO, DVec3::Z, 0.0, f64::INFINITY, |_| true).unwrap();
        assert_eq!(hit.body, near);
        assert!((hit.t - 1.5).abs() < 1e-12);
        assert!((hit.normal + DVec3::Z).length() < 1e-12);
        let hit = scene
            .cast(DVec3::ZERO, DVec3::Z, 0.0, f64::INFINITY, |c| !c.transparent)
            .unwrap();
        assert_eq!(hit.body, far);
        assert!((hit.t - 4.5).abs() < 1e-12);
        assert!(scene
            .cast(DVec3::ZERO, DVec3::Z, 0.0, 4.0, |c| !c.transparent)
            .is_none());
        assert!(scene
            .cast(DVec3::ZERO, DVec3::X, 0.0, f64::INFINITY, |_| true)
            .is_none());
    }
}
