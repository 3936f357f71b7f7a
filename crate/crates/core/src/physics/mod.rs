//! Rigid-body world: integration, contacts and the agent/object rule.

mod body;
mod contact;
mod joint;
mod query;
mod shape;
mod solver;

pub use body::{BodyId, BodyRole, RigidBody};
pub use contact::{
    detect_contacts, detect_contacts_filtered, shape_contacts, sort_contacts, world_pose, Contact, ContactPoint,
};
pub use joint::{apply_torque, integrate_joints, total_dof, Joint};
pub use query::{PlacedCollider, RayHit, RayScene};
pub use shape::{Collider, Shape, TriMesh};
pub use solver::{resolve_impulse, resolve_light_heavy};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{DQuat, DVec3, Pose};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub gravity: DVec3,
    /// Objects lighter than this are pushed by agents; heavier ones push back.
    pub mass_threshold: f64,
    pub restitution: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            gravity: DVec3::new(0.0, -9.81, 0.0),
            mass_threshold: 10.0,
            restitution: 0.0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct World {
    pub config: PhysicsConfig,
    bodies: Vec<RigidBody>,
    colliders: Vec<Collider>,
    contacts: Vec<Contact>,
}

impl World {
    pub fn new(config: PhysicsConfig) -> Self {
        Self {
            config,
            ..Self::default()
        }
    }

    pub fn add_body(&mut self, mut body: RigidBody) -> BodyId {
        let id = BodyId(self.bodies.len() as u32);
        body.id = id;
        self.bodies.push(body);
        id
    }

    pub fn add_collider(&mut self, collider: Collider) -> Result<()> {
        collider.shape.validate()?;
        if collider.body.index() >= self.bodies.len() {
            return Err(Error::NotFound(format!("body {}", collider.body)));
        }
        let body = &self.bodies[collider.body.index()];
        if let Shape::Mesh(m) = &collider.shape {
            if body.is_dynamic() && !m.is_closed() {
                return Err(Error::InvalidGeometry("dynamic bodies need a closed mesh".into()));
            }
        }
        self.colliders.push(collider);
        Ok(())
    }

    /// Adds a body with a single collider at its origin.
    pub fn spawn(&mut self, body: RigidBody, shape: Shape) -> Result<BodyId> {
        let id = self.add_body(body);
        self.add_collider(Collider::new(shape, id))?;
        Ok(id)
    }

    pub fn bodies(&self) -> &[RigidBody] {
        &self.bodies
    }

    pub fn colliders(&self) -> &[Collider] {
        &self.colliders
    }

    pub fn contacts(&self) -> &[Contact] {
        &self.contacts
    }

    pub fn body(&self, id: BodyId) -> Result<&RigidBody> {
        self.bodies
            .get(id.index())
            .ok_or_else(|| Error::NotFound(format!("body {id}")))
    }

    pub fn body_mut(&mut self, id: BodyId) -> Result<&mut RigidBody> {
        self.bodies
            .get_mut(id.index())
            .ok_or_else(|| Error::NotFound(format!("body {id}")))
    }

    pub fn colliders_of(&self, id: BodyId) -> impl Iterator<Item = &Collider> {
        self.colliders.iter().filter(move |c| c.body == id)
    }

    pub fn body_pose(&self, id: BodyId) -> Pose {
        let b = &self.bodies[id.index()];
        Pose::new(b.position, b.orientation)
    }

    /// Moves a kinematic body and records the implied velocity.
    pub fn drive_kinematic(&mut self, id: BodyId, position: DVec3, orientation: DQuat, dt: f64) {
        let b = &mut self.bodies[id.index()];
        if dt > 0.0 {
            b.linear_velocity = (position - b.position) / dt;
        }
        b.position = position;
        b.orientation = orientation;
    }

    pub fn apply_impulse(&mut self, id: BodyId, impulse: DVec3) -> Result<()> {
        let b = self.body_mut(id)?;
        let w = b.inverse_mass();
        b.linear_velocity += impulse * w;
        Ok(())
    }

    /// One physics tick: integrate free bodies, then detect and resolve
    /// contacts in a single deterministic pass.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let g = self.config.gravity;
        for b in self.bodies.iter_mut().filter(|b| b.is_dynamic()) {
            b.linear_velocity += g * (b.gravity_scale * dt);
            let keep = 1.0 / (1.0 + b.linear_damping * dt);
            b.linear_velocity *= keep;
            b.angular_velocity *= keep;
            b.position += b.linear_velocity * dt;
            let w = b.angular_velocity;
            if w != DVec3::ZERO {
                let spin = DQuat::from_xyzw(w.x, w.y, w.z, 0.0) * b.orientation;
                b.orientation = (b.orientation + spin * (0.5 * dt)).normalize();
            }
        }
        self.check_finite()?;

        let contacts = detect_contacts_filtered(&self.bodies, &self.colliders, interacts)?;
        let mut resolved = Vec::with_capacity(contacts.len());
        let mut i = 0;
        while i < contacts.len() {
            // deepest contact of each pair
            let mut j = i;
            let mut deepest = i;
            while j < contacts.len()
                && (contacts[j].body_a, contacts[j].body_b) == (contacts[i].body_a, contacts[i].body_b)
            {
                if contacts[j].penetration > contacts[deepest].penetration {
                    deepest = j;
                }
                j += 1;
            }
            let mut c = contacts[deepest];
            c.impulse = self.resolve(&c);
            resolved.push(c);
            i = j;
        }
        self.contacts = resolved;
        self.check_finite()
    }

    fn check_finite(&self) -> Result<()> {
        match self.bodies.iter().find(|b| !b.is_finite()) {
            Some(b) => Err(Error::Diverged(b.id)),
            None => Ok(()),
        }
    }

    fn resolve(&mut self, c: &Contact) -> f64 {
        let (ia, ib) = (c.body_a.index(), c.body_b.index());
        let (ra, rb) = (self.bodies[ia].role, self.bodies[ib].role);
        match (ra, rb) {
            (BodyRole::AgentRoot { .. }, BodyRole::AgentRoot { .. }) => {
                let push = horizontal_push(c);
                self.bodies[ia].position -= push * 0.5;
                self.bodies[ib].position += push * 0.5;
                0.0
            }
            (BodyRole::AgentRoot { .. }, _) => self.agent_vs_object(ia, ib, c.normal, c),
            (_, BodyRole::AgentRoot { .. }) => self.agent_vs_object(ib, ia, -c.normal, c),
            (BodyRole::AgentBone { .. }, _) => self.bone_vs_object(ia, ib, c.normal, c),
            (_, BodyRole::AgentBone { .. }) => self.bone_vs_object(ib, ia, -c.normal, c),
            _ => {
                let (lo, hi) = self.bodies.split_at_mut(ib);
                resolve_impulse(&mut lo[ia], &mut hi[0], c, self.config.restitution)
            }
        }
    }

    fn agent_vs_object(&mut self, agent: usize, object: usize, normal: DVec3, c: &Contact) -> f64 {
        let mut oriented = Contact { normal, ..*c };
        let light = {
            let o = &self.bodies[object];
            !o.kinematic && o.mass < self.config.mass_threshold
        };
        if !light {
            // the root only slides on the floor, so pushes stay horizontal
            let h = DVec3::new(normal.x, 0.0, normal.z);
            if h.length_squared() < 1e-12 {
                return 0.0;
            }
            let len = h.length();
            oriented.normal = h / len;
            oriented.penetration = c.penetration * len;
        }
        let (a, o, j) = solver::resolve_light_heavy_with(
            &self.bodies[agent],
            &self.bodies[object],
            &oriented,
            self.config.mass_threshold,
            self.config.restitution,
        );
        self.bodies[agent] = a;
        self.bodies[object] = o;
        j
    }

    fn bone_vs_object(&mut self, bone: usize, object: usize, normal: DVec3, c: &Contact) -> f64 {
        let o = &self.bodies[object];
        if o.kinematic || o.mass >= self.config.mass_threshold {
            return 0.0;
        }
        let oriented = Contact { normal, ..*c };
        let (_, o, j) = solver::resolve_light_heavy_with(
            &self.bodies[bone],
            &self.bodies[object],
            &oriented,
            self.config.mass_threshold,
            self.config.restitution,
        );
        self.bodies[object] = o;
        j
    }
}

fn horizontal_push(c: &Contact) -> DVec3 {
    DVec3::new(c.normal.x, 0.0, c.normal.z) * c.penetration
}

/// Which body pairs exchange contact forces.
pub fn interacts(a: &RigidBody, b: &RigidBody) -> bool {
    use BodyRole::*;
    if let (Some(x), Some(y)) = (a.role.agent(), b.role.agent()) {
        if x == y {
            return false;
        }
    }
    for (p, q) in [(a, b), (b, a)] {
        if let (Some(holder), Some(agent)) = (p.held_by, q.role.agent()) {
            if holder == agent {
                return false;
            }
        }
    }
    match (a.role, b.role) {
        (AgentRoot { .. }, AgentRoot { .. }) => true,
        (AgentBone { .. }, AgentBone { .. }) => false,
        (AgentBone { .. }, AgentRoot { .. }) | (AgentRoot { .. }, AgentBone { .. }) => false,
        (AgentBone { .. }, Object) => b.is_dynamic(),
        (Object, AgentBone { .. }) => a.is_dynamic(),
        (AgentRoot { .. }, Object) | (Object, AgentRoot { .. }) => true,
        (Object, Object) => a.is_dynamic() || b.is_dynamic(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(world: &mut World) {
        world
            .spawn(
                RigidBody::fixed("ground", DVec3::ZERO),
                Shape::Plane {
                    normal: DVec3::Y,
                    offset: 0.0,
                },
            )
            .unwrap();
    }

    #[test]
    fn free_fall_single_step() {
        let mut w = World::new(PhysicsConfig::default());
        let id = w
            .spawn(
                RigidBody::dynamic("ball", 1.0, DVec3::new(0.0, 5.0, 0.0)),
                Shape::Sphere { radius: 0.1 },
            )
            .unwrap();
        w.step(0.004).unwrap();
        let v = w.body(id).unwrap().linear_velocity;
        assert!((v - DVec3::new(0.0, -0.03924, 0.0)).length() < 1e-15);
    }

    #[test]
    fn resting_bodies_stay_on_the_ground() {
        let mut w = World::new(PhysicsConfig::default());
        ground(&mut w);
        let ball = w
            .spawn(
                RigidBody::dynamic("ball", 1.0, DVec3::new(0.0, 0.5, 0.0)),
                Shape::Sphere { radius: 0.5 },
            )
            .unwrap();
        let crate_ = w
            .spawn(
                RigidBody::dynamic("crate", 4.0, DVec3::new(2.0, 0.25, 0.0)),
                Shape::Box {
                    half_extents: DVec3::splat(0.25),
                },
            )
            .unwrap();
        for _ in 0..250 {
            w.step(0.004).unwrap();
            for c in w.contacts() {
                assert!(c.penetration <= 1e-3, "{c:?}");
            }
            assert!(w.body(ball).unwrap().position.y > 0.5 - 1e-3);
            assert!(w.body(crate_).unwrap().position.y > 0.25 - 1e-3);
        }
    }

    #[test]
    fn orientation_stays_normalized() {
        let mut w = World::new(PhysicsConfig::default());
        let id = w
            .spawn(
                RigidBody::dynamic("spinner", 1.0, DVec3::ZERO),
                Shape::Sphere { radius: 0.1 },
            )
            .unwrap();
        w.body_mut(id).unwrap().angular_velocity = DVec3::new(3.0, -7.0, 11.0);
        for _ in 0..1000 {
            w.step(0.004).unwrap();
            assert!((w.body(id).unwrap().orientation.length() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn nan_state_reports_the_body() {
        let mut w = World::new(PhysicsConfig::default());
        ground(&mut w);
        let id = w
            .spawn(
                RigidBody::dynamic("bad", 1.0, DVec3::ONE),
                Shape::Sphere { radius: 0.1 },
            )
            .unwrap();
        w.body_mut(id).unwrap().linear_velocity.x = f64::NAN;
        assert!(matches!(w.step(0.004), Err(Error::Diverged(b)) if b == id));
    }

    #[test]
    fn open_mesh_rejected_for_dynamic_body() {
        let mut w = World::new(PhysicsConfig::default());
        let open = TriMesh::new(vec![DVec3::ZERO, DVec3::X, DVec3::Z], vec![[0, 1, 2]]).unwrap();
        let id = w.add_body(RigidBody::dynamic("sheet", 1.0, DVec3::ZERO));
        assert!(w.add_collider(Collider::new(Shape::Mesh(open.into()), id)).is_err());
    }

    #[test]
    fn agent_stops_at_heavy_wall() {
        let mut w = World::new(PhysicsConfig::default());
        w.spawn(
            RigidBody::fixed("wall", DVec3::new(0.0, 1.0, 1.0)),
            Shape::Box {
                half_extents: DVec3::new(2.0, 1.0, 0.1),
            },
        )
        .unwrap();
        let agent = w
            .spawn(
                RigidBody::fixed("agent", DVec3::new(0.0, 0.43, 0.0)).with_role(BodyRole::AgentRoot { agent: 0 }),
                Shape::Capsule {
                    radius: 0.15,
                    half_height: 0.28,
                },
            )
            .unwrap();
        for _ in 0..100 {
            let p = w.body(agent).unwrap().position + DVec3::Z * 0.02;
            w.drive_kinematic(agent, p, DQuat::IDENTITY, 0.004);
            w.step(0.004).unwrap();
        }
        let z = w.body(agent).unwrap().position.z;
        assert!((z - (0.9 - 0.15)).abs() <= 1e-3, "{z}");
    }
}
