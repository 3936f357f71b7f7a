//! Single-pass contact resolution.

use super::{Contact, RigidBody};

/// Applies the agent/object rule to one contact whose normal points from
/// the agent into the object.
///
/// A light object takes the whole impulse and is pushed clear while the
/// agent keeps its state. Against a heavy (or immovable) object the agent
/// is pushed back along `-normal` and loses its approach velocity.
pub fn resolve_light_heavy(
    agent: &RigidBody,
    object: &RigidBody,
    contact: &Contact,
    mass_threshold: f64,
) -> (RigidBody, RigidBody) {
    let (a, o, _) = resolve_light_heavy_with(agent, object, contact, mass_threshold, 0.0);
    (a, o)
}

pub(crate) fn resolve_light_heavy_with(
    agent: &RigidBody,
    object: &RigidBody,
    contact: &Contact,
    mass_threshold: f64,
    restitution: f64,
) -> (RigidBody, RigidBody, f64) {
    let mut agent = agent.clone();
    let mut object = object.clone();
    let n = contact.normal;
    let light = !object.kinematic && object.mass < mass_threshold;
    if light {
        let vrel = (object.linear_velocity - agent.linear_velocity).dot(n);
        let mut impulse = 0.0;
        if vrel < 0.0 {
            impulse = -(1.0 + restitution) * vrel * object.mass;
            object.linear_velocity += n * (impulse / object.mass);
        }
        if contact.penetration > 0.0 {
            object.position += n * contact.penetration;
        }
        (agent, object, impulse)
    } else {
        if contact.penetration > 0.0 {
            agent.position -= n * contact.penetration;
        }
        let toward = agent.linear_velocity.dot(n);
        if toward > 0.0 {
            agent.linear_velocity -= n * toward;
        }
        (agent, object, 0.0)
    }
}

/// Impulse exchange between two bodies with restitution `e`; returns the
/// normal impulse. Immovable bodies have zero inverse mass.
pub fn resolve_impulse(a: &mut RigidBody, b: &mut RigidBody, contact: &Contact, e: f64) -> f64 {
    let wa = a.inverse_mass();
    let wb = b.inverse_mass();
    let w = wa + wb;
    if w <= 0.0 {
        return 0.0;
    }
    let n = contact.normal;
    let vrel = (b.linear_velocity - a.linear_velocity).dot(n);
    let mut j = 0.0;
    if vrel < 0.0 {
        j = -(1.0 + e) * vrel / w;
        a.linear_velocity -= n * (j * wa);
        b.linear_velocity += n * (j * wb);
    }
    if contact.penetration > 0.0 {
        let push = contact.penetration / w;
        a.position -= n * (push * wa);
        b.position += n * (push * wb);
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::DVec3;
    use crate::physics::{BodyId, BodyRole};

    fn contact(normal: DVec3, pen: f64) -> Contact {
        Contact {
            body_a: BodyId(0),
            body_b: BodyId(1),
            point: DVec3::ZERO,
            normal,
            penetration: pen,
            impulse: 0.0,
        }
    }

    fn agent(v: DVec3) -> RigidBody {
        let mut a = RigidBody::fixed("agent", DVec3::ZERO).with_role(BodyRole::AgentRoot { agent: 0 });
        a.linear_velocity = v;
        a
    }

    #[test]
    fn light_ball_takes_the_impulse() {
        let a = agent(DVec3::Z);
        let ball = RigidBody::dynamic("ball", 1.0, DVec3::new(0.0, 0.0, 0.3));
        let (a2, b2, j) = resolve_light_heavy_with(&a, &ball, &contact(DVec3::Z, 0.01), 10.0, 0.0);
        assert_eq!(a2, a);
        assert!(b2.linear_velocity.z > 0.0);
        assert!((b2.linear_velocity.z - 1.0).abs() < 1e-12);
        assert!((j - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heavy_block_pushes_agent_out() {
        let a = agent(DVec3::Z);
        let wall = RigidBody::dynamic("block", 100.0, DVec3::new(0.0, 0.0, 0.5));
        let c = contact(DVec3::Z, 0.05);
        let (a2, w2) = resolve_light_heavy(&a, &wall, &c, 10.0);
        assert_eq!(w2, wall);
        assert!((a2.position - DVec3::new(0.0, 0.0, -0.05)).length() < 1e-12);
        assert_eq!(a2.linear_velocity.z, 0.0);
    }

    #[test]
    fn resting_contact_is_a_no_op() {
        let a = agent(DVec3::ZERO);
        let ball = RigidBody::dynamic("ball", 1.0, DVec3::Z);
        let (a2, b2) = resolve_light_heavy(&a, &ball, &contact(DVec3::Z, 0.0), 10.0);
        assert_eq!((a2, b2), (a, ball));
    }

    #[test]
    fn inelastic_impulse_stops_relative_motion() {
        let mut a = RigidBody::dynamic("a", 1.0, DVec3::ZERO);
        let mut b = RigidBody::dynamic("b", 3.0, DVec3::X);
        a.linear_velocity = DVec3::X * 2.0;
        resolve_impulse(&mut a, &mut b, &contact(DVec3::X, 0.0), 0.0);
        assert!((a.linear_velocity - b.linear_velocity).length() < 1e-12);
        assert!((a.linear_velocity.x - 0.5).abs() < 1e-12);
    }
}
