//! The humanoid avatar: skeleton, primitive actions, joint control,
//! proprioception and the visibility/interactability predicates.

mod skeleton;
mod skin;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use skeleton::{Bone, BoneDef, CapsuleDef, JointDef, Skeleton, SkeletonFile, SkinTriangleDef};
pub use skin::{SkinMesh, SkinTriangle};

use crate::error::{Error, Result};
use crate::math::{horizontal, look_rotation, yaw_forward, yaw_rotation, DQuat, DVec3, Pose};
use crate::physics::{
    apply_torque, integrate_joints, BodyId, BodyRole, Collider, Joint, RayScene, RigidBody, Shape, World,
};
use crate::vision::Intrinsics;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    /// Kinematic walking, turning and scripted interactions.
    Animation,
    /// Normalized joint torques with the root pinned in place.
    Torque,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Eye {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub mode: ActionMode,
    pub interact_distance: f64,
    /// Impulse delivered by a kick (N·s).
    pub kick_impulse: f64,
    pub intrinsics: Intrinsics,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            mode: ActionMode::Animation,
            interact_distance: 1.5,
            kick_impulse: 2.0,
            intrinsics: Intrinsics::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Held {
    pub body: BodyId,
    /// Bone the object is attached to.
    pub bone: usize,
    /// Object pose in that bone's frame; constant while held.
    pub offset: Pose,
}

#[derive(Clone, Debug)]
pub struct Agent {
    pub index: u32,
    pub skeleton: Arc<Skeleton>,
    pub skin: Arc<SkinMesh>,
    pub config: AgentConfig,
    pub joints: Vec<Joint>,
    /// Root position on the floor.
    pub position: DVec3,
    pub yaw: f64,
    /// Root velocity commanded this control step.
    pub velocity: DVec3,
    pub head_extra: DQuat,
    pub look_target: Option<DVec3>,
    pub held: Option<Held>,
    pub root_body: BodyId,
    pub bone_bodies: Vec<BodyId>,
    substep_displacement: DVec3,
    hand_velocity: [DVec3; 2],
    palm_bones: [usize; 2],
    head_bone: usize,
}

impl Agent {
    pub fn spawn(
        world: &mut World,
        index: u32,
        skeleton: Arc<Skeleton>,
        skin: Arc<SkinMesh>,
        config: AgentConfig,
        position: DVec3,
        yaw: f64,
    ) -> Result<Agent> {
        let cap = skeleton.root_capsule;
        let root_body = world.add_body(
            RigidBody::fixed(format!("agent{index}"), position)
                .with_role(BodyRole::AgentRoot { agent: index })
                .with_color([0.9, 0.75, 0.6]),
        );
        world.add_collider(
            Collider::new(
                Shape::Capsule {
                    radius: cap.radius,
                    half_height: cap.half_height,
                },
                root_body,
            )
            .with_offset(Pose::from_translation(DVec3::Y * cap.center_height)),
        )?;
        let mut bone_bodies = Vec::with_capacity(skeleton.bones.len());
        for (i, bone) in skeleton.bones.iter().enumerate() {
            let id = world.add_body(
                RigidBody::fixed(format!("agent{index}/{}", bone.name), position)
                    .with_role(BodyRole::AgentBone {
                        agent: index,
                        bone: i as u32,
                    })
                    .with_color([0.9, 0.75, 0.6]),
            );
            world.add_collider(
                Collider::new(
                    Shape::Box {
                        half_extents: bone.box_half,
                    },
                    id,
                )
                .with_offset(Pose::from_translation(bone.box_center)),
            )?;
            bone_bodies.push(id);
        }
        let palm_bones = [skeleton.bone_index("l_wrist")?, skeleton.bone_index("r_wrist")?];
        let head_bone = skeleton.bone_index("head")?;
        let mut agent = Agent {
            index,
            joints: skeleton.joints.clone(),
            skeleton,
            skin,
            config,
            position: horizontal(position),
            yaw,
            velocity: DVec3::ZERO,
            head_extra: DQuat::IDENTITY,
            look_target: None,
            held: None,
            root_body,
            bone_bodies,
            substep_displacement: DVec3::ZERO,
            hand_velocity: [DVec3::ZERO; 2],
            palm_bones,
            head_bone,
        };
        agent.sync_bodies(world, None);
        Ok(agent)
    }

    pub fn owns(&self, body: &RigidBody) -> bool {
        body.role.agent() == Some(self.index)
    }

    pub fn root_pose(&self) -> Pose {
        Pose::new(self.position, yaw_rotation(self.yaw))
    }

    pub fn forward(&self) -> DVec3 {
        yaw_forward(self.yaw)
    }

    pub fn left(&self) -> DVec3 {
        DVec3::Y.cross(self.forward())
    }

    /// Bone frames relative to the root frame.
    pub fn bone_poses_local(&self) -> Vec<Pose> {
        self.skeleton.forward_kinematics(&self.joints, self.head_extra)
    }

    pub fn bone_poses(&self) -> Vec<Pose> {
        let root = self.root_pose();
        self.bone_poses_local().iter().map(|p| root.mul(p)).collect()
    }

    pub fn head_pose(&self) -> Pose {
        self.bone_poses()[self.head_bone]
    }

    /// Left and right eye frames; with a look target each eye turns to it.
    pub fn eye_poses(&self) -> [Pose; 2] {
        let head = self.head_pose();
        let half = self.skeleton.ipd * 0.5;
        [half, -half].map(|dx| {
            let p = head.transform_point(self.skeleton.eye_offset + DVec3::X * dx);
            let rot = match self.look_target {
                Some(t) if (t - p).length_squared() > 1e-12 => look_rotation(t - p),
                _ => head.rotation,
            };
            Pose::new(p, rot)
        })
    }

    pub fn eye_pose(&self, eye: Eye) -> Pose {
        let [l, r] = self.eye_poses();
        match eye {
            Eye::Left => l,
            Eye::Right => r,
        }
    }

    /// Midpoint between the eyes, looking along the mean gaze.
    pub fn cyclopean_pose(&self) -> Pose {
        let [l, r] = self.eye_poses();
        Pose::new((l.position + r.position) * 0.5, l.rotation.slerp(r.rotation, 0.5))
    }

    /// Places root, bones and any held object at the current state. With
    /// `dt` the kinematic velocities are refreshed too.
    pub fn sync_bodies(&mut self, world: &mut World, dt: Option<f64>) {
        let dt = dt.unwrap_or(0.0);
        let root = self.root_pose();
        world.drive_kinematic(self.root_body, self.position, root.rotation, 0.0);
        world.body_mut(self.root_body).expect("root exists").linear_velocity = self.velocity;
        let poses = self.bone_poses();
        for (k, &palm) in self.palm_bones.iter().enumerate() {
            let id = self.bone_bodies[palm];
            let before = world.body_pose(id).position;
            if dt > 0.0 {
                self.hand_velocity[k] = (poses[palm].position - before) / dt;
            }
        }
        for (pose, &id) in poses.iter().zip(&self.bone_bodies) {
            world.drive_kinematic(id, pose.position, pose.rotation, dt);
        }
        if let Some(h) = self.held {
            let p = poses[h.bone].mul(&h.offset);
            let hand = self.palm_bones.iter().position(|&b| b == h.bone).unwrap_or(1);
            let body = world.body_mut(h.body).expect("held body exists");
            body.position = p.position;
            body.orientation = p.rotation;
            body.linear_velocity = self.hand_velocity[hand];
        }
    }

    /// Sets this control step's motion: turn first, then move along the new
    /// heading. The translation is spread evenly over `substeps`.
    pub fn walk(&mut self, walk_speed: f64, turn_speed: f64, dt_control: f64, substeps: u32) -> Result<()> {
        if self.config.mode != ActionMode::Animation {
            return Err(Error::ModeConflict("walk requires animation mode".into()));
        }
        if !walk_speed.is_finite() || !turn_speed.is_finite() {
            return Err(Error::invalid_action(0, "walk parameters must be finite"));
        }
        self.yaw += turn_speed * dt_control;
        self.velocity = self.forward() * walk_speed;
        self.substep_displacement = self.velocity * (dt_control / substeps.max(1) as f64);
        Ok(())
    }

    pub fn stop(&mut self) {
        self.velocity = DVec3::ZERO;
        self.substep_displacement = DVec3::ZERO;
    }

    pub fn apply_torque(&mut self, normalized: &[f64]) -> Result<()> {
        if self.config.mode != ActionMode::Torque {
            return Err(Error::ModeConflict("joint torques require torque mode".into()));
        }
        apply_torque(&mut self.joints, normalized)
    }

    /// Advances joints and root by one physics tick, then places bodies.
    pub fn pre_physics(&mut self, world: &mut World, dt: f64) {
        integrate_joints(&mut self.joints, dt);
        self.position += self.substep_displacement;
        self.sync_bodies(world, Some(dt));
    }

    /// Adopts any push-out applied to the root by the contact solver.
    pub fn post_physics(&mut self, world: &mut World) {
        let p = world.body_pose(self.root_body).position;
        if p != self.position {
            self.position = horizontal(p);
            self.sync_bodies(world, None);
        }
    }

    pub fn look_toward_point(&mut self, target: DVec3) {
        self.look_target = Some(target);
    }

    pub fn release_look(&mut self) {
        self.look_target = None;
    }

    /// Incremental head rotation in degrees; positive `up_down` tilts the
    /// head up and positive `left_right` turns it left. Joint limits do not
    /// apply.
    pub fn rotate_head(&mut self, up_down_deg: f64, left_right_deg: f64) {
        let q = DQuat::from_rotation_y(left_right_deg.to_radians()) * DQuat::from_rotation_x(-up_down_deg.to_radians());
        self.head_extra = (self.head_extra * q).normalize();
    }

    /// Per-bone quaternions in the root frame, then joint angles, then joint
    /// angular velocities.
    pub fn proprioception(&self) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.proprio_len());
        for p in self.bone_poses_local() {
            out.extend(p.rotation.to_array().map(|v| v as f32));
        }
        for j in &self.joints {
            out.extend(j.angle.iter().map(|&v| v as f32));
        }
        for j in &self.joints {
            out.extend(j.angular_velocity.iter().map(|&v| v as f32));
        }
        out
    }

    pub fn proprio_len(&self) -> usize {
        4 * self.skeleton.bones.len() + 2 * self.skeleton.total_dof()
    }

    /// Colliders this agent can see: everything except its own body.
    pub fn ray_scene(&self, world: &World) -> RayScene {
        RayScene::capture(world, |b| !self.owns(b))
    }

    /// Object centre inside the eye frustum with no opaque body in front.
    pub fn is_visible_from(&self, world: &World, scene: &RayScene, object: BodyId, eye: Eye) -> Result<bool> {
        let center = world.body(object)?.position;
        let pose = self.eye_pose(eye);
        if !self.config.intrinsics.contains(pose.inverse_transform_point(center)) {
            return Ok(false);
        }
        Ok(!occluded(scene, pose.position, center, object, |c| !c.transparent))
    }

    pub fn is_visible(&self, world: &World, scene: &RayScene, object: BodyId) -> Result<bool> {
        Ok(self.is_visible_from(world, scene, object, Eye::Left)?
            || self.is_visible_from(world, scene, object, Eye::Right)?)
    }

    pub fn is_interactable(&self, world: &World, scene: &RayScene, object: BodyId) -> Result<bool> {
        if !self.is_visible(world, scene, object)? {
            return Ok(false);
        }
        let center = world.body(object)?.position;
        let eye = self.cyclopean_pose().position;
        if eye.distance(center) > self.config.interact_distance {
            return Ok(false);
        }
        Ok(!occluded(scene, eye, center, object, |c| c.transparent))
    }

    /// Interactable objects, closest to the gaze axis first; ties go to the
    /// nearer object, then the lower id.
    pub fn interactable_objects(&self, world: &World, scene: &RayScene) -> Result<Vec<BodyId>> {
        let gaze = self.cyclopean_pose();
        let axis = gaze.forward();
        let mut found = Vec::new();
        for b in world.bodies() {
            if b.role != BodyRole::Object || b.kinematic || b.held_by.is_some() {
                continue;
            }
            if self.is_interactable(world, scene, b.id)? {
                let to = b.position - gaze.position;
                let angle = axis.angle_between(to);
                found.push((angle, to.length(), b.id));
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        Ok(found.into_iter().map(|(_, _, id)| id).collect())
    }

    fn require_interactable(&self, world: &World, object: BodyId) -> Result<()> {
        let scene = self.ray_scene(world);
        if self.is_interactable(world, &scene, object)? {
            Ok(())
        } else {
            Err(Error::InteractionRefused(format!("body {object} is not interactable")))
        }
    }

    /// Horizontal impulse from the agent toward the object; returns it.
    pub fn kick(&mut self, world: &mut World, object: BodyId) -> Result<DVec3> {
        self.require_animation("kick")?;
        self.require_interactable(world, object)?;
        let body = world.body(object)?;
        if body.kinematic {
            return Err(Error::InteractionRefused(format!("body {object} cannot move")));
        }
        let dir = horizontal(body.position - self.position).normalize_or(self.forward());
        let impulse = dir * self.config.kick_impulse;
        world.apply_impulse(object, impulse)?;
        Ok(impulse)
    }

    pub fn grab(&mut self, world: &mut World, object: BodyId) -> Result<()> {
        self.require_animation("grab")?;
        if self.held.is_some() {
            return Err(Error::InteractionRefused("hand already full".into()));
        }
        self.require_interactable(world, object)?;
        let threshold = world.config.mass_threshold;
        let radius = world
            .colliders_of(object)
            .map(|c| c.offset.position.length() + c.shape.bounding_radius())
            .fold(0.0, f64::max);
        let body = world.body(object)?;
        if body.kinematic || body.mass >= threshold {
            return Err(Error::InteractionRefused(format!("body {object} is too heavy to grab")));
        }
        let poses = self.bone_poses();
        let hand = self
            .palm_bones
            .iter()
            .copied()
            .min_by(|&a, &b| {
                poses[a]
                    .position
                    .distance(body.position)
                    .total_cmp(&poses[b].position.distance(body.position))
            })
            .expect("two palms");
        let bone = &self.skeleton.bones[hand];
        // rest the object against the palm face
        let local = bone.box_center + DVec3::Z * (bone.box_half.z + self.skeleton.skin_depth + radius);
        let offset = Pose::new(local, poses[hand].rotation.inverse() * body.orientation);
        let body = world.body_mut(object)?;
        body.kinematic = true;
        body.held_by = Some(self.index);
        self.held = Some(Held {
            body: object,
            bone: hand,
            offset,
        });
        self.sync_bodies(world, None);
        Ok(())
    }

    /// Drops the held object with the hand's velocity; empty hands are a
    /// no-op.
    pub fn release(&mut self, world: &mut World) -> Result<Option<BodyId>> {
        let Some(h) = self.held.take() else {
            return Ok(None);
        };
        let hand = self.palm_bones.iter().position(|&b| b == h.bone).unwrap_or(1);
        let v = self.hand_velocity[hand];
        let body = world.body_mut(h.body)?;
        body.kinematic = false;
        body.held_by = None;
        body.linear_velocity = v;
        Ok(Some(h.body))
    }

    fn require_animation(&self, what: &str) -> Result<()> {
        if self.config.mode == ActionMode::Animation {
            Ok(())
        } else {
            Err(Error::ModeConflict(format!("{what} requires animation mode")))
        }
    }

    pub fn palm_bones(&self) -> [usize; 2] {
        self.palm_bones
    }
}

fn occluded(
    scene: &RayScene,
    from: DVec3,
    to: DVec3,
    target: BodyId,
    mut blocks: impl FnMut(&crate::physics::PlacedCollider) -> bool,
) -> bool {
    let delta = to - from;
    let dist = delta.length();
    if dist <= 0.0 {
        return false;
    }
    scene
        .cast(from, delta / dist, 0.0, dist, |c| c.body != target && blocks(c))
        .is_some()
}
