use std::fmt;

use serde::{Deserialize, Serialize};

use crate::math::{DQuat, DVec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BodyId(pub u32);

impl fmt::Display for BodyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl BodyId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// What a body belongs to; drives which contact rule applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BodyRole {
    Object,
    AgentRoot { agent: u32 },
    AgentBone { agent: u32, bone: u32 },
}

impl BodyRole {
    pub fn agent(self) -> Option<u32> {
        match self {
            BodyRole::Object => None,
            BodyRole::AgentRoot { agent } | BodyRole::AgentBone { agent, .. } => Some(agent),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidBody {
    pub id: BodyId,
    pub label: String,
    pub mass: f64,
    pub position: DVec3,
    pub orientation: DQuat,
    pub linear_velocity: DVec3,
    pub angular_velocity: DVec3,
    /// Kinematic bodies are moved by their owner and ignore forces.
    pub kinematic: bool,
    /// Ignored by occlusion rays.
    pub transparent: bool,
    pub material_color: [f64; 3],
    pub linear_damping: f64,
    pub gravity_scale: f64,
    pub role: BodyRole,
    /// Agent currently carrying this body, if any.
    pub held_by: Option<u32>,
}

impl RigidBody {
    pub fn dynamic(label: impl Into<String>, mass: f64, position: DVec3) -> Self {
        Self {
            id: BodyId(u32::MAX),
            label: label.into(),
            mass,
            position,
            orientation: DQuat::IDENTITY,
            linear_velocity: DVec3::ZERO,
            angular_velocity: DVec3::ZERO,
            kinematic: false,
            transparent: false,
            material_color: [0.8, 0.8, 0.8],
            linear_damping: 0.0,
            gravity_scale: 1.0,
            role: BodyRole::Object,
            held_by: None,
        }
    }

    pub fn fixed(label: impl Into<String>, position: DVec3) -> Self {
        Self {
            kinematic: true,
            mass: f64::INFINITY,
            ..Self::dynamic(label, 1.0, position)
        }
    }

    pub fn with_color(mut self, rgb: [f64; 3]) -> Self {
        self.material_color = rgb;
        self
    }

    pub fn with_orientation(mut self, q: DQuat) -> Self {
        self.orientation = q;
        self
    }

    pub fn with_role(mut self, role: BodyRole) -> Self {
        self.role = role;
        self
    }

    pub fn with_damping(mut self, linear_damping: f64) -> Self {
        self.linear_damping = linear_damping;
        self
    }

    pub fn transparent(mut self, yes: bool) -> Self {
        self.transparent = yes;
        self
    }

    pub fn inverse_mass(&self) -> f64 {
        if self.kinematic || !(self.mass > 0.0) || self.mass.is_infinite() {
            0.0
        } else {
            1.0 / self.mass
        }
    }

    pub fn is_dynamic(&self) -> bool {
        !self.kinematic
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.linear_velocity.is_finite()
            && self.angular_velocity.is_finite()
            && self.orientation.is_finite()
    }
}
