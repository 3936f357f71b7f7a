//! Per-agent actions and their flat wire form (kind byte + f32 vector).

use crate::error::{Error, Result};
use crate::math::DVec3;

/// Speed limits applied to primitive walking.
pub const MAX_WALK_SPEED: f64 = 2.0;
pub const MAX_TURN_SPEED: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Noop,
    /// Walk and turn for this step; flags fire on the first interactable
    /// object.
    Primitive {
        walk: f64,
        turn: f64,
        kick: bool,
        grab: bool,
        release: bool,
    },
    /// Normalized joint torques, one per degree of freedom.
    Torque(Vec<f64>),
    /// Audio samples emitted from the head.
    Voice(Vec<f32>),
    LookAt(DVec3),
    ReleaseLook,
    RotateHead {
        up_down_deg: f64,
        left_right_deg: f64,
    },
}

pub mod kind {
    pub const NOOP: u8 = 0;
    pub const PRIMITIVE: u8 = 1;
    pub const TORQUE: u8 = 2;
    pub const VOICE: u8 = 3;
    pub const LOOK_AT: u8 = 4;
    pub const RELEASE_LOOK: u8 = 5;
    pub const ROTATE_HEAD: u8 = 6;
}

impl Action {
    pub fn walk(walk: f64, turn: f64) -> Action {
        Action::Primitive {
            walk,
            turn,
            kick: false,
            grab: false,
            release: false,
        }
    }

    pub fn kind(&self) -> u8 {
        match self {
            Action::Noop => kind::NOOP,
            Action::Primitive { .. } => kind::PRIMITIVE,
            Action::Torque(_) => kind::TORQUE,
            Action::Voice(_) => kind::VOICE,
            Action::LookAt(_) => kind::LOOK_AT,
            Action::ReleaseLook => kind::RELEASE_LOOK,
            Action::RotateHead { .. } => kind::ROTATE_HEAD,
        }
    }

    /// Decodes one agent's action; `agent` only labels errors.
    pub fn from_wire(agent: usize, kind: u8, v: &[f32]) -> Result<Action> {
        let expect = |n: usize| -> Result<()> {
            if v.len() == n {
                Ok(())
            } else {
                Err(Error::invalid_action(
                    agent,
                    format!("action kind {kind} takes {n} values, got {}", v.len()),
                ))
            }
        };
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid_action(agent, format!("value {i} is not finite")));
        }
        let f = |i: usize| v[i] as f64;
        Ok(match kind {
            kind::NOOP => {
                expect(0)?;
                Action::Noop
            }
            kind::PRIMITIVE => {
                expect(5)?;
                Action::Primitive {
                    walk: f(0),
                    turn: f(1),
                    kick: v[2] > 0.5,
                    grab: v[3] > 0.5,
                    release: v[4] > 0.5,
                }
            }
            kind::TORQUE => Action::Torque(v.iter().map(|&x| x as f64).collect()),
            kind::VOICE => Action::Voice(v.to_vec()),
            kind::LOOK_AT => {
                expect(3)?;
                Action::LookAt(DVec3::new(f(0), f(1), f(2)))
            }
            kind::RELEASE_LOOK => {
                expect(0)?;
                Action::ReleaseLook
            }
            kind::ROTATE_HEAD => {
                expect(2)?;
                Action::RotateHead {
                    up_down_deg: f(0),
                    left_right_deg: f(1),
                }
            }
            other => {
                return Err(Error::invalid_action(agent, format!("unknown action kind {other}")));
            }
        })
    }

    pub fn to_wire(&self) -> (u8, Vec<f32>) {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let v = match self {
            Action::Noop | Action::ReleaseLook => Vec::new(),
            Action::Primitive {
                walk,
                turn,
                kick,
                grab,
                release,
            } => vec![*walk as f32, *turn as f32, flag(*kick), flag(*grab), flag(*release)],
            Action::Torque(t) => t.iter().map(|&x| x as f32).collect(),
            Action::Voice(s) => s.clone(),
            Action::LookAt(p) => vec![p.x as f32, p.y as f32, p.z as f32],
            Action::RotateHead {
                up_down_deg,
                left_right_deg,
            } => vec![*up_down_deg as f32, *left_right_deg as f32],
        };
        (self.kind(), v)
    }

    /// The numeric action vector used by reward penalties.
    pub fn vector(&self) -> Vec<f64> {
        match self {
            Action::Torque(t) => t.clone(),
            other => other.to_wire().1.into_iter().map(f64::from).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_round_trip() {
        let actions = [
            Action::Noop,
            Action::Primitive {
                walk: 0.5,
                turn: -1.25,
                kick: true,
                grab: false,
                release: true,
            },
            Action::Torque(vec![0.25, -1.0, 0.0]),
            Action::Voice(vec![0.1, -0.2]),
            Action::LookAt(DVec3::new(1.0, 0.5, -2.0)),
            Action::ReleaseLook,
            Action::RotateHead {
                up_down_deg: 10.0,
                left_right_deg: -5.0,
            },
        ];
        for a in actions {
            let (k, v) = a.to_wire();
            assert_eq!(Action::from_wire(0, k, &v).unwrap(), a);
        }
    }

    #[test]
    fn malformed_is_rejected() {
        assert!(Action::from_wire(0, kind::PRIMITIVE, &[1.0]).is_err());
        assert!(Action::from_wire(0, kind::LOOK_AT, &[1.0, f32::NAN, 0.0]).is_err());
        assert!(Action::from_wire(0, 99, &[]).is_err());
    }
}
