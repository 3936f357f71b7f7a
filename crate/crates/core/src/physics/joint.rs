//! Hinge/ball joints with per-axis limits, driven by normalized torques.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{DQuat, DVec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub parent_bone: u32,
    pub child_bone: u32,
    /// 1 to 3 orthonormal axes in the parent bone frame.
    pub axes: Vec<DVec3>,
    /// Per-axis `[lo, hi]` in radians.
    pub limits: Vec<[f64; 2]>,
    /// Per-axis torque at a normalized command of 1 (N·m).
    pub max_torque: Vec<f64>,
    pub angle: Vec<f64>,
    pub angular_velocity: Vec<f64>,
    /// Torque currently commanded per axis (N·m).
    pub applied_torque: Vec<f64>,
    /// Effective moment of inertia about each axis (kg·m²).
    pub inertia: f64,
    /// Viscous damping rate (1/s).
    pub damping: f64,
}

impl Joint {
    pub fn dof(&self) -> usize {
        self.axes.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.axes.len();
        if !(1..=3).contains(&n) {
            return Err(Error::Config(format!("joint must have 1-3 axes, got {n}")));
        }
        if self.limits.len() != n
            || self.max_torque.len() != n
            || self.angle.len() != n
            || self.angular_velocity.len() != n
            || self.applied_torque.len() != n
        {
            return Err(Error::Config("joint per-axis arrays disagree in length".into()));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if (a.length() - 1.0).abs() > 1e-9 {
                return Err(Error::Config("joint axis is not unit length".into()));
            }
            for b in &self.axes[i + 1..] {
                if a.dot(*b).abs() > 1e-9 {
                    return Err(Error::Config("joint axes are not orthogonal".into()));
                }
            }
        }
        for (i, [lo, hi]) in self.limits.iter().enumerate() {
            if lo > hi || !(*lo..=*hi).contains(&self.angle[i]) {
                return Err(Error::Config("joint limit empty or angle outside it".into()));
            }
        }
        if !(self.inertia > 0.0) {
            return Err(Error::Config("joint inertia must be positive".into()));
        }
        Ok(())
    }

    /// Rotation of the child relative to its rest orientation.
    pub fn rotation(&self) -> DQuat {
        self.axes
            .iter()
            .zip(&self.angle)
            .fold(DQuat::IDENTITY, |q, (axis, &a)| q * DQuat::from_axis_angle(*axis, a))
    }
}

pub fn total_dof(joints: &[Joint]) -> usize {
    joints.iter().map(Joint::dof).sum()
}

/// Sets per-axis torques from a command in `[-1, 1]^DOF`.
pub fn apply_torque(joints: &mut [Joint], normalized: &[f64]) -> Result<()> {
    let dof = total_dof(joints);
    if normalized.len() != dof {
        return Err(Error::invalid_action(
            normalized.len().min(dof),
            format!("expected {dof} torque components, got {}", normalized.len()),
        ));
    }
    if let Some(i) = normalized
        .iter()
        .position(|v| !v.is_finite() || !(-1.0..=1.0).contains(v))
    {
        return Err(Error::invalid_action(
            i,
            format!("torque component {} outside [-1, 1]", normalized[i]),
        ));
    }
    let mut k = 0;
    for joint in joints.iter_mut() {
        for axis in 0..joint.dof() {
            joint.applied_torque[axis] = normalized[k] * joint.max_torque[axis];
            k += 1;
        }
    }
    Ok(())
}

/// Semi-implicit Euler on each axis, then hard clamping with velocity
/// zeroing at the limits.
pub fn integrate_joints(joints: &mut [Joint], dt: f64) {
    for joint in joints.iter_mut() {
        for axis in 0..joint.dof() {
            let accel = joint.applied_torque[axis] / joint.inertia - joint.damping * joint.angular_velocity[axis];
            let mut w = joint.angular_velocity[axis] + accel * dt;
            let mut a = joint.angle[axis] + w * dt;
            let [lo, hi] = joint.limits[axis];
            if a >= hi {
                a = hi;
                w = w.min(0.0);
            }
            if a <= lo {
                a = lo;
                w = w.max(0.0);
            }
            if a == hi || a == lo {
                w = 0.0;
            }
            joint.angle[axis] = a;
            joint.angular_velocity[axis] = w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hinge(max_torque: f64, limits: [f64; 2]) -> Joint {
        Joint {
            parent_bone: 0,
            child_bone: 1,
            axes: vec![DVec3::X],
            limits: vec![limits],
            max_torque: vec![max_torque],
            angle: vec![0.0],
            angular_velocity: vec![0.0],
            applied_torque: vec![0.0],
            inertia: 0.5,
            damping: 0.0,
        }
    }

    #[test]
    fn zero_command_gives_zero_actuation() {
        let mut j = vec![hinge(5.0, [-1.0, 1.0])];
        apply_torque(&mut j, &[0.0]).unwrap();
        integrate_joints(&mut j, 0.004);
        assert_eq!(j[0].angular_velocity[0], 0.0);
        assert_eq!(j[0].angle[0], 0.0);
    }

    #[test]
    fn unit_command_scales_to_max_torque() {
        let mut j = vec![hinge(5.0, [-1.0, 1.0])];
        apply_torque(&mut j, &[1.0]).unwrap();
        assert_eq!(j[0].applied_torque[0], 5.0);
        integrate_joints(&mut j, 0.004);
        assert!((j[0].angular_velocity[0] - 5.0 / 0.5 * 0.004).abs() < 1e-15);
    }

    #[test]
    fn wrong_length_and_out_of_range_are_rejected() {
        let mut j = vec![hinge(5.0, [-1.0, 1.0]), hinge(5.0, [-1.0, 1.0])];
        let err = apply_torque(&mut j, &[0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidAction { .. }));
        let err = apply_torque(&mut j, &[0.0, 1.5]).unwrap_err();
        assert!(matches!(err, Error::InvalidAction { index: 1, .. }));
        let err = apply_torque(&mut j, &[f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidAction { index: 0, .. }));
    }

    #[test]
    fn upper_limit_holds_under_positive_torque() {
        let mut j = vec![hinge(5.0, [-0.5, 0.2])];
        j[0].angle[0] = 0.2;
        apply_torque(&mut j, &[1.0]).unwrap();
        for _ in 0..100 {
            integrate_joints(&mut j, 0.004);
            assert_eq!(j[0].angle[0], 0.2);
            assert_eq!(j[0].angular_velocity[0], 0.0);
        }
    }

    #[test]
    fn rotation_composes_axes() {
        let mut j = hinge(1.0, [-1.0, 1.0]);
        j.angle[0] = 0.3;
        let q = j.rotation();
        assert!(q.abs_diff_eq(DQuat::from_rotation_x(0.3), 1e-15));
    }
}
