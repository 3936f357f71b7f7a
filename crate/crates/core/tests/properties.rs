//! Randomized invariants across the engine's modules.

use std::sync::Arc;

use proptest::prelude::*;

use engine_core::audio::{
    energy_by_order, image_sources, spatialize, AudioConfig, AudioMode, AudioSource, Listener, RoomAcoustics,
};
use engine_core::dataset::vten;
use engine_core::env::action::Action;
use engine_core::env::observation::{ObservationFrame, Tensor};
use engine_core::humanoid::{ActionMode, Agent, AgentConfig, Skeleton, SkinMesh};
use engine_core::math::{yaw_rotation, DQuat, DVec3, Pose};
use engine_core::net::codec::{decode_observations, encode_observations};
use engine_core::net::{decode_frame, encode_frame, try_decode, Decoded, Frame, Message, StepResult};
use engine_core::physics::{
    detect_contacts, integrate_joints, shape_contacts, PhysicsConfig, RayScene, RigidBody, Shape, World,
};
use engine_core::sim::SimClock;
use engine_core::tactile::{sense, tactile_response};
use engine_core::tasks::{
    evaluate, grab_object_reward, kick_helper, nav_helper, AgentState, RewardInput, RewardParams,
};
use engine_core::vision::{gaussian_blur, grayscale, render, Camera, Image, Intrinsics, Lighting};

fn v3(range: std::ops::Range<f64>) -> impl Strategy<Value = DVec3> {
    (range.clone(), range.clone(), range).prop_map(|(x, y, z)| DVec3::new(x, y, z))
}

fn noise(n: usize, seed: u64) -> Arc<[f32]> {
    let mut s = engine_core::sim::derive_stream(seed, 0);
    (0..n).map(|_| s.uniform(-0.5, 0.5) as f32).collect()
}

fn agent_world(mode: ActionMode) -> (World, Agent) {
    let mut w = World::new(PhysicsConfig::default());
    w.spawn(
        RigidBody::fixed("floor", DVec3::ZERO),
        Shape::Plane {
            normal: DVec3::Y,
            offset: 0.0,
        },
    )
    .unwrap();
    let skel = Skeleton::simple18();
    let skin = Arc::new(SkinMesh::build(&skel));
    let cfg = AgentConfig {
        mode,
        ..AgentConfig::default()
    };
    let a = Agent::spawn(&mut w, 0, skel, skin, cfg, DVec3::ZERO, 0.0).unwrap();
    (w, a)
}

fn free_ball(at: DVec3, v: DVec3, mass: f64) -> RigidBody {
    let mut b = RigidBody::dynamic("ball", mass, at);
    b.gravity_scale = 0.0;
    b.linear_velocity = v;
    b
}

fn pair_penetration(w: &World) -> f64 {
    let (b, c) = (w.bodies(), w.colliders());
    let pa = Pose::new(b[0].position, b[0].orientation);
    let pb = Pose::new(b[1].position, b[1].orientation);
    shape_contacts(&c[0].shape, &pa, &c[1].shape, &pb)
        .unwrap()
        .iter()
        .map(|p| p.penetration)
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------- clock

proptest! {
    #[test]
    fn clock_time_is_steps_times_dt(n in 0u64..20_000, k in 1u32..8) {
        let dt = 0.001 * k as f64;
        let mut c = SimClock::new(dt).unwrap();
        for _ in 0..n {
            c.advance();
        }
        prop_assert_eq!(c.steps(), n);
        prop_assert_eq!(c.time(), n as f64 * dt);
    }
}

// -------------------------------------------------------------- physics

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn collision_never_adds_normal_speed(
        gap in 0.05f64..0.25,
        dir in v3(-1.0..1.0),
        va in v3(-3.0..3.0),
        vb in v3(-3.0..3.0),
        ma in 0.1f64..5.0,
        mb in 0.1f64..5.0,
        e in 0.0f64..1.0,
    ) {
        prop_assume!(dir.length() > 0.1);
        let n = dir.normalize();
        let mut w = World::new(PhysicsConfig { restitution: e, ..PhysicsConfig::default() });
        let a = DVec3::new(0.0, 2.0, 0.0);
        let b = a + n * (0.4 - gap);
        w.spawn(free_ball(a, va, ma), Shape::Sphere { radius: 0.2 }).unwrap();
        w.spawn(free_ball(b, vb, mb), Shape::Sphere { radius: 0.2 }).unwrap();
        let dt = 0.004;
        // positions right after integration, before contacts are resolved
        let mut probe = w.clone();
        for body in 0..2 {
            let id = engine_core::physics::BodyId(body);
            let v = probe.body(id).unwrap().linear_velocity;
            probe.body_mut(id).unwrap().position += v * dt;
        }
        let pen_before = pair_penetration(&probe);
        w.step(dt).unwrap();
        let pen_after = pair_penetration(&w);
        prop_assert!(pen_after <= pen_before + 1e-9, "{pen_after} > {pen_before}");
        if let Some(c) = w.contacts().first() {
            let pre = (vb - va).dot(c.normal);
            let bodies = w.bodies();
            let post = (bodies[1].linear_velocity - bodies[0].linear_velocity).dot(c.normal);
            if pre < 0.0 {
                prop_assert!(post.abs() <= e * pre.abs() + 1e-6, "pre {pre} post {post}");
            } else {
                prop_assert!((post - pre).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mirrored_scenes_give_mirrored_contacts(
        a in v3(-0.5..0.5),
        b in v3(-0.5..0.5),
        ra in 0.1f64..0.4,
        he in v3(0.1..0.4),
    ) {
        let mirror = |p: DVec3| DVec3::new(-p.x, p.y, p.z);
        let build = |pa: DVec3, pb: DVec3| {
            let mut w = World::new(PhysicsConfig::default());
            w.spawn(RigidBody::dynamic("s", 1.0, pa), Shape::Sphere { radius: ra }).unwrap();
            w.spawn(RigidBody::dynamic("b", 1.0, pb), Shape::Box { half_extents: he }).unwrap();
            detect_contacts(w.bodies(), w.colliders()).unwrap()
        };
        let c = build(a, b);
        let m = build(mirror(a), mirror(b));
        prop_assert_eq!(c.len(), m.len());
        for (x, y) in c.iter().zip(&m) {
            prop_assert!((mirror(x.point) - y.point).length() < 1e-9);
            prop_assert!((mirror(x.normal) - y.normal).length() < 1e-9);
            prop_assert!((x.penetration - y.penetration).abs() < 1e-9);
        }
    }

    #[test]
    fn joint_angles_stay_within_limits(
        commands in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 34), 1..40),
    ) {
        let (_, mut agent) = agent_world(ActionMode::Torque);
        for cmd in &commands {
            agent.apply_torque(cmd).unwrap();
            for _ in 0..5 {
                integrate_joints(&mut agent.joints, 0.004);
            }
            for j in &agent.joints {
                for (a, [lo, hi]) in j.angle.iter().zip(&j.limits) {
                    prop_assert!(lo <= a && a <= hi);
                }
            }
        }
    }
}

// ------------------------------------------------------------- humanoid

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_kinematics_is_reproducible(
        angles in prop::collection::vec(-0.3f64..0.3, 34),
        yaw in -3.0f64..3.0,
    ) {
        let (mut w, mut a) = agent_world(ActionMode::Torque);
        a.yaw = yaw;
        let mut k = 0;
        for j in a.joints.iter_mut() {
            for (axis, ang) in j.angle.iter_mut().enumerate() {
                let [lo, hi] = j.limits[axis];
                *ang = angles[k].clamp(lo, hi);
                k += 1;
            }
        }
        a.sync_bodies(&mut w, None);
        let b = a.clone();
        prop_assert_eq!(a.bone_poses(), b.bone_poses());
        prop_assert_eq!(a.eye_poses(), b.eye_poses());
    }

    #[test]
    fn interactable_implies_visible_and_distance_never_helps(
        yaw in -0.35f64..0.35,
        pitch in -0.3f64..0.2,
        dist in 0.4f64..2.5,
        scale in 1.01f64..3.0,
    ) {
        let (mut w, a) = agent_world(ActionMode::Animation);
        let eye = a.cyclopean_pose();
        let dir = eye.rotation * DQuat::from_rotation_y(yaw) * DQuat::from_rotation_x(pitch) * DVec3::Z;
        let near = eye.position + dir * dist;
        prop_assume!(near.y > 0.2);
        let id = w.spawn(free_ball(near, DVec3::ZERO, 0.5), Shape::Sphere { radius: 0.1 }).unwrap();
        let scene = a.ray_scene(&w);
        let near_ok = a.is_interactable(&w, &scene, id).unwrap();
        if near_ok {
            prop_assert!(a.is_visible(&w, &scene, id).unwrap());
        }
        w.body_mut(id).unwrap().position = eye.position + dir * dist * scale;
        let scene = a.ray_scene(&w);
        let far_ok = a.is_interactable(&w, &scene, id).unwrap();
        if far_ok {
            prop_assert!(a.is_visible(&w, &scene, id).unwrap());
            prop_assert!(near_ok, "moving farther granted interactability");
        }
    }

    #[test]
    fn held_offset_is_constant(walks in prop::collection::vec((-1.0f64..1.0, -3.0f64..3.0), 1..20)) {
        let (mut w, mut a) = agent_world(ActionMode::Animation);
        let b = w.spawn(free_ball(DVec3::new(0.1, 0.5, 0.7), DVec3::ZERO, 0.5), Shape::Sphere { radius: 0.1 }).unwrap();
        a.grab(&mut w, b).unwrap();
        let held = a.held.unwrap();
        for (walk, turn) in walks {
            a.walk(walk, turn, 0.02, 5).unwrap();
            for _ in 0..5 {
                a.pre_physics(&mut w, 0.004);
                w.step(0.004).unwrap();
                a.post_physics(&mut w);
            }
            prop_assert_eq!(a.held.unwrap().offset, held.offset);
            let poses = a.bone_poses();
            let expect = poses[held.bone].transform_point(held.offset.position);
            prop_assert!((w.body(b).unwrap().position - expect).length() < 1e-9);
        }
    }
}

// --------------------------------------------------------------- vision

fn sphere_scene(at: DVec3, radius: f64, color: [f64; 3]) -> RayScene {
    let mut w = World::new(PhysicsConfig::default());
    w.spawn(RigidBody::fixed("s", at).with_color(color), Shape::Sphere { radius })
        .unwrap();
    RayScene::capture(&w, |_| true)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rendering_is_pure_and_bounded(
        at in v3(-1.0..1.0),
        radius in 0.1f64..0.8,
        color in prop::array::uniform3(0.0f64..1.0),
        yaw in -0.5f64..0.5,
    ) {
        let scene = sphere_scene(at + DVec3::Z * 3.0, radius, color);
        let cam = Camera {
            pose: Pose::new(DVec3::ZERO, yaw_rotation(yaw)),
            intrinsics: Intrinsics::default(),
            focal_distance: 1.0,
        };
        let light = Lighting::default();
        let a = render(&scene, &cam, &light);
        let b = render(&scene, &cam, &light);
        prop_assert_eq!(&a.image, &b.image);
        prop_assert_eq!(&a.ids, &b.ids);
        prop_assert!(a.depth.iter().zip(&b.depth).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(a.image.data.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(a.depth.iter().all(|&d| d > 0.0 || d.is_infinite()));
        prop_assert!(a.depth.iter().all(|&d| d == f32::INFINITY || d.is_finite()));
    }

    #[test]
    fn grayscale_and_blur_commute(
        pixels in prop::collection::vec(0.0f32..1.0, 3 * 12 * 10),
        sigma in 0.3f64..3.0,
    ) {
        let img = Image { channels: 3, height: 12, width: 10, data: pixels };
        let a = gaussian_blur(&grayscale(&img), sigma);
        let b = grayscale(&gaussian_blur(&img, sigma));
        for (x, y) in a.data.iter().zip(&b.data) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn stereo_disparity_matches_baseline_geometry(z in 0.5f64..5.0, lateral in -0.05f64..0.05) {
        let (_, agent) = agent_world(ActionMode::Animation);
        let eyes = agent.eye_poses();
        let cyc = agent.cyclopean_pose();
        let ipd = eyes[0].position.distance(eyes[1].position);
        let target = cyc.transform_point(DVec3::new(lateral * z, 0.0, z));
        let scene = sphere_scene(target, 0.02 * z, [1.0; 3]);
        let k = agent.config.intrinsics;
        let col = |pose: Pose| {
            let r = render(&scene, &Camera { pose, intrinsics: k, focal_distance: 1.0 }, &Lighting::default());
            let (c0, _, c1, _) = r.mask_bounds(|_| true).expect("target in view");
            (c0 + c1 + 1) as f64 / 2.0
        };
        let disparity = (col(eyes[0]) - col(eyes[1])).abs();
        let expect = k.focal_px() * ipd / z;
        prop_assert!((disparity - expect).abs() <= 1.0, "z {z}: {disparity} vs {expect}");
    }
}

// ---------------------------------------------------------------- audio

fn head_listener(mode: AudioMode, yaw: f64) -> Listener {
    Listener::new(Pose::new(DVec3::new(0.0, 1.5, 0.0), yaw_rotation(yaw)), mode)
}

fn src(p: DVec3, clip: Arc<[f32]>) -> AudioSource {
    AudioSource::new(0, p, clip, 1.0, true)
}

fn mode_strategy() -> impl Strategy<Value = AudioMode> {
    prop_oneof![Just(AudioMode::Mono), Just(AudioMode::Stereo), Just(AudioMode::Hrtf)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spatialization_is_linear(
        p in v3(-4.0..4.0),
        alpha in -2.0f32..2.0,
        beta in -2.0f32..2.0,
        mode in mode_strategy(),
        shadow in any::<bool>(),
    ) {
        prop_assume!((p - DVec3::new(0.0, 1.5, 0.0)).length() > 0.3);
        let cfg = AudioConfig { head_shadow: shadow, ..AudioConfig::default() };
        let (x, y) = (noise(1200, 1), noise(1200, 2));
        let mix: Arc<[f32]> = x.iter().zip(y.iter()).map(|(a, b)| alpha * a + beta * b).collect();
        let l = head_listener(mode, 0.3);
        let out = |clip| spatialize(&src(p, clip), &l, None, None, &cfg, 441).unwrap();
        let (ox, oy, om) = (out(x.clone()), out(y.clone()), out(mix));
        for c in 0..2 {
            for k in 0..441 {
                let lin = alpha as f64 * ox[c][k] + beta as f64 * oy[c][k];
                prop_assert!((om[c][k] - lin).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn mirrored_source_swaps_channels(
        x in 0.2f64..4.0,
        y in 0.5f64..2.5,
        z in -4.0f64..4.0,
        stereo in any::<bool>(),
        shadow in any::<bool>(),
    ) {
        let mode = if stereo { AudioMode::Stereo } else { AudioMode::Hrtf };
        let cfg = AudioConfig { head_shadow: shadow, ..AudioConfig::default() };
        let l = head_listener(mode, 0.0);
        let clip = noise(1000, 5);
        let [a0, a1] = spatialize(&src(DVec3::new(x, y, z), clip.clone()), &l, None, None, &cfg, 441).unwrap();
        let [b0, b1] = spatialize(&src(DVec3::new(-x, y, z), clip), &l, None, None, &cfg, 441).unwrap();
        prop_assert_eq!(a0, b1);
        prop_assert_eq!(a1, b0);
    }

    #[test]
    fn mono_channels_are_identical(p in v3(-4.0..4.0), yaw in -3.0f64..3.0) {
        let cfg = AudioConfig::default();
        let [l, r] = spatialize(&src(p, noise(800, 3)), &head_listener(AudioMode::Mono, yaw), None, None, &cfg, 441).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn onset_shifts_by_rounded_extra_delay(base in 0.5f64..3.0, extra in 0.0f64..3.0) {
        let cfg = AudioConfig::default();
        let mut clip = vec![0.0f32; 2000];
        clip[0] = 1.0;
        let clip: Arc<[f32]> = clip.into();
        let l = head_listener(AudioMode::Stereo, 0.0);
        let ear = l.ears()[0];
        // source on the interaural axis, heard first by the left ear
        let onset = |d: f64| {
            let s = AudioSource::new(0, ear + DVec3::X * d, clip.clone(), 1.0, false);
            let [y, _] = spatialize(&s, &l, None, None, &cfg, 1000).unwrap();
            y.iter().position(|&v| v != 0.0).unwrap() as i64
        };
        let fs = cfg.fs as f64;
        let c = cfg.speed_of_sound;
        let delay = |d: f64| (d / c * fs).round_ties_even() as i64;
        prop_assert_eq!(onset(base + extra) - onset(base), delay(base + extra) - delay(base));
        // the rounded shift never strays more than one sample from the exact one
        prop_assert!(((onset(base + extra) - onset(base)) as f64 - extra / c * fs).abs() <= 1.0);
    }

    #[test]
    fn reflection_energy_scales_with_beta(
        s in v3(0.3..2.7),
        m in v3(0.3..2.7),
        lo in 0.0f64..1.0,
        hi in 0.0f64..1.0,
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let cfg = AudioConfig::default();
        let room = |beta| RoomAcoustics {
            origin: DVec3::ZERO,
            room_size: DVec3::new(5.0, 3.0, 4.0),
            beta,
            max_order: 3,
        };
        let e = |beta| energy_by_order(&image_sources(&room(beta), s, m, &cfg).unwrap(), 3);
        let (el, eh, e1) = (e(lo), e(hi), e(1.0));
        prop_assert_eq!(el[0], eh[0]);
        for k in 1..=3 {
            prop_assert!(el[k] <= eh[k]);
            let oracle = hi.powi(2 * k as i32) * e1[k];
            prop_assert!((eh[k] - oracle).abs() <= 1e-12 * e1[k].max(1.0));
        }
    }
}

// -------------------------------------------------------------- tactile

proptest! {
    #[test]
    fn tactile_law(d in 0.0f64..0.1, e in 0.0f64..0.1, d_max in 0.001f64..0.05) {
        let t = tactile_response(d, d_max);
        prop_assert!((0.0..=1.0).contains(&t));
        if d <= d_max {
            prop_assert_eq!(t, d / d_max);
        } else {
            prop_assert_eq!(t, 1.0);
        }
        if d <= e {
            prop_assert!(tactile_response(d, d_max) <= tactile_response(e, d_max));
        }
    }

    #[test]
    fn deeper_press_never_reads_less(depth in 0.0f64..0.03, more in 0.0f64..0.03) {
        let reading = |dep: f64| {
            let scene = sphere_scene(DVec3::new(0.0, 0.0, 0.5 - dep), 0.5, [1.0; 3]);
            sense(&scene, &[(DVec3::ZERO, DVec3::Z), (DVec3::X * 0.05, DVec3::Z)], 0.01)
        };
        let (a, b) = (reading(depth), reading(depth + more));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((0.0..=1.0).contains(x));
            prop_assert!(x <= y);
        }
    }
}

// -------------------------------------------------------------- rewards

fn agent_state() -> impl Strategy<Value = AgentState> {
    (v3(-5.0..5.0), -3.2f64..3.2, v3(-2.0..2.0)).prop_map(|(p, yaw, v)| AgentState {
        position: DVec3::new(p.x, 0.0, p.z),
        yaw,
        velocity: DVec3::new(v.x, 0.0, v.z),
    })
}

proptest! {
    #[test]
    fn helper_terms_are_bounded(a in agent_state(), target in v3(-5.0..5.0), visible in any::<bool>()) {
        prop_assert!(kick_helper(&a, target).abs() <= 0.01 + 1e-15);
        let f = a.velocity.dot(a.forward()).abs();
        let l = a.velocity.dot(a.left()).abs();
        prop_assert!(nav_helper(&a, target, visible).abs() <= 0.05 * f + 0.03 * l + 1e-12);
        if !visible {
            prop_assert_eq!(nav_helper(&a, target, visible), 0.0);
        }
    }

    #[test]
    fn grab_penalty_is_quadratic_and_non_positive(action in prop::collection::vec(-1.0f64..1.0, 0..34)) {
        let r = grab_object_reward([DVec3::X, -DVec3::X], DVec3::Y, 1.0, 2.0, &action, 0.25);
        let oracle = -0.004 * action.iter().map(|a| a * a).sum::<f64>();
        prop_assert!(r.penalty <= 0.0);
        prop_assert!((r.penalty - oracle).abs() < 1e-15);
    }

    #[test]
    fn positive_scaling_keeps_the_best_action(
        a in agent_state(),
        ball in v3(-5.0..5.0),
        speeds in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..8),
        k in 0.01f64..100.0,
    ) {
        let score = |s: f64| -> Vec<f64> {
            speeds
                .iter()
                .map(|&(vx, vz)| {
                    let st = AgentState { velocity: DVec3::new(vx, 0.0, vz), ..a };
                    let input = RewardInput::Kick { agent: st, ball, kicked: false };
                    s * evaluate(&input, &RewardParams { hold_radius: 0.25, helper_rewards: true }).total()
                })
                .collect()
        };
        let argmax = |v: Vec<f64>| v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b });
        prop_assert_eq!(argmax(score(1.0)), argmax(score(k)));
    }
}

// ------------------------------------------------------- wire and files

fn tensor() -> impl Strategy<Value = Tensor> {
    prop_oneof![
        prop::collection::vec(1u32..5, 0..4).prop_flat_map(|shape| {
            let n = shape.iter().product::<u32>() as usize;
            prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), n)
                .prop_map(move |d| Tensor::f32(shape.clone(), d))
        }),
        prop::collection::vec(1u32..5, 0..4).prop_flat_map(|shape| {
            let n = shape.iter().product::<u32>() as usize;
            prop::collection::vec(any::<u8>(), n).prop_map(move |d| Tensor::u8(shape.clone(), d))
        }),
    ]
}

fn frame_strategy() -> impl Strategy<Value = ObservationFrame> {
    prop::collection::btree_map("[a-z_]{1,12}", tensor(), 0..5).prop_map(|m| {
        let mut f = ObservationFrame::new();
        for (k, t) in m {
            f.insert(k, t);
        }
        f
    })
}

fn action_strategy() -> impl Strategy<Value = Action> {
    let f = || (-1000.0f32..1000.0).prop_map(|v| v as f64);
    prop_oneof![
        Just(Action::Noop),
        (f(), f(), any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(walk, turn, kick, grab, release)| {
            Action::Primitive {
                walk,
                turn,
                kick,
                grab,
                release,
            }
        }),
        prop::collection::vec(f(), 0..40).prop_map(Action::Torque),
        prop::collection::vec(-1.0f32..1.0, 0..500).prop_map(Action::Voice),
        (f(), f(), f()).prop_map(|(x, y, z)| Action::LookAt(DVec3::new(x, y, z))),
        Just(Action::ReleaseLook),
        (f(), f()).prop_map(|(up_down_deg, left_right_deg)| Action::RotateHead {
            up_down_deg,
            left_right_deg
        }),
    ]
}

fn message_strategy() -> impl Strategy<Value = Message> {
    prop_oneof![
        ".{0,40}".prop_map(Message::Hello),
        ".{0,40}".prop_map(Message::HelloAck),
        prop::option::of(any::<u64>()).prop_map(Message::Reset),
        prop::collection::vec(action_strategy(), 0..4)
            .prop_map(|acts| Message::Step(acts.iter().map(Action::to_wire).collect())),
        (
            prop::collection::vec(frame_strategy(), 0..3),
            prop::collection::vec(-10.0f32..10.0, 0..3),
            any::<bool>(),
            ".{0,30}"
        )
            .prop_map(|(observations, rewards, done, info)| Message::StepResult(StepResult {
                observations,
                rewards,
                done,
                info
            })),
        (any::<i32>(), ".{0,30}").prop_map(|(code, message)| Message::Error { code, message }),
        Just(Message::Close),
    ]
}

proptest! {
    #[test]
    fn messages_round_trip(msg in message_strategy(), env_id in any::<u16>()) {
        let bytes = encode_frame(&msg.to_frame(env_id)).unwrap();
        let frame = decode_frame(&bytes).unwrap();
        prop_assert_eq!(frame.env_id, env_id);
        prop_assert_eq!(Message::from_frame(&frame).unwrap(), msg);
        prop_assert_eq!(encode_frame(&frame).unwrap(), bytes);
    }

    #[test]
    fn every_proper_prefix_is_incomplete(payload in prop::collection::vec(any::<u8>(), 0..64), cut in 0usize..71) {
        let bytes = encode_frame(&Frame { env_id: 3, msg_type: 2, payload }).unwrap();
        let cut = cut.min(bytes.len() - 1);
        let incomplete = matches!(try_decode(&bytes[..cut]).unwrap(), Decoded::Incomplete { .. });
        prop_assert!(incomplete);
        let whole = matches!(try_decode(&bytes).unwrap(), Decoded::Frame { consumed, .. } if consumed == bytes.len());
        prop_assert!(whole);
    }

    #[test]
    fn actions_round_trip_through_the_wire(a in action_strategy()) {
        let (kind, v) = a.to_wire();
        let back = Action::from_wire(0, kind, &v).unwrap();
        prop_assert_eq!(back.to_wire(), (kind, v));
    }

    #[test]
    fn observations_round_trip(frame in frame_strategy()) {
        let mut bytes = Vec::new();
        encode_observations(&frame, &mut bytes);
        let mut r = engine_core::net::codec::Reader::new(&bytes);
        prop_assert_eq!(decode_observations(&mut r).unwrap(), frame);
    }

    #[test]
    fn vten_round_trips(t in tensor()) {
        let bytes = vten::encode(&t);
        prop_assert_eq!(vten::decode(&bytes).unwrap(), t);
    }
}
