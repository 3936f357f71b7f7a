use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use engine_core::audio::{interaural_lag, woodworth_itd, AudioConfig, AudioMode, Listener};
use engine_core::dataset::{
    generate, verify, vten, DatasetKind, GenOptions, Generator, TactileShape, ViewSpec, VisualClass,
};
use engine_core::humanoid::{Agent, AgentConfig, Skeleton, SkinMesh};
use engine_core::math::{yaw_rotation, DVec3, Pose};
use engine_core::physics::{PhysicsConfig, World};
use engine_core::Error;

fn labels(dir: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(dir.join("labels.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn generator(kind: DatasetKind) -> Generator {
    Generator::new(&GenOptions::new(kind, 1, 0, "unused")).unwrap()
}

fn ball_spec(agent_z: f64, jitter: DVec3) -> ViewSpec {
    ViewSpec {
        class: VisualClass::Ball,
        object: DVec3::new(0.0, 0.0, 1.5),
        scale: 1.0,
        yaw: 0.0,
        color: [0.8, 0.3, 0.2],
        agent: DVec3::new(0.0, 0.0, agent_z),
        agent_yaw: 0.0,
        look_jitter: jitter,
    }
}

#[test]
fn output_is_deterministic_and_class_balanced() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let ma = generate(&GenOptions::new(DatasetKind::ImageClassification, 12, 4, &a)).unwrap();
    let mb = generate(&GenOptions::new(DatasetKind::ImageClassification, 12, 4, &b)).unwrap();
    assert_eq!(serde_json::to_string(&ma).unwrap(), serde_json::to_string(&mb).unwrap());
    for f in &ma.files {
        assert_eq!(
            std::fs::read(a.join(&f.name)).unwrap(),
            std::fs::read(b.join(&f.name)).unwrap()
        );
        assert_eq!(f.shape, vec![2, 3, 84, 84]);
    }
    assert_eq!(
        std::fs::read(a.join("labels.csv")).unwrap(),
        std::fs::read(b.join("labels.csv")).unwrap()
    );
    let mut counts = BTreeMap::new();
    for row in labels(&a) {
        *counts.entry(row[2].clone()).or_insert(0) += 1;
    }
    assert_eq!(counts.values().copied().collect::<Vec<_>>(), [4, 4, 4]);

    let c = tmp.path().join("c");
    generate(&GenOptions::new(DatasetKind::ImageClassification, 3, 5, &c)).unwrap();
    assert_ne!(
        std::fs::read(a.join("data_000000.vten")).unwrap(),
        std::fs::read(c.join("data_000000.vten")).unwrap()
    );
}

#[test]
fn manifest_files_and_labels_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bbox");
    let opts = GenOptions::new(DatasetKind::Bbox, 9, 1, &out);
    let m = generate(&opts).unwrap();
    assert_eq!(verify(&out).unwrap().count, 9);
    assert_eq!(m.label_schema.columns, ["class", "cx", "cy", "h", "w"]);
    let gen = Generator::new(&opts).unwrap();
    for (i, row) in labels(&out).iter().enumerate() {
        assert_eq!(row[0], i.to_string());
        assert_eq!(row[1], m.files[i].name);
        // labels are the exact values a fresh generator produces
        let s = gen.sample(i).unwrap();
        assert_eq!(&row[2..], s.label.as_slice());
        assert_eq!(vten::read(&out.join(&row[1])).unwrap(), s.tensor);
    }
    // tampering is caught
    std::fs::write(out.join(&m.files[3].name), b"VTEN").unwrap();
    assert!(verify(&out).is_err());
}

#[test]
fn centred_ball_has_a_centred_box() {
    let g = generator(DatasetKind::Bbox);
    let rng = g.rng(0);
    let view = g.render_view(rng, &ball_spec(-0.5, DVec3::ZERO)).unwrap();
    let [cx, cy, h, w] = view.bbox.unwrap();
    // the gaze ray runs from the cyclopean eye, so the left eye sees the
    // ball a few pixels off centre horizontally only
    assert!((cy - 42.0).abs() <= 1.0, "cy {cy}");
    assert!((cx - 42.0).abs() <= 4.0, "cx {cx}");
    assert!(h > 5.0 && w > 5.0);
    assert!((h - w).abs() <= 2.0, "a sphere's box is square: {h} x {w}");
}

#[test]
fn box_shrinks_with_distance() {
    let g = generator(DatasetKind::Bbox);
    let near = g.render_view(g.rng(0), &ball_spec(0.0, DVec3::ZERO)).unwrap();
    let far = g.render_view(g.rng(0), &ball_spec(-1.5, DVec3::ZERO)).unwrap();
    let ratio = near.bbox.unwrap()[2] / far.bbox.unwrap()[2];
    let expect = far.distance / near.distance;
    assert!((ratio / expect - 1.0).abs() < 0.15, "{ratio} vs {expect}");
}

#[test]
fn distance_label_is_eye_to_object_centre() {
    let g = generator(DatasetKind::Distance);
    let spec = ball_spec(-0.7, DVec3::new(0.05, 0.0, 0.0));
    let view = g.render_view(g.rng(0), &spec).unwrap();
    // independent reconstruction of the observing agent
    let mut w = World::new(PhysicsConfig::default());
    let skel = Skeleton::simple18();
    let skin = Arc::new(SkinMesh::build(&skel));
    let mut a = Agent::spawn(
        &mut w,
        0,
        skel,
        skin,
        AgentConfig::default(),
        spec.agent,
        spec.agent_yaw,
    )
    .unwrap();
    a.look_toward_point(view.center + spec.look_jitter);
    assert_eq!(view.distance, a.cyclopean_pose().position.distance(view.center));
    // unit-scale ball of radius 0.15 resting on the floor
    assert!(
        (view.center - DVec3::new(0.0, 0.15, 1.5)).length() < 1e-9,
        "{}",
        view.center
    );
}

#[test]
fn sound_ahead_is_symmetric_and_hard_left_leads() {
    let g = generator(DatasetKind::SoundLocalization);
    let listener = Listener::new(
        Pose::new(DVec3::new(0.0, 1.5, 0.0), yaw_rotation(0.4)),
        AudioMode::Stereo,
    );
    let noise: Arc<[f32]> = (0..4410).map(|k| ((k * 7919) % 1000) as f32 / 1000.0 - 0.5).collect();
    let ahead = listener.head.transform_point(DVec3::Z * 2.0);
    let (t, dir) = g.render_sound(&listener, ahead, noise.clone(), None).unwrap();
    let d = t.as_f32().unwrap();
    assert_eq!(d[..4410], d[4410..]);
    assert!((dir - DVec3::Z).length() < 1e-12);

    let mut click = vec![0.0f32; 4410];
    click[0] = 1.0;
    let left = listener.head.transform_point(DVec3::X * 2.0);
    let (t, dir) = g.render_sound(&listener, left, click.into(), None).unwrap();
    assert!((dir - DVec3::X).length() < 1e-12);
    let d = t.as_f32().unwrap();
    let onset = |ch: &[f32]| ch.iter().position(|&v| v != 0.0).unwrap() as i64;
    let lag = onset(&d[4410..]) - onset(&d[..4410]);
    // two ears on a straight line: the path difference is the ear spacing
    let cfg = AudioConfig::default();
    let straight = 2.0 * cfg.head_radius / cfg.speed_of_sound * cfg.fs as f64;
    assert!((lag as f64 - straight).abs() <= 1.0, "{lag} vs {straight}");
    assert_eq!(interaural_lag(&d[..4410], &d[4410..], 30), lag);
}

#[test]
fn hrtf_mode_hard_left_matches_woodworth() {
    let g = Generator::new(&GenOptions {
        audio_mode: AudioMode::Hrtf,
        ..GenOptions::new(DatasetKind::SoundLocalization, 1, 0, "unused")
    })
    .unwrap();
    let listener = Listener::new(Pose::from_translation(DVec3::new(0.0, 1.5, 0.0)), AudioMode::Hrtf);
    let mut click = vec![0.0f32; 4410];
    click[0] = 1.0;
    let (t, _) = g
        .render_sound(&listener, DVec3::new(2.0, 1.5, 0.0), click.into(), None)
        .unwrap();
    let d = t.as_f32().unwrap();
    let onset = |ch: &[f32]| ch.iter().position(|&v| v != 0.0).unwrap() as f64;
    let cfg = AudioConfig::default();
    let tau = woodworth_itd(cfg.head_radius, cfg.speed_of_sound, std::f64::consts::FRAC_PI_2) * cfg.fs as f64;
    assert!((onset(&d[4410..]) - onset(&d[..4410]) - tau).abs() <= 1.0);
}

#[test]
fn sound_labels_are_unit_vectors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sound");
    generate(&GenOptions::new(DatasetKind::SoundLocalization, 10, 2, &out)).unwrap();
    for row in labels(&out) {
        let v: Vec<f64> = row[2..].iter().map(|s| s.parse().unwrap()).collect();
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        assert!((n - 1.0).abs() < 1e-9, "{row:?}");
        let t = vten::read(&out.join(&row[1])).unwrap();
        assert_eq!(t.shape, vec![2, 4410]);
        assert!(t.as_f32().unwrap().iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}

#[test]
fn tactile_recordings_are_bounded_and_shape_dependent() {
    let g = generator(DatasetKind::TactileClassification);
    let sum = |shape| {
        let t = g.tactile_drop(&mut g.rng(0), shape).unwrap();
        assert_eq!(t.shape[0], 128);
        let d = t.as_f32().unwrap();
        assert!(d.iter().all(|v| (0.0..=1.0).contains(v)));
        d.iter().map(|&v| v as f64).sum::<f64>()
    };
    let (sphere, cube) = (sum(TactileShape::Sphere), sum(TactileShape::Cube));
    assert!(sphere > 0.0);
    // a flat face touches many more taxels than a point contact
    assert!(cube > 2.0 * sphere, "cube {cube} sphere {sphere}");
}

#[test]
fn bad_requests_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("occupied");
    std::fs::write(&file, b"x").unwrap();
    assert!(matches!(
        generate(&GenOptions::new(DatasetKind::Bbox, 2, 0, file.join("inside"))),
        Err(Error::Io(_))
    ));
    assert!(matches!(
        generate(&GenOptions::new(DatasetKind::Bbox, 0, 0, tmp.path().join("empty"))),
        Err(Error::Config(_))
    ));
    assert!(matches!(verify(&tmp.path().join("missing")), Err(Error::Io(_))));
    assert!(matches!("smell".parse::<DatasetKind>(), Err(Error::NotFound(_))));
    for k in DatasetKind::ALL {
        assert_eq!(k.name().parse::<DatasetKind>().unwrap(), k);
    }
}
