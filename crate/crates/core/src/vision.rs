//! Headless raycast rendering and the image filters applied to it.
//!
//! Camera frames look along local +z with +y up, so the image's right-hand
//! side lies along the camera's local -x.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::humanoid::Agent;
use crate::math::{DVec3, Pose};
use crate::physics::{BodyId, RayScene, World};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub vertical_fov_deg: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for Intrinsics {
    fn default() -> Self {
        Self {
            vertical_fov_deg: 60.0,
            width: 84,
            height: 84,
        }
    }
}

impl Intrinsics {
    pub fn validate(&self) -> crate::Result<()> {
        if self.width == 0 || self.height == 0 || !(self.vertical_fov_deg > 0.0 && self.vertical_fov_deg < 180.0) {
            return Err(crate::Error::Config(format!("bad camera intrinsics {self:?}")));
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        (self.height as f64 * 0.5) / (self.vertical_fov_deg.to_radians() * 0.5).tan()
    }

    /// Unit ray through the centre of pixel `(row, col)` in the camera frame.
    pub fn pixel_dir(&self, row: u32, col: u32) -> DVec3 {
        let f = self.focal_px();
        let x = (col as f64 + 0.5 - self.width as f64 * 0.5) / f;
        let y = (self.height as f64 * 0.5 - (row as f64 + 0.5)) / f;
        DVec3::new(-x, y, 1.0).normalize()
    }

    /// Continuous `(col, row)` image coordinates of a camera-frame point;
    /// pixel centres sit at half-integers.
    pub fn project(&self, p: DVec3) -> Option<(f64, f64)> {
        if p.z <= 0.0 {
            return None;
        }
        let f = self.focal_px();
        Some((
            self.width as f64 * 0.5 - p.x / p.z * f,
            self.height as f64 * 0.5 - p.y / p.z * f,
        ))
    }

    /// Whether a camera-frame point lies inside the view frustum.
    pub fn contains(&self, p: DVec3) -> bool {
        match self.project(p) {
            Some((u, v)) => (0.0..=self.width as f64).contains(&u) && (0.0..=self.height as f64).contains(&v),
            None => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub pose: Pose,
    pub intrinsics: Intrinsics,
    /// Distance in sharp focus (m).
    pub focal_distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lighting {
    /// Unit vector pointing toward the light.
    pub direction: DVec3,
    pub intensity: f64,
    pub ambient: f64,
    pub background: [f64; 3],
}

impl Default for Lighting {
    fn default() -> Self {
        Self {
            direction: DVec3::new(0.3, 1.0, 0.5).normalize(),
            intensity: 0.8,
            ambient: 0.2,
            background: [0.55, 0.7, 0.85],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisionConfig {
    pub grayscale: bool,
    pub blur_sigma: f64,
    pub depth_of_field: bool,
    pub aperture: f64,
    pub focal_distance: f64,
}

impl Default for VisionConfig {
    fn default() -> Self {
        Self {
            grayscale: false,
            blur_sigma: 0.0,
            depth_of_field: false,
            aperture: 0.0,
            focal_distance: 1.0,
        }
    }
}

impl VisionConfig {
    pub fn channels(&self) -> u32 {
        if self.grayscale {
            1
        } else {
            3
        }
    }
}

/// Planar image, channel-major, rows top to bottom, values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub channels: u32,
    pub height: u32,
    pub width: u32,
    pub data: Vec<f32>,
}

impl Image {
    pub fn filled(channels: u32, height: u32, width: u32, value: &[f32]) -> Image {
        let plane = (height * width) as usize;
        let mut data = Vec::with_capacity(plane * channels as usize);
        for c in 0..channels as usize {
            data.extend(std::iter::repeat_n(value[c.min(value.len() - 1)], plane));
        }
        Image {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn get(&self, c: u32, row: u32, col: u32) -> f32 {
        self.data[((c * self.height + row) * self.width + col) as usize]
    }

    fn plane(&self, c: u32) -> &[f32] {
        let n = (self.height * self.width) as usize;
        &self.data[c as usize * n..(c as usize + 1) * n]
    }

    /// Left-right mirror.
    pub fn mirrored(&self) -> Image {
        let mut out = self.clone();
        for c in 0..self.channels {
            for r in 0..self.height {
                for x in 0..self.width {
                    let dst = ((c * self.height + r) * self.width + x) as usize;
                    out.data[dst] = self.get(c, r, self.width - 1 - x);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub image: Image,
    /// Euclidean hit distance per pixel; infinite where nothing was hit.
    pub depth: Vec<f32>,
    pub ids: Vec<Option<BodyId>>,
}

impl Rendered {
    /// Tight pixel box `(col_min, row_min, col_max, row_max)` around a body,
    /// inclusive.
    pub fn mask_bounds(&self, pred: impl Fn(BodyId) -> bool) -> Option<(u32, u32, u32, u32)> {
        let w = self.image.width;
        let mut b: Option<(u32, u32, u32, u32)> = None;
        for (i, id) in self.ids.iter().enumerate() {
            if id.is_some_and(&pred) {
                let (r, c) = (i as u32 / w, i as u32 % w);
                b = Some(match b {
                    None => (c, r, c, r),
                    Some((c0, r0, c1, r1)) => (c0.min(c), r0.min(r), c1.max(c), r1.max(r)),
                });
            }
        }
        b
    }
}

/// One primary ray per pixel; transparent bodies are skipped.
pub fn render(scene: &RayScene, camera: &Camera, light: &Lighting) -> Rendered {
    let k = camera.intrinsics;
    let (w, h) = (k.width, k.height);
    let pixels: Vec<([f32; 3], f32, Option<BodyId>)> = (0..h * w)
        .into_par_iter()
        .map(|i| {
            let dir = camera.pose.transform_vector(k.pixel_dir(i / w, i % w));
            match scene.cast(camera.pose.position, dir, 0.0, f64::INFINITY, |c| !c.transparent) {
                Some(hit) => {
                    let n = if hit.normal.dot(dir) > 0.0 {
                        -hit.normal
                    } else {
                        hit.normal
                    };
                    let shade = n.dot(light.direction).max(0.0) * light.intensity + light.ambient;
                    let rgb = hit.color.map(|a| (a * shade).clamp(0.0, 1.0) as f32);
                    (rgb, hit.t as f32, Some(hit.body))
                }
                None => (light.background.map(|v| v as f32), f32::INFINITY, None),
            }
        })
        .collect();
    let plane = (w * h) as usize;
    let mut data = vec![0.0f32; 3 * plane];
    let mut depth = Vec::with_capacity(plane);
    let mut ids = Vec::with_capacity(plane);
    for (i, (rgb, d, id)) in pixels.into_iter().enumerate() {
        for c in 0..3 {
            data[c * plane + i] = rgb[c];
        }
        depth.push(d);
        ids.push(id);
    }
    Rendered {
        image: Image {
            channels: 3,
            height: h,
            width: w,
            data,
        },
        depth,
        ids,
    }
}

/// Depth of field, then grayscale, then blur.
pub fn apply_filters(image: &Image, depth: &[f32], config: &VisionConfig) -> Image {
    let mut out = image.clone();
    if config.depth_of_field && config.aperture > 0.0 {
        out = depth_of_field(&out, depth, config.aperture, config.focal_distance);
    }
    if config.grayscale {
        out = grayscale(&out);
    }
    if config.blur_sigma > 0.0 {
        out = gaussian_blur(&out, config.blur_sigma);
    }
    out
}

pub fn grayscale(image: &Image) -> Image {
    if image.channels != 3 {
        return image.clone();
    }
    let (r, g, b) = (image.plane(0), image.plane(1), image.plane(2));
    let data = (0..r.len())
        .map(|i| 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i])
        .map(|y| y.clamp(0.0, 1.0))
        .collect();
    Image {
        channels: 1,
        data,
        ..*image
    }
}

fn kernel(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k.into_iter().map(|v| v as f32).collect()
}

/// Separable Gaussian with clamp-to-edge borders.
pub fn gaussian_blur(image: &Image, sigma: f64) -> Image {
    if sigma <= 0.0 {
        return image.clone();
    }
    let k = kernel(sigma);
    let r = (k.len() / 2) as i64;
    let (w, h) = (image.width as i64, image.height as i64);
    let mut out = image.clone();
    for c in 0..image.channels {
        let src = image.plane(c);
        let mut tmp = vec![0.0f32; src.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0f32;
                for (i, kv) in k.iter().enumerate() {
                    let xx = (x + i as i64 - r).clamp(0, w - 1);
                    acc += kv * src[(y * w + xx) as usize];
                }
                tmp[(y * w + x) as usize] = acc;
            }
        }
        let base = (c as i64 * w * h) as usize;
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0f32;
                for (i, kv) in k.iter().enumerate() {
                    let yy = (y + i as i64 - r).clamp(0, h - 1);
                    acc += kv * tmp[(yy * w + x) as usize];
                }
                out.data[base + (y * w + x) as usize] = acc.clamp(0.0, 1.0);
            }
        }
    }
    out
}

/// Circle-of-confusion radius in pixels for a hit at depth `z`.
pub fn blur_radius(aperture: f64, z: f64, focal_distance: f64) -> f64 {
    let inv = if z.is_finite() { 1.0 / z } else { 0.0 };
    (aperture * (inv - 1.0 / focal_distance).abs()).clamp(0.0, 8.0)
}

/// Per-pixel gather blur whose width follows the depth map.
pub fn depth_of_field(image: &Image, depth: &[f32], aperture: f64, focal_distance: f64) -> Image {
    let (w, h) = (image.width as i64, image.height as i64);
    let mut out = image.clone();
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let sigma = blur_radius(aperture, depth[i] as f64, focal_distance);
            if sigma < 1e-6 {
                continue;
            }
            let r = (3.0 * sigma).ceil() as i64;
            for c in 0..image.channels {
                let src = image.plane(c);
                let mut acc = 0.0f64;
                let mut norm = 0.0f64;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let yy = (y + dy).clamp(0, h - 1);
                        let xx = (x + dx).clamp(0, w - 1);
                        let wgt = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                        acc += wgt * src[(yy * w + xx) as usize] as f64;
                        norm += wgt;
                    }
                }
                let dst = (c as i64 * w * h) as usize + i;
                out.data[dst] = ((acc / norm) as f32).clamp(0.0, 1.0);
            }
        }
    }
    out
}

/// Both eye images of an agent with the same filter settings, left first.
pub fn render_binocular(
    agent: &Agent,
    world: &World,
    config: &VisionConfig,
    light: &Lighting,
) -> [(Image, Rendered); 2] {
    let scene = agent.ray_scene(world);
    agent.eye_poses().map(|pose| {
        let camera = Camera {
            pose,
            intrinsics: agent.config.intrinsics,
            focal_distance: config.focal_distance,
        };
        let r = render(&scene, &camera, light);
        (apply_filters(&r.image, &r.depth, config), r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{PhysicsConfig, RigidBody, Shape};

    fn camera_at_origin() -> Camera {
        Camera {
            pose: Pose::IDENTITY,
            intrinsics: Intrinsics::default(),
            focal_distance: 1.0,
        }
    }

    fn sphere_scene(at: DVec3, color: [f64; 3]) -> RayScene {
        let mut w = World::new(PhysicsConfig::default());
        w.spawn(
            RigidBody::fixed("s", at).with_color(color),
            Shape::Sphere { radius: 1.0 },
        )
        .unwrap();
        RayScene::capture(&w, |_| true)
    }

    #[test]
    fn empty_scene_is_background() {
        let light = Lighting::default();
        let r = render(&RayScene::default(), &camera_at_origin(), &light);
        assert!(r.depth.iter().all(|d| d.is_infinite()));
        for c in 0..3 {
            assert!(r
                .image
                .plane(c)
                .iter()
                .all(|&v| v == light.background[c as usize] as f32));
        }
    }

    #[test]
    fn centred_sphere_is_symmetric() {
        let r = render(
            &sphere_scene(DVec3::Z * 5.0, [1.0; 3]),
            &camera_at_origin(),
            &Lighting::default(),
        );
        let (c0, r0, c1, r1) = r.mask_bounds(|_| true).unwrap();
        let cx = (c0 + c1 + 1) as f64 / 2.0;
        let cy = (r0 + r1 + 1) as f64 / 2.0;
        assert!((cx - 42.0).abs() <= 1.0 && (cy - 42.0).abs() <= 1.0);
        assert!(r.depth.iter().all(|&d| d.is_infinite() || d > 0.0));
    }

    #[test]
    fn shading_identity() {
        let light = Lighting {
            direction: DVec3::NEG_Z,
            intensity: 1.0,
            ambient: 0.0,
            background: [0.0; 3],
        };
        let r = render(&sphere_scene(DVec3::Z * 5.0, [1.0; 3]), &camera_at_origin(), &light);
        let centre = (41 * 84 + 41) as usize;
        for c in 0..3 {
            assert!((r.image.plane(c)[centre] - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn filters() {
        let img = Image::filled(3, 8, 8, &[1.0]);
        let depth = vec![2.0f32; 64];
        assert_eq!(apply_filters(&img, &depth, &VisionConfig::default()), img);
        let g = grayscale(&img);
        assert!(g.data.iter().all(|&v| (v - 1.0).abs() < 1e-6));
        let mut noisy = img.clone();
        for (i, v) in noisy.data.iter_mut().enumerate() {
            *v = ((i * 37) % 11) as f32 / 10.0;
        }
        let cfg = VisionConfig {
            depth_of_field: true,
            aperture: 4.0,
            focal_distance: 2.0,
            ..VisionConfig::default()
        };
        assert_eq!(apply_filters(&noisy, &depth, &cfg), noisy);
        let a = gaussian_blur(&grayscale(&noisy), 1.3);
        let b = grayscale(&gaussian_blur(&noisy, 1.3));
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn projection_round_trip() {
        let k = Intrinsics::default();
        let d = k.pixel_dir(10, 70);
        let (u, v) = k.project(d * 3.0).unwrap();
        assert!((u - 70.5).abs() < 1e-9 && (v - 10.5).abs() < 1e-9);
        // image right is the camera's -x
        assert!(d.x < 0.0);
    }
}
