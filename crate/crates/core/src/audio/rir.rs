//! Shoebox room impulse responses by the image-source method.

use serde::{Deserialize, Serialize};

use super::AudioConfig;
use crate::error::{Error, Result};
use crate::math::DVec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomAcoustics {
    /// Minimum corner of the box in world coordinates.
    #[serde(default)]
    pub origin: DVec3,
    pub room_size: DVec3,
    /// Wall reflection coefficient.
    pub beta: f64,
    pub max_order: u32,
}

impl RoomAcoustics {
    pub fn validate(&self) -> Result<()> {
        if self.room_size.min_element() <= 0.0 || !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidGeometry(format!(
                "room needs positive size and beta in [0, 1], got {:?} / {}",
                self.room_size, self.beta
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: DVec3) -> bool {
        let l = p - self.origin;
        l.cmpgt(DVec3::ZERO).all() && l.cmplt(self.room_size).all()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageSource {
    pub position: DVec3,
    /// Total number of wall reflections on this path.
    pub order: u32,
    pub distance: f64,
    pub delay: usize,
    pub amplitude: f64,
}

/// Nearest-integer sample delay for a path length, ties to even.
pub fn delay_samples(distance: f64, config: &AudioConfig) -> usize {
    (distance / config.speed_of_sound * config.fs as f64).round_ties_even() as usize
}

/// Every image source of total reflection order up to `max_order`, in a
/// fixed enumeration order.
pub fn image_sources(room: &RoomAcoustics, src: DVec3, mic: DVec3, config: &AudioConfig) -> Result<Vec<ImageSource>> {
    room.validate()?;
    if !room.contains(src) || !room.contains(mic) {
        return Err(Error::InvalidGeometry(
            "source and microphone must lie strictly inside the room".into(),
        ));
    }
    let s = src - room.origin;
    let m = mic - room.origin;
    let n_max = room.max_order as i64;
    // per axis: (coordinate, reflections) for every (n, u) within order
    let axis_images = |axis: usize| -> Vec<(f64, u32)> {
        let l = room.room_size[axis];
        let x = s[axis];
        let mut v = Vec::new();
        for n in -n_max..=n_max {
            for u in 0..=1i64 {
                let count = (2 * n - u).unsigned_abs() as u32;
                if count <= room.max_order {
                    v.push((2.0 * n as f64 * l + (1 - 2 * u) as f64 * x, count));
                }
            }
        }
        v
    };
    let (ix, iy, iz) = (axis_images(0), axis_images(1), axis_images(2));
    let mut out = Vec::new();
    for &(x, cx) in &ix {
        for &(y, cy) in &iy {
            if cx + cy > room.max_order {
                continue;
            }
            for &(z, cz) in &iz {
                let order = cx + cy + cz;
                if order > room.max_order {
                    continue;
                }
                let p = DVec3::new(x, y, z);
                let d = p.distance(m);
                out.push(ImageSource {
                    position: p + room.origin,
                    order,
                    distance: d,
                    delay: delay_samples(d, config),
                    amplitude: room.beta.powi(order as i32) / d.max(config.d_floor),
                });
            }
        }
    }
    Ok(out)
}

/// Dense impulse response; taps landing on the same index add up.
pub fn compute_rir(room: &RoomAcoustics, src: DVec3, mic: DVec3, config: &AudioConfig) -> Result<Vec<f64>> {
    let images = image_sources(room, src, mic, config)?;
    let len = images.iter().map(|i| i.delay).max().unwrap_or(0) + 1;
    let mut h = vec![0.0; len];
    for i in &images {
        h[i.delay] += i.amplitude;
    }
    Ok(h)
}

/// Sum of squared amplitudes grouped by reflection order.
pub fn energy_by_order(images: &[ImageSource], max_order: u32) -> Vec<f64> {
    let mut e = vec![0.0; max_order as usize + 1];
    for i in images {
        e[i.order as usize] += i.amplitude * i.amplitude;
    }
    e
}
