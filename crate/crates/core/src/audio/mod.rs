//! Binaural audio: per-listener spatialization of point sources with
//! integer-sample delays, optional shoebox reverberation and HRIR filtering.

mod fft;
mod hrtf;
mod rir;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use fft::{fft_magnitude, interaural_lag};
pub use hrtf::{direction, woodworth_itd, HrirEntry, HrtfTable};
pub use rir::{compute_rir, delay_samples, energy_by_order, image_sources, ImageSource, RoomAcoustics};

use crate::error::{Error, Result};
use crate::math::{DVec3, Pose};
use crate::physics::BodyId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AudioMode {
    Mono,
    Stereo,
    Hrtf,
}

impl std::str::FromStr for AudioMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<AudioMode> {
        match s {
            "mono" => Ok(AudioMode::Mono),
            "stereo" => Ok(AudioMode::Stereo),
            "hrtf" => Ok(AudioMode::Hrtf),
            other => Err(Error::Config(format!("unknown audio mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for AudioMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AudioMode::Mono => "mono",
            AudioMode::Stereo => "stereo",
            AudioMode::Hrtf => "hrtf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AudioConfig {
    pub fs: u32,
    pub frame_samples: usize,
    pub speed_of_sound: f64,
    pub head_radius: f64,
    pub fft_window: usize,
    pub d_floor: f64,
    /// Contralateral low-pass in stereo and parametric modes.
    pub head_shadow: bool,
    pub shadow_cutoff_hz: f64,
    /// Spherical-head model when hrtf mode has no table.
    pub parametric_fallback: bool,
}

impl Default for AudioConfig {
    fn default() -> Self {
        AudioConfig {
            fs: 22050,
            frame_samples: 441,
            speed_of_sound: 343.0,
            head_radius: 0.0875,
            fft_window: 1024,
            d_floor: 0.1,
            head_shadow: false,
            shadow_cutoff_hz: 2000.0,
            parametric_fallback: true,
        }
    }
}

impl AudioConfig {
    pub fn validate(&self, dt_control: f64) -> Result<()> {
        if self.fs == 0 || self.speed_of_sound <= 0.0 || self.fft_window == 0 {
            return Err(Error::Config("audio rates must be positive".into()));
        }
        let expect = (self.fs as f64 * dt_control).round() as usize;
        if self.frame_samples != expect {
            return Err(Error::Config(format!(
                "frame_samples {} must equal fs * dt_control = {expect}",
                self.frame_samples
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AudioSource {
    pub id: u64,
    pub position: DVec3,
    pub clip: Arc<[f32]>,
    pub gain: f64,
    pub looping: bool,
    /// Index of the next unplayed sample, within `[0, clip.len()]`.
    pub cursor: usize,
    /// Samples played since the source started; keeps delayed tails
    /// addressable after a one-shot clip has run out.
    pub elapsed: u64,
    /// Body whose position the source follows, if any.
    pub attached: Option<BodyId>,
}

impl AudioSource {
    pub fn new(id: u64, position: DVec3, clip: Arc<[f32]>, gain: f64, looping: bool) -> AudioSource {
        AudioSource {
            id,
            position,
            clip,
            gain,
            looping,
            cursor: 0,
            elapsed: 0,
            attached: None,
        }
    }

    /// Clip value `t` samples after the source started. Looping clips are
    /// periodic in both directions.
    pub fn sample(&self, t: i64) -> f64 {
        let len = self.clip.len() as i64;
        if len == 0 {
            return 0.0;
        }
        if self.looping {
            self.clip[t.rem_euclid(len) as usize] as f64
        } else if (0..len).contains(&t) {
            self.clip[t as usize] as f64
        } else {
            0.0
        }
    }

    pub fn advance(&mut self, n: usize) {
        self.elapsed += n as u64;
        let len = self.clip.len() as u64;
        self.cursor = if len == 0 {
            0
        } else if self.looping {
            (self.elapsed % len) as usize
        } else {
            self.elapsed.min(len) as usize
        };
    }

    /// A one-shot source is finished once its clip and every delayed echo
    /// (bounded by `tail` samples) have been rendered.
    pub fn finished(&self, tail: usize) -> bool {
        !self.looping && self.elapsed >= (self.clip.len() + tail) as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Listener {
    /// Head frame: +z ahead, +x to the left, +y up.
    pub head: Pose,
    pub ear_offset: f64,
    pub mode: AudioMode,
}

impl Listener {
    pub fn new(head: Pose, mode: AudioMode) -> Listener {
        Listener {
            head,
            ear_offset: AudioConfig::default().head_radius,
            mode,
        }
    }

    /// World positions of the left and right ears.
    pub fn ears(&self) -> [DVec3; 2] {
        [
            self.head.transform_point(DVec3::X * self.ear_offset),
            self.head.transform_point(-DVec3::X * self.ear_offset),
        ]
    }

    /// Unit direction to `p` in the head frame.
    pub fn local_direction(&self, p: DVec3) -> DVec3 {
        self.head
            .inverse_transform_vector(p - self.head.position)
            .normalize_or(DVec3::Z)
    }
}

/// Delay/amplitude pairs of every path from a source to a receiver point.
fn paths(src: DVec3, mic: DVec3, room: Option<&RoomAcoustics>, config: &AudioConfig) -> Result<Vec<(usize, f64)>> {
    match room {
        None => {
            let d = src.distance(mic);
            Ok(vec![(delay_samples(d, config), 1.0 / d.max(config.d_floor))])
        }
        Some(room) => Ok(image_sources(room, src, mic, config)?
            .into_iter()
            .filter(|i| i.amplitude != 0.0)
            .map(|i| (i.delay, i.amplitude))
            .collect()),
    }
}

/// Received signal for samples `[from, from + n)` of the current frame,
/// where `from` may be negative to reach into history.
fn receive(source: &AudioSource, taps: &[(usize, f64)], from: i64, n: usize) -> Vec<f64> {
    let mut y = vec![0.0; n];
    let base = source.elapsed as i64 + from;
    for &(delay, amp) in taps {
        let a = amp * source.gain;
        let start = base - delay as i64;
        for (k, v) in y.iter_mut().enumerate() {
            *v += a * source.sample(start + k as i64);
        }
    }
    y
}

const SHADOW_WARMUP: usize = 64;

/// Single-pole low-pass over a warm-up prefix; the first `warm` samples of
/// `x` only prime the filter state and are dropped.
fn low_pass(x: &[f64], warm: usize, cutoff: f64, fs: u32) -> Vec<f64> {
    let alpha = 1.0 - (-2.0 * PI * cutoff / fs as f64).exp();
    let mut y = 0.0;
    let mut out = Vec::with_capacity(x.len() - warm);
    for (i, &v) in x.iter().enumerate() {
        y += alpha * (v - y);
        if i >= warm {
            out.push(y);
        }
    }
    out
}

/// One source as heard by one listener over the next `n` samples.
pub fn spatialize(
    source: &AudioSource,
    listener: &Listener,
    hrtf: Option<&HrtfTable>,
    room: Option<&RoomAcoustics>,
    config: &AudioConfig,
    n: usize,
) -> Result<[Vec<f64>; 2]> {
    let head = listener.head.position;
    match listener.mode {
        AudioMode::Mono => {
            let d = source.position.distance(head);
            let taps = match room {
                None => vec![(0, 1.0 / d.max(config.d_floor))],
                // reflections keep their delay relative to the direct path
                Some(_) => {
                    let mut t = paths(source.position, head, room, config)?;
                    let d0 = delay_samples(d, config);
                    t.retain(|&(dl, _)| dl >= d0);
                    t.iter().map(|&(dl, a)| (dl - d0, a)).collect()
                }
            };
            let y = receive(source, &taps, 0, n);
            Ok([y.clone(), y])
        }
        AudioMode::Stereo => {
            let ears = listener.ears();
            let warm = if config.head_shadow { SHADOW_WARMUP } else { 0 };
            let dir = listener.local_direction(source.position);
            let mut out: [Vec<f64>; 2] = Default::default();
            for (e, ear) in ears.iter().enumerate() {
                let taps = paths(source.position, *ear, room, config)?;
                let x = receive(source, &taps, -(warm as i64), n + warm);
                let outward = if e == 0 { dir.x } else { -dir.x };
                out[e] = if config.head_shadow && outward < 0.0 {
                    low_pass(&x, warm, config.shadow_cutoff_hz, config.fs)
                } else {
                    x[warm..].to_vec()
                };
            }
            Ok(out)
        }
        AudioMode::Hrtf => {
            let taps = paths(source.position, head, room, config)?;
            let dir = listener.local_direction(source.position);
            match hrtf.filter(|t| !t.is_empty()) {
                Some(table) => {
                    let entry = table.nearest(dir).expect("non-empty table");
                    let m = table.taps.max(1) - 1;
                    let x = receive(source, &taps, -(m as i64), n + m);
                    let conv = |h: &[f32]| -> Vec<f64> {
                        (0..n)
                            .map(|k| h.iter().enumerate().map(|(j, &c)| c as f64 * x[k + m - j]).sum())
                            .collect()
                    };
                    Ok([conv(&entry.left), conv(&entry.right)])
                }
                None if config.parametric_fallback => Ok(parametric(source, &taps, dir, config, n)),
                None => Err(Error::Config(
                    "hrtf mode needs an HRIR table or the parametric fallback".into(),
                )),
            }
        }
    }
}

/// Spherical-head rendering: the far ear hears the head-centre signal
/// later by the Woodworth delay, optionally low-passed in proportion to
/// how lateral the source is.
fn parametric(
    source: &AudioSource,
    taps: &[(usize, f64)],
    dir: DVec3,
    config: &AudioConfig,
    n: usize,
) -> [Vec<f64>; 2] {
    let theta = dir.x.abs().min(1.0).asin();
    let itd = woodworth_itd(config.head_radius, config.speed_of_sound, theta);
    let extra = (itd * config.fs as f64).round_ties_even() as usize;
    let near = receive(source, taps, 0, n);
    let far_taps: Vec<(usize, f64)> = taps.iter().map(|&(d, a)| (d + extra, a)).collect();
    let far = if config.head_shadow && theta > 0.0 {
        let w = SHADOW_WARMUP;
        let x = receive(source, &far_taps, -(w as i64), n + w);
        let lp = low_pass(&x, w, config.shadow_cutoff_hz, config.fs);
        let s = theta.sin();
        x[w..].iter().zip(&lp).map(|(a, b)| (1.0 - s) * a + s * b).collect()
    } else {
        receive(source, &far_taps, 0, n)
    };
    if dir.x >= 0.0 {
        [near, far]
    } else {
        [far, near]
    }
}

/// Per-listener sum over all sources, clipped to `[-1, 1]`. Cursors are not
/// touched; call [`advance`] once after every listener has been rendered.
pub fn mix_frame(
    listeners: &[Listener],
    sources: &[AudioSource],
    hrtf: Option<&HrtfTable>,
    room: Option<&RoomAcoustics>,
    config: &AudioConfig,
    n: usize,
) -> Result<Vec<[Vec<f32>; 2]>> {
    listeners
        .iter()
        .map(|l| {
            let mut acc = [vec![0.0f64; n], vec![0.0f64; n]];
            for s in sources {
                let y = spatialize(s, l, hrtf, room, config, n)?;
                for c in 0..2 {
                    for (a, v) in acc[c].iter_mut().zip(&y[c]) {
                        *a += v;
                    }
                }
            }
            Ok(acc.map(|ch| ch.into_iter().map(|v| v.clamp(-1.0, 1.0) as f32).collect()))
        })
        .collect()
}

/// Moves every cursor forward by `n` and drops one-shot sources whose echoes
/// have died out.
pub fn advance(sources: &mut Vec<AudioSource>, n: usize, tail: usize) {
    for s in sources.iter_mut() {
        s.advance(n);
    }
    sources.retain(|s| !s.finished(tail));
}

/// Looped sine at `freq` Hz whose length is a whole number of periods when
/// possible, so the loop point is seamless.
pub fn tone(freq: f64, amplitude: f64, fs: u32, seconds: f64) -> Arc<[f32]> {
    let n = (fs as f64 * seconds).round() as usize;
    (0..n)
        .map(|k| (amplitude * (2.0 * PI * freq * k as f64 / fs as f64).sin()) as f32)
        .collect()
}
