//! Head-related impulse response tables and the spherical-head fallback.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::DVec3;

const MAGIC: &[u8; 4] = b"VHRT";

#[derive(Clone, Debug, PartialEq)]
pub struct HrirEntry {
    /// Degrees; 0 is straight ahead and positive values are to the left.
    pub azimuth: f32,
    pub elevation: f32,
    pub left: Vec<f32>,
    pub right: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HrtfTable {
    pub entries: Vec<HrirEntry>,
    pub sample_rate: u32,
    pub taps: usize,
}

impl HrtfTable {
    pub fn new(entries: Vec<HrirEntry>, sample_rate: u32) -> Result<HrtfTable> {
        let taps = entries.first().map_or(0, |e| e.left.len());
        for e in &entries {
            if e.left.len() != taps || e.right.len() != taps {
                return Err(Error::Config("HRIR entries differ in tap count".into()));
            }
            if !(-180.0..180.0).contains(&e.azimuth) || !(-90.0..=90.0).contains(&e.elevation) {
                return Err(Error::Config(format!(
                    "HRIR direction out of range: az {} el {}",
                    e.azimuth, e.elevation
                )));
            }
        }
        if sample_rate == 0 {
            return Err(Error::Config("HRIR sample rate is zero".into()));
        }
        Ok(HrtfTable {
            entries,
            sample_rate,
            taps,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn load(path: &Path, fs: u32) -> Result<HrtfTable> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        HrtfTable::from_bytes(&bytes)?.resampled(fs)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<HrtfTable> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Config("not a VHRT file".into()));
        }
        let count = r.u32()? as usize;
        let taps = r.u32()? as usize;
        let rate = r.u32()?;
        let need = count
            .checked_mul(8 + 8 * taps)
            .ok_or_else(|| Error::Config("VHRT header overflows".into()))?;
        if bytes.len() - r.at != need {
            return Err(Error::Config(format!(
                "VHRT body is {} bytes, header implies {need}",
                bytes.len() - r.at
            )));
        }
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let azimuth = r.f32()?;
            let elevation = r.f32()?;
            let left = (0..taps).map(|_| r.f32()).collect::<Result<_>>()?;
            let right = (0..taps).map(|_| r.f32()).collect::<Result<_>>()?;
            entries.push(HrirEntry {
                azimuth,
                elevation,
                left,
                right,
            });
        }
        HrtfTable::new(entries, rate)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.entries.len() * (8 + 8 * self.taps));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.taps as u32).to_le_bytes());
        out.extend_from_slice(&self.sample_rate.to_le_bytes());
        for e in &self.entries {
            out.extend_from_slice(&e.azimuth.to_le_bytes());
            out.extend_from_slice(&e.elevation.to_le_bytes());
            for v in e.left.iter().chain(&e.right) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Linear-interpolation resampling of every HRIR to `fs`.
    pub fn resampled(self, fs: u32) -> Result<HrtfTable> {
        if fs == self.sample_rate || self.taps == 0 {
            return Ok(self);
        }
        let ratio = self.sample_rate as f64 / fs as f64;
        let taps = ((self.taps as f64) / ratio).round().max(1.0) as usize;
        let resample = |h: &[f32]| -> Vec<f32> {
            (0..taps)
                .map(|j| {
                    let x = j as f64 * ratio;
                    let i = x.floor() as usize;
                    let f = x - i as f64;
                    let a = h.get(i).copied().unwrap_or(0.0) as f64;
                    let b = h.get(i + 1).copied().unwrap_or(0.0) as f64;
                    (a + (b - a) * f) as f32
                })
                .collect()
        };
        let entries = self
            .entries
            .iter()
            .map(|e| HrirEntry {
                azimuth: e.azimuth,
                elevation: e.elevation,
                left: resample(&e.left),
                right: resample(&e.right),
            })
            .collect();
        HrtfTable::new(entries, fs)
    }

    /// Entry closest in angle to a head-frame direction.
    pub fn nearest(&self, dir: DVec3) -> Option<&HrirEntry> {
        let d = dir.normalize_or(DVec3::Z);
        self.entries.iter().min_by(|a, b| {
            let da = direction(a.azimuth as f64, a.elevation as f64).dot(d);
            let db = direction(b.azimuth as f64, b.elevation as f64).dot(d);
            db.total_cmp(&da)
        })
    }
}

/// Head-frame unit vector for an azimuth/elevation pair in degrees.
pub fn direction(azimuth_deg: f64, elevation_deg: f64) -> DVec3 {
    let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    DVec3::new(el.cos() * az.sin(), el.sin(), el.cos() * az.cos())
}

/// Spherical-head interaural delay for a lateral angle in `[0, pi/2]`.
pub fn woodworth_itd(head_radius: f64, speed_of_sound: f64, theta: f64) -> f64 {
    head_radius / speed_of_sound * (theta + theta.sin())
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self
            .bytes
            .get(self.at..self.at + n)
            .ok_or_else(|| Error::Config("VHRT file truncated".into()))?;
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}
