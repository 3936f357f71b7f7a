//! Spectral features and interaural lag estimation.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Magnitude spectra of consecutive non-overlapping windows of each
/// channel. Output shape is `[windows, channels, fft_size / 2 + 1]`,
/// flattened row-major; the last window is zero-padded.
pub fn fft_magnitude(channels: &[&[f32]], fft_size: usize) -> (Vec<f32>, [usize; 3]) {
    let len = channels.iter().map(|c| c.len()).max().unwrap_or(0);
    let windows = len.div_ceil(fft_size).max(1);
    let bins = fft_size / 2 + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(fft_size);
    let mut out = Vec::with_capacity(windows * channels.len() * bins);
    let mut buf = vec![Complex::new(0.0, 0.0); fft_size];
    for w in 0..windows {
        for ch in channels {
            for (k, slot) in buf.iter_mut().enumerate() {
                let v = ch.get(w * fft_size + k).copied().unwrap_or(0.0);
                *slot = Complex::new(v as f64, 0.0);
            }
            fft.process(&mut buf);
            out.extend(buf[..bins].iter().map(|c| c.norm() as f32));
        }
    }
    (out, [windows, channels.len(), bins])
}

/// Lag `L` in `[-max_lag, max_lag]` maximizing `sum_k l[k] * r[k + L]`.
/// Positive means the left channel leads. Equal scores resolve to the
/// smallest `|L|`, then to the negative side.
pub fn interaural_lag(left: &[f32], right: &[f32], max_lag: usize) -> i64 {
    let n = left.len().min(right.len()) as i64;
    let m = max_lag as i64;
    let score = |lag: i64| -> f64 {
        let (lo, hi) = ((-lag).max(0), (n - lag).min(n));
        (lo..hi)
            .map(|k| left[k as usize] as f64 * right[(k + lag) as usize] as f64)
            .sum()
    };
    let mut best = (score(0), 0i64);
    for mag in 1..=m {
        for lag in [-mag, mag] {
            let s = score(lag);
            if s > best.0 {
                best = (s, lag);
            }
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_tone_peaks_at_its_bin() {
        let n = 1024;
        let tone: Vec<f32> = (0..n)
            .map(|k| (2.0 * std::f64::consts::PI * 32.0 * k as f64 / n as f64).sin() as f32)
            .collect();
        let (mag, shape) = fft_magnitude(&[&tone], n);
        assert_eq!(shape, [1, 1, 513]);
        let peak = (0..513).max_by(|&a, &b| mag[a].total_cmp(&mag[b])).unwrap();
        assert_eq!(peak, 32);
        assert!((mag[32] - 512.0).abs() < 1e-2);
    }

    #[test]
    fn padding_makes_extra_window() {
        let x = vec![1.0f32; 1500];
        let (mag, shape) = fft_magnitude(&[&x, &x], 1024);
        assert_eq!(shape, [2, 2, 513]);
        assert_eq!(mag.len(), 2 * 2 * 513);
        assert_eq!(mag[2 * 513], 476.0);
    }

    #[test]
    fn lag_sign_convention() {
        let mut l = vec![0.0f32; 200];
        let mut r = vec![0.0f32; 200];
        l[50] = 1.0;
        r[57] = 1.0;
        assert_eq!(interaural_lag(&l, &r, 20), 7);
        assert_eq!(interaural_lag(&r, &l, 20), -7);
        assert_eq!(interaural_lag(&l, &l, 20), 0);
        assert_eq!(interaural_lag(&[0.0; 10], &[0.0; 10], 3), 0);
    }
}
