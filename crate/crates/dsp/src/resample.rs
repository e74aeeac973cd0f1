//! Rational-ratio polyphase resampling to 128 Hz with a Kaiser-windowed
//! sinc anti-aliasing filter.
//!
//! The filter runs at the upsampled rate fs * L, cut off at 0.45 * 128 Hz
//! with the stop band starting at 60 Hz, 70 dB down. The symmetric FIR's
//! group delay is compensated, so output sample m sits at input time
//! m * M / L.

use crate::buffer::RecordingBuffer;
use crate::error::{DspError, Result};

pub const TARGET_FS: u32 = 128;
const CUTOFF_HZ: f64 = 0.45 * TARGET_FS as f64; // 57.6
const STOP_HZ: f64 = 60.0;
const ATTENUATION_DB: f64 = 70.0;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half_sq = (x / 2.0) * (x / 2.0);
    for k in 1..200 {
        term *= half_sq / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-16 {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc low-pass. `cutoff` and `transition` are normalized
/// to the sampling rate of the filter.
fn kaiser_lowpass(cutoff: f64, transition: f64, attenuation_db: f64) -> Vec<f64> {
    let beta = 0.1102 * (attenuation_db - 8.7);
    let delta_omega = 2.0 * std::f64::consts::PI * transition;
    let mut taps = ((attenuation_db - 7.95) / (2.285 * delta_omega)).ceil() as usize;
    if taps % 2 == 0 {
        taps += 1;
    }
    let center = (taps - 1) as f64 / 2.0;
    let i0_beta = bessel_i0(beta);
    (0..taps)
        .map(|i| {
            let m = i as f64 - center;
            let sinc = if m == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * std::f64::consts::PI * cutoff * m).sin() / (std::f64::consts::PI * m)
            };
            let r = 2.0 * i as f64 / (taps - 1) as f64 - 1.0;
            let window = bessel_i0(beta * (1.0 - r * r).sqrt()) / i0_beta;
            sinc * window
        })
        .collect()
}

/// Resample one channel by L/M through the given taps (delay-compensated).
fn resample_channel(x: &[f64], h: &[f64], l: usize, m: usize) -> Vec<f64> {
    let delay = (h.len() - 1) / 2;
    let n_out = x.len() * l / m;
    let mut y = Vec::with_capacity(n_out);
    for out_idx in 0..n_out {
        let t = out_idx * m + delay;
        // h index = t - j*L must lie in [0, len)
        let j_hi = t / l;
        let j_lo = (t + 1).saturating_sub(h.len()).div_ceil(l);
        let mut acc = 0.0;
        for j in j_lo..=j_hi {
            if j < x.len() {
                acc += h[t - j * l] * x[j];
            }
        }
        y.push(acc * l as f64);
    }
    y
}

/// Anti-aliased resampling to 128 Hz. A buffer already at 128 Hz is
/// returned unchanged; rates below 128 Hz are rejected.
pub fn resample_to_128(buffer: &RecordingBuffer) -> Result<RecordingBuffer> {
    if buffer.fs == TARGET_FS {
        return Ok(buffer.clone());
    }
    if buffer.fs < TARGET_FS {
        return Err(DspError::UpsamplingUnsupported { fs: buffer.fs });
    }
    let g = gcd(buffer.fs as u64, TARGET_FS as u64);
    let l = (TARGET_FS as u64 / g) as usize;
    let m = (buffer.fs as u64 / g) as usize;

    let up_rate = buffer.fs as f64 * l as f64;
    let cutoff = CUTOFF_HZ / up_rate;
    let transition = (STOP_HZ - CUTOFF_HZ) * 2.0 / up_rate;
    let taps = kaiser_lowpass(cutoff, transition, ATTENUATION_DB);

    buffer.map_channels(TARGET_FS, |ch| resample_channel(ch, &taps, l, m))
}
