//! Butterworth band-pass design: analog low-pass prototype, low-pass to
//! band-pass transform, bilinear transform with frequency pre-warping, and
//! factorization into second-order sections.

use num_complex::Complex64;

use crate::error::{DspError, Result};

/// One second-order section with a0 normalized to 1:
/// `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Complex response at z on the unit circle.
    pub fn response(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let num = Complex64::new(self.b0, 0.0) + zi * (self.b1 + zi * self.b2);
        let den = Complex64::new(1.0, 0.0) + zi * (self.a1 + zi * self.a2);
        num / den
    }

    /// Magnitudes of the two poles of this section.
    pub fn pole_magnitudes(&self) -> [f64; 2] {
        // z^2 + a1 z + a2
        let disc = self.a1 * self.a1 - 4.0 * self.a2;
        if disc >= 0.0 {
            let r = disc.sqrt();
            [
                ((-self.a1 + r) / 2.0).abs(),
                ((-self.a1 - r) / 2.0).abs(),
            ]
        } else {
            let m = self.a2.sqrt(); // |p|^2 = a2 for complex pairs
            [m, m]
        }
    }
}

/// Cascade of biquads plus the design metadata it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct BiquadCascade {
    pub sections: Vec<Biquad>,
    pub order: usize,
    pub f_low: f64,
    pub f_high: f64,
    pub fs: f64,
}

impl BiquadCascade {
    pub fn response_at(&self, f_hz: f64) -> Complex64 {
        let omega = 2.0 * std::f64::consts::PI * f_hz / self.fs;
        let z = Complex64::from_polar(1.0, omega);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z))
    }

    pub fn magnitude_at(&self, f_hz: f64) -> f64 {
        self.response_at(f_hz).norm()
    }

    pub fn magnitude_db_at(&self, f_hz: f64) -> f64 {
        20.0 * self.magnitude_at(f_hz).log10()
    }

    pub fn max_pole_magnitude(&self) -> f64 {
        self.sections
            .iter()
            .flat_map(|s| s.pole_magnitudes())
            .fold(0.0, f64::max)
    }
}

/// Design a digital Butterworth band-pass of total order `order` (even).
///
/// The analog prototype has order `order / 2`; the band edges land at the
/// half-power (-3 dB) points after pre-warping.
pub fn design_butterworth_bandpass(
    order: usize,
    f_low: f64,
    f_high: f64,
    fs: f64,
) -> Result<BiquadCascade> {
    if order == 0 || order % 2 != 0 {
        return Err(DspError::OddOrder(order));
    }
    if !(f_low > 0.0 && f_low < f_high && f_high < fs / 2.0) {
        return Err(DspError::InvalidBand { f_low, f_high, fs });
    }

    let n = order / 2;

    // Analog low-pass prototype: unit-gain, poles on the unit circle's left
    // half, exp(j pi (2k + n - 1) / (2n)).
    let prototype: Vec<Complex64> = (1..=n)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + n - 1) as f64 / (2 * n) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect();

    // Pre-warped edges for the bilinear transform.
    let fs2 = 2.0 * fs;
    let w1 = fs2 * (std::f64::consts::PI * f_low / fs).tan();
    let w2 = fs2 * (std::f64::consts::PI * f_high / fs).tan();
    let w0 = (w1 * w2).sqrt();
    let bw = w2 - w1;

    // Low-pass -> band-pass: each prototype pole becomes two, n zeros at 0,
    // gain bw^n.
    let mut analog_poles = Vec::with_capacity(order);
    for &p in &prototype {
        let half = p * (bw / 2.0);
        let root = (half * half - Complex64::new(w0 * w0, 0.0)).sqrt();
        analog_poles.push(half + root);
        analog_poles.push(half - root);
    }
    let gain_bp = bw.powi(n as i32);

    // Bilinear transform. The n analog zeros at s = 0 map to z = +1, the n
    // zeros at infinity map to z = -1.
    let mut digital_poles = Vec::with_capacity(order);
    let mut den_prod = Complex64::new(1.0, 0.0);
    for &p in &analog_poles {
        digital_poles.push((Complex64::new(fs2, 0.0) + p) / (Complex64::new(fs2, 0.0) - p));
        den_prod *= Complex64::new(fs2, 0.0) - p;
    }
    let num_prod = Complex64::new(fs2.powi(n as i32), 0.0);
    let gain = gain_bp * (num_prod / den_prod).re;

    // Pair poles into sections. Complex poles pair with their conjugates;
    // real poles (wide-band designs) pair among themselves.
    let mut complex_poles: Vec<Complex64> = digital_poles
        .iter()
        .copied()
        .filter(|p| p.im > 1e-12)
        .collect();
    let mut real_poles: Vec<f64> = digital_poles
        .iter()
        .filter(|p| p.im.abs() <= 1e-12)
        .map(|p| p.re)
        .collect();
    complex_poles.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    real_poles.sort_by(|a, b| a.abs().total_cmp(&b.abs()));

    let n_sections = n;
    debug_assert_eq!(complex_poles.len() * 2 + real_poles.len(), order);
    let section_gain = gain.powf(1.0 / n_sections as f64);

    let mut sections = Vec::with_capacity(n_sections);
    for p in complex_poles {
        sections.push(Biquad {
            // zeros at +1 and -1: (z - 1)(z + 1) = z^2 - 1
            b0: section_gain,
            b1: 0.0,
            b2: -section_gain,
            a1: -2.0 * p.re,
            a2: p.norm_sqr(),
        });
    }
    for pair in real_poles.chunks(2) {
        let (r1, r2) = (pair[0], pair[1]);
        sections.push(Biquad {
            b0: section_gain,
            b1: 0.0,
            b2: -section_gain,
            a1: -(r1 + r2),
            a2: r1 * r2,
        });
    }

    Ok(BiquadCascade {
        sections,
        order,
        f_low,
        f_high,
        fs,
    })
}
