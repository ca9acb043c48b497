//! LPC formant estimation: pre-emphasis, autocorrelation LPC via
//! Levinson-Durbin, polynomial roots by Aberth iteration.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::dsp::{magnitude_spectrum, Fft};
use crate::math;

use super::ExtractionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Formant {
    pub freq_hz: f64,
    pub bandwidth_hz: f64,
    /// Spectrum level at the formant relative to the F0 harmonic, dB.
    pub amp_rel_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Complex {
    re: f64,
    im: f64,
}

impl Complex {
    const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
    const ONE: Complex = Complex { re: 1.0, im: 0.0 };

    fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    fn abs(self) -> f64 {
        math::hypot(self.re, self.im)
    }

    fn arg(self) -> f64 {
        math::atan2(self.im, self.re)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Div for Complex {
    type Output = Complex;
    fn div(self, o: Complex) -> Complex {
        let d = o.re * o.re + o.im * o.im;
        Complex::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
}

/// LPC coefficients `a[1..=order]` of `A(z) = 1 + sum a_j z^-j` by the
/// autocorrelation method. `None` for a silent frame.
pub fn lpc(samples: &[f64], order: usize) -> Option<Vec<f64>> {
    let r: Vec<f64> = (0..=order)
        .map(|lag| {
            samples
                .iter()
                .zip(samples.iter().skip(lag))
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    if r[0] <= 0.0 {
        return None;
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    let mut prev = a.clone();
    for i in 1..=order {
        let acc: f64 = r[i] + (1..i).map(|j| prev[j] * r[i - j]).sum::<f64>();
        let k = -acc / err;
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= 0.0 {
            break;
        }
        prev.copy_from_slice(&a);
    }
    a.remove(0);
    Some(a)
}

fn horner(coeffs: &[f64], z: Complex) -> (Complex, Complex) {
    // p and p' at z for the monic polynomial z^n + c_1 z^(n-1) + ... + c_n.
    let mut p = Complex::ONE;
    let mut dp = Complex::ZERO;
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + Complex::new(c, 0.0);
    }
    (p, dp)
}

/// Roots of the monic polynomial with the given trailing coefficients.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    let radius = 0.9;
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let ang = 2.0 * PI * k as f64 / n as f64 + 0.4;
            Complex::new(radius * math::cos(ang), radius * math::sin(ang))
        })
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = horner(coeffs, z[k]);
            if p.abs() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex::ZERO;
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d.abs() > 0.0 {
                        repulsion = repulsion + Complex::ONE / d;
                    }
                }
            }
            let step = ratio / (Complex::ONE - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] = z[k] - step;
                max_step = max_step.max(step.abs());
            }
        }
        if max_step < 1e-13 {
            break;
        }
    }
    z
}

/// Resonances of an LPC polynomial: `(frequency Hz, bandwidth Hz)` for
/// every root in the upper half plane, ascending by frequency.
pub fn lpc_resonances(coeffs: &[f64], sample_rate: u32) -> Vec<(f64, f64)> {
    let rate = sample_rate as f64;
    let mut out: Vec<(f64, f64)> = polynomial_roots(coeffs)
        .into_iter()
        .filter(|r| r.im > 0.0)
        .map(|r| {
            let freq = r.arg() * rate / (2.0 * PI);
            let bw = -math::ln(r.abs()) * rate / PI;
            (freq, bw)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// F1..F3 of one windowed voiced frame. `None` when the frame is unvoiced,
/// silent, or yields fewer than three qualifying resonances.
pub fn compute_formants(
    frame: &[f64],
    f0_hz: Option<f64>,
    sample_rate: u32,
    cfg: &ExtractionConfig,
) -> Option<[Formant; 3]> {
    let f0 = f0_hz.filter(|f| *f > 0.0)?;
    let mut emphasized = Vec::with_capacity(frame.len());
    let mut prev = 0.0;
    for &x in frame {
        emphasized.push(x - cfg.pre_emphasis * prev);
        prev = x;
    }
    let coeffs = lpc(&emphasized, cfg.lpc_order)?;
    let candidates: Vec<(f64, f64)> = lpc_resonances(&coeffs, sample_rate)
        .into_iter()
        .filter(|&(f, bw)| {
            bw < cfg.max_formant_bandwidth_hz
                && f >= cfg.formant_min_hz
                && f <= cfg.formant_max_hz
        })
        .collect();
    if candidates.len() < 3 {
        return None;
    }
    let n_fft = frame.len().next_power_of_two();
    let spectrum = magnitude_spectrum(&Fft::new(n_fft), frame);
    let bin = |hz: f64| (math::round(hz * n_fft as f64 / sample_rate as f64) as usize).min(n_fft / 2);
    let reference = spectrum[bin(f0)];
    if reference <= 0.0 {
        return None;
    }
    let mut out = [Formant {
        freq_hz: 0.0,
        bandwidth_hz: 0.0,
        amp_rel_db: 0.0,
    }; 3];
    for (slot, &(freq, bw)) in out.iter_mut().zip(&candidates) {
        let ratio = (spectrum[bin(freq)] / reference).max(1e-10);
        *slot = Formant {
            freq_hz: freq,
            bandwidth_hz: bw,
            amp_rel_db: 20.0 * math::log10(ratio),
        };
    }
    Some(out)
}
