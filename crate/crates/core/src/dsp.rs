//! Spectral building blocks: radix-2 FFT, mel filterbank and DCT-II.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math;

/// Precomputed in-place radix-2 complex FFT of a fixed power-of-two size.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddle_re: Vec<f64>,
    twiddle_im: Vec<f64>,
    bitrev: Vec<usize>,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2, "FFT size must be a power of two");
        let half = n / 2;
        let twiddle_re = (0..half).map(|k| math::cos(-2.0 * PI * k as f64 / n as f64)).collect();
        let twiddle_im = (0..half).map(|k| math::sin(-2.0 * PI * k as f64 / n as f64)).collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n).map(|i| i.reverse_bits() >> (usize::BITS - bits)).collect();
        Self {
            n,
            twiddle_re,
            twiddle_im,
            bitrev,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Forward transform in place. `inverse` flips the twiddle sign and
    /// scales by `1/n`.
    pub fn transform(&self, re: &mut [f64], im: &mut [f64], inverse: bool) {
        let n = self.n;
        assert_eq!(re.len(), n);
        assert_eq!(im.len(), n);
        for i in 0..n {
            let j = self.bitrev[i];
            if j > i {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let sign = if inverse { -1.0 } else { 1.0 };
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let wr = self.twiddle_re[k * step];
                    let wi = sign * self.twiddle_im[k * step];
                    let a = start + k;
                    let b = a + half;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            size *= 2;
        }
        if inverse {
            let scale = 1.0 / n as f64;
            re.iter_mut().for_each(|v| *v *= scale);
            im.iter_mut().for_each(|v| *v *= scale);
        }
    }
}

/// Magnitudes of bins `0..=n/2` of the zero-padded FFT of a real frame.
pub fn magnitude_spectrum(fft: &Fft, frame: &[f64]) -> Vec<f64> {
    let n = fft.len();
    assert!(frame.len() <= n, "frame longer than FFT size");
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    re[..frame.len()].copy_from_slice(frame);
    fft.transform(&mut re, &mut im, false);
    (0..=n / 2).map(|k| math::hypot(re[k], im[k])).collect()
}

/// Linear autocorrelation `r[lag] = sum_n x[n] x[n+lag]` for `lag <= max_lag`,
/// computed through the FFT.
pub fn autocorrelation(fft: &Fft, x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = fft.len();
    assert!(x.len() + max_lag <= n, "FFT too short for linear autocorrelation");
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    re[..x.len()].copy_from_slice(x);
    fft.transform(&mut re, &mut im, false);
    for k in 0..n {
        re[k] = re[k] * re[k] + im[k] * im[k];
        im[k] = 0.0;
    }
    fft.transform(&mut re, &mut im, true);
    re.truncate(max_lag + 1);
    re
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * math::log10(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (math::pow(10.0, mel / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale, applied to a
/// magnitude spectrum of `n_fft / 2 + 1` bins.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// Per band: first bin index and weights for consecutive bins.
    bands: Vec<(usize, Vec<f64>)>,
}

impl MelFilterbank {
    pub fn new(n_bands: usize, n_fft: usize, sample_rate: u32, f_lo: f64, f_hi: f64) -> Self {
        let mel_lo = hz_to_mel(f_lo);
        let mel_hi = hz_to_mel(f_hi);
        let edges: Vec<f64> = (0..n_bands + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_bands + 1) as f64))
            .collect();
        let bin_hz = sample_rate as f64 / n_fft as f64;
        let n_bins = n_fft / 2 + 1;
        let bands = (0..n_bands)
            .map(|b| {
                let (lo, mid, hi) = (edges[b], edges[b + 1], edges[b + 2]);
                let first = math::ceil(lo / bin_hz) as usize;
                let last = (math::floor(hi / bin_hz) as usize).min(n_bins - 1);
                let weights = (first..=last)
                    .map(|k| {
                        let f = k as f64 * bin_hz;
                        if f <= mid {
                            ((f - lo) / (mid - lo)).max(0.0)
                        } else {
                            ((hi - f) / (hi - mid)).max(0.0)
                        }
                    })
                    .collect();
                (first, weights)
            })
            .collect();
        Self { bands }
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    /// Weighted power `sum_k w_k |X_k|^2` per band.
    pub fn band_powers(&self, magnitudes: &[f64]) -> Vec<f64> {
        self.bands
            .iter()
            .map(|(first, w)| {
                w.iter()
                    .zip(&magnitudes[*first..])
                    .map(|(w, m)| w * m * m)
                    .sum()
            })
            .collect()
    }
}

/// Unnormalized DCT-II, coefficients `0..n_out`.
pub fn dct2(x: &[f64], n_out: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..n_out)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, &v)| v * math::cos(PI * k as f64 * (i as f64 + 0.5) / n))
                .sum()
        })
        .collect()
}
