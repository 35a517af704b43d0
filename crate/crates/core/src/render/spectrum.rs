use std::f64::consts::TAU;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::PcmBuffer;

pub const FFT_SIZE: usize = 8192;

/// Peaks must clear the median by this factor (20 dB).
const MEDIAN_FACTOR: f64 = 10.0;
/// Peaks must also be within this range of the strongest bin (60 dB).
const DYNAMIC_RANGE: f64 = 1e-3;
const ABSOLUTE_FLOOR: f64 = 1e-6;
/// A peak is the strict maximum of its ±3 bin neighbourhood.
const NEIGHBOURHOOD: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpectrumError {
    #[error("buffer has {0} samples, at least 8192 are needed")]
    TooShort(usize),
}

impl SpectrumError {
    pub fn code(&self) -> &'static str {
        "too-short"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub bin: usize,
    /// Parabolically interpolated frequency in Hz.
    pub freq: f64,
    pub magnitude: f64,
}

/// Single-sided magnitude spectrum, scaled so a full-scale sine of amplitude
/// `a` shows a peak close to `a`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub magnitudes: Vec<f64>,
    pub sample_rate: u32,
}

impl Spectrum {
    pub fn bin_hz(&self) -> f64 {
        self.sample_rate as f64 / FFT_SIZE as f64
    }

    pub fn bin_of(&self, freq: f64) -> usize {
        ((freq / self.bin_hz()).round().max(0.0) as usize).min(self.magnitudes.len() - 1)
    }

    pub fn median(&self) -> f64 {
        let mut m = self.magnitudes.clone();
        m.sort_by(f64::total_cmp);
        m[m.len() / 2]
    }

    pub fn max(&self) -> f64 {
        self.magnitudes.iter().copied().fold(0.0, f64::max)
    }

    /// Local maxima that clear the median by 20 dB and sit within 60 dB of
    /// the strongest bin, in ascending frequency.
    pub fn peaks(&self) -> Vec<Peak> {
        let mags = &self.magnitudes;
        let threshold = (self.median() * MEDIAN_FACTOR)
            .max(self.max() * DYNAMIC_RANGE)
            .max(ABSOLUTE_FLOOR);
        let mut out = Vec::new();
        for k in 1..mags.len() - 1 {
            let m = mags[k];
            if m < threshold {
                continue;
            }
            let lo = k.saturating_sub(NEIGHBOURHOOD);
            let hi = (k + NEIGHBOURHOOD).min(mags.len() - 1);
            let is_max = (lo..=hi).all(|j| j == k || mags[j] < m || (mags[j] == m && j > k));
            if !is_max {
                continue;
            }
            let (a, b, c) = (mags[k - 1], m, mags[k + 1]);
            let denom = a - 2.0 * b + c;
            let delta = if denom.abs() > 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
            out.push(Peak {
                bin: k,
                freq: (k as f64 + delta) * self.bin_hz(),
                magnitude: m,
            });
        }
        out
    }

    /// Mean squared magnitude of bins whose centre lies in `[lo, hi]` Hz.
    pub fn band_power(&self, lo: f64, hi: f64) -> Option<f64> {
        let hz = self.bin_hz();
        let bins: Vec<f64> = self
            .magnitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = *k as f64 * hz;
                *k > 0 && f >= lo && f <= hi
            })
            .map(|(_, m)| m * m)
            .collect();
        (!bins.is_empty()).then(|| bins.iter().sum::<f64>() / bins.len() as f64)
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }
}

/// Hann-windowed 8192-point transform of the middle of the buffer.
pub fn spectrum(buffer: &PcmBuffer) -> Result<Spectrum, SpectrumError> {
    let n = buffer.samples.len();
    if n < FFT_SIZE {
        return Err(SpectrumError::TooShort(n));
    }
    let start = (n - FFT_SIZE) / 2;
    let window: Vec<f64> = (0..FFT_SIZE)
        .map(|i| 0.5 * (1.0 - (TAU * i as f64 / FFT_SIZE as f64).cos()))
        .collect();
    let gain: f64 = window.iter().sum();
    let mut data: Vec<Complex<f64>> = buffer.samples[start..start + FFT_SIZE]
        .iter()
        .zip(&window)
        .map(|(x, w)| Complex::new(x * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(FFT_SIZE).process(&mut data);
    let magnitudes = data[..=FFT_SIZE / 2]
        .iter()
        .map(|c| 2.0 * c.norm() / gain)
        .collect();
    Ok(Spectrum {
        magnitudes,
        sample_rate: buffer.sample_rate,
    })
}
