//! Signal processing front and back end: STFT analysis/synthesis, log-magnitude
//! scaling and Griffin-Lim phase reconstruction.
//!
//! Everything here is a pure function of its inputs and runs in `f64`.

mod griffin_lim;
mod scale;
mod stft;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use griffin_lim::{griffin_lim, griffin_lim_with, GriffinLimOptions, GriffinLimOutput, PhaseInit};
pub use scale::{log_to_mag, mag_to_log, DB_OFFSET, DB_RANGE, MAG_FLOOR};
pub use stft::{istft, magnitude, stft, weighted_frobenius, StftProcessor};

pub use rustfft::num_complex::Complex64;

/// Sample rate every waveform is brought to on load.
pub const SAMPLE_RATE: u32 = 16_000;

/// Mono time-domain signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Validation("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Validation(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Self {
        Self {
            samples: vec![0.0; len],
            sample_rate: sample_rate.max(1),
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Rescales the whole signal by `1 / peak` when the peak exceeds one.
    pub fn limit_peak(mut self) -> Self {
        let peak = self.peak();
        if peak > 1.0 {
            self.samples.iter_mut().for_each(|s| *s /= peak);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// Periodic Hann window.
    #[default]
    Hann,
    Rectangular,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Hann => (0..len)
                .map(|n| {
                    0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos()
                })
                .collect(),
            WindowKind::Rectangular => vec![1.0; len],
        }
    }
}

/// STFT analysis parameters. Frames are centered on multiples of `hop` with
/// zero padding of `n_fft / 2` on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StftConfig {
    pub n_fft: usize,
    pub hop: usize,
    pub window: WindowKind,
    pub sample_rate: u32,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            n_fft: 510,
            hop: 160,
            window: WindowKind::Hann,
            sample_rate: SAMPLE_RATE,
        }
    }
}

impl StftConfig {
    pub fn freq_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    /// Frame count for a signal of `len` samples.
    pub fn frames_for(&self, len: usize) -> usize {
        len / self.hop + 1
    }

    /// Longest signal that `frames` frames can synthesize.
    pub fn max_length_for(&self, frames: usize) -> usize {
        if frames == 0 {
            return 0;
        }
        (frames - 1) * self.hop + self.n_fft - self.n_fft / 2
    }

    /// Checks sizes and that the squared window overlap-adds to a sum bounded
    /// away from zero, which is what exact least-squares synthesis needs.
    pub fn validate(&self) -> Result<()> {
        if self.n_fft < 2 {
            return Err(Error::Config(format!("n_fft must be >= 2, got {}", self.n_fft)));
        }
        if self.hop == 0 || self.hop > self.n_fft {
            return Err(Error::Config(format!(
                "hop must be in 1..=n_fft ({}), got {}",
                self.n_fft, self.hop
            )));
        }
        if self.sample_rate == 0 {
            return Err(Error::Config("sample_rate must be positive".into()));
        }
        let window = self.window.coefficients(self.n_fft);
        let min_sum = (0..self.hop)
            .map(|phase| {
                window
                    .iter()
                    .skip(phase)
                    .step_by(self.hop)
                    .map(|w| w * w)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        if min_sum < 1e-8 {
            return Err(Error::Config(format!(
                "window/hop pair does not overlap-add (n_fft {}, hop {})",
                self.n_fft, self.hop
            )));
        }
        Ok(())
    }
}

fn check_finite_nonneg(values: &Array2<f64>, what: &str) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Validation(format!("{what} entry {v} is negative or non-finite")));
    }
    Ok(())
}

/// F x T matrix of linear magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrogram {
    values: Array2<f64>,
    config: StftConfig,
}

impl MagnitudeSpectrogram {
    pub fn new(values: Array2<f64>, config: StftConfig) -> Result<Self> {
        check_finite_nonneg(&values, "magnitude")?;
        if values.nrows() != config.freq_bins() {
            return Err(Error::Shape(format!(
                "magnitude has {} rows, config expects {}",
                values.nrows(),
                config.freq_bins()
            )));
        }
        Ok(Self { values, config })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn frames(&self) -> usize {
        self.values.ncols()
    }
}

/// F x T log-magnitude matrix normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSpectrogram {
    values: Array2<f64>,
    config: StftConfig,
}

impl LogSpectrogram {
    pub fn new(values: Array2<f64>, config: StftConfig) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Validation(format!("log-spectrogram entry {v} outside [0, 1]")));
        }
        if values.nrows() != config.freq_bins() {
            return Err(Error::Shape(format!(
                "log-spectrogram has {} rows, config expects {}",
                values.nrows(),
                config.freq_bins()
            )));
        }
        Ok(Self { values, config })
    }

    /// Clamps arbitrary model output into the valid range.
    pub fn from_clamped(values: Array2<f64>, config: StftConfig) -> Result<Self> {
        let values = values.mapv(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) });
        Self::new(values, config)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn frames(&self) -> usize {
        self.values.ncols()
    }

    pub fn bins(&self) -> usize {
        self.values.nrows()
    }
}

/// Normalized log-spectrogram of a waveform.
pub fn log_spectrogram(w: &Waveform, cfg: &StftConfig) -> Result<LogSpectrogram> {
    let spec = stft(w, cfg)?;
    Ok(mag_to_log(&magnitude(&spec, cfg)?))
}
