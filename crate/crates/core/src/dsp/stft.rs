use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{MagnitudeSpectrogram, StftConfig, Waveform};
use crate::error::{Error, Result};

/// Reusable STFT analysis/synthesis pair with cached FFT plans.
///
/// Synthesis is the least-squares inverse: frames are windowed again,
/// overlap-added and divided by the overlap-added squared window.
pub struct StftProcessor {
    cfg: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl StftProcessor {
    pub fn new(cfg: &StftConfig) -> Result<Self> {
        cfg.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            cfg: *cfg,
            window: cfg.window.coefficients(cfg.n_fft),
            forward: planner.plan_fft_forward(cfg.n_fft),
            inverse: planner.plan_fft_inverse(cfg.n_fft),
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    pub fn analyze(&self, samples: &[f64]) -> Array2<Complex64> {
        let n = self.cfg.n_fft;
        let pad = n / 2;
        let frames = self.cfg.frames_for(samples.len());
        let bins = self.cfg.freq_bins();
        let mut out = Array2::zeros((bins, frames));
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for t in 0..frames {
            let start = (t * self.cfg.hop) as isize - pad as isize;
            for (i, b) in buf.iter_mut().enumerate() {
                let idx = start + i as isize;
                let x = if idx >= 0 && (idx as usize) < samples.len() {
                    samples[idx as usize]
                } else {
                    0.0
                };
                *b = Complex64::new(x * self.window[i], 0.0);
            }
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            for (k, v) in buf.iter().take(bins).enumerate() {
                out[[k, t]] = *v;
            }
        }
        out
    }

    /// Least-squares synthesis of `length` samples. Caller guarantees the shape.
    pub fn synthesize(&self, spec: ArrayView2<Complex64>, length: usize) -> Vec<f64> {
        let n = self.cfg.n_fft;
        let pad = n / 2;
        let bins = self.cfg.freq_bins();
        let frames = spec.ncols();
        let mut acc = vec![0.0; length];
        let mut norm = vec![0.0; length];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        let scale = 1.0 / n as f64;
        for t in 0..frames {
            for k in 0..bins {
                buf[k] = spec[[k, t]];
            }
            // Hermitian completion; the real part of the inverse drops any
            // imaginary residue on the self-conjugate bins.
            for k in 1..n - bins + 1 {
                buf[n - k] = spec[[k, t]].conj();
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            let start = (t * self.cfg.hop) as isize - pad as isize;
            for i in 0..n {
                let idx = start + i as isize;
                if idx < 0 || idx as usize >= length {
                    continue;
                }
                let w = self.window[i];
                acc[idx as usize] += w * buf[i].re * scale;
                norm[idx as usize] += w * w;
            }
        }
        acc.iter()
            .zip(&norm)
            .map(|(a, d)| if *d > 1e-10 { a / d } else { 0.0 })
            .collect()
    }
}

/// Complex STFT of `w`, shape `(n_fft/2 + 1) x (len/hop + 1)`.
pub fn stft(w: &Waveform, cfg: &StftConfig) -> Result<Array2<Complex64>> {
    if w.is_empty() {
        return Err(Error::Degenerate("cannot analyze an empty waveform".into()));
    }
    Ok(StftProcessor::new(cfg)?.analyze(w.samples()))
}

/// Inverse STFT returning exactly `length` samples.
///
/// The result is rescaled by `1 / peak` if any sample would exceed unit amplitude.
pub fn istft(spec: &Array2<Complex64>, cfg: &StftConfig, length: usize) -> Result<Waveform> {
    if spec.nrows() != cfg.freq_bins() {
        return Err(Error::Shape(format!(
            "spectrogram has {} bins, config expects {}",
            spec.nrows(),
            cfg.freq_bins()
        )));
    }
    let max = cfg.max_length_for(spec.ncols());
    if length > max {
        return Err(Error::Validation(format!(
            "requested {length} samples but {} frames synthesize at most {max}",
            spec.ncols()
        )));
    }
    let samples = StftProcessor::new(cfg)?.synthesize(spec.view(), length);
    Ok(Waveform::new(samples, cfg.sample_rate)?.limit_peak())
}

pub fn magnitude(spec: &Array2<Complex64>, cfg: &StftConfig) -> Result<MagnitudeSpectrogram> {
    MagnitudeSpectrogram::new(spec.mapv(|c| c.norm()), *cfg)
}

/// Frobenius norm of a one-sided spectrogram counted as its full two-sided
/// counterpart: every bin except DC and (for even `n_fft`) Nyquist is weighted twice.
pub fn weighted_frobenius(values: ArrayView2<f64>, n_fft: usize) -> f64 {
    let bins = values.nrows();
    let mut total = 0.0;
    for (k, row) in values.outer_iter().enumerate() {
        let self_conjugate = k == 0 || (n_fft % 2 == 0 && k == bins - 1);
        let weight = if self_conjugate { 1.0 } else { 2.0 };
        total += weight * row.iter().map(|v| v * v).sum::<f64>();
    }
    total.sqrt()
}
