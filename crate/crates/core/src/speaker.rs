//! Speaker (style) embeddings.
//!
//! The embedder is pluggable by name. The built-in `baseline` backend is the
//! unit-normalized long-term average of the normalized log-spectrogram; a
//! pretrained verification network can be dropped in behind
//! [`SpeakerEncoder`], or its embeddings imported from file.

use std::fs;
use std::path::Path;

use crate::dsp::{log_spectrogram, StftConfig, Waveform};
use crate::error::{Error, Result};

pub const EMBEDDING_DIM: usize = 256;

/// Utterances quieter than this (whole-signal RMS) are treated as silence.
pub const SILENCE_RMS: f64 = 1e-4;

pub const MIN_UTTERANCE_SECS: f64 = 0.5;

const NORM_TOLERANCE: f64 = 1e-6;

/// Unit-norm style vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerEmbedding {
    vector: Vec<f64>,
}

impl SpeakerEmbedding {
    /// Wraps a vector that must already have unit norm.
    pub fn new(vector: Vec<f64>) -> Result<Self> {
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("embedding has non-finite entries".into()));
        }
        let norm = l2(&vector);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!("embedding norm {norm} is not 1")));
        }
        Ok(Self { vector })
    }

    /// Scales `vector` to unit norm.
    pub fn normalized(vector: Vec<f64>) -> Result<Self> {
        if vector.is_empty() || vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("embedding is empty or non-finite".into()));
        }
        let norm = l2(&vector);
        if norm < 1e-12 {
            return Err(Error::Degenerate("embedding has zero norm".into()));
        }
        Ok(Self {
            vector: vector.into_iter().map(|v| v / norm).collect(),
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn cosine(&self, other: &Self) -> f64 {
        self.vector.iter().zip(&other.vector).map(|(a, b)| a * b).sum()
    }

    /// Reads exactly 256 little-endian `f32` values (no header).
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() != EMBEDDING_DIM * 4 {
            return Err(Error::io(
                path,
                format!("expected {} bytes, found {}", EMBEDDING_DIM * 4, bytes.len()),
            ));
        }
        let vector = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        // f32 storage loses a little norm precision
        Self::normalized(vector)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if self.dim() != EMBEDDING_DIM {
            return Err(Error::Shape(format!(
                "embedding files hold {EMBEDDING_DIM} values, this one has {}",
                self.dim()
            )));
        }
        let bytes: Vec<u8> = self
            .vector
            .iter()
            .flat_map(|v| (*v as f32).to_le_bytes())
            .collect();
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A named function from waveform to style vector.
pub trait SpeakerEncoder: Send + Sync {
    fn name(&self) -> &str;
    fn embed(&self, w: &Waveform) -> Result<SpeakerEmbedding>;
}

/// Long-term average log-spectrum, one value per frequency bin.
#[derive(Debug, Clone, Default)]
pub struct BaselineEncoder {
    stft: StftConfig,
}

impl SpeakerEncoder for BaselineEncoder {
    fn name(&self) -> &str {
        "baseline"
    }

    fn embed(&self, w: &Waveform) -> Result<SpeakerEmbedding> {
        let x = log_spectrogram(w, &self.stft)?;
        let mean = x
            .values()
            .mean_axis(ndarray::Axis(1))
            .expect("at least one frame");
        SpeakerEmbedding::normalized(mean.to_vec())
    }
}

pub fn encoder_by_name(name: &str) -> Result<Box<dyn SpeakerEncoder>> {
    match name {
        "baseline" => Ok(Box::new(BaselineEncoder::default())),
        other => Err(Error::Config(format!("unknown embedding backend '{other}'"))),
    }
}

fn check_utterance(w: &Waveform) -> Result<()> {
    if w.duration_secs() < MIN_UTTERANCE_SECS {
        return Err(Error::Degenerate(format!(
            "utterance is {:.3} s, need at least {MIN_UTTERANCE_SECS} s",
            w.duration_secs()
        )));
    }
    if w.rms() <= SILENCE_RMS {
        return Err(Error::Degenerate(format!("utterance is silent (rms {:.2e})", w.rms())));
    }
    Ok(())
}

pub fn embed_utterance(w: &Waveform, backend: &str) -> Result<SpeakerEmbedding> {
    let encoder = encoder_by_name(backend)?;
    embed_with(encoder.as_ref(), std::slice::from_ref(w))
}

/// Unit-normalized mean of the per-utterance embeddings.
pub fn embed_speaker(ws: &[Waveform], backend: &str) -> Result<SpeakerEmbedding> {
    let encoder = encoder_by_name(backend)?;
    embed_with(encoder.as_ref(), ws)
}

pub fn embed_with(encoder: &dyn SpeakerEncoder, ws: &[Waveform]) -> Result<SpeakerEmbedding> {
    let embeddings = ws
        .iter()
        .map(|w| {
            check_utterance(w)?;
            encoder.embed(w)
        })
        .collect::<Result<Vec<_>>>()?;
    average(&embeddings)
}

/// Normalized mean of unit embeddings. Fails when they cancel out.
pub fn average(embeddings: &[SpeakerEmbedding]) -> Result<SpeakerEmbedding> {
    let first = embeddings
        .first()
        .ok_or_else(|| Error::Validation("no utterances to embed".into()))?;
    if embeddings.len() == 1 {
        return Ok(first.clone());
    }
    let dim = first.dim();
    let mut sum = vec![0.0; dim];
    for e in embeddings {
        if e.dim() != dim {
            return Err(Error::Shape("embeddings differ in dimension".into()));
        }
        sum.iter_mut().zip(e.as_slice()).for_each(|(s, v)| *s += v);
    }
    let n = embeddings.len() as f64;
    SpeakerEmbedding::normalized(sum.into_iter().map(|s| s / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, secs: f64, amp: f64) -> Waveform {
        let n = (secs * 16_000.0) as usize;
        Waveform::new(
            (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / 16_000.0).sin()).collect(),
            16_000,
        )
        .unwrap()
    }

    /// Vowel-like pulse train with a slow pitch glide and two resonances.
    fn voiced(f0: f64, formant: f64, secs: f64, amp: f64) -> Waveform {
        let n = (secs * 16_000.0) as usize;
        let mut phase = 0.0;
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / 16_000.0;
                phase += 2.0 * PI * f0 * (1.0 + 0.05 * (2.0 * PI * 3.0 * t).sin()) / 16_000.0;
                let mut s = 0.0;
                for h in 1..20 {
                    let fh = f0 * h as f64;
                    let gain = 1.0 / (1.0 + ((fh - formant) / 300.0).powi(2))
                        + 0.5 / (1.0 + ((fh - 2.5 * formant) / 400.0).powi(2));
                    s += gain * (h as f64 * phase).sin();
                }
                amp * s / 4.0
            })
            .collect();
        Waveform::new(samples, 16_000).unwrap()
    }

    #[test]
    fn deterministic_and_unit_norm() {
        let w = voiced(140.0, 700.0, 1.0, 0.5);
        let a = embed_utterance(&w, "baseline").unwrap();
        let b = embed_utterance(&w, "baseline").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), EMBEDDING_DIM);
        let norm = l2(a.as_slice());
        assert!((norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn dimension_independent_of_length() {
        for secs in [0.5, 1.3, 4.0] {
            let e = embed_utterance(&voiced(120.0, 600.0, secs, 0.4), "baseline").unwrap();
            assert_eq!(e.dim(), 256);
        }
    }

    #[test]
    fn sine_matches_mean_then_normalize_oracle() {
        let w = tone(440.0, 1.0, 0.5);
        let e = embed_utterance(&w, "baseline").unwrap();

        // Oracle: per-frame direct DFT magnitudes, dB map, average, normalize.
        let (n_fft, hop) = (510usize, 160usize);
        let pad = n_fft / 2;
        let x = w.samples();
        let frames = x.len() / hop + 1;
        let window: Vec<f64> = (0..n_fft)
            .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / n_fft as f64).cos())
            .collect();
        let mut mean = vec![0.0; 256];
        for t in 0..frames {
            let frame: Vec<f64> = (0..n_fft)
                .map(|n| {
                    let idx = (t * hop + n) as isize - pad as isize;
                    if idx >= 0 && (idx as usize) < x.len() {
                        x[idx as usize] * window[n]
                    } else {
                        0.0
                    }
                })
                .collect();
            for (k, m) in mean.iter_mut().enumerate() {
                let (mut re, mut im) = (0.0, 0.0);
                for (n, v) in frame.iter().enumerate() {
                    let a = -2.0 * PI * (k * n) as f64 / n_fft as f64;
                    re += v * a.cos();
                    im += v * a.sin();
                }
                let db = 20.0 * (re.hypot(im)).max(1e-5).log10();
                *m += ((db + 100.0) / 100.0).clamp(0.0, 1.0) / frames as f64;
            }
        }
        let norm = l2(&mean);
        for (a, b) in e.as_slice().iter().zip(&mean) {
            assert!((a - b / norm).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_silence_short_and_unknown_backend() {
        let silent = Waveform::zeros(16_000, 16_000);
        assert!(matches!(embed_utterance(&silent, "baseline"), Err(Error::Degenerate(_))));
        let short = tone(300.0, 0.3, 0.5);
        assert!(matches!(embed_utterance(&short, "baseline"), Err(Error::Degenerate(_))));
        let ok = tone(300.0, 1.0, 0.5);
        assert!(matches!(embed_utterance(&ok, "resemblyzer"), Err(Error::Config(_))));
    }

    #[test]
    fn duplicate_utterances_average_to_one() {
        let w = voiced(150.0, 800.0, 1.0, 0.5);
        let single = embed_utterance(&w, "baseline").unwrap();
        let double = embed_speaker(&[w.clone(), w], "baseline").unwrap();
        for (a, b) in single.as_slice().iter().zip(double.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn opposite_embeddings_are_degenerate() {
        let e = SpeakerEmbedding::normalized(vec![1.0, 2.0, 3.0]).unwrap();
        let neg = SpeakerEmbedding::normalized(vec![-1.0, -2.0, -3.0]).unwrap();
        assert!(matches!(average(&[e, neg]), Err(Error::Degenerate(_))));
        assert!(embed_speaker(&[], "baseline").is_err());
    }

    #[test]
    fn three_utterances_match_averaging_oracle() {
        let ws = [
            voiced(110.0, 500.0, 1.0, 0.5),
            voiced(180.0, 900.0, 0.8, 0.3),
            tone(660.0, 0.7, 0.2),
        ];
        let singles: Vec<_> = ws
            .iter()
            .map(|w| embed_utterance(w, "baseline").unwrap())
            .collect();
        let combined = embed_speaker(&ws, "baseline").unwrap();
        let mut oracle = [0.0; 256];
        for k in 0..256 {
            oracle[k] = (singles[0].as_slice()[k] + singles[1].as_slice()[k] + singles[2].as_slice()[k]) / 3.0;
        }
        let norm = oracle.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (a, b) in combined.as_slice().iter().zip(oracle.iter()) {
            assert!((a - b / norm).abs() < 1e-12);
        }
    }

    #[test]
    fn half_amplitude_keeps_direction() {
        let w = voiced(130.0, 650.0, 1.5, 0.6);
        let a = embed_utterance(&w, "baseline").unwrap();
        let b = embed_utterance(&w.scaled(0.5), "baseline").unwrap();
        assert!(a.cosine(&b) > 0.99, "cosine {}", a.cosine(&b));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.emb");
        let e = embed_utterance(&voiced(140.0, 700.0, 1.0, 0.5), "baseline").unwrap();
        e.write(&path).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 1024);
        let back = SpeakerEmbedding::read(&path).unwrap();
        assert!(e.cosine(&back) > 1.0 - 1e-12);
        fs::write(&path, [0u8; 12]).unwrap();
        assert!(SpeakerEmbedding::read(&path).is_err());
    }
}
