use std::f64::consts::PI;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::dsp::{Waveform, SAMPLE_RATE};
use crate::error::{Error, Result};

/// Taps of the polyphase resampling filter.
pub const RESAMPLE_TAPS: usize = 64;

/// Reads a PCM16 or float32 WAV file, downmixes to mono by channel mean and
/// resamples to 16 kHz. The result is rescaled only if its peak exceeds one.
pub fn load_audio(path: &Path) -> Result<Waveform> {
    let reader = WavReader::open(path).map_err(|e| Error::io(path, e))?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(Error::io(path, format!("unsupported channel count {}", spec.channels)));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(|e| Error::io(path, e))?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<Result<_, _>>()
            .map_err(|e| Error::io(path, e))?,
        (fmt, bits) => {
            return Err(Error::io(path, format!("unsupported sample format {fmt:?}/{bits} bit")));
        }
    };
    let channels = spec.channels as usize;
    if interleaved.len() % channels != 0 {
        return Err(Error::io(path, "truncated sample frame"));
    }
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|f| f.iter().sum::<f64>() / channels as f64)
        .collect();
    if mono.iter().any(|s| !s.is_finite()) {
        return Err(Error::io(path, "non-finite samples"));
    }
    let samples = resample(&mono, spec.sample_rate, SAMPLE_RATE)?;
    Ok(Waveform::new(samples, SAMPLE_RATE)?.limit_peak())
}

/// Writes a mono float32 WAV at the waveform's sample rate.
pub fn write_wav(path: &Path, w: &Waveform) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: w.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| Error::io(path, e))?;
    for s in w.samples() {
        writer.write_sample(*s as f32).map_err(|e| Error::io(path, e))?;
    }
    writer.finalize().map_err(|e| Error::io(path, e))
}

/// Duration of a WAV file from its header alone.
pub fn wav_duration(path: &Path) -> Result<f64> {
    let reader = WavReader::open(path).map_err(|e| Error::io(path, e))?;
    let spec = reader.spec();
    Ok(reader.duration() as f64 / spec.sample_rate as f64)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn blackman(u: f64) -> f64 {
    // u in [0, 1]
    0.42 - 0.5 * (2.0 * PI * u).cos() + 0.08 * (4.0 * PI * u).cos()
}

/// Windowed-sinc polyphase resampler with [`RESAMPLE_TAPS`] taps per phase.
///
/// Output sample `n` sits at input position `n * from / to`. The cutoff is the
/// lower of the two Nyquist frequencies and each phase is normalized to unit
/// DC gain.
pub fn resample(x: &[f64], from: u32, to: u32) -> Result<Vec<f64>> {
    if from == 0 || to == 0 {
        return Err(Error::Validation("sample rates must be positive".into()));
    }
    if from == to || x.is_empty() {
        return Ok(x.to_vec());
    }
    let g = gcd(from as u64, to as u64);
    let up = to as u64 / g;
    let down = from as u64 / g;
    let cutoff = (to as f64 / from as f64).min(1.0);
    let half = RESAMPLE_TAPS as i64 / 2;

    // phase p covers fractional offsets p / up
    let table: Vec<Vec<f64>> = (0..up)
        .map(|p| {
            let frac = p as f64 / up as f64;
            let mut taps: Vec<f64> = (0..RESAMPLE_TAPS as i64)
                .map(|k| {
                    let offset = (k - half + 1) as f64 - frac;
                    let u = (offset + half as f64) / RESAMPLE_TAPS as f64;
                    cutoff * sinc(cutoff * offset) * blackman(u.clamp(0.0, 1.0))
                })
                .collect();
            let sum: f64 = taps.iter().sum();
            taps.iter_mut().for_each(|t| *t /= sum);
            taps
        })
        .collect();

    let out_len = ((x.len() as u64 * up).div_ceil(down)) as usize;
    let n_in = x.len() as i64;
    let out = (0..out_len as u64)
        .map(|n| {
            let pos = n * down;
            let base = (pos / up) as i64;
            let taps = &table[(pos % up) as usize];
            taps.iter()
                .enumerate()
                .map(|(k, t)| {
                    let i = base + k as i64 - half + 1;
                    if (0..n_in).contains(&i) {
                        t * x[i as usize]
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect();
    Ok(out)
}
