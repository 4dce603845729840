//! Audio files, dataset manifests, the separator adapter and remixing.

mod audio;
mod manifest;
mod separate;

pub use audio::{load_audio, resample, wav_duration, write_wav, RESAMPLE_TAPS};
pub use manifest::{
    ingest, IngestReport, Manifest, ManifestEntry, UtteranceKind, KIND_TAG_FILE, MANIFEST_EXTENSION,
};
pub use separate::{
    separate, SeparatorAdapter, Stems, ACCOMPANIMENT_STEM, SEPARATOR_ENV, STEM_LENGTH_TOLERANCE, VOCALS_STEM,
};

use crate::dsp::Waveform;
use crate::error::{Error, Result};

/// `vocal_gain * vocals + instrumental`, zero-padding the shorter signal and
/// rescaling the whole mix by `1 / peak` if the peak exceeds one.
pub fn remix(vocals: &Waveform, instrumental: &Waveform, vocal_gain: f64) -> Result<Waveform> {
    if vocals.sample_rate() != instrumental.sample_rate() {
        return Err(Error::Validation(format!(
            "sample rates differ: {} vs {}",
            vocals.sample_rate(),
            instrumental.sample_rate()
        )));
    }
    if !vocal_gain.is_finite() {
        return Err(Error::Validation(format!("vocal gain must be finite, got {vocal_gain}")));
    }
    let (v, i) = (vocals.samples(), instrumental.samples());
    let mix = (0..v.len().max(i.len()))
        .map(|n| v.get(n).map_or(0.0, |s| vocal_gain * s) + i.get(n).copied().unwrap_or(0.0))
        .collect();
    Ok(Waveform::new(mix, vocals.sample_rate())?.limit_peak())
}
