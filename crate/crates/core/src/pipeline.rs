//! Inference: convert sung vocals to another speaker's voice, optionally
//! wrapping separation and remixing around it.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{load_audio, remix, SeparatorAdapter};
use crate::dsp::{
    griffin_lim_with, log_spectrogram, log_to_mag, GriffinLimOptions, LogSpectrogram, StftConfig, Waveform,
};
use crate::error::{Error, Result};
use crate::model::{reconstruct, Checkpoint};
use crate::speaker::{embed_speaker, embed_utterance, SpeakerEmbedding};

/// Which embedding the encoder is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderEmbedding {
    /// The target speaker, same as the decoder.
    #[default]
    Target,
    /// The singer of the content input.
    Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferOptions {
    pub griffin_lim: GriffinLimOptions,
    pub encoder_embedding: EncoderEmbedding,
    pub embedding_backend: String,
    pub vocal_gain: f64,
}

impl Default for TransferOptions {
    fn default() -> Self {
        Self {
            griffin_lim: GriffinLimOptions::default(),
            encoder_embedding: EncoderEmbedding::Target,
            embedding_backend: "baseline".into(),
            vocal_gain: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransferOutput {
    pub waveform: Waveform,
    /// Postnet output clamped to the normalized range.
    pub spectrogram: LogSpectrogram,
}

fn check_rate(w: &Waveform, stft: &StftConfig) -> Result<()> {
    if w.sample_rate() != stft.sample_rate {
        return Err(Error::Validation(format!(
            "waveform is at {} Hz, model expects {} Hz",
            w.sample_rate(),
            stft.sample_rate
        )));
    }
    Ok(())
}

/// Re-renders `vocals` with the voice summarized by `target`.
pub fn transfer_with_embedding(
    vocals: &Waveform,
    target: &SpeakerEmbedding,
    ckpt: &Checkpoint,
    opts: &TransferOptions,
) -> Result<TransferOutput> {
    let stft = &ckpt.stft;
    check_rate(vocals, stft)?;
    if ckpt.step == 0 {
        warn!("checkpoint has not been trained; output will not resemble the target voice");
    }
    let x = log_spectrogram(vocals, stft)?;
    let source;
    let enc_emb = match opts.encoder_embedding {
        EncoderEmbedding::Target => target,
        EncoderEmbedding::Source => {
            source = embed_utterance(vocals, &opts.embedding_backend)?;
            &source
        }
    };
    let out = reconstruct(&ckpt.params, x.values().view(), enc_emb, target)?;
    let refined = LogSpectrogram::from_clamped(out.refined, *stft)?;
    let mag = log_to_mag(&refined)?;
    let gl = GriffinLimOptions {
        length: Some(vocals.len()),
        ..opts.griffin_lim
    };
    let waveform = griffin_lim_with(&mag, &gl)?.waveform;
    Ok(TransferOutput {
        waveform,
        spectrogram: refined,
    })
}

/// Embeds the target speaker from `speech` and transfers.
pub fn transfer(
    vocals: &Waveform,
    speech: &[Waveform],
    ckpt: &Checkpoint,
    opts: &TransferOptions,
) -> Result<TransferOutput> {
    for w in speech {
        check_rate(w, &ckpt.stft)?;
    }
    let target = embed_speaker(speech, &opts.embedding_backend)?;
    transfer_with_embedding(vocals, &target, ckpt, opts)
}

/// Separate, convert the vocal stem, and remix with the instrumental stem.
pub fn transfer_song(
    song: &Path,
    speech: &[Waveform],
    ckpt: &Checkpoint,
    adapter: &SeparatorAdapter,
    opts: &TransferOptions,
) -> Result<Waveform> {
    let stems = adapter.separate(song)?;
    let converted = transfer(&stems.vocals, speech, ckpt, opts)?;
    remix(&converted.waveform, &stems.instrumental, opts.vocal_gain)
}

/// [`transfer_song`] with the adapter from the environment; a missing adapter
/// is reported before any audio or model work.
pub fn transfer_song_from_env(
    song: &Path,
    speech: &[Waveform],
    ckpt: &Checkpoint,
    opts: &TransferOptions,
) -> Result<Waveform> {
    let adapter = SeparatorAdapter::from_env()?;
    transfer_song(song, speech, ckpt, &adapter, opts)
}

/// Analysis followed by Griffin-Lim resynthesis through the log scale.
pub fn vocode(w: &Waveform, stft: &StftConfig, opts: &GriffinLimOptions) -> Result<Waveform> {
    check_rate(w, stft)?;
    let x = log_spectrogram(w, stft)?;
    let gl = GriffinLimOptions {
        length: Some(w.len()),
        ..*opts
    };
    Ok(griffin_lim_with(&log_to_mag(&x)?, &gl)?.waveform)
}

/// Loads each path with [`load_audio`].
pub fn load_all(paths: &[impl AsRef<Path>]) -> Result<Vec<Waveform>> {
    paths.iter().map(|p| load_audio(p.as_ref())).collect()
}
