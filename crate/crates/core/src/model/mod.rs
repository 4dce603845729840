//! The encoder, decoder and postnet.
//!
//! Spectrograms enter as `freq_bins x T` matrices. The encoder sees each frame
//! stacked with the speaker embedding, runs three conv blocks and a BLSTM, and
//! keeps one code every `downsample` frames. The decoder repeats the codes back
//! to frame rate, re-attaches the embedding and maps to a spectrogram; the
//! postnet adds a convolutional residual.

mod checkpoint;
mod layers;
mod network;
mod params;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::speaker::SpeakerEmbedding;

pub use checkpoint::{Checkpoint, FORMAT_VERSION};
pub use layers::{BatchNorm, BiLstm, Conv1d, Linear, Lstm, Mode, BN_EPS, BN_MOMENTUM};
pub use params::{Decoder, Encoder, ModelConfig, ModelParams, Postnet, TensorView, TensorViewMut, CONV_BLOCKS};

pub(crate) use network::{Batch, EncoderPass, FullPass};

/// Downsampled bottleneck sequence, one `code_dim` column per code.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentCodes {
    codes: Array2<f64>,
    original_t: usize,
}

impl ContentCodes {
    pub fn new(codes: Array2<f64>, original_t: usize, downsample: usize) -> Result<Self> {
        if codes.ncols() != original_t.div_ceil(downsample.max(1)) {
            return Err(Error::Shape(format!(
                "{} codes cannot describe {original_t} frames at factor {downsample}",
                codes.ncols()
            )));
        }
        if codes.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("codes contain non-finite values".into()));
        }
        Ok(Self { codes, original_t })
    }

    /// `code_dim x len` matrix.
    pub fn codes(&self) -> &Array2<f64> {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.ncols() == 0
    }

    pub fn dim(&self) -> usize {
        self.codes.nrows()
    }

    pub fn original_t(&self) -> usize {
        self.original_t
    }
}

fn check_spectrogram(params: &ModelParams, x: ArrayView2<f64>) -> Result<()> {
    if x.nrows() != params.config.freq_bins {
        return Err(Error::Shape(format!(
            "spectrogram has {} bins, model expects {}",
            x.nrows(),
            params.config.freq_bins
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::Degenerate("spectrogram has no frames".into()));
    }
    Ok(())
}

fn check_embedding(params: &ModelParams, e: &SpeakerEmbedding) -> Result<()> {
    if e.dim() != params.config.emb_dim {
        return Err(Error::Shape(format!(
            "embedding has {} values, model expects {}",
            e.dim(),
            params.config.emb_dim
        )));
    }
    Ok(())
}

/// The `(freq_bins + emb_dim) x T` matrix the encoder's first convolution sees
/// (before padding to a multiple of the downsampling factor).
pub fn encoder_input(params: &ModelParams, x: ArrayView2<f64>, e: &SpeakerEmbedding) -> Result<Array2<f64>> {
    check_spectrogram(params, x)?;
    check_embedding(params, e)?;
    Ok(network::concat_embedding(x, &[e.as_slice()], &[x.ncols()]))
}

/// Content codes for one spectrogram, using running normalization statistics.
pub fn encode(params: &ModelParams, x: ArrayView2<f64>, e: &SpeakerEmbedding) -> Result<ContentCodes> {
    check_spectrogram(params, x)?;
    check_embedding(params, e)?;
    let batch = Batch {
        x,
        lens: vec![x.ncols()],
        embs: vec![e.as_slice()],
    };
    let pass = params.encoder.forward(&batch, params.config.downsample, Mode::Eval);
    ContentCodes::new(pass.codes, x.ncols(), params.config.downsample)
}

/// Repeats each code `downsample` times and trims to the original frame count.
pub fn upsample_codes(c: &ContentCodes, downsample: usize) -> Array2<f64> {
    network::upsample(c.codes.view(), &[c.len()], &[c.original_t], downsample)
}

/// Decoder output `X̂`, shape `freq_bins x original_t`.
pub fn decode(params: &ModelParams, c: &ContentCodes, e: &SpeakerEmbedding) -> Result<Array2<f64>> {
    check_embedding(params, e)?;
    let cfg = &params.config;
    if c.dim() != cfg.code_dim() {
        return Err(Error::Shape(format!(
            "codes have dimension {}, model expects {}",
            c.dim(),
            cfg.code_dim()
        )));
    }
    if c.len() != c.original_t.div_ceil(cfg.downsample) {
        return Err(Error::Shape(format!(
            "{} codes do not match {} frames at factor {}",
            c.len(),
            c.original_t,
            cfg.downsample
        )));
    }
    let pass = params.decoder.forward(
        c.codes.view(),
        &[c.len()],
        &[c.original_t],
        &[e.as_slice()],
        cfg.downsample,
        Mode::Eval,
    );
    Ok(pass.out)
}

/// `X̃ = X̂ + R(X̂)`.
pub fn postnet_apply(params: &ModelParams, xhat: ArrayView2<f64>) -> Result<Array2<f64>> {
    check_spectrogram(params, xhat)?;
    Ok(params.postnet.forward(xhat, &[xhat.ncols()], Mode::Eval).out)
}

/// Outputs of a full forward pass.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub codes: ContentCodes,
    /// Decoder output.
    pub decoded: Array2<f64>,
    /// Postnet output.
    pub refined: Array2<f64>,
}

/// Encode with `encoder_emb`, decode with `decoder_emb`, then refine.
pub fn reconstruct(
    params: &ModelParams,
    x: ArrayView2<f64>,
    encoder_emb: &SpeakerEmbedding,
    decoder_emb: &SpeakerEmbedding,
) -> Result<Reconstruction> {
    let codes = encode(params, x, encoder_emb)?;
    let decoded = decode(params, &codes, decoder_emb)?;
    let refined = postnet_apply(params, decoded.view())?;
    Ok(Reconstruction {
        codes,
        decoded,
        refined,
    })
}
