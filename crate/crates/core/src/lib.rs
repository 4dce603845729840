//! Zero-shot speech-to-singing style transfer.
//!
//! A spectrogram autoencoder is trained by self-reconstruction on speech and
//! singing, conditioned on a speaker embedding. At inference the content of a
//! sung vocal track is re-rendered with the embedding of another speaker and
//! turned back into audio with Griffin-Lim.

pub mod data;
pub mod dsp;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod speaker;
pub mod stats;
pub mod training;

pub use dsp::{LogSpectrogram, MagnitudeSpectrogram, StftConfig, Waveform};
pub use error::{Error, Result};
pub use model::{Checkpoint, ModelConfig, ModelParams};
pub use speaker::SpeakerEmbedding;
pub use training::{LossReport, TrainConfig};
