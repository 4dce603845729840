use ndarray::{ArrayBase, DataMut, Dimension, RawData};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{BatchNorm, BiLstm, Conv1d, Linear, Visit};
use crate::error::{Error, Result};

/// Network hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub freq_bins: usize,
    pub emb_dim: usize,
    pub conv_channels: usize,
    pub conv_kernel: usize,
    /// Per direction.
    pub enc_lstm_hidden: usize,
    /// Per direction, both decoder recurrent layers.
    pub dec_lstm_hidden: usize,
    pub downsample: usize,
    pub postnet_layers: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            freq_bins: 256,
            emb_dim: 256,
            conv_channels: 512,
            conv_kernel: 5,
            enc_lstm_hidden: 32,
            dec_lstm_hidden: 256,
            downsample: 32,
            postnet_layers: 5,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("freq_bins", self.freq_bins),
            ("emb_dim", self.emb_dim),
            ("conv_channels", self.conv_channels),
            ("conv_kernel", self.conv_kernel),
            ("enc_lstm_hidden", self.enc_lstm_hidden),
            ("dec_lstm_hidden", self.dec_lstm_hidden),
            ("downsample", self.downsample),
            ("postnet_layers", self.postnet_layers),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be at least 1")));
        }
        if self.conv_kernel % 2 == 0 {
            return Err(Error::Config(format!(
                "conv_kernel must be odd, got {}",
                self.conv_kernel
            )));
        }
        Ok(())
    }

    /// Width of one content code: forward plus backward encoder state.
    pub fn code_dim(&self) -> usize {
        2 * self.enc_lstm_hidden
    }

    pub fn encoder_input_dim(&self) -> usize {
        self.freq_bins + self.emb_dim
    }

    pub fn decoder_input_dim(&self) -> usize {
        self.code_dim() + self.emb_dim
    }
}

pub struct TensorView<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
    /// False for normalization running statistics.
    pub trainable: bool,
}

impl<'a> TensorView<'a> {
    pub(crate) fn new<S, D>(name: String, array: &'a ArrayBase<S, D>, trainable: bool) -> Self
    where
        S: ndarray::Data<Elem = f64>,
        D: Dimension,
    {
        Self {
            name,
            shape: array.shape().to_vec(),
            data: array.as_slice().expect("parameters are contiguous"),
            trainable,
        }
    }
}

pub struct TensorViewMut<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a mut [f64],
    pub trainable: bool,
}

impl<'a> TensorViewMut<'a> {
    pub(crate) fn new<S, D>(name: String, array: &'a mut ArrayBase<S, D>, trainable: bool) -> Self
    where
        S: DataMut<Elem = f64> + RawData,
        D: Dimension,
    {
        Self {
            name,
            shape: array.shape().to_vec(),
            data: array.as_slice_mut().expect("parameters are contiguous"),
            trainable,
        }
    }
}

/// Content encoder: three conv/batch-norm/ReLU blocks then a bidirectional LSTM.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    pub convs: Vec<Conv1d>,
    pub norms: Vec<BatchNorm>,
    pub lstm: BiLstm,
}

/// Decoder: BLSTM, three conv blocks, a second BLSTM and a linear projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoder {
    pub lstm1: BiLstm,
    pub convs: Vec<Conv1d>,
    pub norms: Vec<BatchNorm>,
    pub lstm2: BiLstm,
    pub proj: Linear,
}

/// Residual refinement stack: `postnet_layers` convolutions, batch norm and
/// tanh on all but the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Postnet {
    pub convs: Vec<Conv1d>,
    pub norms: Vec<BatchNorm>,
}

pub const CONV_BLOCKS: usize = 3;

/// All learnable tensors plus normalization running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub encoder: Encoder,
    pub decoder: Decoder,
    pub postnet: Postnet,
}

impl ModelParams {
    /// Fan-in scaled uniform initialization; deterministic for a given seed.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let cfg = *config;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = cfg.conv_channels;
        let k = cfg.conv_kernel;

        let mut enc_convs = Vec::new();
        let mut input = cfg.encoder_input_dim();
        for _ in 0..CONV_BLOCKS {
            enc_convs.push(Conv1d::new(&mut rng, input, c, k));
            input = c;
        }
        let encoder = Encoder {
            convs: enc_convs,
            norms: (0..CONV_BLOCKS).map(|_| BatchNorm::new(c)).collect(),
            lstm: BiLstm::new(&mut rng, c, cfg.enc_lstm_hidden),
        };

        let hd = cfg.dec_lstm_hidden;
        let lstm1 = BiLstm::new(&mut rng, cfg.decoder_input_dim(), hd);
        let mut dec_convs = Vec::new();
        let mut input = 2 * hd;
        for _ in 0..CONV_BLOCKS {
            dec_convs.push(Conv1d::new(&mut rng, input, c, k));
            input = c;
        }
        let decoder = Decoder {
            lstm1,
            convs: dec_convs,
            norms: (0..CONV_BLOCKS).map(|_| BatchNorm::new(c)).collect(),
            lstm2: BiLstm::new(&mut rng, c, hd),
            proj: Linear::new(&mut rng, 2 * hd, cfg.freq_bins),
        };

        let layers = cfg.postnet_layers;
        let mut post_convs = Vec::new();
        for i in 0..layers {
            let input = if i == 0 { cfg.freq_bins } else { c };
            let output = if i + 1 == layers { cfg.freq_bins } else { c };
            post_convs.push(Conv1d::new(&mut rng, input, output, k));
        }
        let postnet = Postnet {
            convs: post_convs,
            norms: (0..layers - 1).map(|_| BatchNorm::new(c)).collect(),
        };

        Ok(Self {
            config: cfg,
            encoder,
            decoder,
            postnet,
        })
    }

    /// Same structure with every tensor (running statistics included) zeroed.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.data.fill(0.0);
        }
        z
    }

    /// Every tensor keyed by layer path, in a fixed order.
    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        let mut out = Vec::new();
        for (i, (conv, norm)) in self.encoder.convs.iter().zip(&self.encoder.norms).enumerate() {
            conv.visit_tensors(&format!("encoder.conv{i}"), &mut out);
            norm.visit_tensors(&format!("encoder.norm{i}"), &mut out);
        }
        self.encoder.lstm.visit_tensors("encoder.lstm", &mut out);
        self.decoder.lstm1.visit_tensors("decoder.lstm1", &mut out);
        for (i, (conv, norm)) in self.decoder.convs.iter().zip(&self.decoder.norms).enumerate() {
            conv.visit_tensors(&format!("decoder.conv{i}"), &mut out);
            norm.visit_tensors(&format!("decoder.norm{i}"), &mut out);
        }
        self.decoder.lstm2.visit_tensors("decoder.lstm2", &mut out);
        self.decoder.proj.visit_tensors("decoder.proj", &mut out);
        for (i, conv) in self.postnet.convs.iter().enumerate() {
            conv.visit_tensors(&format!("postnet.conv{i}"), &mut out);
            if let Some(norm) = self.postnet.norms.get(i) {
                norm.visit_tensors(&format!("postnet.norm{i}"), &mut out);
            }
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<TensorViewMut<'_>> {
        let mut out = Vec::new();
        for (i, (conv, norm)) in self
            .encoder
            .convs
            .iter_mut()
            .zip(self.encoder.norms.iter_mut())
            .enumerate()
        {
            conv.visit_tensors_mut(&format!("encoder.conv{i}"), &mut out);
            norm.visit_tensors_mut(&format!("encoder.norm{i}"), &mut out);
        }
        self.encoder.lstm.visit_tensors_mut("encoder.lstm", &mut out);
        self.decoder.lstm1.visit_tensors_mut("decoder.lstm1", &mut out);
        for (i, (conv, norm)) in self
            .decoder
            .convs
            .iter_mut()
            .zip(self.decoder.norms.iter_mut())
            .enumerate()
        {
            conv.visit_tensors_mut(&format!("decoder.conv{i}"), &mut out);
            norm.visit_tensors_mut(&format!("decoder.norm{i}"), &mut out);
        }
        self.decoder.lstm2.visit_tensors_mut("decoder.lstm2", &mut out);
        self.decoder.proj.visit_tensors_mut("decoder.proj", &mut out);
        let norms = &mut self.postnet.norms;
        let mut norms_iter = norms.iter_mut();
        for (i, conv) in self.postnet.convs.iter_mut().enumerate() {
            conv.visit_tensors_mut(&format!("postnet.conv{i}"), &mut out);
            if let Some(norm) = norms_iter.next() {
                norm.visit_tensors_mut(&format!("postnet.norm{i}"), &mut out);
            }
        }
        out
    }

    pub fn trainable_count(&self) -> usize {
        self.tensors()
            .iter()
            .filter(|t| t.trainable)
            .map(|t| t.data.len())
            .sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.data.iter().all(|v| v.is_finite()))
    }
}
