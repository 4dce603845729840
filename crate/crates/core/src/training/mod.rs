//! Self-reconstruction training: losses, Adam, and the sampling loop.
//!
//! Every training sample pairs a spectrogram crop with the embedding of the
//! same utterance's speaker, so content and style always come from one person.

mod loss;
mod objective;

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};
use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::UtteranceKind;
use crate::dsp::StftConfig;
use crate::error::{Error, Result};
use crate::model::{Checkpoint, ModelConfig, ModelParams};
use crate::speaker::SpeakerEmbedding;

pub use loss::{loss_l1, loss_l2, loss_l3, mean_abs, mse, total_loss, LossReport};
pub use objective::{gradients, objective, LossWeights, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Weight of the content-consistency loss.
    pub lambda3: f64,
    /// Frames per training crop; a multiple of the model's downsampling factor.
    pub crop_frames: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub max_steps: u64,
    pub seed: u64,
    /// Zero disables periodic checkpoints.
    pub checkpoint_every: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda3: 10_000.0,
            crop_frames: 128,
            batch_size: 2,
            lr: 1e-4,
            max_steps: 100_000,
            seed: 0,
            checkpoint_every: 1000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, model: &ModelConfig) -> Result<()> {
        if !(self.lambda3 >= 0.0) {
            return Err(Error::Config(format!("lambda3 must be >= 0, got {}", self.lambda3)));
        }
        if self.crop_frames == 0 || self.crop_frames % model.downsample != 0 {
            return Err(Error::Config(format!(
                "crop_frames ({}) must be a positive multiple of downsample ({})",
                self.crop_frames, model.downsample
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return Err(Error::Config(format!("lr must be finite and >= 0, got {}", self.lr)));
        }
        Ok(())
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Adam moments for the trainable tensors, in [`ModelParams::tensors`] order.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(params: &ModelParams, lr: f64) -> Self {
        let shapes: Vec<usize> = params
            .tensors()
            .iter()
            .filter(|t| t.trainable)
            .map(|t| t.data.len())
            .collect();
        Self {
            lr,
            t: 0,
            m: shapes.iter().map(|n| vec![0.0; *n]).collect(),
            v: shapes.iter().map(|n| vec![0.0; *n]).collect(),
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, grad: &ModelParams) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        let grads = grad.tensors();
        let targets = params.tensors_mut();
        let pairs = targets
            .into_iter()
            .zip(grads)
            .filter(|(p, _)| p.trainable);
        for ((p, g), (m, v)) in pairs.zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            for i in 0..p.data.len() {
                let gi = g.data[i];
                m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * gi;
                v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * gi * gi;
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                p.data[i] -= self.lr * mhat / (vhat.sqrt() + ADAM_EPS);
            }
        }
    }
}

/// A full utterance available for training.
#[derive(Debug, Clone)]
pub struct TrainingItem {
    /// `freq_bins x T` normalized log-spectrogram of the whole utterance.
    pub spectrogram: Array2<f64>,
    /// Embedding of the utterance's own speaker.
    pub embedding: SpeakerEmbedding,
    pub kind: UtteranceKind,
}

/// `crop` frames starting at `start`; short inputs are padded by repeating
/// their last frame.
pub fn crop_frames(x: &Array2<f64>, start: usize, crop: usize) -> Array2<f64> {
    let t = x.ncols();
    if t >= crop {
        return x.slice(s![.., start..start + crop]).to_owned();
    }
    let mut out = Array2::zeros((x.nrows(), crop));
    out.slice_mut(s![.., ..t]).assign(x);
    let last = x.column(t - 1);
    for c in t..crop {
        out.column_mut(c).assign(&last);
    }
    out
}

/// Owns the parameters being optimized, the optimizer state and the
/// sampling generator. Single writer.
pub struct Trainer {
    params: ModelParams,
    adam: Adam,
    cfg: TrainConfig,
    rng: ChaCha8Rng,
    step: u64,
}

impl Trainer {
    pub fn new(params: ModelParams, cfg: TrainConfig) -> Result<Self> {
        cfg.validate(&params.config)?;
        let adam = Adam::new(&params, cfg.lr);
        // sampling stream is decoupled from the init stream of the same seed
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5a3b_1e00_0001);
        Ok(Self {
            params,
            adam,
            cfg,
            rng,
            step: 0,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn into_params(self) -> ModelParams {
        self.params
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// One Adam step on the total loss. The report holds pre-update losses.
    pub fn train_step(&mut self, batch: &[Sample]) -> Result<LossReport> {
        let eval = objective::evaluate(&self.params, batch, self.cfg.lambda3, crate::model::Mode::Train)?;
        if !eval.report.is_finite() {
            return Err(Error::Diverged(format!(
                "non-finite loss at step {}: {:?}",
                self.step + 1,
                eval.report
            )));
        }
        let grad = objective::backward(&self.params, &eval, LossWeights::total(self.cfg.lambda3));
        objective::update_running_stats(&mut self.params, &eval);
        self.adam.step(&mut self.params, &grad);
        self.step += 1;
        Ok(eval.report)
    }

    /// Draws `batch_size` random crops, uniformly over utterances of any kind.
    pub fn sample_batch(&mut self, dataset: &[TrainingItem]) -> Vec<(Array2<f64>, usize)> {
        (0..self.cfg.batch_size)
            .map(|_| {
                let idx = self.rng.random_range(0..dataset.len());
                let x = &dataset[idx].spectrogram;
                let start = if x.ncols() > self.cfg.crop_frames {
                    self.rng.random_range(0..=x.ncols() - self.cfg.crop_frames)
                } else {
                    0
                };
                (crop_frames(x, start, self.cfg.crop_frames), idx)
            })
            .collect()
    }
}

/// Where the loop persists its artifacts.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub dir: PathBuf,
    pub stft: StftConfig,
}

impl TrainOutput {
    pub fn loss_curve_path(&self) -> PathBuf {
        self.dir.join("loss.csv")
    }

    pub fn checkpoint_path(&self, step: u64) -> PathBuf {
        self.dir.join(format!("step-{step:08}.ckpt"))
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// One report per step, pre-update.
    pub curve: Vec<LossReport>,
    /// Steps at which periodic checkpoints were written.
    pub checkpoints: Vec<u64>,
}

/// Appends `step,l1,l2,l3,total` rows, writing the header on a fresh file.
pub struct LossCurveWriter {
    file: File,
}

impl LossCurveWriter {
    pub fn open(path: &Path) -> Result<Self> {
        let fresh = !path.exists() || fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        if fresh {
            writeln!(file, "step,l1,l2,l3,total").map_err(|e| Error::io(path, e))?;
        }
        Ok(Self { file })
    }

    pub fn append(&mut self, step: u64, r: &LossReport) -> std::io::Result<()> {
        writeln!(self.file, "{step},{},{},{},{}", r.l1, r.l2, r.l3, r.total)
    }
}

/// Runs `cfg.max_steps` training steps from freshly initialized parameters.
pub fn train_loop(
    dataset: &[TrainingItem],
    model: &ModelConfig,
    cfg: &TrainConfig,
    output: Option<&TrainOutput>,
) -> Result<TrainOutcome> {
    let params = ModelParams::init(model, cfg.seed)?;
    train_from(params, dataset, cfg, output)
}

/// Runs `cfg.max_steps` training steps starting from `params`.
pub fn train_from(
    params: ModelParams,
    dataset: &[TrainingItem],
    cfg: &TrainConfig,
    output: Option<&TrainOutput>,
) -> Result<TrainOutcome> {
    if dataset.is_empty() {
        return Err(Error::Validation("training dataset is empty".into()));
    }
    for item in dataset {
        if item.spectrogram.nrows() != params.config.freq_bins || item.spectrogram.ncols() == 0 {
            return Err(Error::Shape(format!(
                "training spectrogram is {:?}, model expects {} bins",
                item.spectrogram.dim(),
                params.config.freq_bins
            )));
        }
    }
    let has = |k: UtteranceKind| dataset.iter().any(|i| i.kind == k);
    if !(has(UtteranceKind::Speech) && has(UtteranceKind::Singing)) {
        warn!("training data does not contain both speech and singing utterances");
    }

    let mut trainer = Trainer::new(params, *cfg)?;
    let mut curve_writer = match output {
        Some(out) => {
            fs::create_dir_all(&out.dir).map_err(|e| Error::io(&out.dir, e))?;
            Some(LossCurveWriter::open(&out.loss_curve_path())?)
        }
        None => None,
    };
    let mut curve = Vec::with_capacity(cfg.max_steps as usize);
    let mut checkpoints = Vec::new();

    while trainer.step() < cfg.max_steps {
        let crops = trainer.sample_batch(dataset);
        let batch: Vec<Sample> = crops
            .iter()
            .map(|(x, idx)| Sample {
                x: x.view(),
                embedding: &dataset[*idx].embedding,
            })
            .collect();
        let report = trainer.train_step(&batch)?;
        let step = trainer.step();
        curve.push(report);
        if let (Some(w), Some(out)) = (curve_writer.as_mut(), output) {
            w.append(step, &report)
                .map_err(|e| Error::io(out.loss_curve_path(), e))?;
        }
        if cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 {
            if let Some(out) = output {
                let path = out.checkpoint_path(step);
                Checkpoint::new(trainer.params().clone(), step, out.stft).save(&path)?;
                info!("step {step}: total {:.6} (checkpoint {})", report.total, path.display());
            }
            checkpoints.push(step);
        }
    }

    Ok(TrainOutcome {
        params: trainer.into_params(),
        curve,
        checkpoints,
    })
}
