//! Training objective and its gradient.

use ndarray::{Array2, ArrayView2, Zip};

use super::loss::{mean_abs, mse, LossReport};
use crate::error::{Error, Result};
use crate::model::{Batch, EncoderPass, FullPass, Mode, ModelParams};
use crate::speaker::SpeakerEmbedding;

/// Coefficients applied to the raw losses when differentiating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl LossWeights {
    /// Weights of the total loss `l1 + l2 + lambda3 * l3`.
    pub fn total(lambda3: f64) -> Self {
        Self {
            l1: 1.0,
            l2: 1.0,
            l3: lambda3,
        }
    }

    pub fn apply(&self, r: &LossReport) -> f64 {
        self.l1 * r.l1 + self.l2 * r.l2 + self.l3 * r.l3
    }
}

/// One self-reconstruction sample: a spectrogram and its speaker's embedding.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub x: ArrayView2<'a, f64>,
    pub embedding: &'a SpeakerEmbedding,
}

pub(crate) struct Evaluation {
    pub report: LossReport,
    pub pass: FullPass,
    refined_pass: EncoderPass,
    x: Array2<f64>,
}

fn stack(params: &ModelParams, samples: &[Sample]) -> Result<(Array2<f64>, Vec<usize>)> {
    if samples.is_empty() {
        return Err(Error::Validation("empty batch".into()));
    }
    let cfg = &params.config;
    for s in samples {
        if s.x.nrows() != cfg.freq_bins || s.x.ncols() == 0 {
            return Err(Error::Shape(format!(
                "sample is {:?}, model expects {} bins",
                s.x.dim(),
                cfg.freq_bins
            )));
        }
        if s.embedding.dim() != cfg.emb_dim {
            return Err(Error::Shape(format!(
                "embedding has {} values, model expects {}",
                s.embedding.dim(),
                cfg.emb_dim
            )));
        }
    }
    let lens: Vec<usize> = samples.iter().map(|s| s.x.ncols()).collect();
    let views: Vec<_> = samples.iter().map(|s| s.x).collect();
    let x = ndarray::concatenate(ndarray::Axis(1), &views).expect("equal row counts");
    Ok((x, lens))
}

pub(crate) fn evaluate(params: &ModelParams, samples: &[Sample], lambda3: f64, mode: Mode) -> Result<Evaluation> {
    let (x, lens) = stack(params, samples)?;
    let embs: Vec<&[f64]> = samples.iter().map(|s| s.embedding.as_slice()).collect();
    let batch = Batch {
        x: x.view(),
        lens: lens.clone(),
        embs: embs.clone(),
    };
    let pass = params.run(&batch, &embs, mode);
    let refined = &pass.postnet.out;
    let rebatch = Batch {
        x: refined.view(),
        lens,
        embs,
    };
    let refined_pass = params.encoder.forward(&rebatch, params.config.downsample, mode);

    let l1 = mse(x.view(), pass.decoder.out.view())?;
    let l2 = mse(x.view(), refined.view())?;
    let l3 = mean_abs(pass.encoder.codes.view(), refined_pass.codes.view())?;
    let report = LossReport::new(l1, l2, l3, lambda3);
    Ok(Evaluation {
        report,
        pass,
        refined_pass,
        x,
    })
}

/// Losses of a batch in the given normalization mode. No state is touched.
pub fn objective(params: &ModelParams, samples: &[Sample], lambda3: f64, mode: Mode) -> Result<LossReport> {
    Ok(evaluate(params, samples, lambda3, mode)?.report)
}

pub(crate) fn backward(params: &ModelParams, eval: &Evaluation, weights: LossWeights) -> ModelParams {
    let cfg = &params.config;
    let d = cfg.downsample;
    let mut grad = params.zeros_like();
    let pass = &eval.pass;
    let n = eval.x.len() as f64;

    let mut d_decoded = Zip::from(&pass.decoder.out)
        .and(&eval.x)
        .map_collect(|y, x| weights.l1 * 2.0 * (y - x) / n);
    let mut d_refined = Zip::from(&pass.postnet.out)
        .and(&eval.x)
        .map_collect(|y, x| weights.l2 * 2.0 * (y - x) / n);

    // l3 = mean |c_x - c_refined|; sign(0) taken as 0
    let codes_x = &pass.encoder.codes;
    let codes_r = &eval.refined_pass.codes;
    let nc = codes_x.len() as f64;
    let d_codes_r = Zip::from(codes_r)
        .and(codes_x)
        .map_collect(|r, x| {
            let diff = r - x;
            let sign = if diff > 0.0 {
                1.0
            } else if diff < 0.0 {
                -1.0
            } else {
                0.0
            };
            weights.l3 * sign / nc
        });

    if weights.l3 != 0.0 {
        let dx = params
            .encoder
            .backward(&eval.refined_pass, d_codes_r.view(), d, cfg.freq_bins, &mut grad.encoder, true)
            .expect("input gradient requested");
        d_refined += &dx;
    }
    d_decoded += &params.postnet.backward(&pass.postnet, d_refined.view(), &mut grad.postnet);
    let mut d_codes = params
        .decoder
        .backward(&pass.decoder, d_decoded.view(), d, &mut grad.decoder);
    d_codes -= &d_codes_r;
    params
        .encoder
        .backward(&pass.encoder, d_codes.view(), d, cfg.freq_bins, &mut grad.encoder, false);
    grad
}

/// Losses (training-mode normalization) and the gradient of the weighted sum
/// of losses with respect to every parameter.
pub fn gradients(
    params: &ModelParams,
    samples: &[Sample],
    lambda3: f64,
    weights: LossWeights,
) -> Result<(LossReport, ModelParams)> {
    let eval = evaluate(params, samples, lambda3, Mode::Train)?;
    let grad = backward(params, &eval, weights);
    Ok((eval.report, grad))
}

/// Folds the batch statistics of the primary pass into the running averages.
/// The re-encoding of the postnet output does not contribute.
pub(crate) fn update_running_stats(params: &mut ModelParams, eval: &Evaluation) {
    params.encoder.update_running(&eval.pass.encoder);
    params.decoder.update_running(&eval.pass.decoder);
    params.postnet.update_running(&eval.pass.postnet);
}
