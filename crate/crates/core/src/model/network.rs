//! Forward passes with the caches needed for backpropagation.

use ndarray::{s, Array2, ArrayView2};

use super::layers::{offsets, BiLstmCache, BnCache, BnStats, ConvCache, Mode};
use super::params::{Decoder, Encoder, ModelParams, Postnet};

/// Several sequences side by side on the frame axis.
pub(crate) struct Batch<'a> {
    pub x: ArrayView2<'a, f64>,
    pub lens: Vec<usize>,
    /// One embedding per sequence.
    pub embs: Vec<&'a [f64]>,
}

/// Stacks `x` on top of each sequence's embedding replicated across its frames.
pub(crate) fn concat_embedding(x: ArrayView2<f64>, embs: &[&[f64]], lens: &[usize]) -> Array2<f64> {
    let rows = x.nrows();
    let emb_dim = embs.first().map_or(0, |e| e.len());
    let mut out = Array2::zeros((rows + emb_dim, x.ncols()));
    out.slice_mut(s![..rows, ..]).assign(&x);
    for ((off, len), emb) in offsets(lens).into_iter().zip(lens).zip(embs) {
        for (r, v) in emb.iter().enumerate() {
            out.slice_mut(s![rows + r, off..off + len]).fill(*v);
        }
    }
    out
}

/// Right-pads each sequence to a multiple of `factor` by repeating its last frame.
fn pad_edges(x: &Array2<f64>, lens: &[usize], factor: usize) -> (Array2<f64>, Vec<usize>) {
    let padded: Vec<usize> = lens.iter().map(|l| l.div_ceil(factor) * factor).collect();
    if padded == lens {
        return (x.clone(), padded);
    }
    let mut out = Array2::zeros((x.nrows(), padded.iter().sum()));
    for ((src, dst), (&len, &plen)) in offsets(lens)
        .into_iter()
        .zip(offsets(&padded))
        .zip(lens.iter().zip(&padded))
    {
        out.slice_mut(s![.., dst..dst + len])
            .assign(&x.slice(s![.., src..src + len]));
        let last = x.column(src + len - 1);
        for t in len..plen {
            out.column_mut(dst + t).assign(&last);
        }
    }
    (out, padded)
}

/// Adjoint of [`pad_edges`]: padded-frame gradients fold into the last real frame.
fn unpad_edges(dx: &Array2<f64>, lens: &[usize], padded: &[usize]) -> Array2<f64> {
    if lens == padded {
        return dx.clone();
    }
    let mut out = Array2::zeros((dx.nrows(), lens.iter().sum()));
    for ((dst, src), (&len, &plen)) in offsets(lens)
        .into_iter()
        .zip(offsets(padded))
        .zip(lens.iter().zip(padded))
    {
        out.slice_mut(s![.., dst..dst + len])
            .assign(&dx.slice(s![.., src..src + len]));
        let mut last = out.column_mut(dst + len - 1);
        for t in len..plen {
            last += &dx.column(src + t);
        }
    }
    out
}

struct BlockCache {
    conv: ConvCache,
    norm: BnCache,
    stats: Option<BnStats>,
    /// Post-activation output.
    out: Array2<f64>,
}

fn conv_blocks(
    convs: &[super::layers::Conv1d],
    norms: &[super::layers::BatchNorm],
    input: ArrayView2<f64>,
    lens: &[usize],
    mode: Mode,
) -> Vec<BlockCache> {
    let mut caches: Vec<BlockCache> = Vec::with_capacity(convs.len());
    for (conv, norm) in convs.iter().zip(norms) {
        let x = caches.last().map_or(input, |c| c.out.view());
        let (y, conv_cache) = conv.forward(x, lens);
        let (z, norm_cache, stats) = norm.forward(y.view(), mode);
        caches.push(BlockCache {
            conv: conv_cache,
            norm: norm_cache,
            stats,
            out: z.mapv(|v| v.max(0.0)),
        });
    }
    caches
}

/// Returns the gradient with respect to the block stack input.
fn conv_blocks_backward(
    convs: &[super::layers::Conv1d],
    norms: &[super::layers::BatchNorm],
    caches: &[BlockCache],
    dout: Array2<f64>,
    lens: &[usize],
    grad_convs: &mut [super::layers::Conv1d],
    grad_norms: &mut [super::layers::BatchNorm],
    need_input: bool,
) -> Option<Array2<f64>> {
    let mut d = dout;
    for i in (0..convs.len()).rev() {
        let cache = &caches[i];
        ndarray::Zip::from(&mut d)
            .and(&cache.out)
            .for_each(|g, a| if *a <= 0.0 { *g = 0.0 });
        let dy = norms[i].backward(&cache.norm, d.view(), &mut grad_norms[i]);
        match convs[i].backward(&cache.conv, dy.view(), lens, &mut grad_convs[i], i > 0 || need_input) {
            Some(dx) => d = dx,
            None => return None,
        }
    }
    Some(d)
}

pub(crate) struct EncoderPass {
    lens: Vec<usize>,
    padded: Vec<usize>,
    blocks: Vec<BlockCache>,
    lstm: BiLstmCache,
    pub codes: Array2<f64>,
    pub code_lens: Vec<usize>,
}

impl Encoder {
    pub(crate) fn forward(&self, batch: &Batch, downsample: usize, mode: Mode) -> EncoderPass {
        let joined = concat_embedding(batch.x, &batch.embs, &batch.lens);
        let (input, padded) = pad_edges(&joined, &batch.lens, downsample);
        let blocks = conv_blocks(&self.convs, &self.norms, input.view(), &padded, mode);
        let last = blocks.last().expect("at least one conv block");
        let (states, lstm) = self.lstm.forward(last.out.view(), &padded);

        let h = self.lstm.hidden();
        let code_lens: Vec<usize> = padded.iter().map(|p| p / downsample).collect();
        let mut codes = Array2::zeros((2 * h, code_lens.iter().sum()));
        for ((off, coff), &n) in offsets(&padded)
            .into_iter()
            .zip(offsets(&code_lens))
            .zip(&code_lens)
        {
            for j in 0..n {
                // forward state at the end of each window, backward state at its start
                codes
                    .slice_mut(s![..h, coff + j])
                    .assign(&states.slice(s![..h, off + j * downsample + downsample - 1]));
                codes
                    .slice_mut(s![h.., coff + j])
                    .assign(&states.slice(s![h.., off + j * downsample]));
            }
        }
        EncoderPass {
            lens: batch.lens.clone(),
            padded,
            blocks,
            lstm,
            codes,
            code_lens,
        }
    }

    /// Accumulates parameter gradients; returns the gradient with respect to
    /// the spectrogram rows of the input when `need_input` is set.
    pub(crate) fn backward(
        &self,
        pass: &EncoderPass,
        dcodes: ArrayView2<f64>,
        downsample: usize,
        freq_bins: usize,
        grad: &mut Encoder,
        need_input: bool,
    ) -> Option<Array2<f64>> {
        let h = self.lstm.hidden();
        let frames: usize = pass.padded.iter().sum();
        let mut dstates = Array2::zeros((2 * h, frames));
        for ((off, coff), &n) in offsets(&pass.padded)
            .into_iter()
            .zip(offsets(&pass.code_lens))
            .zip(&pass.code_lens)
        {
            for j in 0..n {
                dstates
                    .slice_mut(s![..h, off + j * downsample + downsample - 1])
                    .assign(&dcodes.slice(s![..h, coff + j]));
                dstates
                    .slice_mut(s![h.., off + j * downsample])
                    .assign(&dcodes.slice(s![h.., coff + j]));
            }
        }
        let last = &pass.blocks.last().expect("conv blocks").out;
        let dlast = self
            .lstm
            .backward(&pass.lstm, last.view(), dstates.view(), &pass.padded, &mut grad.lstm, true)
            .expect("input gradient requested");
        let dinput = conv_blocks_backward(
            &self.convs,
            &self.norms,
            &pass.blocks,
            dlast,
            &pass.padded,
            &mut grad.convs,
            &mut grad.norms,
            need_input,
        )?;
        let dinput = unpad_edges(&dinput, &pass.lens, &pass.padded);
        Some(dinput.slice(s![..freq_bins, ..]).to_owned())
    }

    pub(crate) fn update_running(&mut self, pass: &EncoderPass) {
        for (norm, block) in self.norms.iter_mut().zip(&pass.blocks) {
            if let Some(stats) = &block.stats {
                norm.update_running(stats);
            }
        }
    }
}

/// Repeats each code `factor` times and trims to the sequence lengths.
pub(crate) fn upsample(codes: ArrayView2<f64>, code_lens: &[usize], lens: &[usize], factor: usize) -> Array2<f64> {
    let mut out = Array2::zeros((codes.nrows(), lens.iter().sum()));
    for ((off, coff), &len) in offsets(lens).into_iter().zip(offsets(code_lens)).zip(lens) {
        for t in 0..len {
            out.column_mut(off + t).assign(&codes.column(coff + t / factor));
        }
    }
    out
}

fn upsample_backward(dup: ArrayView2<f64>, code_lens: &[usize], lens: &[usize], factor: usize) -> Array2<f64> {
    let mut out = Array2::zeros((dup.nrows(), code_lens.iter().sum()));
    for ((off, coff), &len) in offsets(lens).into_iter().zip(offsets(code_lens)).zip(lens) {
        for t in 0..len {
            let mut col = out.column_mut(coff + t / factor);
            col += &dup.column(off + t);
        }
    }
    out
}

pub(crate) struct DecoderPass {
    lens: Vec<usize>,
    code_lens: Vec<usize>,
    code_dim: usize,
    input: Array2<f64>,
    lstm1: BiLstmCache,
    blocks: Vec<BlockCache>,
    lstm2_out: Array2<f64>,
    lstm2: BiLstmCache,
    pub out: Array2<f64>,
}

impl Decoder {
    pub(crate) fn forward(
        &self,
        codes: ArrayView2<f64>,
        code_lens: &[usize],
        lens: &[usize],
        embs: &[&[f64]],
        downsample: usize,
        mode: Mode,
    ) -> DecoderPass {
        let up = upsample(codes, code_lens, lens, downsample);
        let input = concat_embedding(up.view(), embs, lens);
        let (lstm1_out, lstm1) = self.lstm1.forward(input.view(), lens);
        let blocks = conv_blocks(&self.convs, &self.norms, lstm1_out.view(), lens, mode);
        let last = blocks.last().expect("conv blocks");
        let (lstm2_out, lstm2) = self.lstm2.forward(last.out.view(), lens);
        let out = self.proj.forward(lstm2_out.view());
        DecoderPass {
            lens: lens.to_vec(),
            code_lens: code_lens.to_vec(),
            code_dim: codes.nrows(),
            input,
            lstm1,
            blocks,
            lstm2_out,
            lstm2,
            out,
        }
    }

    /// Returns the gradient with respect to the content codes.
    pub(crate) fn backward(
        &self,
        pass: &DecoderPass,
        dout: ArrayView2<f64>,
        downsample: usize,
        grad: &mut Decoder,
    ) -> Array2<f64> {
        let lens = &pass.lens;
        let dl2 = self.proj.backward(pass.lstm2_out.view(), dout, &mut grad.proj);
        let last = &pass.blocks.last().expect("conv blocks").out;
        let dlast = self
            .lstm2
            .backward(&pass.lstm2, last.view(), dl2.view(), lens, &mut grad.lstm2, true)
            .expect("input gradient requested");
        let dl1 = conv_blocks_backward(
            &self.convs,
            &self.norms,
            &pass.blocks,
            dlast,
            lens,
            &mut grad.convs,
            &mut grad.norms,
            true,
        )
        .expect("input gradient requested");
        let dinput = self
            .lstm1
            .backward(&pass.lstm1, pass.input.view(), dl1.view(), lens, &mut grad.lstm1, true)
            .expect("input gradient requested");
        upsample_backward(dinput.slice(s![..pass.code_dim, ..]), &pass.code_lens, lens, downsample)
    }

    pub(crate) fn update_running(&mut self, pass: &DecoderPass) {
        for (norm, block) in self.norms.iter_mut().zip(&pass.blocks) {
            if let Some(stats) = &block.stats {
                norm.update_running(stats);
            }
        }
    }
}

pub(crate) struct PostnetPass {
    lens: Vec<usize>,
    /// Input to each convolution.
    inputs: Vec<Array2<f64>>,
    convs: Vec<ConvCache>,
    norms: Vec<(BnCache, Option<BnStats>)>,
    pub out: Array2<f64>,
}

impl Postnet {
    pub(crate) fn forward(&self, xhat: ArrayView2<f64>, lens: &[usize], mode: Mode) -> PostnetPass {
        let layers = self.convs.len();
        let mut inputs = Vec::with_capacity(layers);
        let mut convs = Vec::with_capacity(layers);
        let mut norms = Vec::with_capacity(layers.saturating_sub(1));
        let mut h = xhat.to_owned();
        for (i, conv) in self.convs.iter().enumerate() {
            let (y, cache) = conv.forward(h.view(), lens);
            inputs.push(h);
            convs.push(cache);
            h = if i + 1 < layers {
                let (z, bn_cache, stats) = self.norms[i].forward(y.view(), mode);
                norms.push((bn_cache, stats));
                z.mapv(f64::tanh)
            } else {
                y
            };
        }
        let out = &xhat + &h;
        PostnetPass {
            lens: lens.to_vec(),
            inputs,
            convs,
            norms,
            out,
        }
    }

    /// Gradient with respect to the postnet input, skip path included.
    pub(crate) fn backward(&self, pass: &PostnetPass, dout: ArrayView2<f64>, grad: &mut Postnet) -> Array2<f64> {
        let layers = self.convs.len();
        let mut d = dout.to_owned();
        for i in (0..layers).rev() {
            if i + 1 < layers {
                // d currently holds the gradient w.r.t. tanh output, i.e. inputs[i + 1]
                let act = &pass.inputs[i + 1];
                ndarray::Zip::from(&mut d).and(act).for_each(|g, a| *g *= 1.0 - a * a);
                d = self.norms[i].backward(&pass.norms[i].0, d.view(), &mut grad.norms[i]);
            }
            d = self.convs[i]
                .backward(&pass.convs[i], d.view(), &pass.lens, &mut grad.convs[i], true)
                .expect("input gradient requested");
        }
        d + dout
    }

    pub(crate) fn update_running(&mut self, pass: &PostnetPass) {
        for (norm, (_, stats)) in self.norms.iter_mut().zip(&pass.norms) {
            if let Some(stats) = stats {
                norm.update_running(stats);
            }
        }
    }
}

/// Encoder, decoder and postnet outputs for one batch.
pub(crate) struct FullPass {
    pub encoder: EncoderPass,
    pub decoder: DecoderPass,
    pub postnet: PostnetPass,
}

impl ModelParams {
    pub(crate) fn run(&self, batch: &Batch, dec_embs: &[&[f64]], mode: Mode) -> FullPass {
        let d = self.config.downsample;
        let encoder = self.encoder.forward(batch, d, mode);
        let decoder = self.decoder.forward(
            encoder.codes.view(),
            &encoder.code_lens,
            &batch.lens,
            dec_embs,
            d,
            mode,
        );
        let postnet = self.postnet.forward(decoder.out.view(), &batch.lens, mode);
        FullPass {
            encoder,
            decoder,
            postnet,
        }
    }
}

