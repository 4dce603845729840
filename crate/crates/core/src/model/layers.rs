//! Differentiable building blocks. Activations are channels x frames
//! matrices; a batch is several sequences laid side by side along the frame
//! axis, described by their lengths. Convolutions and recurrences never cross
//! a sequence boundary; batch normalization pools statistics over all frames.

use ndarray::{s, Array1, Array2, Array3, ArrayView2, Axis};
use rand::Rng;

use super::params::{TensorView, TensorViewMut};

pub const BN_MOMENTUM: f64 = 0.1;
pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics in normalization layers.
    Train,
    /// Running statistics in normalization layers.
    Eval,
}

fn uniform<R: Rng>(rng: &mut R, bound: f64) -> f64 {
    rng.random_range(-bound..bound)
}

/// Sequence start offsets for the given lengths.
pub(crate) fn offsets(lens: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    lens.iter()
        .map(|l| {
            let o = acc;
            acc += l;
            o
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    /// (out, in, kernel)
    pub weight: Array3<f64>,
    pub bias: Array1<f64>,
}

pub(crate) struct ConvCache {
    cols: Array2<f64>,
}

impl Conv1d {
    pub fn new<R: Rng>(rng: &mut R, input: usize, output: usize, kernel: usize) -> Self {
        let bound = 1.0 / ((input * kernel) as f64).sqrt();
        Self {
            weight: Array3::from_shape_simple_fn((output, input, kernel), || uniform(rng, bound)),
            bias: Array1::from_shape_simple_fn(output, || uniform(rng, bound)),
        }
    }

    fn kernel(&self) -> usize {
        self.weight.dim().2
    }

    fn flat_weight(&self) -> ArrayView2<'_, f64> {
        let (o, i, k) = self.weight.dim();
        self.weight
            .view()
            .into_shape_with_order((o, i * k))
            .expect("standard layout")
    }

    fn im2col(&self, x: ArrayView2<f64>, lens: &[usize]) -> Array2<f64> {
        let (_, cin, k) = self.weight.dim();
        let pad = k / 2;
        let n = x.ncols();
        let mut cols = Array2::zeros((cin * k, n));
        for (off, &len) in offsets(lens).into_iter().zip(lens) {
            for j in 0..k {
                // output t reads input t + j - pad
                let lo = pad.saturating_sub(j);
                let hi = (len + pad).saturating_sub(j).min(len);
                if lo >= hi {
                    continue;
                }
                let src_lo = lo + j - pad;
                let src_hi = hi + j - pad;
                for c in 0..cin {
                    cols.slice_mut(s![c * k + j, off + lo..off + hi])
                        .assign(&x.slice(s![c, off + src_lo..off + src_hi]));
                }
            }
        }
        cols
    }

    fn col2im(&self, dcols: &Array2<f64>, lens: &[usize]) -> Array2<f64> {
        let (_, cin, k) = self.weight.dim();
        let pad = k / 2;
        let mut dx = Array2::zeros((cin, dcols.ncols()));
        for (off, &len) in offsets(lens).into_iter().zip(lens) {
            for j in 0..k {
                let lo = pad.saturating_sub(j);
                let hi = (len + pad).saturating_sub(j).min(len);
                if lo >= hi {
                    continue;
                }
                let src_lo = lo + j - pad;
                let src_hi = hi + j - pad;
                for c in 0..cin {
                    let mut dst = dx.slice_mut(s![c, off + src_lo..off + src_hi]);
                    dst += &dcols.slice(s![c * k + j, off + lo..off + hi]);
                }
            }
        }
        dx
    }

    pub(crate) fn forward(&self, x: ArrayView2<f64>, lens: &[usize]) -> (Array2<f64>, ConvCache) {
        debug_assert_eq!(x.nrows(), self.weight.dim().1);
        let cols = self.im2col(x, lens);
        let mut y = self.flat_weight().dot(&cols);
        y += &self.bias.view().insert_axis(Axis(1));
        (y, ConvCache { cols })
    }

    pub(crate) fn backward(
        &self,
        cache: &ConvCache,
        dy: ArrayView2<f64>,
        lens: &[usize],
        grad: &mut Conv1d,
        need_input: bool,
    ) -> Option<Array2<f64>> {
        let (o, i, k) = self.weight.dim();
        let dw = dy.dot(&cache.cols.t());
        let mut gw = grad
            .weight
            .view_mut()
            .into_shape_with_order((o, i * k))
            .expect("standard layout");
        gw += &dw;
        grad.bias += &dy.sum_axis(Axis(1));
        if !need_input {
            return None;
        }
        let dcols = self.flat_weight().t().dot(&dy);
        debug_assert_eq!(self.kernel(), k);
        Some(self.col2im(&dcols, lens))
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorView<'a>>) {
        out.push(TensorView::new(format!("{prefix}.weight"), &self.weight, true));
        out.push(TensorView::new(format!("{prefix}.bias"), &self.bias, true));
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorViewMut<'a>>) {
        out.push(TensorViewMut::new(format!("{prefix}.weight"), &mut self.weight, true));
        out.push(TensorViewMut::new(format!("{prefix}.bias"), &mut self.bias, true));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

pub(crate) struct BnCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
    mode: Mode,
}

/// Per-channel batch statistics from a training-mode pass.
#[derive(Debug, Clone)]
pub(crate) struct BnStats {
    mean: Array1<f64>,
    var: Array1<f64>,
    count: usize,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: Array1::ones(channels),
            beta: Array1::zeros(channels),
            running_mean: Array1::zeros(channels),
            running_var: Array1::ones(channels),
        }
    }

    pub(crate) fn forward(&self, x: ArrayView2<f64>, mode: Mode) -> (Array2<f64>, BnCache, Option<BnStats>) {
        let (mean, var, stats) = match mode {
            Mode::Train => {
                let n = x.ncols() as f64;
                let mean = x.sum_axis(Axis(1)) / n;
                let centered = &x - &mean.view().insert_axis(Axis(1));
                let var = centered.mapv(|v| v * v).sum_axis(Axis(1)) / n;
                let stats = BnStats {
                    mean: mean.clone(),
                    var: var.clone(),
                    count: x.ncols(),
                };
                (mean, var, Some(stats))
            }
            Mode::Eval => (self.running_mean.clone(), self.running_var.clone(), None),
        };
        let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
        let xhat = (&x - &mean.view().insert_axis(Axis(1))) * &inv_std.view().insert_axis(Axis(1));
        let y = &xhat * &self.gamma.view().insert_axis(Axis(1)) + &self.beta.view().insert_axis(Axis(1));
        (y, BnCache { xhat, inv_std, mode }, stats)
    }

    pub(crate) fn backward(&self, cache: &BnCache, dy: ArrayView2<f64>, grad: &mut BatchNorm) -> Array2<f64> {
        grad.gamma += &(&dy * &cache.xhat).sum_axis(Axis(1));
        grad.beta += &dy.sum_axis(Axis(1));
        let scale = (&self.gamma * &cache.inv_std).insert_axis(Axis(1));
        match cache.mode {
            Mode::Eval => &dy * &scale,
            Mode::Train => {
                let n = dy.ncols() as f64;
                let sum_dy = dy.sum_axis(Axis(1)).insert_axis(Axis(1));
                let sum_dy_xhat = (&dy * &cache.xhat).sum_axis(Axis(1)).insert_axis(Axis(1));
                let inner = &dy - &(sum_dy / n) - &(&cache.xhat * &(sum_dy_xhat / n));
                inner * &scale
            }
        }
    }

    pub(crate) fn update_running(&mut self, stats: &BnStats) {
        let correction = if stats.count > 1 {
            stats.count as f64 / (stats.count - 1) as f64
        } else {
            1.0
        };
        self.running_mean
            .zip_mut_with(&stats.mean, |r, m| *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * m);
        self.running_var.zip_mut_with(&stats.var, |r, v| {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * v * correction
        });
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorView<'a>>) {
        out.push(TensorView::new(format!("{prefix}.gamma"), &self.gamma, true));
        out.push(TensorView::new(format!("{prefix}.beta"), &self.beta, true));
        out.push(TensorView::new(format!("{prefix}.running_mean"), &self.running_mean, false));
        out.push(TensorView::new(format!("{prefix}.running_var"), &self.running_var, false));
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorViewMut<'a>>) {
        out.push(TensorViewMut::new(format!("{prefix}.gamma"), &mut self.gamma, true));
        out.push(TensorViewMut::new(format!("{prefix}.beta"), &mut self.beta, true));
        out.push(TensorViewMut::new(format!("{prefix}.running_mean"), &mut self.running_mean, false));
        out.push(TensorViewMut::new(format!("{prefix}.running_var"), &mut self.running_var, false));
    }
}

/// One LSTM direction. Gate order in the stacked matrices is input, forget,
/// cell, output.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    pub w_ih: Array2<f64>,
    pub w_hh: Array2<f64>,
    pub bias: Array1<f64>,
}

pub(crate) struct LstmCache {
    /// Post-activation gates, 4H x N.
    gates: Array2<f64>,
    cell: Array2<f64>,
    /// Hidden state entering each step, H x N.
    h_prev: Array2<f64>,
    reverse: bool,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Lstm {
    pub fn new<R: Rng>(rng: &mut R, input: usize, hidden: usize) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        Self {
            w_ih: Array2::from_shape_simple_fn((4 * hidden, input), || uniform(rng, bound)),
            w_hh: Array2::from_shape_simple_fn((4 * hidden, hidden), || uniform(rng, bound)),
            bias: Array1::from_shape_simple_fn(4 * hidden, || uniform(rng, bound)),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.ncols()
    }

    fn steps(len: usize, reverse: bool) -> Box<dyn Iterator<Item = usize>> {
        if reverse {
            Box::new((0..len).rev())
        } else {
            Box::new(0..len)
        }
    }

    pub(crate) fn forward(&self, x: ArrayView2<f64>, lens: &[usize], reverse: bool) -> (Array2<f64>, LstmCache) {
        let h = self.hidden();
        let n = x.ncols();
        let mut pre = self.w_ih.dot(&x);
        pre += &self.bias.view().insert_axis(Axis(1));
        let mut gates = Array2::zeros((4 * h, n));
        let mut cell = Array2::zeros((h, n));
        let mut out = Array2::zeros((h, n));
        let mut h_prev_all = Array2::zeros((h, n));
        for (off, &len) in offsets(lens).into_iter().zip(lens) {
            let mut h_prev = Array1::<f64>::zeros(h);
            let mut c_prev = Array1::<f64>::zeros(h);
            for t in Self::steps(len, reverse) {
                let col = off + t;
                h_prev_all.column_mut(col).assign(&h_prev);
                let z = &pre.column(col) + &self.w_hh.dot(&h_prev);
                let mut c = Array1::zeros(h);
                let mut hn = Array1::zeros(h);
                for j in 0..h {
                    let i = sigmoid(z[j]);
                    let f = sigmoid(z[h + j]);
                    let g = z[2 * h + j].tanh();
                    let o = sigmoid(z[3 * h + j]);
                    c[j] = f * c_prev[j] + i * g;
                    hn[j] = o * c[j].tanh();
                    gates[[j, col]] = i;
                    gates[[h + j, col]] = f;
                    gates[[2 * h + j, col]] = g;
                    gates[[3 * h + j, col]] = o;
                }
                cell.column_mut(col).assign(&c);
                out.column_mut(col).assign(&hn);
                h_prev = hn;
                c_prev = c;
            }
        }
        let cache = LstmCache {
            gates,
            cell,
            h_prev: h_prev_all,
            reverse,
        };
        (out, cache)
    }

    pub(crate) fn backward(
        &self,
        cache: &LstmCache,
        x: ArrayView2<f64>,
        dy: ArrayView2<f64>,
        lens: &[usize],
        grad: &mut Lstm,
        need_input: bool,
    ) -> Option<Array2<f64>> {
        let h = self.hidden();
        let n = dy.ncols();
        let mut dz_all = Array2::zeros((4 * h, n));
        let w_hh_t = self.w_hh.t();
        for (off, &len) in offsets(lens).into_iter().zip(lens) {
            let mut dh_next = Array1::<f64>::zeros(h);
            let mut dc_next = Array1::<f64>::zeros(h);
            // walk the recurrence backwards relative to the forward order
            for t in Self::steps(len, !cache.reverse) {
                let col = off + t;
                let first = if cache.reverse { t + 1 == len } else { t == 0 };
                let mut dz = Array1::zeros(4 * h);
                for j in 0..h {
                    let i = cache.gates[[j, col]];
                    let f = cache.gates[[h + j, col]];
                    let g = cache.gates[[2 * h + j, col]];
                    let o = cache.gates[[3 * h + j, col]];
                    let c = cache.cell[[j, col]];
                    let c_prev = if first {
                        0.0
                    } else if cache.reverse {
                        cache.cell[[j, col + 1]]
                    } else {
                        cache.cell[[j, col - 1]]
                    };
                    let tc = c.tanh();
                    let dh = dy[[j, col]] + dh_next[j];
                    let dc = dh * o * (1.0 - tc * tc) + dc_next[j];
                    dz[j] = dc * g * i * (1.0 - i);
                    dz[h + j] = dc * c_prev * f * (1.0 - f);
                    dz[2 * h + j] = dc * i * (1.0 - g * g);
                    dz[3 * h + j] = dh * tc * o * (1.0 - o);
                    dc_next[j] = dc * f;
                }
                dh_next = w_hh_t.dot(&dz);
                dz_all.column_mut(col).assign(&dz);
            }
        }
        grad.w_ih += &dz_all.dot(&x.t());
        grad.w_hh += &dz_all.dot(&cache.h_prev.t());
        grad.bias += &dz_all.sum_axis(Axis(1));
        need_input.then(|| self.w_ih.t().dot(&dz_all))
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorView<'a>>) {
        out.push(TensorView::new(format!("{prefix}.w_ih"), &self.w_ih, true));
        out.push(TensorView::new(format!("{prefix}.w_hh"), &self.w_hh, true));
        out.push(TensorView::new(format!("{prefix}.bias"), &self.bias, true));
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorViewMut<'a>>) {
        out.push(TensorViewMut::new(format!("{prefix}.w_ih"), &mut self.w_ih, true));
        out.push(TensorViewMut::new(format!("{prefix}.w_hh"), &mut self.w_hh, true));
        out.push(TensorViewMut::new(format!("{prefix}.bias"), &mut self.bias, true));
    }
}

/// Forward and backward LSTMs over the same input; outputs stacked as
/// `[forward; backward]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstm {
    pub fwd: Lstm,
    pub bwd: Lstm,
}

pub(crate) struct BiLstmCache {
    fwd: LstmCache,
    bwd: LstmCache,
}

impl BiLstm {
    pub fn new<R: Rng>(rng: &mut R, input: usize, hidden: usize) -> Self {
        let fwd = Lstm::new(rng, input, hidden);
        let bwd = Lstm::new(rng, input, hidden);
        Self { fwd, bwd }
    }

    pub fn hidden(&self) -> usize {
        self.fwd.hidden()
    }

    pub(crate) fn forward(&self, x: ArrayView2<f64>, lens: &[usize]) -> (Array2<f64>, BiLstmCache) {
        let h = self.hidden();
        let (yf, cf) = self.fwd.forward(x, lens, false);
        let (yb, cb) = self.bwd.forward(x, lens, true);
        let mut y = Array2::zeros((2 * h, x.ncols()));
        y.slice_mut(s![..h, ..]).assign(&yf);
        y.slice_mut(s![h.., ..]).assign(&yb);
        (y, BiLstmCache { fwd: cf, bwd: cb })
    }

    pub(crate) fn backward(
        &self,
        cache: &BiLstmCache,
        x: ArrayView2<f64>,
        dy: ArrayView2<f64>,
        lens: &[usize],
        grad: &mut BiLstm,
        need_input: bool,
    ) -> Option<Array2<f64>> {
        let h = self.hidden();
        let dxf = self
            .fwd
            .backward(&cache.fwd, x, dy.slice(s![..h, ..]), lens, &mut grad.fwd, need_input);
        let dxb = self
            .bwd
            .backward(&cache.bwd, x, dy.slice(s![h.., ..]), lens, &mut grad.bwd, need_input);
        match (dxf, dxb) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        }
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorView<'a>>) {
        self.fwd.visit(&format!("{prefix}.fwd"), out);
        self.bwd.visit(&format!("{prefix}.bwd"), out);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorViewMut<'a>>) {
        self.fwd.visit_mut(&format!("{prefix}.fwd"), out);
        self.bwd.visit_mut(&format!("{prefix}.bwd"), out);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// (out, in)
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Linear {
    pub fn new<R: Rng>(rng: &mut R, input: usize, output: usize) -> Self {
        let bound = 1.0 / (input as f64).sqrt();
        Self {
            weight: Array2::from_shape_simple_fn((output, input), || uniform(rng, bound)),
            bias: Array1::from_shape_simple_fn(output, || uniform(rng, bound)),
        }
    }

    pub(crate) fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.weight.dot(&x) + &self.bias.view().insert_axis(Axis(1))
    }

    pub(crate) fn backward(&self, x: ArrayView2<f64>, dy: ArrayView2<f64>, grad: &mut Linear) -> Array2<f64> {
        grad.weight += &dy.dot(&x.t());
        grad.bias += &dy.sum_axis(Axis(1));
        self.weight.t().dot(&dy)
    }

    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorView<'a>>) {
        out.push(TensorView::new(format!("{prefix}.weight"), &self.weight, true));
        out.push(TensorView::new(format!("{prefix}.bias"), &self.bias, true));
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorViewMut<'a>>) {
        out.push(TensorViewMut::new(format!("{prefix}.weight"), &mut self.weight, true));
        out.push(TensorViewMut::new(format!("{prefix}.bias"), &mut self.bias, true));
    }
}

/// Layers that expose their tensors by path.
pub(crate) trait Visit {
    fn visit_tensors<'a>(&'a self, prefix: &str, out: &mut Vec<TensorView<'a>>);
    fn visit_tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorViewMut<'a>>);
}

macro_rules! impl_visit {
    ($($ty:ty),*) => {$(
        impl Visit for $ty {
            fn visit_tensors<'a>(&'a self, prefix: &str, out: &mut Vec<TensorView<'a>>) {
                self.visit(prefix, out)
            }
            fn visit_tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorViewMut<'a>>) {
                self.visit_mut(prefix, out)
            }
        }
    )*};
}

impl_visit!(Conv1d, BatchNorm, Lstm, BiLstm, Linear);

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn random(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((rows, cols), || r.random_range(-1.0..1.0))
    }

    #[test]
    fn conv_matches_direct_sum_and_respects_boundaries() {
        let conv = Conv1d::new(&mut rng(), 3, 2, 3);
        let x = random(3, 7, 1);
        let lens = [4, 3];
        let (y, _) = conv.forward(x.view(), &lens);
        for (off, len) in [(0usize, 4usize), (4, 3)] {
            for o in 0..2 {
                for t in 0..len {
                    let mut acc = conv.bias[o];
                    for c in 0..3 {
                        for j in 0..3 {
                            let src = t as isize + j as isize - 1;
                            if src >= 0 && (src as usize) < len {
                                acc += conv.weight[[o, c, j]] * x[[c, off + src as usize]];
                            }
                        }
                    }
                    assert!((y[[o, off + t]] - acc).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_frame_conv_uses_center_tap() {
        let conv = Conv1d::new(&mut rng(), 1, 1, 5);
        let x = Array2::from_elem((1, 1), 2.0);
        let (y, _) = conv.forward(x.view(), &[1]);
        assert!((y[[0, 0]] - (conv.weight[[0, 0, 2]] * 2.0 + conv.bias[0])).abs() < 1e-15);
    }

    #[test]
    fn eval_batchnorm_with_fresh_stats_is_near_identity() {
        let bn = BatchNorm::new(2);
        let x = random(2, 5, 3);
        let (y, _, stats) = bn.forward(x.view(), Mode::Eval);
        assert!(stats.is_none());
        for (a, b) in x.iter().zip(y.iter()) {
            assert!((a / (1.0 + BN_EPS).sqrt() - b).abs() < 1e-15);
        }
    }

    #[test]
    fn train_batchnorm_normalizes() {
        let bn = BatchNorm::new(3);
        let x = random(3, 40, 4) * 5.0 + 2.0;
        let (y, _, _) = bn.forward(x.view(), Mode::Train);
        for row in y.outer_iter() {
            let mean = row.mean().unwrap();
            let var = row.mapv(|v| (v - mean).powi(2)).mean().unwrap();
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn running_stats_follow_momentum() {
        let mut bn = BatchNorm::new(1);
        let x = Array2::from_shape_vec((1, 4), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (_, _, stats) = bn.forward(x.view(), Mode::Train);
        bn.update_running(&stats.unwrap());
        assert!((bn.running_mean[0] - 0.25).abs() < 1e-15);
        // unbiased variance 5/3
        assert!((bn.running_var[0] - (0.9 + 0.1 * 5.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn reverse_lstm_equals_forward_lstm_on_reversed_input() {
        let lstm = Lstm::new(&mut rng(), 3, 4);
        let x = random(3, 6, 5);
        let mut rev = x.clone();
        rev.invert_axis(Axis(1));
        let (y_rev, _) = lstm.forward(x.view(), &[6], true);
        let (mut y_fwd, _) = lstm.forward(rev.view(), &[6], false);
        y_fwd.invert_axis(Axis(1));
        for (a, b) in y_rev.iter().zip(y_fwd.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn lstm_state_resets_between_sequences() {
        let lstm = Lstm::new(&mut rng(), 2, 3);
        let x = random(2, 9, 6);
        let (joint, _) = lstm.forward(x.view(), &[4, 5], false);
        let (second, _) = lstm.forward(x.slice(s![.., 4..]), &[5], false);
        for (a, b) in joint.slice(s![.., 4..]).iter().zip(second.iter()) {
            assert_eq!(a, b);
        }
    }
}
