//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion reports a line whether or not the others pass.

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex64, FftPlanner};
use sha2::{Digest, Sha256};

use singit_core::data::UtteranceKind;
use singit_core::dsp::{
    griffin_lim_with, istft, log_spectrogram, magnitude, stft, GriffinLimOptions, StftConfig, Waveform,
};
use singit_core::model::{decode, encode, encoder_input, postnet_apply, Checkpoint, Mode, ModelConfig, ModelParams};
use singit_core::pipeline::{transfer, TransferOptions};
use singit_core::speaker::{embed_utterance, SpeakerEmbedding};
use singit_core::stats::survey_stats;
use singit_core::training::{
    gradients, loss_l1, loss_l2, loss_l3, objective, total_loss, train_loop, LossReport, LossWeights, Sample,
    TrainConfig, TrainOutput, TrainingItem, Trainer,
};

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn noise(len: usize, amp: f64, seed: u64) -> Waveform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Waveform::new((0..len).map(|_| rng.random_range(-amp..amp)).collect(), 16_000).unwrap()
}

/// Harmonic source with a gliding pitch, shaped by three formants and a
/// syllable-rate envelope, plus a little breath noise.
fn speech_like(secs: f64, f0: f64, seed: u64) -> Waveform {
    let n = (secs * 16_000.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let formants = [(700.0, 130.0), (1220.0, 70.0), (2600.0, 160.0)];
    let mut phase = 0.0;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / 16_000.0;
            let pitch = f0 * (1.0 + 0.15 * (2.0 * PI * 0.7 * t).sin());
            phase += 2.0 * PI * pitch / 16_000.0;
            let mut v = 0.0;
            let mut h = 1.0;
            while h * pitch < 7000.0 {
                let f = h * pitch;
                let gain: f64 = formants
                    .iter()
                    .map(|(c, bw)| 1.0 / (1.0 + ((f - c) / bw).powi(2)))
                    .sum::<f64>()
                    + 0.02;
                v += gain * (h * phase).sin() / h;
                h += 1.0;
            }
            let env = 0.55 + 0.45 * (2.0 * PI * 4.0 * t).sin();
            0.25 * env * v + 0.003 * rng.random_range(-1.0..1.0)
        })
        .collect();
    Waveform::new(samples, 16_000).unwrap().limit_peak()
}

fn fft_peak_bin(x: &[f64]) -> usize {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    (1..n / 2).max_by(|a, b| buf[*a].norm().total_cmp(&buf[*b].norm())).unwrap()
}

fn random_matrix(rows: usize, cols: usize, lo: f64, hi: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(lo..hi))
}

fn random_embedding(dim: usize, seed: u64) -> SpeakerEmbedding {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpeakerEmbedding::normalized((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn criterion_1_round_trip() -> Outcome {
    let cfg = StftConfig::default();
    let w = noise(16_000, 0.5, 1);
    let start = Instant::now();
    let spec = stft(&w, &cfg).map_err(|e| e.to_string())?;
    let back = istft(&spec, &cfg, w.len()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let interior = cfg.n_fft..w.len() - cfg.n_fft;
    let num: f64 = interior.clone().map(|i| (back.samples()[i] - w.samples()[i]).powi(2)).sum();
    let den: f64 = interior.map(|i| w.samples()[i].powi(2)).sum();
    let rel = (num / den).sqrt();
    check(
        rel < 1e-6 && elapsed < Duration::from_secs(1),
        format!("relative error {rel:.2e}, {elapsed:.2?}"),
        format!("relative error {rel:.2e} (< 1e-6), {elapsed:.2?} (< 1 s)"),
    )
}

fn criterion_2_griffin_lim() -> Outcome {
    let cfg = StftConfig::default();
    let w = speech_like(3.0, 140.0, 2);
    let m = magnitude(&stft(&w, &cfg).unwrap(), &cfg).unwrap();
    let opts = GriffinLimOptions {
        iters: 60,
        seed: 0,
        length: Some(w.len()),
        ..Default::default()
    };
    let out = griffin_lim_with(&m, &opts).map_err(|e| e.to_string())?;
    let sc = &out.spectral_convergence;
    let monotone = sc.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12));
    let ratio = sc[sc.len() - 1] / sc[0];

    let sine = Waveform::new(
        (0..16_000).map(|i| 0.5 * (2.0 * PI * 440.0 * i as f64 / 16_000.0).sin()).collect(),
        16_000,
    )
    .unwrap();
    let ms = magnitude(&stft(&sine, &cfg).unwrap(), &cfg).unwrap();
    let rec = griffin_lim_with(
        &ms,
        &GriffinLimOptions {
            length: Some(sine.len()),
            ..opts
        },
    )
    .map_err(|e| e.to_string())?;
    // whole-signal FFT of one second: bin k is k Hz
    let peak = fft_peak_bin(rec.waveform.samples()) as f64;
    let bin_hz = cfg.sample_rate as f64 / cfg.n_fft as f64;
    check(
        monotone && ratio <= 0.2 && (peak - 440.0).abs() <= bin_hz,
        format!("monotone, final/initial {ratio:.3}, sine peak {peak} Hz (bin {bin_hz:.1} Hz)"),
        format!("monotone={monotone}, final/initial {ratio:.3} (<= 0.2), sine peak {peak} Hz"),
    )
}

fn criterion_3_shapes() -> Outcome {
    let params = ModelParams::init(&ModelConfig::default(), 0).unwrap();
    let e = random_embedding(256, 3);
    for t in [1, 31, 32, 33, 128] {
        let x = random_matrix(256, t, 0.0, 1.0, t as u64);
        let input = encoder_input(&params, x.view(), &e).map_err(|e| e.to_string())?;
        let codes = encode(&params, x.view(), &e).map_err(|e| e.to_string())?;
        let xhat = decode(&params, &codes, &e).map_err(|e| e.to_string())?;
        let refined = postnet_apply(&params, xhat.view()).map_err(|e| e.to_string())?;
        if input.dim() != (512, t) || codes.len() != t.div_ceil(32) || xhat.dim() != (256, t) || refined.dim() != (256, t)
        {
            return Err(format!(
                "T={t}: input {:?}, {} codes, decoded {:?}, refined {:?}",
                input.dim(),
                codes.len(),
                xhat.dim(),
                refined.dim()
            ));
        }
    }
    Ok("T in {1,31,32,33,128}: 512xT input, ceil(T/32) codes, 256xT outputs".into())
}

fn criterion_4_losses() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let x = random_matrix(256, 40, 0.0, 1.0, seed);
        let y = random_matrix(256, 40, 0.0, 1.0, seed + 100);
        // oracle accumulates in a different order (column-major)
        let n = (256 * 40) as f64;
        let mut sq = 0.0;
        for c in 0..40 {
            for r in 0..256 {
                sq += (x[[r, c]] - y[[r, c]]).powi(2);
            }
        }
        let oracle = sq / n;
        let l1 = loss_l1(x.view(), y.view()).unwrap();
        let l2 = loss_l2(x.view(), y.view()).unwrap();
        worst = worst.max((l1 - oracle).abs() / oracle).max((l2 - oracle).abs() / oracle);
    }

    let cfg = ModelConfig {
        conv_channels: 16,
        enc_lstm_hidden: 8,
        dec_lstm_hidden: 8,
        ..ModelConfig::default()
    };
    let params = ModelParams::init(&cfg, 5).unwrap();
    let e = random_embedding(256, 4);
    let x = random_matrix(256, 70, 0.0, 1.0, 9);
    let refined = random_matrix(256, 70, 0.0, 1.0, 10);
    let a = encode(&params, x.view(), &e).unwrap();
    let b = encode(&params, refined.view(), &e).unwrap();
    let mut abs = 0.0;
    for c in 0..a.len() {
        for r in 0..a.dim() {
            abs += (a.codes()[[r, c]] - b.codes()[[r, c]]).abs();
        }
    }
    let l3_oracle = abs / (a.len() * a.dim()) as f64;
    let l3 = loss_l3(&params, x.view(), refined.view(), &e).unwrap();
    worst = worst.max((l3 - l3_oracle).abs() / l3_oracle);

    let mut total_err: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let (l1, l2, l3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random_range(0.0..1e-3));
        let t = total_loss(l1, l2, l3, 10_000.0);
        let r = LossReport::new(l1, l2, l3, 10_000.0);
        total_err = total_err
            .max((t - (l1 + l2 + 10_000.0 * l3)).abs() / t)
            .max((r.total - t).abs() / t);
    }
    check(
        worst < 1e-12 && total_err < 1e-12,
        format!("oracle rel. error {worst:.1e}, total rel. error {total_err:.1e}"),
        format!("oracle rel. error {worst:.1e}, total rel. error {total_err:.1e} (< 1e-12)"),
    )
}

fn criterion_5_gradients() -> Outcome {
    let cfg = ModelConfig {
        freq_bins: 8,
        emb_dim: 4,
        conv_channels: 8,
        conv_kernel: 5,
        enc_lstm_hidden: 4,
        dec_lstm_hidden: 4,
        downsample: 4,
        postnet_layers: 5,
    };
    let start = Instant::now();
    let params = ModelParams::init(&cfg, 11).unwrap();
    let xs = [random_matrix(8, 8, 0.0, 1.0, 1), random_matrix(8, 8, 0.0, 1.0, 2)];
    let es = [random_embedding(4, 1), random_embedding(4, 2)];
    let samples: Vec<Sample> = xs
        .iter()
        .zip(&es)
        .map(|(x, e)| Sample {
            x: x.view(),
            embedding: e,
        })
        .collect();
    let lambda = 10_000.0;
    let cases = [
        ("l1", LossWeights { l1: 1.0, l2: 0.0, l3: 0.0 }),
        ("l2", LossWeights { l1: 0.0, l2: 1.0, l3: 0.0 }),
        ("l3", LossWeights { l1: 0.0, l2: 0.0, l3: 1.0 }),
        ("total", LossWeights::total(lambda)),
    ];
    let h = 1e-6;
    let mut worst = (0.0_f64, String::new());
    for (label, weights) in cases {
        let (_, grad) = gradients(&params, &samples, lambda, weights).map_err(|e| e.to_string())?;
        let grads = grad.tensors();
        let global = grads
            .iter()
            .filter(|t| t.trainable)
            .flat_map(|t| t.data.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt();
        let mut probe = params.clone();
        for ti in 0..grads.len() {
            if !grads[ti].trainable {
                continue;
            }
            let mut diff2 = 0.0;
            let mut norm_a = 0.0;
            let mut norm_n = 0.0;
            for k in 0..grads[ti].data.len() {
                let orig = probe.tensors()[ti].data[k];
                probe.tensors_mut()[ti].data[k] = orig + h;
                let up = weights.apply(&objective(&probe, &samples, lambda, Mode::Train).unwrap());
                probe.tensors_mut()[ti].data[k] = orig - h;
                let down = weights.apply(&objective(&probe, &samples, lambda, Mode::Train).unwrap());
                probe.tensors_mut()[ti].data[k] = orig;
                let numeric = (up - down) / (2.0 * h);
                let analytic = grads[ti].data[k];
                diff2 += (numeric - analytic).powi(2);
                norm_a += analytic * analytic;
                norm_n += numeric * numeric;
            }
            // Conv biases feeding batch norm have an identically zero gradient;
            // below this floor a tensor is compared in absolute terms.
            let scale = norm_a.sqrt().max(norm_n.sqrt()).max(1e-6 * global);
            let rel = diff2.sqrt() / scale;
            if rel > worst.0 {
                worst = (rel, format!("{label}: {}", grads[ti].name));
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        worst.0 < 1e-3 && elapsed < Duration::from_secs(300),
        format!("max relative error {:.2e} ({}), {elapsed:.1?}", worst.0, worst.1),
        format!("max relative error {:.2e} at {} (< 1e-3), {elapsed:.1?}", worst.0, worst.1),
    )
}

/// Smaller widths than the default so that 2000 steps fit the CPU budget;
/// spectrogram and embedding sizes are unchanged.
fn overfit_config() -> ModelConfig {
    ModelConfig {
        conv_channels: 32,
        enc_lstm_hidden: 16,
        dec_lstm_hidden: 32,
        ..ModelConfig::default()
    }
}

struct OverfitRun {
    first: f64,
    last: f64,
    steps: u64,
    elapsed: Duration,
}

fn overfit(lambda3: f64, lr: f64) -> Result<OverfitRun, String> {
    let stft_cfg = StftConfig::default();
    let w = speech_like(1.4, 150.0, 6);
    let x = log_spectrogram(&w, &stft_cfg).unwrap().values().slice(s![.., ..128]).to_owned();
    let e = embed_utterance(&w, "baseline").unwrap();
    let cfg = TrainConfig {
        lambda3,
        crop_frames: 128,
        batch_size: 1,
        lr,
        max_steps: 2000,
        seed: 0,
        checkpoint_every: 0,
    };
    let params = ModelParams::init(&overfit_config(), cfg.seed).unwrap();
    let mut trainer = Trainer::new(params, cfg).map_err(|e| e.to_string())?;
    let batch = [Sample {
        x: x.view(),
        embedding: &e,
    }];
    let start = Instant::now();
    let first = trainer.train_step(&batch).map_err(|e| e.to_string())?.l1;
    let mut last = first;
    while trainer.step() < cfg.max_steps {
        trainer.train_step(&batch).map_err(|e| e.to_string())?;
        last = objective(trainer.params(), &batch, lambda3, Mode::Train).unwrap().l1;
        if last * 100.0 <= first {
            break;
        }
    }
    Ok(OverfitRun {
        first,
        last,
        steps: trainer.step(),
        elapsed: start.elapsed(),
    })
}

// Graded with the full objective. The reconstruction-only run is reported
// alongside to separate optimizer health from the weight on the code loss.
fn criterion_6_overfit() -> Outcome {
    let full = overfit(TrainConfig::default().lambda3, 3e-2)?;
    let recon = overfit(0.0, 1e-3)?;
    let factor = full.first / full.last;
    let detail = format!(
        "full objective L1 {:.3e} -> {:.3e} ({factor:.1}x) in {} steps, {:.0?}; \
         reconstruction only {:.1}x in {} steps",
        full.first,
        full.last,
        full.steps,
        full.elapsed,
        recon.first / recon.last,
        recon.steps
    );
    check(
        factor >= 100.0 && full.elapsed < Duration::from_secs(600),
        detail.clone(),
        format!("{detail}; need 100x"),
    )
}

fn criterion_7_zero_shot() -> Outcome {
    let stft_cfg = StftConfig::default();
    let train_voice = speech_like(2.0, 120.0, 7);
    let item = TrainingItem {
        spectrogram: log_spectrogram(&train_voice, &stft_cfg).unwrap().into_values(),
        embedding: embed_utterance(&train_voice, "baseline").unwrap(),
        kind: UtteranceKind::Speech,
    };
    let model = ModelConfig {
        conv_channels: 16,
        enc_lstm_hidden: 8,
        dec_lstm_hidden: 16,
        ..ModelConfig::default()
    };
    let cfg = TrainConfig {
        max_steps: 5,
        checkpoint_every: 0,
        lr: 1e-3,
        ..TrainConfig::default()
    };
    let outcome = train_loop(&[item], &model, &cfg, None).map_err(|e| e.to_string())?;
    let ckpt = Checkpoint::new(outcome.params, 5, stft_cfg);

    let content = speech_like(2.3, 200.0, 8);
    // a speaker never seen in training: different pitch and formant balance
    let unseen = [speech_like(1.0, 95.0, 9), noise(16_000, 0.2, 10)];
    let out = transfer(&content, &unseen, &ckpt, &TransferOptions::default()).map_err(|e| e.to_string())?;
    let diff = out.waveform.len().abs_diff(content.len());
    let peak = out.waveform.peak();
    check(
        diff <= stft_cfg.hop && peak <= 1.0,
        format!("length {} for {} input samples, peak {peak:.2e}", out.waveform.len(), content.len()),
        format!("length {} vs {} (± {}), peak {peak:.3}", out.waveform.len(), content.len(), stft_cfg.hop),
    )
}

fn criterion_8_determinism() -> Outcome {
    let stft_cfg = StftConfig::default();
    let voices = [speech_like(1.5, 130.0, 11), speech_like(1.2, 210.0, 12)];
    let data: Vec<TrainingItem> = voices
        .iter()
        .zip([UtteranceKind::Speech, UtteranceKind::Singing])
        .map(|(w, kind)| TrainingItem {
            spectrogram: log_spectrogram(w, &stft_cfg).unwrap().into_values(),
            embedding: embed_utterance(w, "baseline").unwrap(),
            kind,
        })
        .collect();
    let model = ModelConfig {
        conv_channels: 16,
        enc_lstm_hidden: 8,
        dec_lstm_hidden: 16,
        ..ModelConfig::default()
    };
    let cfg = TrainConfig {
        max_steps: 10,
        checkpoint_every: 10,
        lr: 1e-3,
        seed: 42,
        ..TrainConfig::default()
    };
    let run = || -> Result<(Vec<LossReport>, String, String), String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = TrainOutput {
            dir: dir.path().to_path_buf(),
            stft: stft_cfg,
        };
        let outcome = train_loop(&data, &model, &cfg, Some(&out)).map_err(|e| e.to_string())?;
        let ckpt = fs::read(out.checkpoint_path(10)).map_err(|e| e.to_string())?;
        let curve = fs::read_to_string(out.loss_curve_path()).map_err(|e| e.to_string())?;
        Ok((outcome.curve, format!("{:x}", Sha256::digest(&ckpt)), curve))
    };
    let (curve_a, hash_a, csv_a) = run()?;
    let (curve_b, hash_b, csv_b) = run()?;
    check(
        curve_a == curve_b && csv_a == csv_b && hash_a == hash_b && curve_a.len() == 10,
        format!("10 identical loss reports, checkpoint sha256 {}", &hash_a[..16]),
        format!("curves equal={}, checkpoint hashes {hash_a} vs {hash_b}", curve_a == curve_b),
    )
}

/// `P(|T| < t)` for Student's t with integer `dof`, by the closed-form finite
/// series in `theta = atan(t / sqrt(dof))`.
fn t_two_sided_mass(t: f64, dof: u32) -> f64 {
    let theta = (t / (dof as f64).sqrt()).atan();
    let (s, c) = theta.sin_cos();
    if dof % 2 == 1 {
        let mut sum = 0.0;
        let mut term = c;
        let mut k = 1;
        while k + 2 <= dof {
            sum += term;
            // next coefficient multiplies by (k + 1) / (k + 2)
            term *= c * c * (k + 1) as f64 / (k + 2) as f64;
            k += 2;
        }
        2.0 / PI * (theta + s * sum)
    } else {
        let mut sum = 0.0;
        let mut term = 1.0;
        let mut k = 0;
        while k + 2 <= dof {
            sum += term;
            term *= c * c * (k + 1) as f64 / (k + 2) as f64;
            k += 2;
        }
        s * sum
    }
}

fn t_oracle(dof: u32) -> f64 {
    let (mut lo, mut hi) = (0.0, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_two_sided_mass(mid, dof) < 0.95 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_9_survey_stats() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..60);
        let ratings: Vec<i64> = (0..n).map(|_| rng.random_range(1..=5)).collect();
        let stats = survey_stats(&ratings).map_err(|e| e.to_string())?;
        let mean = ratings.iter().sum::<i64>() as f64 / n as f64;
        let var = ratings.iter().map(|r| (*r as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let hw = t_oracle(n as u32 - 1) * var.sqrt() / (n as f64).sqrt();
        worst = worst.max((stats.mean - mean).abs()).max((stats.half_width - hw).abs());
        let expect = format!("{mean:.2}±{hw:.3}");
        if stats.to_string() != expect {
            return Err(format!("formatted {} vs {expect}", stats));
        }
    }
    let table_style = survey_stats(&[1, 5]).unwrap().to_string();
    check(
        worst < 1e-9 && table_style == "3.00±25.412",
        format!("100 lists, max abs error {worst:.1e}, [1,5] -> {table_style}"),
        format!("max abs error {worst:.1e} (< 1e-9), [1,5] -> {table_style}"),
    )
}

fn criterion_10_checkpoint() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = dir.path().join("a.ckpt");
    let b = dir.path().join("b.ckpt");
    let params = ModelParams::init(&ModelConfig::default(), 1).unwrap();
    Checkpoint::new(params, 123, StftConfig::default())
        .save(&a)
        .map_err(|e| e.to_string())?;
    Checkpoint::load(&a).map_err(|e| e.to_string())?.save(&b).map_err(|e| e.to_string())?;
    let (x, y) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    check(
        x == y,
        format!("{} bytes, identical", x.len()),
        format!("files differ ({} vs {} bytes)", x.len(), y.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 stft round trip", criterion_1_round_trip),
        ("2 griffin-lim", criterion_2_griffin_lim),
        ("3 shape suite", criterion_3_shapes),
        ("4 loss exactness", criterion_4_losses),
        ("5 gradient check", criterion_5_gradients),
        ("6 overfit smoke test", criterion_6_overfit),
        ("7 zero-shot transfer", criterion_7_zero_shot),
        ("8 determinism", criterion_8_determinism),
        ("9 survey statistics", criterion_9_survey_stats),
        ("10 checkpoint round trip", criterion_10_checkpoint),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let (mut ran, mut failed) = (0, 0);
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(o.as_str())) {
            continue;
        }
        ran += 1;
        let result = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    // Failures are reported, not fatal, unless strict mode is requested.
    if failed > 0 && std::env::var_os("SINGIT_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
