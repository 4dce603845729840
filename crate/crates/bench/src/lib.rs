//! Deterministic fixtures shared by the benchmarks.

use std::f64::consts::PI;

use singit_core::model::ModelConfig;
use singit_core::Waveform;

/// Harmonic tone with a slow vibrato, `secs` long at 16 kHz.
pub fn voiced(secs: f64, f0: f64) -> Waveform {
    let n = (secs * 16_000.0) as usize;
    let mut phase = 0.0;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / 16_000.0;
            phase += 2.0 * PI * f0 * (1.0 + 0.03 * (2.0 * PI * 5.0 * t).sin()) / 16_000.0;
            (1..12).map(|h| (h as f64 * phase).sin() / h as f64).sum::<f64>() * 0.15
        })
        .collect();
    Waveform::new(samples, 16_000).expect("finite samples")
}

/// Narrower layers than the default so a training step takes milliseconds.
pub fn small_model() -> ModelConfig {
    ModelConfig {
        conv_channels: 32,
        enc_lstm_hidden: 8,
        dec_lstm_hidden: 32,
        ..ModelConfig::default()
    }
}
