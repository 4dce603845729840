use super::{LogSpectrogram, MagnitudeSpectrogram};
use crate::error::{Error, Result};

/// Magnitudes below this are clamped before taking the logarithm (-100 dB).
pub const MAG_FLOOR: f64 = 1e-5;
pub const DB_OFFSET: f64 = 100.0;
pub const DB_RANGE: f64 = 100.0;

/// `clip((20 log10(max(m, floor)) + 100) / 100, 0, 1)` entrywise.
pub fn mag_to_log(m: &MagnitudeSpectrogram) -> LogSpectrogram {
    let values = m.values().mapv(|v| {
        let db = 20.0 * v.max(MAG_FLOOR).log10();
        ((db + DB_OFFSET) / DB_RANGE).clamp(0.0, 1.0)
    });
    LogSpectrogram::new(values, *m.config()).expect("mapped values are in [0, 1]")
}

/// Inverse of [`mag_to_log`] on its unclipped range.
pub fn log_to_mag(x: &LogSpectrogram) -> Result<MagnitudeSpectrogram> {
    if let Some(v) = x.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Validation(format!("log-spectrogram entry {v} outside [0, 1]")));
    }
    let values = x
        .values()
        .mapv(|v| 10f64.powf((DB_RANGE * v - DB_OFFSET) / 20.0));
    MagnitudeSpectrogram::new(values, *x.config())
}
