use ndarray::{Array2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stft::{weighted_frobenius, StftProcessor};
use super::{MagnitudeSpectrogram, Waveform};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhaseInit {
    /// Uniform phases in `[0, 2pi)` drawn from a seeded generator.
    #[default]
    Random,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GriffinLimOptions {
    pub iters: usize,
    pub seed: u64,
    pub init: PhaseInit,
    /// Output length in samples; defaults to `(frames - 1) * hop`.
    #[serde(skip)]
    pub length: Option<usize>,
}

impl Default for GriffinLimOptions {
    fn default() -> Self {
        Self {
            iters: 60,
            seed: 0,
            init: PhaseInit::Random,
            length: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GriffinLimOutput {
    pub waveform: Waveform,
    /// `|| |stft(x_k)| - M ||` for `k = 0..=iters`, where `x_0` is the
    /// synthesis from the initial phase. Norms count the full two-sided spectrum.
    pub objective: Vec<f64>,
    /// `objective` divided by the norm of the target magnitude.
    pub spectral_convergence: Vec<f64>,
}

/// Griffin-Lim reconstruction with a seeded random initial phase.
pub fn griffin_lim(m: &MagnitudeSpectrogram, iters: usize, seed: u64) -> Result<Waveform> {
    let opts = GriffinLimOptions {
        iters,
        seed,
        ..GriffinLimOptions::default()
    };
    Ok(griffin_lim_with(m, &opts)?.waveform)
}

/// Plain alternating projection between the set of spectrograms with
/// magnitude `M` and the set of consistent STFTs.
pub fn griffin_lim_with(m: &MagnitudeSpectrogram, opts: &GriffinLimOptions) -> Result<GriffinLimOutput> {
    if opts.iters == 0 {
        return Err(Error::Validation("griffin-lim needs at least one iteration".into()));
    }
    let cfg = m.config();
    let proc = StftProcessor::new(cfg)?;
    let target = m.values();
    let frames = target.ncols();
    if frames == 0 {
        return Err(Error::Degenerate("magnitude has no frames".into()));
    }
    let length = opts.length.unwrap_or((frames - 1) * cfg.hop);
    let max = cfg.max_length_for(frames);
    if length > max {
        return Err(Error::Validation(format!(
            "requested {length} samples but {frames} frames synthesize at most {max}"
        )));
    }

    let mut spec: Array2<Complex64> = match opts.init {
        PhaseInit::Zero => target.mapv(|v| Complex64::new(v, 0.0)),
        PhaseInit::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            // column-major draw order keeps the phase field independent of layout
            let mut phase = Array2::<f64>::zeros(target.raw_dim());
            for t in 0..frames {
                for k in 0..target.nrows() {
                    phase[[k, t]] = rng.random_range(0.0..std::f64::consts::TAU);
                }
            }
            Zip::from(target)
                .and(&phase)
                .map_collect(|v, p| Complex64::from_polar(*v, *p))
        }
    };

    let target_norm = weighted_frobenius(target.view(), cfg.n_fft);
    let mut objective = Vec::with_capacity(opts.iters + 1);
    let mut samples = proc.synthesize(spec.view(), length);
    for k in 0..=opts.iters {
        let rebuilt = proc.analyze(&samples);
        let rebuilt = rebuilt.slice(ndarray::s![.., ..frames]);
        let diff = Zip::from(&rebuilt).and(target).map_collect(|c, v| c.norm() - v);
        objective.push(weighted_frobenius(diff.view(), cfg.n_fft));
        if k == opts.iters {
            break;
        }
        Zip::from(&mut spec).and(&rebuilt).and(target).for_each(|s, c, v| {
            let n = c.norm();
            *s = if n > 0.0 {
                c * (*v / n)
            } else {
                Complex64::new(*v, 0.0)
            };
        });
        samples = proc.synthesize(spec.view(), length);
    }

    let spectral_convergence = objective
        .iter()
        .map(|o| if target_norm > 0.0 { o / target_norm } else { *o })
        .collect();
    Ok(GriffinLimOutput {
        waveform: Waveform::new(samples, cfg.sample_rate)?.limit_peak(),
        objective,
        spectral_convergence,
    })
}
