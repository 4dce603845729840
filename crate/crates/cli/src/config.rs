//! Layered settings: command-line flag, then `SINGIT_*` environment
//! variable, then config file, then built-in default.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use singit_core::dsp::{GriffinLimOptions, StftConfig};
use singit_core::model::ModelConfig;
use singit_core::training::TrainConfig;

pub const CONFIG_ENV: &str = "SINGIT_CONFIG";

/// Contents of a TOML config file. Keys mirror the library config field names.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub stft: StftConfig,
    pub griffin_lim: GriffinLimOptions,
    pub separator_cmd: Option<String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// File (explicit path, else `SINGIT_CONFIG`, else none) overlaid with
    /// environment variables.
    pub fn load(explicit: Option<&Path>, env: &dyn Fn(&str) -> Option<String>) -> Result<Self> {
        let mut s = match explicit.map(Path::to_path_buf).or_else(|| env(CONFIG_ENV).map(Into::into)) {
            Some(p) => Self::from_file(&p)?,
            None => Self::default(),
        };
        s.apply_env(env)?;
        Ok(s)
    }

    fn apply_env(&mut self, env: &dyn Fn(&str) -> Option<String>) -> Result<()> {
        let t = &mut self.train;
        set(env, "SINGIT_LAMBDA3", &mut t.lambda3)?;
        set(env, "SINGIT_CROP_FRAMES", &mut t.crop_frames)?;
        set(env, "SINGIT_BATCH_SIZE", &mut t.batch_size)?;
        set(env, "SINGIT_LR", &mut t.lr)?;
        set(env, "SINGIT_MAX_STEPS", &mut t.max_steps)?;
        set(env, "SINGIT_SEED", &mut t.seed)?;
        set(env, "SINGIT_CHECKPOINT_EVERY", &mut t.checkpoint_every)?;
        set(env, "SINGIT_GL_ITERS", &mut self.griffin_lim.iters)?;
        set(env, "SINGIT_GL_SEED", &mut self.griffin_lim.seed)?;
        if let Some(cmd) = env(singit_core::data::SEPARATOR_ENV).filter(|c| !c.trim().is_empty()) {
            self.separator_cmd = Some(cmd);
        }
        Ok(())
    }
}

fn set<T: FromStr>(env: &dyn Fn(&str) -> Option<String>, key: &str, slot: &mut T) -> Result<()>
where
    T::Err: std::fmt::Display,
{
    if let Some(raw) = env(key) {
        match raw.trim().parse() {
            Ok(v) => *slot = v,
            Err(e) => bail!("{key}={raw:?}: {e}"),
        }
    }
    Ok(())
}

/// Overwrites `slot` when the flag was given.
pub fn flag<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

pub fn process_env(key: &str) -> Option<String> {
    std::env::var(key).ok()
}
