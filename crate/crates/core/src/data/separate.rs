//! External two-stem separator adapter.
//!
//! The command template in `SINGIT_SEPARATOR_CMD` is run through `sh -c` with
//! `{input}` and `{outdir}` replaced by shell-quoted paths. On exit status 0 it
//! must have written `vocals.wav` and `accompaniment.wav` into `{outdir}`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use log::debug;

use super::audio::load_audio;
use crate::dsp::Waveform;
use crate::error::{Error, Result};

pub const SEPARATOR_ENV: &str = "SINGIT_SEPARATOR_CMD";
pub const VOCALS_STEM: &str = "vocals.wav";
pub const ACCOMPANIMENT_STEM: &str = "accompaniment.wav";
/// Largest tolerated length difference between the two stems, in samples.
pub const STEM_LENGTH_TOLERANCE: usize = 160;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatorAdapter {
    template: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stems {
    pub vocals: Waveform,
    pub instrumental: Waveform,
}

impl SeparatorAdapter {
    pub fn new(template: impl Into<String>) -> Result<Self> {
        let template = template.into();
        if template.trim().is_empty() {
            return Err(Error::Config("separator command is empty".into()));
        }
        if !template.contains("{input}") || !template.contains("{outdir}") {
            return Err(Error::Config(format!(
                "separator command must contain {{input}} and {{outdir}}: {template:?}"
            )));
        }
        Ok(Self { template })
    }

    /// Reads the template from the environment.
    pub fn from_env() -> Result<Self> {
        match std::env::var(SEPARATOR_ENV) {
            Ok(t) if !t.trim().is_empty() => Self::new(t),
            _ => Err(Error::Config(format!("{SEPARATOR_ENV} is not set"))),
        }
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn command_line(&self, input: &Path, outdir: &Path) -> String {
        self.template
            .replace("{input}", &shell_quote(input))
            .replace("{outdir}", &shell_quote(outdir))
    }

    /// Separates `song` into stems written under `outdir`. Calls sharing an
    /// output directory are serialized.
    pub fn separate_into(&self, song: &Path, outdir: &Path) -> Result<Stems> {
        if !song.is_file() {
            return Err(Error::io(song, "song file not found"));
        }
        fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
        let lock = outdir_lock(outdir);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());

        let cmd = self.command_line(song, outdir);
        debug!("running separator: {cmd}");
        let output = Command::new("sh")
            .arg("-c")
            .arg(&cmd)
            .output()
            .map_err(|e| Error::Adapter(format!("could not launch `{cmd}`: {e}")))?;
        if !output.status.success() {
            return Err(Error::Adapter(format!(
                "`{cmd}` exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let vocals_path = outdir.join(VOCALS_STEM);
        let acc_path = outdir.join(ACCOMPANIMENT_STEM);
        for p in [&vocals_path, &acc_path] {
            if !p.is_file() {
                return Err(Error::Adapter(format!("separator did not produce {}", p.display())));
            }
        }
        let vocals = load_audio(&vocals_path)?;
        let instrumental = load_audio(&acc_path)?;
        if vocals.len().abs_diff(instrumental.len()) > STEM_LENGTH_TOLERANCE {
            return Err(Error::Adapter(format!(
                "stem lengths differ by more than {STEM_LENGTH_TOLERANCE} samples ({} vs {})",
                vocals.len(),
                instrumental.len()
            )));
        }
        Ok(Stems { vocals, instrumental })
    }

    /// Separates into a scratch directory that is removed afterwards.
    pub fn separate(&self, song: &Path) -> Result<Stems> {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let dir = std::env::temp_dir().join(format!(
            "singit-stems-{}-{}",
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let result = self.separate_into(song, &dir);
        let _ = fs::remove_dir_all(&dir);
        result
    }
}

/// Separates with the adapter configured in the environment.
pub fn separate(song: &Path) -> Result<Stems> {
    SeparatorAdapter::from_env()?.separate(song)
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.to_string_lossy().replace('\'', r"'\''"))
}

fn outdir_lock(dir: &Path) -> Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>> = OnceLock::new();
    let key = fs::canonicalize(dir).unwrap_or_else(|_| dir.to_path_buf());
    let mut map = LOCKS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|p| p.into_inner());
    map.entry(key).or_default().clone()
}
