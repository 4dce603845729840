use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::audio::wav_duration;
use crate::error::{Error, Result};

pub const MANIFEST_EXTENSION: &str = "manifest";
/// Per-directory file whose content names the kind of every utterance below it.
pub const KIND_TAG_FILE: &str = ".kind";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtteranceKind {
    Speech,
    Singing,
    Vocals,
    Instrumental,
}

impl fmt::Display for UtteranceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UtteranceKind::Speech => "speech",
            UtteranceKind::Singing => "singing",
            UtteranceKind::Vocals => "vocals",
            UtteranceKind::Instrumental => "instrumental",
        })
    }
}

impl FromStr for UtteranceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "speech" => Ok(UtteranceKind::Speech),
            "singing" => Ok(UtteranceKind::Singing),
            "vocals" => Ok(UtteranceKind::Vocals),
            "instrumental" => Ok(UtteranceKind::Instrumental),
            other => Err(Error::Validation(format!("unknown utterance kind {other:?}"))),
        }
    }
}

/// One line of a `.manifest` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub speaker_id: String,
    pub utterance_id: String,
    pub kind: UtteranceKind,
    pub path: PathBuf,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks key uniqueness, positive durations and that every path exists.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert((&e.speaker_id, &e.utterance_id, e.kind)) {
                return Err(Error::Validation(format!(
                    "duplicate entry {}/{} ({})",
                    e.speaker_id, e.utterance_id, e.kind
                )));
            }
            if !(e.duration_s > 0.0) {
                return Err(Error::Validation(format!(
                    "{}/{} has non-positive duration {}",
                    e.speaker_id, e.utterance_id, e.duration_s
                )));
            }
            if !e.path.exists() {
                return Err(Error::Validation(format!("{} does not exist", e.path.display())));
            }
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for e in &self.entries {
            let line = serde_json::to_string(e).map_err(|err| Error::io(path, err))?;
            writeln!(out, "{line}").map_err(|err| Error::io(path, err))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(&line)
                .map_err(|e| Error::io(path, format!("line {}: {e}", n + 1)))?;
            entries.push(entry);
        }
        Ok(Self { entries })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestReport {
    pub manifest: Manifest,
    /// Files that were not recognized as audio.
    pub skipped: usize,
}

fn is_audio(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

fn read_kind_tag(dir: &Path) -> Result<Option<UtteranceKind>> {
    let tag = dir.join(KIND_TAG_FILE);
    if !tag.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(&tag).map_err(|e| Error::io(&tag, e))?;
    text.parse()
        .map(Some)
        .map_err(|e| Error::io(&tag, e))
}

/// Builds a manifest from a speaker-per-directory tree.
///
/// Every immediate subdirectory of `root` is a speaker. Audio files anywhere
/// below it become entries; their kind comes from the nearest `.kind` tag file
/// between the file and the speaker directory, else `default_kind`.
pub fn ingest(root: &Path, default_kind: UtteranceKind) -> Result<IngestReport> {
    let top = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut speakers: Vec<PathBuf> = Vec::new();
    let mut skipped = 0;
    for entry in top {
        let path = entry.map_err(|e| Error::io(root, e))?.path();
        if path.is_dir() {
            speakers.push(path);
        } else if path.file_name().is_some_and(|n| n != KIND_TAG_FILE) {
            skipped += 1;
        }
    }
    speakers.sort();

    let mut entries = Vec::new();
    for dir in &speakers {
        let speaker_id = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let walker = WalkDir::new(dir).min_depth(1).sort_by_file_name();
        for item in walker {
            let item = item.map_err(|e| Error::io(dir, e))?;
            let path = item.path();
            if !item.file_type().is_file() || path.file_name().is_some_and(|n| n == KIND_TAG_FILE) {
                continue;
            }
            if !is_audio(path) {
                skipped += 1;
                continue;
            }
            let mut kind = None;
            let mut cur = path.parent();
            while let Some(d) = cur {
                if let Some(k) = read_kind_tag(d)? {
                    kind = Some(k);
                    break;
                }
                if d == dir.as_path() {
                    break;
                }
                cur = d.parent();
            }
            let rel = path.strip_prefix(dir).unwrap_or(path).with_extension("");
            let utterance_id = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            entries.push(ManifestEntry {
                speaker_id: speaker_id.clone(),
                utterance_id,
                kind: kind.unwrap_or(default_kind),
                path: path.to_path_buf(),
                duration_s: wav_duration(path)?,
            });
        }
    }
    if skipped > 0 {
        warn!("skipped {skipped} non-audio files under {}", root.display());
    }
    if entries.is_empty() {
        return Err(Error::Validation(format!("no audio files found under {}", root.display())));
    }
    Ok(IngestReport {
        manifest: Manifest::new(entries),
        skipped,
    })
}
