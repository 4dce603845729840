//! Checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! b"SINGITCK"  u32 version  u32 header_len  header (TOML, UTF-8)
//! u32 tensor_count
//! repeated: u32 name_len  name  u32 ndim  u64 dims[ndim]  f32 data[prod(dims)]
//! ```
//!
//! Tensors are written in the fixed order of [`ModelParams::tensors`].

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{ModelConfig, ModelParams};
use crate::dsp::StftConfig;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SINGITCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    step: u64,
    model: ModelConfig,
    stft: StftConfig,
}

/// Model parameters together with the metadata needed to use them.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    /// Training steps taken; zero for freshly initialized weights.
    pub step: u64,
    pub stft: StftConfig,
}

impl Checkpoint {
    pub fn new(params: ModelParams, step: u64, stft: StftConfig) -> Self {
        Self { params, step, stft }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            format_version: FORMAT_VERSION,
            step: self.step,
            model: self.params.config,
            stft: self.stft,
        };
        let text = toml::to_string(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(text.len() as u32).to_le_bytes());
        out.extend_from_slice(text.as_bytes());
        let tensors = self.params.tensors();
        out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for t in tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for d in &t.shape {
                out.extend_from_slice(&(*d as u64).to_le_bytes());
            }
            for v in t.data {
                out.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor::new(bytes);
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("not a singit checkpoint".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported format version {version}")));
        }
        let header_len = read_u32(&mut r)? as usize;
        let mut text = vec![0u8; header_len];
        read_exact(&mut r, &mut text)?;
        let text = String::from_utf8(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let header: Header = toml::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        header.stft.validate()?;

        let mut params = ModelParams::init(&header.model, 0)?;
        let count = read_u32(&mut r)? as usize;
        {
            let mut slots = params.tensors_mut();
            if count != slots.len() {
                return Err(Error::Checkpoint(format!(
                    "expected {} tensors for this config, found {count}",
                    slots.len()
                )));
            }
            for slot in slots.iter_mut() {
                let name_len = read_u32(&mut r)? as usize;
                let mut name = vec![0u8; name_len];
                read_exact(&mut r, &mut name)?;
                let name = String::from_utf8(name).map_err(|e| Error::Checkpoint(e.to_string()))?;
                if name != slot.name {
                    return Err(Error::Checkpoint(format!(
                        "expected tensor {}, found {name}",
                        slot.name
                    )));
                }
                let ndim = read_u32(&mut r)? as usize;
                let mut shape = Vec::with_capacity(ndim);
                for _ in 0..ndim {
                    shape.push(read_u64(&mut r)? as usize);
                }
                if shape != slot.shape {
                    return Err(Error::Checkpoint(format!(
                        "tensor {name} has shape {shape:?}, config implies {:?}",
                        slot.shape
                    )));
                }
                for v in slot.data.iter_mut() {
                    let mut b = [0u8; 4];
                    read_exact(&mut r, &mut b)?;
                    *v = f32::from_le_bytes(b) as f64;
                }
            }
        }
        if (r.position() as usize) != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes after last tensor".into()));
        }
        if !params.all_finite() {
            return Err(Error::Checkpoint("checkpoint holds non-finite values".into()));
        }
        Ok(Self {
            params,
            step: header.step,
            stft: header.stft,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Checkpoint(msg) => Error::Checkpoint(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

fn read_exact(r: &mut Cursor<&[u8]>, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Checkpoint("unexpected end of file".into()))
}

fn read_u32(r: &mut Cursor<&[u8]>) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut Cursor<&[u8]>) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
