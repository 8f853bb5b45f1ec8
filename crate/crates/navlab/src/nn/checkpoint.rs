//! Versioned binary checkpoints: magic, format version, architecture
//! tag, then named tensors as little-endian f64. Round-trips are
//! bit-exact.

use super::network::TensorSet;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

const MAGIC: &[u8; 8] = b"NAVLABCK";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint format version {0}")]
    BadVersion(u32),
    #[error("checkpoint is truncated or corrupt: {0}")]
    Corrupt(String),
    #[error("checkpoint has no tensor named {0:?}")]
    MissingTensor(String),
    #[error("tensor {name:?} has shape {found:?}, expected {expected:?}")]
    ShapeMismatch {
        name: String,
        found: Vec<usize>,
        expected: Vec<usize>,
    },
}

/// An in-memory checkpoint: architecture tag, hidden width and a flat
/// list of named tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub arch: String,
    pub hidden: u32,
    tensors: Vec<(String, Vec<usize>, Vec<f64>)>,
}

impl Checkpoint {
    pub fn new(arch: &str, hidden: usize) -> Self {
        Self {
            arch: arch.to_string(),
            hidden: hidden as u32,
            tensors: Vec::new(),
        }
    }

    /// Store every tensor of `set` under `prefix.`.
    pub fn push(&mut self, prefix: &str, set: &impl TensorSet) {
        for (name, dims, data) in set.tensors() {
            self.tensors
                .push((format!("{prefix}.{name}"), dims, data.to_vec()));
        }
    }

    /// Copy tensors stored under `prefix.` back into `set`, validating
    /// names and shapes.
    pub fn read_into(&self, prefix: &str, set: &mut impl TensorSet) -> Result<(), CheckpointError> {
        for (name, dims, data) in set.tensors_mut() {
            let full = format!("{prefix}.{name}");
            let (_, found_dims, found) = self
                .tensors
                .iter()
                .find(|(n, _, _)| *n == full)
                .ok_or_else(|| CheckpointError::MissingTensor(full.clone()))?;
            if *found_dims != dims {
                return Err(CheckpointError::ShapeMismatch {
                    name: full,
                    found: found_dims.clone(),
                    expected: dims,
                });
            }
            data.copy_from_slice(found);
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        write_string(&mut buf, &self.arch);
        buf.extend_from_slice(&self.hidden.to_le_bytes());
        buf.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, dims, data) in &self.tensors {
            write_string(&mut buf, name);
            buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
            for &d in dims {
                buf.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for &v in data {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cur = Cursor {
            bytes: &bytes,
            pos: 0,
        };
        let magic = cur.take(8)?;
        if magic != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = cur.u32()?;
        if version != FORMAT_VERSION {
            return Err(CheckpointError::BadVersion(version));
        }
        let arch = cur.string()?;
        let hidden = cur.u32()?;
        let count = cur.u32()? as usize;
        let mut tensors = Vec::with_capacity(count);
        for _ in 0..count {
            let name = cur.string()?;
            let ndim = cur.u32()? as usize;
            let mut dims = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                dims.push(cur.u32()? as usize);
            }
            let len: usize = dims.iter().product();
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                data.push(cur.f64()?);
            }
            tensors.push((name, dims, data));
        }
        Ok(Self {
            arch,
            hidden,
            tensors,
        })
    }
}

fn write_string(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.bytes.len() {
            return Err(CheckpointError::Corrupt(format!(
                "need {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes([
            b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7],
        ]))
    }

    fn string(&mut self) -> Result<String, CheckpointError> {
        let len = self.u32()? as usize;
        let b = self.take(len)?;
        String::from_utf8(b.to_vec())
            .map_err(|_| CheckpointError::Corrupt("non-utf8 string".into()))
    }
}
