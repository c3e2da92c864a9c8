//! Binary checkpoint format for model parameters.
//!
//! Layout (little endian): magic `GEDCKPT\0`, `u32` version, `u32` length of
//! the JSON model configuration followed by its bytes, `u32` tensor count,
//! then per tensor `u32` name length, name bytes, `u32` rows, `u32` cols and
//! `rows * cols` `f64` values in row-major order. Saving and loading is
//! bit-exact.

use std::io::{Read, Write};
use std::path::Path;

use crate::encoder::{ModelConfig, ModelParams, Weights};
use crate::error::{GedError, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 8] = b"GEDCKPT\0";
pub const VERSION: u32 = 1;

fn write_u32<W: Write>(w: &mut W, x: u32) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|e| GedError::Checkpoint(format!("truncated: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

fn read_bytes<R: Read>(r: &mut R, len: usize) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)
        .map_err(|e| GedError::Checkpoint(format!("truncated: {e}")))?;
    Ok(buf)
}

fn len_u32(len: usize, what: &str) -> Result<u32> {
    u32::try_from(len).map_err(|_| GedError::Checkpoint(format!("{what} too large")))
}

pub fn write_checkpoint<W: Write>(mut w: W, params: &ModelParams) -> Result<()> {
    w.write_all(MAGIC)?;
    write_u32(&mut w, VERSION)?;
    let config = serde_json::to_vec(&params.config)?;
    write_u32(&mut w, len_u32(config.len(), "config")?)?;
    w.write_all(&config)?;
    let named = params.weights.named();
    write_u32(&mut w, len_u32(named.len(), "tensor count")?)?;
    for (name, t) in named {
        write_u32(&mut w, len_u32(name.len(), "name")?)?;
        w.write_all(name.as_bytes())?;
        write_u32(&mut w, len_u32(t.rows(), "rows")?)?;
        write_u32(&mut w, len_u32(t.cols(), "cols")?)?;
        for x in t.data() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<ModelParams> {
    let magic = read_bytes(&mut r, MAGIC.len())?;
    if magic != MAGIC {
        return Err(GedError::Checkpoint(
            "not a checkpoint file (bad magic)".into(),
        ));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(GedError::Checkpoint(format!(
            "version {version} is not supported (expected {VERSION})"
        )));
    }
    let config_len = read_u32(&mut r)? as usize;
    let config: ModelConfig = serde_json::from_slice(&read_bytes(&mut r, config_len)?)
        .map_err(|e| GedError::Checkpoint(format!("model configuration: {e}")))?;
    let template = ModelParams::init(config, 0);
    let expected = template.weights.named();
    let count = read_u32(&mut r)? as usize;
    if count != expected.len() {
        return Err(GedError::Checkpoint(format!(
            "{count} tensors, expected {}",
            expected.len()
        )));
    }
    let mut tensors = Vec::with_capacity(count);
    for (want_name, want) in expected {
        let name_len = read_u32(&mut r)? as usize;
        let name = String::from_utf8(read_bytes(&mut r, name_len)?)
            .map_err(|_| GedError::Checkpoint("tensor name is not UTF-8".into()))?;
        let (rows, cols) = (read_u32(&mut r)? as usize, read_u32(&mut r)? as usize);
        if name != want_name || (rows, cols) != want.shape() {
            return Err(GedError::Checkpoint(format!(
                "tensor `{name}` {rows}x{cols} does not match `{want_name}` {:?}",
                want.shape()
            )));
        }
        let raw = read_bytes(&mut r, rows * cols * 8)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        tensors.push(Matrix::from_vec(rows, cols, data));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(GedError::Checkpoint(
            "trailing bytes after the last tensor".into(),
        ));
    }
    Ok(ModelParams {
        config,
        weights: Weights::from_tensors(&template.weights, tensors)?,
    })
}

pub fn save(path: &Path, params: &ModelParams) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, params)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ModelParams> {
    read_checkpoint(std::io::BufReader::new(std::fs::File::open(path)?))
}
