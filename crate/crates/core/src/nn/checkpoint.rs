//! Binary checkpoint format.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic        8 bytes  "NEUREROS"
//! version      u32      currently 1
//! dtype        u8       4 = f32, 8 = f64
//! arch_len     u32      length of the architecture JSON
//! arch         bytes    serde_json of `Architecture`
//! n_entries    u32
//! entries      n_entries times:
//!   path_len   u32, path (UTF-8)
//!   kind       u8       embedding=0 conv=1 dense=2 attention=3 ffn=4
//!   block      u32      u32::MAX when the entry has no block
//!   relu_units u32      u32::MAX when absent
//!   weight     tensor
//!   has_bias   u8       0 or 1, followed by a tensor when 1
//! tensor:      ndim u32, ndim × u64 dims, row-major values in dtype
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::model::{Architecture, Model};
use crate::nn::params::{LayerKind, ParamEntry, ParamTree};
use crate::tensor::{DType, Real, Tensor};

pub const MAGIC: &[u8; 8] = b"NEUREROS";
pub const VERSION: u32 = 1;
const NONE: u32 = u32::MAX;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_tensor<F: Real>(out: &mut Vec<u8>, t: &Tensor<F>) {
    put_u32(out, t.shape().len() as u32);
    for &d in t.shape() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in t.data() {
        v.write_le(out);
    }
}

fn opt_u32(v: Option<usize>) -> Result<u32> {
    match v {
        None => Ok(NONE),
        Some(x) if x < NONE as usize => Ok(x as u32),
        Some(x) => Err(Error::Format(format!("value {x} too large for checkpoint"))),
    }
}

pub fn encode_model<F: Real>(model: &Model<F>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    out.push(F::DTYPE.code());
    let arch = serde_json::to_vec(&model.arch)?;
    put_u32(&mut out, arch.len() as u32);
    out.extend_from_slice(&arch);
    put_u32(&mut out, model.params.len() as u32);
    for e in model.params.iter() {
        put_u32(&mut out, e.path().len() as u32);
        out.extend_from_slice(e.path().as_bytes());
        out.push(e.kind().code());
        put_u32(&mut out, opt_u32(e.block())?);
        put_u32(&mut out, opt_u32(e.relu_units())?);
        put_tensor(&mut out, &e.weight);
        match &e.bias {
            Some(b) => {
                out.push(1);
                put_tensor(&mut out, b);
            }
            None => out.push(0),
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("truncated checkpoint".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn opt(&mut self) -> Result<Option<usize>> {
        let v = self.u32()?;
        Ok((v != NONE).then_some(v as usize))
    }

    fn tensor<F: Real>(&mut self) -> Result<Tensor<F>> {
        let ndim = self.u32()? as usize;
        let shape = (0..ndim)
            .map(|_| self.u64().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let numel = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Format("tensor too large".into()))?;
        let width = F::DTYPE.code() as usize;
        let raw = self.take(
            numel
                .checked_mul(width)
                .ok_or_else(|| Error::Format("tensor too large".into()))?,
        )?;
        let data = raw.chunks_exact(width).map(F::read_le).collect();
        Tensor::new(shape, data)
    }
}

pub fn decode_model<F: Real>(bytes: &[u8]) -> Result<Model<F>> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Format("not a checkpoint (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let dtype = DType::from_code(r.u8()?).ok_or_else(|| Error::Format("unknown dtype".into()))?;
    if dtype != F::DTYPE {
        return Err(Error::Format(format!(
            "checkpoint stores {dtype:?}, requested {:?}",
            F::DTYPE
        )));
    }
    let arch_len = r.u32()? as usize;
    let arch: Architecture = serde_json::from_slice(r.take(arch_len)?)?;
    let n = r.u32()? as usize;
    let mut entries = Vec::with_capacity(n.min(1024));
    for _ in 0..n {
        let len = r.u32()? as usize;
        let path = std::str::from_utf8(r.take(len)?)
            .map_err(|_| Error::Format("path is not UTF-8".into()))?
            .to_owned();
        let kind = LayerKind::from_code(r.u8()?).ok_or_else(|| Error::Format("unknown layer kind".into()))?;
        let block = r.opt()?;
        let relu_units = r.opt()?;
        let weight = r.tensor()?;
        let bias = match r.u8()? {
            0 => None,
            1 => Some(r.tensor()?),
            _ => return Err(Error::Format("bad bias flag".into())),
        };
        let mut entry = ParamEntry::new(path, kind, block, weight, bias);
        if let Some(u) = relu_units {
            entry = entry.with_relu_units(u);
        }
        entries.push(entry);
    }
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after checkpoint".into()));
    }
    Ok(Model::new(arch, ParamTree::new(entries)?))
}

pub fn save_model<F: Real>(model: &Model<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_model(model)?;
    std::fs::write(path, bytes).map_err(|e| Error::from(e).at_path(path))
}

pub fn load_model<F: Real>(path: impl AsRef<Path>) -> Result<Model<F>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::from(e).at_path(path))?;
    decode_model(&bytes).map_err(|e| e.at_path(path))
}
