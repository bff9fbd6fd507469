//! Parameter files: magic, format version, architecture, then every layer's
//! weights (row-major, `fan_in x fan_out`) and biases as little-endian f32.

use std::path::Path;

use ndarray::{Array1, Array2};

use super::mlp::{Architecture, Dense, Mlp};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"RFNN";
const VERSION: u32 = 1;

pub fn to_bytes(net: &Mlp) -> Vec<u8> {
    let arch = net.arch();
    let mut out = MAGIC.to_vec();
    let mut put = |v: u32| out.extend_from_slice(&v.to_le_bytes());
    put(VERSION);
    put(arch.input as u32);
    put(arch.hidden.len() as u32);
    for &h in &arch.hidden {
        put(h as u32);
    }
    put(arch.output as u32);
    for layer in net.layers() {
        for &v in layer.weight.iter().chain(layer.bias.iter()) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.bytes.len() < n {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(4 * n)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Mlp> {
    let mut r = Reader { bytes };
    if r.take(4)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let input = r.u32()? as usize;
    let depth = r.u32()? as usize;
    if depth > 64 {
        return Err(Error::Checkpoint(format!("implausible depth {depth}")));
    }
    let hidden = (0..depth).map(|_| r.u32().map(|h| h as usize)).collect::<Result<Vec<_>>>()?;
    let output = r.u32()? as usize;
    let arch = Architecture::new(input, hidden, output);
    let mut layers = Vec::new();
    for (i, o) in arch.layer_dims() {
        let weight = Array2::from_shape_vec((i, o), r.f32s(i * o)?).expect("shape");
        let bias = Array1::from(r.f32s(o)?);
        layers.push(Dense { weight, bias });
    }
    if !r.bytes.is_empty() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Mlp::from_layers(arch, layers)
}

pub fn save(net: &Mlp, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Mlp> {
    from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
