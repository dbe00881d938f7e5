//! Versioned little-endian model files.
//!
//! Layout: magic, version, `A`, `m`, `n`, `α`, anchors (`A·m` f64), `Z` in
//! CSC form (`n+1` column pointers as u64, then anchor indices as u32 and
//! weights as f64), degrees (`n` f64), core inverse (`A·A` f64, row-major).

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::{AnchorWeights, EmrModel};
use crate::data::FeatureDataset;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PIREMR\0\0";
const VERSION: u32 = 1;

pub fn save_model(path: impl AsRef<Path>, model: &EmrModel) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    encode(&mut buf, model);
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&buf).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads a model; when `ds` is given its shape must match the model.
pub fn load_model(path: impl AsRef<Path>, ds: Option<&FeatureDataset>) -> Result<EmrModel> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let model = decode(&bytes)?;
    if let Some(ds) = ds {
        model.check_dataset(ds)?;
    }
    Ok(model)
}

fn encode(out: &mut Vec<u8>, model: &EmrModel) {
    let put_f64 = |out: &mut Vec<u8>, v: f64| out.extend_from_slice(&v.to_le_bytes());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [model.anchor_count, model.dim, model.len()] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    put_f64(out, model.alpha);
    model.anchors.iter().for_each(|&v| put_f64(out, v));
    for &p in &model.weights.col_ptr {
        out.extend_from_slice(&(p as u64).to_le_bytes());
    }
    for &a in &model.weights.anchor {
        out.extend_from_slice(&(a as u32).to_le_bytes());
    }
    model.weights.weight.iter().for_each(|&v| put_f64(out, v));
    model.degree.iter().for_each(|&v| put_f64(out, v));
    let a = model.anchor_count;
    for r in 0..a {
        for c in 0..a {
            put_f64(out, model.core_inverse[(r, c)]);
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, len: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("truncated model file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Format(format!("size {v} too large")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        (0..count).map(|_| self.f64()).collect()
    }
}

fn decode(bytes: &[u8]) -> Result<EmrModel> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(MAGIC.len())? != MAGIC {
        return Err(Error::Format("bad magic; not a model file".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported model version {version}")));
    }
    let a = c.usize()?;
    let dim = c.usize()?;
    let n = c.usize()?;
    let alpha = c.f64()?;
    let anchors = c.f64s(a.checked_mul(dim).ok_or_else(|| Error::Format("overflow".into()))?)?;
    let col_ptr = (0..=n).map(|_| c.usize()).collect::<Result<Vec<_>>>()?;
    if col_ptr[0] != 0 || col_ptr.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Format("corrupt column pointers".into()));
    }
    let nnz = col_ptr[n];
    let anchor = (0..nnz)
        .map(|_| c.u32().map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    if anchor.iter().any(|&k| k >= a) {
        return Err(Error::Format("anchor index out of range".into()));
    }
    let weight = c.f64s(nnz)?;
    let degree = c.f64s(n)?;
    let core = c.f64s(a * a)?;
    if c.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after model".into()));
    }
    Ok(EmrModel::from_parts(
        anchors,
        a,
        dim,
        AnchorWeights {
            col_ptr,
            anchor,
            weight,
        },
        degree,
        DMatrix::from_row_slice(a, a, &core),
        alpha,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RetrievalConfig;
    use crate::emr::build_emr_model;
    use crate::emr::tests::blob;

    #[test]
    fn round_trip_is_exact() {
        let ds = blob(70, 3, 5);
        let cfg = RetrievalConfig {
            anchor_count: 9,
            nearest_anchors: 3,
            ..RetrievalConfig::default()
        };
        let model = build_emr_model(&ds, &cfg, 2).unwrap();
        let mut buf = Vec::new();
        encode(&mut buf, &model);
        let back = decode(&buf).unwrap();
        assert_eq!(back, model);

        let mut again = Vec::new();
        encode(&mut again, &back);
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_mismatch_and_corruption() {
        let ds = blob(30, 2, 5);
        let cfg = RetrievalConfig {
            anchor_count: 5,
            nearest_anchors: 2,
            ..RetrievalConfig::default()
        };
        let model = build_emr_model(&ds, &cfg, 2).unwrap();
        let mut buf = Vec::new();
        encode(&mut buf, &model);
        assert!(decode(&buf[..buf.len() - 1]).is_err());
        assert!(decode(b"garbage!").is_err());

        let other = blob(31, 2, 5);
        let m = decode(&buf).unwrap();
        assert!(matches!(m.check_dataset(&other), Err(Error::ModelMismatch(_))));
        let wide = blob(30, 3, 5);
        assert!(m.check_dataset(&wide).is_err());
    }
}
