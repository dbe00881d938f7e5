use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{FeatureDataset, LabelMatrix};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PIRDSET\0";
const VERSION: u32 = 1;
const LABEL_PREFIX: &str = "label_";

/// On-disk dataset layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    /// Header row; `item_id`, feature columns, then optional `label_*` columns.
    Csv,
    /// Little-endian, versioned, bit-exact.
    Binary,
}

impl DatasetFormat {
    /// Guesses the format from the file extension (`.csv` or anything else).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Binary,
        }
    }
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    format: DatasetFormat,
) -> Result<(FeatureDataset, Option<LabelMatrix>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        DatasetFormat::Csv => read_csv(BufReader::new(file)),
        DatasetFormat::Binary => read_binary(BufReader::new(file), path),
    }
}

pub fn save_dataset(
    path: impl AsRef<Path>,
    format: DatasetFormat,
    ds: &FeatureDataset,
    labels: Option<&LabelMatrix>,
) -> Result<()> {
    let path = path.as_ref();
    if let Some(l) = labels {
        if l.rows() != ds.len() {
            return Err(Error::Dimension {
                expected: ds.len(),
                actual: l.rows(),
            });
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        DatasetFormat::Csv => write_csv(&mut w, ds, labels).map_err(|e| Error::io(path, e))?,
        DatasetFormat::Binary => write_binary(&mut w, ds, labels).map_err(|e| Error::io(path, e))?,
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// SHA-256 of a file's bytes, hex encoded.
pub fn fingerprint_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let read = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if read == 0 {
            break;
        }
        hasher.update(&buf[..read]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn read_csv<R: Read>(reader: R) -> Result<(FeatureDataset, Option<LabelMatrix>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.len() < 2 {
        return Err(Error::Parse {
            row: 1,
            message: "header needs an id column and at least one feature column".into(),
        });
    }
    let first_label = headers
        .iter()
        .position(|h| h.starts_with(LABEL_PREFIX))
        .unwrap_or(headers.len());
    if first_label < 2 {
        return Err(Error::Parse {
            row: 1,
            message: "no feature columns before label columns".into(),
        });
    }
    if let Some(bad) = headers.iter().skip(first_label).find(|h| !h.starts_with(LABEL_PREFIX)) {
        return Err(Error::Parse {
            row: 1,
            message: format!("column {bad:?} follows label columns"),
        });
    }
    let dim = first_label - 1;
    let label_names: Vec<String> = headers.iter().skip(first_label).map(str::to_owned).collect();

    let mut ids = Vec::new();
    let mut features = Vec::new();
    let mut bits = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(ids.len() + 2, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} columns, found {}", headers.len(), record.len()),
            });
        }
        ids.push(record[0].to_owned());
        for (c, field) in record.iter().enumerate().take(first_label).skip(1) {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                message: format!("column {c}: {field:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("column {c}: non-finite value {field:?}"),
                });
            }
            features.push(v);
        }
        for field in record.iter().skip(first_label) {
            bits.push(match field {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        row,
                        message: format!("label value {other:?} is not 0 or 1"),
                    })
                }
            });
        }
    }
    let rows = ids.len();
    let ds = FeatureDataset::new(ids, features, dim)?;
    let labels = if label_names.is_empty() {
        None
    } else {
        Some(LabelMatrix::new(label_names, bits, rows)?)
    };
    Ok((ds, labels))
}

fn write_csv<W: Write>(
    w: &mut W,
    ds: &FeatureDataset,
    labels: Option<&LabelMatrix>,
) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["item_id".to_owned()];
    header.extend((0..ds.dim()).map(|c| format!("f{c}")));
    if let Some(l) = labels {
        // Names without the prefix would read back as features.
        header.extend(l.names().iter().map(|n| {
            if n.starts_with(LABEL_PREFIX) {
                n.clone()
            } else {
                format!("{LABEL_PREFIX}{n}")
            }
        }));
    }
    wtr.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec = vec![ds.id(i).to_owned()];
        // `Display` for f64 prints the shortest string that parses back exactly.
        rec.extend(ds.row(i).iter().map(|v| v.to_string()));
        if let Some(l) = labels {
            rec.extend(l.row(i).iter().map(|&b| if b { "1" } else { "0" }.to_owned()));
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()
}

fn write_binary<W: Write>(
    w: &mut W,
    ds: &FeatureDataset,
    labels: Option<&LabelMatrix>,
) -> std::io::Result<()> {
    let classes = labels.map_or(0, LabelMatrix::classes);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [ds.len(), ds.dim(), classes] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for id in ds.ids() {
        w.write_all(&(id.len() as u32).to_le_bytes())?;
        w.write_all(id.as_bytes())?;
    }
    if let Some(l) = labels {
        for name in l.names() {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
        }
    }
    for v in ds.features() {
        w.write_all(&v.to_le_bytes())?;
    }
    if let Some(l) = labels {
        let stride = classes.div_ceil(8);
        let mut packed = vec![0u8; stride];
        for i in 0..l.rows() {
            packed.fill(0);
            for (c, &b) in l.row(i).iter().enumerate() {
                if b {
                    packed[c / 8] |= 1 << (c % 8);
                }
            }
            w.write_all(&packed)?;
        }
    }
    Ok(())
}

struct ByteReader<'a, R> {
    inner: R,
    path: &'a Path,
}

impl<R: Read> ByteReader<'_, R> {
    fn bytes(&mut self, len: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; len];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Format("truncated dataset file".into()),
            _ => Error::io(self.path, e),
        })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.bytes(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Format(format!("size {v} does not fit in memory")))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.bytes(len)?).map_err(|_| Error::Format("invalid utf-8 string".into()))
    }
}

fn read_binary<R: Read>(reader: R, path: &Path) -> Result<(FeatureDataset, Option<LabelMatrix>)> {
    let mut r = ByteReader { inner: reader, path };
    if r.bytes(MAGIC.len())? != MAGIC {
        return Err(Error::Format("bad magic; not a dataset file".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported dataset version {version}")));
    }
    let n = r.u64()?;
    let dim = r.u64()?;
    let classes = r.u64()?;
    let ids = (0..n).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
    let names = (0..classes).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
    let raw = r.bytes(n * dim * 8)?;
    let features = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let ds = FeatureDataset::new(ids, features, dim)?;
    let labels = if classes == 0 {
        None
    } else {
        let stride = classes.div_ceil(8);
        let packed = r.bytes(n * stride)?;
        let bits = packed
            .chunks_exact(stride)
            .flat_map(|row| (0..classes).map(move |c| row[c / 8] & (1 << (c % 8)) != 0))
            .collect();
        Some(LabelMatrix::new(names, bits, n)?)
    };
    Ok((ds, labels))
}
