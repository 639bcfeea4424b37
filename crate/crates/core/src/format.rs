//! On-disk formats: the binary ADIF container, CSV matrices and label files.
//!
//! ADIF layout (all integers little-endian):
//!
//! | offset | size  | field                                            |
//! |--------|-------|--------------------------------------------------|
//! | 0      | 4     | magic `b"ADIF"`                                  |
//! | 4      | 4     | version, `u32` = 1                               |
//! | 8      | 1     | flags; bit 0 set means f64 payload, else f32     |
//! | 9      | 8     | N, `u64`                                         |
//! | 17     | 8     | d, `u64`                                         |
//! | 25     | N·d·w | values, row-major                                |
//! | ..     | 8     | L, `u64` length of the id block (0 when absent)  |
//! | ..     | L     | newline-separated UTF-8 sample ids               |

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{AttributeMatrix, LabelVector};

pub const ADIF_MAGIC: &[u8; 4] = b"ADIF";
pub const ADIF_VERSION: u32 = 1;
pub const ADIF_HEADER_LEN: usize = 25;
const FLAG_F64: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Binary,
    Csv,
}

impl MatrixFormat {
    /// `.csv` files are CSV; everything else is treated as ADIF.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<AttributeMatrix> {
    match format {
        MatrixFormat::Binary => decode_adif(&fs::read(path)?),
        MatrixFormat::Csv => parse_csv(&fs::read_to_string(path)?),
    }
}

pub fn save_matrix(
    m: &AttributeMatrix,
    path: &Path,
    format: MatrixFormat,
    precision: Precision,
) -> Result<()> {
    if precision == Precision::F32 {
        if let Some(i) = m.values().iter().position(|v| v.abs() > f32::MAX as f64) {
            return Err(Error::InvalidArgument(format!(
                "value at row {}, column {} overflows f32",
                i / m.cols(),
                i % m.cols()
            )));
        }
    }
    match format {
        MatrixFormat::Binary => fs::write(path, encode_adif(m, precision))?,
        MatrixFormat::Csv => fs::write(path, write_csv(m, precision))?,
    }
    Ok(())
}

pub fn encode_adif(m: &AttributeMatrix, precision: Precision) -> Vec<u8> {
    let width = match precision {
        Precision::F32 => 4,
        Precision::F64 => 8,
    };
    let ids = m.sample_ids().map(|ids| ids.join("\n")).unwrap_or_default();
    let mut out = Vec::with_capacity(ADIF_HEADER_LEN + m.values().len() * width + 8 + ids.len());
    out.extend_from_slice(ADIF_MAGIC);
    out.extend_from_slice(&ADIF_VERSION.to_le_bytes());
    out.push(if precision == Precision::F64 {
        FLAG_F64
    } else {
        0
    });
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for &v in m.values() {
        match precision {
            Precision::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            Precision::F64 => out.extend_from_slice(&v.to_le_bytes()),
        }
    }
    out.extend_from_slice(&(ids.len() as u64).to_le_bytes());
    out.extend_from_slice(ids.as_bytes());
    out
}

/// Bounds-checked little-endian reader over a byte slice.
struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated file while reading {what}")))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_adif(bytes: &[u8]) -> Result<AttributeMatrix> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    if cur.take(4, "magic")? != ADIF_MAGIC {
        return Err(Error::Format("bad magic, expected ADIF".into()));
    }
    let version = u32::from_le_bytes(cur.take(4, "version")?.try_into().unwrap());
    if version != ADIF_VERSION {
        return Err(Error::Format(format!("unsupported ADIF version {version}")));
    }
    let flags = cur.take(1, "flags")?[0];
    if flags & !FLAG_F64 != 0 {
        return Err(Error::Format(format!("unknown flag bits {flags:#04x}")));
    }
    let width = if flags & FLAG_F64 != 0 { 8 } else { 4 };
    let n = usize::try_from(cur.u64("row count")?)
        .map_err(|_| Error::Format("row count overflows".into()))?;
    let d = usize::try_from(cur.u64("column count")?)
        .map_err(|_| Error::Format("column count overflows".into()))?;
    if n == 0 || d == 0 {
        return Err(Error::Format(format!("empty shape {n}x{d}")));
    }
    let count = n
        .checked_mul(d)
        .filter(|c| c.checked_mul(width).is_some())
        .ok_or_else(|| Error::Format(format!("shape {n}x{d} overflows")))?;
    let payload = cur.take(count * width, "payload")?;
    let mut values = Vec::with_capacity(count);
    for (i, chunk) in payload.chunks_exact(width).enumerate() {
        let v = if width == 8 {
            f64::from_le_bytes(chunk.try_into().unwrap())
        } else {
            f32::from_le_bytes(chunk.try_into().unwrap()) as f64
        };
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row: i / d,
                col: i % d,
            });
        }
        values.push(v);
    }
    let id_len = usize::try_from(cur.u64("id block length")?)
        .map_err(|_| Error::Format("id block length overflows".into()))?;
    let id_bytes = cur.take(id_len, "id block")?;
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after id block",
            bytes.len() - cur.pos
        )));
    }
    let m = AttributeMatrix::new(n, d, values)?;
    if id_len == 0 {
        return Ok(m);
    }
    let text = std::str::from_utf8(id_bytes)
        .map_err(|e| Error::Format(format!("id block is not UTF-8: {e}")))?;
    let ids: Vec<String> = text.split('\n').map(str::to_owned).collect();
    if ids.len() != n {
        return Err(Error::Format(format!(
            "id block holds {} ids for {n} rows",
            ids.len()
        )));
    }
    m.with_sample_ids(ids)
}

fn format_value(v: f64, precision: Precision) -> String {
    let a = v.abs();
    let plain = a == 0.0 || (1e-5..1e16).contains(&a);
    match (precision, plain) {
        (Precision::F64, true) => format!("{v}"),
        (Precision::F64, false) => format!("{v:e}"),
        (Precision::F32, true) => format!("{}", v as f32),
        (Precision::F32, false) => format!("{:e}", v as f32),
    }
}

/// Renders a matrix as CSV. Values use the shortest representation that
/// parses back to the same number at the given precision.
pub fn write_csv(m: &AttributeMatrix, precision: Precision) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        if let Some(id) = m.sample_id(i) {
            out.push_str("id:");
            out.push_str(id);
            out.push(',');
        }
        for (c, &v) in m.row(i).iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format_value(v, precision));
        }
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<AttributeMatrix> {
    let mut values = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    let mut has_ids: Option<bool> = None;
    let mut row = 0usize;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',').map(str::trim).peekable();
        let id = match fields.peek() {
            Some(f) if f.starts_with("id:") => Some(fields.next().unwrap()[3..].to_owned()),
            _ => None,
        };
        match has_ids {
            None => has_ids = Some(id.is_some()),
            Some(h) if h != id.is_some() => {
                return Err(Error::Format(format!(
                    "row {row}: sample id column present on some rows only"
                )))
            }
            _ => {}
        }
        if let Some(id) = id {
            ids.push(id);
        }
        let mut count = 0;
        for (col, f) in fields.enumerate() {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                row,
                col,
                text: f.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            values.push(v);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::Shape(format!(
                    "row {row} has {count} values, expected {w}"
                )))
            }
            _ => {}
        }
        row += 1;
    }
    let d = width.ok_or(Error::Empty("CSV matrix"))?;
    let m = AttributeMatrix::new(row, d, values)?;
    if has_ids == Some(true) {
        m.with_sample_ids(ids)
    } else {
        Ok(m)
    }
}

/// Reads a label file: either `id,label` lines matched against the matrix's
/// sample ids, or one positional `label` per line. A non-numeric first line
/// is taken as a header; its label column names the attribute.
pub fn load_labels(path: &Path, matrix: &AttributeMatrix) -> Result<LabelVector> {
    let fallback = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("label")
        .to_owned();
    parse_labels(&fs::read_to_string(path)?, matrix, &fallback)
}

pub fn parse_labels(
    text: &str,
    matrix: &AttributeMatrix,
    default_name: &str,
) -> Result<LabelVector> {
    let mut name = default_name.to_owned();
    let mut positional = Vec::new();
    let mut keyed: Vec<(String, u8)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let label_text = *fields.last().unwrap();
        let label = match label_text.parse::<u8>() {
            Ok(l) if l <= 1 => l,
            _ if lineno == 0 => {
                name = label_text.to_owned();
                continue;
            }
            _ => {
                return Err(Error::Parse {
                    row: lineno,
                    col: fields.len() - 1,
                    text: label_text.to_owned(),
                })
            }
        };
        match fields.len() {
            1 => positional.push(label),
            2 => keyed.push((fields[0].to_owned(), label)),
            n => {
                return Err(Error::Format(format!(
                    "label line {lineno} has {n} fields, expected 1 or 2"
                )))
            }
        }
    }
    if !positional.is_empty() && !keyed.is_empty() {
        return Err(Error::Format(
            "label file mixes keyed and positional rows".into(),
        ));
    }
    let labels = if keyed.is_empty() {
        positional
    } else {
        let ids = matrix.sample_ids().ok_or_else(|| {
            Error::InvalidArgument("keyed label file needs a matrix with sample ids".into())
        })?;
        let lookup: std::collections::HashMap<&str, u8> =
            keyed.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        ids.iter()
            .map(|id| {
                lookup
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument(format!("no label for sample {id:?}")))
            })
            .collect::<Result<_>>()?
    };
    let lv = LabelVector::new(labels, name)?;
    lv.check_matches(matrix)?;
    Ok(lv)
}
