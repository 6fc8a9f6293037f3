//! Binary and CSV persistence of scalar fields.
//!
//! Binary layout: `APFB1\n`, `u32` ndims, `u32` per axis, `f64` h, `f64`
//! gamma, then the values row-major; everything little-endian. The origin is
//! not stored: readers place the box symmetrically about zero unless told
//! otherwise.

use apfb::{Grid, ScalarField};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 6] = b"APFB1\n";

#[derive(Debug, Error)]
pub enum FieldIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a field file (bad magic)")]
    BadMagic,
    #[error("truncated field file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("trailing bytes after the payload: expected {expected}, found {found}")]
    Trailing { expected: u64, found: u64 },
    #[error("dimension product overflows: {0:?}")]
    DimOverflow(Vec<u64>),
    #[error("bad header: {0}")]
    BadHeader(String),
}

/// Contents of a field file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldData {
    pub dims: Vec<usize>,
    pub h: f64,
    pub gamma: f64,
    pub values: Vec<f64>,
}

impl FieldData {
    pub fn from_field(u: &ScalarField, gamma: f64) -> Self {
        FieldData { dims: u.grid.dims.clone(), h: u.grid.h, gamma, values: u.values.clone() }
    }

    /// Origin that centres the box at zero.
    pub fn centred_origin(&self) -> Vec<f64> {
        self.dims.iter().map(|&n| -0.5 * (n - 1) as f64 * self.h).collect()
    }

    /// Field on the grid with the given origin; box-boundary values become
    /// Dirichlet data.
    pub fn to_field(&self, origin: Option<&[f64]>) -> Result<ScalarField, FieldIoError> {
        let origin = origin.map_or_else(|| self.centred_origin(), |o| o.to_vec());
        let grid = Grid::new(self.dims.clone(), self.h, origin).map_err(|e| FieldIoError::BadHeader(e.to_string()))?;
        let mut u = ScalarField::zeros(grid);
        u.values = self.values.clone();
        u.freeze_boundary();
        Ok(u)
    }
}

pub fn encode(d: &FieldData) -> Vec<u8> {
    let mut out = Vec::with_capacity(6 + 4 * (1 + d.dims.len()) + 16 + 8 * d.values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(d.dims.len() as u32).to_le_bytes());
    for &n in &d.dims {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&d.h.to_le_bytes());
    out.extend_from_slice(&d.gamma.to_le_bytes());
    for v in &d.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<FieldData, FieldIoError> {
    let found = bytes.len() as u64;
    let short = |expected: u64| FieldIoError::Truncated { expected, found };
    if bytes.len() < MAGIC.len() {
        return if MAGIC.starts_with(bytes) { Err(short(MAGIC.len() as u64 + 4)) } else { Err(FieldIoError::BadMagic) };
    }
    if &bytes[..6] != MAGIC {
        return Err(FieldIoError::BadMagic);
    }
    let u32_at = |at: usize| -> Result<u32, FieldIoError> {
        bytes.get(at..at + 4).map(|b| u32::from_le_bytes(b.try_into().unwrap())).ok_or(short(at as u64 + 4))
    };
    let f64_at = |at: usize| -> Result<f64, FieldIoError> {
        bytes.get(at..at + 8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).ok_or(short(at as u64 + 8))
    };
    let nd = u32_at(6)? as usize;
    if nd == 0 || nd > 2 {
        return Err(FieldIoError::BadHeader(format!("{nd} axes; fields are 1D or 2D")));
    }
    let dims64: Vec<u64> = (0..nd).map(|k| u32_at(10 + 4 * k).map(u64::from)).collect::<Result<_, _>>()?;
    let head = 10 + 4 * nd;
    let h = f64_at(head)?;
    let gamma = f64_at(head + 8)?;
    let count = dims64.iter().try_fold(1u64, |a, &n| a.checked_mul(n)).ok_or_else(|| FieldIoError::DimOverflow(dims64.clone()))?;
    let expected = count
        .checked_mul(8)
        .and_then(|p| p.checked_add(head as u64 + 16))
        .ok_or_else(|| FieldIoError::DimOverflow(dims64.clone()))?;
    if usize::try_from(expected).is_err() {
        return Err(FieldIoError::DimOverflow(dims64));
    }
    if found < expected {
        return Err(short(expected));
    }
    if found > expected {
        return Err(FieldIoError::Trailing { expected, found });
    }
    if dims64.iter().any(|&n| n < 2) || !(h > 0.0 && h.is_finite()) {
        return Err(FieldIoError::BadHeader(format!("dims {dims64:?}, h {h}")));
    }
    let values = bytes[head + 16..].chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
    Ok(FieldData { dims: dims64.iter().map(|&n| n as usize).collect(), h, gamma, values })
}

pub fn write_field(path: &Path, d: &FieldData) -> Result<(), FieldIoError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(d))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldData, FieldIoError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Text variant: `# dims=NxM,h=..,gamma=..`, then one line per index of the
/// first axis. Values use the shortest exact decimal form.
pub fn to_csv(d: &FieldData) -> String {
    let dims: Vec<String> = d.dims.iter().map(|n| n.to_string()).collect();
    let mut s = format!("# dims={},h={},gamma={}\n", dims.join("x"), d.h, d.gamma);
    let row = *d.dims.last().unwrap();
    for chunk in d.values.chunks(row) {
        let cells: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn from_csv(text: &str) -> Result<FieldData, FieldIoError> {
    let bad = |m: &str| FieldIoError::BadHeader(m.to_string());
    let header = text.lines().next().and_then(|l| l.strip_prefix("# ")).ok_or_else(|| bad("missing '# dims=...' header"))?;
    let (mut dims, mut h, mut gamma) = (None, None, None);
    for part in header.split(',') {
        match part.split_once('=') {
            Some(("dims", v)) => dims = v.split('x').map(|n| n.parse::<usize>().ok()).collect::<Option<Vec<_>>>(),
            Some(("h", v)) => h = v.parse::<f64>().ok(),
            Some(("gamma", v)) => gamma = v.parse::<f64>().ok(),
            _ => return Err(bad(&format!("unexpected header entry {part:?}"))),
        }
    }
    let (dims, h, gamma) = (dims.ok_or_else(|| bad("dims"))?, h.ok_or_else(|| bad("h"))?, gamma.ok_or_else(|| bad("gamma"))?);
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).from_reader(text.as_bytes());
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(&e.to_string()))?;
        for cell in rec.iter() {
            values.push(cell.trim().parse::<f64>().map_err(|_| bad(&format!("value {cell:?}")))?);
        }
    }
    let expected: usize = dims.iter().product();
    if values.len() != expected {
        return Err(FieldIoError::Truncated { expected: expected as u64, found: values.len() as u64 });
    }
    Ok(FieldData { dims, h, gamma, values })
}
