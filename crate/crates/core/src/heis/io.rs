//! Binary field files: `<stem>.bin` holds little-endian `(re, im)` f64 pairs in
//! flat grid order, `<stem>.json` holds a [`FieldHeader`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::field::SampledField;
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub grid: GridSpec,
    pub provenance: String,
    pub dtype: String,
    pub count: usize,
    pub data_file: String,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

/// Writes `<stem>.json` and `<stem>.bin`.
pub fn write_field(stem: &Path, f: &SampledField) -> Result<()> {
    let (hp, bp) = paths(stem);
    let mut bytes = Vec::with_capacity(16 * f.values.len());
    for v in &f.values {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    let header = FieldHeader {
        grid: f.grid.clone(),
        provenance: f.provenance.clone(),
        dtype: "complex128-le".into(),
        count: f.values.len(),
        data_file: bp.file_name().unwrap().to_string_lossy().into_owned(),
    };
    write_atomic(&bp, &bytes)?;
    let json = serde_json::to_string_pretty(&header).map_err(|e| Error::Io(e.to_string()))?;
    write_atomic(&hp, json.as_bytes())
}

/// Reads a field written by [`write_field`]; the result is grid-only.
pub fn read_field(stem: &Path) -> Result<SampledField> {
    let (hp, _) = paths(stem);
    let header: FieldHeader =
        serde_json::from_slice(&fs::read(&hp)?).map_err(|e| Error::Io(format!("{}: {e}", hp.display())))?;
    if header.dtype != "complex128-le" {
        return Err(Error::Io(format!("unsupported dtype {}", header.dtype)));
    }
    let bp = hp.with_file_name(&header.data_file);
    let bytes = fs::read(&bp)?;
    if bytes.len() != 16 * header.count {
        return Err(Error::Io(format!("{}: expected {} bytes", bp.display(), 16 * header.count)));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    SampledField::from_values(&header.grid, values, header.provenance)
}
