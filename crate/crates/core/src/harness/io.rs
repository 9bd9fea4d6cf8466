//! CSV series and binary snapshots.
//!
//! Snapshot layout, little-endian throughout:
//!
//! ```text
//! b"PFC1" | u32 nx | u32 ny | f64 lx | f64 ly | f64 time | nx·ny × f64 (row-major, x slowest)
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::StepRecord;
use crate::spectral::{Field2D, Grid2D};

pub const CSV_HEADER: &str = "step,time,energy,modified_energy,volume,dissipation_rate,fp_iters";
pub const SNAPSHOT_MAGIC: &[u8; 4] = b"PFC1";
const SNAPSHOT_HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8 + 8;

/// One line per record after the header; an undefined modified energy is
/// left empty so the column count never changes.
pub fn csv_string(records: &[StepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let modified = r
            .modified_energy
            .map(|e| format!("{e:.16e}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{}",
            r.step, r.time, r.energy, modified, r.volume, r.dissipation_rate, r.fp_iters
        );
    }
    out
}

pub fn write_csv(path: &Path, records: &[StepRecord]) -> Result<()> {
    fs::write(path, csv_string(records)).map_err(|e| Error::io(path, e))
}

pub fn encode_snapshot(field: &Field2D, time: f64) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 8 * g.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(g.nx as u32).to_le_bytes());
    out.extend_from_slice(&(g.ny as u32).to_le_bytes());
    out.extend_from_slice(&g.lx.to_le_bytes());
    out.extend_from_slice(&g.ly.to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Inverse of [`encode_snapshot`]; `path` only labels errors.
pub fn decode_snapshot(bytes: &[u8], path: &Path) -> Result<(Field2D, f64)> {
    let bad = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    if bytes.len() < SNAPSHOT_HEADER_LEN {
        return Err(bad(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(bad(format!("bad magic {:?}", &bytes[..4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nx, ny) = (u32_at(4), u32_at(8));
    let (lx, ly, time) = (f64_at(12), f64_at(20), f64_at(28));
    let grid = Grid2D::new(nx, ny, lx, ly).map_err(|e| bad(e.to_string()))?;
    let expected = SNAPSHOT_HEADER_LEN + 8 * grid.len();
    if bytes.len() != expected {
        return Err(bad(format!(
            "expected {expected} bytes for a {nx}x{ny} grid, found {}",
            bytes.len()
        )));
    }
    let values = bytes[SNAPSHOT_HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((Field2D::from_values(grid, values)?, time))
}

pub fn write_snapshot(path: &Path, field: &Field2D, time: f64) -> Result<()> {
    fs::write(path, encode_snapshot(field, time)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<(Field2D, f64)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes, path)
}

/// `snapshot_t0000100.000.bin` style names that sort by time.
pub fn snapshot_file_name(time: f64) -> String {
    format!("snapshot_t{time:011.3}.bin")
}
