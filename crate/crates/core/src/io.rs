//! Text output helpers: fixed 17-significant-digit numbers and small CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::Result;

/// Formats with 17 significant digits, locale-free, so values round-trip.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // collapse -0 so repeated runs with sign-flipped zeros stay byte-identical
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

/// Renders a header and numeric rows as CSV text.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, renamed into place only after the write succeeded.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
