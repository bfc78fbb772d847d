//! File formats: 8-bit binary PGM (P5) images and flat CSV vectors of reals.
//! All image files hold values in [0, 1].

use std::io::Write;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{HarnessError, Result};

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

/// Read a vector of reals from a PGM (scaled to [0, 1]) or CSV file,
/// dispatching on extension.
pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => Ok(read_pgm(path)?.0),
        _ => read_csv_vector(path),
    }
}

/// Read a P5 PGM; returns ([0,1] values row-major, (height, width)).
pub fn read_pgm(path: &Path) -> Result<(DVector<f64>, (usize, usize))> {
    let data = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let text_err = |m: &str| io_err(path, m);
    if !data.starts_with(b"P5") {
        return Err(text_err("not a P5 PGM"));
    }
    // Header: magic, width, height, maxval as whitespace-separated tokens,
    // comments allowed.
    let mut pos = 2usize;
    let mut fields = Vec::new();
    while fields.len() < 3 && pos < data.len() {
        while pos < data.len() && (data[pos] as char).is_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !(data[pos] as char).is_whitespace() {
            pos += 1;
        }
        let tok = std::str::from_utf8(&data[start..pos]).map_err(|e| io_err(path, e))?;
        fields.push(
            tok.parse::<usize>()
                .map_err(|_| text_err("bad header field"))?,
        );
    }
    if fields.len() != 3 {
        return Err(text_err("truncated header"));
    }
    let (w, h, maxval) = (fields[0], fields[1], fields[2]);
    if maxval == 0 || maxval > 255 {
        return Err(text_err("only 8-bit PGM supported"));
    }
    pos += 1; // single whitespace after maxval
    let pixels = &data[pos..];
    if pixels.len() < w * h {
        return Err(text_err("truncated pixel data"));
    }
    let v = DVector::from_iterator(w * h, pixels[..w * h].iter().map(|&b| b as f64 / maxval as f64));
    Ok((v, (h, w)))
}

/// Write a P5 PGM from [0,1] values (clamped, rounded to 8 bits).
pub fn write_pgm(path: &Path, values: &DVector<f64>, height: usize, width: usize) -> Result<()> {
    if values.len() != height * width {
        return Err(HarnessError::Io(format!(
            "{}: {} values for {height}x{width} image",
            path.display(),
            values.len()
        )));
    }
    let mut out = Vec::with_capacity(32 + values.len());
    write!(out, "P5\n{width} {height}\n255\n").expect("vec write");
    out.extend(
        values
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Read whitespace/comma separated reals.
pub fn read_csv_vector(path: &Path) -> Result<DVector<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut vals = Vec::new();
    for tok in text.split(|c: char| c == ',' || c.is_whitespace()) {
        if tok.is_empty() {
            continue;
        }
        vals.push(
            tok.parse::<f64>()
                .map_err(|_| io_err(path, format!("bad number {tok:?}")))?,
        );
    }
    if vals.is_empty() {
        return Err(io_err(path, "no values"));
    }
    Ok(DVector::from_vec(vals))
}

/// Write one real per line using shortest round-trip formatting.
pub fn write_csv_vector(path: &Path, values: &DVector<f64>) -> Result<()> {
    let mut out = String::new();
    for v in values.iter() {
        out.push_str(&format!("{v}\n"));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// [0,1] file domain -> [-1,1] internal domain.
pub fn to_internal(v: &DVector<f64>) -> DVector<f64> {
    v.map(|x| 2.0 * x - 1.0)
}

/// [-1,1] internal domain -> [0,1] file domain (clamped).
pub fn to_unit(v: &DVector<f64>) -> DVector<f64> {
    v.map(|x| ((x + 1.0) / 2.0).clamp(0.0, 1.0))
}
