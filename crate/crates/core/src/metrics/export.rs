use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::{ArrayView1, ArrayView2};

use super::EvalReport;
use crate::data::Dictionary;
use crate::error::{Error, Result};

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_metrics_csv(reports: &[EvalReport], path: &Path) -> Result<()> {
    let mut out = String::from("epoch,occurrence_mse,cooc_err_signed,cooc_err_abs\n");
    for r in reports {
        writeln!(out, "{},{},{},{}", r.epoch, r.occurrence_mse, r.cooc_err_signed, r.cooc_err_abs).unwrap();
    }
    write_file(path, out)
}

/// One line per coordinate. Without a dictionary the token column repeats
/// the index.
pub fn write_scatter_csv(report: &EvalReport, tokens: Option<&Dictionary>, path: &Path) -> Result<()> {
    let mut out = String::from("dim_index,token,p_train,p_gen\n");
    for (i, (a, b)) in report
        .occurrence_train
        .iter()
        .zip(&report.occurrence_generated)
        .enumerate()
    {
        let token = tokens
            .and_then(|d| d.token(i))
            .map(csv_field)
            .unwrap_or_else(|| i.to_string());
        writeln!(out, "{i},{token},{a},{b}").unwrap();
    }
    write_file(path, out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Writes `metrics.csv` plus one scatter file per report into `out_dir`.
pub fn export_report(reports: &[EvalReport], out_dir: &Path, tokens: Option<&Dictionary>) -> Result<Vec<PathBuf>> {
    let mut written = vec![out_dir.join("metrics.csv")];
    write_metrics_csv(reports, &written[0])?;
    for r in reports {
        let path = out_dir.join(format!("scatter_epoch_{:04}.csv", r.epoch));
        write_scatter_csv(r, tokens, &path)?;
        written.push(path);
    }
    Ok(written)
}

/// Binary PGM (P5). Values in `[0, 1]` map to bytes by rounding half up.
pub fn pgm_bytes(width: usize, height: usize, pixels: &[f64]) -> Result<Vec<u8>> {
    if pixels.len() != width * height {
        return Err(Error::shape("pgm pixels", width * height, pixels.len()));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(
        pixels
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8),
    );
    Ok(out)
}

pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[f64]) -> Result<()> {
    write_file(path, pgm_bytes(width, height, pixels)?)
}

/// Tiles square images (one per row of `images`) into a grid with `cols`
/// columns. Returns `(width, height, pixels)`.
pub fn image_grid(images: ArrayView2<f64>, side: usize, cols: usize) -> Result<(usize, usize, Vec<f64>)> {
    if images.ncols() != side * side {
        return Err(Error::shape("grid image size", side * side, images.ncols()));
    }
    let cols = cols.max(1);
    let rows = images.nrows().div_ceil(cols).max(1);
    let (w, h) = (cols * side, rows * side);
    let mut pixels = vec![0.0; w * h];
    for (k, img) in images.rows().into_iter().enumerate() {
        let (gr, gc) = (k / cols, k % cols);
        for r in 0..side {
            for c in 0..side {
                pixels[(gr * side + r) * w + gc * side + c] = img[r * side + c];
            }
        }
    }
    Ok((w, h, pixels))
}

/// Active tokens of each binary row, comma-separated in dictionary order.
pub fn skill_lines(rows: ArrayView2<f64>, dict: &Dictionary) -> Result<Vec<String>> {
    if rows.ncols() != dict.len() {
        return Err(Error::shape("skill rows vs dictionary", dict.len(), rows.ncols()));
    }
    Ok(rows.rows().into_iter().map(|r| skill_line(r, dict)).collect())
}

fn skill_line(row: ArrayView1<f64>, dict: &Dictionary) -> String {
    crate::data::active_tokens(row, dict, 0.5).join(", ")
}

pub fn write_skill_samples(path: &Path, lines: &[String]) -> Result<()> {
    let mut out = String::new();
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
    write_file(path, out)
}
