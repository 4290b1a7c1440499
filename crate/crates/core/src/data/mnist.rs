//! IDX (MNIST) loading. Files may be plain or gzip-compressed.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use ndarray::Array2;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Images scaled to `[0, 1]`, one flattened row-major image per row.
#[derive(Debug, Clone, PartialEq)]
pub struct MnistData {
    pub images: Array2<f64>,
    pub labels: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
}

impl MnistData {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The first `n` examples (or all, if fewer).
    pub fn truncate(mut self, n: usize) -> Self {
        if n < self.len() {
            self.images = self.images.slice_move(ndarray::s![..n, ..]);
            self.labels.truncate(n);
        }
        self
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize, path: &Path) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{}: truncated IDX header", path.display())))
}

/// Parses an IDX buffer with the expected magic. Returns the dimension
/// sizes and the payload.
fn parse_idx<'a>(bytes: &'a [u8], expected: u32, path: &Path) -> Result<(Vec<usize>, &'a [u8])> {
    let magic = be_u32(bytes, 0, path)?;
    if magic != expected {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found: magic,
            expected,
        });
    }
    let ndims = (magic & 0xff) as usize;
    let dims = (0..ndims)
        .map(|i| be_u32(bytes, 4 + 4 * i, path).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let header = 4 + 4 * ndims;
    let len: usize = dims.iter().product();
    let payload = &bytes[header..];
    if payload.len() != len {
        return Err(Error::Format(format!(
            "{}: header promises {len} bytes of data, found {}",
            path.display(),
            payload.len()
        )));
    }
    Ok((dims, payload))
}

pub fn load_mnist(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<MnistData> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let image_bytes = read_bytes(ip)?;
    let label_bytes = read_bytes(lp)?;
    let (idims, pixels) = parse_idx(&image_bytes, IMAGES_MAGIC, ip)?;
    let (ldims, labels) = parse_idx(&label_bytes, LABELS_MAGIC, lp)?;
    let (n, rows, cols) = (idims[0], idims[1], idims[2]);
    if ldims[0] != n {
        return Err(Error::Format(format!(
            "{} holds {n} images but {} holds {} labels",
            ip.display(),
            lp.display(),
            ldims[0]
        )));
    }
    let images = Array2::from_shape_vec(
        (n, rows * cols),
        pixels.iter().map(|&p| p as f64 / 255.0).collect(),
    )
    .expect("length checked against header");
    Ok(MnistData {
        images,
        labels: labels.to_vec(),
        rows,
        cols,
    })
}

/// `value >= threshold` becomes 1, everything else 0.
pub fn binarize_images(images: &Array2<f64>, threshold: f64) -> Array2<f64> {
    images.mapv(|v| if v >= threshold { 1.0 } else { 0.0 })
}

/// Serializes images (values in `[0, 1]`) and labels as IDX files.
pub fn write_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    data: &MnistData,
) -> Result<()> {
    let mut img = Vec::with_capacity(16 + data.images.len());
    img.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for d in [data.len(), data.rows, data.cols] {
        img.extend_from_slice(&(d as u32).to_be_bytes());
    }
    img.extend(data.images.iter().map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    let mut lab = Vec::with_capacity(8 + data.len());
    lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(data.len() as u32).to_be_bytes());
    lab.extend_from_slice(&data.labels);
    let ip = images_path.as_ref();
    std::fs::write(ip, img).map_err(|e| Error::io(ip, e))?;
    let lp = labels_path.as_ref();
    std::fs::write(lp, lab).map_err(|e| Error::io(lp, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn tiny() -> MnistData {
        MnistData {
            images: array![[0.0, 1.0, 0.5, 0.2], [1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]],
            labels: vec![3, 7, 0],
            rows: 2,
            cols: 2,
        }
    }

    #[test]
    fn round_trip_and_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let (i, l) = (dir.path().join("i"), dir.path().join("l"));
        write_idx(&i, &l, &tiny()).unwrap();
        let back = load_mnist(&i, &l).unwrap();
        assert_eq!(back.labels, vec![3, 7, 0]);
        assert_eq!(back.images[[0, 1]], 1.0);
        assert_eq!(back.images[[0, 2]], 128.0 / 255.0);
        assert_eq!((back.rows, back.cols), (2, 2));
    }

    #[test]
    fn wrong_magic_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let (i, l) = (dir.path().join("i"), dir.path().join("l"));
        write_idx(&i, &l, &tiny()).unwrap();
        // swap the files: the labels path now holds image data
        match load_mnist(&i, &i).unwrap_err() {
            Error::BadMagic { found, .. } => assert_eq!(found, IMAGES_MAGIC),
            e => panic!("{e}"),
        }
        let msg = load_mnist(&i, &i).unwrap_err().to_string();
        assert!(msg.contains("0x00000803"), "{msg}");
    }

    #[test]
    fn count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (i, l, l2) = (dir.path().join("i"), dir.path().join("l"), dir.path().join("l2"));
        write_idx(&i, &l, &tiny()).unwrap();
        let mut short = tiny().truncate(2);
        short.rows = 2;
        write_idx(dir.path().join("i2"), &l2, &short).unwrap();
        assert!(matches!(load_mnist(&i, &l2), Err(Error::Format(_))));
    }

    #[test]
    fn binarize_ties_go_up() {
        let b = binarize_images(&array![[0.0, 0.5, 0.49, 1.0]], 0.5);
        assert_eq!(b, array![[0.0, 1.0, 0.0, 1.0]]);
        assert!(binarize_images(&Array2::zeros((2, 3)), 0.5).iter().all(|&v| v == 0.0));
    }
}
