//! Binary model checkpoints.
//!
//! Layout: the magic bytes `CGAN`, a little-endian `u32` format version, a
//! little-endian `u32` header length, a UTF-8 JSON header describing the
//! configuration and every tensor, then each tensor's values as
//! little-endian `f64` in row-major order, in header order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::profiles::Vocabulary;
use crate::corrnn::{CorrNn, Decoder, Encoder};
use crate::error::{Error, Result};
use crate::gan::{CorrGan, Discriminator, Generator, TrainCfg};
use crate::nn::{Activation, DenseLayer, Mlp};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"CGAN";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to generate from a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub train: TrainCfg,
    pub epoch: usize,
    pub corrnn: CorrNn,
    pub generator: Generator,
    pub discriminator: Discriminator,
    /// Present for models trained on profile data.
    pub vocab: Option<Vocabulary>,
}

impl ModelBundle {
    pub fn from_model(model: &CorrGan, vocab: Option<Vocabulary>) -> Self {
        Self {
            train: model.cfg.clone(),
            epoch: model.epoch,
            corrnn: model.corrnn.clone(),
            generator: model.generator.clone(),
            discriminator: model.discriminator.clone(),
            vocab,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    train: TrainCfg,
    epoch: usize,
    vocab: Option<Vocabulary>,
    z_dim: usize,
    encoder_activation: Activation,
    decoder_activation: Activation,
    generator_activations: Vec<Activation>,
    discriminator_activations: Vec<Activation>,
    tensors: Vec<TensorInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorInfo {
    name: String,
    shape: Vec<usize>,
}

struct Tensor {
    info: TensorInfo,
    data: Vec<f64>,
}

fn matrix(name: &str, a: &Array2<f64>) -> Tensor {
    Tensor {
        info: TensorInfo { name: name.into(), shape: vec![a.nrows(), a.ncols()] },
        data: a.iter().copied().collect(),
    }
}

fn vector(name: &str, a: &Array1<f64>) -> Tensor {
    Tensor {
        info: TensorInfo { name: name.into(), shape: vec![a.len()] },
        data: a.to_vec(),
    }
}

fn mlp_tensors(prefix: &str, net: &Mlp, out: &mut Vec<Tensor>) {
    for (i, layer) in net.layers().iter().enumerate() {
        out.push(matrix(&format!("{prefix}.{i}.weights"), &layer.weights));
        out.push(vector(&format!("{prefix}.{i}.bias"), &layer.bias));
    }
}

fn bundle_tensors(b: &ModelBundle) -> Vec<Tensor> {
    let (enc, dec) = (&b.corrnn.encoder, &b.corrnn.decoder);
    let mut out = vec![
        matrix("encoder.w", &enc.w),
        matrix("encoder.v", &enc.v),
        vector("encoder.b", &enc.b),
        matrix("decoder.w", &dec.w),
        matrix("decoder.v", &dec.v),
        vector("decoder.b", &dec.b),
    ];
    mlp_tensors("generator", &b.generator.net, &mut out);
    mlp_tensors("discriminator", &b.discriminator.net, &mut out);
    out
}

fn activations(net: &Mlp) -> Vec<Activation> {
    net.layers().iter().map(|l| l.activation).collect()
}

/// Writes `bundle` to `path`, replacing any existing file.
pub fn save_checkpoint(path: impl AsRef<Path>, bundle: &ModelBundle) -> Result<()> {
    let path = path.as_ref();
    let tensors = bundle_tensors(bundle);
    let header = Header {
        train: bundle.train.clone(),
        epoch: bundle.epoch,
        vocab: bundle.vocab.clone(),
        z_dim: bundle.generator.z_dim,
        encoder_activation: bundle.corrnn.encoder.activation,
        decoder_activation: bundle.corrnn.decoder.activation,
        generator_activations: activations(&bundle.generator.net),
        discriminator_activations: activations(&bundle.discriminator.net),
        tensors: tensors.iter().map(|t| t.info.clone()).collect(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
    let header_len = u32::try_from(json.len()).map_err(|_| Error::Format("checkpoint header too large".into()))?;

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    write(&CHECKPOINT_MAGIC)?;
    write(&CHECKPOINT_VERSION.to_le_bytes())?;
    write(&header_len.to_le_bytes())?;
    write(&json)?;
    for t in &tensors {
        for v in &t.data {
            write(&v.to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(u32::from_le_bytes(buf))
}

struct TensorQueue {
    tensors: std::vec::IntoIter<Tensor>,
}

impl TensorQueue {
    fn next(&mut self, name: &str, rank: usize) -> Result<Tensor> {
        let t = self
            .tensors
            .next()
            .ok_or_else(|| Error::Format(format!("checkpoint is missing tensor `{name}`")))?;
        if t.info.name != name {
            return Err(Error::Format(format!("expected tensor `{name}`, found `{}`", t.info.name)));
        }
        if t.info.shape.len() != rank {
            return Err(Error::shape("tensor rank", rank, t.info.shape.len()));
        }
        Ok(t)
    }

    fn matrix(&mut self, name: &str) -> Result<Array2<f64>> {
        let t = self.next(name, 2)?;
        Array2::from_shape_vec((t.info.shape[0], t.info.shape[1]), t.data)
            .map_err(|e| Error::Format(format!("tensor `{name}`: {e}")))
    }

    fn vector(&mut self, name: &str) -> Result<Array1<f64>> {
        Ok(Array1::from(self.next(name, 1)?.data))
    }

    fn mlp(&mut self, prefix: &str, acts: &[Activation]) -> Result<Mlp> {
        let layers = acts
            .iter()
            .enumerate()
            .map(|(i, &activation)| {
                Ok(DenseLayer {
                    weights: self.matrix(&format!("{prefix}.{i}.weights"))?,
                    bias: self.vector(&format!("{prefix}.{i}.bias"))?,
                    activation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Mlp::new(layers)
    }
}

fn check_corrnn(ae: &CorrNn) -> Result<()> {
    let h = ae.encoder.w.nrows();
    let t = ae.decoder.w.nrows();
    let ok = ae.encoder.v.nrows() == h
        && ae.encoder.b.len() == h
        && ae.encoder.w.ncols() + ae.encoder.v.ncols() == t
        && ae.decoder.w.ncols() == h
        && ae.decoder.v.dim() == (t, h)
        && ae.decoder.b.len() == t;
    if ok {
        Ok(())
    } else {
        Err(Error::Format("autoencoder tensors have inconsistent shapes".into()))
    }
}

/// Reads a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found: u32::from_be_bytes(magic),
            expected: u32::from_be_bytes(CHECKPOINT_MAGIC),
        });
    }
    let version = read_u32(&mut r, path)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Version { found: version, expected: CHECKPOINT_VERSION });
    }
    let header_len = read_u32(&mut r, path)? as usize;
    let mut json = vec![0u8; header_len];
    r.read_exact(&mut json).map_err(|e| Error::io(path, e))?;
    let text = std::str::from_utf8(&json).map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
    let header: Header = serde_json::from_str(text).map_err(|e| super::profiles::json_error(text, path, &e))?;

    let mut tensors = Vec::with_capacity(header.tensors.len());
    for info in header.tensors {
        let count: usize = info.shape.iter().product();
        let mut bytes = vec![0u8; count * 8];
        r.read_exact(&mut bytes).map_err(|e| Error::io(path, e))?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        tensors.push(Tensor { info, data });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::Format(format!("{}: trailing bytes after tensor data", path.display())));
    }

    let mut q = TensorQueue { tensors: tensors.into_iter() };
    let encoder = Encoder {
        w: q.matrix("encoder.w")?,
        v: q.matrix("encoder.v")?,
        b: q.vector("encoder.b")?,
        activation: header.encoder_activation,
    };
    let decoder = Decoder {
        w: q.matrix("decoder.w")?,
        v: q.matrix("decoder.v")?,
        b: q.vector("decoder.b")?,
        activation: header.decoder_activation,
    };
    let corrnn = CorrNn { encoder, decoder };
    check_corrnn(&corrnn)?;
    let generator = Generator::from_net(q.mlp("generator", &header.generator_activations)?, header.z_dim)?;
    let discriminator = Discriminator::from_net(q.mlp("discriminator", &header.discriminator_activations)?)?;
    if let Some(extra) = q.tensors.next() {
        return Err(Error::Format(format!("unexpected tensor `{}`", extra.info.name)));
    }
    if generator.latent_dim() != corrnn.latent_dim() {
        return Err(Error::shape("generator output vs latent width", corrnn.latent_dim(), generator.latent_dim()));
    }
    if discriminator.record_dim() != corrnn.record_dim() {
        return Err(Error::shape("discriminator record width", corrnn.record_dim(), discriminator.record_dim()));
    }
    Ok(ModelBundle {
        train: header.train,
        epoch: header.epoch,
        corrnn,
        generator,
        discriminator,
        vocab: header.vocab,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dictionary;
    use crate::nn::seeded_rng;

    fn bundle() -> ModelBundle {
        let mut rng = seeded_rng(11);
        let train = TrainCfg { lr: 0.1 + 0.2, z_dim: 3, latent_dim: 4, ..Default::default() };
        ModelBundle {
            corrnn: CorrNn::init(5, 2, 4, Activation::Tanh, Activation::Sigmoid, &mut rng).unwrap(),
            generator: Generator::new(3, 2, &[6], 4, &mut rng).unwrap(),
            discriminator: Discriminator::new(7, &[5], &mut rng).unwrap(),
            train,
            epoch: 300,
            vocab: Some(Vocabulary {
                skills: Dictionary::from_tokens(["a", "b", "c", "d", "e"]),
                professions: Dictionary::from_tokens(["x", "y"]),
            }),
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.cgan");
        let b = bundle();
        save_checkpoint(&path, &b).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, b);
        assert_eq!(loaded.train.lr.to_bits(), b.train.lr.to_bits());
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.cgan");
        save_checkpoint(&path, &bundle()).unwrap();
        let good = std::fs::read(&path).unwrap();

        let mut bytes = good.clone();
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Version { found: 2, expected: 1 })));

        let mut bytes = good.clone();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::BadMagic { .. })));

        std::fs::write(&path, &good[..good.len() - 3]).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
