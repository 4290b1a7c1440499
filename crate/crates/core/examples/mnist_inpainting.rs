//! Trains the inpainting generator on binarized MNIST: the generator sees
//! noise in place of the top half plus the real bottom half, and the decoder
//! produces a full image. Writes a PGM grid of input/completion pairs.
//!
//! cargo run --release --example mnist_inpainting -- [images] [epochs]

use std::path::Path;

use corrgan::corrnn::RecordBatch;
use corrgan::data::{binarize_images, load_mnist};
use corrgan::gan::{inpaint_halves, train_corrgan, EvalCfg, EvalScope, TrainCfg};
use corrgan::metrics::{image_grid, write_pgm};
use corrgan::nn::seeded_rng;
use ndarray::Array2;

fn main() -> corrgan::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(1000);
    let epochs = args.next().unwrap_or(20);

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mnist");
    let train = load_mnist(dir.join("train-images-idx3-ubyte.gz"), dir.join("train-labels-idx1-ubyte.gz"))?.truncate(n);
    let test = load_mnist(dir.join("t10k-images-idx3-ubyte.gz"), dir.join("t10k-labels-idx1-ubyte.gz"))?;
    let images = binarize_images(&train.images, 0.5);
    let data = RecordBatch::split(images.view(), 392)?;

    let cfg = TrainCfg { epochs, latent_dim: 64, z_dim: 392, ..Default::default() };
    let eval = EvalCfg { interval: epochs.max(1), scope: EvalScope::FullRecord, ..Default::default() };
    let out = train_corrgan(&cfg, &eval, &data)?;

    let held = binarize_images(&test.images, 0.5);
    let mut rng = seeded_rng(3);
    let count = 20.min(held.nrows());
    let mut pairs = Array2::zeros((2 * count, 784));
    let mut agreement = 0.0;
    for i in 0..count {
        let image = held.row(i).to_vec();
        let done = inpaint_halves(&out.model.generator, &out.model.corrnn.decoder, &image, &mut rng)?;
        agreement += done.kept_half_agreement(&image);
        pairs.row_mut(2 * i).assign(&held.row(i));
        pairs.row_mut(2 * i + 1).assign(&done.raw);
    }
    println!("mean bottom-half agreement over {count} held-out digits: {:.3}", agreement / count as f64);
    let (w, h, pixels) = image_grid(pairs.view(), 28, 10)?;
    let path = std::env::temp_dir().join("corrgan_inpainting.pgm");
    write_pgm(&path, w, h, &pixels)?;
    println!("wrote {}", path.display());
    Ok(())
}
