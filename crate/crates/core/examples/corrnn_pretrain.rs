//! Pretrains the correlational autoencoder on a synthetic corpus and
//! reports loss and hidden-view correlation before and after.
//!
//! cargo run --release --example corrnn_pretrain -- [epochs]

use corrgan::corrnn::{pretrain, CorrNn, PretrainCfg, ReconstructionMode};
use corrgan::data::{synth_correlated_dataset, SynthSpec};
use corrgan::nn::{seeded_rng, Activation};

fn main() -> corrgan::Result<()> {
    let epochs = std::env::args().nth(1).map_or(30, |a| a.parse().expect("epochs"));
    let data = synth_correlated_dataset(&SynthSpec::default())?.data.records();
    let mut rng = seeded_rng(0);
    let mut model = CorrNn::init(data.x_dim(), data.y_dim(), 16, Activation::Tanh, Activation::Sigmoid, &mut rng)?;
    let before = model.mean_hidden_correlation(&data)?;
    let history = pretrain(&mut model, &data, &PretrainCfg { epochs, ..Default::default() }, &mut rng)?;
    let after = model.mean_hidden_correlation(&data)?;
    println!("loss: epoch 1 {:.3}, epoch {epochs} {:.3}", history[0], history[history.len() - 1]);
    println!("mean hidden correlation: {before:.3} -> {after:.3}");
    for mode in [ReconstructionMode::Full, ReconstructionMode::XOnly, ReconstructionMode::YOnly] {
        let rec = model.reconstruct_batch(&data, mode)?;
        let err = (&rec - &data.joined()).mapv(f64::abs).mean().unwrap_or(0.0);
        println!("{mode:?} reconstruction mean abs error {err:.4}");
    }
    Ok(())
}
