//! Compares backprop gradients with central finite differences for the
//! autoencoder loss, the discriminator objective and the full
//! generator -> decoder -> discriminator chain.

use corrgan::corrnn::{CorrNn, CorrNnLoss, RecordBatch};
use corrgan::gan::{
    discriminator_grads, discriminator_objective, generator_grads, generator_objective, sample_noise,
    synthesize_batch, ConditionHalf, Discriminator, Generator, GeneratorDecoder,
};
use corrgan::nn::{finite_diff_grad, max_relative_error, seeded_rng, Activation, Mlp};
use ndarray::array;

fn main() -> corrgan::Result<()> {
    let mut rng = seeded_rng(0);
    let batch = RecordBatch::new(
        array![[1.0, 0.0, 1.0, 1.0], [0.0, 1.0, 1.0, 0.0], [1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]],
        array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
    )?;
    let ae = CorrNn::init(4, 2, 3, Activation::Tanh, Activation::Sigmoid, &mut rng)?;
    let loss = CorrNnLoss::default();
    let (_, analytic) = ae.loss_grads(&batch, &loss)?;
    let numeric = finite_diff_grad(|p: &CorrNn| p.loss(&batch, &loss).unwrap(), &ae, 1e-5)?;
    println!("autoencoder loss       max rel err {:.2e}", max_relative_error(&analytic, &numeric));

    let g = Generator::new(2, 2, &[5], 3, &mut rng)?;
    let d = Discriminator::new(6, &[7], &mut rng)?;
    let z = sample_noise(4, 2, &mut rng)?;
    let real = batch.joined();
    let synth = synthesize_batch(&g, &ae.decoder, &z, &batch.y, ConditionHalf::Decoded)?;
    let (_, analytic) = discriminator_grads(&d, &real, &synth)?;
    let numeric = finite_diff_grad(
        |net: &Mlp| discriminator_objective(&Discriminator { net: net.clone() }, &real, &synth).unwrap(),
        &d.net,
        1e-5,
    )?;
    println!("discriminator          max rel err {:.2e}", max_relative_error(&analytic, &numeric));

    let (_, analytic) = generator_grads(&g, &ae.decoder, &d, &z, &batch.y, ConditionHalf::Decoded)?;
    let joint = GeneratorDecoder { generator: g, decoder: ae.decoder.clone() };
    let numeric = finite_diff_grad(
        |p: &GeneratorDecoder| {
            generator_objective(&p.generator, &p.decoder, &d, &z, &batch.y, ConditionHalf::Decoded).unwrap()
        },
        &joint,
        1e-5,
    )?;
    println!("generator + decoder    max rel err {:.2e}", max_relative_error(&analytic, &numeric));
    Ok(())
}
