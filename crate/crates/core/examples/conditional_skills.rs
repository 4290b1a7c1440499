//! Trains conditional CorrGAN on a planted-pool synthetic corpus, then
//! prints generated skill sets per profession next to each profession's
//! planted pool.
//!
//! cargo run --release --example conditional_skills -- [epochs]

use corrgan::data::{synth_correlated_dataset, SynthSpec};
use corrgan::gan::{train_corrgan, EvalCfg, TrainCfg};
use corrgan::metrics::skill_lines;
use corrgan::nn::seeded_rng;
use ndarray::{s, Array2, Axis};

fn main() -> corrgan::Result<()> {
    let epochs = std::env::args().nth(1).map_or(100, |a| a.parse().expect("epochs"));
    let ds = synth_correlated_dataset(&SynthSpec::default())?;
    let data = ds.data.records();
    let cfg = TrainCfg {
        epochs,
        latent_dim: 32,
        lr: 3e-4,
        overwrite_condition: true,
        ..Default::default()
    };
    let eval = EvalCfg { interval: epochs.max(1), ..Default::default() };
    let out = train_corrgan(&cfg, &eval, &data)?;
    if let Some(r) = out.reports.last() {
        println!("epoch {}: occurrence mse {:.3e}, cooc error {:.3e}\n", r.epoch, r.occurrence_mse, r.cooc_err_abs);
    }

    let vocab = &ds.data.vocab;
    let mut rng = seeded_rng(7);
    for (k, pool) in ds.pools.iter().enumerate() {
        let mut y = Array2::zeros((200, ds.pools.len()));
        y.column_mut(k).fill(1.0);
        let raw = out.model.generate_raw(&y, &mut rng)?;
        let x = raw.slice(s![.., ..data.x_dim()]).mapv(|v| if v >= 0.5 { 1.0 } else { 0.0 });
        let means = x.mean_axis(Axis(0)).expect("non-empty");
        let on = pool.iter().map(|&j| means[j]).sum::<f64>() / pool.len() as f64;
        let off = (means.sum() - on * pool.len() as f64) / (means.len() - pool.len()) as f64;
        let name = vocab.professions.token(k).unwrap_or("?");
        let planted: Vec<&str> = pool.iter().filter_map(|&j| vocab.skills.token(j)).collect();
        println!("{name}  (pool: {})", planted.join(", "));
        println!("  on-pool activation {on:.3}, off-pool {off:.3}");
        for line in skill_lines(x.slice(s![..3, ..]), &vocab.skills)? {
            println!("  {line}");
        }
    }
    Ok(())
}
