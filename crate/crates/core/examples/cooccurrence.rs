//! Co-occurrence matrices and occurrence profiles on a small binary matrix
//! and on a planted-pool synthetic corpus.

use corrgan::data::{synth_correlated_dataset, SynthSpec};
use corrgan::metrics::{cooccurrence_error, cooccurrence_matrix, occurrence_mse, occurrence_probabilities};
use ndarray::array;

fn main() -> corrgan::Result<()> {
    let rows = array![[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]];
    let m = cooccurrence_matrix(rows.view(), 0.5)?;
    println!("co-occurrence (alpha 0.5):\n{:.4}", m.matrix);
    println!("occurrence: {:?}", occurrence_probabilities(rows.view())?.0.to_vec());

    let ds = synth_correlated_dataset(&SynthSpec { n_skills: 16, pool_size: 4, ..Default::default() })?;
    let x = &ds.data.x;
    let m = cooccurrence_matrix(x.view(), 0.5)?;
    let (mut inside, mut across, mut n_in, mut n_across) = (0.0, 0.0, 0, 0);
    for i in 0..x.ncols() {
        for j in (i + 1)..x.ncols() {
            let shared = (0..ds.pools.len()).any(|k| ds.in_pool(k, i) && ds.in_pool(k, j));
            if shared {
                inside += m.matrix[[i, j]];
                n_in += 1;
            } else {
                across += m.matrix[[i, j]];
                n_across += 1;
            }
        }
    }
    println!(
        "synthetic corpus: mean in-pool pair {:.4}, mean cross-pool pair {:.4}",
        inside / n_in.max(1) as f64,
        across / n_across.max(1) as f64
    );

    let half = x.nrows() / 2;
    let (a, b) = (x.slice(ndarray::s![..half, ..]), x.slice(ndarray::s![half.., ..]));
    let mse = occurrence_mse(&occurrence_probabilities(a)?, &occurrence_probabilities(b)?)?;
    let (signed, abs) = cooccurrence_error(&cooccurrence_matrix(a, 0.5)?, &cooccurrence_matrix(b, 0.5)?)?;
    println!("split-half baseline: occurrence mse {mse:.3e}, cooc error {signed:.3e} / {abs:.3e}");
    Ok(())
}
