//! Synthetic profession/skill corpora with planted skill pools.
//!
//! Each profession owns a random pool of skills. A sample picks a profession
//! uniformly, switches every pool skill on with `in_pool_prob` and every
//! other skill with `background_prob`. The pools are kept as ground truth.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::profiles::{Dictionary, EncodedDataset, Vocabulary};
use crate::error::{Error, Result};
use crate::nn::seeded_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n_professions: usize,
    pub n_skills: usize,
    pub pool_size: usize,
    pub in_pool_prob: f64,
    pub background_prob: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_professions: 6,
            n_skills: 64,
            pool_size: 8,
            in_pool_prob: 0.8,
            background_prob: 0.05,
            n_samples: 5000,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("in_pool_prob", self.in_pool_prob), ("background_prob", self.background_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.n_professions == 0 || self.n_skills == 0 {
            return Err(Error::InvalidArgument("need at least one profession and one skill".into()));
        }
        if self.pool_size == 0 || self.pool_size > self.n_skills {
            return Err(Error::InvalidArgument(format!(
                "pool size {} must be in 1..={}",
                self.pool_size, self.n_skills
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub data: EncodedDataset,
    /// Sorted skill indices of each profession's pool.
    pub pools: Vec<Vec<usize>>,
    /// Profession index of each sample.
    pub labels: Vec<usize>,
}

impl SynthDataset {
    pub fn in_pool(&self, profession: usize, skill: usize) -> bool {
        self.pools[profession].binary_search(&skill).is_ok()
    }
}

fn padded_names(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("{prefix}_{i:0width$}")).collect()
}

pub fn synth_correlated_dataset(spec: &SynthSpec) -> Result<SynthDataset> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let pools: Vec<Vec<usize>> = (0..spec.n_professions)
        .map(|_| {
            let mut pool = sample(&mut rng, spec.n_skills, spec.pool_size).into_vec();
            pool.sort_unstable();
            pool
        })
        .collect();
    let mut membership = Array2::from_elem((spec.n_professions, spec.n_skills), false);
    for (p, pool) in pools.iter().enumerate() {
        for &s in pool {
            membership[[p, s]] = true;
        }
    }

    let mut x = Array2::zeros((spec.n_samples, spec.n_skills));
    let mut y = Array2::zeros((spec.n_samples, spec.n_professions));
    let mut labels = Vec::with_capacity(spec.n_samples);
    for i in 0..spec.n_samples {
        let p = rng.random_range(0..spec.n_professions);
        labels.push(p);
        y[[i, p]] = 1.0;
        for s in 0..spec.n_skills {
            let prob = if membership[[p, s]] {
                spec.in_pool_prob
            } else {
                spec.background_prob
            };
            if rng.random_bool(prob) {
                x[[i, s]] = 1.0;
            }
        }
    }

    let vocab = Vocabulary {
        skills: Dictionary::from(padded_names("skill", spec.n_skills)),
        professions: Dictionary::from(padded_names("profession", spec.n_professions)),
    };
    Ok(SynthDataset {
        data: EncodedDataset { x, y, vocab },
        pools,
        labels,
    })
}
