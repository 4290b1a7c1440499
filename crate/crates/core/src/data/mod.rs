//! Data ingestion: profile JSON, MNIST IDX files, synthetic corpora, and
//! model checkpoints.

mod checkpoint;
mod mnist;
mod profiles;
mod synth;

pub use checkpoint::{load_checkpoint, save_checkpoint, ModelBundle, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use mnist::{binarize_images, load_mnist, write_idx, MnistData, IMAGES_MAGIC, LABELS_MAGIC};
pub use profiles::{
    active_tokens, build_dictionaries, corpus_stats, load_profiles, parse_profiles, preprocess_profiles,
    vectorize_profiles, CorpusStats, Dictionary, DropReport, EncodedDataset, ProfileRecord, Vocabulary,
    MAX_SKILL_CHARS,
};
pub use synth::{synth_correlated_dataset, SynthDataset, SynthSpec};
pub(crate) use profiles::json_error;
