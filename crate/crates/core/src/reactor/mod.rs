//! Reaction classifier: count-vector features and multinomial logistic
//! regression trained by full-batch gradient descent.

mod model;
mod persist;
mod reactions;
mod vocab;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use model::{
    encode_labels, predict, softmax, train, train_traced, LossGrad, LrModel, Prediction, TrainConfig, TrainStats,
    DEFAULT_MIN_DF,
};
pub use persist::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT, MODEL_FORMAT_VERSION};
pub use reactions::{format_reactions_table, predicted_event_counts, window_proportions, EventReactions, WindowCounts};
pub use vocab::{build_vocabulary, vectorize, DocVector, Vocabulary};

/// Default share of each class held out for validation.
pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.2;

/// Seeded per-class split into `(train, held_out)` index lists, both ascending.
///
/// Each class contributes `round(n_class * fraction)` held-out items, but
/// never all of its items.
pub fn stratified_split<S: AsRef<str>>(labels: &[S], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidInput(format!(
            "split fraction must be in [0, 1), got {fraction}"
        )));
    }
    let mut classes: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut held) = (Vec::new(), Vec::new());
    for class in classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].as_ref() == class).collect();
        idx.shuffle(&mut rng);
        let take = ((idx.len() as f64 * fraction).round() as usize).min(idx.len().saturating_sub(1));
        held.extend_from_slice(&idx[..take]);
        train.extend_from_slice(&idx[take..]);
    }
    train.sort_unstable();
    held.sort_unstable();
    Ok((train, held))
}
