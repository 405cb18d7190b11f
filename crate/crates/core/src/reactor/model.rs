use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{vectorize, DocVector, Vocabulary};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textprep::TokenSeq;

/// Default document-frequency cutoff for the vocabulary.
pub const DEFAULT_MIN_DF: usize = 2;
const INIT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrainConfig<T> {
    pub learning_rate: T,
    pub epochs: usize,
    /// Ridge penalty on the weights; biases are not penalized.
    pub l2: T,
    pub seed: u64,
    /// Training stops once the loss changes by less than this between epochs.
    pub tol: T,
    /// Weight each sample by `N / (C * n_class)` in the loss.
    #[serde(default)]
    pub balance_classes: bool,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        TrainConfig {
            learning_rate: T::lit(0.1),
            epochs: 500,
            l2: T::lit(1e-3),
            seed: 42,
            tol: T::lit(1e-7),
            balance_classes: false,
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > T::zero()) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidInput(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidInput("epochs must be at least 1".into()));
        }
        if !(self.l2 >= T::zero()) {
            return Err(Error::InvalidInput(format!("l2 must be >= 0, got {}", self.l2)));
        }
        if !(self.tol >= T::zero()) {
            return Err(Error::InvalidInput(format!("tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrainStats<T> {
    pub final_loss: T,
    pub epochs_run: usize,
    pub converged: bool,
}

/// Multinomial logistic regression over count vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LrModel<T> {
    pub classes: Vec<String>,
    pub vocabulary: Vocabulary,
    /// `classes.len()` rows of `vocabulary.len()` columns.
    pub weights: Vec<Vec<T>>,
    pub bias: Vec<T>,
    pub train_config: TrainConfig<T>,
    /// Absent for models assembled by hand rather than trained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<TrainStats<T>>,
}

/// Max-subtracted softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total = exps.iter().fold(T::zero(), |a, &e| a + e);
    exps.into_iter().map(|e| e / total).collect()
}

fn log_sum_exp<T: Scalar>(logits: &[T]) -> T {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    max + logits.iter().fold(T::zero(), |a, &z| a + (z - max).exp()).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad<T> {
    pub loss: T,
    pub grad_weights: Vec<Vec<T>>,
    pub grad_bias: Vec<T>,
}

/// Maps labels to class indices.
pub fn encode_labels<S: AsRef<str>>(labels: &[S], classes: &[String]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| {
            classes
                .iter()
                .position(|c| c == l.as_ref())
                .ok_or_else(|| Error::InvalidInput(format!("label `{}` is not one of the classes", l.as_ref())))
        })
        .collect()
}

fn sample_weights<T: Scalar>(y: &[usize], n_classes: usize, balance: bool) -> Vec<T> {
    if !balance {
        return vec![T::one(); y.len()];
    }
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    let present = counts.iter().filter(|&&n| n > 0).count();
    y.iter()
        .map(|&c| T::from_count(y.len()) / (T::from_count(present) * T::from_count(counts[c])))
        .collect()
}

impl<T: Scalar> LrModel<T> {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// A model with the given parameters and no training history.
    pub fn from_parts(
        classes: Vec<String>,
        vocabulary: Vocabulary,
        weights: Vec<Vec<T>>,
        bias: Vec<T>,
        train_config: TrainConfig<T>,
    ) -> Result<Self> {
        let m = LrModel {
            classes,
            vocabulary,
            weights,
            bias,
            train_config,
            stats: None,
        };
        m.check_shapes()?;
        Ok(m)
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        let (c, v) = (self.classes.len(), self.vocabulary.len());
        if self.weights.len() != c || self.bias.len() != c {
            return Err(Error::Shape(format!(
                "{c} classes but {} weight rows and {} biases",
                self.weights.len(),
                self.bias.len()
            )));
        }
        if let Some(row) = self.weights.iter().find(|r| r.len() != v) {
            return Err(Error::Shape(format!(
                "weight row has {} columns, vocabulary has {v}",
                row.len()
            )));
        }
        Ok(())
    }

    pub fn logits(&self, x: &DocVector) -> Vec<T> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, &b)| {
                x.entries()
                    .iter()
                    .fold(b, |acc, &(i, count)| acc + row[i] * T::from_count(count as usize))
            })
            .collect()
    }

    /// Mean (optionally class-weighted) cross-entropy plus `l2/2 * ||W||^2`,
    /// with its analytic gradient.
    pub fn loss_and_grad(&self, x: &[DocVector], y: &[usize]) -> Result<LossGrad<T>> {
        self.check_shapes()?;
        if x.len() != y.len() {
            return Err(Error::Shape(format!("{} documents but {} labels", x.len(), y.len())));
        }
        if x.is_empty() {
            return Err(Error::Shape("no documents".into()));
        }
        let (c, v) = (self.classes.len(), self.vocabulary.len());
        if let Some(&bad) = y.iter().find(|&&k| k >= c) {
            return Err(Error::Shape(format!("label index {bad} out of range for {c} classes")));
        }
        if let Some(doc) = x.iter().find(|d| d.entries().iter().any(|&(i, _)| i >= v)) {
            return Err(Error::Shape(format!(
                "document index beyond vocabulary size {v}: {doc:?}"
            )));
        }
        let weights = sample_weights::<T>(y, c, self.train_config.balance_classes);
        let n = T::from_count(x.len());
        let mut loss = T::zero();
        let mut grad_w = vec![vec![T::zero(); v]; c];
        let mut grad_b = vec![T::zero(); c];
        for ((doc, &label), &w) in x.iter().zip(y).zip(&weights) {
            let z = self.logits(doc);
            loss += w * (log_sum_exp(&z) - z[label]);
            let p = softmax(&z);
            for k in 0..c {
                let indicator = if k == label { T::one() } else { T::zero() };
                let r = w * (p[k] - indicator) / n;
                grad_b[k] += r;
                for &(i, count) in doc.entries() {
                    grad_w[k][i] += r * T::from_count(count as usize);
                }
            }
        }
        loss /= n;
        let l2 = self.train_config.l2;
        if l2 > T::zero() {
            let mut sq = T::zero();
            for (g_row, w_row) in grad_w.iter_mut().zip(&self.weights) {
                for (g, &wv) in g_row.iter_mut().zip(w_row) {
                    sq += wv * wv;
                    *g += l2 * wv;
                }
            }
            loss += l2 * sq / T::lit(2.0);
        }
        Ok(LossGrad {
            loss,
            grad_weights: grad_w,
            grad_bias: grad_b,
        })
    }

    pub fn predict_vector(&self, x: &DocVector) -> Prediction<T> {
        let probabilities = softmax(&self.logits(x));
        let mut best = 0;
        for (k, &p) in probabilities.iter().enumerate() {
            if p > probabilities[best] {
                best = k;
            }
        }
        Prediction {
            label: self.classes[best].clone(),
            class_index: best,
            probabilities,
        }
    }

    /// Vectorizes with the model's vocabulary and takes the argmax class
    /// (first class wins ties).
    pub fn predict(&self, doc: &TokenSeq) -> Prediction<T> {
        self.predict_vector(&vectorize(doc, &self.vocabulary))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Prediction<T> {
    pub label: String,
    pub class_index: usize,
    pub probabilities: Vec<T>,
}

pub fn predict<T: Scalar>(model: &LrModel<T>, doc: &TokenSeq) -> Prediction<T> {
    model.predict(doc)
}

/// Full-batch gradient descent from a seeded small random initialization.
pub fn train<T: Scalar, S: AsRef<str>>(
    x: &[DocVector],
    labels: &[S],
    classes: &[String],
    vocabulary: &Vocabulary,
    config: &TrainConfig<T>,
) -> Result<LrModel<T>> {
    train_traced(x, labels, classes, vocabulary, config, |_, _| {})
}

/// Like [`train`], calling `on_epoch(epoch, loss)` with the loss at the start of every epoch.
pub fn train_traced<T: Scalar, S: AsRef<str>>(
    x: &[DocVector],
    labels: &[S],
    classes: &[String],
    vocabulary: &Vocabulary,
    config: &TrainConfig<T>,
    mut on_epoch: impl FnMut(usize, T),
) -> Result<LrModel<T>> {
    config.validate()?;
    let distinct: HashSet<&String> = classes.iter().collect();
    if classes.len() < 2 || distinct.len() != classes.len() {
        return Err(Error::InvalidInput(format!(
            "need at least two distinct classes, got {classes:?}"
        )));
    }
    if x.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} documents but {} labels",
            x.len(),
            labels.len()
        )));
    }
    if x.len() < classes.len() {
        return Err(Error::InvalidInput(format!(
            "{} training documents for {} classes",
            x.len(),
            classes.len()
        )));
    }
    let y = encode_labels(labels, classes)?;
    let seen: HashSet<usize> = y.iter().copied().collect();
    if seen.len() < 2 {
        return Err(Error::InvalidInput("training labels contain a single class".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (c, v) = (classes.len(), vocabulary.len());
    let weights = (0..c)
        .map(|_| {
            (0..v)
                .map(|_| T::lit(rng.random_range(-INIT_SCALE..INIT_SCALE)))
                .collect()
        })
        .collect();
    let mut model = LrModel::from_parts(
        classes.to_vec(),
        vocabulary.clone(),
        weights,
        vec![T::zero(); c],
        *config,
    )?;

    let lr = config.learning_rate;
    let mut previous: Option<T> = None;
    let mut epochs_run = 0;
    let mut converged = false;
    for epoch in 1..=config.epochs {
        let lg = model.loss_and_grad(x, &y)?;
        if !lg.loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        on_epoch(epoch, lg.loss);
        if previous.is_some_and(|p| (p - lg.loss).abs() < config.tol) {
            converged = true;
            break;
        }
        previous = Some(lg.loss);
        for (w_row, g_row) in model.weights.iter_mut().zip(&lg.grad_weights) {
            for (w, &g) in w_row.iter_mut().zip(g_row) {
                *w -= lr * g;
            }
        }
        for (b, &g) in model.bias.iter_mut().zip(&lg.grad_bias) {
            *b -= lr * g;
        }
        epochs_run = epoch;
    }
    let final_loss = model.loss_and_grad(x, &y)?.loss;
    if !final_loss.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: epochs_run + 1 });
    }
    model.stats = Some(TrainStats {
        final_loss,
        epochs_run,
        converged,
    });
    Ok(model)
}
