//! Mini-batch training: negative sampling, losses, LP regularization,
//! optimizers, the training loop itself, and random hyperparameter search.
//!
//! Training is single-threaded and bit-reproducible: every random choice
//! flows from the config seed through fixed ChaCha streams (0: parameter
//! init, 1: epoch shuffles, 2: negative sampling).

mod loss;
mod negative;
mod optimizer;
mod search;

pub use loss::{loss, loss_gradients, sigmoid, softplus, LossKind};
pub use negative::sample_negatives;
pub use optimizer::{optimizer_step, BatchGradient, OptimizerKind, OptimizerState};
pub use search::{random_search, write_trial_log, SearchOutcome, SearchSpace, TrialRecord};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{KnowledgeGraph, SplitTag, Triple};
use crate::models::{ModelKind, ModelOptions, ModelParameters, Norm};

/// LP regularization over the embedding rows a batch touches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum RegularizerKind {
    None,
    Lp { lambda: f64, p: u32 },
}

impl RegularizerKind {
    pub fn lp_default() -> Self {
        RegularizerKind::Lp { lambda: 1e-5, p: 2 }
    }
}

/// Penalty lambda * sum |theta|^p over one row.
pub fn lp_penalty(row: &[f64], lambda: f64, p: u32) -> f64 {
    lambda * row.iter().map(|t| t.abs().powi(p as i32)).sum::<f64>()
}

/// Add d(penalty)/d(theta) = lambda * p * |theta|^(p-1) * sign(theta).
pub fn lp_gradient_into(row: &[f64], lambda: f64, p: u32, out: &mut [f64]) {
    for (t, g) in row.iter().zip(out.iter_mut()) {
        *g += lambda * p as f64 * t.abs().powi(p as i32 - 1) * t.signum();
    }
}

fn default_batches() -> usize {
    10
}
fn default_epochs() -> usize {
    200
}
fn default_k() -> usize {
    100
}
fn default_eta() -> usize {
    5
}
fn default_margin() -> f64 {
    1.0
}
fn default_loss() -> LossKind {
    LossKind::Pairwise
}
fn default_optimizer() -> OptimizerKind {
    OptimizerKind::Adagrad { lr: 0.1, eps: 1e-8 }
}
fn default_regularizer() -> RegularizerKind {
    RegularizerKind::None
}
fn default_norm() -> Norm {
    Norm::L1
}
fn default_filters() -> usize {
    24
}

/// Everything the training loop needs besides the data and the model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub batches_count: usize,
    pub seed: u64,
    pub epochs: usize,
    pub k: usize,
    /// Negatives generated per positive.
    pub eta: usize,
    pub loss: LossKind,
    /// Margin for the hinge losses.
    pub margin: f64,
    pub regularizer: RegularizerKind,
    pub optimizer: OptimizerKind,
    pub verbose: bool,
    /// TransE distance norm.
    pub transe_norm: Norm,
    /// ConvKB filter count.
    pub num_filters: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            batches_count: default_batches(),
            seed: 0,
            epochs: default_epochs(),
            k: default_k(),
            eta: default_eta(),
            loss: default_loss(),
            margin: default_margin(),
            regularizer: default_regularizer(),
            optimizer: default_optimizer(),
            verbose: false,
            transe_norm: default_norm(),
            num_filters: default_filters(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        if self.eta == 0 {
            return Err(Error::invalid("eta must be >= 1"));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be >= 1"));
        }
        if self.batches_count == 0 {
            return Err(Error::invalid("batches_count must be >= 1"));
        }
        let lr = self.optimizer.lr();
        if lr.is_nan() || lr <= 0.0 {
            return Err(Error::invalid("learning rate must be > 0"));
        }
        if matches!(self.loss, LossKind::Pairwise | LossKind::AbsoluteMargin)
            && (self.margin.is_nan() || self.margin <= 0.0)
        {
            return Err(Error::invalid("margin must be > 0 for hinge losses"));
        }
        if let RegularizerKind::Lp { lambda, p } = self.regularizer {
            if !(1..=3).contains(&p) {
                return Err(Error::invalid("regularizer p must be 1, 2 or 3"));
            }
            if lambda < 0.0 {
                return Err(Error::invalid("regularizer lambda must be >= 0"));
            }
        }
        if self.num_filters == 0 {
            return Err(Error::invalid("num_filters must be >= 1"));
        }
        Ok(())
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            transe_norm: self.transe_norm,
            num_filters: self.num_filters,
        }
    }
}

/// Trained parameters plus the per-epoch mean loss (per positive triple).
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParameters,
    pub loss_trace: Vec<f64>,
}

/// Positives to train on: the train split when the graph is tagged,
/// otherwise every triple.
pub fn training_positives(kg: &KnowledgeGraph) -> Vec<Triple> {
    if kg.tags().is_some() {
        kg.split_triples(SplitTag::Train)
    } else {
        kg.triples().to_vec()
    }
}

/// Train a model of `kind` on the graph's train split.
///
/// Each epoch shuffles the positives and walks `batches_count` near-equal
/// contiguous chunks; per batch it scores positives and sampled negatives,
/// accumulates loss and regularizer gradients, applies one optimizer step,
/// and (TransE only) re-normalizes the touched entity rows.
pub fn train(
    kg: &KnowledgeGraph,
    kind: ModelKind,
    config: &TrainingConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let positives = training_positives(kg);
    if positives.is_empty() {
        return Err(Error::invalid("training split is empty"));
    }
    let num_entities = kg.entities().len();

    let mut params = ModelParameters::init(
        kind,
        config.k,
        config.seed,
        num_entities,
        kg.relations().len(),
        &config.model_options(),
    )?;
    let mut shuffle_rng = ChaCha20Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(1);
    let mut negative_rng = ChaCha20Rng::seed_from_u64(config.seed);
    negative_rng.set_stream(2);

    let mut state = OptimizerState::new(&config.optimizer, &params);
    let mut shuffled = positives.clone();
    let mut loss_trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        shuffled.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;

        for batch in chunk_batches(&shuffled, config.batches_count) {
            if batch.is_empty() {
                continue;
            }
            let negatives = sample_negatives(batch, config.eta, num_entities, &mut negative_rng)?;

            let mut grads = BatchGradient::default();
            let mut batch_loss = 0.0;
            for (i, positive) in batch.iter().enumerate() {
                let f_pos = params.score(*positive);
                let negs = &negatives[i * config.eta..(i + 1) * config.eta];
                let f_negs: Vec<f64> = negs.iter().map(|n| params.score(*n)).collect();
                batch_loss += loss(f_pos, &f_negs, config.loss, config.margin);
                let (d_pos, d_negs) = loss_gradients(f_pos, &f_negs, config.loss, config.margin);
                if d_pos != 0.0 {
                    grads.accumulate(&params.gradient(*positive), d_pos);
                }
                for (neg, d_neg) in negs.iter().zip(d_negs) {
                    if d_neg != 0.0 {
                        grads.accumulate(&params.gradient(*neg), d_neg);
                    }
                }
            }

            if let RegularizerKind::Lp { lambda, p } = config.regularizer {
                // Touched rows only; entry() keeps rows already in the batch
                // gradient and creates zero rows for score-gradient-free ones.
                let (entity_ids, relation_ids) = crate::kg::used_ids(
                    &batch.iter().chain(&negatives).copied().collect::<Vec<_>>(),
                );
                let width = params.entities.cols();
                let mut ids: Vec<usize> = entity_ids.into_iter().collect();
                ids.sort_unstable();
                for id in ids {
                    let row = params.entities.row(id);
                    batch_loss += lp_penalty(row, lambda, p);
                    let acc = grads.entities.entry(id).or_insert_with(|| vec![0.0; width]);
                    lp_gradient_into(row, lambda, p, acc);
                }
                let mut ids: Vec<usize> = relation_ids.into_iter().collect();
                ids.sort_unstable();
                for id in ids {
                    let row = params.relations.row(id);
                    batch_loss += lp_penalty(row, lambda, p);
                    let acc = grads
                        .relations
                        .entry(id)
                        .or_insert_with(|| vec![0.0; width]);
                    lp_gradient_into(row, lambda, p, acc);
                }
            }

            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    message: format!("non-finite batch loss; trace so far: {loss_trace:?}"),
                });
            }
            epoch_loss += batch_loss;

            let touched: Vec<usize> = grads.entities.keys().copied().collect();
            optimizer_step(&mut params, &grads, &mut state, &config.optimizer).map_err(|e| {
                Error::Diverged {
                    epoch,
                    message: e.to_string(),
                }
            })?;
            if kind == ModelKind::TransE {
                for id in touched {
                    crate::models::normalize_row(params.entities.row_mut(id));
                }
            }
        }

        let mean = epoch_loss / positives.len() as f64;
        loss_trace.push(mean);
        if config.verbose {
            eprintln!("epoch {epoch}: mean loss {mean:.6}");
        }
    }

    Ok(TrainOutcome { params, loss_trace })
}

/// Split a shuffled slice into `count` near-equal contiguous chunks (sizes
/// differ by at most one; trailing chunks may be empty when count > len).
fn chunk_batches(positives: &[Triple], count: usize) -> impl Iterator<Item = &[Triple]> {
    let n = positives.len();
    let base = n / count;
    let rem = n % count;
    let mut start = 0;
    (0..count).map(move |i| {
        let size = base + usize::from(i < rem);
        let chunk = &positives[start..start + size];
        start += size;
        chunk
    })
}
