//! Seeded random search over a hyperparameter space, scored by filtered MRR
//! on the validation split.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{evaluate_ranking, RankMode};
use crate::kg::{KnowledgeGraph, SplitTag};
use crate::models::ModelKind;
use crate::training::{train, LossKind, OptimizerKind, RegularizerKind, TrainingConfig};

/// Candidate lists, one per hyperparameter. Every list must be non-empty;
/// each trial draws one entry from each, uniformly and independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub batches_count: Vec<usize>,
    pub seed: Vec<u64>,
    pub epochs: Vec<usize>,
    pub k: Vec<usize>,
    pub eta: Vec<usize>,
    pub loss: Vec<LossKind>,
    pub optimizer: Vec<String>,
    pub lr: Vec<f64>,
    pub regularizer: Vec<String>,
    pub verbose: Vec<bool>,
    /// Default trial budget; a caller-supplied count takes precedence.
    pub trials: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            batches_count: vec![10, 50, 100],
            seed: vec![0, 555],
            epochs: vec![100, 200],
            k: vec![16, 32],
            eta: vec![5, 10],
            loss: vec![LossKind::Pairwise, LossKind::Nll, LossKind::AbsoluteMargin],
            optimizer: vec!["adam".into(), "adagrad".into()],
            lr: vec![0.1, 0.01],
            regularizer: vec!["none".into(), "lp".into()],
            verbose: vec![false],
            trials: 5,
        }
    }
}

impl SearchSpace {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("search space serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    fn validate(&self) -> Result<()> {
        let lens = [
            ("batches_count", self.batches_count.len()),
            ("seed", self.seed.len()),
            ("epochs", self.epochs.len()),
            ("k", self.k.len()),
            ("eta", self.eta.len()),
            ("loss", self.loss.len()),
            ("optimizer", self.optimizer.len()),
            ("lr", self.lr.len()),
            ("regularizer", self.regularizer.len()),
            ("verbose", self.verbose.len()),
        ];
        for (name, len) in lens {
            if len == 0 {
                return Err(Error::invalid(format!(
                    "search space list {name:?} is empty"
                )));
            }
        }
        Ok(())
    }

    /// Draw one configuration; fields are sampled in declaration order so a
    /// seeded run replays exactly.
    fn sample<R: Rng>(&self, rng: &mut R) -> Result<TrainingConfig> {
        let pick = |rng: &mut R, len: usize| rng.random_range(0..len);
        let batches_count = self.batches_count[pick(rng, self.batches_count.len())];
        let seed = self.seed[pick(rng, self.seed.len())];
        let epochs = self.epochs[pick(rng, self.epochs.len())];
        let k = self.k[pick(rng, self.k.len())];
        let eta = self.eta[pick(rng, self.eta.len())];
        let loss = self.loss[pick(rng, self.loss.len())];
        let optimizer_name = &self.optimizer[pick(rng, self.optimizer.len())];
        let lr = self.lr[pick(rng, self.lr.len())];
        let regularizer_name = &self.regularizer[pick(rng, self.regularizer.len())];
        let verbose = self.verbose[pick(rng, self.verbose.len())];

        let optimizer = OptimizerKind::from_name(optimizer_name, lr)?;
        let regularizer = match regularizer_name.as_str() {
            "none" => RegularizerKind::None,
            "lp" => RegularizerKind::lp_default(),
            other => {
                return Err(Error::UnknownLabel {
                    kind: "regularizer",
                    label: other.to_string(),
                })
            }
        };
        Ok(TrainingConfig {
            batches_count,
            seed,
            epochs,
            k,
            eta,
            loss,
            optimizer,
            regularizer,
            verbose,
            ..TrainingConfig::default()
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub config: TrainingConfig,
    /// Filtered MRR on the validation split; `None` when the trial failed.
    pub valid_mrr: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best_trial: usize,
    pub best_config: TrainingConfig,
    pub best_mrr: f64,
    pub trials: Vec<TrialRecord>,
}

/// Run `trials` random draws, train each, and return the configuration with
/// the best validation MRR (ties keep the earliest trial). Failed trials are
/// logged and skipped.
pub fn random_search(
    kg: &KnowledgeGraph,
    kind: ModelKind,
    space: &SearchSpace,
    trials: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    space.validate()?;
    let valid = kg.split_triples(SplitTag::Valid);
    if valid.is_empty() {
        return Err(Error::invalid(
            "random search needs a non-empty validation split (run split first)",
        ));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(3);

    let mut records = Vec::with_capacity(trials);
    let mut best: Option<(usize, f64)> = None;
    for trial in 0..trials {
        let config = space.sample(&mut rng)?;
        match train(kg, kind, &config) {
            Ok(outcome) => {
                let report = evaluate_ranking(&outcome.params, kg, &valid, RankMode::Filtered)?;
                let mrr = report.mrr;
                if best.is_none_or(|(_, b)| mrr > b) {
                    best = Some((trial, mrr));
                }
                records.push(TrialRecord {
                    trial,
                    config,
                    valid_mrr: Some(mrr),
                    error: None,
                });
            }
            Err(e) => records.push(TrialRecord {
                trial,
                config,
                valid_mrr: None,
                error: Some(e.to_string()),
            }),
        }
    }

    let (best_trial, best_mrr) = best.ok_or_else(|| Error::invalid("every search trial failed"))?;
    Ok(SearchOutcome {
        best_trial,
        best_config: records[best_trial].config.clone(),
        best_mrr,
        trials: records,
    })
}

/// Trial log TSV: trial-id TAB sampled-config (compact JSON) TAB valid-MRR.
pub fn write_trial_log(outcome: &SearchOutcome, path: &Path) -> Result<()> {
    let mut out = String::from("trial\tconfig\tvalid_mrr\n");
    for record in &outcome.trials {
        let config = serde_json::to_string(&record.config).expect("config serializes");
        let mrr = match (record.valid_mrr, &record.error) {
            (Some(v), _) => format!("{v:.6}"),
            (None, Some(e)) => format!("failed: {e}"),
            (None, None) => "failed".to_string(),
        };
        out.push_str(&format!("{}\t{}\t{}\n", record.trial, config, mrr));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
