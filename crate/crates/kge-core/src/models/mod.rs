//! Embedding models over dictionary-encoded triples: parameter containers,
//! seeded initialization, scoring and analytic score gradients.
//!
//! Parameters are immutable during scoring; `score` and `gradient` are pure,
//! so concurrent evaluation against a shared reference is safe. Mutation
//! happens only inside the training loop's optimizer step.

mod checkpoint;
mod scoring;

pub use checkpoint::{load_checkpoint, save_checkpoint, verify_dictionaries, Manifest};
pub use scoring::{
    score_complex, score_convkb, score_distmult, score_hole, score_hole_fft, score_transe,
};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::Triple;
use crate::matrix::Matrix;

/// Which scoring function a parameter set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    TransE,
    DistMult,
    ComplEx,
    HolE,
    ConvKb,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::TransE,
        ModelKind::DistMult,
        ModelKind::ComplEx,
        ModelKind::HolE,
        ModelKind::ConvKb,
    ];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::TransE => write!(f, "transe"),
            ModelKind::DistMult => write!(f, "distmult"),
            ModelKind::ComplEx => write!(f, "complex"),
            ModelKind::HolE => write!(f, "hole"),
            ModelKind::ConvKb => write!(f, "convkb"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transe" => Ok(ModelKind::TransE),
            "distmult" => Ok(ModelKind::DistMult),
            "complex" => Ok(ModelKind::ComplEx),
            "hole" => Ok(ModelKind::HolE),
            "convkb" => Ok(ModelKind::ConvKb),
            other => Err(Error::UnknownLabel {
                kind: "model",
                label: other.to_string(),
            }),
        }
    }
}

/// Distance norm for the translation model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::L1 => write!(f, "l1"),
            Norm::L2 => write!(f, "l2"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "1" => Ok(Norm::L1),
            "l2" | "2" => Ok(Norm::L2),
            other => Err(Error::UnknownLabel {
                kind: "norm",
                label: other.to_string(),
            }),
        }
    }
}

/// One width-1 convolution filter over the stacked (h, r, t) columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvKbFilter {
    pub weights: [f64; 3],
    pub bias: f64,
}

/// Convolution filters plus the dense combination vector (length
/// `num_filters * k`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKbParams {
    pub filters: Vec<ConvKbFilter>,
    pub dense: Vec<f64>,
}

/// Model-specific knobs fixed at initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelOptions {
    /// TransE distance norm.
    pub transe_norm: Norm,
    /// Number of convolution filters for ConvKB.
    pub num_filters: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            transe_norm: Norm::L1,
            num_filters: 24,
        }
    }
}

/// All trainable state of one embedding model.
///
/// Entity and relation rows have width `k`, except for the complex model
/// which stores the real and imaginary halves concatenated (width `2k`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub kind: ModelKind,
    pub k: usize,
    pub transe_norm: Norm,
    pub entities: Matrix,
    pub relations: Matrix,
    pub convkb: Option<ConvKbParams>,
}

impl ModelParameters {
    /// Row width backing a dimension-`k` model of this kind.
    pub fn width_for(kind: ModelKind, k: usize) -> usize {
        match kind {
            ModelKind::ComplEx => 2 * k,
            _ => k,
        }
    }

    /// Draw fresh parameters from the seeded generator: every entry uniform
    /// in [-6/sqrt(k), +6/sqrt(k)], entity rows L2-normalized for TransE.
    /// The same seed always yields bit-identical parameters.
    pub fn init(
        kind: ModelKind,
        k: usize,
        seed: u64,
        num_entities: usize,
        num_relations: usize,
        options: &ModelOptions,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("embedding dimension k must be >= 1"));
        }
        if num_entities == 0 || num_relations == 0 {
            return Err(Error::invalid("entity and relation counts must be >= 1"));
        }
        if kind == ModelKind::ConvKb && options.num_filters == 0 {
            return Err(Error::invalid("convkb needs at least one filter"));
        }

        let width = Self::width_for(kind, k);
        let bound = 6.0 / (k as f64).sqrt();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        fn draw(rng: &mut ChaCha20Rng, bound: f64, len: usize) -> Vec<f64> {
            (0..len).map(|_| rng.random_range(-bound..=bound)).collect()
        }

        let mut entities = Matrix::from_vec(
            num_entities,
            width,
            draw(&mut rng, bound, num_entities * width),
        );
        let relations = Matrix::from_vec(
            num_relations,
            width,
            draw(&mut rng, bound, num_relations * width),
        );
        if kind == ModelKind::TransE {
            for i in 0..num_entities {
                normalize_row(entities.row_mut(i));
            }
        }

        let convkb = if kind == ModelKind::ConvKb {
            let filters = (0..options.num_filters)
                .map(|_| ConvKbFilter {
                    weights: [
                        rng.random_range(-bound..=bound),
                        rng.random_range(-bound..=bound),
                        rng.random_range(-bound..=bound),
                    ],
                    bias: rng.random_range(-bound..=bound),
                })
                .collect();
            let dense = draw(&mut rng, bound, options.num_filters * k);
            Some(ConvKbParams { filters, dense })
        } else {
            None
        };

        Ok(ModelParameters {
            kind,
            k,
            transe_norm: options.transe_norm,
            entities,
            relations,
            convkb,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.entities.rows()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.rows()
    }

    pub fn num_filters(&self) -> Option<usize> {
        self.convkb.as_ref().map(|c| c.filters.len())
    }

    /// Plausibility score of a triple; higher means more plausible. Pure:
    /// repeated calls return bit-identical results.
    pub fn score(&self, triple: Triple) -> f64 {
        match self.kind {
            ModelKind::TransE => score_transe(self, triple),
            ModelKind::DistMult => score_distmult(self, triple),
            ModelKind::ComplEx => score_complex(self, triple),
            ModelKind::HolE => score_hole(self, triple),
            ModelKind::ConvKb => score_convkb(self, triple),
        }
    }

    /// Analytic gradient of the score with respect to every parameter row
    /// the triple touches.
    pub fn gradient(&self, triple: Triple) -> Gradient {
        scoring::gradient(self, triple)
    }
}

/// Scale a row to unit L2 norm (no-op for a zero row).
pub(crate) fn normalize_row(row: &mut [f64]) {
    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in row {
            *v /= norm;
        }
    }
}

/// Sparse score gradient: one accumulated row per touched entity/relation id
/// (a triple with equal head and tail yields a single merged entity row).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gradient {
    pub entities: Vec<(usize, Vec<f64>)>,
    pub relations: Vec<(usize, Vec<f64>)>,
    pub convkb: Option<ConvKbGradient>,
}

/// Gradients for the ConvKB extras, same shapes as [`ConvKbParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKbGradient {
    pub filters: Vec<ConvKbFilter>,
    pub dense: Vec<f64>,
}
