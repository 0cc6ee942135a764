//! Loss functions over positive/negative scores, with the derivatives the
//! training loop chains through the score gradients.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// sum over negatives of max(0, margin - f_pos + f_neg).
    Pairwise,
    /// log(1 + exp(-f_pos)) + sum over negatives of log(1 + exp(f_neg)).
    Nll,
    /// max(0, margin - f_pos) + sum over negatives of max(0, f_neg).
    AbsoluteMargin,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossKind::Pairwise => write!(f, "pairwise"),
            LossKind::Nll => write!(f, "nll"),
            LossKind::AbsoluteMargin => write!(f, "absolute_margin"),
        }
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "pairwise" => Ok(LossKind::Pairwise),
            "nll" => Ok(LossKind::Nll),
            "absolute_margin" => Ok(LossKind::AbsoluteMargin),
            other => Err(Error::UnknownLabel {
                kind: "loss",
                label: other.to_string(),
            }),
        }
    }
}

/// Overflow-safe log(1 + exp(x)).
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Overflow-safe logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Loss of one positive against its negatives.
pub fn loss(f_pos: f64, f_negs: &[f64], kind: LossKind, margin: f64) -> f64 {
    match kind {
        LossKind::Pairwise => f_negs
            .iter()
            .map(|f_neg| (margin - f_pos + f_neg).max(0.0))
            .sum(),
        LossKind::Nll => softplus(-f_pos) + f_negs.iter().map(|f| softplus(*f)).sum::<f64>(),
        LossKind::AbsoluteMargin => {
            (margin - f_pos).max(0.0) + f_negs.iter().map(|f| f.max(0.0)).sum::<f64>()
        }
    }
}

/// Derivatives of [`loss`] with respect to the positive score and each
/// negative score. Hinge subgradients at the kink are 0.
pub fn loss_gradients(f_pos: f64, f_negs: &[f64], kind: LossKind, margin: f64) -> (f64, Vec<f64>) {
    match kind {
        LossKind::Pairwise => {
            let mut d_pos = 0.0;
            let d_negs = f_negs
                .iter()
                .map(|f_neg| {
                    if margin - f_pos + f_neg > 0.0 {
                        d_pos -= 1.0;
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            (d_pos, d_negs)
        }
        LossKind::Nll => (
            -sigmoid(-f_pos),
            f_negs.iter().map(|f| sigmoid(*f)).collect(),
        ),
        LossKind::AbsoluteMargin => (
            if margin - f_pos > 0.0 { -1.0 } else { 0.0 },
            f_negs
                .iter()
                .map(|f| if *f > 0.0 { 1.0 } else { 0.0 })
                .collect(),
        ),
    }
}
