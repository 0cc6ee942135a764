//! From-scratch optimizers with sparse row state: plain SGD, Adagrad with a
//! per-element squared-gradient accumulator, and Adam with bias-corrected
//! moments. Rows untouched by a batch keep their state (including Adam's
//! per-row step counter) unchanged.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::models::{ConvKbGradient, ConvKbParams, Gradient, ModelParameters};

fn default_eps() -> f64 {
    1e-8
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd {
        lr: f64,
    },
    Adagrad {
        lr: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    Adam {
        lr: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

impl OptimizerKind {
    pub fn lr(&self) -> f64 {
        match self {
            OptimizerKind::Sgd { lr }
            | OptimizerKind::Adagrad { lr, .. }
            | OptimizerKind::Adam { lr, .. } => *lr,
        }
    }

    /// Build the named optimizer with defaults for everything but the rate.
    pub fn from_name(name: &str, lr: f64) -> Result<Self> {
        match name {
            "sgd" => Ok(OptimizerKind::Sgd { lr }),
            "adagrad" => Ok(OptimizerKind::Adagrad {
                lr,
                eps: default_eps(),
            }),
            "adam" => Ok(OptimizerKind::Adam {
                lr,
                beta1: default_beta1(),
                beta2: default_beta2(),
                eps: default_eps(),
            }),
            other => Err(Error::UnknownLabel {
                kind: "optimizer",
                label: other.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd { .. } => "sgd",
            OptimizerKind::Adagrad { .. } => "adagrad",
            OptimizerKind::Adam { .. } => "adam",
        }
    }
}

/// Accumulated d(loss)/d(parameter) for one batch. Rows are keyed by id so
/// repeated touches within the batch sum; the map order never influences the
/// result because updates are row-independent.
#[derive(Debug, Clone, Default)]
pub struct BatchGradient {
    pub entities: BTreeMap<usize, Vec<f64>>,
    pub relations: BTreeMap<usize, Vec<f64>>,
    pub convkb: Option<ConvKbGradient>,
}

impl BatchGradient {
    /// Add `coeff` times a score gradient.
    pub fn accumulate(&mut self, grad: &Gradient, coeff: f64) {
        for (id, row) in &grad.entities {
            let acc = self
                .entities
                .entry(*id)
                .or_insert_with(|| vec![0.0; row.len()]);
            for (a, g) in acc.iter_mut().zip(row) {
                *a += coeff * g;
            }
        }
        for (id, row) in &grad.relations {
            let acc = self
                .relations
                .entry(*id)
                .or_insert_with(|| vec![0.0; row.len()]);
            for (a, g) in acc.iter_mut().zip(row) {
                *a += coeff * g;
            }
        }
        if let Some(conv) = &grad.convkb {
            let acc = self.convkb.get_or_insert_with(|| ConvKbGradient {
                filters: vec![
                    crate::models::ConvKbFilter {
                        weights: [0.0; 3],
                        bias: 0.0,
                    };
                    conv.filters.len()
                ],
                dense: vec![0.0; conv.dense.len()],
            });
            for (a, g) in acc.filters.iter_mut().zip(&conv.filters) {
                for i in 0..3 {
                    a.weights[i] += coeff * g.weights[i];
                }
                a.bias += coeff * g.bias;
            }
            for (a, g) in acc.dense.iter_mut().zip(&conv.dense) {
                *a += coeff * g;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        let rows_finite =
            |m: &BTreeMap<usize, Vec<f64>>| m.values().all(|row| row.iter().all(|v| v.is_finite()));
        rows_finite(&self.entities)
            && rows_finite(&self.relations)
            && self.convkb.as_ref().is_none_or(|c| {
                c.dense.iter().all(|v| v.is_finite())
                    && c.filters
                        .iter()
                        .all(|f| f.bias.is_finite() && f.weights.iter().all(|v| v.is_finite()))
            })
    }
}

/// Flattened view of the ConvKB extras: filter weights and biases first,
/// dense vector after. Keeps the optimizer arithmetic uniform.
fn conv_flat_len(conv: &ConvKbParams) -> usize {
    conv.filters.len() * 4 + conv.dense.len()
}

fn conv_grad_flat(grad: &ConvKbGradient) -> Vec<f64> {
    let mut flat = Vec::with_capacity(grad.filters.len() * 4 + grad.dense.len());
    for f in &grad.filters {
        flat.extend_from_slice(&f.weights);
        flat.push(f.bias);
    }
    flat.extend_from_slice(&grad.dense);
    flat
}

fn conv_apply(conv: &mut ConvKbParams, mut update: impl FnMut(usize, f64) -> f64) {
    let mut idx = 0;
    for f in conv.filters.iter_mut() {
        for w in f.weights.iter_mut() {
            *w = update(idx, *w);
            idx += 1;
        }
        f.bias = update(idx, f.bias);
        idx += 1;
    }
    for w in conv.dense.iter_mut() {
        *w = update(idx, *w);
        idx += 1;
    }
}

#[derive(Debug, Clone)]
struct AdamRows {
    m: Matrix,
    v: Matrix,
    step: Vec<u64>,
}

impl AdamRows {
    fn new(rows: usize, cols: usize) -> Self {
        AdamRows {
            m: Matrix::zeros(rows, cols),
            v: Matrix::zeros(rows, cols),
            step: vec![0; rows],
        }
    }
}

#[derive(Debug, Clone)]
struct AdamDense {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

/// Mutable optimizer state matching one parameter set's shapes.
#[derive(Debug, Clone)]
pub enum OptimizerState {
    Sgd,
    Adagrad {
        entities: Matrix,
        relations: Matrix,
        convkb: Option<Vec<f64>>,
    },
    Adam {
        entities: AdamRowsBox,
        relations: AdamRowsBox,
        convkb: Option<AdamDenseBox>,
    },
}

// Concrete aliases keep the enum readable without exposing internals.
#[derive(Debug, Clone)]
pub struct AdamRowsBox(AdamRows);
#[derive(Debug, Clone)]
pub struct AdamDenseBox(AdamDense);

impl OptimizerState {
    pub fn new(kind: &OptimizerKind, params: &ModelParameters) -> Self {
        let (ne, nr, width) = (
            params.entities.rows(),
            params.relations.rows(),
            params.entities.cols(),
        );
        match kind {
            OptimizerKind::Sgd { .. } => OptimizerState::Sgd,
            OptimizerKind::Adagrad { .. } => OptimizerState::Adagrad {
                entities: Matrix::zeros(ne, width),
                relations: Matrix::zeros(nr, width),
                convkb: params.convkb.as_ref().map(|c| vec![0.0; conv_flat_len(c)]),
            },
            OptimizerKind::Adam { .. } => OptimizerState::Adam {
                entities: AdamRowsBox(AdamRows::new(ne, width)),
                relations: AdamRowsBox(AdamRows::new(nr, width)),
                convkb: params.convkb.as_ref().map(|c| {
                    AdamDenseBox(AdamDense {
                        m: vec![0.0; conv_flat_len(c)],
                        v: vec![0.0; conv_flat_len(c)],
                        step: 0,
                    })
                }),
            },
        }
    }
}

fn sgd_row(theta: &mut [f64], grad: &[f64], lr: f64) {
    for (t, g) in theta.iter_mut().zip(grad) {
        *t -= lr * g;
    }
}

fn adagrad_element(theta: &mut f64, g: f64, acc: &mut f64, lr: f64, eps: f64) {
    *acc += g * g;
    if g != 0.0 {
        *theta -= lr * g / (acc.sqrt() + eps);
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_element(
    theta: &mut f64,
    g: f64,
    m: &mut f64,
    v: &mut f64,
    t: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    *m = beta1 * *m + (1.0 - beta1) * g;
    *v = beta2 * *v + (1.0 - beta2) * g * g;
    let m_hat = *m / (1.0 - beta1.powi(t as i32));
    let v_hat = *v / (1.0 - beta2.powi(t as i32));
    *theta -= lr * m_hat / (v_hat.sqrt() + eps);
}

/// Apply one optimizer step for the rows (and ConvKB extras) the batch
/// touched. Fails on non-finite gradients so the caller can abort the epoch
/// with a diagnostic instead of silently corrupting parameters.
pub fn optimizer_step(
    params: &mut ModelParameters,
    grads: &BatchGradient,
    state: &mut OptimizerState,
    kind: &OptimizerKind,
) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::invalid("non-finite gradient"));
    }
    match (kind, state) {
        (OptimizerKind::Sgd { lr }, OptimizerState::Sgd) => {
            for (id, grad) in &grads.entities {
                sgd_row(params.entities.row_mut(*id), grad, *lr);
            }
            for (id, grad) in &grads.relations {
                sgd_row(params.relations.row_mut(*id), grad, *lr);
            }
            if let (Some(conv), Some(grad)) = (params.convkb.as_mut(), grads.convkb.as_ref()) {
                let flat = conv_grad_flat(grad);
                conv_apply(conv, |i, w| w - lr * flat[i]);
            }
        }
        (
            OptimizerKind::Adagrad { lr, eps },
            OptimizerState::Adagrad {
                entities,
                relations,
                convkb,
            },
        ) => {
            for (id, grad) in &grads.entities {
                let theta = params.entities.row_mut(*id);
                let acc = entities.row_mut(*id);
                for i in 0..grad.len() {
                    adagrad_element(&mut theta[i], grad[i], &mut acc[i], *lr, *eps);
                }
            }
            for (id, grad) in &grads.relations {
                let theta = params.relations.row_mut(*id);
                let acc = relations.row_mut(*id);
                for i in 0..grad.len() {
                    adagrad_element(&mut theta[i], grad[i], &mut acc[i], *lr, *eps);
                }
            }
            if let (Some(conv), Some(grad), Some(acc)) = (
                params.convkb.as_mut(),
                grads.convkb.as_ref(),
                convkb.as_mut(),
            ) {
                let flat = conv_grad_flat(grad);
                conv_apply(conv, |i, mut w| {
                    adagrad_element(&mut w, flat[i], &mut acc[i], *lr, *eps);
                    w
                });
            }
        }
        (
            OptimizerKind::Adam {
                lr,
                beta1,
                beta2,
                eps,
            },
            OptimizerState::Adam {
                entities,
                relations,
                convkb,
            },
        ) => {
            let rows =
                |theta_m: &mut Matrix, grads: &BTreeMap<usize, Vec<f64>>, st: &mut AdamRows| {
                    for (id, grad) in grads {
                        st.step[*id] += 1;
                        let t = st.step[*id];
                        let theta = theta_m.row_mut(*id);
                        let m = st.m.row_mut(*id);
                        let v = st.v.row_mut(*id);
                        for i in 0..grad.len() {
                            adam_element(
                                &mut theta[i],
                                grad[i],
                                &mut m[i],
                                &mut v[i],
                                t,
                                *lr,
                                *beta1,
                                *beta2,
                                *eps,
                            );
                        }
                    }
                };
            rows(&mut params.entities, &grads.entities, &mut entities.0);
            rows(&mut params.relations, &grads.relations, &mut relations.0);
            if let (Some(conv), Some(grad), Some(st)) = (
                params.convkb.as_mut(),
                grads.convkb.as_ref(),
                convkb.as_mut(),
            ) {
                st.0.step += 1;
                let t = st.0.step;
                let flat = conv_grad_flat(grad);
                let (m, v) = (&mut st.0.m, &mut st.0.v);
                conv_apply(conv, |i, mut w| {
                    adam_element(
                        &mut w, flat[i], &mut m[i], &mut v[i], t, *lr, *beta1, *beta2, *eps,
                    );
                    w
                });
            }
        }
        _ => {
            return Err(Error::invalid(
                "optimizer state does not match optimizer kind",
            ))
        }
    }
    Ok(())
}
