//! The five scoring functions and their analytic gradients.
//!
//! Conventions fixed here: the L1 subgradient of |x| at 0 is 0, the ReLU
//! subgradient at 0 is 0, and an exact TransE translation has zero gradient.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::kg::Triple;
use crate::models::{ConvKbFilter, ConvKbGradient, Gradient, ModelKind, ModelParameters, Norm};

fn rows(params: &ModelParameters, triple: Triple) -> (&[f64], &[f64], &[f64]) {
    (
        params.entities.row(triple.subject),
        params.relations.row(triple.predicate),
        params.entities.row(triple.object),
    )
}

/// Translation score: -||h + r - t|| with the configured norm.
pub fn score_transe(params: &ModelParameters, triple: Triple) -> f64 {
    let (h, r, t) = rows(params, triple);
    match params.transe_norm {
        Norm::L1 => -h
            .iter()
            .zip(r)
            .zip(t)
            .map(|((h, r), t)| (h + r - t).abs())
            .sum::<f64>(),
        Norm::L2 => -h
            .iter()
            .zip(r)
            .zip(t)
            .map(|((h, r), t)| {
                let d = h + r - t;
                d * d
            })
            .sum::<f64>()
            .sqrt(),
    }
}

/// Trilinear product: sum_i r_i (h_i t_i). Grouping the entity product first
/// makes the subject/object symmetry exact, not just up to rounding.
pub fn score_distmult(params: &ModelParameters, triple: Triple) -> f64 {
    let (h, r, t) = rows(params, triple);
    h.iter().zip(r).zip(t).map(|((h, r), t)| r * (h * t)).sum()
}

/// Hermitian trilinear product: Re(sum_i r_i h_i conj(t_i)) over rows stored
/// as real half followed by imaginary half.
pub fn score_complex(params: &ModelParameters, triple: Triple) -> f64 {
    let (h, r, t) = rows(params, triple);
    let k = params.k;
    let (hr, hi) = h.split_at(k);
    let (rr, ri) = r.split_at(k);
    let (tr, ti) = t.split_at(k);
    let mut f = 0.0;
    for j in 0..k {
        f += rr[j] * (hr[j] * tr[j] + hi[j] * ti[j]) + ri[j] * (hr[j] * ti[j] - hi[j] * tr[j]);
    }
    f
}

/// Circular correlation of h and t: out[i] = sum_j h[j] t[(i + j) mod k].
fn circular_correlation(h: &[f64], t: &[f64]) -> Vec<f64> {
    let k = h.len();
    (0..k)
        .map(|i| (0..k).map(|j| h[j] * t[(i + j) % k]).sum())
        .collect()
}

/// Holographic score via the direct O(k^2) correlation; this is the
/// canonical path.
pub fn score_hole(params: &ModelParameters, triple: Triple) -> f64 {
    let (h, r, t) = rows(params, triple);
    circular_correlation(h, t)
        .iter()
        .zip(r)
        .map(|(c, w)| w * c)
        .sum()
}

/// Holographic score via FFT: the correlation equals the inverse transform
/// of conj(F(h)) .* F(t), with the 1/k factor living in the inverse
/// transform. Must agree with [`score_hole`] to 1e-9.
pub fn score_hole_fft(params: &ModelParameters, triple: Triple) -> f64 {
    let (h, r, t) = rows(params, triple);
    let k = h.len();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(k);
    let inverse = planner.plan_fft_inverse(k);

    let mut hc: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut tc: Vec<Complex64> = t.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut hc);
    forward.process(&mut tc);
    let mut prod: Vec<Complex64> = hc.iter().zip(&tc).map(|(a, b)| a.conj() * b).collect();
    inverse.process(&mut prod);

    prod.iter().zip(r).map(|(c, w)| w * c.re / k as f64).sum()
}

/// Convolutional score: each width-1 filter slides over the k rows of the
/// stacked [h, r, t] columns through a ReLU; the concatenated feature maps
/// are combined by the dense vector.
pub fn score_convkb(params: &ModelParameters, triple: Triple) -> f64 {
    let (h, r, t) = rows(params, triple);
    let conv = params
        .convkb
        .as_ref()
        .expect("convkb parameters present for convkb scoring");
    let k = params.k;
    let mut f = 0.0;
    for (m, filter) in conv.filters.iter().enumerate() {
        let [w1, w2, w3] = filter.weights;
        for i in 0..k {
            let z = w1 * h[i] + w2 * r[i] + w3 * t[i] + filter.bias;
            if z > 0.0 {
                f += z * conv.dense[m * k + i];
            }
        }
    }
    f
}

/// Gradient of the score for the owning model kind.
pub fn gradient(params: &ModelParameters, triple: Triple) -> Gradient {
    let (h, r, t) = rows(params, triple);
    let width = h.len();
    let k = params.k;

    let mut gh = vec![0.0; width];
    let mut gr = vec![0.0; width];
    let mut gt = vec![0.0; width];
    let mut convkb = None;

    match params.kind {
        ModelKind::TransE => match params.transe_norm {
            Norm::L1 => {
                for i in 0..width {
                    let d = h[i] + r[i] - t[i];
                    let s = if d > 0.0 {
                        1.0
                    } else if d < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    gh[i] = -s;
                    gr[i] = -s;
                    gt[i] = s;
                }
            }
            Norm::L2 => {
                let diff: Vec<f64> = (0..width).map(|i| h[i] + r[i] - t[i]).collect();
                let norm = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for i in 0..width {
                        gh[i] = -diff[i] / norm;
                        gr[i] = -diff[i] / norm;
                        gt[i] = diff[i] / norm;
                    }
                }
            }
        },
        ModelKind::DistMult => {
            for i in 0..width {
                gh[i] = r[i] * t[i];
                gr[i] = h[i] * t[i];
                gt[i] = r[i] * h[i];
            }
        }
        ModelKind::ComplEx => {
            let (hr, hi) = h.split_at(k);
            let (rr, ri) = r.split_at(k);
            let (tr, ti) = t.split_at(k);
            for j in 0..k {
                gh[j] = rr[j] * tr[j] + ri[j] * ti[j];
                gh[k + j] = rr[j] * ti[j] - ri[j] * tr[j];
                gr[j] = hr[j] * tr[j] + hi[j] * ti[j];
                gr[k + j] = hr[j] * ti[j] - hi[j] * tr[j];
                gt[j] = rr[j] * hr[j] - ri[j] * hi[j];
                gt[k + j] = rr[j] * hi[j] + ri[j] * hr[j];
            }
        }
        ModelKind::HolE => {
            gr = circular_correlation(h, t);
            for j in 0..k {
                gh[j] = (0..k).map(|i| r[i] * t[(i + j) % k]).sum();
            }
            for m in 0..k {
                gt[m] = (0..k).map(|j| r[(m + k - j) % k] * h[j]).sum();
            }
        }
        ModelKind::ConvKb => {
            let conv = params
                .convkb
                .as_ref()
                .expect("convkb parameters present for convkb gradient");
            let mut filter_grads = vec![
                ConvKbFilter {
                    weights: [0.0; 3],
                    bias: 0.0,
                };
                conv.filters.len()
            ];
            let mut dense_grad = vec![0.0; conv.dense.len()];
            for (m, filter) in conv.filters.iter().enumerate() {
                let [w1, w2, w3] = filter.weights;
                for i in 0..k {
                    let z = w1 * h[i] + w2 * r[i] + w3 * t[i] + filter.bias;
                    if z > 0.0 {
                        dense_grad[m * k + i] = z;
                        let g = conv.dense[m * k + i];
                        gh[i] += g * w1;
                        gr[i] += g * w2;
                        gt[i] += g * w3;
                        filter_grads[m].weights[0] += g * h[i];
                        filter_grads[m].weights[1] += g * r[i];
                        filter_grads[m].weights[2] += g * t[i];
                        filter_grads[m].bias += g;
                    }
                }
            }
            convkb = Some(ConvKbGradient {
                filters: filter_grads,
                dense: dense_grad,
            });
        }
    }

    let entities = if triple.subject == triple.object {
        let merged: Vec<f64> = gh.iter().zip(&gt).map(|(a, b)| a + b).collect();
        vec![(triple.subject, merged)]
    } else {
        vec![(triple.subject, gh), (triple.object, gt)]
    };

    Gradient {
        entities,
        relations: vec![(triple.predicate, gr)],
        convkb,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::models::{ConvKbParams, ModelOptions, ModelParameters};
    use proptest::prelude::*;

    /// Hand-assembled parameters: entity rows then relation rows as given.
    fn params_from(
        kind: ModelKind,
        k: usize,
        norm: Norm,
        entities: Vec<Vec<f64>>,
        relations: Vec<Vec<f64>>,
        convkb: Option<ConvKbParams>,
    ) -> ModelParameters {
        let width = entities[0].len();
        let n_e = entities.len();
        let n_r = relations.len();
        ModelParameters {
            kind,
            k,
            transe_norm: norm,
            entities: Matrix::from_vec(n_e, width, entities.into_iter().flatten().collect()),
            relations: Matrix::from_vec(n_r, width, relations.into_iter().flatten().collect()),
            convkb,
        }
    }

    const HRT: Triple = Triple {
        subject: 0,
        predicate: 0,
        object: 1,
    };

    #[test]
    fn transe_exact_translation_scores_zero() {
        let p = params_from(
            ModelKind::TransE,
            2,
            Norm::L1,
            vec![vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![vec![0.0, 1.0]],
            None,
        );
        assert_eq!(score_transe(&p, HRT), 0.0);
        // Zero difference: zero (sub)gradient by convention.
        let g = p.gradient(HRT);
        for (_, row) in &g.entities {
            assert!(row.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn transe_l1_and_l2_worked_examples() {
        let p = params_from(
            ModelKind::TransE,
            2,
            Norm::L1,
            vec![vec![1.0, 0.0], vec![0.0, 0.0]],
            vec![vec![0.0, 0.0]],
            None,
        );
        assert_eq!(score_transe(&p, HRT), -1.0);

        let p = params_from(
            ModelKind::TransE,
            2,
            Norm::L2,
            vec![vec![3.0, 4.0], vec![0.0, 0.0]],
            vec![vec![0.0, 0.0]],
            None,
        );
        assert_eq!(score_transe(&p, HRT), -5.0);
    }

    #[test]
    fn distmult_trilinear_example() {
        let p = params_from(
            ModelKind::DistMult,
            2,
            Norm::L1,
            vec![vec![1.0, 2.0], vec![5.0, 6.0]],
            vec![vec![3.0, 4.0]],
            None,
        );
        assert_eq!(score_distmult(&p, HRT), 63.0);
        // dF/dh = r .* t
        let g = p.gradient(HRT);
        assert_eq!(g.entities[0].1, vec![15.0, 24.0]);
        // r = 0 scores 0.
        let p0 = params_from(
            ModelKind::DistMult,
            2,
            Norm::L1,
            vec![vec![1.0, 2.0], vec![5.0, 6.0]],
            vec![vec![0.0, 0.0]],
            None,
        );
        assert_eq!(score_distmult(&p0, HRT), 0.0);
    }

    #[test]
    fn complex_worked_example() {
        // k=1: r = 1 + 0i, h = 0 + 1i, t = 0 + 1i -> Re(r h conj(t)) = 1.
        let p = params_from(
            ModelKind::ComplEx,
            1,
            Norm::L1,
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0]],
            None,
        );
        assert_eq!(score_complex(&p, HRT), 1.0);
    }

    #[test]
    fn hole_worked_examples() {
        // k=3, h=(1,2,3), t=(4,5,6), w_r=(1,0,0): correlation[0] = 32.
        let p = params_from(
            ModelKind::HolE,
            3,
            Norm::L1,
            vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
            vec![vec![1.0, 0.0, 0.0]],
            None,
        );
        assert_eq!(score_hole(&p, HRT), 32.0);

        // k=2, h=(1,0), t=(0,1), w_r=(0,1): correlation[1] = h[0] t[1] ... = 1.
        let p = params_from(
            ModelKind::HolE,
            2,
            Norm::L1,
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0]],
            None,
        );
        assert_eq!(score_hole(&p, HRT), 1.0);

        // w_r = 0 scores 0.
        let p = params_from(
            ModelKind::HolE,
            2,
            Norm::L1,
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![vec![0.0, 0.0]],
            None,
        );
        assert_eq!(score_hole(&p, HRT), 0.0);
    }

    #[test]
    fn convkb_worked_examples() {
        // k=1, one filter (1, 1, -2) bias 0, h=2, r=3, t=1, W=1 -> relu(3).
        let conv = ConvKbParams {
            filters: vec![ConvKbFilter {
                weights: [1.0, 1.0, -2.0],
                bias: 0.0,
            }],
            dense: vec![1.0],
        };
        let p = params_from(
            ModelKind::ConvKb,
            1,
            Norm::L1,
            vec![vec![2.0], vec![1.0]],
            vec![vec![3.0]],
            Some(conv.clone()),
        );
        assert_eq!(score_convkb(&p, HRT), 3.0);

        // Dense W = 0 scores 0.
        let mut zero_dense = conv.clone();
        zero_dense.dense = vec![0.0];
        let p0 = params_from(
            ModelKind::ConvKb,
            1,
            Norm::L1,
            vec![vec![2.0], vec![1.0]],
            vec![vec![3.0]],
            Some(zero_dense),
        );
        assert_eq!(score_convkb(&p0, HRT), 0.0);

        // All pre-activations negative: ReLU gates everything to 0.
        let mut neg = conv;
        neg.filters[0].bias = -100.0;
        let pn = params_from(
            ModelKind::ConvKb,
            1,
            Norm::L1,
            vec![vec![2.0], vec![1.0]],
            vec![vec![3.0]],
            Some(neg),
        );
        assert_eq!(score_convkb(&pn, HRT), 0.0);
    }

    #[test]
    fn self_loop_merges_entity_gradient() {
        let p = params_from(
            ModelKind::DistMult,
            2,
            Norm::L1,
            vec![vec![1.0, 2.0]],
            vec![vec![3.0, 4.0]],
            None,
        );
        let loop_triple = Triple::new(0, 0, 0);
        let g = p.gradient(loop_triple);
        assert_eq!(g.entities.len(), 1);
        // dF/dh + dF/dt = r.*t + r.*h = r .* 2h here.
        assert_eq!(g.entities[0].1, vec![6.0, 16.0]);
    }

    /// Central finite difference of the ConvKB score along one dense weight,
    /// checking a representative non-embedding gradient path.
    #[test]
    fn convkb_dense_gradient_matches_finite_difference() {
        let mut p = ModelParameters::init(
            ModelKind::ConvKb,
            3,
            9,
            4,
            2,
            &ModelOptions {
                num_filters: 2,
                ..ModelOptions::default()
            },
        )
        .unwrap();
        let triple = Triple::new(0, 1, 2);
        let analytic = p.gradient(triple).convkb.unwrap();
        let step = 1e-5;
        for idx in 0..p.convkb.as_ref().unwrap().dense.len() {
            let orig = p.convkb.as_ref().unwrap().dense[idx];
            p.convkb.as_mut().unwrap().dense[idx] = orig + step;
            let up = p.score(triple);
            p.convkb.as_mut().unwrap().dense[idx] = orig - step;
            let down = p.score(triple);
            p.convkb.as_mut().unwrap().dense[idx] = orig;
            let fd = (up - down) / (2.0 * step);
            assert!(
                (fd - analytic.dense[idx]).abs() <= 1e-6 * fd.abs().max(1.0),
                "dense[{idx}]: fd {fd} vs analytic {}",
                analytic.dense[idx]
            );
        }
    }

    #[test]
    fn scoring_is_pure() {
        for kind in ModelKind::ALL {
            let p = ModelParameters::init(
                kind,
                5,
                3,
                4,
                2,
                &ModelOptions {
                    num_filters: 3,
                    ..ModelOptions::default()
                },
            )
            .unwrap();
            let t = Triple::new(0, 1, 2);
            let first = p.score(t);
            for _ in 0..5 {
                assert_eq!(p.score(t).to_bits(), first.to_bits(), "{kind}");
            }
        }
    }

    proptest! {
        #[test]
        fn distmult_is_symmetric(seed in 0u64..500) {
            let p = ModelParameters::init(ModelKind::DistMult, 4, seed, 3, 2, &ModelOptions::default()).unwrap();
            let f_hrt = score_distmult(&p, Triple::new(0, 1, 2));
            let f_trh = score_distmult(&p, Triple::new(2, 1, 0));
            prop_assert_eq!(f_hrt, f_trh);
        }

        #[test]
        fn complex_reduces_to_distmult_on_reals(seed in 0u64..500) {
            let k = 4;
            let dm = ModelParameters::init(ModelKind::DistMult, k, seed, 3, 2, &ModelOptions::default()).unwrap();
            // Embed the same real vectors into the complex halves with zero
            // imaginary parts.
            let widen = |m: &Matrix| {
                let mut data = Vec::new();
                for i in 0..m.rows() {
                    data.extend_from_slice(m.row(i));
                    data.extend(std::iter::repeat_n(0.0, k));
                }
                Matrix::from_vec(m.rows(), 2 * k, data)
            };
            let cx = ModelParameters {
                kind: ModelKind::ComplEx,
                k,
                transe_norm: Norm::L1,
                entities: widen(&dm.entities),
                relations: widen(&dm.relations),
                convkb: None,
            };
            let t = Triple::new(0, 1, 2);
            prop_assert!((score_complex(&cx, t) - score_distmult(&dm, t)).abs() < 1e-12);
        }

        #[test]
        fn complex_imaginary_relation_is_antisymmetric(seed in 0u64..500) {
            let k = 4;
            let mut p = ModelParameters::init(ModelKind::ComplEx, k, seed, 3, 2, &ModelOptions::default()).unwrap();
            // Zero the real half of every relation row.
            for i in 0..p.relations.rows() {
                for j in 0..k {
                    p.relations.row_mut(i)[j] = 0.0;
                }
            }
            let f = score_complex(&p, Triple::new(0, 1, 2));
            let b = score_complex(&p, Triple::new(2, 1, 0));
            prop_assert!((f + b).abs() < 1e-12, "f={f} b={b}");
        }

        #[test]
        fn hole_fft_matches_direct(seed in 0u64..200, k in 2usize..24) {
            let p = ModelParameters::init(ModelKind::HolE, k, seed, 3, 2, &ModelOptions::default()).unwrap();
            let t = Triple::new(0, 1, 2);
            prop_assert!((score_hole(&p, t) - score_hole_fft(&p, t)).abs() < 1e-9);
        }
    }
}
