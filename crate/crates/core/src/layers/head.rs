//! Fully-connected layers, softmax and the negative log-likelihood.
//!
//! Hidden layers use ReLU; the last layer produces logits.

use super::dot;
use crate::error::{Error, Result};

/// Probabilities are clamped to this before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FcParams {
    /// `outputs x inputs`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub inputs: usize,
    pub outputs: usize,
}

impl FcParams {
    pub fn new(weights: Vec<f64>, bias: Vec<f64>, inputs: usize, outputs: usize) -> Result<Self> {
        if weights.len() != inputs * outputs || bias.len() != outputs {
            return Err(Error::Shape(format!(
                "fc {inputs}->{outputs} given {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self {
            weights,
            bias,
            inputs,
            outputs,
        })
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| dot(row, x) + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcGrads {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct FcTape {
    // Input of every layer; the last entry is the logits.
    activations: Vec<Vec<f64>>,
    ready: bool,
}

impl FcTape {
    pub fn logits(&self) -> Option<&[f64]> {
        self.activations.last().map(|v| v.as_slice())
    }
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn fc_softmax_forward(
    layers: &[FcParams],
    input: &[f64],
    tape: &mut FcTape,
) -> Result<Vec<f64>> {
    if layers.is_empty() {
        return Err(Error::Shape(
            "the head needs at least one fully-connected layer".into(),
        ));
    }
    let mut activations = Vec::with_capacity(layers.len() + 1);
    let mut x = input.to_vec();
    for (idx, layer) in layers.iter().enumerate() {
        if x.len() != layer.inputs {
            return Err(Error::Shape(format!(
                "fc layer {idx} expects {} inputs, got {}",
                layer.inputs,
                x.len()
            )));
        }
        let mut y = layer.affine(&x);
        if idx + 1 < layers.len() {
            for v in y.iter_mut() {
                *v = v.max(0.0);
            }
        }
        activations.push(x);
        x = y;
    }
    let probs = softmax(&x);
    activations.push(x);
    *tape = FcTape {
        activations,
        ready: true,
    };
    Ok(probs)
}

/// Returns per-layer gradients and the gradient with respect to the head's input.
pub fn fc_softmax_backward(
    layers: &[FcParams],
    tape: &FcTape,
    grad_logits: &[f64],
) -> Result<(Vec<FcGrads>, Vec<f64>)> {
    if !tape.ready {
        return Err(Error::State("fc backward before forward".into()));
    }
    let mut grads = Vec::with_capacity(layers.len());
    let mut g = grad_logits.to_vec();
    for idx in (0..layers.len()).rev() {
        let layer = &layers[idx];
        if idx + 1 < layers.len() {
            // ReLU: the stored output of this layer is the next layer's input.
            for (gv, &out) in g.iter_mut().zip(&tape.activations[idx + 1]) {
                if out <= 0.0 {
                    *gv = 0.0;
                }
            }
        }
        let x = &tape.activations[idx];
        let mut gw = vec![0.0; layer.weights.len()];
        for (o, &go) in g.iter().enumerate() {
            for (w, &xv) in gw[o * layer.inputs..(o + 1) * layer.inputs]
                .iter_mut()
                .zip(x)
            {
                *w = go * xv;
            }
        }
        let mut gx = vec![0.0; layer.inputs];
        for (row, &go) in layer.weights.chunks_exact(layer.inputs).zip(&g) {
            for (gxv, &w) in gx.iter_mut().zip(row) {
                *gxv += go * w;
            }
        }
        grads.push(FcGrads {
            weights: gw,
            bias: g,
        });
        g = gx;
    }
    grads.reverse();
    Ok((grads, g))
}

/// `-ln p[label]` (with `p` floored at [`PROB_FLOOR`]) and its gradient with
/// respect to the logits, `p - onehot(label)`.
pub fn nll_loss(probs: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= probs.len() {
        return Err(Error::InvalidArgument(format!(
            "label {label} out of range for {} classes",
            probs.len()
        )));
    }
    let loss = -probs[label].max(PROB_FLOOR).ln();
    let mut grad = probs.to_vec();
    grad[label] -= 1.0;
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_from_zero_logits() {
        let p = softmax(&[0.0; 7]);
        assert!(p.iter().all(|&v| (v - 1.0 / 7.0).abs() < 1e-15));
    }

    #[test]
    fn shift_invariant() {
        let a = softmax(&[1.0, -2.0, 0.5]);
        let b = softmax(&[101.0, 98.0, 100.5]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn two_class_closed_form() {
        let fc = FcParams::new(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 2, 2).unwrap();
        let mut tape = FcTape::default();
        let p = fc_softmax_forward(&[fc], &[3.0, 1.0], &mut tape).unwrap();
        let e2 = 2f64.exp();
        assert!((p[0] - e2 / (e2 + 1.0)).abs() < 1e-15);
        assert!((p[1] - 1.0 / (e2 + 1.0)).abs() < 1e-15);
        assert!((p[0] - 0.8808).abs() < 1e-4);
        let (loss, _) = nll_loss(&p, 1).unwrap();
        assert!((loss - (e2 + 1.0).ln()).abs() < 1e-12);
        assert!((loss - 2.1269).abs() < 1e-4);
    }

    #[test]
    fn nll_edge_cases() {
        let (loss, grad) = nll_loss(&[0.0, 1.0 - 1e-12, 1e-12], 1).unwrap();
        assert!(loss.abs() < 1e-11);
        assert!(grad.iter().sum::<f64>().abs() < 1e-12);
        let (loss, _) = nll_loss(&[0.25; 4], 2).unwrap();
        assert!((loss - 4f64.ln()).abs() < 1e-15);
        assert!(nll_loss(&[0.5, 0.5], 2).is_err());
        let (loss, _) = nll_loss(&[1.0, 0.0], 1).unwrap();
        assert!((loss - -PROB_FLOOR.ln()).abs() < 1e-9);
    }

    #[test]
    fn shape_errors() {
        let fc = FcParams::new(vec![0.0; 6], vec![0.0; 2], 3, 2).unwrap();
        let mut tape = FcTape::default();
        assert!(fc_softmax_forward(&[fc], &[1.0, 2.0], &mut tape).is_err());
        assert!(FcParams::new(vec![0.0; 5], vec![0.0; 2], 3, 2).is_err());
    }
}
