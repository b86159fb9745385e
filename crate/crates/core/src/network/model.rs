//! Whole-network forward and backward passes.

use super::arch::{LayerSpec, NetworkSpec};
use super::params::NetworkParams;
use crate::error::{Error, Result};
use crate::graph::NormalizedLaplacian;
use crate::layers::{
    dynamic_pool, dynamic_pool_backward, fc_softmax_backward, fc_softmax_forward, nll_loss,
    spectral_conv_backward, spectral_conv_forward, statistical_backward, statistical_forward,
    ActiveNodeSet, ConvTape, FcTape, PoolTape, StatTape,
};

#[derive(Debug, Clone)]
pub enum LayerTape {
    Conv(ConvTape),
    Pool(PoolTape),
    Stat(StatTape),
    Fc(FcTape),
}

/// Per-example record of a forward pass.
#[derive(Debug, Clone, Default)]
pub struct NetworkTape {
    // One entry per SC/DP layer, then one for S and one for the FC head.
    tapes: Vec<LayerTape>,
    // Active sets after each pooling layer, starting with all vertices.
    actives: Vec<ActiveNodeSet>,
    // Maps produced by each SC/DP layer, in order.
    maps: Vec<(LayerSpec, Vec<Vec<f64>>)>,
    probs: Vec<f64>,
}

impl NetworkTape {
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `Omega` sequence: all vertices, then the union after every pooling layer.
    pub fn active_sets(&self) -> &[ActiveNodeSet] {
        &self.actives
    }

    /// Output maps of every SC and DP layer, in network order.
    pub fn feature_maps(&self) -> &[(LayerSpec, Vec<Vec<f64>>)] {
        &self.maps
    }
}

pub fn forward(
    spec: &NetworkSpec,
    params: &NetworkParams,
    l: &NormalizedLaplacian,
    y0: &[f64],
    tape: &mut NetworkTape,
) -> Result<Vec<f64>> {
    let n = spec.num_vertices();
    if y0.len() != n {
        return Err(Error::Shape(format!(
            "input has {} pixels, network expects {}x{}",
            y0.len(),
            spec.height,
            spec.width
        )));
    }
    if l.n() != n {
        return Err(Error::Shape(format!(
            "Laplacian has {} vertices, network expects {n}",
            l.n()
        )));
    }
    params.check_against(spec)?;

    let mut tapes = Vec::with_capacity(spec.layers.len());
    let mut actives = vec![ActiveNodeSet::all(n)];
    let mut maps_log = Vec::new();
    let mut maps = vec![y0.to_vec()];
    let mut conv_idx = 0;
    for layer in &spec.layers {
        match *layer {
            LayerSpec::Conv { .. } => {
                let mut t = ConvTape::default();
                let active = actives.last().expect("starts non-empty");
                maps = spectral_conv_forward(&params.conv[conv_idx], &maps, active, l, &mut t)?;
                conv_idx += 1;
                tapes.push(LayerTape::Conv(t));
                maps_log.push((*layer, maps.clone()));
            }
            LayerSpec::Pool { keep } => {
                let mut t = PoolTape::default();
                let prev = actives.last().expect("starts non-empty");
                let (pooled, next) = dynamic_pool(&maps, prev, keep, &mut t)?;
                maps = pooled;
                actives.push(next);
                tapes.push(LayerTape::Pool(t));
                maps_log.push((*layer, maps.clone()));
            }
            LayerSpec::Stat { k_max } => {
                let mut t = StatTape::default();
                let phi = statistical_forward(&maps, l, k_max, &mut t)?;
                tapes.push(LayerTape::Stat(t));
                maps = vec![phi.concat()];
                break;
            }
            LayerSpec::Fc { .. } => unreachable!("validated spec puts S before FC"),
        }
    }
    let mut t = FcTape::default();
    let probs = fc_softmax_forward(&params.fc, &maps[0], &mut t)?;
    tapes.push(LayerTape::Fc(t));
    *tape = NetworkTape {
        tapes,
        actives,
        maps: maps_log,
        probs: probs.clone(),
    };
    Ok(probs)
}

/// Loss and gradients for `label` after [`forward`] filled `tape`.
pub fn backward(
    spec: &NetworkSpec,
    params: &NetworkParams,
    l: &NormalizedLaplacian,
    tape: &NetworkTape,
    label: usize,
) -> Result<(f64, NetworkParams)> {
    if tape.tapes.is_empty() {
        return Err(Error::State("network backward before forward".into()));
    }
    let (loss, grad_logits) = nll_loss(&tape.probs, label)?;
    backward_from_logits(spec, params, l, tape, &grad_logits).map(|g| (loss, g))
}

/// Backward pass seeded with an arbitrary gradient on the logits.
pub fn backward_from_logits(
    spec: &NetworkSpec,
    params: &NetworkParams,
    l: &NormalizedLaplacian,
    tape: &NetworkTape,
    grad_logits: &[f64],
) -> Result<NetworkParams> {
    let mut grads = params.zeros_like();
    let mut rev = tape.tapes.iter().rev();

    let Some(LayerTape::Fc(fc_tape)) = rev.next() else {
        return Err(Error::State("network backward before forward".into()));
    };
    let (fc_grads, grad_phi) = fc_softmax_backward(&params.fc, fc_tape, grad_logits)?;
    for (dst, src) in grads.fc.iter_mut().zip(fc_grads) {
        dst.weights = src.weights;
        dst.bias = src.bias;
    }

    let Some(LayerTape::Stat(stat_tape)) = rev.next() else {
        return Err(Error::State("tape is missing the statistical layer".into()));
    };
    let per_map = crate::layers::stat_len(spec.k_max());
    let grad_phi: Vec<Vec<f64>> = grad_phi.chunks(per_map).map(|c| c.to_vec()).collect();
    let mut g = statistical_backward(l, stat_tape, &grad_phi)?;

    let mut conv_idx = params.conv.len();
    for t in rev {
        g = match t {
            LayerTape::Pool(pt) => dynamic_pool_backward(pt, &g)?,
            LayerTape::Conv(ct) => {
                conv_idx -= 1;
                let cg = spectral_conv_backward(&params.conv[conv_idx], l, ct, &g)?;
                grads.conv[conv_idx].alpha = cg.alpha;
                grads.conv[conv_idx].beta = cg.beta;
                cg.inputs
            }
            _ => return Err(Error::State("unexpected layer order on tape".into())),
        };
    }
    Ok(grads)
}

/// Forward, loss and gradients in one call.
pub fn loss_and_grad(
    spec: &NetworkSpec,
    params: &NetworkParams,
    l: &NormalizedLaplacian,
    y0: &[f64],
    label: usize,
) -> Result<(f64, Vec<f64>, NetworkParams)> {
    let mut tape = NetworkTape::default();
    let probs = forward(spec, params, l, y0, &mut tape)?;
    let (loss, grads) = backward(spec, params, l, &tape, label)?;
    Ok((loss, probs, grads))
}

/// Class probabilities without keeping the tape.
pub fn predict(
    spec: &NetworkSpec,
    params: &NetworkParams,
    l: &NormalizedLaplacian,
    y0: &[f64],
) -> Result<Vec<f64>> {
    forward(spec, params, l, y0, &mut NetworkTape::default())
}
