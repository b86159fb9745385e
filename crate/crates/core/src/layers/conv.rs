//! Spectral convolution.
//!
//! Filter `i` is `F_i = sum_m alpha[i][m] L^m`. For every input map `y_k`
//! the layer computes `F_i` restricted to the columns in the filter's
//! active set, transposed, times `y_k`, and mixes the results with `beta`:
//!
//! ```text
//! z_i = sum_k beta_k [F_i|_{N_i}]^T y_k
//! ```
//!
//! `F_i` is symmetric, and zeroing its columns outside `N_i` then
//! transposing zeroes rows, so `[F_i|_N]^T y = mask_N(F_i y)`. Because both
//! the filter and the mask are linear, the layer evaluates
//! `z_i = mask_i(F_i s)` with `s = sum_k beta_k y_k` and shares the powers
//! `L^m s` between filters.

use super::dot;
use super::pool::ActiveNodeSet;
use crate::error::{Error, Result};
use crate::graph::NormalizedLaplacian;
use crate::spectral::{filter_matvec, laplacian_powers, PolynomialFilter};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConvParams {
    /// `filters x (degree + 1)`, row-major.
    pub alpha: Vec<f64>,
    /// One mixing weight per input map.
    pub beta: Vec<f64>,
    pub filters: usize,
    pub degree: usize,
}

impl SpectralConvParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, filters: usize, degree: usize) -> Result<Self> {
        if filters == 0 || alpha.len() != filters * (degree + 1) || beta.is_empty() {
            return Err(Error::Shape(format!(
                "alpha has {} entries for {filters} filters of degree {degree}, beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        Ok(Self {
            alpha,
            beta,
            filters,
            degree,
        })
    }

    pub fn inputs(&self) -> usize {
        self.beta.len()
    }

    pub fn filter_coeffs(&self, i: usize) -> &[f64] {
        let w = self.degree + 1;
        &self.alpha[i * w..(i + 1) * w]
    }

    pub fn filter(&self, i: usize) -> PolynomialFilter {
        PolynomialFilter::new(self.filter_coeffs(i).to_vec()).expect("alpha is non-empty")
    }
}

/// `[F|_keep]^T y`: `F y` with entries outside `keep` zeroed.
pub fn restrict_columns(
    l: &NormalizedLaplacian,
    f: &PolynomialFilter,
    keep: &[usize],
    y: &[f64],
) -> Result<Vec<f64>> {
    let full = filter_matvec(l, f, y)?;
    let mut out = vec![0.0; full.len()];
    for &v in keep {
        if v >= out.len() {
            return Err(Error::OutOfBounds(format!(
                "vertex {v} in a graph of {}",
                out.len()
            )));
        }
        out[v] = full[v];
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct ConvTape {
    inputs: Vec<Vec<f64>>,
    // L^m s, m = 0..=degree
    powers: Vec<Vec<f64>>,
    // Per filter; `None` keeps every vertex.
    masks: Vec<Option<Vec<usize>>>,
    ready: bool,
}

impl ConvTape {
    /// Restriction set used by each filter in the last forward pass.
    pub fn masks(&self) -> &[Option<Vec<usize>>] {
        &self.masks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub inputs: Vec<Vec<f64>>,
}

/// Restriction set for filter `i`: nothing before the first pooling, the
/// matching per-map set when the filter count equals the previous map
/// count, and the union otherwise.
fn restriction(active: &ActiveNodeSet, filters: usize, i: usize) -> Option<Vec<usize>> {
    if active.per_map().is_empty() {
        if active.is_all() {
            None
        } else {
            Some(active.omega().to_vec())
        }
    } else if active.per_map().len() == filters {
        Some(active.per_map()[i].clone())
    } else {
        Some(active.omega().to_vec())
    }
}

fn apply_mask(mask: &Option<Vec<usize>>, v: Vec<f64>) -> Vec<f64> {
    match mask {
        None => v,
        Some(keep) => {
            let mut out = vec![0.0; v.len()];
            for &k in keep {
                out[k] = v[k];
            }
            out
        }
    }
}

pub fn spectral_conv_forward(
    params: &SpectralConvParams,
    inputs: &[Vec<f64>],
    active: &ActiveNodeSet,
    l: &NormalizedLaplacian,
    tape: &mut ConvTape,
) -> Result<Vec<Vec<f64>>> {
    let n = l.n();
    if inputs.len() != params.inputs() {
        return Err(Error::Shape(format!(
            "layer mixes {} input maps, got {}",
            params.inputs(),
            inputs.len()
        )));
    }
    if let Some(bad) = inputs.iter().find(|y| y.len() != n) {
        return Err(Error::Shape(format!(
            "input map has {} values, graph has {n}",
            bad.len()
        )));
    }
    if active.num_vertices() != n {
        return Err(Error::Shape(
            "active set belongs to a different graph".into(),
        ));
    }
    let mut mixed = vec![0.0; n];
    for (y, &b) in inputs.iter().zip(&params.beta) {
        for (m, &v) in mixed.iter_mut().zip(y) {
            *m += b * v;
        }
    }
    let powers = laplacian_powers(l, &mixed, params.degree)?;
    let masks: Vec<_> = (0..params.filters)
        .map(|i| restriction(active, params.filters, i))
        .collect();
    let outputs = (0..params.filters)
        .map(|i| {
            let alpha = params.filter_coeffs(i);
            let mut z = vec![0.0; n];
            for (a, p) in alpha.iter().zip(&powers) {
                for (zv, &pv) in z.iter_mut().zip(p) {
                    *zv += a * pv;
                }
            }
            apply_mask(&masks[i], z)
        })
        .collect();
    *tape = ConvTape {
        inputs: inputs.to_vec(),
        powers,
        masks,
        ready: true,
    };
    Ok(outputs)
}

pub fn spectral_conv_backward(
    params: &SpectralConvParams,
    l: &NormalizedLaplacian,
    tape: &ConvTape,
    grad_out: &[Vec<f64>],
) -> Result<ConvGrads> {
    if !tape.ready {
        return Err(Error::State("spectral conv backward before forward".into()));
    }
    if grad_out.len() != params.filters {
        return Err(Error::Shape(format!(
            "{} output gradients for {} filters",
            grad_out.len(),
            params.filters
        )));
    }
    let n = l.n();
    let width = params.degree + 1;
    let masked: Vec<Vec<f64>> = grad_out
        .iter()
        .zip(&tape.masks)
        .map(|(g, m)| apply_mask(m, g.clone()))
        .collect();

    let mut alpha = vec![0.0; params.alpha.len()];
    for (i, g) in masked.iter().enumerate() {
        for (m, p) in tape.powers.iter().enumerate() {
            alpha[i * width + m] = dot(p, g);
        }
    }

    // h = sum_i F_i g_i = sum_m L^m u_m with u_m = sum_i alpha[i][m] g_i, by Horner.
    let mut h = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for m in (0..width).rev() {
        if m + 1 < width {
            l.apply_into(&h, &mut tmp);
            std::mem::swap(&mut h, &mut tmp);
        }
        for (i, g) in masked.iter().enumerate() {
            let a = params.alpha[i * width + m];
            for (hv, &gv) in h.iter_mut().zip(g) {
                *hv += a * gv;
            }
        }
    }

    let beta = tape.inputs.iter().map(|y| dot(y, &h)).collect();
    let inputs = params
        .beta
        .iter()
        .map(|&b| h.iter().map(|v| b * v).collect())
        .collect();
    Ok(ConvGrads {
        alpha,
        beta,
        inputs,
    })
}
