use super::arch::{LayerSpec, NetworkSpec};
use crate::error::{Error, Result};
use crate::layers::{FcParams, SpectralConvParams};
use crate::rng::SplitMix64;
use crate::spectral::init_filter_bank;

/// Every trainable tensor of a network. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub conv: Vec<SpectralConvParams>,
    pub fc: Vec<FcParams>,
}

impl NetworkParams {
    /// Tensor names in storage order: `sc{i}.alpha`, `sc{i}.beta`, then
    /// `fc{j}.weight`, `fc{j}.bias`.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for i in 0..self.conv.len() {
            names.push(format!("sc{i}.alpha"));
            names.push(format!("sc{i}.beta"));
        }
        for j in 0..self.fc.len() {
            names.push(format!("fc{j}.weight"));
            names.push(format!("fc{j}.bias"));
        }
        names
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for c in &self.conv {
            out.push(&c.alpha);
            out.push(&c.beta);
        }
        for f in &self.fc {
            out.push(&f.weights);
            out.push(&f.bias);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = Vec::new();
        for c in &mut self.conv {
            out.push(&mut c.alpha);
            out.push(&mut c.beta);
        }
        for f in &mut self.fc {
            out.push(&mut f.weights);
            out.push(&mut f.bias);
        }
        out
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    pub fn num_values(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &NetworkParams, scale: f64) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    /// Checks that every tensor has the shape `spec` implies.
    pub fn check_against(&self, spec: &NetworkSpec) -> Result<()> {
        let expected = shapes(spec);
        let got: Vec<usize> = self.tensors().iter().map(|t| t.len()).collect();
        if got != expected {
            return Err(Error::Shape(format!(
                "parameters {got:?} do not fit {spec} (expected {expected:?})"
            )));
        }
        Ok(())
    }
}

/// Lengths of all tensors in storage order.
pub fn shapes(spec: &NetworkSpec) -> Vec<usize> {
    let mut out = Vec::new();
    let mut maps = 1;
    for layer in &spec.layers {
        if let LayerSpec::Conv { filters, degree } = *layer {
            out.push(filters * (degree + 1));
            out.push(maps);
            maps = filters;
        }
    }
    let mut width = spec.feature_len();
    for layer in &spec.layers {
        if let LayerSpec::Fc { units } = *layer {
            out.push(units * width);
            out.push(units);
            width = units;
        }
    }
    out
}

/// Filter coefficients from the spectral window bank; `beta ~ U[0, 1]`;
/// FC weights then biases `~ U[-1, 1]`, drawn layer by layer from
/// `SplitMix64::new(seed)`.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> Result<NetworkParams> {
    let mut rng = SplitMix64::new(seed);
    let mut conv = Vec::new();
    let mut maps = 1;
    for layer in &spec.layers {
        if let LayerSpec::Conv { filters, degree } = *layer {
            let alpha = init_filter_bank(filters, degree)?
                .iter()
                .flat_map(|f| f.coefficients().to_vec())
                .collect();
            let beta = (0..maps).map(|_| rng.uniform(0.0, 1.0)).collect();
            conv.push(SpectralConvParams::new(alpha, beta, filters, degree)?);
            maps = filters;
        }
    }
    let mut fc = Vec::new();
    let mut width = spec.feature_len();
    for layer in &spec.layers {
        if let LayerSpec::Fc { units } = *layer {
            let weights = (0..units * width).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let bias = (0..units).map(|_| rng.uniform(-1.0, 1.0)).collect();
            fc.push(FcParams::new(weights, bias, width, units)?);
            width = units;
        }
    }
    Ok(NetworkParams { conv, fc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_architecture;

    fn spec() -> NetworkSpec {
        parse_architecture("SC[3,3]-DP[20]-SC[4,3]-DP[10]-S[4]-FC[8]-FC[3]", (9, 9), 3).unwrap()
    }

    #[test]
    fn deterministic() {
        let a = init_params(&spec(), 42).unwrap();
        let b = init_params(&spec(), 42).unwrap();
        assert_eq!(a, b);
        let c = init_params(&spec(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ranges() {
        let p = init_params(&spec(), 1).unwrap();
        assert!(p
            .conv
            .iter()
            .flat_map(|c| &c.beta)
            .all(|v| (0.0..=1.0).contains(v)));
        assert!(p
            .fc
            .iter()
            .flat_map(|f| f.weights.iter().chain(&f.bias))
            .all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn alpha_from_filter_bank() {
        let p = init_params(&spec(), 1).unwrap();
        let bank: Vec<f64> = init_filter_bank(3, 3)
            .unwrap()
            .iter()
            .flat_map(|f| f.coefficients().to_vec())
            .collect();
        assert_eq!(p.conv[0].alpha, bank);
    }

    #[test]
    fn shapes_and_names() {
        let s = spec();
        let p = init_params(&s, 5).unwrap();
        p.check_against(&s).unwrap();
        assert_eq!(shapes(&s), vec![12, 1, 16, 3, 8 * 40, 8, 3 * 8, 3]);
        assert_eq!(
            p.tensor_names(),
            [
                "sc0.alpha",
                "sc0.beta",
                "sc1.alpha",
                "sc1.beta",
                "fc0.weight",
                "fc0.bias",
                "fc1.weight",
                "fc1.bias"
            ]
        );
    }
}
