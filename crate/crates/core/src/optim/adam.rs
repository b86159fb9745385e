use crate::error::{Error, Result};
use crate::network::NetworkParams;

/// Bias-corrected Adam with one moment pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &NetworkParams, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        let zeros: Vec<Vec<f64>> = params
            .tensors()
            .iter()
            .map(|t| vec![0.0; t.len()])
            .collect();
        Self {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// One update of `params` from `grads`. Non-finite gradients abort
    /// before anything is modified.
    pub fn step(&mut self, params: &mut NetworkParams, grads: &NetworkParams) -> Result<()> {
        let names = params.tensor_names();
        let gs = grads.tensors();
        let shapes_ok = gs.len() == self.m.len()
            && gs.iter().zip(&self.m).all(|(g, m)| g.len() == m.len())
            && params
                .tensors()
                .iter()
                .zip(&self.m)
                .all(|(p, m)| p.len() == m.len());
        if !shapes_ok {
            return Err(Error::Shape(
                "gradients, parameters and optimizer state disagree".into(),
            ));
        }
        if let Some(i) = gs.iter().position(|g| g.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite(names[i].clone()));
        }

        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(gs)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            for j in 0..p.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                p[j] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
