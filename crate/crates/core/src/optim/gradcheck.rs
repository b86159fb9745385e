//! Central-difference verification of the analytic gradients.

use std::fmt;

use crate::error::Result;
use crate::graph::{GridGraph, NormalizedLaplacian};
use crate::layers::nll_loss;
use crate::network::{init_params, loss_and_grad, predict, NetworkParams, NetworkSpec};
use crate::rng::SplitMix64;

/// Step of the central difference.
pub const FD_STEP: f64 = 1e-5;
/// Denominator floor of the relative error, so that two tiny gradients do
/// not produce a large ratio.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub len: usize,
    /// Largest `|a - n| / max(|a|, |n|, REL_ERROR_FLOOR)` over the entries.
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub tolerance: f64,
    pub tensors: Vec<TensorCheck>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.tensors.iter().all(|t| t.passed)
    }

    pub fn worst(&self) -> Option<&TensorCheck> {
        self.tensors
            .iter()
            .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }
}

impl fmt::Display for GradcheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:>6} {:>14}  status",
            "tensor", "size", "max_rel_err"
        )?;
        for t in &self.tensors {
            writeln!(
                f,
                "{:<12} {:>6} {:>14.6e}  {}",
                t.name,
                t.len,
                t.max_rel_error,
                if t.passed { "ok" } else { "FAIL" }
            )?;
        }
        match (self.passed(), self.worst()) {
            (true, _) => write!(f, "passed at tolerance {:e}", self.tolerance),
            (false, Some(w)) => write!(
                f,
                "FAILED at tolerance {:e}: worst tensor {} (entry {}, rel err {:.6e})",
                self.tolerance, w.name, w.worst_index, w.max_rel_error
            ),
            (false, None) => write!(f, "FAILED"),
        }
    }
}

/// Tensor-by-tensor comparison of two gradients of the same shape.
pub fn compare_gradients(
    analytic: &NetworkParams,
    numeric: &NetworkParams,
    tolerance: f64,
) -> GradcheckReport {
    let tensors = analytic
        .tensor_names()
        .into_iter()
        .zip(analytic.tensors().into_iter().zip(numeric.tensors()))
        .map(|(name, (a, n))| {
            let (mut max_rel_error, mut worst_index) = (0.0f64, 0);
            for (j, (&x, &y)) in a.iter().zip(n).enumerate() {
                let err = (x - y).abs() / x.abs().max(y.abs()).max(REL_ERROR_FLOOR);
                // NaN counts as a failure.
                let err = if err.is_nan() { f64::INFINITY } else { err };
                if err > max_rel_error {
                    max_rel_error = err;
                    worst_index = j;
                }
            }
            TensorCheck {
                name,
                len: a.len(),
                max_rel_error,
                worst_index,
                passed: max_rel_error <= tolerance,
            }
        })
        .collect();
    GradcheckReport { tolerance, tensors }
}

/// Central differences of the loss with respect to every parameter.
pub fn numeric_gradient(
    spec: &NetworkSpec,
    params: &NetworkParams,
    l: &NormalizedLaplacian,
    input: &[f64],
    label: usize,
) -> Result<NetworkParams> {
    let loss_at =
        |p: &NetworkParams| -> Result<f64> { Ok(nll_loss(&predict(spec, p, l, input)?, label)?.0) };
    let mut numeric = params.zeros_like();
    let mut probe = params.clone();
    let sizes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
    for (t, &len) in sizes.iter().enumerate() {
        for j in 0..len {
            let orig = probe.tensors()[t][j];
            probe.tensors_mut()[t][j] = orig + FD_STEP;
            let up = loss_at(&probe)?;
            probe.tensors_mut()[t][j] = orig - FD_STEP;
            let down = loss_at(&probe)?;
            probe.tensors_mut()[t][j] = orig;
            numeric.tensors_mut()[t][j] = (up - down) / (2.0 * FD_STEP);
        }
    }
    Ok(numeric)
}

/// Checks a freshly initialised network on a random input and label, all
/// drawn from `seed`.
pub fn gradcheck(spec: &NetworkSpec, seed: u64, tolerance: f64) -> Result<GradcheckReport> {
    let l = GridGraph::new(spec.height, spec.width)?.laplacian()?;
    let params = init_params(spec, seed)?;
    let mut rng = SplitMix64::derive(seed, 0x6772_6164);
    let input: Vec<f64> = (0..spec.num_vertices()).map(|_| rng.next_f64()).collect();
    let label = rng.below(spec.num_classes as u64) as usize;
    let (_, _, analytic) = loss_and_grad(spec, &params, &l, &input, label)?;
    let numeric = numeric_gradient(spec, &params, &l, &input, label)?;
    Ok(compare_gradients(&analytic, &numeric, tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_architecture;

    #[test]
    fn minimal_net_passes() {
        let spec = parse_architecture("SC[2,2]-DP[4]-S[2]-FC[3]", (3, 3), 3).unwrap();
        let report = gradcheck(&spec, 1, 1e-4).unwrap();
        assert!(report.passed(), "{report}");
        let names: Vec<&str> = report.tensors.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["sc0.alpha", "sc0.beta", "fc0.weight", "fc0.bias"]);
    }

    #[test]
    fn corrupted_beta_is_flagged() {
        let spec = parse_architecture("SC[2,2]-DP[4]-S[2]-FC[3]", (3, 3), 3).unwrap();
        let l = GridGraph::new(3, 3).unwrap().laplacian().unwrap();
        let params = init_params(&spec, 2).unwrap();
        let input: Vec<f64> = (0..9).map(|i| ((i * 37 % 11) as f64) / 11.0).collect();
        let (_, _, mut analytic) = loss_and_grad(&spec, &params, &l, &input, 1).unwrap();
        let numeric = numeric_gradient(&spec, &params, &l, &input, 1).unwrap();
        analytic.conv[0].beta.iter_mut().for_each(|g| *g *= 2.0);
        let report = compare_gradients(&analytic, &numeric, 1e-4);
        assert!(!report.passed());
        let failed: Vec<&str> = report
            .tensors
            .iter()
            .filter(|t| !t.passed)
            .map(|t| t.name.as_str())
            .collect();
        assert_eq!(failed, ["sc0.beta"]);
        assert_eq!(report.worst().unwrap().name, "sc0.beta");
    }

    #[test]
    fn nan_fails() {
        let spec = parse_architecture("S[1]-FC[2]", (2, 2), 2).unwrap();
        let p = init_params(&spec, 0).unwrap();
        let mut bad = p.clone();
        bad.fc[0].bias[0] = f64::NAN;
        assert!(!compare_gradients(&bad, &p, 1.0).passed());
    }
}
