//! Statistical layer.
//!
//! For each (already masked) map `z`, run the Chebyshev recursion on the
//! shifted Laplacian to get `t_0..t_K`, then record the mean and population
//! variance of `|t_k|` over all `N` vertices:
//!
//! ```text
//! phi = [mu_0, var_0, mu_1, var_1, ..., mu_K, var_K]
//! ```
//!
//! Both statistics ignore vertex order, so `phi` is unchanged by any vertex
//! permutation that commutes with `L`.

use crate::error::{Error, Result};
use crate::graph::NormalizedLaplacian;
use crate::spectral::chebyshev_sequence;

/// Length of one map's feature vector.
pub fn stat_len(k_max: usize) -> usize {
    2 * k_max + 2
}

#[derive(Debug, Clone, Default)]
pub struct StatTape {
    // sequences[map][k]
    sequences: Vec<Vec<Vec<f64>>>,
    k_max: usize,
    ready: bool,
}

pub fn statistical_forward(
    maps: &[Vec<f64>],
    l: &NormalizedLaplacian,
    k_max: usize,
    tape: &mut StatTape,
) -> Result<Vec<Vec<f64>>> {
    let n = l.n() as f64;
    let mut sequences = Vec::with_capacity(maps.len());
    let mut features = Vec::with_capacity(maps.len());
    for z in maps {
        let seq = chebyshev_sequence(l, z, k_max)?;
        let mut phi = Vec::with_capacity(stat_len(k_max));
        for t in &seq {
            let mean = t.iter().map(|v| v.abs()).sum::<f64>() / n;
            let var = t.iter().map(|v| (v.abs() - mean).powi(2)).sum::<f64>() / n;
            phi.push(mean);
            phi.push(var);
        }
        features.push(phi);
        sequences.push(seq);
    }
    *tape = StatTape {
        sequences,
        k_max,
        ready: true,
    };
    Ok(features)
}

/// Backward through `|.|` (subgradient 0 at 0), the moments, and the
/// Chebyshev recursion. The recursion is linear with a symmetric operator,
/// so its adjoint runs the same three-term rule from the top order down.
pub fn statistical_backward(
    l: &NormalizedLaplacian,
    tape: &StatTape,
    grad_phi: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    if !tape.ready {
        return Err(Error::State("statistical backward before forward".into()));
    }
    if grad_phi.len() != tape.sequences.len() {
        return Err(Error::Shape(format!(
            "{} feature gradients for {} maps",
            grad_phi.len(),
            tape.sequences.len()
        )));
    }
    let k_max = tape.k_max;
    let nv = l.n();
    let n = nv as f64;
    let mut out = Vec::with_capacity(grad_phi.len());
    for (seq, g) in tape.sequences.iter().zip(grad_phi) {
        if g.len() != stat_len(k_max) {
            return Err(Error::Shape(format!(
                "feature gradient has {} entries, expected {}",
                g.len(),
                stat_len(k_max)
            )));
        }
        // dE/dt_k
        let mut gt: Vec<Vec<f64>> = seq
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let (g_mean, g_var) = (g[2 * k], g[2 * k + 1]);
                let mean = t.iter().map(|v| v.abs()).sum::<f64>() / n;
                t.iter()
                    .map(|&v| {
                        let s = if v > 0.0 {
                            1.0
                        } else if v < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                        s * (g_mean / n + g_var * 2.0 * (v.abs() - mean) / n)
                    })
                    .collect()
            })
            .collect();

        let mut tmp = vec![0.0; nv];
        for k in (2..=k_max).rev() {
            l.apply_shifted_into(&gt[k], &mut tmp);
            let (lo, hi) = gt.split_at_mut(k);
            let top = &hi[0];
            for j in 0..nv {
                lo[k - 1][j] += 2.0 * tmp[j];
                lo[k - 2][j] -= top[j];
            }
        }
        if k_max >= 1 {
            l.apply_shifted_into(&gt[1], &mut tmp);
            for (a, &b) in gt[0].iter_mut().zip(&tmp) {
                *a += b;
            }
        }
        out.push(gt.swap_remove(0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{AutomorphismKind, GridAutomorphism, GridGraph};
    use crate::rng::SplitMix64;

    #[test]
    fn order_zero_moments() {
        let l = GridGraph::new(2, 2).unwrap().laplacian().unwrap();
        let mut tape = StatTape::default();
        let phi = statistical_forward(&[vec![1.0, -1.0, 0.0, 0.0]], &l, 0, &mut tape).unwrap();
        assert_eq!(phi, vec![vec![0.5, 0.25]]);
    }

    #[test]
    fn zero_map() {
        let l = GridGraph::new(3, 3).unwrap().laplacian().unwrap();
        let mut tape = StatTape::default();
        let phi = statistical_forward(&[vec![0.0; 9]], &l, 4, &mut tape).unwrap();
        assert_eq!(phi[0].len(), 10);
        assert!(phi[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rotation_invariant() {
        let l = GridGraph::new(5, 5).unwrap().laplacian().unwrap();
        let p = GridAutomorphism::new(AutomorphismKind::Rot90, 5, 5).unwrap();
        let mut r = SplitMix64::new(77);
        let z: Vec<f64> = (0..25).map(|_| r.uniform(-1.0, 1.0)).collect();
        let mut tape = StatTape::default();
        let a = statistical_forward(std::slice::from_ref(&z), &l, 5, &mut tape).unwrap();
        let b = statistical_forward(&[p.apply(&z).unwrap()], &l, 5, &mut tape).unwrap();
        for (x, y) in a[0].iter().zip(&b[0]) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn variances_nonnegative() {
        let l = GridGraph::new(4, 4).unwrap().laplacian().unwrap();
        let mut r = SplitMix64::new(3);
        let z: Vec<f64> = (0..16).map(|_| r.uniform(-1.0, 1.0)).collect();
        let mut tape = StatTape::default();
        let phi = statistical_forward(&[z], &l, 6, &mut tape).unwrap();
        assert!(phi[0].iter().skip(1).step_by(2).all(|&v| v >= 0.0));
    }

    #[test]
    fn zero_upstream() {
        let l = GridGraph::new(3, 3).unwrap().laplacian().unwrap();
        let mut tape = StatTape::default();
        statistical_forward(&[vec![0.5; 9]], &l, 2, &mut tape).unwrap();
        let g = statistical_backward(&l, &tape, &[vec![0.0; 6]]).unwrap();
        assert_eq!(g[0], vec![0.0; 9]);
        assert!(matches!(
            statistical_backward(&l, &StatTape::default(), &[vec![0.0; 6]]),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn mean_only_gradient_closed_form() {
        let l = GridGraph::new(2, 3).unwrap().laplacian().unwrap();
        let z = vec![0.5, -1.0, 0.0, 2.0, -0.25, 0.75];
        let mut tape = StatTape::default();
        statistical_forward(std::slice::from_ref(&z), &l, 0, &mut tape).unwrap();
        let g = statistical_backward(&l, &tape, &[vec![3.0, 0.0]]).unwrap();
        let expect: Vec<f64> = z
            .iter()
            .map(|&v| {
                if v == 0.0 {
                    0.0
                } else {
                    v.signum() * 3.0 / 6.0
                }
            })
            .collect();
        assert_eq!(g[0], expect);
    }
}
