//! Layer-by-layer finite-difference checks. Each layer's output is reduced
//! to a scalar with fixed random weights so that every backward pass is
//! exercised with a dense upstream gradient.

use tigranet::graph::{GridGraph, NormalizedLaplacian};
use tigranet::layers::*;
use tigranet::network::{loss_and_grad, parse_architecture};
use tigranet::optim::{compare_gradients, gradcheck};
use tigranet::rng::SplitMix64;

const H: f64 = 1e-6;

fn lap(h: usize, w: usize) -> NormalizedLaplacian {
    GridGraph::new(h, w).unwrap().laplacian().unwrap()
}

fn rand_vec(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

fn weighted(outputs: &[Vec<f64>], weights: &[Vec<f64>]) -> f64 {
    outputs
        .iter()
        .zip(weights)
        .map(|(o, w)| o.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

fn assert_close(analytic: f64, numeric: f64, what: &str) {
    let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
    assert!(err < 1e-5, "{what}: analytic {analytic} numeric {numeric}");
}

/// Central difference of `f` with respect to `x[j]`.
fn fd(x: &mut [f64], j: usize, f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
    let orig = x[j];
    x[j] = orig + H;
    let up = f(x);
    x[j] = orig - H;
    let down = f(x);
    x[j] = orig;
    (up - down) / (2.0 * H)
}

fn conv_case(active_kind: usize) {
    let (h, w) = (4, 4);
    let l = lap(h, w);
    let n = h * w;
    let mut rng = SplitMix64::new(10 + active_kind as u64);
    let (filters, inputs, degree) = (3, 3, 2);
    let params = SpectralConvParams::new(
        rand_vec(&mut rng, filters * (degree + 1)),
        rand_vec(&mut rng, inputs),
        filters,
        degree,
    )
    .unwrap();
    let ys: Vec<Vec<f64>> = (0..inputs).map(|_| rand_vec(&mut rng, n)).collect();
    // 0: no pooling yet, 1: per-map sets matching the filter count,
    // 2: two per-map sets (union restriction).
    let active = match active_kind {
        0 => ActiveNodeSet::all(n),
        1 => {
            ActiveNodeSet::from_sets(n, vec![vec![0, 3, 5], vec![1, 2, 9, 15], vec![7, 8]]).unwrap()
        }
        _ => ActiveNodeSet::from_sets(n, vec![vec![0, 4, 6, 11], vec![2, 13]]).unwrap(),
    };
    let upstream: Vec<Vec<f64>> = (0..filters).map(|_| rand_vec(&mut rng, n)).collect();

    let mut tape = ConvTape::default();
    spectral_conv_forward(&params, &ys, &active, &l, &mut tape).unwrap();
    let g = spectral_conv_backward(&params, &l, &tape, &upstream).unwrap();

    let objective = |p: &SpectralConvParams, ys: &[Vec<f64>]| {
        let out = spectral_conv_forward(p, ys, &active, &l, &mut ConvTape::default()).unwrap();
        weighted(&out, &upstream)
    };

    let mut alpha = params.alpha.clone();
    for j in 0..alpha.len() {
        let num = fd(&mut alpha, j, &mut |a| {
            let p =
                SpectralConvParams::new(a.to_vec(), params.beta.clone(), filters, degree).unwrap();
            objective(&p, &ys)
        });
        assert_close(g.alpha[j], num, &format!("alpha[{j}]"));
    }
    let mut beta = params.beta.clone();
    for j in 0..beta.len() {
        let num = fd(&mut beta, j, &mut |b| {
            let p =
                SpectralConvParams::new(params.alpha.clone(), b.to_vec(), filters, degree).unwrap();
            objective(&p, &ys)
        });
        assert_close(g.beta[j], num, &format!("beta[{j}]"));
    }
    for k in 0..inputs {
        let mut y = ys[k].clone();
        for v in 0..n {
            let num = fd(&mut y, v, &mut |yk| {
                let mut all = ys.clone();
                all[k] = yk.to_vec();
                objective(&params, &all)
            });
            assert_close(g.inputs[k][v], num, &format!("input {k} vertex {v}"));
        }
    }
}

#[test]
fn conv_gradients_without_restriction() {
    conv_case(0);
}

#[test]
fn conv_gradients_with_per_map_restriction() {
    conv_case(1);
}

#[test]
fn conv_gradients_with_union_restriction() {
    conv_case(2);
}

#[test]
fn pool_gradient_routes_to_selected_vertices() {
    let mut rng = SplitMix64::new(20);
    let n = 12;
    let maps: Vec<Vec<f64>> = (0..2).map(|_| rand_vec(&mut rng, n)).collect();
    let upstream: Vec<Vec<f64>> = (0..2).map(|_| rand_vec(&mut rng, n)).collect();
    let prev = ActiveNodeSet::all(n);
    let mut tape = PoolTape::default();
    let (_, active) = dynamic_pool(&maps, &prev, 4, &mut tape).unwrap();
    let g = dynamic_pool_backward(&tape, &upstream).unwrap();
    for i in 0..2 {
        let mut z = maps[i].clone();
        for v in 0..n {
            // Random distinct values: the selection is locally constant.
            let num = fd(&mut z, v, &mut |zi| {
                let mut all = maps.clone();
                all[i] = zi.to_vec();
                let (p, _) = dynamic_pool(&all, &prev, 4, &mut PoolTape::default()).unwrap();
                weighted(&p, &upstream)
            });
            assert_close(g[i][v], num, &format!("map {i} vertex {v}"));
            let kept = active.per_map()[i].contains(&v);
            assert_eq!(g[i][v] != 0.0, kept && upstream[i][v] != 0.0);
        }
    }
}

#[test]
fn statistical_gradients() {
    let l = lap(4, 5);
    let n = 20;
    let mut rng = SplitMix64::new(30);
    let k_max = 4;
    let maps: Vec<Vec<f64>> = (0..2).map(|_| rand_vec(&mut rng, n)).collect();
    let upstream: Vec<Vec<f64>> = (0..2)
        .map(|_| rand_vec(&mut rng, stat_len(k_max)))
        .collect();
    let mut tape = StatTape::default();
    statistical_forward(&maps, &l, k_max, &mut tape).unwrap();
    let g = statistical_backward(&l, &tape, &upstream).unwrap();
    for i in 0..2 {
        let mut z = maps[i].clone();
        for v in 0..n {
            let num = fd(&mut z, v, &mut |zi| {
                let mut all = maps.clone();
                all[i] = zi.to_vec();
                let phi = statistical_forward(&all, &l, k_max, &mut StatTape::default()).unwrap();
                weighted(&phi, &upstream)
            });
            assert_close(g[i][v], num, &format!("map {i} vertex {v}"));
        }
    }
}

#[test]
fn statistical_subgradient_at_zero() {
    // A zero map has |t| non-differentiable everywhere; the convention is 0.
    let l = lap(3, 3);
    let mut tape = StatTape::default();
    statistical_forward(&[vec![0.0; 9]], &l, 2, &mut tape).unwrap();
    let g = statistical_backward(&l, &tape, &[vec![1.0; stat_len(2)]]).unwrap();
    assert!(g[0].iter().all(|&v| v == 0.0));
}

#[test]
fn head_gradients() {
    let mut rng = SplitMix64::new(40);
    let dims = [7, 5, 4, 3];
    let layers: Vec<FcParams> = dims
        .windows(2)
        .map(|d| {
            FcParams::new(
                rand_vec(&mut rng, d[0] * d[1]),
                rand_vec(&mut rng, d[1]),
                d[0],
                d[1],
            )
            .unwrap()
        })
        .collect();
    let x = rand_vec(&mut rng, dims[0]);
    let label = 2;
    let loss = |layers: &[FcParams], x: &[f64]| {
        let p = fc_softmax_forward(layers, x, &mut FcTape::default()).unwrap();
        nll_loss(&p, label).unwrap().0
    };
    let mut tape = FcTape::default();
    let probs = fc_softmax_forward(&layers, &x, &mut tape).unwrap();
    let (_, grad_logits) = nll_loss(&probs, label).unwrap();
    let (grads, gx) = fc_softmax_backward(&layers, &tape, &grad_logits).unwrap();

    for li in 0..layers.len() {
        let mut wts = layers[li].weights.clone();
        for j in 0..wts.len() {
            let num = fd(&mut wts, j, &mut |w| {
                let mut ls = layers.clone();
                ls[li].weights = w.to_vec();
                loss(&ls, &x)
            });
            assert_close(grads[li].weights[j], num, &format!("fc{li}.weight[{j}]"));
        }
        let mut bias = layers[li].bias.clone();
        for j in 0..bias.len() {
            let num = fd(&mut bias, j, &mut |b| {
                let mut ls = layers.clone();
                ls[li].bias = b.to_vec();
                loss(&ls, &x)
            });
            assert_close(grads[li].bias[j], num, &format!("fc{li}.bias[{j}]"));
        }
    }
    let mut xs = x.clone();
    for j in 0..xs.len() {
        let num = fd(&mut xs, j, &mut |xv| loss(&layers, xv));
        assert_close(gx[j], num, &format!("input[{j}]"));
    }
}

#[test]
fn whole_network_on_four_by_four() {
    let spec = parse_architecture("SC[2,2]-DP[6]-S[2]-FC[3]", (4, 4), 3).unwrap();
    let report = gradcheck(&spec, 5, 1e-4).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(report.tensors.len(), 4);
}

#[test]
fn every_tensor_reported_once() {
    let spec =
        parse_architecture("SC[2,2]-DP[8]-SC[2,2]-DP[6]-S[3]-FC[6]-FC[3]", (5, 5), 3).unwrap();
    let report = gradcheck(&spec, 0, 1e-4).unwrap();
    let names: Vec<&str> = report.tensors.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(
        names,
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
    assert!(report.passed(), "{report}");
}

#[test]
fn fault_injection_flags_only_the_corrupted_tensor() {
    let spec =
        parse_architecture("SC[2,2]-DP[8]-SC[2,2]-DP[6]-S[3]-FC[6]-FC[3]", (5, 5), 3).unwrap();
    let l = lap(5, 5);
    let params = tigranet::network::init_params(&spec, 3).unwrap();
    let mut rng = SplitMix64::new(50);
    let y: Vec<f64> = (0..25).map(|_| rng.next_f64()).collect();
    let (_, _, good) = loss_and_grad(&spec, &params, &l, &y, 0).unwrap();
    let mut bad = good.clone();
    bad.conv[1].beta.iter_mut().for_each(|g| *g *= 2.0);
    let report = compare_gradients(&bad, &good, 1e-4);
    let failed: Vec<&str> = report
        .tensors
        .iter()
        .filter(|t| !t.passed)
        .map(|t| t.name.as_str())
        .collect();
    assert_eq!(failed, ["sc1.beta"]);
}
