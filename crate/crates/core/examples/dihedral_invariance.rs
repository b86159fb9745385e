//! Class probabilities of a randomly initialised network under the eight
//! rotations and reflections of a square image.

use tigranet::graph::{AutomorphismKind, GridAutomorphism, GridGraph};
use tigranet::network::{init_params, parse_architecture, predict};
use tigranet::rng::SplitMix64;

fn main() -> tigranet::Result<()> {
    let spec = parse_architecture("SC[3,3]-DP[20]-SC[4,3]-DP[10]-S[4]-FC[8]-FC[3]", (9, 9), 3)?;
    let params = init_params(&spec, 1)?;
    let l = GridGraph::new(9, 9)?.laplacian()?;
    let mut rng = SplitMix64::new(2);
    let img: Vec<f64> = (0..81).map(|_| rng.next_f64()).collect();

    let base = predict(&spec, &params, &l, &img)?;
    println!("{:<14} probabilities", "transform");
    for kind in AutomorphismKind::DIHEDRAL {
        let moved = GridAutomorphism::new(kind, 9, 9)?.apply(&img)?;
        let p = predict(&spec, &params, &l, &moved)?;
        let diff = p
            .iter()
            .zip(&base)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let shown: Vec<String> = p.iter().map(|v| format!("{v:.9}")).collect();
        println!(
            "{:<14} {}  (max diff {diff:.1e})",
            format!("{kind:?}"),
            shown.join(" ")
        );
    }
    Ok(())
}
