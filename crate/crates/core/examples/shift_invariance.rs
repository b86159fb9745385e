//! Integer translations of content that stays away from the border leave
//! the class probabilities unchanged; near the border they do not.

use tigranet::graph::{AutomorphismKind, GridAutomorphism, GridGraph};
use tigranet::network::{init_params, parse_architecture, predict};
use tigranet::rng::SplitMix64;

fn main() -> tigranet::Result<()> {
    let side = 24;
    let spec = parse_architecture(
        "SC[2,2]-DP[4]-SC[2,2]-DP[2]-S[2]-FC[6]-FC[3]",
        (side, side),
        3,
    )?;
    let params = init_params(&spec, 5)?;
    let l = GridGraph::new(side, side)?.laplacian()?;
    let mut rng = SplitMix64::new(6);
    let mut img = vec![0.0; side * side];
    for r in 10..14 {
        for c in 10..14 {
            img[r * side + c] = rng.uniform(0.2, 1.0);
        }
    }
    let base = predict(&spec, &params, &l, &img)?;
    for (dr, dc) in [(0, 1), (-3, 2), (3, -3), (-9, 0), (0, 10)] {
        let moved =
            GridAutomorphism::new(AutomorphismKind::Shift(dr, dc), side, side)?.apply(&img)?;
        let p = predict(&spec, &params, &l, &moved)?;
        let diff = p
            .iter()
            .zip(&base)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("shift ({dr:+}, {dc:+}): max probability change {diff:.1e}");
    }
    Ok(())
}
