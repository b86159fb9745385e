//! The statistical layer: Chebyshev-filtered magnitudes summarised by their
//! mean and variance. A rotated image yields the same features.

use tigranet::graph::{AutomorphismKind, GridAutomorphism, GridGraph};
use tigranet::layers::{statistical_forward, StatTape};

fn main() -> tigranet::Result<()> {
    let side = 12;
    let l = GridGraph::new(side, side)?.laplacian()?;
    // An off-centre bar.
    let mut img = vec![0.0; side * side];
    for r in 3..9 {
        img[r * side + 4] = 1.0;
        img[r * side + 5] = 0.5;
    }
    let k_max = 4;
    let phi = statistical_forward(&[img.clone()], &l, k_max, &mut StatTape::default())?;
    let turned = GridAutomorphism::new(AutomorphismKind::Rot90, side, side)?.apply(&img)?;
    let phi_turned = statistical_forward(&[turned], &l, k_max, &mut StatTape::default())?;
    println!(" k    mean        variance    |diff| after rot90");
    for k in 0..=k_max {
        let diff = (phi[0][2 * k] - phi_turned[0][2 * k])
            .abs()
            .max((phi[0][2 * k + 1] - phi_turned[0][2 * k + 1]).abs());
        println!(
            "{k:2}  {:.6e}  {:.6e}  {diff:.1e}",
            phi[0][2 * k],
            phi[0][2 * k + 1]
        );
    }
    Ok(())
}
