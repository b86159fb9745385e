//! Builds the 8-neighbour pixel graph, its normalized Laplacian and the
//! dense eigendecomposition used as a reference in tests.

use tigranet::graph::GridGraph;
use tigranet::spectral::SpectralOracle;

fn main() -> tigranet::Result<()> {
    let g = GridGraph::new(5, 5)?;
    println!(
        "5x5 grid: {} vertices, {} edges",
        g.num_vertices(),
        g.num_edges()
    );
    println!("degrees, row by row:");
    for r in 0..5 {
        let row: Vec<String> = (0..5)
            .map(|c| format!("{}", g.degrees()[g.index(r, c)]))
            .collect();
        println!("  {}", row.join(" "));
    }

    let l = g.laplacian()?;
    let lsqrt = l.apply(l.sqrt_degrees());
    let residual = lsqrt.iter().map(|v| v.abs()).fold(0.0, f64::max);
    println!("|L D^1/2 1|_inf = {residual:.1e}");

    let oracle = SpectralOracle::new(&l)?;
    let ev = oracle.eigenvalues();
    println!(
        "spectrum: min {:.3e}, max {:.6}, {} eigenvalues",
        ev[0],
        ev[ev.len() - 1],
        ev.len()
    );
    Ok(())
}
