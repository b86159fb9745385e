//! Initial filters: each polynomial is a least-squares fit of one
//! rectangular window on the spectrum [0, 2]. Prints the fitted responses
//! on a coarse grid.

use tigranet::spectral::{init_filter_bank, spectral_response, SpectralWindow};

fn main() -> tigranet::Result<()> {
    let (filters, degree) = (4, 5);
    let bank = init_filter_bank(filters, degree)?;
    for (k, (f, w)) in bank.iter().zip(SpectralWindow::tiling(filters)).enumerate() {
        let coeffs: Vec<String> = f
            .coefficients()
            .iter()
            .map(|c| format!("{c:+.3}"))
            .collect();
        println!(
            "filter {k}: window ({:.2}, {:.2})  alpha = [{}]",
            w.a,
            w.b,
            coeffs.join(", ")
        );
    }
    println!();
    print!("lambda ");
    for k in 0..filters {
        print!("   h{k}   ");
    }
    println!();
    let curves: Vec<Vec<(f64, f64)>> = bank
        .iter()
        .map(|f| spectral_response(f, 11))
        .collect::<Result<_, _>>()?;
    for j in 0..11 {
        print!("{:5.2}  ", curves[0][j].0);
        for c in &curves {
            print!("{:+7.3}  ", c[j].1);
        }
        println!();
    }
    Ok(())
}
