//! Analytic gradients against central differences for every tensor of a
//! small network.
//!
//! ```text
//! cargo run --release --example gradient_check -- ["SC[2,2]-DP[8]-S[3]-FC[3]"] [side]
//! ```

use tigranet::network::parse_architecture_inferred;
use tigranet::optim::gradcheck;

fn main() -> tigranet::Result<()> {
    let mut args = std::env::args().skip(1);
    let arch = args
        .next()
        .unwrap_or_else(|| "SC[2,2]-DP[8]-SC[2,2]-DP[6]-S[3]-FC[6]-FC[3]".into());
    let side = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let spec = parse_architecture_inferred(&arch, (side, side))?;
    println!("{spec} on {side}x{side}");
    let report = gradcheck(&spec, 0, 1e-4)?;
    println!("{report}");
    Ok(())
}
