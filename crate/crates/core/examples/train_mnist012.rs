//! Trains the reference architecture on the 0/1/2 MNIST subset and scores
//! plain, quarter-turn and arbitrarily rotated test images.
//!
//! ```text
//! TIGRA_DATA_DIR=/path/to/mnist cargo run --release --example train_mnist012 -- [seed] [epochs] [lr] [batch]
//! ```

use std::time::Instant;

use tigranet::data::{load_mnist_dir, make_mnist012, transform_dataset, TransformKind};
use tigranet::network::parse_architecture;
use tigranet::optim::{evaluate, train, TrainConfig};

const ARCH: &str = "SC[3,3]-DP[300]-SC[6,3]-DP[100]-S[10]-FC[50]-FC[30]-FC[10]";

fn main() -> tigranet::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let epochs = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let lr = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let batch_size = args.next().and_then(|s| s.parse().ok()).unwrap_or(32);
    let dir = std::env::var("TIGRA_DATA_DIR").unwrap_or_else(|_| "data/mnist".into());

    let source = load_mnist_dir(&dir)?;
    let splits = make_mnist012(&source, seed)?;
    let spec = parse_architecture(ARCH, (source.height, source.width), 10)?;
    let config = TrainConfig {
        epochs,
        seed,
        lr,
        batch_size,
        ..TrainConfig::default()
    };

    let start = Instant::now();
    let (ckpt, metrics) = train(&spec, &config, &splits.train, &splits.val)?;
    println!(
        "trained {epochs} epochs in {:.1}s",
        start.elapsed().as_secs_f64()
    );
    for e in metrics
        .epochs
        .iter()
        .filter(|e| e.epoch % 5 == 0 || e.epoch == 1)
    {
        println!(
            "epoch {:>3}  loss {:.4}  train {:.3}  val {}",
            e.epoch,
            e.train_loss,
            e.train_acc,
            e.val_acc.map(|v| format!("{v:.3}")).unwrap_or_default()
        );
    }
    println!("best epoch {}", ckpt.epoch);

    let plain = evaluate(&ckpt, &splits.test)?.accuracy;
    let (quarter, _) = transform_dataset(&splits.test, TransformKind::QuarterTurn, seed)?;
    let quarter = evaluate(&ckpt, &quarter)?.accuracy;
    let rotated = evaluate(&ckpt, &splits.test_transformed)?.accuracy;
    println!(
        "train (best ckpt) {:.3}",
        evaluate(&ckpt, &splits.train)?.accuracy
    );
    println!("test {plain:.3}  quarter-turns {quarter:.3}  any angle {rotated:.3}");
    Ok(())
}
