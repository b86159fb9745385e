//! Writes a tiny IDX image/label pair, reads it back and builds the
//! 0/1/2 experiment splits with their audit manifests.

use tigranet::data::{
    load_mnist_dir, make_mnist012, write_idx, write_manifest, ImageDataset, IMAGES_FILE,
    LABELS_FILE,
};
use tigranet::rng::SplitMix64;

fn main() -> tigranet::Result<()> {
    let dir = std::env::temp_dir().join("tigranet-idx-example");
    std::fs::create_dir_all(&dir).map_err(|e| tigranet::Error::Data(e.to_string()))?;

    let mut rng = SplitMix64::new(1);
    let images: Vec<Vec<f64>> = (0..1000)
        .map(|_| (0..36).map(|_| (rng.below(256) as f64) / 255.0).collect())
        .collect();
    let labels: Vec<usize> = (0..1000).map(|i| i % 4).collect();
    let ds = ImageDataset::new(6, 6, images, labels)?;
    write_idx(&ds, dir.join(IMAGES_FILE), dir.join(LABELS_FILE))?;

    let back = load_mnist_dir(&dir)?;
    println!(
        "read {} images of {}x{}, identical: {}",
        back.len(),
        back.height,
        back.width,
        back == ds
    );

    let splits = make_mnist012(&back, 3)?;
    println!(
        "mnist012 splits: train {}, val {}, test {}",
        splits.train.len(),
        splits.val.len(),
        splits.test.len()
    );
    write_manifest(&dir, &splits)?;
    println!("manifests in {}", dir.display());
    Ok(())
}
