//! Image datasets: IDX ingestion, the MNIST subsets used for experiments,
//! and the rotation / translation transforms applied to test images.

mod idx;
mod sets;
mod transform;

pub use idx::{
    load_mnist_dir, read_idx, write_idx, IMAGES_FILE, IMAGE_MAGIC, LABELS_FILE, LABEL_MAGIC,
};
pub use sets::{
    make_mnist012, make_variant, transform_dataset, write_manifest, ImageDataset, Splits,
    TransformKind, TransformSpec, Variant,
};
pub use transform::{pad_center, resize_bilinear, rotate_image, translate_image, MAX_SHIFT};
