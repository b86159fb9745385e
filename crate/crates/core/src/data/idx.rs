//! MNIST's IDX container: big-endian `u32` magic, `u32` dimensions, then
//! raw `u8` payload. Images use magic `0x00000803` (count, rows, cols),
//! labels `0x00000801` (count).

use std::fs;
use std::path::Path;

use super::sets::ImageDataset;
use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const IMAGES_FILE: &str = "train-images-idx3-ubyte";
pub const LABELS_FILE: &str = "train-labels-idx1-ubyte";

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| Error::IdxTruncated(format!("{what} header ends at byte {}", bytes.len())))
}

/// Reads an image/label file pair. Pixels are scaled by `1/255`.
pub fn read_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<ImageDataset> {
    let img = read_file(images_path.as_ref())?;
    let lab = read_file(labels_path.as_ref())?;

    let magic = be_u32(&img, 0, "image")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::IdxMagic {
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let magic = be_u32(&lab, 0, "label")?;
    if magic != LABEL_MAGIC {
        return Err(Error::IdxMagic {
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(&img, 4, "image")? as usize;
    let rows = be_u32(&img, 8, "image")? as usize;
    let cols = be_u32(&img, 12, "image")? as usize;
    let label_count = be_u32(&lab, 4, "label")? as usize;

    let pixels = rows * cols;
    let payload = &img[16..];
    if payload.len() != count * pixels {
        return Err(Error::IdxTruncated(format!(
            "image payload has {} bytes, header promises {count} x {rows} x {cols}",
            payload.len()
        )));
    }
    let labels = &lab[8..];
    if labels.len() != label_count {
        return Err(Error::IdxTruncated(format!(
            "label payload has {} bytes, header promises {label_count}",
            labels.len()
        )));
    }
    if label_count != count {
        return Err(Error::IdxCountMismatch {
            images: count,
            labels: label_count,
        });
    }
    let images = if pixels == 0 {
        vec![Vec::new(); count]
    } else {
        payload
            .chunks_exact(pixels)
            .map(|c| c.iter().map(|&b| b as f64 / 255.0).collect())
            .collect()
    };
    ImageDataset::new(
        rows,
        cols,
        images,
        labels.iter().map(|&l| l as usize).collect(),
    )
}

/// Writes `ds` as an IDX pair; pixels are rounded to the nearest byte.
pub fn write_idx(
    ds: &ImageDataset,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    let mut img = Vec::with_capacity(16 + ds.len() * ds.height * ds.width);
    for v in [
        IMAGE_MAGIC,
        ds.len() as u32,
        ds.height as u32,
        ds.width as u32,
    ] {
        img.extend_from_slice(&v.to_be_bytes());
    }
    for image in &ds.images {
        img.extend(
            image
                .iter()
                .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8),
        );
    }
    let mut lab = Vec::with_capacity(8 + ds.len());
    for v in [LABEL_MAGIC, ds.len() as u32] {
        lab.extend_from_slice(&v.to_be_bytes());
    }
    for &l in &ds.labels {
        let byte = u8::try_from(l)
            .map_err(|_| Error::InvalidArgument(format!("label {l} does not fit a byte")))?;
        lab.push(byte);
    }
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    fs::write(ip, img).map_err(|e| Error::io(ip, e))?;
    fs::write(lp, lab).map_err(|e| Error::io(lp, e))?;
    Ok(())
}

/// Reads `train-images-idx3-ubyte` / `train-labels-idx1-ubyte` from `dir`.
pub fn load_mnist_dir(dir: impl AsRef<Path>) -> Result<ImageDataset> {
    let dir = dir.as_ref();
    read_idx(dir.join(IMAGES_FILE), dir.join(LABELS_FILE))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(vals: &[u32]) -> Vec<u8> {
        vals.iter().flat_map(|v| v.to_be_bytes()).collect()
    }

    #[test]
    fn two_by_two_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = (dir.path().join("i"), dir.path().join("l"));
        let mut img = header(&[IMAGE_MAGIC, 1, 2, 2]);
        img.extend_from_slice(&[0, 255, 128, 64]);
        fs::write(&ip, img).unwrap();
        let mut lab = header(&[LABEL_MAGIC, 1]);
        lab.push(7);
        fs::write(&lp, lab).unwrap();
        let ds = read_idx(&ip, &lp).unwrap();
        assert_eq!((ds.height, ds.width, ds.len()), (2, 2, 1));
        assert_eq!(ds.images[0], vec![0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
        assert!((ds.images[0][2] - 0.50196).abs() < 1e-5);
        assert!((ds.images[0][3] - 0.25098).abs() < 1e-5);
        assert_eq!(ds.labels, vec![7]);
    }

    #[test]
    fn distinct_errors() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = (dir.path().join("i"), dir.path().join("l"));
        let mut img = header(&[IMAGE_MAGIC, 2, 1, 2]);
        img.extend_from_slice(&[1, 2, 3, 4]);
        fs::write(&ip, &img).unwrap();

        fs::write(
            &lp,
            header(&[LABEL_MAGIC, 1])
                .into_iter()
                .chain([0])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(matches!(
            read_idx(&ip, &lp),
            Err(Error::IdxCountMismatch {
                images: 2,
                labels: 1
            })
        ));

        fs::write(
            &lp,
            header(&[0x0000_0802, 2])
                .into_iter()
                .chain([0, 1])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert!(matches!(
            read_idx(&ip, &lp),
            Err(Error::IdxMagic { found: 0x802, .. })
        ));

        fs::write(
            &lp,
            header(&[LABEL_MAGIC, 2])
                .into_iter()
                .chain([0, 1])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        fs::write(&ip, &img[..img.len() - 1]).unwrap();
        assert!(matches!(read_idx(&ip, &lp), Err(Error::IdxTruncated(_))));
        fs::write(&ip, &img[..6]).unwrap();
        assert!(matches!(read_idx(&ip, &lp), Err(Error::IdxTruncated(_))));
    }
}
