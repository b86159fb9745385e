//! In-memory datasets and the experiment splits built from MNIST.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::transform::{pad_center, resize_bilinear, rotate_image, translate_image, MAX_SHIFT};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Row-major grayscale images in `[0, 1]` on a common canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset {
    pub height: usize,
    pub width: usize,
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl ImageDataset {
    pub fn new(
        height: usize,
        width: usize,
        images: Vec<Vec<f64>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        if let Some(i) = images.iter().position(|img| img.len() != height * width) {
            return Err(Error::Shape(format!(
                "image {i} has {} pixels, canvas is {height}x{width}",
                images[i].len()
            )));
        }
        Ok(Self {
            height,
            width,
            images,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Copy holding the given examples, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            height: self.height,
            width: self.width,
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Applies `f` to every image, producing a `height x width` canvas.
    pub fn map_images(
        &self,
        height: usize,
        width: usize,
        f: impl Fn(&[f64]) -> Result<Vec<f64>>,
    ) -> Result<Self> {
        let images = self
            .images
            .iter()
            .map(|img| f(img))
            .collect::<Result<Vec<_>>>()?;
        Self::new(height, width, images, self.labels.clone())
    }
}

/// Transform applied to one test image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformSpec {
    None,
    /// Counter-clockwise, degrees in `[0, 360)`.
    Rotate(f64),
    /// Columns right, rows down.
    Translate(i64, i64),
}

impl TransformSpec {
    pub fn apply(&self, img: &[f64], height: usize, width: usize) -> Result<Vec<f64>> {
        match *self {
            TransformSpec::None => Ok(img.to_vec()),
            TransformSpec::Rotate(a) => rotate_image(img, height, width, a),
            TransformSpec::Translate(dx, dy) => translate_image(img, height, width, dx, dy),
        }
    }

    fn manifest_fields(&self) -> (&'static str, String, String) {
        match *self {
            TransformSpec::None => ("none", String::new(), String::new()),
            TransformSpec::Rotate(a) => ("rotate", format!("{a:.17e}"), String::new()),
            TransformSpec::Translate(dx, dy) => ("translate", dx.to_string(), dy.to_string()),
        }
    }
}

/// How random test transforms are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    /// Angle uniform in `[0, 360)`.
    Rotate,
    /// Uniform multiple of 90 degrees.
    QuarterTurn,
    /// `dx, dy` uniform in `[-MAX_SHIFT, MAX_SHIFT]`.
    Translate,
}

impl TransformKind {
    fn sample(self, rng: &mut SplitMix64) -> TransformSpec {
        match self {
            TransformKind::Rotate => TransformSpec::Rotate(rng.uniform(0.0, 360.0)),
            TransformKind::QuarterTurn => TransformSpec::Rotate(90.0 * rng.below(4) as f64),
            TransformKind::Translate => {
                let span = (2 * MAX_SHIFT + 1) as u64;
                let dx = rng.below(span) as i64 - MAX_SHIFT;
                let dy = rng.below(span) as i64 - MAX_SHIFT;
                TransformSpec::Translate(dx, dy)
            }
        }
    }
}

/// Applies an independently drawn transform to every image. Image `i` uses
/// the stream `SplitMix64::derive(seed, i)`, so results do not depend on
/// how many images precede it.
pub fn transform_dataset(
    ds: &ImageDataset,
    kind: TransformKind,
    seed: u64,
) -> Result<(ImageDataset, Vec<TransformSpec>)> {
    let specs: Vec<TransformSpec> = (0..ds.len())
        .map(|i| kind.sample(&mut SplitMix64::derive(seed, i as u64)))
        .collect();
    let images = ds
        .images
        .iter()
        .zip(&specs)
        .map(|(img, t)| t.apply(img, ds.height, ds.width))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        ImageDataset::new(ds.height, ds.width, images, ds.labels.clone())?,
        specs,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// 26x26 canvas, rotated test set.
    Rot,
    /// 34x34 canvas, translated test set.
    Trans,
}

impl Variant {
    pub fn canvas(self) -> (usize, usize) {
        match self {
            Variant::Rot => (26, 26),
            Variant::Trans => (34, 34),
        }
    }

    pub fn transform(self) -> TransformKind {
        match self {
            Variant::Rot => TransformKind::Rotate,
            Variant::Trans => TransformKind::Translate,
        }
    }
}

/// Train / validation / test splits plus a transformed copy of the test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: ImageDataset,
    pub val: ImageDataset,
    pub test: ImageDataset,
    pub test_transformed: ImageDataset,
    pub transforms: Vec<TransformSpec>,
    /// Source indices of each split, for the manifests.
    pub train_index: Vec<usize>,
    pub val_index: Vec<usize>,
    pub test_index: Vec<usize>,
}

impl Splits {
    /// Keeps at most `train`, `val` and `test` examples of the respective splits.
    pub fn capped(mut self, (train, val, test): (usize, usize, usize)) -> Self {
        fn cut(ds: &mut ImageDataset, idx: &mut Vec<usize>, n: usize) {
            ds.images.truncate(n);
            ds.labels.truncate(n);
            idx.truncate(n);
        }
        cut(&mut self.train, &mut self.train_index, train);
        cut(&mut self.val, &mut self.val_index, val);
        cut(&mut self.test, &mut self.test_index, test);
        self.test_transformed.images.truncate(test);
        self.test_transformed.labels.truncate(test);
        self.transforms.truncate(test);
        self
    }
}

// Streams of the split seed.
const SHUFFLE_STREAM: u64 = 0;
const TRANSFORM_STREAM: u64 = 1;

fn sample_splits(
    ds: &ImageDataset,
    keep: impl Fn(usize) -> bool,
    sizes: [usize; 3],
    seed: u64,
) -> Result<[Vec<usize>; 3]> {
    let mut pool: Vec<usize> = (0..ds.len()).filter(|&i| keep(ds.labels[i])).collect();
    let need: usize = sizes.iter().sum();
    if pool.len() < need {
        return Err(Error::Data(format!(
            "need {need} source images ({} + {} + {}), only {} available",
            sizes[0],
            sizes[1],
            sizes[2],
            pool.len()
        )));
    }
    SplitMix64::derive(seed, SHUFFLE_STREAM).shuffle(&mut pool);
    let val_end = sizes[0] + sizes[1];
    Ok([
        pool[..sizes[0]].to_vec(),
        pool[sizes[0]..val_end].to_vec(),
        pool[val_end..need].to_vec(),
    ])
}

fn finish(
    source: &ImageDataset,
    [train_index, val_index, test_index]: [Vec<usize>; 3],
    kind: TransformKind,
    seed: u64,
) -> Result<Splits> {
    let test = source.select(&test_index);
    let (test_transformed, transforms) = transform_dataset(
        &test,
        kind,
        SplitMix64::derive(seed, TRANSFORM_STREAM).next_u64(),
    )?;
    Ok(Splits {
        train: source.select(&train_index),
        val: source.select(&val_index),
        test,
        test_transformed,
        transforms,
        train_index,
        val_index,
        test_index,
    })
}

/// Digits 0, 1 and 2 only: 500 train, 100 validation, 100 test, sampled
/// without replacement. The transformed test copy is rotated by uniform
/// random angles.
pub fn make_mnist012(ds: &ImageDataset, seed: u64) -> Result<Splits> {
    let parts = sample_splits(ds, |l| l <= 2, [500, 100, 100], seed)?;
    finish(ds, parts, TransformKind::Rotate, seed)
}

/// All digits except 9 on the variant's canvas. Default split sizes are
/// 50000 / 3000 / 9000; `subsample` replaces them. Train and validation
/// images are untransformed.
pub fn make_variant(
    ds: &ImageDataset,
    variant: Variant,
    seed: u64,
    subsample: Option<(usize, usize, usize)>,
) -> Result<Splits> {
    let (a, b, c) = subsample.unwrap_or((50_000, 3_000, 9_000));
    let parts = sample_splits(ds, |l| l != 9, [a, b, c], seed)?;
    let (h, w) = variant.canvas();
    let (sh, sw) = (ds.height, ds.width);
    let used: Vec<usize> = parts.iter().flatten().copied().collect();
    // Only the sampled images are resampled; the rest stay empty.
    let mut images = vec![Vec::new(); ds.len()];
    for &i in &used {
        images[i] = match variant {
            Variant::Rot => resize_bilinear(&ds.images[i], sh, sw, h, w)?,
            Variant::Trans => pad_center(&ds.images[i], sh, sw, h, w)?,
        };
    }
    let canvas = ImageDataset {
        height: h,
        width: w,
        images,
        labels: ds.labels.clone(),
    };
    finish(&canvas, parts, variant.transform(), seed)
}

/// Writes `manifest_{train,val,test}.csv` into `dir` with columns
/// `index,label,kind,param1,param2`; `index` refers to the source dataset.
pub fn write_manifest(dir: impl AsRef<Path>, splits: &Splits) -> Result<()> {
    let dir = dir.as_ref();
    let parts = [
        ("train", &splits.train_index, &splits.train.labels, None),
        ("val", &splits.val_index, &splits.val.labels, None),
        (
            "test",
            &splits.test_index,
            &splits.test.labels,
            Some(&splits.transforms),
        ),
    ];
    for (name, index, labels, transforms) in parts {
        let mut out = String::from("index,label,kind,param1,param2\n");
        for (k, (&i, &l)) in index.iter().zip(labels.iter()).enumerate() {
            let t = transforms.map_or(TransformSpec::None, |ts| ts[k]);
            let (kind, p1, p2) = t.manifest_fields();
            writeln!(out, "{i},{l},{kind},{p1},{p2}").expect("write to String");
        }
        let path = dir.join(format!("manifest_{name}.csv"));
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize, classes: usize) -> ImageDataset {
        let images = (0..n)
            .map(|i| vec![(i % 7) as f64 / 7.0; 28 * 28])
            .collect();
        let labels = (0..n).map(|i| i % classes).collect();
        ImageDataset::new(28, 28, images, labels).unwrap()
    }

    fn disjoint(s: &Splits) -> bool {
        let mut all: Vec<usize> = s
            .train_index
            .iter()
            .chain(&s.val_index)
            .chain(&s.test_index)
            .copied()
            .collect();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        all.len() == n
    }

    #[test]
    fn mnist012_sizes_labels_disjoint() {
        let ds = synthetic(3000, 10);
        let s = make_mnist012(&ds, 3).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (500, 100, 100));
        assert!(disjoint(&s));
        for d in [&s.train, &s.val, &s.test] {
            assert!(d.labels.iter().all(|&l| l <= 2));
        }
        assert_eq!(s.transforms.len(), 100);
        assert!(s
            .transforms
            .iter()
            .all(|t| matches!(t, TransformSpec::Rotate(a) if (0.0..360.0).contains(a))));
    }

    #[test]
    fn deterministic_per_seed() {
        let ds = synthetic(3000, 10);
        assert_eq!(
            make_mnist012(&ds, 5).unwrap(),
            make_mnist012(&ds, 5).unwrap()
        );
        assert_ne!(
            make_mnist012(&ds, 5).unwrap().train_index,
            make_mnist012(&ds, 6).unwrap().train_index
        );
    }

    #[test]
    fn capping() {
        let ds = synthetic(3000, 10);
        let full = make_mnist012(&ds, 3).unwrap();
        let s = full.clone().capped((50, 10, 20));
        assert_eq!(
            (s.train.len(), s.val.len(), s.test.len(), s.transforms.len()),
            (50, 10, 20, 20)
        );
        assert_eq!(s.train_index[..], full.train_index[..50]);
        assert_eq!(
            s.test_transformed.images[..],
            full.test_transformed.images[..20]
        );
    }

    #[test]
    fn insufficient_source() {
        let ds = synthetic(600, 3);
        assert!(matches!(make_mnist012(&ds, 1), Err(Error::Data(_))));
        assert!(make_variant(&ds, Variant::Rot, 1, None).is_err());
    }

    #[test]
    fn variants() {
        let ds = synthetic(1200, 10);
        for v in [Variant::Rot, Variant::Trans] {
            let s = make_variant(&ds, v, 2, Some((200, 30, 100))).unwrap();
            assert_eq!((s.train.len(), s.val.len(), s.test.len()), (200, 30, 100));
            assert_eq!((s.train.height, s.train.width), v.canvas());
            assert_eq!(
                (s.test_transformed.height, s.test_transformed.width),
                v.canvas()
            );
            assert!(disjoint(&s));
            for d in [&s.train, &s.val, &s.test] {
                assert!(d.labels.iter().all(|&l| l < 9));
            }
        }
        let s = make_variant(&ds, Variant::Trans, 2, Some((10, 10, 50))).unwrap();
        assert!(s.transforms.iter().all(
            |t| matches!(*t, TransformSpec::Translate(dx, dy) if dx.abs() <= 6 && dy.abs() <= 6)
        ));
    }

    #[test]
    fn quarter_turns() {
        let ds = synthetic(40, 3);
        let (_, specs) = transform_dataset(&ds, TransformKind::QuarterTurn, 9).unwrap();
        assert!(specs
            .iter()
            .all(|t| matches!(*t, TransformSpec::Rotate(a) if a % 90.0 == 0.0)));
    }

    #[test]
    fn manifests() {
        let ds = synthetic(1000, 10);
        let s = make_variant(&ds, Variant::Trans, 4, Some((20, 5, 7))).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_manifest(dir.path(), &s).unwrap();
        let test = fs::read_to_string(dir.path().join("manifest_test.csv")).unwrap();
        let lines: Vec<&str> = test.lines().collect();
        assert_eq!(lines[0], "index,label,kind,param1,param2");
        assert_eq!(lines.len(), 8);
        assert!(lines[1].contains(",translate,"));
        let train = fs::read_to_string(dir.path().join("manifest_train.csv")).unwrap();
        assert_eq!(train.lines().count(), 21);
        assert!(train.lines().nth(1).unwrap().ends_with(",none,,"));
    }
}
