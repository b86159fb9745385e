//! Mini-batch training with Adam and argmax evaluation.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::adam::AdamState;
use crate::data::ImageDataset;
use crate::error::{Error, Result};
use crate::graph::{GridGraph, NormalizedLaplacian};
use crate::layers::nll_loss;
use crate::network::{init_params, loss_and_grad, predict, Checkpoint, NetworkParams, NetworkSpec};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub shuffle: bool,
    /// Validation accuracy is computed every this many epochs and after the last one.
    pub eval_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 16,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            shuffle: true,
            eval_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.eval_every == 0 {
            return Err(Error::InvalidArgument(
                "epochs, batch size and eval interval must be at least 1".into(),
            ));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate {} is not usable",
                self.lr
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean loss over the epoch's batches, measured before each update.
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub epochs: Vec<EpochMetrics>,
    pub best_epoch: usize,
    pub best_val_acc: Option<f64>,
    pub test_acc: Option<f64>,
    pub transformed_test_acc: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl Metrics {
    /// `epoch,train_loss,train_acc,val_acc` rows and a trailing `# ...` summary.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,train_acc,val_acc\n");
        for e in &self.epochs {
            writeln!(
                out,
                "{},{:.6},{:.6},{}",
                e.epoch,
                e.train_loss,
                e.train_acc,
                opt(e.val_acc)
            )
            .expect("write to String");
        }
        write!(
            out,
            "# best_epoch={} best_val_acc={}",
            self.best_epoch,
            opt(self.best_val_acc)
        )
        .expect("write to String");
        if let Some(t) = self.test_acc {
            write!(out, " test_acc={t:.6}").expect("write to String");
        }
        if let Some(t) = self.transformed_test_acc {
            write!(out, " transformed_test_acc={t:.6}").expect("write to String");
        }
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub mean_loss: f64,
}

fn check_dataset(spec: &NetworkSpec, ds: &ImageDataset, what: &str) -> Result<()> {
    if (ds.height, ds.width) != (spec.height, spec.width) {
        return Err(Error::Shape(format!(
            "{what} images are {}x{} but the network expects {}x{}",
            ds.height, ds.width, spec.height, spec.width
        )));
    }
    if let Some(&l) = ds.labels.iter().find(|&&l| l >= spec.num_classes) {
        return Err(Error::Data(format!(
            "{what} label {l} overflows {} classes",
            spec.num_classes
        )));
    }
    Ok(())
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Accuracy and mean NLL of `params` on `ds`.
pub fn evaluate_params(
    spec: &NetworkSpec,
    params: &NetworkParams,
    ds: &ImageDataset,
) -> Result<Evaluation> {
    if ds.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty dataset".into()));
    }
    check_dataset(spec, ds, "evaluation")?;
    let l = GridGraph::new(spec.height, spec.width)?.laplacian()?;
    let per: Vec<(bool, f64)> = ds
        .images
        .par_iter()
        .zip(ds.labels.par_iter())
        .map(|(img, &label)| {
            let p = predict(spec, params, &l, img)?;
            Ok((argmax(&p) == label, nll_loss(&p, label)?.0))
        })
        .collect::<Result<_>>()?;
    let correct = per.iter().filter(|(c, _)| *c).count();
    let loss: f64 = per.iter().map(|(_, l)| l).sum();
    let n = ds.len() as f64;
    Ok(Evaluation {
        accuracy: correct as f64 / n,
        mean_loss: loss / n,
    })
}

pub fn evaluate(checkpoint: &Checkpoint, ds: &ImageDataset) -> Result<Evaluation> {
    evaluate_params(&checkpoint.spec, &checkpoint.params, ds)
}

// Stream of the training seed used for the epoch-`e` shuffle.
fn shuffle_stream(epoch: usize) -> u64 {
    1 + epoch as u64
}

fn batch_step(
    spec: &NetworkSpec,
    params: &mut NetworkParams,
    adam: &mut AdamState,
    l: &NormalizedLaplacian,
    ds: &ImageDataset,
    batch: &[usize],
) -> Result<(f64, usize)> {
    let results: Vec<(f64, Vec<f64>, NetworkParams)> = batch
        .par_iter()
        .map(|&i| loss_and_grad(spec, params, l, &ds.images[i], ds.labels[i]))
        .collect::<Result<_>>()?;
    // Serial reduction in batch order keeps the sum independent of scheduling.
    let scale = 1.0 / batch.len() as f64;
    let mut mean = params.zeros_like();
    let mut loss = 0.0;
    let mut correct = 0;
    for ((lv, probs, g), &i) in results.iter().zip(batch) {
        loss += lv;
        correct += usize::from(argmax(probs) == ds.labels[i]);
        mean.add_scaled(g, scale);
    }
    adam.step(params, &mean)?;
    Ok((loss, correct))
}

/// Trains from `init_params(spec, config.seed)` and returns the checkpoint
/// with the best validation accuracy (earliest on ties; the last epoch when
/// `val` is empty) together with the full metric history.
pub fn train(
    spec: &NetworkSpec,
    config: &TrainConfig,
    train_ds: &ImageDataset,
    val_ds: &ImageDataset,
) -> Result<(Checkpoint, Metrics)> {
    config.validate()?;
    if train_ds.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    check_dataset(spec, train_ds, "training")?;
    if !val_ds.is_empty() {
        check_dataset(spec, val_ds, "validation")?;
    }
    let l = GridGraph::new(spec.height, spec.width)?.laplacian()?;
    let mut params = init_params(spec, config.seed)?;
    let mut adam = AdamState::new(&params, config.lr, config.beta1, config.beta2, config.eps);

    let mut metrics = Metrics::default();
    let mut best: Option<(f64, Checkpoint)> = None;
    let mut order: Vec<usize> = (0..train_ds.len()).collect();
    for epoch in 1..=config.epochs {
        if config.shuffle {
            SplitMix64::derive(config.seed, shuffle_stream(epoch)).shuffle(&mut order);
        }
        let mut loss = 0.0;
        let mut correct = 0;
        for batch in order.chunks(config.batch_size) {
            let (bl, bc) = batch_step(spec, &mut params, &mut adam, &l, train_ds, batch)?;
            loss += bl;
            correct += bc;
        }
        let evaluate_now = epoch % config.eval_every == 0 || epoch == config.epochs;
        let val_acc = if evaluate_now && !val_ds.is_empty() {
            Some(evaluate_params(spec, &params, val_ds)?.accuracy)
        } else {
            None
        };
        let n = train_ds.len() as f64;
        let row = EpochMetrics {
            epoch,
            train_loss: loss / n,
            train_acc: correct as f64 / n,
            val_acc,
        };
        let improves = match (val_acc, &best) {
            _ if val_ds.is_empty() => true,
            (Some(v), Some((b, _))) => v > *b,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if improves {
            let mut snapshot = vec![
                ("train_loss".to_string(), row.train_loss),
                ("train_acc".to_string(), row.train_acc),
            ];
            if let Some(v) = val_acc {
                snapshot.push(("val_acc".to_string(), v));
            }
            let ckpt = Checkpoint {
                spec: spec.clone(),
                params: params.clone(),
                optimizer: adam.clone(),
                seed: config.seed,
                epoch: epoch as u64,
                metrics: snapshot,
            };
            best = Some((val_acc.unwrap_or(0.0), ckpt));
            metrics.best_epoch = epoch;
            metrics.best_val_acc = val_acc;
        }
        metrics.epochs.push(row);
    }
    let (_, ckpt) = best.expect("at least one epoch ran");
    Ok((ckpt, metrics))
}
