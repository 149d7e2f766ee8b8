use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::data::Example;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::rng::Prng;
use crate::tensor::{argmax, softmax_cross_entropy, Tensor};

use super::optim::{Optimizer, OptimizerKind};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    /// samples between learning-curve points
    pub curve_interval: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            learning_rate: 0.001,
            epochs: 10,
            seed: 0,
            optimizer: OptimizerKind::Adam,
            curve_interval: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 || self.curve_interval == 0 {
            return Err(Error::Config(
                "batch_size, epochs and curve_interval must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Loss and accuracy over the most recent `curve_interval` training samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub samples_seen: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    /// NaN when no dev set was given
    pub dev_loss: f64,
    pub dev_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub curve: Vec<CurvePoint>,
    pub epochs: Vec<EpochMetrics>,
    /// 1-based epoch whose parameters were kept
    pub best_epoch: usize,
}

impl TrainReport {
    /// `samples_seen,loss,accuracy`
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("samples_seen,loss,accuracy\n");
        for p in &self.curve {
            writeln!(out, "{},{},{}", p.samples_seen, p.loss, p.accuracy).unwrap();
        }
        out
    }

    /// `epoch,train_loss,dev_loss,dev_accuracy`
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,dev_loss,dev_accuracy\n");
        for m in &self.epochs {
            writeln!(
                out,
                "{},{},{},{}",
                m.epoch, m.train_loss, m.dev_loss, m.dev_accuracy
            )
            .unwrap();
        }
        out
    }

    /// The curve point recorded exactly at `samples_seen`, if any.
    pub fn point_at(&self, samples_seen: usize) -> Option<&CurvePoint> {
        self.curve.iter().find(|p| p.samples_seen == samples_seen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub loss: f64,
    pub correct: usize,
    pub total: usize,
}

/// Accuracy (argmax, ties to class 0) and mean cross-entropy. Never mutates the model.
pub fn evaluate(model: &Model, data: &[Example]) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty dataset".into()));
    }
    let mut correct = 0;
    let mut loss = 0.0;
    for ex in data {
        let p = model.predict(&ex.ids)?;
        loss += softmax_cross_entropy(p.logits.data(), usize::from(ex.label))?.0;
        if p.class == usize::from(ex.label) {
            correct += 1;
        }
    }
    Ok(Evaluation {
        accuracy: correct as f64 / data.len() as f64,
        loss: loss / data.len() as f64,
        correct,
        total: data.len(),
    })
}

struct Window {
    size: usize,
    items: VecDeque<(f64, bool)>,
}

impl Window {
    fn push(&mut self, loss: f64, correct: bool) {
        if self.items.len() == self.size {
            self.items.pop_front();
        }
        self.items.push_back((loss, correct));
    }

    fn point(&self, samples_seen: usize) -> CurvePoint {
        let n = self.items.len() as f64;
        let loss = self.items.iter().fold(0.0, |a, (l, _)| a + l) / n;
        let hits = self.items.iter().filter(|(_, c)| *c).count();
        CurvePoint {
            samples_seen,
            loss,
            accuracy: hits as f64 / n,
        }
    }
}

/// One forward/backward pass on a single example; gradients are scaled by
/// `weight` (1/batch for mean-loss batches). Returns the unscaled loss and
/// whether the prediction was correct.
pub fn accumulate_example(model: &mut Model, ex: &Example, weight: f64) -> Result<(f64, bool)> {
    let (logits, trace) = model.forward(&ex.ids)?;
    let label = usize::from(ex.label);
    let (loss, mut grad) = softmax_cross_entropy(logits.data(), label)?;
    grad.iter_mut().for_each(|g| *g *= weight);
    model.backward(&trace, &Tensor::from_vec(grad))?;
    Ok((loss, argmax(logits.data()) == label))
}

/// Mini-batch training with per-epoch reshuffling.
///
/// Each epoch visits `train` in an order drawn from `cfg.seed` and the epoch
/// number. A learning-curve point is emitted every `curve_interval` samples.
/// After each epoch the dev set is scored; the parameters from the epoch with
/// the best dev accuracy are left in `model` (the last epoch when `dev` is empty).
pub fn train(model: &mut Model, train: &[Example], dev: &[Example], cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.learning_rate);
    model.zero_grad();

    let mut window = Window {
        size: cfg.curve_interval,
        items: VecDeque::with_capacity(cfg.curve_interval),
    };
    let mut report = TrainReport {
        curve: Vec::new(),
        epochs: Vec::new(),
        best_epoch: 0,
    };
    let mut best: Option<(f64, Model)> = None;
    let mut samples_seen = 0usize;
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.sort_unstable();
        Prng::derived(cfg.seed, epoch as u64).shuffle(&mut order);
        let mut epoch_loss = 0.0;

        for batch in order.chunks(cfg.batch_size) {
            let weight = 1.0 / batch.len() as f64;
            for &i in batch {
                let (loss, correct) = accumulate_example(model, &train[i], weight)?;
                if !loss.is_finite() {
                    return Err(Error::NonFinite { loss, samples_seen });
                }
                samples_seen += 1;
                epoch_loss += loss;
                window.push(loss, correct);
                if samples_seen % cfg.curve_interval == 0 {
                    report.curve.push(window.point(samples_seen));
                }
            }
            optimizer.step(&mut model.params_mut())?;
        }

        let train_loss = epoch_loss / train.len() as f64;
        let (dev_loss, dev_accuracy) = if dev.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let e = evaluate(model, dev)?;
            (e.loss, e.accuracy)
        };
        log::info!(
            "epoch {epoch}: train loss {train_loss:.4}, dev loss {dev_loss:.4}, dev accuracy {dev_accuracy:.4}"
        );
        report.epochs.push(EpochMetrics {
            epoch,
            train_loss,
            dev_loss,
            dev_accuracy,
        });
        if !dev.is_empty() && best.as_ref().is_none_or(|(acc, _)| dev_accuracy > *acc) {
            let mut snapshot = model.clone();
            snapshot.zero_grad();
            best = Some((dev_accuracy, snapshot));
            report.best_epoch = epoch;
        }
    }

    match best {
        Some((_, snapshot)) if report.best_epoch != cfg.epochs => *model = snapshot,
        Some(_) => {}
        None => report.best_epoch = cfg.epochs,
    }
    Ok(report)
}
