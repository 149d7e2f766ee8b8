//! Optimizers, the mini-batch training loop with learning-curve logging, and
//! evaluation.

mod optim;
mod trainer;

pub use optim::{Adam, Optimizer, OptimizerKind, Sgd, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use trainer::{
    accumulate_example, evaluate, train, CurvePoint, EpochMetrics, Evaluation, TrainConfig,
    TrainReport,
};
