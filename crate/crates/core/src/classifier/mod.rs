//! Multinomial logistic regression over diff feature vectors, with each
//! distinct training message as one class.

mod labels;
mod model;
mod train;

pub use labels::LabelCodec;
pub use model::{log_softmax, softmax, Gradients, LRModel};
pub use train::{train, train_with_log, Optimizer, TrainConfig};
