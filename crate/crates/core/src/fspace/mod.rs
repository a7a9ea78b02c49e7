//! Program behaviors as vectors, example sets as diagonal Gaussians.

mod encoder;
mod gaussian;
mod infonce;
mod mlp;
mod train;

use thiserror::Error;

pub use encoder::{program_features, EncoderConfig, EncoderParams, LV_BOUND};
pub use gaussian::{
    entropy, gaussian_product_exact, log_density, log_sum_exp, softmax, weighted_combination, DiagGaussian,
};
pub use infonce::{infonce_grad, infonce_loss, logits, GaussianGrad, InfoNce};
pub use mlp::{MlpCache, MlpShape};
pub use train::{
    best_candidate, embed_committee, evaluate_loss, expected_entropy_reduction, gradient_check, rollout_entropies,
    train_recurrent, Member, TrainConfig, TrainReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FspaceError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("batch mismatch: {0} Gaussians, {1} embeddings")]
    BatchMismatch(usize, usize),
    #[error("non-finite value")]
    NonFinite,
    #[error("empty input")]
    Empty,
    #[error("training needs at least two programs, got {0}")]
    BatchTooSmall(usize),
    #[error("loss diverged at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
