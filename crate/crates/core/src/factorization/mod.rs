//! Dual-network matrix factorization over a masked cluster × drug rating
//! matrix, a plain low-rank baseline, and gradient verification.

mod backprop;
mod baseline;
mod matrix;
mod model;
mod network;

#[doc(hidden)]
pub use backprop::{backprop_with_fault, gradient_check_with_fault, BackpropFault};
pub use backprop::{backprop, context_loss, gradient_check, GradientCheck, Gradients, LossContext, GRADIENT_CHECK_FLOOR};
pub use baseline::{fit_baseline_mf, BaselineMf};
pub use matrix::{to_display, SparseRatingMatrix, DISPLAY_SCALE};
pub use model::{masked_loss, train, CombineRule, EpochLoss, FactorizationModel, LossTrace, TrainConfig};
pub use network::{Activation, ForwardTrace, NetworkParams};
