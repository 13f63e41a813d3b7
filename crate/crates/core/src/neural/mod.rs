//! Dense numeric core: LSTM layers, optional embedding, softmax head,
//! regularized crossentropy, Adam and finite-difference checks.

mod adam;
mod gradcheck;
mod lstm;
mod params;

pub use adam::{adam_step, OptimizerState, BETA1, BETA2, EPSILON};
pub use gradcheck::{gradient_check, gradient_check_range, DEFAULT_PROBES};
pub use lstm::{argmax, forward, loss_and_gradients, Mode, RegularizationSpec};
pub use params::{embedding_dim_for, NetShape, NetworkParams};
