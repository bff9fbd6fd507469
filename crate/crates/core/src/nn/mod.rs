//! Dense feed-forward networks with hand-written reverse mode, Adam, and the
//! losses used by the neural solvers.

mod adam;
pub mod checkpoint;
mod loss;
mod mlp;

pub use adam::Adam;
pub use loss::{
    loss_and_gradients, loss_value, make_target_bootstrap_cumulative, make_target_q, masked_softmax,
    strategy_loss_weight, Batch, Bootstrap, LossKind,
};
pub use mlp::{Architecture, Dense, ForwardCache, Gradients, Mlp};
