//! Two-layer perceptrons with exact reverse-mode gradients, and Adam.

mod adam;
mod mlp;

pub use adam::Adam;
pub use mlp::{soft_update, ForwardPass, Mlp, NeuralError, HIDDEN_DIM, LEAKY_SLOPE};
