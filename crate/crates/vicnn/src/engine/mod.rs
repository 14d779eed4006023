//! Differentiable tensor ops, the layer-graph executor, and Adam.

pub mod adam;
pub mod conv;
pub mod gradcheck;
pub mod model;
pub mod ops;

pub use adam::{AdamConfig, AdamState};
pub use conv::{conv2d_backward, conv2d_forward, ConvParams};
pub use model::{adam_state_for, adam_step, backward, forward, ModelParams, Tape};
pub use ops::{
    maxpool2, maxpool2_backward, mse_loss, relu, relu_backward, residual_add, sigmoid,
    sigmoid_backward, upsample_nearest2, upsample_nearest2_backward,
};
