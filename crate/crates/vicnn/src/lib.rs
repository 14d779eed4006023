//! Convolutional networks for low-level vision tasks (denoising, deblurring,
//! color constancy), parametric brightness/color illusion stimuli, and a
//! harness that quantifies whether a trained network shifts the illusion
//! targets the way human perception does.

pub mod data;
pub mod engine;
pub mod error;
pub mod eval;
pub mod stimuli;
pub mod tensor;
pub mod trainer;
pub mod zoo;

pub use error::{Error, Result};

/// Working-precision tensor used everywhere outside the oracle paths.
pub type Tensor = tensor::Tensor<f32>;
/// Double-precision tensor for oracles and loss accumulation.
pub type Tensor64 = tensor::Tensor<f64>;
pub type ConvParams = engine::ConvParams<f32>;
pub type ModelParams = engine::ModelParams<f32>;
pub type AdamState = engine::AdamState<f32>;
