//! Minimal deterministic tensor engine: the layers the predictors need,
//! reverse-mode gradients, clipping and Adam.
//!
//! All arithmetic is `f32` with a fixed, sequential reduction order, so the
//! same inputs give bit-identical outputs on every run.

mod graph;
pub mod gru;
pub mod kernels;
mod layers;
mod optim;
mod params;
mod tensor;

pub use graph::{cross_entropy_bits, softmax, Graph, Var};
pub use layers::{Activation, BiGru, Dense, Embedding, Gru, ResidualBlock};
pub use optim::{adam_step, clip_gradients, AdamConfig};
pub use params::{ParamId, ParamStore};
pub use tensor::Tensor;

#[cfg(test)]
mod tests;
