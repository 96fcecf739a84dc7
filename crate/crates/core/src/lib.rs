//! Lossless compression of byte streams with a hybrid neural predictor and
//! arithmetic coding.
//!
//! A small recurrent *bootstrap* model is trained on the input itself and
//! stored in the archive. At coding time it can be combined with a larger
//! *supporter* model that starts from seeded weights and is trained on the
//! fly, identically at the encoder and the decoder.

pub mod codec;
pub mod coder;
mod error;
pub mod models;
pub mod nn;
pub mod rng;
pub mod symbols;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
