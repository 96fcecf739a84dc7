//! Integer arithmetic coding of symbols under quantized distributions.

mod adaptive;
mod arith;
mod bits;
mod quantize;

pub use adaptive::{decode_bytes, encode_bytes, AdaptiveModel};
pub use arith::{Decoder, Encoder, FLUSH_BITS};
pub use bits::{BitReader, BitWriter};
pub use quantize::{quantize, QuantizedCdf, DEFAULT_PRECISION};
