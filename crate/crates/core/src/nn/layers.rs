//! Parameter groups for the layer types used by the predictors.

use super::gru::GruWeights;
use super::{ParamId, ParamStore};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    None,
}

#[derive(Clone, Debug)]
pub struct Embedding {
    pub table: ParamId,
}

impl Embedding {
    pub fn new(store: &mut ParamStore, name: &str, vocab: usize, width: usize, rng: &mut SeededRng) -> Self {
        Self {
            table: store.add_uniform(format!("{name}.table"), &[vocab, width], 1, rng),
        }
    }
}

/// Fully connected layer, `W` stored as `[in, out]`.
#[derive(Clone, Debug)]
pub struct Dense {
    pub w: ParamId,
    pub b: ParamId,
}

impl Dense {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, output: usize, rng: &mut SeededRng) -> Self {
        Self {
            w: store.add_uniform(format!("{name}.w"), &[input, output], input, rng),
            b: store.add_zeros(format!("{name}.b"), &[output]),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Gru {
    pub wx: ParamId,
    pub wh: ParamId,
    pub bx: ParamId,
    pub bh: ParamId,
}

impl Gru {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, hidden: usize, rng: &mut SeededRng) -> Self {
        Self {
            wx: store.add_uniform(format!("{name}.wx"), &[input, 3 * hidden], input, rng),
            wh: store.add_uniform(format!("{name}.wh"), &[hidden, 3 * hidden], hidden, rng),
            bx: store.add_zeros(format!("{name}.bx"), &[3 * hidden]),
            bh: store.add_zeros(format!("{name}.bh"), &[3 * hidden]),
        }
    }

    pub fn hidden(&self, store: &ParamStore) -> usize {
        store.value(self.wh).shape()[0]
    }

    pub(crate) fn weights<'a>(&self, store: &'a ParamStore) -> GruWeights<'a> {
        GruWeights {
            wx: store.value(self.wx).data(),
            wh: store.value(self.wh).data(),
            bx: store.value(self.bx).data(),
            bh: store.value(self.bh).data(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BiGru {
    pub fwd: Gru,
    pub bwd: Gru,
}

impl BiGru {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, hidden: usize, rng: &mut SeededRng) -> Self {
        Self {
            fwd: Gru::new(store, &format!("{name}.fwd"), input, hidden, rng),
            bwd: Gru::new(store, &format!("{name}.bwd"), input, hidden, rng),
        }
    }
}

/// Two dense layers with a skip connection around them.
#[derive(Clone, Debug)]
pub struct ResidualBlock {
    pub first: Dense,
    pub second: Dense,
}

impl ResidualBlock {
    pub fn new(store: &mut ParamStore, name: &str, width: usize, rng: &mut SeededRng) -> Self {
        Self {
            first: Dense::new(store, &format!("{name}.0"), width, width, rng),
            second: Dense::new(store, &format!("{name}.1"), width, width, rng),
        }
    }
}
