use super::SupporterConfig;
use crate::nn::{Activation, Dense, Graph, ParamId, ParamStore, ResidualBlock, Tensor, Var};
use crate::rng::{SeededRng, Stream};

const RESIDUAL_BLOCKS: usize = 2;
/// Initial mixing parameter; σ(2) ≈ 0.88 favours the trained bootstrap.
pub const INITIAL_THETA: f32 = 2.0;

/// Three parallel sub-networks (linear, two dense layers, residual stack),
/// each projected to `V` and summed, plus the mixing parameter θ.
///
/// Parameters are never stored: both sides rebuild them from the seed.
#[derive(Clone, Debug)]
pub struct Supporter {
    cfg: SupporterConfig,
    store: ParamStore,
    linear: Dense,
    linear_down: Dense,
    dense1: Dense,
    dense2: Dense,
    dense_down: Dense,
    res_in: Dense,
    res_blocks: Vec<ResidualBlock>,
    res_down: Dense,
    theta: ParamId,
}

impl Supporter {
    pub fn new(cfg: SupporterConfig, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed, Stream::SupporterInit);
        let mut store = ParamStore::new();
        let (inp, w, v) = (cfg.input_width(), cfg.width, cfg.vocab);
        let linear = Dense::new(&mut store, "lin", inp, w, &mut rng);
        let linear_down = Dense::new(&mut store, "lin.down", w, v, &mut rng);
        let dense1 = Dense::new(&mut store, "dense.0", inp, w, &mut rng);
        let dense2 = Dense::new(&mut store, "dense.1", w, w, &mut rng);
        let dense_down = Dense::new(&mut store, "dense.down", w, v, &mut rng);
        let res_in = Dense::new(&mut store, "res.in", inp, w, &mut rng);
        let res_blocks = (0..RESIDUAL_BLOCKS)
            .map(|i| ResidualBlock::new(&mut store, &format!("res.{i}"), w, &mut rng))
            .collect();
        let res_down = Dense::new(&mut store, "res.down", w, v, &mut rng);
        let theta = store.add("theta", Tensor::scalar(INITIAL_THETA));
        Self {
            cfg,
            store,
            linear,
            linear_down,
            dense1,
            dense2,
            dense_down,
            res_in,
            res_blocks,
            res_down,
            theta,
        }
    }

    pub fn config(&self) -> &SupporterConfig {
        &self.cfg
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn theta(&self) -> ParamId {
        self.theta
    }

    pub fn lambda(&self) -> f32 {
        crate::nn::kernels::sigmoid(self.store.value(self.theta).data()[0])
    }

    /// `logits_s` for a `[B, input_width]` tap tensor already on the graph.
    pub fn forward(&self, g: &mut Graph, taps: Var) -> Var {
        self.forward_parts(g, taps)
            .into_iter()
            .reduce(|a, b| g.add(a, b))
            .unwrap()
    }

    /// The three down-projected sub-network outputs, in order.
    pub fn forward_parts(&self, g: &mut Graph, taps: Var) -> [Var; 3] {
        let s = &self.store;
        let lin = g.dense(s, taps, &self.linear, Activation::None);
        let lin = g.dense(s, lin, &self.linear_down, Activation::None);

        let d = g.dense(s, taps, &self.dense1, Activation::Relu);
        let d = g.dense(s, d, &self.dense2, Activation::Relu);
        let d = g.dense(s, d, &self.dense_down, Activation::None);

        let mut r = g.dense(s, taps, &self.res_in, Activation::Relu);
        for block in &self.res_blocks {
            r = g.residual_block(s, r, block);
        }
        let r = g.dense(s, r, &self.res_down, Activation::None);
        [lin, d, r]
    }
}
