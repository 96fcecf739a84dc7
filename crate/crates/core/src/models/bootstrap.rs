use super::{time_major, BootstrapConfig};
use crate::error::{Error, Result};
use crate::nn::{Activation, BiGru, Dense, Embedding, Graph, ParamStore, Tensor, Var};
use crate::rng::{SeededRng, Stream};

/// Embedding → biGRU ×2 → strided flatten → (linear head + dense head).
#[derive(Clone, Debug)]
pub struct Bootstrap {
    cfg: BootstrapConfig,
    store: ParamStore,
    embedding: Embedding,
    gru1: BiGru,
    gru2: BiGru,
    linear: Dense,
    bottleneck: Dense,
    bottleneck_out: Dense,
}

/// Graph handles produced by one bootstrap forward pass.
#[derive(Clone, Copy, Debug)]
pub struct BootstrapOutput {
    /// `[B, V]`
    pub logits: Var,
    /// `[K, B, E]`
    pub embeddings: Var,
    /// `[B, (K/m)·2H]`
    pub features: Var,
}

impl Bootstrap {
    /// Fresh weights drawn from the seed's bootstrap sub-stream.
    pub fn new(cfg: BootstrapConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = SeededRng::new(seed, Stream::BootstrapInit);
        let mut store = ParamStore::new();
        let f = cfg.feature_width();
        let embedding = Embedding::new(&mut store, "embed", cfg.vocab, cfg.embed, &mut rng);
        let gru1 = BiGru::new(&mut store, "gru1", cfg.embed, cfg.hidden, &mut rng);
        let gru2 = BiGru::new(&mut store, "gru2", 2 * cfg.hidden, cfg.hidden, &mut rng);
        let linear = Dense::new(&mut store, "linear", f, cfg.vocab, &mut rng);
        let bottleneck = Dense::new(&mut store, "dense", f, cfg.dense, &mut rng);
        let bottleneck_out = Dense::new(&mut store, "dense_out", cfg.dense, cfg.vocab, &mut rng);
        debug_assert_eq!(store.param_count(), cfg.param_count());
        Ok(Self {
            cfg,
            store,
            embedding,
            gru1,
            gru2,
            linear,
            bottleneck,
            bottleneck_out,
        })
    }

    /// Rebuilds the model around stored parameter values.
    pub fn from_values(cfg: BootstrapConfig, values: &[f32]) -> Result<Self> {
        let mut model = Self::new(cfg, 0)?;
        if values.len() != model.store.param_count() {
            return Err(Error::CorruptArchive(format!(
                "model has {} parameters, topology needs {}",
                values.len(),
                model.store.param_count()
            )));
        }
        let mut offset = 0;
        let ids: Vec<_> = model.store.ids().collect();
        for id in ids {
            let t = model.store.value_mut(id);
            let n = t.len();
            t.data_mut().copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(model)
    }

    pub fn config(&self) -> &BootstrapConfig {
        &self.cfg
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    /// All parameter values in serialization order.
    pub fn values(&self) -> Vec<f32> {
        self.store.iter().flat_map(|(_, t)| t.data().iter().copied()).collect()
    }

    /// Records the forward pass for `windows` (each exactly `K` symbols).
    pub fn forward(&self, g: &mut Graph, windows: &[&[u8]]) -> BootstrapOutput {
        let s = &self.store;
        let b = windows.len();
        let idx = time_major(windows, self.cfg.context);
        let embeddings = g.embedding(s, &self.embedding, idx, &[self.cfg.context, b]);
        let h1 = g.bigru(s, embeddings, &self.gru1);
        let h2 = g.bigru(s, h1, &self.gru2);
        let features = g.take_steps(h2, self.cfg.kept_steps());
        let lin = g.dense(s, features, &self.linear, Activation::None);
        let mid = g.dense(s, features, &self.bottleneck, Activation::Relu);
        let out = g.dense(s, mid, &self.bottleneck_out, Activation::None);
        let logits = g.add(lin, out);
        BootstrapOutput {
            logits,
            embeddings,
            features,
        }
    }

    /// Logits `[B, V]` without keeping the graph.
    pub fn logits(&self, windows: &[&[u8]]) -> Tensor {
        let mut g = Graph::new();
        let out = self.forward(&mut g, windows);
        g.value(out.logits).clone()
    }
}
