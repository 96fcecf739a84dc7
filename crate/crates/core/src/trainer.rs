//! Multi-epoch training of the bootstrap network over the whole input.

use crate::error::{Error, Result};
use crate::models::{Bootstrap, BootstrapConfig};
use crate::nn::{adam_step, clip_gradients, AdamConfig, Graph};
use crate::rng::{SeededRng, Stream};
use std::f64::consts::LN_2;

/// Rows per forward/backward pass. Larger batches are processed in slices of
/// this size with gradients summed, which keeps the recurrent activations in
/// cache without changing the batch semantics.
pub const SLICE_ROWS: usize = 128;

/// Hyperparameters of the bootstrap training run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainPlan {
    pub epochs: u32,
    pub batch_size: usize,
    pub lr0: f32,
    /// First epoch (1-based) at whose end the learning rate is decayed.
    pub decay_from: u32,
    pub decay_factor: f32,
    pub clip_norm: f32,
    pub seed: u64,
}

impl Default for TrainPlan {
    fn default() -> Self {
        Self {
            epochs: 8,
            batch_size: 2048,
            lr0: 0.005,
            decay_from: 5,
            decay_factor: 0.6,
            clip_norm: 1.0,
            seed: 0,
        }
    }
}

impl TrainPlan {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning rate {}", self.lr0)));
        }
        if !(self.decay_factor > 0.0 && self.clip_norm > 0.0) {
            return Err(Error::InvalidConfig(
                "decay factor and clip norm must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Learning rate in force during `epoch` (1-based).
    pub fn lr_at(&self, epoch: u32) -> f32 {
        let decays = epoch.saturating_sub(self.decay_from);
        (0..decays).fold(self.lr0, |lr, _| lr * self.decay_factor)
    }
}

/// One line of the training log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: u32,
    pub mean_ce_bits: f64,
    pub lr: f32,
}

/// Shuffled target positions for one epoch, cut into batches.
///
/// Position `r` (0-based, `K ≤ r < N`) pairs the window `symbols[r-K..r]`
/// with target `symbols[r]`; each appears exactly once. The last batch may
/// be short.
pub fn make_training_batches(
    len: usize,
    context: usize,
    batch_size: usize,
    seed: u64,
    epoch: u32,
) -> Result<Vec<Vec<usize>>> {
    if len <= context {
        return Err(Error::TooShortForTraining { len, context });
    }
    let mut positions: Vec<usize> = (context..len).collect();
    SeededRng::new(seed, Stream::Shuffle(epoch)).shuffle(&mut positions);
    Ok(positions.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect())
}

/// Trains a freshly initialised bootstrap on `symbols`.
pub fn train_bootstrap(
    symbols: &[u8],
    cfg: BootstrapConfig,
    plan: &TrainPlan,
) -> Result<(Bootstrap, Vec<EpochRecord>)> {
    train_bootstrap_with(symbols, cfg, plan, |_| {})
}

/// As [`train_bootstrap`], calling `on_epoch` after every epoch.
pub fn train_bootstrap_with(
    symbols: &[u8],
    cfg: BootstrapConfig,
    plan: &TrainPlan,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Bootstrap, Vec<EpochRecord>)> {
    plan.validate()?;
    let k = cfg.context;
    if symbols.len() <= k {
        return Err(Error::TooShortForTraining {
            len: symbols.len(),
            context: k,
        });
    }
    let mut model = Bootstrap::new(cfg, plan.seed)?;
    let mut log = Vec::with_capacity(plan.epochs as usize);
    for epoch in 1..=plan.epochs {
        let adam = AdamConfig {
            lr: plan.lr_at(epoch),
            clip_norm: plan.clip_norm,
            ..AdamConfig::default()
        };
        let mut total_nats = 0.0f64;
        let batches = make_training_batches(symbols.len(), k, plan.batch_size, plan.seed, epoch)?;
        for batch in &batches {
            model.store_mut().zero_grads();
            for slice in batch.chunks(SLICE_ROWS) {
                let windows: Vec<&[u8]> = slice.iter().map(|&r| &symbols[r - k..r]).collect();
                let targets: Vec<usize> = slice.iter().map(|&r| usize::from(symbols[r])).collect();
                let mut g = Graph::new();
                let out = model.forward(&mut g, &windows);
                let loss = g.softmax_ce_over(out.logits, targets, batch.len());
                total_nats += g.loss_f64(loss) * batch.len() as f64;
                g.backward(loss, model.store_mut())?;
            }
            clip_gradients(model.store_mut(), adam.clip_norm)?;
            adam_step(model.store_mut(), &adam);
        }
        let record = EpochRecord {
            epoch,
            mean_ce_bits: total_nats / LN_2 / (symbols.len() - k) as f64,
            lr: adam.lr,
        };
        on_epoch(&record);
        log.push(record);
    }
    Ok((model, log))
}
