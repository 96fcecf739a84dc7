use super::ParamStore;
use crate::error::{Error, Result};

/// Adam hyperparameters plus the global gradient-norm ceiling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
    pub clip_norm: f32,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip_norm: 1.0,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.lr > 0.0
            && self.eps > 0.0
            && self.clip_norm > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// Rescales all gradients so their global L2 norm is at most `clip_norm`.
/// Returns the factor applied (1 when no clipping happened).
pub fn clip_gradients(store: &mut ParamStore, clip_norm: f32) -> Result<f32> {
    let norm = store.grad_norm();
    if !norm.is_finite() {
        return Err(Error::Numeric("gradient norm"));
    }
    if norm > f64::from(clip_norm) {
        let factor = (f64::from(clip_norm) / norm) as f32;
        store.scale_grads(factor);
        Ok(factor)
    } else {
        Ok(1.0)
    }
}

/// One bias-corrected Adam update of every parameter in the store.
pub fn adam_step(store: &mut ParamStore, cfg: &AdamConfig) {
    store.adam_update(cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
}
