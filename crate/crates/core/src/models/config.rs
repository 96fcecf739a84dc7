use crate::error::{Error, Result};
use crate::symbols::DEFAULT_CONTEXT;

pub const DEFAULT_STRIDE: usize = 16;

/// Width profile. `Scaled` keeps the topology but shrinks every layer so
/// runs fit on a desktop CPU.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Full,
    Scaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
    pub dense: usize,
    /// Every `stride`-th biGRU output is kept.
    pub stride: usize,
    pub context: usize,
}

impl BootstrapConfig {
    /// Width of the strided, flattened biGRU features.
    pub fn feature_width(&self) -> usize {
        self.context / self.stride * 2 * self.hidden
    }

    /// Time steps whose biGRU output is kept: `m-1, 2m-1, …, K-1`.
    pub fn kept_steps(&self) -> Vec<usize> {
        (1..=self.context / self.stride).map(|i| i * self.stride - 1).collect()
    }

    /// Closed-form parameter count of the topology.
    pub fn param_count(&self) -> usize {
        let gru = |input: usize, h: usize| 3 * h * (input + h) + 6 * h;
        let f = self.feature_width();
        self.vocab * self.embed
            + 2 * gru(self.embed, self.hidden)
            + 2 * gru(2 * self.hidden, self.hidden)
            + (f + 1) * self.vocab
            + (f + 1) * self.dense
            + (self.dense + 1) * self.vocab
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab < 2 {
            return Err(Error::DegenerateAlphabet);
        }
        if self.stride == 0 || self.context == 0 || !self.context.is_multiple_of(self.stride) {
            return Err(Error::InvalidConfig(format!(
                "context {} must be a positive multiple of stride {}",
                self.context, self.stride
            )));
        }
        if self.embed == 0 || self.hidden == 0 || self.dense == 0 {
            return Err(Error::InvalidConfig("zero layer width".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SupporterConfig {
    pub width: usize,
    pub vocab: usize,
    /// Number of most recent symbols whose embeddings feed the supporter.
    pub recent: usize,
    pub embed: usize,
    pub feature_width: usize,
}

impl SupporterConfig {
    pub fn input_width(&self) -> usize {
        self.recent * self.embed + self.feature_width
    }
}

/// Picks layer widths from the alphabet size.
///
/// | V        | E  | H   | D   | supporter |
/// |----------|----|-----|-----|-----------|
/// | 2..=4    | 8  | 8   | 16  | 1024      |
/// | 5..=31   | 8  | 32  | 64  | 1024      |
/// | 32..=127 | 16 | 64  | 128 | 2048      |
/// | 128..    | 16 | 128 | 256 | 2048      |
///
/// The scaled profile divides every width by 8 but never goes below the
/// smallest full-profile bootstrap (E 8, H 8, D 16) or a supporter width of 32.
pub fn select_configs(
    vocab: usize,
    profile: Profile,
    context: usize,
    stride: usize,
) -> Result<(BootstrapConfig, SupporterConfig)> {
    let (embed, hidden, dense, width) = match vocab {
        0 => return Err(Error::EmptyInput),
        1 => return Err(Error::DegenerateAlphabet),
        2..=4 => (8, 8, 16, 1024),
        5..=31 => (8, 32, 64, 1024),
        32..=127 => (16, 64, 128, 2048),
        _ => (16, 128, 256, 2048),
    };
    let scale = |w: usize, floor: usize| match profile {
        Profile::Full => w,
        Profile::Scaled => (w / 8).max(floor),
    };
    let boot = BootstrapConfig {
        vocab,
        embed: scale(embed, 8),
        hidden: scale(hidden, 8),
        dense: scale(dense, 16),
        stride,
        context,
    };
    boot.validate()?;
    let sup = SupporterConfig {
        width: scale(width, 32),
        vocab,
        recent: stride.min(context),
        embed: boot.embed,
        feature_width: boot.feature_width(),
    };
    Ok((boot, sup))
}

/// Configs with the default context (64) and stride (16).
pub fn default_configs(vocab: usize, profile: Profile) -> Result<(BootstrapConfig, SupporterConfig)> {
    select_configs(vocab, profile, DEFAULT_CONTEXT, DEFAULT_STRIDE)
}
