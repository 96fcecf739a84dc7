//! The predictors: a bootstrap network trained on the input and stored in
//! the archive, a supporter network trained while coding, and their convex
//! combination in logit space.

mod bootstrap;
mod combined;
mod config;
mod supporter;

pub use bootstrap::{Bootstrap, BootstrapOutput};
pub use combined::{combine, combined_loss, BootstrapTaps, CombinedForward, MixState};
pub use config::{default_configs, select_configs, BootstrapConfig, Profile, SupporterConfig, DEFAULT_STRIDE};
pub use supporter::{Supporter, INITIAL_THETA};

/// Lays out `B` windows of `K` symbols as time-major `[K, B]` indices.
pub(crate) fn time_major(windows: &[&[u8]], context: usize) -> Vec<usize> {
    let b = windows.len();
    let mut idx = vec![0usize; context * b];
    for (bi, w) in windows.iter().enumerate() {
        assert_eq!(w.len(), context, "window length must equal the context");
        for (t, &s) in w.iter().enumerate() {
            idx[t * b + bi] = usize::from(s);
        }
    }
    idx
}
