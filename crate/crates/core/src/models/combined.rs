use super::{Bootstrap, Supporter};
use crate::nn::kernels::sigmoid;
use crate::nn::{Graph, Tensor, Var};

/// The mixing parameter together with the three logit sets it relates.
#[derive(Clone, Debug)]
pub struct MixState {
    pub theta: f32,
    pub lambda: f32,
    pub logits_b: Tensor,
    pub logits_s: Tensor,
    pub logits_c: Tensor,
}

/// `logits_c = σ(θ)·logits_b + (1 − σ(θ))·logits_s`, elementwise.
pub fn combine(logits_b: &Tensor, logits_s: &Tensor, theta: f32) -> MixState {
    assert_eq!(logits_b.shape(), logits_s.shape(), "logit shapes differ");
    let lambda = sigmoid(theta);
    let data = logits_b
        .data()
        .iter()
        .zip(logits_s.data())
        .map(|(&b, &s)| lambda * b + (1.0 - lambda) * s)
        .collect();
    MixState {
        theta,
        lambda,
        logits_b: logits_b.clone(),
        logits_s: logits_s.clone(),
        logits_c: Tensor::from_vec(logits_b.shape(), data),
    }
}

/// `CE(y, softmax(c)) + CE(y, softmax(s))` in bits, summed over the batch
/// rows and divided by the row count.
pub fn combined_loss(targets: &[usize], mix: &MixState) -> f64 {
    let ce = |logits: &Tensor| -> f64 {
        targets
            .iter()
            .enumerate()
            .map(|(r, &t)| crate::nn::cross_entropy_bits(&crate::nn::softmax(logits.row(r)), t))
            .sum::<f64>()
    };
    (ce(&mix.logits_c) + ce(&mix.logits_s)) / targets.len().max(1) as f64
}

/// Frozen bootstrap outputs for a batch, ready to feed the supporter.
#[derive(Clone, Debug)]
pub struct BootstrapTaps {
    /// `[B, V]`
    pub logits_b: Tensor,
    /// `[B, m·E + F]`: embeddings of the last `m` symbols, then the features.
    pub taps: Tensor,
}

impl BootstrapTaps {
    /// Runs the bootstrap without recording gradients.
    pub fn compute(boot: &Bootstrap, windows: &[&[u8]], recent: usize) -> Self {
        let mut g = Graph::new();
        let out = boot.forward(&mut g, windows);
        let emb = g.value(out.embeddings);
        let feat = g.value(out.features);
        let (k, b, e) = (emb.shape()[0], emb.shape()[1], emb.shape()[2]);
        let f = feat.cols();
        let width = recent * e + f;
        let mut taps = Vec::with_capacity(b * width);
        for bi in 0..b {
            for t in k - recent..k {
                let row = (t * b + bi) * e;
                taps.extend_from_slice(&emb.data()[row..row + e]);
            }
            taps.extend_from_slice(feat.row(bi));
        }
        Self {
            logits_b: g.value(out.logits).clone(),
            taps: Tensor::from_vec(&[b, width], taps),
        }
    }
}

/// Graph handles of one combined forward pass. Only the supporter store
/// (including θ) owns parameters on this graph.
#[derive(Clone, Copy, Debug)]
pub struct CombinedForward {
    pub logits_b: Var,
    pub logits_s: Var,
    pub logits_c: Var,
}

impl CombinedForward {
    pub fn build(g: &mut Graph, sup: &Supporter, taps: &BootstrapTaps) -> Self {
        let logits_b = g.input(taps.logits_b.clone());
        let t = g.input(taps.taps.clone());
        let logits_s = sup.forward(g, t);
        let logits_c = g.mix(sup.store(), logits_b, logits_s, sup.theta());
        Self {
            logits_b,
            logits_s,
            logits_c,
        }
    }

    /// Sum of the two mean cross-entropies (natural log), as a graph node.
    pub fn loss(&self, g: &mut Graph, targets: Vec<usize>) -> Var {
        let c = g.softmax_ce(self.logits_c, targets.clone());
        let s = g.softmax_ce(self.logits_s, targets);
        g.add(c, s)
    }
}
