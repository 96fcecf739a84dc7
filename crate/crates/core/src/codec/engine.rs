//! Lockstep part-parallel coding shared by the compressor and the
//! decompressor. Each routine walks the same schedule on both sides; a
//! [`Channel`] either writes the known symbol or reads it back.

use crate::coder::{quantize, AdaptiveModel, Decoder, Encoder, QuantizedCdf, DEFAULT_PRECISION};
use crate::error::Result;
use crate::models::{Bootstrap, BootstrapTaps, CombinedForward, Supporter};
use crate::nn::{adam_step, clip_gradients, softmax, AdamConfig, Graph};
use crate::symbols::split_parts;
use crate::trainer::SLICE_ROWS;

use super::header::Fnv64;

/// One side of the arithmetic coder, plus an optional running hash of every
/// distribution used.
pub(crate) trait Channel {
    /// Codes `symbols[pos]` (encoder) or fills it in (decoder).
    fn uniform(&mut self, symbols: &mut [u8], pos: usize, v: usize);
    fn modelled(&mut self, symbols: &mut [u8], pos: usize, cdf: &QuantizedCdf);
    fn order0(&mut self, symbols: &mut [u8], pos: usize, model: &mut AdaptiveModel);
}

pub(crate) struct Trace(Option<Fnv64>);

impl Trace {
    pub fn new(enabled: bool) -> Self {
        Self(enabled.then(Fnv64::default))
    }

    fn uniform(&mut self, v: usize) {
        if let Some(h) = &mut self.0 {
            h.update(&[0xff]);
            h.update(&(v as u32).to_le_bytes());
        }
    }

    fn cdf(&mut self, cdf: &QuantizedCdf) {
        if let Some(h) = &mut self.0 {
            h.update(&[0xfe]);
            for c in cdf.cum() {
                h.update(&c.to_le_bytes());
            }
        }
    }

    pub fn finish(&self) -> Option<u64> {
        self.0.map(|h| h.finish())
    }
}

pub(crate) struct EncodeChannel {
    pub enc: Encoder,
    pub trace: Trace,
}

impl Channel for EncodeChannel {
    fn uniform(&mut self, symbols: &mut [u8], pos: usize, v: usize) {
        self.trace.uniform(v);
        self.enc.encode_uniform(usize::from(symbols[pos]), v);
    }

    fn modelled(&mut self, symbols: &mut [u8], pos: usize, cdf: &QuantizedCdf) {
        self.trace.cdf(cdf);
        self.enc.encode(cdf, usize::from(symbols[pos]));
    }

    fn order0(&mut self, symbols: &mut [u8], pos: usize, model: &mut AdaptiveModel) {
        model.encode(&mut self.enc, usize::from(symbols[pos]));
    }
}

pub(crate) struct DecodeChannel<'a> {
    pub dec: Decoder<'a>,
    pub trace: Trace,
}

impl Channel for DecodeChannel<'_> {
    fn uniform(&mut self, symbols: &mut [u8], pos: usize, v: usize) {
        self.trace.uniform(v);
        symbols[pos] = self.dec.decode_uniform(v) as u8;
    }

    fn modelled(&mut self, symbols: &mut [u8], pos: usize, cdf: &QuantizedCdf) {
        self.trace.cdf(cdf);
        symbols[pos] = self.dec.decode(cdf) as u8;
    }

    fn order0(&mut self, symbols: &mut [u8], pos: usize, model: &mut AdaptiveModel) {
        symbols[pos] = model.decode(&mut self.dec) as u8;
    }
}

/// Schedule of one lockstep step: positions coded uniformly and positions
/// coded from the model, both in part order.
fn step_positions(bounds: &[usize], step: usize, context: usize) -> (Vec<usize>, Vec<usize>) {
    let mut uniform = Vec::new();
    let mut model = Vec::new();
    for w in bounds.windows(2) {
        if w[0] + step < w[1] {
            if step < context {
                uniform.push(w[0] + step);
            } else {
                model.push(w[0] + step);
            }
        }
    }
    (uniform, model)
}

fn quantized_rows(logits: &crate::nn::Tensor) -> Result<Vec<QuantizedCdf>> {
    (0..logits.rows())
        .map(|r| quantize(&softmax(logits.row(r)), DEFAULT_PRECISION))
        .collect()
}

pub(crate) fn run_order0(symbols: &mut [u8], v: usize, ch: &mut impl Channel) {
    let mut model = AdaptiveModel::new(v);
    for pos in 0..symbols.len() {
        ch.order0(symbols, pos, &mut model);
    }
}

/// Bootstrap predictions only; the model is fixed, so each step's rows are
/// a plain batched forward pass.
pub(crate) fn run_bootstrap_only(
    symbols: &mut [u8],
    boot: &Bootstrap,
    parts: usize,
    ch: &mut impl Channel,
) -> Result<()> {
    let v = boot.config().vocab;
    let k = boot.config().context;
    let layout = split_parts(symbols.len(), parts);
    for step in 0..layout.max_size() {
        let (uniform, model) = step_positions(layout.boundaries(), step, k);
        for &pos in &uniform {
            ch.uniform(symbols, pos, v);
        }
        for rows in model.chunks(SLICE_ROWS) {
            let windows: Vec<&[u8]> = rows.iter().map(|&p| &symbols[p - k..p]).collect();
            let cdfs = quantized_rows(&boot.logits(&windows))?;
            for (&pos, cdf) in rows.iter().zip(&cdfs) {
                ch.modelled(symbols, pos, cdf);
            }
        }
    }
    Ok(())
}

/// Settings of the adaptive supporter updates.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AdaptivePlan {
    pub parts: usize,
    pub update_interval: usize,
    pub adam: AdamConfig,
}

/// Combined predictions with the supporter trained in place: after every
/// `update_interval` model-coded steps, one optimizer step on the mean
/// combined loss of all positions coded since the previous update.
pub(crate) fn run_combined(
    symbols: &mut [u8],
    boot: &Bootstrap,
    sup: &mut Supporter,
    plan: &AdaptivePlan,
    ch: &mut impl Channel,
) -> Result<()> {
    let v = boot.config().vocab;
    let k = boot.config().context;
    let recent = sup.config().recent;
    let layout = split_parts(symbols.len(), plan.parts);
    let mut pending = 0usize;
    sup.store_mut().zero_grads();
    for step in 0..layout.max_size() {
        let (uniform, model) = step_positions(layout.boundaries(), step, k);
        for &pos in &uniform {
            ch.uniform(symbols, pos, v);
        }
        if model.is_empty() {
            continue;
        }
        let windows: Vec<&[u8]> = model.iter().map(|&p| &symbols[p - k..p]).collect();
        let taps = BootstrapTaps::compute(boot, &windows, recent);
        let mut g = Graph::new();
        let fwd = CombinedForward::build(&mut g, sup, &taps);
        let cdfs = quantized_rows(g.value(fwd.logits_c))?;
        for (&pos, cdf) in model.iter().zip(&cdfs) {
            ch.modelled(symbols, pos, cdf);
        }

        let targets: Vec<usize> = model.iter().map(|&p| usize::from(symbols[p])).collect();
        let denom = model.len() * plan.update_interval;
        let c = g.softmax_ce_over(fwd.logits_c, targets.clone(), denom);
        let s = g.softmax_ce_over(fwd.logits_s, targets, denom);
        let loss = g.add(c, s);
        g.backward(loss, sup.store_mut())?;
        pending += 1;
        if pending == plan.update_interval {
            clip_gradients(sup.store_mut(), plan.adam.clip_norm)?;
            adam_step(sup.store_mut(), &plan.adam);
            sup.store_mut().zero_grads();
            pending = 0;
        }
    }
    Ok(())
}
