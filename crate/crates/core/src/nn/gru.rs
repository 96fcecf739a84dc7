//! Batched GRU recurrence over a time-major sequence `[T, B, I]`.
//!
//! Gate layout in every weight matrix is `[r | z | n]`, each `H` columns:
//!
//! ```text
//! r  = σ(x·Wx_r + bx_r + h·Wh_r + bh_r)
//! z  = σ(x·Wx_z + bx_z + h·Wh_z + bh_z)
//! n  = tanh(x·Wx_n + bx_n + r ⊙ (h·Wh_n + bh_n))
//! h' = (1 − z) ⊙ n + z ⊙ h
//! ```

use super::kernels::{
    add_row_bias, col_sum_acc, matmul_acc, matmul_tn_acc, sigmoid_in_place, tanh_in_place, transpose,
};

#[derive(Clone, Copy, Debug)]
pub struct GruDims {
    pub steps: usize,
    pub batch: usize,
    pub input: usize,
    pub hidden: usize,
}

pub struct GruWeights<'a> {
    pub wx: &'a [f32],
    pub wh: &'a [f32],
    pub bx: &'a [f32],
    pub bh: &'a [f32],
}

/// Values kept from the forward pass for backpropagation, each `[T, B, H]`.
#[derive(Clone, Debug, Default)]
pub struct GruCache {
    r: Vec<f32>,
    z: Vec<f32>,
    n: Vec<f32>,
    /// Recurrent candidate term `h·Wh_n + bh_n`.
    hidden_n: Vec<f32>,
}

pub struct GruGrads<'a> {
    pub wx: &'a mut [f32],
    pub wh: &'a mut [f32],
    pub bx: &'a mut [f32],
    pub bh: &'a mut [f32],
}

fn time_index(s: usize, steps: usize, reverse: bool) -> usize {
    if reverse {
        steps - 1 - s
    } else {
        s
    }
}

/// Column block `g` (of width `h`) of a row-major `[rows, 3h]` matrix.
fn gate_cols(m: &[f32], rows: usize, h: usize, g: usize) -> Vec<f32> {
    let mut out = Vec::with_capacity(rows * h);
    for r in 0..rows {
        out.extend_from_slice(&m[r * 3 * h + g * h..r * 3 * h + (g + 1) * h]);
    }
    out
}

/// Adds a `[rows, h]` block into column block `g` of a `[rows, 3h]` matrix.
fn add_gate_cols(m: &mut [f32], block: &[f32], rows: usize, h: usize, g: usize) {
    for r in 0..rows {
        let dst = &mut m[r * 3 * h + g * h..r * 3 * h + (g + 1) * h];
        for (d, &v) in dst.iter_mut().zip(&block[r * h..(r + 1) * h]) {
            *d += v;
        }
    }
}

/// Weights re-packed one gate at a time so every per-step operation runs
/// over contiguous `[B, H]` blocks.
struct GateWeights {
    wx: [Vec<f32>; 3],
    wh: [Vec<f32>; 3],
    bx: [Vec<f32>; 3],
    bh: [Vec<f32>; 3],
}

impl GateWeights {
    fn split(w: &GruWeights, input: usize, hidden: usize) -> Self {
        let g = |m: &[f32], rows| [0, 1, 2].map(|i| gate_cols(m, rows, hidden, i));
        Self {
            wx: g(w.wx, input),
            wh: g(w.wh, hidden),
            bx: g(w.bx, 1),
            bh: g(w.bh, 1),
        }
    }
}

/// Runs the recurrence, returning all hidden states `[T, B, H]` in the
/// original time order. With `reverse`, time is processed from the last step
/// to the first (the output is already re-reversed).
pub fn forward(x: &[f32], h0: &[f32], w: &GruWeights, d: GruDims, reverse: bool) -> (Vec<f32>, GruCache) {
    let GruDims {
        steps,
        batch,
        input,
        hidden,
    } = d;
    let bh = batch * hidden;
    assert_eq!(x.len(), steps * batch * input);
    assert_eq!(h0.len(), bh);
    let gw = GateWeights::split(w, input, hidden);

    let xw: Vec<Vec<f32>> = (0..3)
        .map(|g| {
            let mut xg = vec![0.0; steps * bh];
            matmul_acc(x, &gw.wx[g], &mut xg, steps * batch, input, hidden);
            add_row_bias(&mut xg, &gw.bx[g]);
            xg
        })
        .collect();

    let mut out = vec![0.0; steps * bh];
    let mut cache = GruCache {
        r: vec![0.0; steps * bh],
        z: vec![0.0; steps * bh],
        n: vec![0.0; steps * bh],
        hidden_n: vec![0.0; steps * bh],
    };
    let mut h_prev = h0.to_vec();
    let mut hw = vec![0.0; bh];

    for s in 0..steps {
        let t = time_index(s, steps, reverse);
        let span = t * bh..(t + 1) * bh;
        for (g, gate) in [&mut cache.r, &mut cache.z].into_iter().enumerate() {
            let pre = &mut gate[span.clone()];
            pre.copy_from_slice(&xw[g][span.clone()]);
            hw.fill(0.0);
            matmul_acc(&h_prev, &gw.wh[g], &mut hw, batch, hidden, hidden);
            add_row_bias(&mut hw, &gw.bh[g]);
            for (p, &v) in pre.iter_mut().zip(&hw) {
                *p += v;
            }
            sigmoid_in_place(pre);
        }

        let hn = &mut cache.hidden_n[span.clone()];
        matmul_acc(&h_prev, &gw.wh[2], hn, batch, hidden, hidden);
        add_row_bias(hn, &gw.bh[2]);
        let n = &mut cache.n[span.clone()];
        let r = &cache.r[span.clone()];
        for (((n, &xn), &r), &hn) in n.iter_mut().zip(&xw[2][span.clone()]).zip(r).zip(hn.iter()) {
            *n = xn + r * hn;
        }
        tanh_in_place(n);

        let z = &cache.z[span.clone()];
        let out_t = &mut out[span];
        for (((o, &z), &n), &hp) in out_t.iter_mut().zip(z).zip(n.iter()).zip(&h_prev) {
            *o = (1.0 - z) * n + z * hp;
        }
        h_prev.copy_from_slice(out_t);
    }
    (out, cache)
}

/// Backpropagates `d_out` (`[T, B, H]`) through the recurrence, accumulating
/// weight gradients and returning the input gradient `[T, B, I]`. The initial
/// state is taken to be zero.
#[allow(clippy::too_many_arguments)]
pub fn backward(
    x: &[f32],
    out: &[f32],
    cache: &GruCache,
    d_out: &[f32],
    w: &GruWeights,
    grads: GruGrads,
    d: GruDims,
    reverse: bool,
) -> Vec<f32> {
    let GruDims {
        steps,
        batch,
        input,
        hidden,
    } = d;
    let bh = batch * hidden;
    let zeros = vec![0.0; bh];
    let gw = GateWeights::split(w, input, hidden);
    let wh_t: Vec<Vec<f32>> = gw.wh.iter().map(|m| transpose(m, hidden, hidden)).collect();

    let mut d_xw = [0, 1, 2].map(|_| vec![0.0; steps * bh]);
    let mut d_wh = [0, 1, 2].map(|_| vec![0.0; hidden * hidden]);
    let mut d_bh = [0, 1, 2].map(|_| vec![0.0; hidden]);
    let mut d_hn = vec![0.0; bh];
    let mut dh_next = vec![0.0; bh];
    let mut dh_prev = vec![0.0; bh];

    for s in (0..steps).rev() {
        let t = time_index(s, steps, reverse);
        let h_prev = if s == 0 {
            &zeros[..]
        } else {
            let tp = time_index(s - 1, steps, reverse);
            &out[tp * bh..(tp + 1) * bh]
        };
        let span = t * bh..(t + 1) * bh;
        let (r, z, n, hn) = (
            &cache.r[span.clone()],
            &cache.z[span.clone()],
            &cache.n[span.clone()],
            &cache.hidden_n[span.clone()],
        );
        let dout_t = &d_out[span.clone()];
        let [dr, dz, dn] = &mut d_xw;
        let (dr, dz, dn) = (&mut dr[span.clone()], &mut dz[span.clone()], &mut dn[span]);
        for k in 0..bh {
            let dh = dout_t[k] + dh_next[k];
            let dn_pre = dh * (1.0 - z[k]) * (1.0 - n[k] * n[k]);
            let dz_raw = dh * (h_prev[k] - n[k]);
            dh_prev[k] = dh * z[k];
            dr[k] = dn_pre * hn[k] * r[k] * (1.0 - r[k]);
            dz[k] = dz_raw * z[k] * (1.0 - z[k]);
            dn[k] = dn_pre;
            d_hn[k] = dn_pre * r[k];
        }
        for (g, d_hw) in [&*dr, &*dz, &d_hn[..]].into_iter().enumerate() {
            matmul_tn_acc(h_prev, d_hw, &mut d_wh[g], batch, hidden, hidden);
            col_sum_acc(d_hw, &mut d_bh[g]);
            matmul_acc(d_hw, &wh_t[g], &mut dh_prev, batch, hidden, hidden);
        }
        std::mem::swap(&mut dh_next, &mut dh_prev);
    }

    let mut dx = vec![0.0; steps * batch * input];
    for g in 0..3 {
        add_gate_cols(grads.wh, &d_wh[g], hidden, hidden, g);
        add_gate_cols(grads.bh, &d_bh[g], 1, hidden, g);
        let mut d_wx = vec![0.0; input * hidden];
        matmul_tn_acc(x, &d_xw[g], &mut d_wx, steps * batch, input, hidden);
        add_gate_cols(grads.wx, &d_wx, input, hidden, g);
        let mut d_bx = vec![0.0; hidden];
        col_sum_acc(&d_xw[g], &mut d_bx);
        add_gate_cols(grads.bx, &d_bx, 1, hidden, g);
        let wx_t = transpose(&gw.wx[g], input, hidden);
        matmul_acc(&d_xw[g], &wx_t, &mut dx, steps * batch, hidden, input);
    }
    dx
}
