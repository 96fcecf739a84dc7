//! Tape of coarse-grained operations with reverse-mode differentiation.
//!
//! Nodes are appended in evaluation order and backpropagation walks the tape
//! once in reverse, so gradient accumulation order is fixed.

use super::gru::{self, GruCache, GruDims, GruGrads, GruWeights};
use super::kernels::{add_row_bias, col_sum_acc, matmul_acc, matmul_nt_acc, matmul_tn_acc, sigmoid};
use super::layers::{BiGru, Dense, Embedding, Gru, ResidualBlock};
use super::{Activation, ParamId, ParamStore, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Input,
    Embedding {
        table: ParamId,
        indices: Vec<usize>,
    },
    Affine {
        x: Var,
        w: ParamId,
        b: Option<ParamId>,
    },
    Relu(Var),
    Add(Var, Var),
    Concat(Vec<Var>),
    TakeSteps {
        x: Var,
        steps: Vec<usize>,
    },
    Gru {
        x: Var,
        layer: Gru,
        reverse: bool,
        cache: GruCache,
    },
    Mix {
        b: Var,
        s: Var,
        theta: ParamId,
    },
    SoftmaxCe {
        logits: Var,
        targets: Vec<usize>,
        probs: Vec<f32>,
        mean: f64,
        denom: usize,
    },
}

struct Node {
    value: Tensor,
    op: Op,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn input(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Input)
    }

    /// Gathers table rows. `indices` are laid out as `lead` (e.g. `[T, B]`);
    /// the result has shape `lead ++ [E]`.
    pub fn embedding(&mut self, store: &ParamStore, emb: &Embedding, indices: Vec<usize>, lead: &[usize]) -> Var {
        let table = store.value(emb.table);
        let (vocab, width) = (table.shape()[0], table.shape()[1]);
        assert_eq!(lead.iter().product::<usize>(), indices.len());
        let mut out = Vec::with_capacity(indices.len() * width);
        for &i in &indices {
            assert!(i < vocab, "embedding index {i} out of range {vocab}");
            out.extend_from_slice(table.row(i));
        }
        let mut shape = lead.to_vec();
        shape.push(width);
        self.push(
            Tensor::from_vec(&shape, out),
            Op::Embedding {
                table: emb.table,
                indices,
            },
        )
    }

    /// `x·W + b` over the last axis, with optional ReLU.
    pub fn dense(&mut self, store: &ParamStore, x: Var, layer: &Dense, act: Activation) -> Var {
        let y = self.affine(store, x, layer.w, Some(layer.b));
        match act {
            Activation::Relu => self.relu(y),
            Activation::None => y,
        }
    }

    pub fn affine(&mut self, store: &ParamStore, x: Var, w: ParamId, b: Option<ParamId>) -> Var {
        let xv = self.value(x);
        let wv = store.value(w);
        let (inp, outw) = (wv.shape()[0], wv.shape()[1]);
        assert_eq!(xv.cols(), inp, "affine input width mismatch");
        let rows = xv.rows();
        let mut out = vec![0.0; rows * outw];
        matmul_acc(xv.data(), wv.data(), &mut out, rows, inp, outw);
        if let Some(b) = b {
            add_row_bias(&mut out, store.value(b).data());
        }
        let mut shape = xv.shape().to_vec();
        *shape.last_mut().unwrap() = outw;
        self.push(Tensor::from_vec(&shape, out), Op::Affine { x, w, b })
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let xv = self.value(x);
        let data = xv.data().iter().map(|&v| v.max(0.0)).collect();
        let t = Tensor::from_vec(xv.shape(), data);
        self.push(t, Op::Relu(x))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let mut t = self.value(a).clone();
        assert_eq!(t.shape(), self.value(b).shape(), "add shape mismatch");
        t.add_assign(self.value(b));
        self.push(t, Op::Add(a, b))
    }

    /// Concatenates along the last axis; leading axes must agree.
    pub fn concat(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let lead = self.value(parts[0]).shape()[..self.value(parts[0]).shape().len() - 1].to_vec();
        let rows = self.value(parts[0]).rows();
        let widths: Vec<usize> = parts.iter().map(|&p| self.value(p).cols()).collect();
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for &p in parts {
                let v = self.value(p);
                assert_eq!(v.rows(), rows, "concat row mismatch");
                out.extend_from_slice(v.row(r));
            }
        }
        let mut shape = lead;
        shape.push(total);
        self.push(Tensor::from_vec(&shape, out), Op::Concat(parts.to_vec()))
    }

    /// From a time-major `[T, B, C]` tensor, gathers the listed time steps
    /// and flattens them per batch row into `[B, steps·C]`.
    pub fn take_steps(&mut self, x: Var, steps: Vec<usize>) -> Var {
        let xv = self.value(x);
        let (t, b, c) = dims3(xv);
        let mut out = Vec::with_capacity(b * steps.len() * c);
        for bi in 0..b {
            for &s in &steps {
                assert!(s < t);
                let o = (s * b + bi) * c;
                out.extend_from_slice(&xv.data()[o..o + c]);
            }
        }
        let w = steps.len() * c;
        self.push(Tensor::from_vec(&[b, w], out), Op::TakeSteps { x, steps })
    }

    /// Unidirectional GRU over `[T, B, I]` from a zero initial state.
    pub fn gru(&mut self, store: &ParamStore, x: Var, layer: &Gru, reverse: bool) -> Var {
        let xv = self.value(x);
        let (steps, batch, input) = dims3(xv);
        let hidden = layer.hidden(store);
        let d = GruDims {
            steps,
            batch,
            input,
            hidden,
        };
        let (out, cache) = gru::forward(xv.data(), &vec![0.0; batch * hidden], &layer.weights(store), d, reverse);
        self.push(
            Tensor::from_vec(&[steps, batch, hidden], out),
            Op::Gru {
                x,
                layer: layer.clone(),
                reverse,
                cache,
            },
        )
    }

    /// Forward and time-reversed GRU outputs concatenated per step.
    pub fn bigru(&mut self, store: &ParamStore, x: Var, layer: &BiGru) -> Var {
        let f = self.gru(store, x, &layer.fwd, false);
        let b = self.gru(store, x, &layer.bwd, true);
        self.concat(&[f, b])
    }

    /// `x + second(relu(first(x)))`.
    pub fn residual_block(&mut self, store: &ParamStore, x: Var, block: &ResidualBlock) -> Var {
        let h = self.dense(store, x, &block.first, Activation::Relu);
        let y = self.dense(store, h, &block.second, Activation::None);
        assert_eq!(self.value(y).shape(), self.value(x).shape(), "residual width mismatch");
        self.add(x, y)
    }

    /// `σ(θ)·b + (1 − σ(θ))·s`, elementwise.
    pub fn mix(&mut self, store: &ParamStore, b: Var, s: Var, theta: ParamId) -> Var {
        let lambda = sigmoid(store.value(theta).data()[0]);
        let (bv, sv) = (self.value(b), self.value(s));
        assert_eq!(bv.shape(), sv.shape(), "mix shape mismatch");
        let data = bv
            .data()
            .iter()
            .zip(sv.data())
            .map(|(&x, &y)| lambda * x + (1.0 - lambda) * y)
            .collect();
        let t = Tensor::from_vec(bv.shape(), data);
        self.push(t, Op::Mix { b, s, theta })
    }

    /// Mean natural-log cross entropy of `softmax(logits)` against `targets`.
    /// The reduction runs in `f64`; [`Graph::loss_f64`] exposes it unrounded.
    pub fn softmax_ce(&mut self, logits: Var, targets: Vec<usize>) -> Var {
        let rows = targets.len();
        self.softmax_ce_over(logits, targets, rows)
    }

    /// Summed cross entropy divided by `denom` instead of the row count, so
    /// slices of one batch can be processed separately and their gradients
    /// added up.
    pub fn softmax_ce_over(&mut self, logits: Var, targets: Vec<usize>, denom: usize) -> Var {
        let lv = self.value(logits);
        let v = lv.cols();
        assert_eq!(lv.rows(), targets.len());
        let mut probs = Vec::with_capacity(lv.len());
        let mut total = 0.0f64;
        let mut row64 = vec![0.0f64; v];
        for (r, &t) in targets.iter().enumerate() {
            assert!(t < v);
            let row = lv.row(r);
            let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
            let mut sum = 0.0f64;
            for (e, &l) in row64.iter_mut().zip(row) {
                *e = f64::from(l - max).exp();
                sum += *e;
            }
            total += sum.ln() - f64::from(row[t] - max);
            probs.extend(row64.iter().map(|&e| (e / sum) as f32));
        }
        let mean = total / denom.max(1) as f64;
        self.push(
            Tensor::scalar(mean as f32),
            Op::SoftmaxCe {
                logits,
                targets,
                probs,
                mean,
                denom,
            },
        )
    }

    /// Unrounded value of a loss node built by [`Graph::softmax_ce`].
    pub fn loss_f64(&self, v: Var) -> f64 {
        match &self.nodes[v.0].op {
            Op::SoftmaxCe { mean, .. } => *mean,
            _ => f64::from(self.value(v).data()[0]),
        }
    }

    /// Propagates d(loss)/d(·) back through the tape and adds parameter
    /// gradients into `store`. `loss` must be a scalar node.
    pub fn backward(&self, loss: Var, store: &mut ParamStore) -> Result<()> {
        let loss_value = self.value(loss);
        if !loss_value.is_finite() {
            return Err(Error::Numeric("loss"));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        let mut seed = Tensor::zeros(loss_value.shape());
        seed.fill(1.0);
        grads[loss.0] = Some(seed);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            if !g.is_finite() {
                return Err(Error::Numeric("gradient"));
            }
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input => {}
                Op::Embedding { table, indices } => {
                    let width = node.value.cols();
                    let dt = store.grad_mut(*table).data_mut();
                    for (r, &i) in indices.iter().enumerate() {
                        let src = &g.data()[r * width..(r + 1) * width];
                        for (d, &s) in dt[i * width..(i + 1) * width].iter_mut().zip(src) {
                            *d += s;
                        }
                    }
                }
                Op::Affine { x, w, b } => {
                    let xv = self.value(*x);
                    let wv = store.value(*w).clone();
                    let (inp, outw) = (wv.shape()[0], wv.shape()[1]);
                    let rows = xv.rows();
                    matmul_tn_acc(xv.data(), g.data(), store.grad_mut(*w).data_mut(), rows, inp, outw);
                    if let Some(b) = b {
                        col_sum_acc(g.data(), store.grad_mut(*b).data_mut());
                    }
                    let mut dx = Tensor::zeros(xv.shape());
                    matmul_nt_acc(g.data(), wv.data(), dx.data_mut(), rows, outw, inp);
                    accumulate(&mut grads, *x, dx);
                }
                Op::Relu(x) => {
                    let data = g
                        .data()
                        .iter()
                        .zip(node.value.data())
                        .map(|(&d, &y)| if y > 0.0 { d } else { 0.0 })
                        .collect();
                    accumulate(&mut grads, *x, Tensor::from_vec(g.shape(), data));
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::Concat(parts) => {
                    let rows = node.value.rows();
                    let total = node.value.cols();
                    let mut offset = 0;
                    for &p in parts {
                        let pv = self.value(p);
                        let w = pv.cols();
                        let mut d = Vec::with_capacity(rows * w);
                        for r in 0..rows {
                            let o = r * total + offset;
                            d.extend_from_slice(&g.data()[o..o + w]);
                        }
                        offset += w;
                        accumulate(&mut grads, p, Tensor::from_vec(pv.shape(), d));
                    }
                }
                Op::TakeSteps { x, steps } => {
                    let xv = self.value(*x);
                    let (_, b, c) = dims3(xv);
                    let mut dx = Tensor::zeros(xv.shape());
                    let w = steps.len() * c;
                    for bi in 0..b {
                        for (k, &s) in steps.iter().enumerate() {
                            let src = &g.data()[bi * w + k * c..bi * w + (k + 1) * c];
                            let o = (s * b + bi) * c;
                            for (d, &v) in dx.data_mut()[o..o + c].iter_mut().zip(src) {
                                *d += v;
                            }
                        }
                    }
                    accumulate(&mut grads, *x, dx);
                }
                Op::Gru {
                    x,
                    layer,
                    reverse,
                    cache,
                } => {
                    let xv = self.value(*x);
                    let (steps, batch, input) = dims3(xv);
                    let hidden = layer.hidden(store);
                    let d = GruDims {
                        steps,
                        batch,
                        input,
                        hidden,
                    };
                    let wx = store.value(layer.wx).data().to_vec();
                    let wh = store.value(layer.wh).data().to_vec();
                    let bx = store.value(layer.bx).data().to_vec();
                    let bh = store.value(layer.bh).data().to_vec();
                    let weights = GruWeights {
                        wx: &wx,
                        wh: &wh,
                        bx: &bx,
                        bh: &bh,
                    };
                    let mut gwx = std::mem::replace(store.grad_mut(layer.wx), Tensor::zeros(&[0]));
                    let mut gwh = std::mem::replace(store.grad_mut(layer.wh), Tensor::zeros(&[0]));
                    let mut gbx = std::mem::replace(store.grad_mut(layer.bx), Tensor::zeros(&[0]));
                    let mut gbh = std::mem::replace(store.grad_mut(layer.bh), Tensor::zeros(&[0]));
                    let dx = gru::backward(
                        xv.data(),
                        node.value.data(),
                        cache,
                        g.data(),
                        &weights,
                        GruGrads {
                            wx: gwx.data_mut(),
                            wh: gwh.data_mut(),
                            bx: gbx.data_mut(),
                            bh: gbh.data_mut(),
                        },
                        d,
                        *reverse,
                    );
                    *store.grad_mut(layer.wx) = gwx;
                    *store.grad_mut(layer.wh) = gwh;
                    *store.grad_mut(layer.bx) = gbx;
                    *store.grad_mut(layer.bh) = gbh;
                    accumulate(&mut grads, *x, Tensor::from_vec(xv.shape(), dx));
                }
                Op::Mix { b, s, theta } => {
                    let lambda = sigmoid(store.value(*theta).data()[0]);
                    let (bv, sv) = (self.value(*b), self.value(*s));
                    let mut dtheta = 0.0f32;
                    for ((&d, &x), &y) in g.data().iter().zip(bv.data()).zip(sv.data()) {
                        dtheta += d * (x - y);
                    }
                    store.grad_mut(*theta).data_mut()[0] += dtheta * lambda * (1.0 - lambda);
                    let mut db = g.clone();
                    db.scale(lambda);
                    let mut ds = g;
                    ds.scale(1.0 - lambda);
                    accumulate(&mut grads, *b, db);
                    accumulate(&mut grads, *s, ds);
                }
                Op::SoftmaxCe {
                    logits,
                    targets,
                    probs,
                    denom,
                    ..
                } => {
                    let lv = self.value(*logits);
                    let v = lv.cols();
                    let scale = g.data()[0] / (*denom).max(1) as f32;
                    let mut d = probs.clone();
                    for (r, &t) in targets.iter().enumerate() {
                        d[r * v + t] -= 1.0;
                    }
                    d.iter_mut().for_each(|x| *x *= scale);
                    accumulate(&mut grads, *logits, Tensor::from_vec(lv.shape(), d));
                }
            }
        }
        Ok(())
    }
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

fn dims3(t: &Tensor) -> (usize, usize, usize) {
    match *t.shape() {
        [a, b, c] => (a, b, c),
        ref s => panic!("expected a [T, B, C] tensor, got {s:?}"),
    }
}

/// Numerically stable softmax (max subtracted before exponentiation).
pub fn softmax(logits: &[f32]) -> Vec<f32> {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut out: Vec<f32> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f32 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    out
}

/// Cross entropy in bits of a distribution against the true symbol.
pub fn cross_entropy_bits(probs: &[f32], target: usize) -> f64 {
    -f64::from(probs[target]).log2()
}
