use super::*;
use crate::rng::{SeededRng, Stream};

/// Central-difference gradient check (h = 1e-3) over every scalar parameter.
///
/// Returns the norm-wise relative error `‖a − n‖ / (‖a‖ + ‖n‖)` between the
/// analytic and numeric gradient vectors and asserts it is below 1e-3.
fn check_gradients(store: &mut ParamStore, loss: impl Fn(&mut Graph, &ParamStore) -> Var) -> f64 {
    let all: Vec<ParamId> = store.ids().collect();
    check_gradients_of(store, &all, loss)
}

fn check_gradients_of(store: &mut ParamStore, ids: &[ParamId], loss: impl Fn(&mut Graph, &ParamStore) -> Var) -> f64 {
    let checked: usize = ids.iter().map(|&id| store.value(id).len()).sum();
    assert!(checked <= 20, "{checked} params");
    store.zero_grads();
    let mut g = Graph::new();
    let l = loss(&mut g, store);
    g.backward(l, store).unwrap();

    let eval = |s: &ParamStore| {
        let mut g = Graph::new();
        let l = loss(&mut g, s);
        g.loss_f64(l)
    };
    let h = 1e-3f32;
    let (mut diff, mut norm_a, mut norm_n) = (0.0f64, 0.0f64, 0.0f64);
    for &id in ids {
        for i in 0..store.value(id).len() {
            let orig = store.value(id).data()[i];
            store.value_mut(id).data_mut()[i] = orig + h;
            let up = eval(store);
            store.value_mut(id).data_mut()[i] = orig - h;
            let down = eval(store);
            store.value_mut(id).data_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * f64::from(h));
            let analytic = f64::from(store.grad(id).data()[i]);
            diff += (analytic - numeric).powi(2);
            norm_a += analytic * analytic;
            norm_n += numeric * numeric;
        }
    }
    let rel = diff.sqrt() / (norm_a.sqrt() + norm_n.sqrt()).max(1e-12);
    assert!(rel < 1e-3, "relative gradient error {rel}");
    assert!(norm_a > 1e-6, "degenerate instance");
    rel
}

fn rng() -> SeededRng {
    SeededRng::new(11, Stream::Synthetic)
}

fn randomize(store: &mut ParamStore, rng: &mut SeededRng, scale: f32) {
    let ids: Vec<ParamId> = store.ids().collect();
    for id in ids {
        for v in store.value_mut(id).data_mut() {
            *v = rng.symmetric_f32(scale);
        }
    }
}

#[test]
fn embedding_gathers_rows() {
    let mut store = ParamStore::new();
    let table = store.add("t", Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]));
    let emb = Embedding { table };
    let mut g = Graph::new();
    let out = g.embedding(&store, &emb, vec![1, 0], &[2]);
    assert_eq!(g.value(out).data(), &[3.0, 4.0, 1.0, 2.0]);
}

#[test]
fn embedding_gradient_counts_occurrences() {
    let mut store = ParamStore::new();
    let table = store.add("t", Tensor::zeros(&[3, 1]));
    let emb = Embedding { table };
    let mut g = Graph::new();
    let rows = g.embedding(&store, &emb, vec![0, 2, 2, 0, 0], &[5]);
    let zeros = g.input(Tensor::zeros(&[5, 1]));
    let pair = g.concat(&[rows, zeros]);
    let loss = g.softmax_ce(pair, vec![1; 5]);
    g.backward(loss, &mut store).unwrap();
    // each gathered row receives d(mean CE)/dx = (0.5 - 0) / 5
    let per = 0.5 / 5.0;
    assert_eq!(store.grad(table).data(), &[3.0 * per, 0.0, 2.0 * per]);
}

#[test]
#[should_panic(expected = "out of range")]
fn embedding_index_out_of_range_panics() {
    let mut store = ParamStore::new();
    let table = store.add("t", Tensor::zeros(&[2, 2]));
    let mut g = Graph::new();
    g.embedding(&store, &Embedding { table }, vec![5], &[1]);
}

fn dense_fixture(w: Vec<f32>, b: Vec<f32>, shape: [usize; 2]) -> (ParamStore, Dense) {
    let mut store = ParamStore::new();
    let wid = store.add("w", Tensor::from_vec(&shape, w));
    let bid = store.add("b", Tensor::from_vec(&[shape[1]], b));
    (store, Dense { w: wid, b: bid })
}

#[test]
fn dense_examples() {
    let (store, layer) = dense_fixture(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], [2, 2]);
    let mut g = Graph::new();
    let x = g.input(Tensor::from_vec(&[1, 2], vec![1.0, 2.0]));
    let y = g.dense(&store, x, &layer, Activation::Relu);
    assert_eq!(g.value(y).data(), &[1.0, 2.0]);

    let (store, layer) = dense_fixture(vec![1.0], vec![0.0], [1, 1]);
    let mut g = Graph::new();
    let x = g.input(Tensor::from_vec(&[1, 1], vec![-1.0]));
    let relu = g.dense(&store, x, &layer, Activation::Relu);
    let none = g.dense(&store, x, &layer, Activation::None);
    assert_eq!(g.value(relu).data(), &[0.0]);
    assert_eq!(g.value(none).data(), &[-1.0]);
}

#[test]
fn residual_with_zero_weights_is_identity() {
    let mut store = ParamStore::new();
    let block = ResidualBlock::new(&mut store, "res", 3, &mut rng());
    let ids: Vec<ParamId> = store.ids().collect();
    for id in ids {
        store.value_mut(id).fill(0.0);
    }
    let mut g = Graph::new();
    let x = g.input(Tensor::from_vec(&[2, 3], vec![1.0, -2.0, 3.0, 0.5, 0.0, -0.5]));
    let y = g.residual_block(&store, x, &block);
    assert_eq!(g.value(y).data(), g.value(x).data());
}

#[test]
fn residual_matches_manual_composition() {
    let mut store = ParamStore::new();
    let block = ResidualBlock::new(&mut store, "res", 2, &mut rng());
    randomize(&mut store, &mut rng(), 1.0);
    let mut g = Graph::new();
    let x = g.input(Tensor::from_vec(&[1, 2], vec![0.7, -0.4]));
    let y = g.residual_block(&store, x, &block);

    let mut m = Graph::new();
    let x2 = m.input(Tensor::from_vec(&[1, 2], vec![0.7, -0.4]));
    let h = m.dense(&store, x2, &block.first, Activation::Relu);
    let o = m.dense(&store, h, &block.second, Activation::None);
    let expect: Vec<f32> = m
        .value(o)
        .data()
        .iter()
        .zip([0.7f32, -0.4])
        .map(|(a, b)| a + b)
        .collect();
    assert_eq!(g.value(y).data(), &expect[..]);
}

#[test]
fn residual_gradient_has_identity_term() {
    // with zero block weights d(out)/d(x) is exactly the identity
    let mut store = ParamStore::new();
    let block = ResidualBlock::new(&mut store, "res", 2, &mut rng());
    let ids: Vec<ParamId> = store.ids().collect();
    for id in ids {
        store.value_mut(id).fill(0.0);
    }
    let xin = store.add("x", Tensor::from_vec(&[1, 2], vec![0.3, -0.2]));
    let emb = Embedding { table: xin };
    let mut g = Graph::new();
    let x = g.embedding(&store, &emb, vec![0], &[1]);
    let y = g.residual_block(&store, x, &block);
    let loss = g.softmax_ce(y, vec![0]);
    g.backward(loss, &mut store).unwrap();
    let p = softmax(&[0.3, -0.2]);
    let gx = store.grad(xin).data();
    assert!((gx[0] - (p[0] - 1.0)).abs() < 1e-6);
    assert!((gx[1] - p[1]).abs() < 1e-6);
}

#[test]
fn softmax_examples() {
    assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
    let p = softmax(&[1000.0, 0.0]);
    assert!(p.iter().all(|v| v.is_finite()));
    assert!((p[0] - 1.0).abs() < 1e-6 && p[1] < 1e-30);
    let p = softmax(&[1.0f32.ln(), 3.0f32.ln()]);
    assert!((p[0] - 0.25).abs() < 1e-6 && (p[1] - 0.75).abs() < 1e-6);
}

#[test]
fn cross_entropy_examples() {
    assert!((cross_entropy_bits(&[0.25; 4], 2) - 2.0).abs() < 1e-12);
    assert_eq!(cross_entropy_bits(&[0.0, 1.0], 1), 0.0);
    let mut p = vec![0.75 / 26.0; 27];
    p[5] = 0.25;
    assert!((cross_entropy_bits(&p, 5) - 2.0).abs() < 1e-12);
}

#[test]
fn softmax_ce_gradient_is_p_minus_y() {
    let mut store = ParamStore::new();
    let logits = store.add("l", Tensor::from_vec(&[1, 3], vec![0.2, -1.0, 0.5]));
    let mut g = Graph::new();
    let x = g.embedding(&store, &Embedding { table: logits }, vec![0], &[1]);
    let loss = g.softmax_ce(x, vec![2]);
    g.backward(loss, &mut store).unwrap();
    let p = softmax(&[0.2, -1.0, 0.5]);
    let expect = [p[0], p[1], p[2] - 1.0];
    for (a, e) in store.grad(logits).data().iter().zip(expect) {
        assert!((a - e).abs() < 1e-7);
    }
}

#[test]
fn unused_parameter_has_zero_gradient() {
    let mut store = ParamStore::new();
    let used = Dense::new(&mut store, "used", 2, 2, &mut rng());
    let unused = Dense::new(&mut store, "unused", 2, 2, &mut rng());
    let mut g = Graph::new();
    let x = g.input(Tensor::from_vec(&[1, 2], vec![1.0, -1.0]));
    let y = g.dense(&store, x, &used, Activation::None);
    let loss = g.softmax_ce(y, vec![0]);
    g.backward(loss, &mut store).unwrap();
    assert!(store.grad(unused.w).data().iter().all(|&v| v == 0.0));
    assert!(store.grad(used.w).data().iter().any(|&v| v != 0.0));
}

#[test]
fn gradcheck_dense() {
    let mut store = ParamStore::new();
    let layer = Dense::new(&mut store, "d", 3, 3, &mut rng());
    randomize(&mut store, &mut rng(), 0.8);
    let x = Tensor::from_vec(&[2, 3], vec![0.5, -1.0, 0.3, 1.2, 0.1, -0.7]);
    for act in [Activation::None, Activation::Relu] {
        check_gradients(&mut store, |g, s| {
            let xi = g.input(x.clone());
            let y = g.dense(s, xi, &layer, act);
            g.softmax_ce(y, vec![1, 2])
        });
    }
}

#[test]
fn gradcheck_embedding() {
    let mut store = ParamStore::new();
    let emb = Embedding::new(&mut store, "e", 3, 3, &mut rng());
    check_gradients(&mut store, |g, s| {
        let e = g.embedding(s, &emb, vec![2, 0, 2, 1], &[4]);
        g.softmax_ce(e, vec![0, 1, 2, 0])
    });
}

// Instances below use a single batch row and inputs of order one so that
// gradients stay well above f32 rounding noise of the difference quotient.

#[test]
fn gradcheck_gru_both_directions() {
    for reverse in [false, true] {
        let mut store = ParamStore::new();
        let layer = Gru::new(&mut store, "g", 2, 1, &mut rng());
        randomize(&mut store, &mut rng(), 1.5);
        let x = Tensor::from_vec(&[4, 1, 2], vec![1.0, -2.0, 0.5, 1.5, -1.0, 2.0, 1.8, -0.6]);
        check_gradients(&mut store, |g, s| {
            let xi = g.input(x.clone());
            let h = g.gru(s, xi, &layer, reverse);
            let flat = g.take_steps(h, vec![0, 1, 2, 3]);
            g.softmax_ce(flat, vec![2])
        });
    }
}

#[test]
fn gradcheck_gru_input_path() {
    // gradient flowing into the GRU input through an embedding table
    let mut store = ParamStore::new();
    let emb = Embedding::new(&mut store, "e", 2, 1, &mut rng());
    let layer = Gru::new(&mut store, "g", 1, 1, &mut rng());
    randomize(&mut store, &mut rng(), 1.5);
    check_gradients(&mut store, |g, s| {
        let e = g.embedding(s, &emb, vec![0, 1, 1], &[3, 1]);
        let h = g.gru(s, e, &layer, false);
        let flat = g.take_steps(h, vec![0, 1, 2]);
        g.softmax_ce(flat, vec![1])
    });
}

#[test]
fn gradcheck_bigru() {
    let mut store = ParamStore::new();
    let layer = BiGru::new(&mut store, "b", 1, 1, &mut rng());
    randomize(&mut store, &mut rng(), 1.5);
    let x = Tensor::from_vec(&[3, 1, 1], vec![1.5, -2.0, 0.9]);
    // weights of both directions; biases are covered by the GRU checks
    let ids = [layer.fwd.wx, layer.fwd.wh, layer.bwd.wx, layer.bwd.wh, layer.bwd.bx];
    check_gradients_of(&mut store, &ids, |g, s| {
        let xi = g.input(x.clone());
        let h = g.bigru(s, xi, &layer);
        let flat = g.take_steps(h, vec![0, 2]);
        g.softmax_ce(flat, vec![3])
    });
}

#[test]
fn gradcheck_residual() {
    let mut store = ParamStore::new();
    let block = ResidualBlock::new(&mut store, "r", 2, &mut rng());
    randomize(&mut store, &mut rng(), 1.5);
    let x = Tensor::from_vec(&[1, 2], vec![1.4, -0.6]);
    check_gradients(&mut store, |g, s| {
        let xi = g.input(x.clone());
        let y = g.residual_block(s, xi, &block);
        g.softmax_ce(y, vec![1])
    });
}

#[test]
fn gradcheck_mix() {
    let mut store = ParamStore::new();
    let b = Dense::new(&mut store, "b", 2, 3, &mut rng());
    let theta = store.add("theta", Tensor::scalar(0.3));
    randomize(&mut store, &mut rng(), 1.0);
    let x = Tensor::from_vec(&[2, 2], vec![0.3, -0.8, 1.1, 0.4]);
    let s_logits = Tensor::from_vec(&[2, 3], vec![0.5, 0.1, -0.4, -1.0, 0.7, 0.2]);
    check_gradients(&mut store, |g, s| {
        let xi = g.input(x.clone());
        let lb = g.dense(s, xi, &b, Activation::None);
        let ls = g.input(s_logits.clone());
        let c = g.mix(s, lb, ls, theta);
        g.softmax_ce(c, vec![2, 0])
    });
}

#[test]
fn gradcheck_concat_and_steps() {
    let mut store = ParamStore::new();
    let a = Embedding::new(&mut store, "a", 2, 2, &mut rng());
    let b = Embedding::new(&mut store, "b", 2, 1, &mut rng());
    check_gradients(&mut store, |g, s| {
        let ea = g.embedding(s, &a, vec![0, 1, 1, 0], &[2, 2]);
        let eb = g.embedding(s, &b, vec![1, 1, 0, 1], &[2, 2]);
        let cat = g.concat(&[ea, eb]);
        let flat = g.take_steps(cat, vec![1, 0]);
        g.softmax_ce(flat, vec![4, 2])
    });
}

#[test]
fn gradcheck_random_small_network() {
    // embedding -> dense -> residual -> dense, 20 parameters in total
    let mut store = ParamStore::new();
    let emb = Embedding::new(&mut store, "e", 2, 2, &mut rng());
    let d1 = Dense::new(&mut store, "d1", 2, 2, &mut rng());
    let d2 = Dense::new(&mut store, "d2", 2, 2, &mut rng());
    randomize(&mut store, &mut rng(), 1.5);
    assert!(store.param_count() >= 10);
    check_gradients(&mut store, |g, s| {
        let e = g.embedding(s, &emb, vec![1], &[1]);
        let h = g.dense(s, e, &d1, Activation::Relu);
        let o = g.dense(s, h, &d2, Activation::None);
        g.softmax_ce(o, vec![0])
    });
}

fn sig(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Straightforward scalar GRU over one sequence, in f64.
fn reference_gru(
    xs: &[Vec<f64>],
    wx: &[f32],
    wh: &[f32],
    bx: &[f32],
    bh: &[f32],
    h: usize,
    reverse: bool,
) -> Vec<Vec<f64>> {
    let i = xs[0].len();
    let mut state = vec![0.0; h];
    let mut out = vec![vec![0.0; h]; xs.len()];
    let order: Vec<usize> = if reverse {
        (0..xs.len()).rev().collect()
    } else {
        (0..xs.len()).collect()
    };
    for t in order {
        let gate = |g: usize, j: usize, hs: &[f64]| {
            let mut a = f64::from(bx[g * h + j]);
            for k in 0..i {
                a += xs[t][k] * f64::from(wx[k * 3 * h + g * h + j]);
            }
            let mut r = f64::from(bh[g * h + j]);
            for k in 0..h {
                r += hs[k] * f64::from(wh[k * 3 * h + g * h + j]);
            }
            (a, r)
        };
        let mut next = vec![0.0; h];
        for j in 0..h {
            let (ar, rr) = gate(0, j, &state);
            let (az, rz) = gate(1, j, &state);
            let (an, rn) = gate(2, j, &state);
            let r = sig(ar + rr);
            let z = sig(az + rz);
            let n = (an + r * rn).tanh();
            next[j] = (1.0 - z) * n + z * state[j];
        }
        state = next;
        out[t] = state.clone();
    }
    out
}

#[test]
fn bigru_matches_reference() {
    let (t, b, e, h) = (3, 2, 2, 2);
    let mut store = ParamStore::new();
    let layer = BiGru::new(&mut store, "b", e, h, &mut rng());
    randomize(&mut store, &mut rng(), 0.8);
    let mut r = rng();
    let x: Vec<f32> = (0..t * b * e).map(|_| r.symmetric_f32(1.0)).collect();
    let mut g = Graph::new();
    let xi = g.input(Tensor::from_vec(&[t, b, e], x.clone()));
    let out = g.bigru(&store, xi, &layer);
    let got = g.value(out);
    assert_eq!(got.shape(), &[t, b, 2 * h]);

    for bi in 0..b {
        let xs: Vec<Vec<f64>> = (0..t)
            .map(|ti| (0..e).map(|k| f64::from(x[(ti * b + bi) * e + k])).collect())
            .collect();
        let w = |l: &Gru| {
            (
                store.value(l.wx).data().to_vec(),
                store.value(l.wh).data().to_vec(),
                store.value(l.bx).data().to_vec(),
                store.value(l.bh).data().to_vec(),
            )
        };
        let (a, bb, c, d) = w(&layer.fwd);
        let f = reference_gru(&xs, &a, &bb, &c, &d, h, false);
        let (a, bb, c, d) = w(&layer.bwd);
        let r = reference_gru(&xs, &a, &bb, &c, &d, h, true);
        for ti in 0..t {
            let row = &got.data()[(ti * b + bi) * 2 * h..(ti * b + bi + 1) * 2 * h];
            for j in 0..h {
                assert!((f64::from(row[j]) - f[ti][j]).abs() < 1e-5);
                assert!((f64::from(row[h + j]) - r[ti][j]).abs() < 1e-5);
            }
        }
    }
}

#[test]
fn bigru_palindrome_symmetry() {
    // identical direction weights + palindromic input: the backward half at
    // step t equals the forward half at step T-1-t
    let (t, e, h) = (5, 1, 2);
    let mut store = ParamStore::new();
    let layer = BiGru::new(&mut store, "b", e, h, &mut rng());
    for (src, dst) in [
        (layer.fwd.wx, layer.bwd.wx),
        (layer.fwd.wh, layer.bwd.wh),
        (layer.fwd.bx, layer.bwd.bx),
        (layer.fwd.bh, layer.bwd.bh),
    ] {
        let v = store.value(src).clone();
        *store.value_mut(dst) = v;
    }
    let x = Tensor::from_vec(&[t, 1, e], vec![0.3, -1.0, 0.8, -1.0, 0.3]);
    let mut g = Graph::new();
    let xi = g.input(x);
    let out = g.bigru(&store, xi, &layer);
    let v = g.value(out);
    for ti in 0..t {
        let a = v.row(ti);
        let b = v.row(t - 1 - ti);
        assert_eq!(&a[..h], &b[h..]);
    }
}

#[test]
fn gru_zero_weights_zero_output_any_input() {
    let mut store = ParamStore::new();
    let layer = Gru::new(&mut store, "g", 3, 4, &mut rng());
    let ids: Vec<ParamId> = store.ids().collect();
    for id in ids {
        store.value_mut(id).fill(0.0);
    }
    let mut r = rng();
    let x: Vec<f32> = (0..6 * 2 * 3).map(|_| r.symmetric_f32(10.0)).collect();
    let mut g = Graph::new();
    let xi = g.input(Tensor::from_vec(&[6, 2, 3], x));
    let h = g.gru(&store, xi, &layer, false);
    assert!(g.value(h).data().iter().all(|&v| v == 0.0));
}

#[test]
fn forward_and_backward_are_deterministic() {
    let run = || {
        let mut store = ParamStore::new();
        let mut r = SeededRng::new(5, Stream::BootstrapInit);
        let emb = Embedding::new(&mut store, "e", 4, 3, &mut r);
        let gru = BiGru::new(&mut store, "g", 3, 4, &mut r);
        let head = Dense::new(&mut store, "h", 16, 4, &mut r);
        let idx: Vec<usize> = (0..8 * 5).map(|i| (i * 7 + 3) % 4).collect();
        let mut g = Graph::new();
        let e = g.embedding(&store, &emb, idx, &[8, 5]);
        let h = g.bigru(&store, e, &gru);
        let f = g.take_steps(h, vec![3, 7]);
        let o = g.dense(&store, f, &head, Activation::None);
        let loss = g.softmax_ce(o, vec![0, 1, 2, 3, 0]);
        g.backward(loss, &mut store).unwrap();
        let cfg = AdamConfig::default();
        clip_gradients(&mut store, cfg.clip_norm).unwrap();
        adam_step(&mut store, &cfg);
        store
    };
    assert!(run().same_values(&run()));
}

#[test]
fn non_finite_loss_is_numeric_error() {
    let mut store = ParamStore::new();
    let t = store.add("t", Tensor::from_vec(&[1, 2], vec![f32::NAN, 0.0]));
    let mut g = Graph::new();
    let x = g.embedding(&store, &Embedding { table: t }, vec![0], &[1]);
    let loss = g.softmax_ce(x, vec![0]);
    assert!(matches!(g.backward(loss, &mut store), Err(crate::Error::Numeric(_))));
}
