//! Matrix kernels with a fixed summation order.
//!
//! Every output element is accumulated over the reduction index in ascending
//! order, one term at a time. Vectorization only ever runs across independent
//! output elements, so results do not depend on SIMD width.

/// `out[m×n] += a[m×k] · b[k×n]`
pub fn matmul_acc(a: &[f32], b: &[f32], out: &mut [f32], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    if n == 0 || m == 0 {
        return;
    }
    if k == 0 {
        return;
    }
    let mut row = 0;
    while row + 4 <= m {
        row_panel::<4>(&a[row * k..(row + 4) * k], b, &mut out[row * n..(row + 4) * n], k, n);
        row += 4;
    }
    while row < m {
        row_panel::<1>(&a[row * k..(row + 1) * k], b, &mut out[row * n..(row + 1) * n], k, n);
        row += 1;
    }
}

/// `R` consecutive rows of `a · b`, swept across the columns in blocks.
#[inline(always)]
fn row_panel<const R: usize>(a: &[f32], b: &[f32], out: &mut [f32], k: usize, n: usize) {
    let mut col = 0;
    while col + 16 <= n {
        block::<R, 16>(a, b, out, k, n, col);
        col += 16;
    }
    while col + 8 <= n {
        block::<R, 8>(a, b, out, k, n, col);
        col += 8;
    }
    while col < n {
        block::<R, 1>(a, b, out, k, n, col);
        col += 1;
    }
}

/// `out[0..R, col..col+W] += a[0..R, :] · b[:, col..col+W]`, the output tile
/// held in registers across the whole reduction.
#[inline(always)]
fn block<const R: usize, const W: usize>(a: &[f32], b: &[f32], out: &mut [f32], k: usize, n: usize, col: usize) {
    let mut acc = [[0.0f32; W]; R];
    for (r, acc_r) in acc.iter_mut().enumerate() {
        acc_r.copy_from_slice(&out[r * n + col..r * n + col + W]);
    }
    for p in 0..k {
        let brow: &[f32; W] = b[p * n + col..p * n + col + W].try_into().unwrap();
        for (r, acc_r) in acc.iter_mut().enumerate() {
            let av = a[r * k + p];
            for (x, &bv) in acc_r.iter_mut().zip(brow) {
                *x += av * bv;
            }
        }
    }
    for (r, acc_r) in acc.iter().enumerate() {
        out[r * n + col..r * n + col + W].copy_from_slice(acc_r);
    }
}

/// `out[k×n] += a[m×k]ᵀ · b[m×n]`, reducing over rows in order.
pub fn matmul_tn_acc(a: &[f32], b: &[f32], out: &mut [f32], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(out.len(), k * n);
    if n == 0 || k == 0 {
        return;
    }
    for (p, orow) in out.chunks_exact_mut(n).enumerate() {
        let mut col = 0;
        while col + 16 <= n {
            col_block::<16>(a, b, orow, (m, k, n), p, col);
            col += 16;
        }
        while col + 8 <= n {
            col_block::<8>(a, b, orow, (m, k, n), p, col);
            col += 8;
        }
        while col < n {
            col_block::<1>(a, b, orow, (m, k, n), p, col);
            col += 1;
        }
    }
}

/// `orow[col..col+W] += Σ_r a[r, p] · b[r, col..col+W]`
#[inline(always)]
fn col_block<const W: usize>(
    a: &[f32],
    b: &[f32],
    orow: &mut [f32],
    (m, k, n): (usize, usize, usize),
    p: usize,
    col: usize,
) {
    let o = &mut orow[col..col + W];
    let mut acc = [0.0f32; W];
    acc.copy_from_slice(o);
    for (arow, brow) in a.chunks_exact(k).zip(b.chunks_exact(n)).take(m) {
        let av = arow[p];
        for (x, &bv) in acc.iter_mut().zip(&brow[col..col + W]) {
            *x += av * bv;
        }
    }
    o.copy_from_slice(&acc);
}

/// `out[m×k] += a[m×n] · b[k×n]ᵀ`
pub fn matmul_nt_acc(a: &[f32], b: &[f32], out: &mut [f32], m: usize, n: usize, k: usize) {
    let bt = transpose(b, k, n);
    matmul_acc(a, &bt, out, m, n, k);
}

pub fn transpose(x: &[f32], rows: usize, cols: usize) -> Vec<f32> {
    let mut t = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = x[r * cols + c];
        }
    }
    t
}

/// Adds `bias` to every row of `x`.
pub fn add_row_bias(x: &mut [f32], bias: &[f32]) {
    if bias.is_empty() {
        return;
    }
    for row in x.chunks_exact_mut(bias.len()) {
        for (v, &b) in row.iter_mut().zip(bias) {
            *v += b;
        }
    }
}

/// `out[n] += Σ_rows x[rows×n]`, rows in order.
pub fn col_sum_acc(x: &[f32], out: &mut [f32]) {
    if out.is_empty() {
        return;
    }
    for row in x.chunks_exact(out.len()) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

/// `e^x` from plain `f32` arithmetic (range reduction plus a degree-6
/// polynomial), so results do not depend on the platform's libm and the
/// slice loops below vectorize. Relative error is a few ulp.
#[inline]
pub fn exp(x: f32) -> f32 {
    const LOG2E: f32 = std::f32::consts::LOG2_E;
    const LN2_HI: f32 = 0.693_359_4;
    const LN2_LO: f32 = -2.121_944_4e-4;
    // adding 1.5·2^23 rounds to an integer held in the low mantissa bits
    const SHIFT: f32 = 12_582_912.0;
    let x = x.clamp(-87.0, 88.0);
    let t = x * LOG2E + SHIFT;
    let n = t - SHIFT;
    let r = x - n * LN2_HI - n * LN2_LO;
    let p = ((((1.987_569_1e-4 * r + 1.398_199_9e-3) * r + 8.333_452e-3) * r + 4.166_579_6e-2) * r + 1.666_666_5e-1)
        * r
        + 5e-1;
    let y = p * (r * r) + r + 1.0;
    y * f32::from_bits((t.to_bits().wrapping_sub(SHIFT.to_bits()).wrapping_add(127)) << 23)
}

#[inline]
pub fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + exp(-x))
}

#[inline]
pub fn tanh(x: f32) -> f32 {
    1.0 - 2.0 / (exp(2.0 * x) + 1.0)
}

pub fn sigmoid_in_place(xs: &mut [f32]) {
    for x in xs {
        *x = sigmoid(*x);
    }
}

pub fn tanh_in_place(xs: &mut [f32]) {
    for x in xs {
        *x = tanh(*x);
    }
}
