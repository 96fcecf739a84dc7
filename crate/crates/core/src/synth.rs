//! Binary sources with known entropy rates.
//!
//! Symbols are written as ASCII `'0'`/`'1'` so generated files go through
//! the same byte pipeline as any other input.

use crate::error::{Error, Result};
use crate::rng::{SeededRng, Stream};

pub const ZERO: u8 = b'0';
pub const ONE: u8 = b'1';

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Xor,
    Hmm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub family: Family,
    pub k: usize,
    pub n: usize,
    /// Bernoulli flip probability; only used by [`Family::Hmm`].
    pub noise_p: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn xor(k: usize, n: usize, seed: u64) -> Self {
        Self {
            family: Family::Xor,
            k,
            n,
            noise_p: 0.0,
            seed,
        }
    }

    pub fn hmm(k: usize, n: usize, seed: u64) -> Self {
        Self {
            family: Family::Hmm,
            k,
            n,
            noise_p: 0.1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n <= self.k {
            return Err(Error::InvalidConfig(format!(
                "need k >= 1 and n > k (k={}, n={})",
                self.k, self.n
            )));
        }
        if !(0.0..=0.5).contains(&self.noise_p) {
            return Err(Error::InvalidConfig(format!(
                "noise_p {} outside [0, 0.5]",
                self.noise_p
            )));
        }
        Ok(())
    }
}

/// Extends `init` (its length must exceed `k`) with
/// `s[i] = s[i-1] ^ s[i-1-k]` up to `n` bits.
pub fn xor_recurrence(init: &[u8], k: usize, n: usize) -> Vec<u8> {
    assert!(init.len() > k, "need k+1 initial bits");
    let mut s = init.to_vec();
    s.truncate(n);
    s.reserve(n.saturating_sub(s.len()));
    while s.len() < n {
        let i = s.len();
        s.push(s[i - 1] ^ s[i - 1 - k]);
    }
    s
}

fn hidden_bits(spec: &SyntheticSpec, rng: &mut SeededRng) -> Vec<u8> {
    let init: Vec<u8> = (0..=spec.k).map(|_| u8::from(rng.bit())).collect();
    xor_recurrence(&init, spec.k, spec.n)
}

fn to_ascii(bits: &[u8]) -> Vec<u8> {
    bits.iter().map(|&b| if b == 0 { ZERO } else { ONE }).collect()
}

/// XOR-k sequence: `k+1` seeded fair bits, then the recurrence.
pub fn gen_xor_k(spec: &SyntheticSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed, Stream::Synthetic);
    Ok(to_ascii(&hidden_bits(spec, &mut rng)))
}

/// Hidden XOR-k sequence observed through a binary symmetric channel.
/// Returns `(observed, hidden)`.
pub fn gen_hmm_k_with_hidden(spec: &SyntheticSpec) -> Result<(Vec<u8>, Vec<u8>)> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed, Stream::Synthetic);
    let hidden = hidden_bits(spec, &mut rng);
    let observed: Vec<u8> = hidden
        .iter()
        .map(|&x| x ^ u8::from(rng.unit_f64() < spec.noise_p))
        .collect();
    Ok((to_ascii(&observed), to_ascii(&hidden)))
}

pub fn gen_hmm_k(spec: &SyntheticSpec) -> Result<Vec<u8>> {
    gen_hmm_k_with_hidden(spec).map(|(s, _)| s)
}

pub fn generate(spec: &SyntheticSpec) -> Result<Vec<u8>> {
    match spec.family {
        Family::Xor => gen_xor_k(spec),
        Family::Hmm => gen_hmm_k(spec),
    }
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// Entropy rate of the source in bits per symbol.
pub fn entropy_rate(spec: &SyntheticSpec) -> f64 {
    match spec.family {
        Family::Xor => 0.0,
        Family::Hmm => binary_entropy(spec.noise_p),
    }
}
