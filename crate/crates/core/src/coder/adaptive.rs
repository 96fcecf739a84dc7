use super::{Decoder, Encoder};

const INCREMENT: u32 = 24;
const LIMIT: u32 = 1 << 16;

/// Adaptive order-0 frequency model over `n` symbols.
///
/// Counts start at one; each coded symbol adds a fixed increment and all
/// counts are halved (keeping them positive) once the total exceeds 2^16.
#[derive(Clone, Debug)]
pub struct AdaptiveModel {
    freq: Vec<u32>,
    total: u32,
}

impl AdaptiveModel {
    pub fn new(symbols: usize) -> Self {
        assert!((1..=256).contains(&symbols), "alphabet of {symbols} symbols");
        Self {
            freq: vec![1; symbols],
            total: symbols as u32,
        }
    }

    fn interval(&self, s: usize) -> (u32, u32) {
        let lo: u32 = self.freq[..s].iter().sum();
        (lo, lo + self.freq[s])
    }

    fn update(&mut self, s: usize) {
        self.freq[s] += INCREMENT;
        self.total += INCREMENT;
        if self.total > LIMIT {
            self.total = 0;
            for f in &mut self.freq {
                *f = (*f).div_ceil(2);
                self.total += *f;
            }
        }
    }

    pub fn encode(&mut self, enc: &mut Encoder, s: usize) {
        let (lo, hi) = self.interval(s);
        enc.encode_range(lo, hi, self.total);
        self.update(s);
    }

    pub fn decode(&mut self, dec: &mut Decoder) -> usize {
        let target = dec.target(self.total);
        let mut lo = 0;
        let mut s = 0;
        while lo + self.freq[s] <= target {
            lo += self.freq[s];
            s += 1;
        }
        dec.consume(lo, lo + self.freq[s], self.total);
        self.update(s);
        s
    }
}

/// Codes a byte string with a fresh order-0 model.
pub fn encode_bytes(data: &[u8]) -> (Vec<u8>, u64) {
    let mut enc = Encoder::new();
    let mut model = AdaptiveModel::new(256);
    for &b in data {
        model.encode(&mut enc, usize::from(b));
    }
    enc.finish()
}

/// Inverse of [`encode_bytes`] for a known output length.
pub fn decode_bytes(bytes: &[u8], bits: u64, len: usize) -> Vec<u8> {
    let mut dec = Decoder::new(bytes, bits);
    let mut model = AdaptiveModel::new(256);
    (0..len).map(|_| model.decode(&mut dec) as u8).collect()
}
