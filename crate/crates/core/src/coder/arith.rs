//! 32-bit Witten–Neal–Cleary arithmetic coder with pending-bit carry handling.

use super::bits::{BitReader, BitWriter};
use super::QuantizedCdf;

const TOP: u64 = (1 << 32) - 1;
const HALF: u64 = 1 << 31;
const QUARTER: u64 = 1 << 30;

/// Upper bound on the bits `finish` emits beyond the pending backlog.
pub const FLUSH_BITS: u64 = 2;

#[derive(Clone, Debug)]
pub struct Encoder {
    low: u64,
    high: u64,
    pending: u64,
    out: BitWriter,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            high: TOP,
            pending: 0,
            out: BitWriter::new(),
        }
    }

    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        for _ in 0..self.pending {
            self.out.push(!bit);
        }
        self.pending = 0;
    }

    /// Narrows the interval to `[lo, hi)` out of `total`.
    pub fn encode_range(&mut self, lo: u32, hi: u32, total: u32) {
        debug_assert!(lo < hi && hi <= total && u64::from(total) <= QUARTER);
        let range = self.high - self.low + 1;
        self.high = self.low + range * u64::from(hi) / u64::from(total) - 1;
        self.low += range * u64::from(lo) / u64::from(total);
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < HALF + QUARTER {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    pub fn encode(&mut self, cdf: &QuantizedCdf, s: usize) {
        self.encode_range(cdf.cum()[s], cdf.cum()[s + 1], cdf.total());
    }

    /// Codes `s` with probability exactly `1/n`.
    pub fn encode_uniform(&mut self, s: usize, n: usize) {
        self.encode_range(s as u32, s as u32 + 1, n as u32);
    }

    /// Bits committed so far, excluding the pending backlog.
    pub fn bits_written(&self) -> u64 {
        self.out.len()
    }

    /// Disambiguates the final interval; returns the bytes and the exact
    /// bit length.
    pub fn finish(mut self) -> (Vec<u8>, u64) {
        self.pending += 1;
        let bit = self.low >= QUARTER;
        self.emit(bit);
        let len = self.out.len();
        (self.out.into_bytes(), len)
    }
}

#[derive(Clone, Debug)]
pub struct Decoder<'a> {
    low: u64,
    high: u64,
    value: u64,
    input: BitReader<'a>,
}

impl<'a> Decoder<'a> {
    pub fn new(bytes: &'a [u8], bit_len: u64) -> Self {
        let mut input = BitReader::new(bytes, bit_len);
        let mut value = 0u64;
        for _ in 0..32 {
            value = (value << 1) | u64::from(input.next_bit());
        }
        Self {
            low: 0,
            high: TOP,
            value,
            input,
        }
    }

    /// Position of the current value inside `[0, total)`.
    pub fn target(&self, total: u32) -> u32 {
        let range = self.high - self.low + 1;
        let t = ((self.value.saturating_sub(self.low) + 1) * u64::from(total) - 1) / range;
        // a corrupt stream can push the value outside the interval
        t.min(u64::from(total) - 1) as u32
    }

    /// Consumes the interval `[lo, hi)` chosen after [`Decoder::target`].
    pub fn consume(&mut self, lo: u32, hi: u32, total: u32) {
        let range = self.high - self.low + 1;
        self.high = self.low + range * u64::from(hi) / u64::from(total) - 1;
        self.low += range * u64::from(lo) / u64::from(total);
        loop {
            if self.high < HALF {
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.value = self.value.wrapping_sub(HALF);
            } else if self.low >= QUARTER && self.high < HALF + QUARTER {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.value = self.value.wrapping_sub(QUARTER);
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = ((self.value << 1) | u64::from(self.input.next_bit())) & TOP;
        }
    }

    pub fn decode(&mut self, cdf: &QuantizedCdf) -> usize {
        let s = cdf.find(self.target(cdf.total()));
        self.consume(cdf.cum()[s], cdf.cum()[s + 1], cdf.total());
        s
    }

    pub fn decode_uniform(&mut self, n: usize) -> usize {
        let s = self.target(n as u32) as usize;
        self.consume(s as u32, s as u32 + 1, n as u32);
        s
    }
}
