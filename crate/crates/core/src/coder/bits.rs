/// Most-significant-bit-first bit sink; the final byte is zero-padded.
#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        let offset = (self.len % 8) as u32;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.len += 1;
    }

    /// Number of bits written so far.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// Reads bits MSB-first; positions past `len` read as zero.
#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    len: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], len: u64) -> Self {
        Self {
            bytes,
            len: len.min(bytes.len() as u64 * 8),
            pos: 0,
        }
    }

    pub fn next_bit(&mut self) -> bool {
        let bit = self.pos < self.len && {
            let byte = self.bytes[(self.pos / 8) as usize];
            byte & (0x80 >> (self.pos % 8)) != 0
        };
        self.pos += 1;
        bit
    }
}
