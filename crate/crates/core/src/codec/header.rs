//! Archive container: fixed little-endian header, model blob, payload and
//! an optional trace trailer.

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NZ01";
pub const VERSION: u8 = 1;
/// The only width schedule defined so far.
pub const SCHEDULE_ID: u8 = 1;
/// Set when an 8-byte coding trace hash follows the payload.
pub const FLAG_TRACE: u8 = 1;

/// How the payload was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoredMode {
    BootstrapOnly = 0,
    Combined = 1,
    /// Adaptive order-0 counts, for inputs too short to train on.
    Order0 = 2,
    /// Empty input or a single repeated byte: nothing is coded.
    Trivial = 3,
}

impl StoredMode {
    fn from_u8(v: u8) -> Result<Self> {
        Ok(match v {
            0 => Self::BootstrapOnly,
            1 => Self::Combined,
            2 => Self::Order0,
            3 => Self::Trivial,
            _ => return Err(Error::CorruptArchive(format!("unknown mode {v}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub mode: StoredMode,
    pub flags: u8,
    pub seed: u64,
    pub len: u64,
    pub alphabet: Vec<u8>,
    pub context: u16,
    pub stride: u8,
    pub parts: u16,
    pub update_interval: u16,
    pub schedule: u8,
    pub scaled: bool,
    pub checksum: u64,
}

/// A parsed or freshly built archive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Archive {
    pub header: Header,
    pub model_blob: Vec<u8>,
    pub payload: Vec<u8>,
    pub payload_bits: u64,
    pub trace: Option<u64>,
}

impl Archive {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(64 + self.model_blob.len() + self.payload.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(h.mode as u8);
        let flags = (h.flags & !FLAG_TRACE) | if self.trace.is_some() { FLAG_TRACE } else { 0 };
        out.push(flags);
        out.extend_from_slice(&h.seed.to_le_bytes());
        out.extend_from_slice(&h.len.to_le_bytes());
        out.extend_from_slice(&(h.alphabet.len() as u16).to_le_bytes());
        out.extend_from_slice(&h.alphabet);
        out.extend_from_slice(&h.context.to_le_bytes());
        out.push(h.stride);
        out.extend_from_slice(&h.parts.to_le_bytes());
        out.extend_from_slice(&h.update_interval.to_le_bytes());
        out.push(h.schedule);
        out.push(u8::from(h.scaled));
        out.extend_from_slice(&h.checksum.to_le_bytes());
        out.extend_from_slice(&(self.model_blob.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.model_blob);
        out.extend_from_slice(&self.payload_bits.to_le_bytes());
        out.extend_from_slice(&self.payload);
        if let Some(t) = self.trace {
            out.extend_from_slice(&t.to_le_bytes());
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::CorruptArchive("bad magic".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let mode = StoredMode::from_u8(r.u8()?)?;
        let flags = r.u8()?;
        if flags & !FLAG_TRACE != 0 {
            return Err(Error::CorruptArchive(format!("unknown flags {flags:#04x}")));
        }
        let seed = r.u64()?;
        let len = r.u64()?;
        let v = usize::from(r.u16()?);
        if v > 256 {
            return Err(Error::CorruptArchive(format!("alphabet of {v} symbols")));
        }
        let alphabet = r.take(v)?.to_vec();
        if alphabet.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::CorruptArchive("alphabet not strictly increasing".into()));
        }
        let header = Header {
            mode,
            flags,
            seed,
            len,
            alphabet,
            context: r.u16()?,
            stride: r.u8()?,
            parts: r.u16()?,
            update_interval: r.u16()?,
            schedule: r.u8()?,
            scaled: match r.u8()? {
                0 => false,
                1 => true,
                x => return Err(Error::CorruptArchive(format!("profile flag {x}"))),
            },
            checksum: r.u64()?,
        };
        let blob_len = r.u64()?;
        let model_blob = r.take(usize::try_from(blob_len).unwrap_or(usize::MAX))?.to_vec();
        let payload_bits = r.u64()?;
        let trailer = if flags & FLAG_TRACE != 0 { 8 } else { 0 };
        let rest = bytes.len() - r.pos;
        if rest < trailer || (rest - trailer) as u64 != payload_bits.div_ceil(8) {
            return Err(Error::CorruptArchive(format!(
                "payload of {payload_bits} bits does not match {rest} remaining bytes"
            )));
        }
        let payload = r.take(rest - trailer)?.to_vec();
        let trace = if trailer > 0 { Some(r.u64()?) } else { None };
        Ok(Self {
            header,
            model_blob,
            payload,
            payload_bits,
            trace,
        })
    }

    /// Bytes taken by everything except the model blob and the payload.
    pub fn overhead_bytes(&self) -> usize {
        self.to_bytes().len() - self.model_blob.len() - self.payload.len()
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::CorruptArchive("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// 64-bit FNV-1a.
#[derive(Clone, Copy, Debug)]
pub struct Fnv64(u64);

impl Default for Fnv64 {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv64 {
    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

pub fn checksum(bytes: &[u8]) -> u64 {
    let mut h = Fnv64::default();
    h.update(bytes);
    h.finish()
}
