//! Byte ingestion: alphabet detection, symbol mapping, context windows and
//! part splitting shared by both coding modes.

use crate::error::{Error, Result};

/// Default number of preceding symbols a predictor conditions on.
pub const DEFAULT_CONTEXT: usize = 64;

/// The set of distinct bytes in an input, in ascending byte order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    byte_to_index: [Option<u8>; 256],
    index_to_byte: Vec<u8>,
}

impl Alphabet {
    /// Builds an alphabet from an arbitrary byte list. Duplicates are merged
    /// and the result is put in canonical (ascending) order.
    pub fn from_bytes(list: &[u8]) -> Result<Self> {
        let mut seen = [false; 256];
        for &b in list {
            seen[b as usize] = true;
        }
        Self::from_presence(&seen)
    }

    fn from_presence(seen: &[bool; 256]) -> Result<Self> {
        let mut byte_to_index = [None; 256];
        let mut index_to_byte = Vec::new();
        for (b, _) in seen.iter().enumerate().filter(|(_, &s)| s) {
            // at most 256 entries, so the index always fits in u8
            byte_to_index[b] = Some(index_to_byte.len() as u8);
            index_to_byte.push(b as u8);
        }
        if index_to_byte.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            byte_to_index,
            index_to_byte,
        })
    }

    pub fn size(&self) -> usize {
        self.index_to_byte.len()
    }

    pub fn bytes(&self) -> &[u8] {
        &self.index_to_byte
    }

    pub fn index_of(&self, byte: u8) -> Option<usize> {
        self.byte_to_index[byte as usize].map(usize::from)
    }

    pub fn byte_at(&self, index: usize) -> u8 {
        self.index_to_byte[index]
    }
}

/// Scans the input once and returns the canonical alphabet of the bytes present.
pub fn detect_alphabet(bytes: &[u8]) -> Result<Alphabet> {
    let mut seen = [false; 256];
    for &b in bytes {
        seen[b as usize] = true;
    }
    Alphabet::from_presence(&seen)
}

/// An input expressed as alphabet indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolStream {
    symbols: Vec<u8>,
    alphabet: Alphabet,
}

impl SymbolStream {
    pub fn new(symbols: Vec<u8>, alphabet: Alphabet) -> Result<Self> {
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= alphabet.size()) {
            return Err(Error::CorruptArchive(format!(
                "symbol {s} outside alphabet of {}",
                alphabet.size()
            )));
        }
        Ok(Self { symbols, alphabet })
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Maps the indices back to the original bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.symbols
            .iter()
            .map(|&s| self.alphabet.byte_at(s as usize))
            .collect()
    }
}

/// Maps every byte to its alphabet index.
pub fn map_symbols(bytes: &[u8], alphabet: &Alphabet) -> Result<SymbolStream> {
    let symbols = bytes
        .iter()
        .map(|&b| alphabet.index_of(b).map(|i| i as u8).ok_or(Error::AlphabetMismatch(b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolStream {
        symbols,
        alphabet: alphabet.clone(),
    })
}

/// The `len` symbols preceding position `pos`, oldest first.
///
/// Callers only ask for windows that are fully inside the part; positions
/// closer than `len` to the part start are coded uniformly instead.
#[derive(Clone, Copy, Debug)]
pub struct ContextWindow<'a> {
    window: &'a [u8],
}

impl<'a> ContextWindow<'a> {
    pub fn at(symbols: &'a [u8], pos: usize, len: usize) -> Option<Self> {
        (pos >= len && pos <= symbols.len()).then(|| Self {
            window: &symbols[pos - len..pos],
        })
    }

    pub fn symbols(&self) -> &'a [u8] {
        self.window
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }
}

/// Contiguous, nearly equal partition of a stream into `P` parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartLayout {
    boundaries: Vec<usize>,
}

impl PartLayout {
    pub fn num_parts(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn range(&self, part: usize) -> std::ops::Range<usize> {
        self.boundaries[part]..self.boundaries[part + 1]
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundaries.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max_size(&self) -> usize {
        self.sizes().max().unwrap_or(0)
    }
}

/// Splits `len` symbols into `parts` parts whose sizes differ by at most one;
/// the remainder goes to the earliest parts.
pub fn split_parts(len: usize, parts: usize) -> PartLayout {
    assert!(parts >= 1, "part count must be positive");
    let base = len / parts;
    let extra = len % parts;
    let mut boundaries = Vec::with_capacity(parts + 1);
    let mut offset = 0;
    boundaries.push(0);
    for p in 0..parts {
        offset += base + usize::from(p < extra);
        boundaries.push(offset);
    }
    PartLayout { boundaries }
}
