//! Two-stage compression: train the bootstrap on the input, then code the
//! input part-parallel with the bootstrap alone or combined with an
//! adaptively trained supporter.

mod engine;
mod header;
mod model_blob;

use std::time::{Duration, Instant};

use crate::coder::{Decoder, Encoder};
use crate::error::{Error, Result};
use crate::models::{select_configs, Bootstrap, BootstrapConfig, Profile, Supporter, DEFAULT_STRIDE};
use crate::nn::AdamConfig;
use crate::symbols::{detect_alphabet, map_symbols, Alphabet, SymbolStream, DEFAULT_CONTEXT};
use crate::trainer::{train_bootstrap_with, EpochRecord, TrainPlan};

use engine::{AdaptivePlan, DecodeChannel, EncodeChannel, Trace};
pub use header::{checksum, Archive, Fnv64, Header, StoredMode, FLAG_TRACE, MAGIC, SCHEDULE_ID, VERSION};
pub use model_blob::{deserialize_model, deserialize_values, serialize_model};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    BootstrapOnly,
    Combined,
}

/// Stage II settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeConfig {
    pub mode: Mode,
    pub parts: usize,
    pub update_interval: usize,
}

/// Learning rate of the adaptive updates. Fixed by the format because the
/// decoder must replay them.
pub const ADAPTIVE_LR: f32 = 0.0005;

impl ModeConfig {
    pub fn bootstrap_only() -> Self {
        Self {
            mode: Mode::BootstrapOnly,
            parts: 1024,
            update_interval: 20,
        }
    }

    pub fn combined() -> Self {
        Self {
            mode: Mode::Combined,
            parts: 64,
            ..Self::bootstrap_only()
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::BootstrapOnly => Self::bootstrap_only(),
            Mode::Combined => Self::combined(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=usize::from(u16::MAX)).contains(&self.parts) {
            return Err(Error::InvalidConfig(format!("part count {}", self.parts)));
        }
        if !(1..=usize::from(u16::MAX)).contains(&self.update_interval) {
            return Err(Error::InvalidConfig(format!(
                "update interval {}",
                self.update_interval
            )));
        }
        Ok(())
    }

    fn adaptive_plan(&self) -> AdaptivePlan {
        AdaptivePlan {
            parts: self.parts,
            update_interval: self.update_interval,
            adam: AdamConfig {
                lr: ADAPTIVE_LR,
                beta1: 0.0,
                beta2: 0.999,
                ..AdamConfig::default()
            },
        }
    }
}

/// Everything that controls compression. The seed drives every random draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompressOptions {
    pub mode: ModeConfig,
    pub plan: TrainPlan,
    pub profile: Profile,
    pub context: usize,
    pub stride: usize,
    pub seed: u64,
    /// Append a hash of every coding distribution for symmetry checks.
    pub trace: bool,
}

impl CompressOptions {
    pub fn new(mode: Mode, seed: u64) -> Self {
        Self {
            mode: ModeConfig::for_mode(mode),
            plan: TrainPlan::default(),
            profile: Profile::Full,
            context: DEFAULT_CONTEXT,
            stride: DEFAULT_STRIDE,
            seed,
            trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mode.validate()?;
        self.plan.validate()?;
        if self.context == 0 || self.context > usize::from(u16::MAX) {
            return Err(Error::InvalidConfig(format!("context {}", self.context)));
        }
        if self.stride == 0 || self.stride > 255 || !self.context.is_multiple_of(self.stride) {
            return Err(Error::InvalidConfig(format!(
                "stride {} must divide context {}",
                self.stride, self.context
            )));
        }
        Ok(())
    }

    fn train_plan(&self) -> TrainPlan {
        TrainPlan {
            seed: self.seed,
            ..self.plan
        }
    }
}

/// Side information from one compression run.
#[derive(Clone, Debug, Default)]
pub struct CompressReport {
    pub train_log: Vec<EpochRecord>,
    pub train_time: Duration,
    pub encode_time: Duration,
}

/// A bootstrap trained for a particular input and set of options; lets the
/// same model be coded in both modes without training twice.
#[derive(Clone, Debug)]
pub struct Trained {
    pub model: Bootstrap,
    pub log: Vec<EpochRecord>,
    pub time: Duration,
}

fn configs(v: usize, opts: &CompressOptions) -> Result<(BootstrapConfig, crate::models::SupporterConfig)> {
    select_configs(v, opts.profile, opts.context, opts.stride)
}

/// Stage I alone. Fails for inputs that are empty, single-symbol, or not
/// longer than the context.
pub fn train(bytes: &[u8], opts: &CompressOptions) -> Result<Trained> {
    opts.validate()?;
    let alphabet = detect_alphabet(bytes)?;
    let stream = map_symbols(bytes, &alphabet)?;
    let (cfg, _) = configs(alphabet.size(), opts)?;
    let start = Instant::now();
    let (model, log) = train_bootstrap_with(stream.symbols(), cfg, &opts.train_plan(), |_| {})?;
    Ok(Trained {
        model,
        log,
        time: start.elapsed(),
    })
}

pub fn compress(bytes: &[u8], opts: &CompressOptions) -> Result<Archive> {
    compress_with_report(bytes, opts, None, |_| {}).map(|(a, _)| a)
}

/// Full compression. `trained` may supply a bootstrap produced by [`train`]
/// with the same options; `on_epoch` sees each training epoch as it ends.
pub fn compress_with_report(
    bytes: &[u8],
    opts: &CompressOptions,
    trained: Option<&Trained>,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Archive, CompressReport)> {
    opts.validate()?;
    let mut header = Header {
        mode: StoredMode::Trivial,
        flags: 0,
        seed: opts.seed,
        len: bytes.len() as u64,
        alphabet: Vec::new(),
        context: opts.context as u16,
        stride: opts.stride as u8,
        parts: opts.mode.parts as u16,
        update_interval: opts.mode.update_interval as u16,
        schedule: SCHEDULE_ID,
        scaled: opts.profile == Profile::Scaled,
        checksum: checksum(bytes),
    };
    let mut report = CompressReport::default();
    let trivial = |header: Header| Archive {
        header,
        model_blob: Vec::new(),
        payload: Vec::new(),
        payload_bits: 0,
        trace: None,
    };
    if bytes.is_empty() {
        return Ok((trivial(header), report));
    }
    let alphabet = detect_alphabet(bytes)?;
    header.alphabet = alphabet.bytes().to_vec();
    let v = alphabet.size();
    if v == 1 {
        return Ok((trivial(header), report));
    }
    let mut symbols = map_symbols(bytes, &alphabet)?.symbols().to_vec();
    let mut ch = EncodeChannel {
        enc: Encoder::new(),
        trace: Trace::new(opts.trace),
    };

    let model_blob = if symbols.len() <= opts.context {
        header.mode = StoredMode::Order0;
        let start = Instant::now();
        engine::run_order0(&mut symbols, v, &mut ch);
        report.encode_time = start.elapsed();
        Vec::new()
    } else {
        let (bcfg, scfg) = configs(v, opts)?;
        let boot = match trained {
            Some(t) => {
                if *t.model.config() != bcfg {
                    return Err(Error::InvalidConfig(
                        "pre-trained model has a different topology".into(),
                    ));
                }
                report.train_log = t.log.clone();
                report.train_time = t.time;
                t.model.clone()
            }
            None => {
                let start = Instant::now();
                let (m, log) = train_bootstrap_with(&symbols, bcfg, &opts.train_plan(), &mut on_epoch)?;
                report.train_time = start.elapsed();
                report.train_log = log;
                m
            }
        };
        // the decoder sees the parameters only after the blob round trip
        let blob = serialize_model(&boot.values());
        let boot = deserialize_model(&blob, bcfg)?;
        let start = Instant::now();
        match opts.mode.mode {
            Mode::BootstrapOnly => {
                header.mode = StoredMode::BootstrapOnly;
                engine::run_bootstrap_only(&mut symbols, &boot, opts.mode.parts, &mut ch)?;
            }
            Mode::Combined => {
                header.mode = StoredMode::Combined;
                let mut sup = Supporter::new(scfg, opts.seed);
                engine::run_combined(&mut symbols, &boot, &mut sup, &opts.mode.adaptive_plan(), &mut ch)?;
            }
        }
        report.encode_time = start.elapsed();
        blob
    };
    let trace = ch.trace.finish();
    let (payload, payload_bits) = ch.enc.finish();
    Ok((
        Archive {
            header,
            model_blob,
            payload,
            payload_bits,
            trace,
        },
        report,
    ))
}

/// Result of decoding, with the decoder-side trace hash when the archive
/// carries one.
#[derive(Clone, Debug)]
pub struct Decoded {
    pub bytes: Vec<u8>,
    pub trace: Option<u64>,
    pub decode_time: Duration,
}

pub fn decompress(archive: &[u8]) -> Result<Vec<u8>> {
    decompress_detailed(archive).map(|d| d.bytes)
}

pub fn decompress_detailed(archive: &[u8]) -> Result<Decoded> {
    let a = Archive::parse(archive)?;
    let h = &a.header;
    let len = usize::try_from(h.len).map_err(|_| Error::CorruptArchive("length overflow".into()))?;
    let start = Instant::now();
    let v = h.alphabet.len();
    if h.mode == StoredMode::Trivial {
        let shape_ok = (len == 0 && v == 0) || (len > 0 && v == 1);
        if !shape_ok || !a.model_blob.is_empty() || a.payload_bits != 0 {
            return Err(Error::CorruptArchive("inconsistent trivial archive".into()));
        }
        let bytes = h.alphabet.first().map_or_else(Vec::new, |&b| vec![b; len]);
        return finish_decode(&a, bytes, None, start);
    }
    if len == 0 || v < 2 {
        return Err(Error::CorruptArchive("coded archive without a coded alphabet".into()));
    }
    let alphabet = Alphabet::from_bytes(&h.alphabet)?;
    let mut symbols = vec![0u8; len];
    let mut ch = DecodeChannel {
        dec: Decoder::new(&a.payload, a.payload_bits),
        trace: Trace::new(a.trace.is_some()),
    };
    let context = usize::from(h.context);
    let stride = usize::from(h.stride);
    match h.mode {
        StoredMode::Order0 => {
            if len > context || !a.model_blob.is_empty() {
                return Err(Error::CorruptArchive("order-0 mode on a trainable input".into()));
            }
            engine::run_order0(&mut symbols, v, &mut ch);
        }
        StoredMode::BootstrapOnly | StoredMode::Combined => {
            if h.schedule != SCHEDULE_ID {
                return Err(Error::CorruptArchive(format!("unknown schedule {}", h.schedule)));
            }
            if len <= context || stride == 0 || context % stride != 0 || h.parts == 0 || h.update_interval == 0 {
                return Err(Error::CorruptArchive("inconsistent model settings".into()));
            }
            let profile = if h.scaled { Profile::Scaled } else { Profile::Full };
            let (bcfg, scfg) =
                select_configs(v, profile, context, stride).map_err(|e| Error::CorruptArchive(e.to_string()))?;
            let boot = deserialize_model(&a.model_blob, bcfg)?;
            let mut mode = ModeConfig::for_mode(if h.mode == StoredMode::Combined {
                Mode::Combined
            } else {
                Mode::BootstrapOnly
            });
            mode.parts = usize::from(h.parts);
            mode.update_interval = usize::from(h.update_interval);
            if h.mode == StoredMode::Combined {
                let mut sup = Supporter::new(scfg, h.seed);
                engine::run_combined(&mut symbols, &boot, &mut sup, &mode.adaptive_plan(), &mut ch)?;
            } else {
                engine::run_bootstrap_only(&mut symbols, &boot, mode.parts, &mut ch)?;
            }
        }
        StoredMode::Trivial => unreachable!(),
    }
    let trace = ch.trace.finish();
    let bytes = SymbolStream::new(symbols, alphabet)?.to_bytes();
    finish_decode(&a, bytes, trace, start)
}

fn finish_decode(a: &Archive, bytes: Vec<u8>, trace: Option<u64>, start: Instant) -> Result<Decoded> {
    if checksum(&bytes) != a.header.checksum {
        return Err(Error::CorruptArchive("checksum mismatch".into()));
    }
    if trace != a.trace {
        return Err(Error::CorruptArchive("coding trace differs from the encoder's".into()));
    }
    Ok(Decoded {
        bytes,
        trace,
        decode_time: start.elapsed(),
    })
}

/// Size breakdown of an archive relative to its input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpcReport {
    pub total_bpc: f64,
    /// Share of the total taken by the model blob, in percent.
    pub model_share: f64,
}

impl BpcReport {
    pub fn from_bits(model_bits: u64, other_bits: u64, len: u64) -> Self {
        let total = model_bits + other_bits;
        Self {
            total_bpc: if len == 0 { 0.0 } else { total as f64 / len as f64 },
            model_share: if total == 0 {
                0.0
            } else {
                100.0 * model_bits as f64 / total as f64
            },
        }
    }
}

/// Bits per input byte of the whole serialized archive, and the model's share.
pub fn report_bpc(archive: &Archive, original_len: u64) -> BpcReport {
    let total_bits = archive.to_bytes().len() as u64 * 8;
    let model_bits = archive.model_blob.len() as u64 * 8;
    BpcReport::from_bits(model_bits, total_bits - model_bits, original_len)
}
