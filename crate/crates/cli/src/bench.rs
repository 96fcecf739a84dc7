//! Benchmark harness: bits per character and minutes per MB, per dataset and mode.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context};
use nzip_core::codec::{self, Mode, Trained};
use nzip_core::symbols::detect_alphabet;
use nzip_core::synth::{self, SyntheticSpec};
use serde::{Deserialize, Serialize};

use crate::{CodecArgs, RoundTripMismatch};

/// A benchmark input, generated or read from disk.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            bytes,
        }
    }

    /// `xor:K:N` and `hmm:K:N` generate with `seed`; anything else is a path.
    pub fn parse(arg: &str, seed: u64) -> anyhow::Result<Self> {
        let fields: Vec<&str> = arg.split(':').collect();
        if let [family @ ("xor" | "hmm"), k, n] = fields[..] {
            let k: usize = k.parse().with_context(|| format!("bad k in {arg}"))?;
            let n: usize = n.parse().with_context(|| format!("bad length in {arg}"))?;
            let spec = if family == "xor" {
                SyntheticSpec::xor(k, n, seed)
            } else {
                SyntheticSpec::hmm(k, n, seed)
            };
            let name = format!("{}-{k}", family.to_uppercase());
            return Ok(Self::new(name, synth::generate(&spec)?));
        }
        let path = PathBuf::from(arg);
        let bytes = std::fs::read(&path).with_context(|| format!("reading {arg}"))?;
        let name = path
            .file_name()
            .map_or_else(|| arg.to_string(), |f| f.to_string_lossy().into_owned());
        Ok(Self::new(name, bytes))
    }
}

/// One (dataset, mode) measurement. Times are minutes per 10^6 input bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub length: u64,
    pub alphabet: usize,
    pub mode: String,
    pub archive_bytes: u64,
    pub total_bpc: f64,
    pub model_share: f64,
    pub train_min_per_mb: f64,
    pub encode_min_per_mb: f64,
    pub decode_min_per_mb: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::BootstrapOnly => "bootstrap",
        Mode::Combined => "combined",
    }
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).round() / s
}

fn minutes_per_mb(t: Duration, len: usize) -> f64 {
    if len == 0 {
        return 0.0;
    }
    round_to(t.as_secs_f64() / 60.0 / (len as f64 / 1e6), 4)
}

fn trainable(bytes: &[u8], context: usize) -> bool {
    bytes.len() > context && detect_alphabet(bytes).is_ok_and(|a| a.size() >= 2)
}

/// Compresses every dataset in every mode and checks each round trip.
/// Training runs once per dataset and is shared by all modes.
pub fn run_bench(datasets: &[Dataset], modes: &[Mode], args: &CodecArgs, seed: u64) -> anyhow::Result<BenchReport> {
    let mut report = BenchReport::default();
    for ds in datasets {
        let Some(&first) = modes.first() else { break };
        let len = ds.bytes.len();
        let trained: Option<Trained> = if trainable(&ds.bytes, args.context) {
            Some(codec::train(&ds.bytes, &args.options(first, seed))?)
        } else {
            None
        };
        let alphabet = detect_alphabet(&ds.bytes).map_or(0, |a| a.size());
        for &mode in modes {
            let opts = args.options(mode, seed);
            let (archive, rep) = codec::compress_with_report(&ds.bytes, &opts, trained.as_ref(), |_| {})?;
            let raw = archive.to_bytes();
            let decoded = codec::decompress_detailed(&raw)?;
            if decoded.bytes != ds.bytes {
                return Err(RoundTripMismatch).with_context(|| format!("{} in {} mode", ds.name, mode_name(mode)));
            }
            let bpc = codec::report_bpc(&archive, len as u64);
            report.rows.push(BenchRow {
                dataset: ds.name.clone(),
                length: len as u64,
                alphabet,
                mode: mode_name(mode).into(),
                archive_bytes: raw.len() as u64,
                total_bpc: round_to(bpc.total_bpc, 4),
                model_share: round_to(bpc.model_share, 2),
                train_min_per_mb: minutes_per_mb(rep.train_time, len),
                encode_min_per_mb: minutes_per_mb(rep.encode_time, len),
                decode_min_per_mb: minutes_per_mb(decoded.decode_time, len),
            });
        }
    }
    Ok(report)
}

impl BenchReport {
    pub fn row(&self, dataset: &str, mode: Mode) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.mode == mode_name(mode))
    }

    /// Bootstrap-only minus combined bpc for every dataset measured in both modes.
    pub fn improvements(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for r in &self.rows {
            if out.iter().any(|(d, _)| *d == r.dataset) {
                continue;
            }
            if let (Some(b), Some(c)) = (
                self.row(&r.dataset, Mode::BootstrapOnly),
                self.row(&r.dataset, Mode::Combined),
            ) {
                out.push((r.dataset.clone(), round_to(b.total_bpc - c.total_bpc, 4)));
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        if self.rows.is_empty() {
            return s;
        }
        let _ = writeln!(
            s,
            "{:<16} {:>10} {:>4} {:<10} {:>8} {:>8} {:>10} {:>10} {:>10}",
            "dataset", "length", "V", "mode", "bpc", "model%", "train", "encode", "decode"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<16} {:>10} {:>4} {:<10} {:>8.4} {:>8.2} {:>10.4} {:>10.4} {:>10.4}",
                r.dataset,
                r.length,
                r.alphabet,
                r.mode,
                r.total_bpc,
                r.model_share,
                r.train_min_per_mb,
                r.encode_min_per_mb,
                r.decode_min_per_mb
            );
        }
        let imp = self.improvements();
        if !imp.is_empty() {
            let _ = writeln!(s, "\n{:<16} {:>12}", "dataset", "improvement");
            for (d, x) in imp {
                let _ = writeln!(s, "{d:<16} {x:>12.4}");
            }
        }
        s
    }

    /// One JSON object per row, newline-terminated.
    pub fn to_jsonl(&self) -> anyhow::Result<String> {
        let mut s = String::new();
        for r in &self.rows {
            s.push_str(&serde_json::to_string(r)?);
            s.push('\n');
        }
        Ok(s)
    }

    pub fn from_jsonl(text: &str) -> anyhow::Result<Self> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<BenchRow>, _>>()?;
        if rows.iter().any(|r| r.total_bpc < 0.0) {
            bail!("negative bpc in report");
        }
        Ok(Self { rows })
    }
}
