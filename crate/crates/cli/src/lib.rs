//! Command-line front end for the nzip compressor.

pub mod bench;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nzip_core::codec::{self, CompressOptions, Mode, ModeConfig};
use nzip_core::models::Profile;
use nzip_core::synth::{self, SyntheticSpec};
use nzip_core::trainer::TrainPlan;

pub use bench::{run_bench, BenchReport, BenchRow, Dataset};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_CORRUPT: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "nzip",
    version,
    about = "Lossless compression with a trained recurrent predictor"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a file into an archive.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Combined)]
        mode: ModeArg,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long)]
        seed: u64,
    },
    /// Restore the original file from an archive.
    Decompress { input: PathBuf, output: PathBuf },
    /// Compress and decompress in memory and compare with the input.
    Verify {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Combined)]
        mode: ModeArg,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a synthetic binary sequence.
    Gen {
        #[arg(value_enum)]
        family: FamilyArg,
        output: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Flip probability of the HMM observation noise.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Compress datasets in several modes and report bits per character.
    ///
    /// A dataset is `xor:K:N`, `hmm:K:N` or a file path.
    Bench {
        datasets: Vec<String>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeArg::Bootstrap, ModeArg::Combined])]
        modes: Vec<ModeArg>,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write one JSON object per row to this file.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Combined,
    Bootstrap,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Combined => Mode::Combined,
            ModeArg::Bootstrap => Mode::BootstrapOnly,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Xor,
    Hmm,
}

/// Model and coding settings shared by every command that compresses.
#[derive(Clone, Debug, Args)]
pub struct CodecArgs {
    #[arg(long, default_value_t = TrainPlan::default().epochs)]
    pub epochs: u32,
    #[arg(long, default_value_t = TrainPlan::default().batch_size)]
    pub batch_size: usize,
    /// Number of preceding symbols the predictor sees.
    #[arg(long, default_value_t = nzip_core::symbols::DEFAULT_CONTEXT)]
    pub context: usize,
    /// Number of parts coded in lockstep (default depends on the mode).
    #[arg(long)]
    pub parts: Option<usize>,
    /// Coded steps between adaptive updates in combined mode.
    #[arg(long, default_value_t = ModeConfig::combined().update_interval)]
    pub update_interval: usize,
    /// Use the reduced-width model profile.
    #[arg(long)]
    pub scaled_profile: bool,
    /// Store a hash of every coding distribution for symmetry checks.
    #[arg(long)]
    pub trace_hash: bool,
}

impl CodecArgs {
    pub fn options(&self, mode: Mode, seed: u64) -> CompressOptions {
        let mut opts = CompressOptions::new(mode, seed);
        opts.plan.epochs = self.epochs;
        opts.plan.batch_size = self.batch_size;
        opts.context = self.context;
        if let Some(parts) = self.parts {
            opts.mode.parts = parts;
        }
        opts.mode.update_interval = self.update_interval;
        if self.scaled_profile {
            opts.profile = Profile::Scaled;
        }
        opts.trace = self.trace_hash;
        opts
    }
}

/// The archive did not decode back to its input.
#[derive(Debug)]
pub struct RoundTripMismatch;

impl std::fmt::Display for RoundTripMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("decompressed output differs from the input")
    }
}

impl std::error::Error for RoundTripMismatch {}

/// Maps an error chain to the process exit status.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use nzip_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::CorruptArchive(_) | E::UnsupportedVersion(_) | E::AlphabetMismatch(_) => EXIT_CORRUPT,
                E::Numeric(_) => EXIT_NUMERIC,
                E::InvalidConfig(_) => EXIT_USAGE,
                _ => EXIT_NUMERIC,
            };
        }
        if cause.is::<RoundTripMismatch>() {
            return EXIT_CORRUPT;
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_USAGE
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Executes one command, writing human-readable results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Compress {
            input,
            output,
            mode,
            codec,
            seed,
        } => {
            let bytes = read(&input)?;
            let archive = codec::compress(&bytes, &codec.options(mode.into(), seed))?;
            let raw = archive.to_bytes();
            write(&output, &raw)?;
            let r = codec::report_bpc(&archive, bytes.len() as u64);
            writeln!(
                out,
                "{}: {} -> {} bytes, {:.4} bpc, model {:.2}%",
                input.display(),
                bytes.len(),
                raw.len(),
                r.total_bpc,
                r.model_share
            )?;
        }
        Command::Decompress { input, output } => {
            let raw = read(&input)?;
            let bytes = codec::decompress(&raw)?;
            write(&output, &bytes)?;
            writeln!(out, "{}: {} bytes", output.display(), bytes.len())?;
        }
        Command::Verify {
            input,
            mode,
            codec,
            seed,
        } => {
            let bytes = read(&input)?;
            let archive = codec::compress(&bytes, &codec.options(mode.into(), seed))?;
            let decoded = codec::decompress(&archive.to_bytes())?;
            if decoded != bytes {
                return Err(RoundTripMismatch.into());
            }
            let r = codec::report_bpc(&archive, bytes.len() as u64);
            writeln!(out, "{}: ok, {:.4} bpc", input.display(), r.total_bpc)?;
        }
        Command::Gen {
            family,
            output,
            k,
            n,
            seed,
            noise,
        } => {
            let mut spec = match family {
                FamilyArg::Xor => SyntheticSpec::xor(k, n, seed),
                FamilyArg::Hmm => SyntheticSpec::hmm(k, n, seed),
            };
            if let Some(p) = noise {
                if family == FamilyArg::Xor {
                    bail!(nzip_core::Error::InvalidConfig("--noise applies to hmm only".into()));
                }
                spec.noise_p = p;
            }
            let bytes = synth::generate(&spec)?;
            write(&output, &bytes)?;
            writeln!(
                out,
                "{}: {} symbols, entropy rate {:.5} bits/symbol",
                output.display(),
                bytes.len(),
                synth::entropy_rate(&spec)
            )?;
        }
        Command::Bench {
            datasets,
            modes,
            codec,
            seed,
            jsonl,
        } => {
            let datasets = datasets
                .iter()
                .map(|d| Dataset::parse(d, seed))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let modes: Vec<Mode> = modes.into_iter().map(Mode::from).collect();
            let report = run_bench(&datasets, &modes, &codec, seed)?;
            write!(out, "{}", report.to_table())?;
            if let Some(path) = jsonl {
                write(&path, report.to_jsonl()?.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("nzip: {e:#}");
            exit_code(&e)
        }
    }
}
