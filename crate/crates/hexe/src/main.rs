//! Command-line frontend. Machine-readable output goes to stdout,
//! diagnostics to stderr. Exit codes: 0 success, 1 usage, 2 file errors,
//! 3 parse or validation errors, 4 network errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use thiserror::Error;

use hexe::ipfs::{self, IpfsConfig, IpfsError};
use hexe::keygen::{KeyMaterial, KeyMode};
use hexe::metrics;
use hexe::puzzle::Puzzle;
use hexe::wavcodec::WavFile;
use hexe::{bench, cipher, fixtures};

#[derive(Parser)]
#[command(
    name = "hexe",
    version,
    about = "Sudoku-keyed XOR encryption for WAV audio",
    after_help = "Exit codes: 0 success, 1 usage, 2 file error, 3 parse/validation error, 4 network error.\n\
                  Pinning credentials come from HEXE_IPFS_KEY / HEXE_IPFS_SECRET (or a config file\n\
                  named by HEXE_IPFS_CONFIG), never from flags."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print progress diagnostics to stderr
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key file (timestamp + mode + puzzle)
    Keygen(KeygenArgs),
    /// Encrypt a WAV file; writes the ciphertext and a key file
    Encrypt(EncryptArgs),
    /// Decrypt a WAV file (or ipfs://<cid>) with a key file
    Decrypt(DecryptArgs),
    /// Compare two WAV files and report SNR/LLR
    Analyze(AnalyzeArgs),
    /// Time encrypt/decrypt across file sizes and levels, as CSV
    Bench(BenchArgs),
    /// Pin a file to the configured IPFS pinning service
    Pin(PinArgs),
    /// Fetch a cid from the configured IPFS gateway into a file
    Fetch(FetchArgs),
}

fn parse_level(s: &str) -> Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("level must be a number, got {s:?}"))?;
    if hexe::puzzle::SUPPORTED_SIZES.contains(&v) {
        Ok(v)
    } else {
        Err(format!("security level must be 9, 16, or 25 (got {v})"))
    }
}

#[derive(Args)]
struct KeygenArgs {
    /// Security level: the puzzle size N
    #[arg(long, default_value = "9", value_parser = parse_level)]
    level: usize,
    /// Seed for reproducible puzzles (tests; omit for a random key)
    #[arg(long)]
    seed: Option<u64>,
    /// Fix the key timestamp instead of using the current time
    #[arg(long)]
    timestamp: Option<u64>,
    /// Build an IPFS-mode keystream
    #[arg(long)]
    ipfs: bool,
    /// Where to write the key file
    #[arg(short, long, default_value = "key.hexekey")]
    output: PathBuf,
    /// Also export the public puzzle grid to this path
    #[arg(long)]
    puzzle_out: Option<PathBuf>,
}

#[derive(Args)]
struct EncryptArgs {
    /// WAV file to encrypt
    input: PathBuf,
    /// Output path (default: <input>.enc.wav)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Security level for a freshly generated key
    #[arg(long, default_value = "9", value_parser = parse_level)]
    level: usize,
    /// Seed for reproducible key generation (tests)
    #[arg(long)]
    seed: Option<u64>,
    /// Reuse an existing key file instead of generating one
    #[arg(long)]
    key: Option<PathBuf>,
    /// Where to write the generated key (default: output with .hexekey)
    #[arg(long)]
    key_out: Option<PathBuf>,
    /// IPFS mode: ipfs keystream, and pin the ciphertext after writing
    #[arg(long)]
    ipfs: bool,
    /// Cipher the raw file bytes from this offset instead of the data chunk
    #[arg(long)]
    raw_offset: Option<usize>,
    /// Pinning API base URL override (credentials stay in the environment)
    #[arg(long)]
    api: Option<String>,
    /// Gateway base URL override
    #[arg(long)]
    gateway: Option<String>,
}

#[derive(Args)]
struct DecryptArgs {
    /// WAV file to decrypt, or ipfs://<cid>
    input: String,
    /// Output path (default: <input>.dec.wav)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Key file written during encryption
    #[arg(long)]
    key: Option<PathBuf>,
    /// Public puzzle grid (requires --timestamp)
    #[arg(long)]
    puzzle: Option<PathBuf>,
    /// Key timestamp (with --puzzle)
    #[arg(long)]
    timestamp: Option<u64>,
    /// With --puzzle: assume an IPFS-mode keystream
    #[arg(long)]
    ipfs: bool,
    /// Cipher the raw file bytes from this offset instead of the data chunk
    #[arg(long)]
    raw_offset: Option<usize>,
    /// Pinning API base URL override
    #[arg(long)]
    api: Option<String>,
    /// Gateway base URL override
    #[arg(long)]
    gateway: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Reference WAV (the original)
    reference: PathBuf,
    /// Processed WAV (encrypted or decrypted)
    processed: PathBuf,
    /// Security level to record in the report
    #[arg(long, value_parser = parse_level)]
    level: Option<usize>,
    /// Append the report as a CSV row to this file
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of WAV fixtures; omitted, a standard set (1 KB, 2 KB,
    /// 24.5 MB, 35.2 MB) is synthesized in memory
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Comma-separated security levels
    #[arg(long, default_value = "9,16,25")]
    levels: String,
    /// Timed repetitions per measurement (median reported, min 5)
    #[arg(long, default_value_t = bench::MIN_RUNS)]
    runs: usize,
    /// Puzzle seed, for reproducible keys
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the CSV here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PinArgs {
    /// File to pin
    input: PathBuf,
    /// Pinning API base URL override
    #[arg(long)]
    api: Option<String>,
    /// Gateway base URL override (for the printed URL)
    #[arg(long)]
    gateway: Option<String>,
}

#[derive(Args)]
struct FetchArgs {
    /// Content identifier, with or without the ipfs:// prefix
    cid: String,
    /// Output path (default: the cid as a file name)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Gateway base URL override
    #[arg(long)]
    gateway: Option<String>,
}

#[derive(Debug, Error)]
enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Network(#[from] IpfsError),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::File { .. } => 2,
            AppError::Data(_) => 3,
            // Reading the local file behind a pin is a file error, not a
            // service problem.
            AppError::Network(IpfsError::Io(_)) => 2,
            AppError::Network(_) => 4,
        }
    }
}

macro_rules! data_error {
    ($($ty:ty),+) => {$(
        impl From<$ty> for AppError {
            fn from(e: $ty) -> Self {
                AppError::Data(e.to_string())
            }
        }
    )+};
}
data_error!(
    hexe::PuzzleError,
    hexe::KeyError,
    hexe::WavError,
    hexe::CipherError,
    hexe::metrics::MetricError,
    bench::BenchError
);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let verbose = cli.verbose;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if verbose > 0 {
                eprintln!("exit code: {}", e.code());
            }
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Keygen(args) => cmd_keygen(args),
        Command::Encrypt(args) => cmd_encrypt(args, cli.verbose),
        Command::Decrypt(args) => cmd_decrypt(args, cli.verbose),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Bench(args) => cmd_bench(args, cli.verbose),
        Command::Pin(args) => cmd_pin(args),
        Command::Fetch(args) => cmd_fetch(args),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, AppError> {
    std::fs::read(path).map_err(|source| AppError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(|source| AppError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    std::fs::write(path, bytes).map_err(|source| AppError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn service_config(api: &Option<String>, gateway: &Option<String>) -> Result<IpfsConfig, AppError> {
    let mut cfg = IpfsConfig::from_env().map_err(|e| match e {
        IpfsError::Io(source) => AppError::File {
            path: std::env::var(ipfs::ENV_CONFIG).unwrap_or_default().into(),
            source,
        },
        other => AppError::Network(other),
    })?;
    if let Some(api) = api {
        cfg.api_base_url = api.clone();
    }
    if let Some(gateway) = gateway {
        cfg.gateway_base_url = gateway.clone();
    }
    Ok(cfg)
}

/// Swaps the final extension for a compound one, `in.wav` -> `in.enc.wav`.
fn derived_path(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().unwrap_or_default().to_string_lossy();
    input.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_keygen(args: KeygenArgs) -> Result<(), AppError> {
    let mode = if args.ipfs {
        KeyMode::Ipfs
    } else {
        KeyMode::Plain
    };
    let mut key = KeyMaterial::generate(args.level, args.seed, mode)?;
    if let Some(ts) = args.timestamp {
        key.timestamp = ts;
    }
    write_file(&args.output, key.to_text().as_bytes())?;
    if let Some(puzzle_out) = &args.puzzle_out {
        write_file(puzzle_out, key.puzzle.to_text().as_bytes())?;
        println!("PUZZLE: {}", puzzle_out.display());
    }
    println!("TIMESTAMP: {}", key.timestamp);
    println!("LEVEL: {}", key.puzzle.size());
    println!("MODE: {}", key.mode);
    println!("KEY: {}", args.output.display());
    Ok(())
}

fn cmd_encrypt(args: EncryptArgs, verbose: u8) -> Result<(), AppError> {
    let input_bytes = read_file(&args.input)?;
    let (key, reused_key_path) = match &args.key {
        Some(path) => (
            KeyMaterial::from_text(&read_text(path)?)?,
            Some(path.clone()),
        ),
        None => {
            let mode = if args.ipfs {
                KeyMode::Ipfs
            } else {
                KeyMode::Plain
            };
            (KeyMaterial::generate(args.level, args.seed, mode)?, None)
        }
    };
    if args.ipfs && key.mode != KeyMode::Ipfs {
        eprintln!("note: reused key is plain-mode; pinning the ciphertext anyway");
    }

    let output = args
        .output
        .clone()
        .unwrap_or_else(|| derived_path(&args.input, ".enc.wav"));
    let ciphertext = match args.raw_offset {
        Some(offset) => cipher::xor_at_offset(&input_bytes, offset, &key)?,
        None => {
            let wav = WavFile::parse(&input_bytes)?;
            cipher::encrypt(&wav, &key)?.to_bytes()
        }
    };
    write_file(&output, &ciphertext)?;

    let key_path = match (&reused_key_path, &args.key_out) {
        (_, Some(out)) => {
            write_file(out, key.to_text().as_bytes())?;
            out.clone()
        }
        (Some(existing), None) => existing.clone(),
        (None, None) => {
            let out = output.with_extension("hexekey");
            write_file(&out, key.to_text().as_bytes())?;
            out
        }
    };

    println!("TIMESTAMP: {}", key.timestamp);
    println!("LEVEL: {}", key.puzzle.size());
    println!("MODE: {}", key.mode);
    println!("KEY: {}", key_path.display());
    println!("OUTPUT: {}", output.display());

    if args.ipfs {
        let cfg = service_config(&args.api, &args.gateway)?;
        if verbose > 0 {
            eprintln!("pinning {} via {:?}", output.display(), cfg);
        }
        let receipt = ipfs::pin_file(&cfg, &output)?;
        println!("CID: {}", receipt.cid);
        println!("URL: {}", receipt.gateway_url);
    }
    Ok(())
}

fn load_decrypt_key(args: &DecryptArgs) -> Result<KeyMaterial, AppError> {
    if let Some(path) = &args.key {
        return Ok(KeyMaterial::from_text(&read_text(path)?)?);
    }
    match (&args.puzzle, args.timestamp) {
        (Some(puzzle_path), Some(timestamp)) => Ok(KeyMaterial {
            puzzle: Puzzle::from_text(&read_text(puzzle_path)?)?,
            timestamp,
            mode: if args.ipfs {
                KeyMode::Ipfs
            } else {
                KeyMode::Plain
            },
        }),
        _ => Err(AppError::Usage(
            "decrypt needs --key <file>, or --puzzle <file> together with --timestamp <secs>"
                .into(),
        )),
    }
}

fn cmd_decrypt(args: DecryptArgs, verbose: u8) -> Result<(), AppError> {
    let key = load_decrypt_key(&args)?;

    let (input_bytes, default_output) = match ipfs::parse_ipfs_url(&args.input) {
        Some(cid) => {
            let cfg = service_config(&args.api, &args.gateway)?;
            if verbose > 0 {
                eprintln!("fetching {cid} via {:?}", cfg);
            }
            (ipfs::fetch_cid(&cfg, cid)?, PathBuf::from("decrypted.wav"))
        }
        None => {
            let path = PathBuf::from(&args.input);
            (read_file(&path)?, derived_path(&path, ".dec.wav"))
        }
    };

    let plaintext = match args.raw_offset {
        Some(offset) => cipher::xor_at_offset(&input_bytes, offset, &key)?,
        None => {
            let wav = WavFile::parse(&input_bytes)?;
            cipher::decrypt(&wav, &key)?.to_bytes()
        }
    };
    let output = args.output.clone().unwrap_or(default_output);
    write_file(&output, &plaintext)?;
    eprintln!("note: decryption is unauthenticated; wrong key material yields noise, not an error");
    println!("OUTPUT: {}", output.display());
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), AppError> {
    let reference_bytes = read_file(&args.reference)?;
    let processed_bytes = read_file(&args.processed)?;
    let reference = WavFile::parse(&reference_bytes)?.decode_samples()?;
    let processed = WavFile::parse(&processed_bytes)?.decode_samples()?;
    let name = args
        .processed
        .file_name()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned();
    let report = metrics::analyze(
        &reference,
        &processed,
        &name,
        processed_bytes.len() as u64,
        args.level,
    )?;
    println!("{}", report.to_json_line());

    if let Some(csv_path) = &args.csv {
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(csv_path)
            .map_err(|source| AppError::File {
                path: csv_path.clone(),
                source,
            })?;
        let fresh = file.metadata().map(|m| m.len() == 0).unwrap_or(true);
        let mut row = String::new();
        if fresh {
            row.push_str(metrics::QualityReport::csv_header());
            row.push('\n');
        }
        row.push_str(&report.to_csv_row());
        row.push('\n');
        file.write_all(row.as_bytes())
            .map_err(|source| AppError::File {
                path: csv_path.clone(),
                source,
            })?;
    }
    Ok(())
}

fn parse_levels(text: &str) -> Result<Vec<usize>, AppError> {
    let mut levels = Vec::new();
    for part in text.split(',') {
        let level = parse_level(part.trim()).map_err(AppError::Usage)?;
        levels.push(level);
    }
    if levels.is_empty() {
        return Err(AppError::Usage("no levels given".into()));
    }
    Ok(levels)
}

fn cmd_bench(args: BenchArgs, verbose: u8) -> Result<(), AppError> {
    let levels = parse_levels(&args.levels)?;

    let files: Vec<(String, Vec<u8>)> = match &args.dir {
        Some(dir) => {
            let mut files = Vec::new();
            let entries = std::fs::read_dir(dir).map_err(|source| AppError::File {
                path: dir.clone(),
                source,
            })?;
            for entry in entries {
                let entry = entry.map_err(|source| AppError::File {
                    path: dir.clone(),
                    source,
                })?;
                let path = entry.path();
                if path.extension().is_some_and(|e| e == "wav") {
                    let name = path.file_name().unwrap().to_string_lossy().into_owned();
                    files.push((name, read_file(&path)?));
                }
            }
            if files.is_empty() {
                return Err(AppError::Usage(format!(
                    "no .wav fixtures found in {}",
                    dir.display()
                )));
            }
            files.sort_by_key(|(_, bytes)| bytes.len());
            files
        }
        None => {
            if verbose > 0 {
                eprintln!("synthesizing standard fixtures (1 KB .. 35.2 MB)");
            }
            fixtures::BENCH_SIZES
                .iter()
                .map(|&(name, size)| (name.to_string(), fixtures::speech_wav(size, 44_100, 7)))
                .collect()
        }
    };

    let mut out = String::new();
    out.push_str(bench::csv_header());
    out.push('\n');
    for (name, bytes) in &files {
        for &level in &levels {
            if verbose > 0 {
                eprintln!("timing {name} at level {level} ({} bytes)", bytes.len());
            }
            let row = bench::bench_file(name, bytes, level, args.runs, args.seed)?;
            out.push_str(&bench::to_csv_row(&row));
            out.push('\n');
        }
    }

    match &args.output {
        Some(path) => write_file(path, out.as_bytes())?,
        None => print!("{out}"),
    }
    Ok(())
}

fn cmd_pin(args: PinArgs) -> Result<(), AppError> {
    let cfg = service_config(&args.api, &args.gateway)?;
    let receipt = ipfs::pin_file(&cfg, &args.input)?;
    println!("CID: {}", receipt.cid);
    println!("SIZE: {}", receipt.size);
    println!("URL: {}", receipt.gateway_url);
    Ok(())
}

fn cmd_fetch(args: FetchArgs) -> Result<(), AppError> {
    let cid = ipfs::parse_ipfs_url(&args.cid).unwrap_or(&args.cid);
    if cid.is_empty() {
        return Err(AppError::Usage("empty cid".into()));
    }
    let cfg = service_config(&None, &args.gateway)?;
    let bytes = ipfs::fetch_cid(&cfg, cid)?;
    let output = args.output.clone().unwrap_or_else(|| PathBuf::from(cid));
    write_file(&output, &bytes)?;
    println!("OUTPUT: {}", output.display());
    println!("SIZE: {}", bytes.len());
    Ok(())
}
