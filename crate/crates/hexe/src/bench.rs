//! Benchmark harness: median encrypt/decrypt wall time per file size and
//! security level, emitted as CSV. I/O is excluded; only the cipher path
//! (validation, keystream, XOR, chunk rebuild) is timed.

use thiserror::Error;

use crate::cipher;
use crate::keygen::{KeyMaterial, KeyMode};
use crate::metrics::time_run;
use crate::puzzle::{Puzzle, PuzzleError};
use crate::wavcodec::{WavError, WavFile};

/// Fewest timed repetitions per measurement.
pub const MIN_RUNS: usize = 5;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Wav(#[from] WavError),
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
    #[error("cipher failed during benchmark: {0}")]
    Cipher(#[from] cipher::CipherError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub file: String,
    pub size_bytes: u64,
    pub level: usize,
    pub encrypt_ms: f64,
    pub decrypt_ms: f64,
}

pub fn csv_header() -> &'static str {
    "file,sizeBytes,level,encryptMs,decryptMs"
}

pub fn to_csv_row(row: &BenchRow) -> String {
    format!(
        "{},{},{},{:.3},{:.3}",
        row.file, row.size_bytes, row.level, row.encrypt_ms, row.decrypt_ms
    )
}

/// Times one file at one level. `runs` is clamped up to [`MIN_RUNS`].
pub fn bench_file(
    name: &str,
    bytes: &[u8],
    level: usize,
    runs: usize,
    seed: u64,
) -> Result<BenchRow, BenchError> {
    let runs = runs.max(MIN_RUNS);
    let wav = WavFile::parse(bytes)?;
    let key = KeyMaterial {
        puzzle: Puzzle::generate(level, Some(seed))?,
        timestamp: crate::keygen::unix_now(),
        mode: KeyMode::Plain,
    };
    let (encrypt_ms, encrypted) = time_run(runs, || cipher::encrypt(&wav, &key));
    let encrypted = encrypted?;
    let (decrypt_ms, decrypted) = time_run(runs, || cipher::decrypt(&encrypted, &key));
    decrypted?;
    Ok(BenchRow {
        file: name.to_string(),
        size_bytes: bytes.len() as u64,
        level,
        encrypt_ms,
        decrypt_ms,
    })
}

/// The full matrix: every file at every level, in the given order.
pub fn bench_matrix(
    files: &[(String, Vec<u8>)],
    levels: &[usize],
    runs: usize,
    seed: u64,
) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::with_capacity(files.len() * levels.len());
    for (name, bytes) in files {
        for &level in levels {
            rows.push(bench_file(name, bytes, level, runs, seed)?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn bench_row_has_positive_times() {
        let bytes = fixtures::speech_wav(2_048, 8_000, 1);
        let row = bench_file("x.wav", &bytes, 9, 5, 42).unwrap();
        assert!(row.encrypt_ms >= 0.0);
        assert!(row.decrypt_ms >= 0.0);
        assert_eq!(row.size_bytes, 2_048);
        assert_eq!(
            to_csv_row(&row).split(',').count(),
            csv_header().split(',').count()
        );
    }

    #[test]
    fn matrix_covers_files_times_levels() {
        let files = vec![
            ("a.wav".to_string(), fixtures::speech_wav(1_024, 8_000, 1)),
            ("b.wav".to_string(), fixtures::speech_wav(2_048, 8_000, 2)),
        ];
        let rows = bench_matrix(&files, &[9, 16], 5, 7).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].file, "a.wav");
        assert_eq!(rows[0].level, 9);
        assert_eq!(rows[3].file, "b.wav");
        assert_eq!(rows[3].level, 16);
    }
}
