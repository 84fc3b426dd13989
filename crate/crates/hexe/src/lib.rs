//! Sudoku-keyed XOR encryption for WAV audio.
//!
//! A solved N x N Sudoku grid (N = 9, 16, or 25) and a UNIX timestamp
//! together derive a short repeating keystream: the timestamp's digit sum
//! picks one box of the grid and a multiplier, the scaled box values are
//! bit-packed, and the resulting bytes are XORed over the WAV `data`
//! payload. Headers stay intact, so ciphertext is still a structurally
//! valid WAV file. Decryption is the same XOR with the same key material.
//!
//! The crate also ships an audio-quality suite (SNR and LPC-based LLR),
//! a benchmark harness, a client for Pinata-shaped IPFS pinning services
//! with a bundled mock server for offline tests, and deterministic
//! speech-like fixtures.
//!
//! Start with the `examples/` directory; each file demonstrates one
//! capability end to end. A minimal roundtrip:
//!
//! ```
//! use hexe::{cipher, fixtures, KeyMaterial, KeyMode, WavFile};
//!
//! let original = fixtures::speech_wav(2_048, 8_000, 7);
//! let wav = WavFile::parse(&original)?;
//! let key = KeyMaterial::generate(9, None, KeyMode::Plain)?;
//! let encrypted = cipher::encrypt(&wav, &key)?;
//! let decrypted = cipher::decrypt(&encrypted, &key)?;
//! assert_eq!(decrypted.to_bytes(), original);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! # Security
//!
//! The keystream is at most 32 bytes and repeats for the whole payload.
//! That is a classical repeating-key XOR, breakable with pencil and
//! paper; statistical structure of the plaintext leaks straight through.
//! Treat this as format-preserving obfuscation for experiments, never as
//! protection for data that matters, and keep `.hexekey` files local:
//! whoever holds the puzzle, timestamp, and mode can decrypt.

pub mod bench;
pub mod cipher;
pub mod fixtures;
pub mod ipfs;
pub mod keygen;
pub mod metrics;
pub mod puzzle;
mod rng;
pub mod wavcodec;

pub use cipher::CipherError;
pub use keygen::{
    build_keystream, derive_params, KeyError, KeyMaterial, KeyMode, KeyParams, Keystream,
};
pub use metrics::QualityReport;
pub use puzzle::{Puzzle, PuzzleError};
pub use wavcodec::{AudioSamples, WavError, WavFile};
