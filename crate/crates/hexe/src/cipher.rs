//! Repeating-key XOR over the WAV `data` payload. Encryption and
//! decryption are the same transform, so both paths share one body.
//!
//! This construction has a keystream of at most 32 bytes and offers no
//! meaningful confidentiality against analysis; treat it as an obfuscation
//! layer, not as cryptography.

use thiserror::Error;

use crate::keygen::KeyMaterial;
use crate::wavcodec::WavFile;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CipherError {
    #[error("keystream is empty")]
    EmptyKeystream,
    #[error("puzzle failed validation")]
    InvalidPuzzle,
    #[error("raw offset {offset} is beyond the file length {len}")]
    RawOffsetOutOfRange { offset: usize, len: usize },
}

/// XORs `payload` against the repeating `key`, starting at key index 0.
pub fn xor_apply(payload: &[u8], key: &[u8]) -> Result<Vec<u8>, CipherError> {
    let mut out = payload.to_vec();
    xor_in_place(&mut out, key)?;
    Ok(out)
}

/// In-place variant of [`xor_apply`].
pub fn xor_in_place(buf: &mut [u8], key: &[u8]) -> Result<(), CipherError> {
    if key.is_empty() {
        return Err(CipherError::EmptyKeystream);
    }
    // Chunking by the key length keeps the key phase aligned per block:
    // byte i is XORed with key[i % key.len()].
    for block in buf.chunks_mut(key.len()) {
        for (b, k) in block.iter_mut().zip(key) {
            *b ^= k;
        }
    }
    Ok(())
}

/// Chunk-aware transform: only the `data` payload changes, every header
/// and metadata byte is preserved.
pub fn encrypt(wav: &WavFile, key: &KeyMaterial) -> Result<WavFile, CipherError> {
    if !key.puzzle.is_valid() {
        return Err(CipherError::InvalidPuzzle);
    }
    let ks = key.keystream();
    let mut out = wav.clone();
    xor_in_place(out.data_mut(), ks.bytes())?;
    Ok(out)
}

/// Inverse of [`encrypt`]. XOR is an involution, so this is the same
/// transform with the same keystream.
pub fn decrypt(wav: &WavFile, key: &KeyMaterial) -> Result<WavFile, CipherError> {
    encrypt(wav, key)
}

/// Compatibility path for tools that cipher the raw file from a fixed
/// byte offset (44 covers a canonical header). Bytes before `offset` pass
/// through untouched; the key phase starts at `offset`.
pub fn xor_at_offset(
    file: &[u8],
    offset: usize,
    key: &KeyMaterial,
) -> Result<Vec<u8>, CipherError> {
    if !key.puzzle.is_valid() {
        return Err(CipherError::InvalidPuzzle);
    }
    if offset > file.len() {
        return Err(CipherError::RawOffsetOutOfRange {
            offset,
            len: file.len(),
        });
    }
    let ks = key.keystream();
    let mut out = file.to_vec();
    xor_in_place(&mut out[offset..], ks.bytes())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::fixtures;
    use crate::keygen::{build_keystream, KeyMode};
    use crate::puzzle::Puzzle;

    fn key(size: usize, seed: u64, timestamp: u64, mode: KeyMode) -> KeyMaterial {
        KeyMaterial {
            puzzle: Puzzle::generate(size, Some(seed)).unwrap(),
            timestamp,
            mode,
        }
    }

    #[test]
    fn xor_is_an_involution() {
        let payload: Vec<u8> = (0..=255).cycle().take(1000).collect();
        let key = [0x5A, 0x13, 0xF0];
        let once = xor_apply(&payload, &key).unwrap();
        assert_ne!(once, payload);
        assert_eq!(xor_apply(&once, &key).unwrap(), payload);
    }

    #[test]
    fn zero_payload_reveals_cycled_key() {
        let key = [1u8, 2, 3];
        let out = xor_apply(&[0u8; 7], &key).unwrap();
        assert_eq!(out, [1, 2, 3, 1, 2, 3, 1]);
    }

    #[test]
    fn empty_key_is_rejected() {
        assert_eq!(xor_apply(&[1, 2, 3], &[]), Err(CipherError::EmptyKeystream));
    }

    #[test]
    fn roundtrip_restores_the_exact_file() {
        for size in crate::puzzle::SUPPORTED_SIZES {
            let original = fixtures::speech_wav(2_048, 8_000, 9);
            let wav = WavFile::parse(&original).unwrap();
            let key = key(size, 1, 1_673_980_625, KeyMode::Plain);
            let enc = encrypt(&wav, &key).unwrap();
            assert_ne!(enc.to_bytes(), original);
            let dec = decrypt(&enc, &key).unwrap();
            assert_eq!(dec.to_bytes(), original, "size {size}");
        }
    }

    #[test]
    fn headers_survive_encryption() {
        let original = fixtures::list_chunk_wav(4);
        let wav = WavFile::parse(&original).unwrap();
        let key = key(9, 2, 1_673_980_625, KeyMode::Plain);
        let enc = encrypt(&wav, &key).unwrap().to_bytes();
        assert_eq!(enc.len(), original.len());
        let start = wav.data_offset();
        let end = start + wav.data().len();
        assert_eq!(&enc[..start], &original[..start]);
        assert_eq!(&enc[end..], &original[end..]);
        assert_ne!(&enc[start..end], &original[start..end]);
    }

    #[test]
    fn ciphertext_matches_manual_xor_of_payload() {
        let original = fixtures::speech_wav(1_024, 8_000, 5);
        let wav = WavFile::parse(&original).unwrap();
        let key = key(9, 3, 1_700_000_000, KeyMode::Plain);
        let ks = build_keystream(&key.puzzle, key.timestamp, key.mode);
        let enc = encrypt(&wav, &key).unwrap();
        let expected: Vec<u8> = wav
            .data()
            .iter()
            .enumerate()
            .map(|(i, &b)| b ^ ks.bytes()[i % ks.len()])
            .collect();
        assert_eq!(enc.data(), expected);
    }

    #[test]
    fn wrong_timestamp_fails_to_decrypt() {
        let original = fixtures::speech_wav(1_024, 8_000, 6);
        let wav = WavFile::parse(&original).unwrap();
        let good = key(9, 4, 1_673_980_625, KeyMode::Plain);
        let bad = KeyMaterial {
            timestamp: good.timestamp + 1,
            ..good.clone()
        };
        let enc = encrypt(&wav, &good).unwrap();
        let dec = decrypt(&enc, &bad).unwrap();
        assert_ne!(dec.to_bytes(), original);
    }

    #[test]
    fn mode_mismatch_fails_to_decrypt() {
        let original = fixtures::speech_wav(1_024, 8_000, 6);
        let wav = WavFile::parse(&original).unwrap();
        let plain = key(9, 4, 1_673_980_625, KeyMode::Plain);
        let ipfs = KeyMaterial {
            mode: KeyMode::Ipfs,
            ..plain.clone()
        };
        let enc = encrypt(&wav, &plain).unwrap();
        assert_ne!(decrypt(&enc, &ipfs).unwrap().to_bytes(), original);
    }

    #[test]
    fn raw_offset_roundtrip_preserves_prefix() {
        let original = fixtures::speech_wav(1_024, 8_000, 8);
        let key = key(9, 5, 1_673_980_625, KeyMode::Plain);
        let enc = xor_at_offset(&original, 44, &key).unwrap();
        assert_eq!(&enc[..44], &original[..44]);
        assert_ne!(&enc[44..], &original[44..]);
        assert_eq!(xor_at_offset(&enc, 44, &key).unwrap(), original);
    }

    #[test]
    fn raw_offset_beyond_end_is_rejected() {
        let key = key(9, 5, 1, KeyMode::Plain);
        assert_eq!(
            xor_at_offset(&[0u8; 10], 11, &key),
            Err(CipherError::RawOffsetOutOfRange {
                offset: 11,
                len: 10
            })
        );
    }

    proptest! {
        #[test]
        fn involution_on_any_payload(
            payload in prop::collection::vec(any::<u8>(), 0..2000),
            seed in any::<u64>(),
            ts in any::<u64>(),
        ) {
            let puzzle = Puzzle::generate(9, Some(seed)).unwrap();
            let ks = build_keystream(&puzzle, ts, KeyMode::Plain);
            let once = xor_apply(&payload, ks.bytes()).unwrap();
            prop_assert_eq!(xor_apply(&once, ks.bytes()).unwrap(), payload);
        }
    }
}
