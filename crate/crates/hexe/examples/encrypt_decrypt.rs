//! Encrypt a synthesized WAV file and decrypt it back, checking the result
//! is byte-identical and the header was never touched.
//!
//! ```sh
//! cargo run --example encrypt_decrypt
//! ```

use hexe::cipher::{decrypt, encrypt};
use hexe::fixtures::speech_wav;
use hexe::keygen::{KeyMaterial, KeyMode};
use hexe::wavcodec::WavFile;

fn main() {
    let original_bytes = speech_wav(64 * 1024, 16_000, 7);
    let original = WavFile::parse(&original_bytes).unwrap();

    let mut key = KeyMaterial::generate(9, Some(42), KeyMode::Plain).unwrap();
    // Pinned so every run exercises the same keystream.
    key.timestamp = 1_673_980_625;
    println!(
        "key: level {}, timestamp {}",
        key.puzzle.size(),
        key.timestamp
    );

    let encrypted = encrypt(&original, &key).unwrap();
    let enc_bytes = encrypted.to_bytes();
    // Only the audio payload changes; everything before it is intact.
    let offset = original.data_offset();
    assert_eq!(&enc_bytes[..offset], &original_bytes[..offset]);
    assert_ne!(encrypted.data(), original.data());
    println!(
        "encrypted: header intact through byte {offset}, payload of {} bytes scrambled",
        encrypted.data().len()
    );

    let decrypted = decrypt(&encrypted, &key).unwrap();
    assert_eq!(decrypted.to_bytes(), original_bytes);
    println!("decrypted: byte-identical to the original");

    // The same operation with the wrong timestamp yields noise, silently.
    let mut wrong = key.clone();
    wrong.timestamp += 1;
    let garbled = decrypt(&encrypted, &wrong).unwrap();
    assert_ne!(garbled.to_bytes(), original_bytes);
    println!("wrong key: output differs (decryption is unauthenticated)");
}
