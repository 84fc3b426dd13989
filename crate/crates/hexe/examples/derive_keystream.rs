//! Walk through keystream derivation: timestamp digits select a box of the
//! puzzle, its values are scaled and bit-packed into the XOR key.
//!
//! ```sh
//! cargo run --example derive_keystream
//! ```

use hexe::keygen::{build_keystream, derive_params, KeyMode};
use hexe::puzzle::{Puzzle, SUPPORTED_SIZES};

fn main() {
    let timestamp = 1_673_980_625;

    for &size in &SUPPORTED_SIZES {
        let params = derive_params(timestamp, size).unwrap();
        println!("--- {size}x{size}, timestamp {timestamp} ---");
        println!(
            "digit sum p={} box side k={} scale t={} box row u={} box col u1={}",
            params.p, params.k, params.t, params.u, params.u1
        );

        let puzzle = Puzzle::generate(size, Some(7)).unwrap();
        let plain = build_keystream(&puzzle, timestamp, KeyMode::Plain);
        let ipfs = build_keystream(&puzzle, timestamp, KeyMode::Ipfs);
        println!(
            "plain ({} bytes, {}-bit fields): {}",
            plain.bytes().len(),
            plain.bit_width(),
            hex::encode(plain.bytes())
        );
        println!(
            "ipfs  ({} bytes): {}",
            ipfs.bytes().len(),
            hex::encode(ipfs.bytes())
        );

        // A one-second-older timestamp yields a different key.
        let shifted = build_keystream(&puzzle, timestamp + 1, KeyMode::Plain);
        assert_ne!(plain.bytes(), shifted.bytes());
    }
    println!("adjacent timestamps always diverged");
}
