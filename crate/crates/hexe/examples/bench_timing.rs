//! Time encryption and decryption across file sizes and security levels.
//! Uses two small synthesized files so the example finishes in seconds;
//! `hexe bench` (or `bench_matrix` directly) runs the full standard set
//! up to 35.2 MB.
//!
//! ```sh
//! cargo run --release --example bench_timing
//! ```

use hexe::bench::{bench_matrix, csv_header, to_csv_row};
use hexe::fixtures::speech_wav;
use hexe::puzzle::SUPPORTED_SIZES;

fn main() {
    let files = vec![
        ("small.wav".to_string(), speech_wav(64 * 1024, 16_000, 7)),
        ("medium.wav".to_string(), speech_wav(1024 * 1024, 16_000, 7)),
    ];
    let rows = bench_matrix(&files, &SUPPORTED_SIZES, 5, 1).unwrap();

    println!("{}", csv_header());
    for row in &rows {
        println!("{}", to_csv_row(row));
    }

    // Larger payloads never get cheaper: within each level, the times
    // are nondecreasing in file size.
    for &level in &SUPPORTED_SIZES {
        let times: Vec<f64> = rows
            .iter()
            .filter(|r| r.level == level)
            .map(|r| r.encrypt_ms)
            .collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }
    println!("encrypt time is monotone in size at every level");
}
