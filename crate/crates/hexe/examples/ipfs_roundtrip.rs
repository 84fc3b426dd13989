//! Pin a ciphertext to an IPFS pinning service and fetch it back through
//! the gateway. Runs entirely against the bundled loopback mock, so it
//! needs no network or credentials; point the config at a real endpoint
//! (and set HEXE_IPFS_KEY / HEXE_IPFS_SECRET) to go live.
//!
//! ```sh
//! cargo run --example ipfs_roundtrip
//! ```

use hexe::cipher::encrypt;
use hexe::fixtures::speech_wav;
use hexe::ipfs::{self, mock::MockPinServer, IpfsError};
use hexe::keygen::{KeyMaterial, KeyMode};
use hexe::wavcodec::WavFile;

fn main() {
    let server = MockPinServer::start("demo-key", "demo-secret").unwrap();
    let cfg = server.client_config();
    println!("mock pinning service at {}", server.base_url());

    // Encrypt with the ipfs-mode keystream, then pin the ciphertext.
    let original = speech_wav(128 * 1024, 16_000, 9);
    let wav = WavFile::parse(&original).unwrap();
    let key = KeyMaterial::generate(16, Some(5), KeyMode::Ipfs).unwrap();
    let ciphertext = encrypt(&wav, &key).unwrap().to_bytes();

    let receipt = ipfs::pin_bytes(&cfg, &ciphertext, "cipher.wav").unwrap();
    println!("pinned {} bytes, cid {}", receipt.size, receipt.cid);
    println!("gateway url: {}", receipt.gateway_url);

    // Content addressing: pinning the same bytes returns the same cid.
    let again = ipfs::pin_bytes(&cfg, &ciphertext, "copy.wav").unwrap();
    assert_eq!(receipt.cid, again.cid);

    // Fetch back and verify against the receipt (size check included).
    let fetched = ipfs::fetch_pinned(&cfg, &receipt).unwrap();
    assert_eq!(fetched, ciphertext);
    println!("fetched {} bytes, content intact", fetched.len());

    // Transient outages are retried; here two 503s are consumed by the
    // client's backoff and the pin still lands.
    server.inject_failures(2);
    let after_retry = ipfs::pin_bytes(&cfg, b"persistent", "note.txt").unwrap();
    println!("pin survived 2 injected 503s: cid {}", after_retry.cid);

    // Wrong credentials map to a typed error instead of a panic.
    let mut bad = cfg.clone();
    bad.api_key = "intruder".into();
    match ipfs::pin_bytes(&bad, b"nope", "x") {
        Err(IpfsError::AuthFailed) => println!("bad credentials rejected as AuthFailed"),
        other => panic!("expected AuthFailed, got {other:?}"),
    }
}
