//! Deterministic audio fixtures. Synthesized speech-like WAV files for
//! tests, examples, and the benchmark harness, so nothing here depends on
//! binary assets or the network.

use crate::rng::SplitMix64;

/// Benchmark size points: roughly 1 KB, 2 KB, 24.5 MB, and 35.2 MB.
pub const BENCH_SIZES: [(&str, usize); 4] = [
    ("speech_1kb.wav", 1_024),
    ("speech_2kb.wav", 2_048),
    ("speech_24.5mb.wav", 25_690_112),
    ("speech_35.2mb.wav", 36_909_875),
];

/// 16-byte PCM `fmt ` payload.
pub fn fmt_payload(audio_format: u16, channels: u16, sample_rate: u32, bits: u16) -> Vec<u8> {
    let block_align = channels * bits / 8;
    let byte_rate = sample_rate * u32::from(block_align);
    let mut f = Vec::with_capacity(16);
    f.extend_from_slice(&audio_format.to_le_bytes());
    f.extend_from_slice(&channels.to_le_bytes());
    f.extend_from_slice(&sample_rate.to_le_bytes());
    f.extend_from_slice(&byte_rate.to_le_bytes());
    f.extend_from_slice(&block_align.to_le_bytes());
    f.extend_from_slice(&bits.to_le_bytes());
    f
}

/// Assembles a RIFF/WAVE file from raw chunks, adding a zero pad byte
/// after every odd-sized payload.
pub fn assemble_riff(chunks: &[([u8; 4], Vec<u8>)]) -> Vec<u8> {
    let mut body = Vec::new();
    for (fourcc, payload) in chunks {
        body.extend_from_slice(fourcc);
        body.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        body.extend_from_slice(payload);
        if payload.len() % 2 == 1 {
            body.push(0);
        }
    }
    let mut out = Vec::with_capacity(12 + body.len());
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(4 + body.len() as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(&body);
    out
}

/// Canonical two-chunk PCM file: 44-byte header, then the payload.
pub fn pcm_wav(sample_rate: u32, channels: u16, bits: u16, data: Vec<u8>) -> Vec<u8> {
    assemble_riff(&[
        (*b"fmt ", fmt_payload(1, channels, sample_rate, bits)),
        (*b"data", data),
    ])
}

/// Speech-like mono 16-bit file of approximately `total_bytes` bytes
/// (header included). Deterministic for a given seed.
pub fn speech_wav(total_bytes: usize, sample_rate: u32, seed: u64) -> Vec<u8> {
    let data_len = total_bytes.saturating_sub(44).max(4) & !1;
    let samples = synth_speech(data_len / 2, sample_rate, seed);
    let mut data = Vec::with_capacity(data_len);
    for s in samples {
        data.extend_from_slice(&s.to_le_bytes());
    }
    pcm_wav(sample_rate, 1, 16, data)
}

/// Voiced syllables with gliding pitch and two formants, alternating with
/// short unvoiced noise bursts. Crude, but it has the spectral envelope
/// the LPC metrics need.
fn synth_speech(n: usize, sample_rate: u32, seed: u64) -> Vec<i16> {
    let mut rng = SplitMix64::new(seed);
    let rate = f64::from(sample_rate);
    let mut out = Vec::with_capacity(n);
    let (mut ph0, mut ph1, mut ph2) = (0.0f64, 0.0f64, 0.0f64);
    let tau = std::f64::consts::TAU;
    for i in 0..n {
        let t = i as f64 / rate;
        let syllable = t * 3.5;
        let pos = syllable.fract();
        let idx = syllable as u64;
        let env = (std::f64::consts::PI * pos).sin().max(0.0);

        let f0 = 120.0 + 35.0 * (tau * 0.4 * t).sin();
        let f1 = 520.0 + 180.0 * (tau * 0.9 * t).sin();
        let f2 = 1600.0 + 250.0 * (tau * 1.3 * t).sin();
        ph0 += tau * f0 / rate;
        ph1 += tau * f1 / rate;
        ph2 += tau * f2 / rate;

        let x = if idx % 4 == 3 {
            // Unvoiced burst.
            0.25 * env * rng.signed_unit()
        } else {
            env * (0.55 * ph0.sin() + 0.28 * ph1.sin() + 0.13 * ph2.sin())
                + 0.02 * rng.signed_unit()
        };
        // Conversational loudness, well under full scale, like a real
        // speech recording.
        out.push(((0.5 * x).clamp(-0.95, 0.95) * 32767.0) as i16);
    }
    out
}

/// Stereo file with a LIST/INFO chunk between `fmt ` and `data`.
pub fn list_chunk_wav(seed: u64) -> Vec<u8> {
    let samples = synth_speech(600, 44_100, seed);
    let mut data = Vec::with_capacity(samples.len() * 4);
    for s in &samples {
        data.extend_from_slice(&s.to_le_bytes());
        data.extend_from_slice(&(s / 2).to_le_bytes());
    }
    let mut list = Vec::new();
    list.extend_from_slice(b"INFO");
    list.extend_from_slice(b"IART");
    list.extend_from_slice(&8u32.to_le_bytes());
    list.extend_from_slice(b"nobody\0\0");
    assemble_riff(&[
        (*b"fmt ", fmt_payload(1, 2, 44_100, 16)),
        (*b"LIST", list),
        (*b"data", data),
    ])
}

/// 8-bit mono file with an odd-sized chunk before `data`, an odd-sized
/// `data` payload, and a trailing chunk, so every pad-byte path is hit.
pub fn odd_chunk_wav(seed: u64) -> Vec<u8> {
    let mut rng = SplitMix64::new(seed);
    let data: Vec<u8> = (0..501)
        .map(|_| (128.0 + 90.0 * rng.signed_unit()) as u8)
        .collect();
    assemble_riff(&[
        (*b"note", b"odd".to_vec()),
        (*b"fmt ", fmt_payload(1, 1, 8_000, 8)),
        (*b"data", data),
        (*b"tail", vec![0xAB, 0xCD]),
    ])
}

/// 24-bit stereo file.
pub fn high_res_wav(seed: u64) -> Vec<u8> {
    let samples = synth_speech(400, 48_000, seed);
    let mut data = Vec::with_capacity(samples.len() * 6);
    for s in &samples {
        let v = i32::from(*s) << 8;
        data.extend_from_slice(&v.to_le_bytes()[..3]);
        let w = i32::from(*s) << 7;
        data.extend_from_slice(&w.to_le_bytes()[..3]);
    }
    pcm_wav(48_000, 2, 24, data)
}

/// The parse/write regression corpus: canonical, metadata-bearing,
/// odd-length, and high-resolution layouts.
pub fn fixture_corpus() -> Vec<(String, Vec<u8>)> {
    vec![
        ("speech_1kb.wav".into(), speech_wav(1_024, 8_000, 101)),
        ("speech_2kb.wav".into(), speech_wav(2_048, 8_000, 102)),
        ("list_chunk.wav".into(), list_chunk_wav(103)),
        ("odd_chunks.wav".into(), odd_chunk_wav(104)),
        ("high_res.wav".into(), high_res_wav(105)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavcodec::WavFile;

    #[test]
    fn fixtures_are_deterministic() {
        assert_eq!(speech_wav(2_048, 8_000, 7), speech_wav(2_048, 8_000, 7));
        assert_ne!(speech_wav(2_048, 8_000, 7), speech_wav(2_048, 8_000, 8));
    }

    #[test]
    fn sizes_land_close_to_target() {
        for target in [1_024usize, 2_048, 100_000] {
            let bytes = speech_wav(target, 8_000, 1);
            assert!(
                bytes.len().abs_diff(target) <= 2,
                "target {target}, got {}",
                bytes.len()
            );
        }
    }

    #[test]
    fn corpus_parses_and_roundtrips() {
        for (name, bytes) in fixture_corpus() {
            let wav = WavFile::parse(&bytes).expect(&name);
            assert_eq!(wav.to_bytes(), bytes, "{name}");
            wav.decode_samples().expect(&name);
        }
    }

    #[test]
    fn speech_has_nonzero_energy() {
        let bytes = speech_wav(4_096, 8_000, 3);
        let samples = WavFile::parse(&bytes).unwrap().decode_samples().unwrap();
        let energy: i64 = samples.channels[0]
            .iter()
            .map(|&s| i64::from(s) * i64::from(s))
            .sum();
        assert!(energy > 0);
    }
}
