//! Keystream derivation: timestamp-derived parameters select a mini-grid
//! from the puzzle, whose scaled values are bit-packed into the key bytes.

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::puzzle::{Puzzle, PuzzleError};

/// Which keystream variant to build. `Ipfs` applies a per-byte scaling on
/// top of the packed bytes and is paired with pinning the ciphertext.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyMode {
    Plain,
    Ipfs,
}

impl fmt::Display for KeyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyMode::Plain => f.write_str("plain"),
            KeyMode::Ipfs => f.write_str("ipfs"),
        }
    }
}

impl FromStr for KeyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(KeyMode::Plain),
            "ipfs" => Ok(KeyMode::Ipfs),
            other => Err(format!(
                "unknown key mode {other:?}, expected plain or ipfs"
            )),
        }
    }
}

/// Parameters derived from a timestamp for a given grid size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyParams {
    pub timestamp: u64,
    /// Grid size N.
    pub size: usize,
    /// Base-10 digit sum of the timestamp.
    pub p: u32,
    /// Box side length, sqrt(N).
    pub k: usize,
    /// Value multiplier in 1..=N-1.
    pub t: u32,
    /// Box-row index of the selected mini-grid, in 0..k.
    pub u: usize,
    /// Box-column index of the selected mini-grid, in 0..k.
    pub u1: usize,
}

/// Derives the mini-grid selector and multiplier from a UNIX timestamp.
pub fn derive_params(timestamp: u64, size: usize) -> Result<KeyParams, PuzzleError> {
    if !crate::puzzle::SUPPORTED_SIZES.contains(&size) {
        return Err(PuzzleError::UnsupportedSize(size));
    }
    let p = digit_sum(timestamp);
    let k = (size as f64).sqrt() as usize;
    let mut t = p % size as u32;
    if t == 0 {
        t = 1;
    }
    let u = p as usize % k;
    let u1 = (timestamp % 10) as usize % k;
    Ok(KeyParams {
        timestamp,
        size,
        p,
        k,
        t,
        u,
        u1,
    })
}

fn digit_sum(mut n: u64) -> u32 {
    let mut sum = 0;
    while n > 0 {
        sum += (n % 10) as u32;
        n /= 10;
    }
    sum
}

/// Copies the box at box-row `u`, box-column `u1` out of the puzzle,
/// row-major. The selection is always box-aligned.
pub fn select_mini_grid(puzzle: &Puzzle, params: &KeyParams) -> Vec<u8> {
    assert_eq!(
        params.size,
        puzzle.size(),
        "params derived for another size"
    );
    let k = puzzle.box_size();
    let r0 = params.u * k;
    let c0 = params.u1 * k;
    let mut grid = Vec::with_capacity(k * k);
    for r in r0..r0 + k {
        for c in c0..c0 + k {
            grid.push(puzzle.cell(r, c));
        }
    }
    grid
}

/// Bits needed for the largest scaled value N*(N-1): 7, 8, and 10 bits
/// for N = 9, 16, 25.
pub fn field_bit_width(size: usize) -> u32 {
    let max = (size * (size - 1)) as u32;
    u32::BITS - max.leading_zeros()
}

/// Packs each value into a fixed `width`-bit big-endian field, fields
/// MSB-first, final partial byte zero-padded on the right.
pub fn pack_fields(values: &[u32], width: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity((values.len() * width as usize).div_ceil(8));
    let mut acc: u64 = 0;
    let mut nbits: u32 = 0;
    for &v in values {
        debug_assert!(
            width == 64 || u64::from(v) < 1 << width,
            "value overflows field"
        );
        acc = (acc << width) | u64::from(v);
        nbits += width;
        while nbits >= 8 {
            out.push((acc >> (nbits - 8)) as u8);
            nbits -= 8;
            acc &= (1 << nbits) - 1;
        }
    }
    if nbits > 0 {
        out.push((acc << (8 - nbits)) as u8);
    }
    out
}

/// Inverse of [`pack_fields`]: reads `count` fields of `width` bits.
pub fn unpack_fields(bytes: &[u8], width: u32, count: usize) -> Vec<u32> {
    let mut values = Vec::with_capacity(count);
    let mut acc: u64 = 0;
    let mut nbits: u32 = 0;
    let mut idx = 0;
    for _ in 0..count {
        while nbits < width {
            acc = (acc << 8) | u64::from(bytes[idx]);
            idx += 1;
            nbits += 8;
        }
        values.push((acc >> (nbits - width)) as u32);
        nbits -= width;
        acc &= (1 << nbits) - 1;
    }
    values
}

/// Per-byte transform applied in [`KeyMode::Ipfs`].
pub fn scale_for_ipfs(byte: u8) -> u8 {
    (u32::from(byte) * 5000 % 256) as u8
}

/// The repeating key the cipher XORs against the audio payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keystream {
    bytes: Vec<u8>,
    bit_width: u32,
    params: KeyParams,
}

impl Keystream {
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit_width(&self) -> u32 {
        self.bit_width
    }

    pub fn params(&self) -> &KeyParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// Builds the keystream for a puzzle, timestamp, and mode. Deterministic:
/// the same inputs always produce the same bytes.
pub fn build_keystream(puzzle: &Puzzle, timestamp: u64, mode: KeyMode) -> Keystream {
    let params =
        derive_params(timestamp, puzzle.size()).expect("puzzle sizes are always supported");
    let grid = select_mini_grid(puzzle, &params);
    let width = field_bit_width(puzzle.size());
    let scaled: Vec<u32> = grid.iter().map(|&v| u32::from(v) * params.t).collect();
    let mut bytes = pack_fields(&scaled, width);
    if mode == KeyMode::Ipfs {
        for b in &mut bytes {
            *b = scale_for_ipfs(*b);
        }
    }
    Keystream {
        bytes,
        bit_width: width,
        params,
    }
}

#[derive(Debug, Error)]
pub enum KeyError {
    #[error("malformed key file: {0}")]
    Parse(String),
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
}

/// Everything needed to reproduce a keystream: the puzzle, the timestamp,
/// and the mode. This is the content of a `.hexekey` file and must stay
/// local; the puzzle alone may circulate publicly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    pub puzzle: Puzzle,
    pub timestamp: u64,
    pub mode: KeyMode,
}

impl KeyMaterial {
    /// Fresh key: random puzzle of the given size, current UNIX time.
    pub fn generate(size: usize, seed: Option<u64>, mode: KeyMode) -> Result<Self, PuzzleError> {
        Ok(Self {
            puzzle: Puzzle::generate(size, seed)?,
            timestamp: unix_now(),
            mode,
        })
    }

    pub fn keystream(&self) -> Keystream {
        build_keystream(&self.puzzle, self.timestamp, self.mode)
    }

    /// Key file text: timestamp line, mode line, then the puzzle.
    pub fn to_text(&self) -> String {
        format!(
            "{}\n{}\n{}",
            self.timestamp,
            self.mode,
            self.puzzle.to_text()
        )
    }

    pub fn from_text(text: &str) -> Result<Self, KeyError> {
        let mut parts = text.splitn(3, '\n');
        let ts_line = parts
            .next()
            .ok_or_else(|| KeyError::Parse("empty key file".into()))?;
        let timestamp: u64 = ts_line
            .trim()
            .parse()
            .map_err(|_| KeyError::Parse(format!("bad timestamp line {ts_line:?}")))?;
        let mode_line = parts
            .next()
            .ok_or_else(|| KeyError::Parse("missing mode line".into()))?;
        let mode = KeyMode::from_str(mode_line.trim()).map_err(KeyError::Parse)?;
        let grid = parts
            .next()
            .ok_or_else(|| KeyError::Parse("missing puzzle grid".into()))?;
        Ok(Self {
            puzzle: Puzzle::from_text(grid)?,
            timestamp,
            mode,
        })
    }
}

/// Seconds since the UNIX epoch.
pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .expect("system clock is before 1970")
        .as_secs()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// The shifted base grid for N=9, frozen as new rows for independence
    /// from the generator.
    fn base_nine() -> Puzzle {
        let rows: [[u8; 9]; 9] = [
            [1, 2, 3, 4, 5, 6, 7, 8, 9],
            [4, 5, 6, 7, 8, 9, 1, 2, 3],
            [7, 8, 9, 1, 2, 3, 4, 5, 6],
            [2, 3, 4, 5, 6, 7, 8, 9, 1],
            [5, 6, 7, 8, 9, 1, 2, 3, 4],
            [8, 9, 1, 2, 3, 4, 5, 6, 7],
            [3, 4, 5, 6, 7, 8, 9, 1, 2],
            [6, 7, 8, 9, 1, 2, 3, 4, 5],
            [9, 1, 2, 3, 4, 5, 6, 7, 8],
        ];
        Puzzle::from_cells(9, rows.concat()).unwrap()
    }

    #[test]
    fn params_for_known_timestamps() {
        let p = derive_params(1_673_980_625, 9).unwrap();
        assert_eq!((p.p, p.k, p.t, p.u, p.u1), (47, 3, 2, 2, 2));

        let p = derive_params(1_673_980_625, 16).unwrap();
        assert_eq!((p.p, p.k, p.t, p.u, p.u1), (47, 4, 15, 3, 1));

        let p = derive_params(1_673_980_625, 25).unwrap();
        assert_eq!((p.p, p.k, p.t, p.u, p.u1), (47, 5, 22, 2, 0));
    }

    #[test]
    fn multiplier_floors_at_one() {
        // Digit sum 9 is divisible by 9, so t snaps from 0 to 1.
        let p = derive_params(900_000_000, 9).unwrap();
        assert_eq!((p.p, p.t, p.u, p.u1), (9, 1, 0, 0));

        let p = derive_params(0, 9).unwrap();
        assert_eq!((p.p, p.t, p.u, p.u1), (0, 1, 0, 0));
    }

    #[test]
    fn params_reject_unsupported_size() {
        assert_eq!(derive_params(1, 10), Err(PuzzleError::UnsupportedSize(10)));
    }

    #[test]
    fn field_widths_per_size() {
        assert_eq!(field_bit_width(9), 7); // max 72
        assert_eq!(field_bit_width(16), 8); // max 240
        assert_eq!(field_bit_width(25), 10); // max 600
    }

    #[test]
    fn packed_bytes_for_identity_box() {
        // timestamp 0 gives t=1, u=0, u1=0, so the base grid's top-left box
        // packs the raw values 1..=9 into 7-bit fields.
        let ks = build_keystream(&base_nine(), 0, KeyMode::Plain);
        assert_eq!(ks.bytes(), [0x02, 0x08, 0x18, 0x40, 0xA1, 0x83, 0x88, 0x12]);
        assert_eq!(ks.bit_width(), 7);
    }

    #[test]
    fn keystream_lengths_per_size() {
        for (size, expected) in [(9, 8), (16, 16), (25, 32)] {
            let puzzle = Puzzle::generate(size, Some(11)).unwrap();
            let ks = build_keystream(&puzzle, 1_673_980_625, KeyMode::Plain);
            assert_eq!(ks.len(), expected, "size {size}");
        }
    }

    #[test]
    fn ipfs_scaling_oracle() {
        // 5000 mod 256 = 136, so byte 1 maps to 0x88.
        assert_eq!(scale_for_ipfs(0x01), 0x88);
        assert_eq!(scale_for_ipfs(0x00), 0x00);
        assert_eq!(scale_for_ipfs(0x02), 0x10);
    }

    #[test]
    fn ipfs_keystream_is_plain_scaled_bytewise() {
        let puzzle = Puzzle::generate(16, Some(3)).unwrap();
        let plain = build_keystream(&puzzle, 1_673_980_625, KeyMode::Plain);
        let ipfs = build_keystream(&puzzle, 1_673_980_625, KeyMode::Ipfs);
        let expected: Vec<u8> = plain.bytes().iter().map(|&b| scale_for_ipfs(b)).collect();
        assert_eq!(ipfs.bytes(), expected);
        assert_ne!(ipfs.bytes(), plain.bytes());
    }

    #[test]
    fn keystream_is_deterministic() {
        let puzzle = Puzzle::generate(25, Some(21)).unwrap();
        let a = build_keystream(&puzzle, 1_700_000_001, KeyMode::Plain);
        let b = build_keystream(&puzzle, 1_700_000_001, KeyMode::Plain);
        assert_eq!(a, b);
    }

    #[test]
    fn adjacent_timestamps_change_the_keystream() {
        let puzzle = base_nine();
        let a = build_keystream(&puzzle, 1_673_980_625, KeyMode::Plain);
        let b = build_keystream(&puzzle, 1_673_980_626, KeyMode::Plain);
        assert_ne!(a.bytes(), b.bytes());
    }

    #[test]
    fn packing_roundtrips_scaled_values() {
        for size in crate::puzzle::SUPPORTED_SIZES {
            let puzzle = Puzzle::generate(size, Some(17)).unwrap();
            let params = derive_params(1_673_980_625, size).unwrap();
            let scaled: Vec<u32> = select_mini_grid(&puzzle, &params)
                .iter()
                .map(|&v| u32::from(v) * params.t)
                .collect();
            let width = field_bit_width(size);
            let packed = pack_fields(&scaled, width);
            assert_eq!(unpack_fields(&packed, width, scaled.len()), scaled);
        }
    }

    #[test]
    fn key_file_roundtrip() {
        let key = KeyMaterial {
            puzzle: Puzzle::generate(16, Some(5)).unwrap(),
            timestamp: 1_673_980_625,
            mode: KeyMode::Ipfs,
        };
        let parsed = KeyMaterial::from_text(&key.to_text()).unwrap();
        assert_eq!(parsed, key);
    }

    #[test]
    fn key_file_rejects_bad_mode() {
        let key = KeyMaterial {
            puzzle: Puzzle::generate(9, Some(5)).unwrap(),
            timestamp: 7,
            mode: KeyMode::Plain,
        };
        let text = key.to_text().replace("plain", "fancy");
        assert!(matches!(
            KeyMaterial::from_text(&text),
            Err(KeyError::Parse(_))
        ));
    }

    #[test]
    fn key_file_rejects_tampered_grid() {
        let key = KeyMaterial {
            puzzle: base_nine(),
            timestamp: 7,
            mode: KeyMode::Plain,
        };
        // Corrupt one cell: "1 2 3" -> "1 1 3" in the first row.
        let text = key.to_text().replacen("1 2 3", "1 1 3", 1);
        assert!(matches!(
            KeyMaterial::from_text(&text),
            Err(KeyError::Puzzle(PuzzleError::InvalidPuzzle))
        ));
    }

    proptest! {
        #[test]
        fn pack_unpack_any_fields(values in prop::collection::vec(0u32..600, 1..64)) {
            // Width 10 holds any value below 1024; also check tight widths.
            let packed = pack_fields(&values, 10);
            prop_assert_eq!(unpack_fields(&packed, 10, values.len()), values);
        }

        #[test]
        fn params_are_always_in_range(ts in any::<u64>()) {
            for size in crate::puzzle::SUPPORTED_SIZES {
                let p = derive_params(ts, size).unwrap();
                prop_assert!(p.t >= 1 && p.t < size as u32);
                prop_assert!(p.u < p.k);
                prop_assert!(p.u1 < p.k);
            }
        }
    }
}
