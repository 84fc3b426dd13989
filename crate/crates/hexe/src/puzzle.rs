//! Solved N x N Sudoku grids: generation, validation, and the text format
//! used to exchange them as public key material.

use std::fmt;

use thiserror::Error;

use crate::rng::SplitMix64;

/// Grid sizes the cipher supports. Each is a perfect square.
pub const SUPPORTED_SIZES: [usize; 3] = [9, 16, 25];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PuzzleError {
    #[error("unsupported grid size {0}, expected one of 9, 16, 25")]
    UnsupportedSize(usize),
    #[error("malformed puzzle text: {0}")]
    Parse(String),
    #[error("grid is not a valid solved sudoku")]
    InvalidPuzzle,
}

/// A solved Sudoku grid. Instances are valid by construction: every row,
/// column, and box holds each of 1..=N exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Puzzle {
    size: usize,
    cells: Vec<u8>,
}

impl Puzzle {
    /// Generates a random solved grid. `seed` pins the output; `None` draws
    /// a seed from the OS so repeated calls differ.
    pub fn generate(size: usize, seed: Option<u64>) -> Result<Self, PuzzleError> {
        if !SUPPORTED_SIZES.contains(&size) {
            return Err(PuzzleError::UnsupportedSize(size));
        }
        let seed = seed.unwrap_or_else(rand::random);
        let mut rng = SplitMix64::new(seed);
        let k = box_size_of(size);

        // Start from the shifted base grid and apply shuffles that each
        // preserve validity: relabel symbols, permute rows within a band,
        // permute columns within a stack, permute bands, permute stacks.
        let mut symbols: Vec<u8> = (1..=size as u8).collect();
        rng.shuffle(&mut symbols);

        let mut bands: Vec<usize> = (0..k).collect();
        rng.shuffle(&mut bands);
        let mut stacks: Vec<usize> = (0..k).collect();
        rng.shuffle(&mut stacks);

        let mut rows_in_band = Vec::with_capacity(k);
        let mut cols_in_stack = Vec::with_capacity(k);
        for _ in 0..k {
            let mut rows: Vec<usize> = (0..k).collect();
            rng.shuffle(&mut rows);
            rows_in_band.push(rows);
            let mut cols: Vec<usize> = (0..k).collect();
            rng.shuffle(&mut cols);
            cols_in_stack.push(cols);
        }

        let mut cells = vec![0u8; size * size];
        for r in 0..size {
            let src_r = bands[r / k] * k + rows_in_band[r / k][r % k];
            for c in 0..size {
                let src_c = stacks[c / k] * k + cols_in_stack[c / k][c % k];
                cells[r * size + c] = symbols[base_value(size, k, src_r, src_c) as usize - 1];
            }
        }
        Ok(Self { size, cells })
    }

    /// Wraps a row-major cell matrix, rejecting anything that is not a
    /// valid solved grid of a supported size.
    pub fn from_cells(size: usize, cells: Vec<u8>) -> Result<Self, PuzzleError> {
        if !SUPPORTED_SIZES.contains(&size) {
            return Err(PuzzleError::UnsupportedSize(size));
        }
        if !validate_cells(size, &cells) {
            return Err(PuzzleError::InvalidPuzzle);
        }
        Ok(Self { size, cells })
    }

    /// Parses the text form: first line N, then N lines of N values.
    pub fn from_text(text: &str) -> Result<Self, PuzzleError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| PuzzleError::Parse("empty input".into()))?;
        let size: usize = header
            .trim()
            .parse()
            .map_err(|_| PuzzleError::Parse(format!("bad size line {header:?}")))?;
        if !SUPPORTED_SIZES.contains(&size) {
            return Err(PuzzleError::UnsupportedSize(size));
        }

        let mut cells = Vec::with_capacity(size * size);
        for row in 0..size {
            let line = lines
                .next()
                .ok_or_else(|| PuzzleError::Parse(format!("missing row {}", row + 1)))?;
            let values: Vec<&str> = line.split_whitespace().collect();
            if values.len() != size {
                return Err(PuzzleError::Parse(format!(
                    "row {} has {} values, expected {size}",
                    row + 1,
                    values.len()
                )));
            }
            for v in values {
                let n: u16 = v
                    .parse()
                    .map_err(|_| PuzzleError::Parse(format!("bad cell value {v:?}")))?;
                if n == 0 || n > size as u16 {
                    return Err(PuzzleError::Parse(format!("cell value {n} out of range")));
                }
                cells.push(n as u8);
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(PuzzleError::Parse("trailing content after grid".into()));
        }
        Self::from_cells(size, cells)
    }

    /// Renders the text form consumed by [`Puzzle::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.size.to_string());
        out.push('\n');
        for r in 0..self.size {
            let row: Vec<String> = (0..self.size)
                .map(|c| self.cell(r, c).to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Side length of one box: sqrt(N).
    pub fn box_size(&self) -> usize {
        box_size_of(self.size)
    }

    pub fn cell(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.size + col]
    }

    /// Row-major cells.
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// Re-checks the row/column/box invariants. Always true for instances
    /// built through this module; exposed so callers can guard anyway.
    pub fn is_valid(&self) -> bool {
        validate_cells(self.size, &self.cells)
    }
}

impl fmt::Display for Puzzle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Checks that `cells` is a solved grid: `size` is a perfect square,
/// the matrix is size x size, and every row, column, and box contains
/// each of 1..=size exactly once. Malformed input returns false.
pub fn validate_cells(size: usize, cells: &[u8]) -> bool {
    let k = box_size_of(size);
    if k == 0 || k * k != size || cells.len() != size * size {
        return false;
    }
    let unit_ok = |indices: &mut dyn Iterator<Item = usize>| {
        let mut seen = vec![false; size];
        for i in indices {
            let v = cells[i] as usize;
            if v == 0 || v > size || seen[v - 1] {
                return false;
            }
            seen[v - 1] = true;
        }
        true
    };
    for r in 0..size {
        if !unit_ok(&mut (0..size).map(|c| r * size + c)) {
            return false;
        }
    }
    for c in 0..size {
        if !unit_ok(&mut (0..size).map(|r| r * size + c)) {
            return false;
        }
    }
    for br in 0..k {
        for bc in 0..k {
            let mut indices = (0..size).map(|i| (br * k + i / k) * size + bc * k + i % k);
            if !unit_ok(&mut indices) {
                return false;
            }
        }
    }
    true
}

fn box_size_of(size: usize) -> usize {
    (size as f64).sqrt() as usize
}

/// Cell of the shifted base grid: row r is row 0 rotated left by
/// k*(r mod k) + r/k, which satisfies all three constraints.
fn base_value(size: usize, k: usize, r: usize, c: usize) -> u8 {
    ((r % k * k + r / k + c) % size + 1) as u8
}
