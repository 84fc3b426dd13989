//! Lossless RIFF/WAVE chunk model. Parsing keeps every byte, including
//! unknown chunks and pad bytes, so re-serialization is exact; only the
//! `data` payload is ever rewritten by the cipher.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WavError {
    #[error("not a RIFF/WAVE file")]
    NotRiff,
    #[error("truncated chunk {fourcc:?}: need {needed} bytes, have {available}")]
    TruncatedChunk {
        fourcc: String,
        needed: usize,
        available: usize,
    },
    #[error("declared RIFF size {declared} does not match content size {actual}")]
    RiffSizeMismatch { declared: u32, actual: u32 },
    #[error("missing `fmt ` chunk")]
    MissingFmt,
    #[error("missing `data` chunk")]
    MissingData,
    #[error("more than one `data` chunk")]
    DuplicateData,
    #[error("unsupported encoding: format code {format}, {bits} bits per sample")]
    UnsupportedEncoding { format: u16, bits: u16 },
}

/// One RIFF chunk. `pad` holds the alignment byte that follows an
/// odd-sized payload, when the file contains one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub fourcc: [u8; 4],
    pub payload: Vec<u8>,
    pub pad: Option<u8>,
}

impl Chunk {
    fn stored_len(&self) -> usize {
        8 + self.payload.len() + usize::from(self.pad.is_some())
    }
}

/// Decoded `fmt ` fields the rest of the crate cares about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavFormat {
    pub audio_format: u16,
    pub channels: u16,
    pub sample_rate: u32,
    pub bits_per_sample: u16,
}

/// PCM samples split per channel, sign-extended to i32.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSamples {
    pub channels: Vec<Vec<i32>>,
    pub sample_rate: u32,
    pub bits_per_sample: u16,
}

impl AudioSamples {
    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scales every sample by 2^(bits-1) into [-1, 1). Exact for integer
    /// inputs, so identical ints stay identical floats.
    pub fn normalized(&self) -> Vec<Vec<f64>> {
        let scale = f64::from(1u32 << (self.bits_per_sample - 1));
        self.channels
            .iter()
            .map(|ch| ch.iter().map(|&s| f64::from(s) / scale).collect())
            .collect()
    }
}

/// A parsed WAV file, preserving the original chunk sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WavFile {
    riff_size: u32,
    chunks: Vec<Chunk>,
    data_index: usize,
    format: WavFormat,
}

impl WavFile {
    pub fn parse(bytes: &[u8]) -> Result<Self, WavError> {
        if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
            return Err(WavError::NotRiff);
        }
        let riff_size = u32::from_le_bytes(bytes[4..8].try_into().unwrap());

        let mut chunks = Vec::new();
        let mut pos = 12;
        while pos < bytes.len() {
            if bytes.len() - pos < 8 {
                return Err(WavError::TruncatedChunk {
                    fourcc: String::from_utf8_lossy(&bytes[pos..]).into_owned(),
                    needed: 8,
                    available: bytes.len() - pos,
                });
            }
            let fourcc: [u8; 4] = bytes[pos..pos + 4].try_into().unwrap();
            let len = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
            pos += 8;
            if bytes.len() - pos < len {
                return Err(WavError::TruncatedChunk {
                    fourcc: String::from_utf8_lossy(&fourcc).into_owned(),
                    needed: len,
                    available: bytes.len() - pos,
                });
            }
            let payload = bytes[pos..pos + len].to_vec();
            pos += len;
            // Odd payloads are followed by one alignment byte unless the
            // file ends right here.
            let pad = if len % 2 == 1 && pos < bytes.len() {
                pos += 1;
                Some(bytes[pos - 1])
            } else {
                None
            };
            chunks.push(Chunk {
                fourcc,
                payload,
                pad,
            });
        }

        let actual = 4 + chunks.iter().map(Chunk::stored_len).sum::<usize>() as u32;
        if riff_size != actual {
            return Err(WavError::RiffSizeMismatch {
                declared: riff_size,
                actual,
            });
        }

        let mut data_index = None;
        for (i, c) in chunks.iter().enumerate() {
            if &c.fourcc == b"data" {
                if data_index.is_some() {
                    return Err(WavError::DuplicateData);
                }
                data_index = Some(i);
            }
        }
        let data_index = data_index.ok_or(WavError::MissingData)?;

        let fmt = chunks
            .iter()
            .find(|c| &c.fourcc == b"fmt ")
            .ok_or(WavError::MissingFmt)?;
        if fmt.payload.len() < 16 {
            return Err(WavError::TruncatedChunk {
                fourcc: "fmt ".into(),
                needed: 16,
                available: fmt.payload.len(),
            });
        }
        let f = &fmt.payload;
        let format = WavFormat {
            audio_format: u16::from_le_bytes([f[0], f[1]]),
            channels: u16::from_le_bytes([f[2], f[3]]),
            sample_rate: u32::from_le_bytes([f[4], f[5], f[6], f[7]]),
            bits_per_sample: u16::from_le_bytes([f[14], f[15]]),
        };

        Ok(Self {
            riff_size,
            chunks,
            data_index,
            format,
        })
    }

    /// Serializes back to bytes. For an unmodified parse this reproduces
    /// the input exactly.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.riff_size as usize);
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&self.riff_size.to_le_bytes());
        out.extend_from_slice(b"WAVE");
        for c in &self.chunks {
            out.extend_from_slice(&c.fourcc);
            out.extend_from_slice(&(c.payload.len() as u32).to_le_bytes());
            out.extend_from_slice(&c.payload);
            if let Some(pad) = c.pad {
                out.push(pad);
            }
        }
        out
    }

    pub fn format(&self) -> &WavFormat {
        &self.format
    }

    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    /// The `data` chunk payload.
    pub fn data(&self) -> &[u8] {
        &self.chunks[self.data_index].payload
    }

    /// Mutable view of the `data` payload. The length is fixed so the
    /// declared sizes stay correct.
    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.chunks[self.data_index].payload
    }

    /// Byte offset of the `data` payload within the serialized file.
    pub fn data_offset(&self) -> usize {
        let before: usize = self.chunks[..self.data_index]
            .iter()
            .map(Chunk::stored_len)
            .sum();
        12 + before + 8
    }

    /// Splits the `data` payload into per-channel samples. Only integer
    /// PCM (format code 1) at 8, 16, 24, or 32 bits is supported. A
    /// trailing partial frame is ignored.
    pub fn decode_samples(&self) -> Result<AudioSamples, WavError> {
        let fmt = &self.format;
        let unsupported = WavError::UnsupportedEncoding {
            format: fmt.audio_format,
            bits: fmt.bits_per_sample,
        };
        if fmt.audio_format != 1 || fmt.channels == 0 {
            return Err(unsupported);
        }
        let bytes_per_sample = match fmt.bits_per_sample {
            8 | 16 | 24 | 32 => fmt.bits_per_sample as usize / 8,
            _ => return Err(unsupported),
        };
        let data = self.data();
        let channels = fmt.channels as usize;
        let frame_len = bytes_per_sample * channels;
        let frames = data.len() / frame_len;

        let mut out = vec![Vec::with_capacity(frames); channels];
        for frame in 0..frames {
            for (ch, samples) in out.iter_mut().enumerate() {
                let at = frame * frame_len + ch * bytes_per_sample;
                let s = &data[at..at + bytes_per_sample];
                let v = match bytes_per_sample {
                    1 => i32::from(s[0]) - 128,
                    2 => i32::from(i16::from_le_bytes([s[0], s[1]])),
                    3 => i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8,
                    4 => i32::from_le_bytes([s[0], s[1], s[2], s[3]]),
                    _ => unreachable!(),
                };
                samples.push(v);
            }
        }
        Ok(AudioSamples {
            channels: out,
            sample_rate: fmt.sample_rate,
            bits_per_sample: fmt.bits_per_sample,
        })
    }
}
