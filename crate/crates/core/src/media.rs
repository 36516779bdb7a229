//! Raw video input and deterministic synthetic sequences.
//!
//! Only the luma plane is kept. Raw files are headerless, frame-sequential,
//! row-major 8-bit data, either luma-only or planar 4:2:0 (chroma planes are
//! skipped). A leading `YUV4MPEG2` header and per-frame `FRAME` markers are
//! tolerated and skipped.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("truncated input: need {needed} bytes, file has {available}")]
    TruncatedInput { needed: u64, available: u64 },
    #[error("invalid dimensions {width}x{height}: both must be non-zero multiples of 8")]
    InvalidDimensions { width: usize, height: usize },
    #[error("a sequence needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("frame {index} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    MismatchedFrame {
        index: usize,
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },
    #[error("malformed y4m stream: {0}")]
    MalformedY4m(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Memory layout of a raw video file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RawLayout {
    /// Luma plane only, `w*h` bytes per frame.
    Luma,
    /// Planar 4:2:0, `w*h*3/2` bytes per frame; chroma is skipped.
    #[default]
    Yuv420,
}

impl RawLayout {
    pub fn frame_bytes(self, width: usize, height: usize) -> usize {
        match self {
            RawLayout::Luma => width * height,
            RawLayout::Yuv420 => width * height + 2 * ((width / 2) * (height / 2)),
        }
    }
}

fn check_dims(width: usize, height: usize) -> Result<(), MediaError> {
    if width == 0 || height == 0 || !width.is_multiple_of(8) || !height.is_multiple_of(8) {
        return Err(MediaError::InvalidDimensions { width, height });
    }
    Ok(())
}

/// One 8-bit luma frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    width: usize,
    height: usize,
    luma: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, luma: Vec<u8>) -> Result<Self, MediaError> {
        check_dims(width, height)?;
        if luma.len() != width * height {
            return Err(MediaError::TruncatedInput {
                needed: (width * height) as u64,
                available: luma.len() as u64,
            });
        }
        Ok(Frame {
            width,
            height,
            luma,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, MediaError> {
        Frame::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn luma(&self) -> &[u8] {
        &self.luma
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize) -> u8 {
        self.luma[y * self.width + x]
    }
}

/// Ordered frames with identical dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    name: String,
    frames: Vec<Frame>,
}

impl Sequence {
    pub fn new(name: impl Into<String>, frames: Vec<Frame>) -> Result<Self, MediaError> {
        if frames.len() < 2 {
            return Err(MediaError::TooFewFrames(frames.len()));
        }
        let (w, h) = (frames[0].width, frames[0].height);
        for (index, f) in frames.iter().enumerate() {
            if f.width != w || f.height != h {
                return Err(MediaError::MismatchedFrame {
                    index,
                    got_w: f.width,
                    got_h: f.height,
                    want_w: w,
                    want_h: h,
                });
            }
        }
        Ok(Sequence {
            name: name.into(),
            frames,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    /// Keeps the first `n` frames (at least 2).
    pub fn truncated(&self, n: usize) -> Result<Self, MediaError> {
        Sequence::new(
            self.name.clone(),
            self.frames.iter().take(n).cloned().collect(),
        )
    }

    /// Writes the luma planes back to back (luma-only layout).
    pub fn write_luma<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for f in &self.frames {
            out.write_all(&f.luma)?;
        }
        Ok(())
    }
}

/// Strips a Y4M stream header and its per-frame markers, returning raw planes.
fn strip_y4m(bytes: &[u8], frame_bytes: usize, frame_count: usize) -> Result<Vec<u8>, MediaError> {
    let line_end = |from: usize| -> Result<usize, MediaError> {
        bytes[from..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| from + p)
            .ok_or_else(|| MediaError::MalformedY4m("missing newline".into()))
    };
    let mut pos = line_end(0)? + 1;
    let mut out = Vec::with_capacity(frame_bytes * frame_count);
    for _ in 0..frame_count {
        if !bytes[pos.min(bytes.len())..].starts_with(b"FRAME") {
            return Err(MediaError::TruncatedInput {
                needed: (pos + frame_bytes) as u64,
                available: bytes.len() as u64,
            });
        }
        pos = line_end(pos)? + 1;
        if pos + frame_bytes > bytes.len() {
            return Err(MediaError::TruncatedInput {
                needed: (pos + frame_bytes) as u64,
                available: bytes.len() as u64,
            });
        }
        out.extend_from_slice(&bytes[pos..pos + frame_bytes]);
        pos += frame_bytes;
    }
    Ok(out)
}

/// Reads the first `frame_count` frames of a raw video file.
pub fn load_raw_video(
    path: &Path,
    width: usize,
    height: usize,
    frame_count: usize,
    layout: RawLayout,
) -> Result<Sequence, MediaError> {
    check_dims(width, height)?;
    if frame_count < 2 {
        return Err(MediaError::TooFewFrames(frame_count));
    }
    if !path.exists() {
        return Err(MediaError::FileNotFound(path.display().to_string()));
    }
    let bytes = fs::read(path)?;
    let frame_bytes = layout.frame_bytes(width, height);
    let planes = if bytes.starts_with(b"YUV4MPEG2") {
        strip_y4m(&bytes, frame_bytes, frame_count)?
    } else {
        let needed = (frame_bytes * frame_count) as u64;
        if (bytes.len() as u64) < needed {
            return Err(MediaError::TruncatedInput {
                needed,
                available: bytes.len() as u64,
            });
        }
        bytes
    };
    let frames = (0..frame_count)
        .map(|i| {
            let start = i * frame_bytes;
            Frame::new(width, height, planes[start..start + width * height].to_vec())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "raw".into());
    Sequence::new(name, frames)
}

/// Kinds of synthetic content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// Constant mid-gray.
    Flat,
    /// Diagonal ramp panning one sample to the left per frame.
    Gradient,
    /// Static textured background with a textured rectangle moving by
    /// [`MOVING_BLOCK_MOTION`] per frame.
    MovingBlock,
    /// Fresh uniform noise every frame.
    Noise,
}

impl std::str::FromStr for SyntheticKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flat" => Ok(SyntheticKind::Flat),
            "gradient" => Ok(SyntheticKind::Gradient),
            "moving_block" => Ok(SyntheticKind::MovingBlock),
            "noise" => Ok(SyntheticKind::Noise),
            other => Err(format!("unknown synthetic kind `{other}`")),
        }
    }
}

/// Value of every sample of a [`SyntheticKind::Flat`] sequence.
pub const FLAT_LEVEL: u8 = 128;

/// Motion vector of the moving rectangle, in the convention of the encoder:
/// frame `t+1` at `(x, y)` equals frame `t` at `(x + dx, y + dy)`.
pub const MOVING_BLOCK_MOTION: (i32, i32) = (2, 0);

/// Generates a deterministic synthetic sequence.
pub fn synthesize_sequence(
    kind: SyntheticKind,
    width: usize,
    height: usize,
    frame_count: usize,
    seed: u64,
) -> Result<Sequence, MediaError> {
    check_dims(width, height)?;
    if frame_count < 2 {
        return Err(MediaError::TooFewFrames(frame_count));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = match kind {
        SyntheticKind::Flat => (0..frame_count)
            .map(|_| Frame::filled(width, height, FLAT_LEVEL))
            .collect::<Result<Vec<_>, _>>()?,
        SyntheticKind::Gradient => {
            let span = (width + height + frame_count) as f64;
            let phase = rng.gen_range(0..16usize);
            (0..frame_count)
                .map(|t| {
                    let mut luma = Vec::with_capacity(width * height);
                    for y in 0..height {
                        for x in 0..width {
                            let v = (x + t + y + phase) as f64 / span * 224.0 + 16.0;
                            luma.push(v.round().clamp(0.0, 255.0) as u8);
                        }
                    }
                    Frame::new(width, height, luma)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        SyntheticKind::MovingBlock => moving_block(&mut rng, width, height, frame_count)?,
        SyntheticKind::Noise => (0..frame_count)
            .map(|_| {
                let luma = (0..width * height).map(|_| rng.gen::<u8>()).collect();
                Frame::new(width, height, luma)
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let name = format!("{}_{}x{}_s{}", kind_name(kind), width, height, seed);
    Sequence::new(name, frames)
}

fn kind_name(kind: SyntheticKind) -> &'static str {
    match kind {
        SyntheticKind::Flat => "flat",
        SyntheticKind::Gradient => "gradient",
        SyntheticKind::MovingBlock => "moving_block",
        SyntheticKind::Noise => "noise",
    }
}

fn moving_block(
    rng: &mut ChaCha8Rng,
    width: usize,
    height: usize,
    frame_count: usize,
) -> Result<Vec<Frame>, MediaError> {
    // Low-amplitude texture on a smooth background.
    let background: Vec<u8> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| {
            let base = 60.0 + 40.0 * ((x as f64) / width as f64) + 30.0 * ((y as f64) / height as f64);
            base as u8
        })
        .map(|b| b.saturating_add(rng.gen_range(0..6)))
        .collect();

    let bw = (width / 2).max(8);
    let bh = (height / 2).max(8);
    let texture: Vec<u8> = (0..bw * bh).map(|_| rng.gen_range(120..=250)).collect();
    let x0 = ((width - bw) / 2) as i64;
    let y0 = ((height - bh) / 2) as i64;
    let (dx, dy) = MOVING_BLOCK_MOTION;

    (0..frame_count)
        .map(|t| {
            // content moves by -mv per frame so that mv points back into the reference
            let bx = x0 - dx as i64 * t as i64;
            let by = y0 - dy as i64 * t as i64;
            let mut luma = background.clone();
            for ty in 0..bh as i64 {
                let y = by + ty;
                if y < 0 || y >= height as i64 {
                    continue;
                }
                for tx in 0..bw as i64 {
                    let x = bx + tx;
                    if x < 0 || x >= width as i64 {
                        continue;
                    }
                    luma[y as usize * width + x as usize] = texture[(ty * bw as i64 + tx) as usize];
                }
            }
            Frame::new(width, height, luma)
        })
        .collect()
}
