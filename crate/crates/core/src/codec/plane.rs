//! Sample storage: bordered planes for whole frames, small blocks for CUs.

use serde::{Deserialize, Serialize};

use crate::media::Frame;

/// CTU edge length.
pub const CTU_SIZE: usize = 64;

/// A frame-sized sample plane with an edge-replicated border so that motion
/// compensation can address samples outside the picture without clamping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    border: usize,
    stride: usize,
    data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize, border: usize) -> Self {
        let stride = width + 2 * border;
        Plane {
            width,
            height,
            border,
            stride,
            data: vec![0; stride * (height + 2 * border)],
        }
    }

    /// Copies `frame` and pads it to a multiple of [`CTU_SIZE`] by edge
    /// replication, then fills the border.
    pub fn from_frame_padded(frame: &Frame, border: usize) -> Self {
        let pw = frame.width().div_ceil(CTU_SIZE) * CTU_SIZE;
        let ph = frame.height().div_ceil(CTU_SIZE) * CTU_SIZE;
        let mut plane = Plane::new(pw, ph, border);
        for y in 0..ph {
            let sy = y.min(frame.height() - 1);
            for x in 0..pw {
                let sx = x.min(frame.width() - 1);
                plane.set(x, y, frame.sample(sx, sy));
            }
        }
        plane.extend_borders();
        plane
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn border(&self) -> usize {
        self.border
    }

    #[inline]
    fn offset(&self, x: isize, y: isize) -> usize {
        let b = self.border as isize;
        debug_assert!(x >= -b && x < (self.width + self.border) as isize);
        debug_assert!(y >= -b && y < (self.height + self.border) as isize);
        ((y + b) as usize) * self.stride + (x + b) as usize
    }

    #[inline]
    pub fn get(&self, x: isize, y: isize) -> u8 {
        self.data[self.offset(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        let o = self.offset(x as isize, y as isize);
        self.data[o] = v;
    }

    /// `len` samples of row `y` starting at column `x`.
    #[inline]
    pub fn row(&self, x: isize, y: isize, len: usize) -> &[u8] {
        let o = self.offset(x, y);
        &self.data[o..o + len]
    }

    /// Replicates the picture edges into the border.
    pub fn extend_borders(&mut self) {
        let (w, h, b) = (self.width, self.height, self.border);
        for y in 0..h {
            let row = (y + b) * self.stride;
            let left = self.data[row + b];
            let right = self.data[row + b + w - 1];
            self.data[row..row + b].fill(left);
            self.data[row + b + w..row + 2 * b + w].fill(right);
        }
        let first = b * self.stride;
        let last = (b + h - 1) * self.stride;
        for y in 0..b {
            self.data.copy_within(first..first + self.stride, y * self.stride);
            self.data
                .copy_within(last..last + self.stride, (b + h + y) * self.stride);
        }
    }

    /// Copies a `w`x`h` block at `(x, y)`; coordinates may reach into the border.
    pub fn block(&self, x: isize, y: isize, w: usize, h: usize) -> Block {
        let mut data = Vec::with_capacity(w * h);
        for r in 0..h {
            data.extend_from_slice(self.row(x, y + r as isize, w));
        }
        Block { width: w, height: h, data }
    }

    pub fn write_block(&mut self, x: usize, y: usize, block: &Block) {
        for r in 0..block.height {
            let o = self.offset(x as isize, (y + r) as isize);
            self.data[o..o + block.width].copy_from_slice(block.row(r));
        }
    }
}

/// A small row-major block of 8-bit samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Block {
    pub fn filled(width: usize, height: usize, v: u8) -> Self {
        Block {
            width,
            height,
            data: vec![v; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Block { width, height, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Copies `src` into this block at `(x, y)`.
    pub fn paste(&mut self, x: usize, y: usize, src: &Block) {
        for r in 0..src.height {
            let o = (y + r) * self.width + x;
            self.data[o..o + src.width].copy_from_slice(src.row(r));
        }
    }

    pub fn sub_block(&self, x: usize, y: usize, w: usize, h: usize) -> Block {
        Block::from_fn(w, h, |bx, by| self.get(x + bx, y + by))
    }
}

/// Sum of squared differences over the top-left `vw`x`vh` region.
pub fn sse_region(a: &Block, b: &Block, vw: usize, vh: usize) -> u64 {
    debug_assert_eq!((a.width, a.height), (b.width, b.height));
    (0..vh)
        .map(|y| sse_row(&a.row(y)[..vw], &b.row(y)[..vw]))
        .sum()
}

#[inline]
pub fn sse_row(a: &[u8], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&p, &q)| {
            let d = p as i32 - q as i32;
            (d * d) as u32
        })
        .sum::<u32>() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padding_replicates_edges() {
        let f = Frame::new(8, 8, (0..64).map(|v| v as u8).collect()).unwrap();
        let p = Plane::from_frame_padded(&f, 4);
        assert_eq!((p.width(), p.height()), (64, 64));
        assert_eq!(p.get(63, 0), 7);
        assert_eq!(p.get(0, 63), 56);
        assert_eq!(p.get(-4, -4), 0);
        assert_eq!(p.get(67, 67), 63);
    }

    #[test]
    fn block_round_trip() {
        let mut p = Plane::new(16, 16, 2);
        let b = Block::from_fn(4, 4, |x, y| (x * 10 + y) as u8);
        p.write_block(4, 8, &b);
        assert_eq!(p.block(4, 8, 4, 4), b);
        assert_eq!(sse_region(&b, &Block::filled(4, 4, 0), 4, 4), b.data.iter().map(|&v| (v as u64).pow(2)).sum());
    }
}
