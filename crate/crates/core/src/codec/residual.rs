//! Spatial-domain residual coding with a dead-zone scalar quantizer and an
//! order-0 entropy estimate of the quantized levels.

use super::plane::{sse_region, Block};
use super::CodecError;

/// Coded-block flag cost, paid by every block that can carry a residual.
pub const RESIDUAL_BLOCK_OVERHEAD_BITS: f64 = 1.0;

/// Dead-zone rounding offset of the quantizer.
const DEADZONE_OFFSET: f64 = 1.0 / 3.0;

/// Quantizer step size `2^((qp - 4) / 6)`.
pub fn quant_step(qp: u8) -> f64 {
    ((qp as f64 - 4.0) / 6.0).exp2()
}

/// Length in bits of the signed Exp-Golomb code of `v`.
pub fn signed_exp_golomb_bits(v: i32) -> u32 {
    let code = if v > 0 {
        2 * v as u64 - 1
    } else {
        2 * (-(v as i64)) as u64
    };
    2 * (64 - (code + 1).leading_zeros() - 1) + 1
}

/// Result of coding one residual block.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCoding {
    pub rate: f64,
    pub reconstruction: Block,
    pub distortion: u64,
    /// Number of non-zero quantized levels.
    pub nonzero: u64,
}

/// Quantizes `original - prediction` and reconstructs.
///
/// Rate is the order-0 empirical entropy of the levels times their count, plus
/// the Exp-Golomb length of every distinct non-zero level (the alphabet has to
/// be signalled), plus [`RESIDUAL_BLOCK_OVERHEAD_BITS`].
pub fn code_residual(original: &Block, prediction: &Block, qp: u8) -> Result<ResidualCoding, CodecError> {
    if (original.width, original.height) != (prediction.width, prediction.height) {
        return Err(CodecError::DimensionMismatch {
            a: (original.width, original.height),
            b: (prediction.width, prediction.height),
        });
    }
    Ok(code_residual_region(
        original,
        prediction,
        qp,
        original.width,
        original.height,
    ))
}

/// As [`code_residual`], restricted to the visible top-left `vw`x`vh` region;
/// samples outside it reconstruct to the prediction and cost nothing.
pub(crate) fn code_residual_region(
    original: &Block,
    prediction: &Block,
    qp: u8,
    vw: usize,
    vh: usize,
) -> ResidualCoding {
    let step = quant_step(qp);
    let mut recon = prediction.clone();
    let mut levels: Vec<i32> = Vec::new();
    for y in 0..vh {
        for x in 0..vw {
            let i = y * original.width + x;
            let r = original.data[i] as f64 - prediction.data[i] as f64;
            let mag = (r.abs() / step + DEADZONE_OFFSET).floor();
            let level = (mag as i32) * if r < 0.0 { -1 } else { 1 };
            if level != 0 {
                levels.push(level);
                let rec = prediction.data[i] as f64 + (level as f64 * step).round();
                recon.data[i] = rec.clamp(0.0, 255.0) as u8;
            }
        }
    }
    let count = (vw * vh) as f64;
    let nonzero = levels.len() as u64;
    let mut rate = RESIDUAL_BLOCK_OVERHEAD_BITS;
    if nonzero > 0 {
        let zeros = count - nonzero as f64;
        if zeros > 0.0 {
            rate -= zeros * (zeros / count).log2();
        }
        levels.sort_unstable();
        for run in levels.chunk_by(|a, b| a == b) {
            let c = run.len() as f64;
            rate -= c * (c / count).log2();
            rate += signed_exp_golomb_bits(run[0]) as f64;
        }
    }
    let distortion = sse_region(original, &recon, vw, vh);
    ResidualCoding {
        rate,
        reconstruction: recon,
        distortion,
        nonzero,
    }
}
