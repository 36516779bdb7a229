use serde::{Deserialize, Serialize};

use super::plane::Block;
use super::residual::code_residual_region;
use super::{CodecError, CuContext, LeafStats, ModeId, ModeResult, MotionEntry, RdCost};
use crate::objectives::{FeatureCounts, FeatureId};

/// Mid-gray used when no reference samples are available.
const MID_GRAY: u8 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntraPredictor {
    /// Mean of the available reference samples.
    Dc,
    /// Bilinear plane through the top row and left column.
    Planar,
}

/// Forms a `w`x`h` intra prediction from optional top and left reference samples.
pub fn predict_intra(
    kind: IntraPredictor,
    top: Option<&[u8]>,
    left: Option<&[u8]>,
    w: usize,
    h: usize,
) -> Block {
    match kind {
        IntraPredictor::Dc => {
            let (sum, n) = top
                .into_iter()
                .chain(left)
                .flatten()
                .fold((0u32, 0u32), |(s, n), &v| (s + v as u32, n + 1));
            let dc = if n == 0 {
                MID_GRAY
            } else {
                ((sum + n / 2) / n) as u8
            };
            Block::filled(w, h, dc)
        }
        IntraPredictor::Planar => match (top, left) {
            (Some(t), Some(l)) => {
                let (tr, bl) = (t[w - 1] as u32, l[h - 1] as u32);
                let (w32, h32) = (w as u32, h as u32);
                Block::from_fn(w, h, |x, y| {
                    let (x, y) = (x as u32, y as u32);
                    let hor = ((w32 - 1 - x) * l[y as usize] as u32 + (x + 1) * tr) * h32;
                    let ver = ((h32 - 1 - y) * t[x as usize] as u32 + (y + 1) * bl) * w32;
                    let den = 2 * w32 * h32;
                    ((hor + ver + den / 2) / den) as u8
                })
            }
            (Some(t), None) => Block::from_fn(w, h, |x, _| t[x]),
            (None, Some(l)) => Block::from_fn(w, h, |_, y| l[y]),
            (None, None) => Block::filled(w, h, MID_GRAY),
        },
    }
}

struct IntraChoice {
    rd: RdCost,
    reconstruction: Block,
    nonzero: u64,
}

/// Tries every configured predictor on one block and keeps the cheapest;
/// the earlier predictor wins ties. Returns the choice and the effort spent.
fn best_intra(
    ctx: &CuContext<'_>,
    original: &Block,
    top: Option<&[u8]>,
    left: Option<&[u8]>,
    visible: (usize, usize),
) -> (IntraChoice, f64) {
    let (w, h) = (original.width, original.height);
    let mut best: Option<IntraChoice> = None;
    let mut effort = 0.0;
    for &kind in &ctx.config.intra_predictors {
        let pred = predict_intra(kind, top, left, w, h);
        let coded = code_residual_region(original, &pred, ctx.qp, visible.0, visible.1);
        effort += (w * h + visible.0 * visible.1) as f64;
        let rd = RdCost::new(ctx.config.headers.intra + coded.rate, coded.distortion, ctx.lambda);
        if best.as_ref().is_none_or(|b| rd.cost_j < b.rd.cost_j) {
            best = Some(IntraChoice {
                rd,
                reconstruction: coded.reconstruction,
                nonzero: coded.nonzero,
            });
        }
    }
    (best.expect("at least one intra predictor configured"), effort)
}

fn intra_features(size: usize, nonzero: u64, rate: f64) -> FeatureCounts {
    [
        (FeatureId::IntraPred(size as u8), 1),
        (FeatureId::Coefficient, nonzero),
        (FeatureId::Bits, rate.round() as u64),
    ]
    .into_iter()
    .collect()
}

/// Intra prediction of the whole CU.
pub fn eval_intra_2nx2n(ctx: &CuContext<'_>) -> Result<ModeResult, CodecError> {
    ctx.require_valid(ModeId::INTRA_2NX2N)?;
    if ctx.config.intra_predictors.is_empty() {
        return Err(CodecError::InvalidContext("no intra predictors configured".into()));
    }
    let top = ctx.intra_top();
    let left = ctx.intra_left();
    let original = ctx.original_block();
    let (choice, effort) = best_intra(
        ctx,
        &original,
        top.as_deref(),
        left.as_deref(),
        ctx.visible_extent(),
    );
    Ok(ModeResult {
        mode: ModeId::INTRA_2NX2N,
        rd: choice.rd,
        features: intra_features(ctx.size, choice.nonzero, choice.rd.rate),
        reconstruction: choice.reconstruction,
        effort,
        motion: vec![intra_motion(ctx)],
        leaves: LeafStats::single(ctx.depth, ModeId::INTRA_2NX2N, false),
    })
}

fn intra_motion(ctx: &CuContext<'_>) -> MotionEntry {
    MotionEntry {
        x: ctx.x,
        y: ctx.y,
        width: ctx.size,
        height: ctx.size,
        mv: None,
    }
}

/// Four 4x4 intra PUs of an 8x8 CU, reconstructed in z-order so that later
/// PUs predict from earlier ones.
pub fn eval_intra_nxn(ctx: &CuContext<'_>) -> Result<ModeResult, CodecError> {
    ctx.require_valid(ModeId::INTRA_NXN)?;
    if ctx.config.intra_predictors.is_empty() {
        return Err(CodecError::InvalidContext("no intra predictors configured".into()));
    }
    let half = ctx.size / 2;
    let cu_top = ctx.intra_top();
    let cu_left = ctx.intra_left();
    let original = ctx.original_block();
    let (vw, vh) = ctx.visible_extent();

    let mut recon = Block::filled(ctx.size, ctx.size, 0);
    let mut rate = 0.0;
    let mut distortion = 0u64;
    let mut effort = 0.0;
    let mut nonzero = 0u64;
    for (px, py) in [(0, 0), (half, 0), (0, half), (half, half)] {
        let top: Option<Vec<u8>> = if py == 0 {
            cu_top.as_ref().map(|t| t[px..px + half].to_vec())
        } else {
            Some(recon.row(py - 1)[px..px + half].to_vec())
        };
        let left: Option<Vec<u8>> = if px == 0 {
            cu_left.as_ref().map(|l| l[py..py + half].to_vec())
        } else {
            Some((py..py + half).map(|y| recon.get(px - 1, y)).collect())
        };
        let pu = original.sub_block(px, py, half, half);
        let visible = (vw.saturating_sub(px).min(half), vh.saturating_sub(py).min(half));
        let (choice, e) = best_intra(ctx, &pu, top.as_deref(), left.as_deref(), visible);
        recon.paste(px, py, &choice.reconstruction);
        rate += choice.rd.rate;
        distortion += choice.rd.distortion;
        effort += e;
        nonzero += choice.nonzero;
    }
    let mut features = intra_features(half, nonzero, rate);
    features.add(FeatureId::IntraPred(half as u8), 3);
    Ok(ModeResult {
        mode: ModeId::INTRA_NXN,
        rd: RdCost::new(rate, distortion, ctx.lambda),
        reconstruction: recon,
        features,
        effort,
        motion: vec![intra_motion(ctx)],
        leaves: LeafStats::single(ctx.depth, ModeId::INTRA_NXN, false),
    })
}
