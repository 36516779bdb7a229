use super::plane::{sse_region, sse_row, Block, Plane};
use super::residual::{code_residual_region, signed_exp_golomb_bits};
use super::{
    CodecError, CuContext, LeafStats, ModeId, ModeResult, MotionEntry, Mv, Partition, RdCost,
};
use crate::objectives::{FeatureCounts, FeatureId};

/// Outcome of a full-pel block-matching search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSearch {
    pub mv: Mv,
    /// `SSE + lambda * mvd_bits` of the chosen vector.
    pub cost: f64,
    pub sse: u64,
    /// Nominal number of candidate positions, `(2 * range + 1)^2`.
    pub positions: usize,
}

fn mvd_bits(mv: Mv, predictor: Mv) -> f64 {
    (signed_exp_golomb_bits(mv.dx - predictor.dx) + signed_exp_golomb_bits(mv.dy - predictor.dy))
        as f64
}

/// Exhaustive full-pel search in `[-range, range]^2` around the zero vector,
/// minimizing `SSE + lambda * mvd_bits` over the visible `vw`x`vh` part of the
/// block at `(x, y)`. Ties go to the smaller vector magnitude, then to the
/// earlier position in raster order.
#[allow(clippy::too_many_arguments)]
pub fn motion_search(
    reference: &Plane,
    original: &Block,
    x: usize,
    y: usize,
    visible: (usize, usize),
    range: i32,
    predictor: Mv,
    lambda: f64,
) -> MotionSearch {
    let (vw, vh) = visible;
    let mut best = MotionSearch {
        mv: Mv::ZERO,
        cost: f64::INFINITY,
        sse: u64::MAX,
        positions: ((2 * range + 1) * (2 * range + 1)) as usize,
    };
    for dy in -range..=range {
        for dx in -range..=range {
            let mv = Mv::new(dx, dy);
            let rate_cost = lambda * mvd_bits(mv, predictor);
            if rate_cost > best.cost {
                continue;
            }
            let mut sse = 0u64;
            let mut abandoned = false;
            for r in 0..vh {
                let rr = reference.row(x as isize + dx as isize, (y + r) as isize + dy as isize, vw);
                sse += sse_row(&original.row(r)[..vw], rr);
                if sse as f64 + rate_cost > best.cost {
                    abandoned = true;
                    break;
                }
            }
            if abandoned {
                continue;
            }
            let cost = sse as f64 + rate_cost;
            let better = cost < best.cost
                || (cost == best.cost && mv.magnitude_sq() < best.mv.magnitude_sq());
            if better {
                best.mv = mv;
                best.cost = cost;
                best.sse = sse;
            }
        }
    }
    best
}

fn reference<'a>(ctx: &'a CuContext<'_>) -> Result<&'a Plane, CodecError> {
    ctx.frame.reference.as_ref().ok_or(CodecError::MissingReference)
}

fn merge_candidates(ctx: &CuContext<'_>) -> Vec<Mv> {
    if ctx.neighbor_motion.is_empty() {
        vec![Mv::ZERO]
    } else {
        ctx.neighbor_motion.clone()
    }
}

fn merge_index_bits(candidates: usize) -> f64 {
    if candidates > 1 {
        1.0
    } else {
        0.0
    }
}

fn mvd_predictor(ctx: &CuContext<'_>) -> Mv {
    ctx.neighbor_motion.first().copied().unwrap_or(Mv::ZERO)
}

/// Best inter coding of one prediction block: merge candidates with a coded
/// residual, then motion search. Earlier alternatives win ties.
struct PuChoice {
    rd: RdCost,
    reconstruction: Block,
    mv: Mv,
    nonzero: u64,
}

fn code_pu(
    ctx: &CuContext<'_>,
    refp: &Plane,
    rect: (usize, usize, usize, usize),
    allow_merge: bool,
    allow_search: bool,
) -> (PuChoice, f64) {
    let (px, py, w, h) = rect;
    let (ax, ay) = (ctx.x + px, ctx.y + py);
    let original = ctx.frame.original.block(ax as isize, ay as isize, w, h);
    let visible = ctx.frame.visible_extent(ax, ay, w, h);
    let headers = &ctx.config.headers;
    let area = (w * h) as f64;
    let coded_area = (visible.0 * visible.1) as f64;
    let mut effort = 0.0;
    let mut best: Option<PuChoice> = None;
    let mut consider = |c: PuChoice| {
        if best.as_ref().is_none_or(|b| c.rd.cost_j < b.rd.cost_j) {
            best = Some(c);
        }
    };

    if allow_merge {
        let cands = merge_candidates(ctx);
        let idx_bits = merge_index_bits(cands.len());
        for mv in cands {
            let pred = refp.block(ax as isize + mv.dx as isize, ay as isize + mv.dy as isize, w, h);
            let coded = code_residual_region(&original, &pred, ctx.qp, visible.0, visible.1);
            effort += area + coded_area;
            consider(PuChoice {
                rd: RdCost::new(headers.merge + idx_bits + coded.rate, coded.distortion, ctx.lambda),
                reconstruction: coded.reconstruction,
                mv,
                nonzero: coded.nonzero,
            });
        }
    }
    if allow_search {
        let predictor = mvd_predictor(ctx);
        let found = motion_search(
            refp,
            &original,
            ax,
            ay,
            visible,
            ctx.config.search_range as i32,
            predictor,
            ctx.lambda,
        );
        let mv = found.mv;
        let pred = refp.block(ax as isize + mv.dx as isize, ay as isize + mv.dy as isize, w, h);
        let coded = code_residual_region(&original, &pred, ctx.qp, visible.0, visible.1);
        effort += found.positions as f64 * area + area + coded_area;
        consider(PuChoice {
            rd: RdCost::new(
                headers.inter + mvd_bits(mv, predictor) + coded.rate,
                coded.distortion,
                ctx.lambda,
            ),
            reconstruction: coded.reconstruction,
            mv,
            nonzero: coded.nonzero,
        });
    }
    (best.expect("at least one inter alternative"), effort)
}

fn inter_features(blocks: &[(usize, usize)], nonzero: u64, rate: f64) -> FeatureCounts {
    let mut f: FeatureCounts = blocks
        .iter()
        .map(|&(w, h)| {
            (
                FeatureId::MotionComp {
                    width: w as u8,
                    height: h as u8,
                },
                1,
            )
        })
        .collect();
    f.add(FeatureId::Coefficient, nonzero);
    f.add(FeatureId::Bits, rate.round() as u64);
    f
}

/// Motion search over the whole CU with a coded motion vector difference.
pub fn eval_inter_2nx2n(ctx: &CuContext<'_>) -> Result<ModeResult, CodecError> {
    ctx.require_valid(ModeId::INTER_2NX2N)?;
    let refp = reference(ctx)?;
    let (choice, effort) = code_pu(ctx, refp, (0, 0, ctx.size, ctx.size), false, true);
    Ok(ModeResult {
        mode: ModeId::INTER_2NX2N,
        features: inter_features(&[(ctx.size, ctx.size)], choice.nonzero, choice.rd.rate),
        rd: choice.rd,
        reconstruction: choice.reconstruction,
        effort,
        motion: vec![MotionEntry {
            x: ctx.x,
            y: ctx.y,
            width: ctx.size,
            height: ctx.size,
            mv: Some(choice.mv),
        }],
        leaves: LeafStats::single(ctx.depth, ModeId::INTER_2NX2N, false),
    })
}

/// Merge and skip over the neighbour-derived candidates (the zero vector when
/// there are none). Skip codes neither residual nor motion vector difference.
pub fn eval_merge_2nx2n(ctx: &CuContext<'_>) -> Result<ModeResult, CodecError> {
    ctx.require_valid(ModeId::MERGE_2NX2N)?;
    let refp = reference(ctx)?;
    let size = ctx.size;
    let original = ctx.original_block();
    let (vw, vh) = ctx.visible_extent();
    let cands = merge_candidates(ctx);
    let idx_bits = merge_index_bits(cands.len());
    let headers = &ctx.config.headers;
    let area = (size * size) as f64;

    let mut effort = 0.0;
    let mut best: Option<(RdCost, Block, Mv, bool, u64)> = None;
    for mv in cands {
        let pred = refp.block(ctx.x as isize + mv.dx as isize, ctx.y as isize + mv.dy as isize, size, size);
        let skip_rd = RdCost::new(headers.skip + idx_bits, sse_region(&original, &pred, vw, vh), ctx.lambda);
        let coded = code_residual_region(&original, &pred, ctx.qp, vw, vh);
        let merge_rd = RdCost::new(headers.merge + idx_bits + coded.rate, coded.distortion, ctx.lambda);
        effort += 2.0 * area + (vw * vh) as f64;
        if best.as_ref().is_none_or(|b| skip_rd.cost_j < b.0.cost_j) {
            best = Some((skip_rd, pred, mv, true, 0));
        }
        if merge_rd.cost_j < best.as_ref().unwrap().0.cost_j {
            best = Some((merge_rd, coded.reconstruction, mv, false, coded.nonzero));
        }
    }
    let (rd, reconstruction, mv, skip, nonzero) = best.expect("non-empty candidate list");
    let features = if skip {
        [
            (FeatureId::Skip(size as u8), 1),
            (FeatureId::Bits, rd.rate.round() as u64),
        ]
        .into_iter()
        .collect()
    } else {
        inter_features(&[(size, size)], nonzero, rd.rate)
    };
    Ok(ModeResult {
        mode: ModeId::MERGE_2NX2N,
        rd,
        reconstruction,
        features,
        effort,
        motion: vec![MotionEntry {
            x: ctx.x,
            y: ctx.y,
            width: size,
            height: size,
            mv: Some(mv),
        }],
        leaves: LeafStats::single(ctx.depth, ModeId::MERGE_2NX2N, skip),
    })
}

/// Two-PU inter coding; each PU takes the cheaper of merge and motion search.
pub fn eval_inter_partitioned(
    ctx: &CuContext<'_>,
    partition: Partition,
) -> Result<ModeResult, CodecError> {
    if partition.is_asymmetric() && ctx.depth > 2 {
        return Err(CodecError::InvalidDepthForPartition {
            partition,
            depth: ctx.depth,
        });
    }
    let mode = partition.mode();
    ctx.require_valid(mode)?;
    let refp = reference(ctx)?;
    let headers = &ctx.config.headers;
    let mut rate = if partition.is_asymmetric() {
        headers.partition_asymmetric
    } else {
        headers.partition_symmetric
    };
    let mut distortion = 0u64;
    let mut effort = 0.0;
    let mut nonzero = 0u64;
    let mut recon = Block::filled(ctx.size, ctx.size, 0);
    let mut motion = Vec::with_capacity(2);
    let rects = partition.rects(ctx.size);
    for rect in rects {
        let (choice, e) = code_pu(ctx, refp, rect, true, true);
        rate += choice.rd.rate;
        distortion += choice.rd.distortion;
        effort += e;
        nonzero += choice.nonzero;
        recon.paste(rect.0, rect.1, &choice.reconstruction);
        motion.push(MotionEntry {
            x: ctx.x + rect.0,
            y: ctx.y + rect.1,
            width: rect.2,
            height: rect.3,
            mv: Some(choice.mv),
        });
    }
    let dims: Vec<(usize, usize)> = rects.iter().map(|r| (r.2, r.3)).collect();
    Ok(ModeResult {
        mode,
        rd: RdCost::new(rate, distortion, ctx.lambda),
        reconstruction: recon,
        features: inter_features(&dims, nonzero, rate),
        effort,
        motion,
        leaves: LeafStats::single(ctx.depth, mode, false),
    })
}
