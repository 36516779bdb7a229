use super::plane::Block;
use super::{CodecError, CuContext, LeafStats, ModeId, ModeResult, RdCost};
use crate::objectives::{FeatureCounts, FeatureId};

/// Runs the complete mode decision for a sub-CU.
pub trait SubCuDecider {
    fn decide(&mut self, ctx: &CuContext<'_>) -> Result<ModeResult, CodecError>;
}

impl<F> SubCuDecider for F
where
    F: FnMut(&CuContext<'_>) -> Result<ModeResult, CodecError>,
{
    fn decide(&mut self, ctx: &CuContext<'_>) -> Result<ModeResult, CodecError> {
        self(ctx)
    }
}

/// Quadtree split: decides the four sub-CUs at `depth + 1` in z-order and
/// aggregates them with one split flag. `J` is the sum of the sub-CU costs
/// plus the flag cost, which keeps it monotone in every sub-CU cost.
pub fn eval_split(
    ctx: &CuContext<'_>,
    decider: &mut dyn SubCuDecider,
) -> Result<ModeResult, CodecError> {
    ctx.require_valid(ModeId::SPLIT)?;
    let half = ctx.size / 2;
    let flag_bits = ctx.config.headers.split_flag;

    let mut rate = flag_bits;
    let mut distortion = 0u64;
    let mut cost_j = 0.0;
    let mut effort = 0.0;
    let mut features: FeatureCounts = [
        (FeatureId::SplitFlag, 1),
        (FeatureId::Bits, flag_bits.round() as u64),
    ]
    .into_iter()
    .collect();
    let mut recon = Block::filled(ctx.size, ctx.size, 0);
    let mut motion = Vec::new();
    let mut leaves = LeafStats::default();

    for (ox, oy) in [(0, 0), (half, 0), (0, half), (half, half)] {
        let sub = CuContext::new(
            ctx.frame,
            ctx.config,
            ctx.x + ox,
            ctx.y + oy,
            ctx.depth + 1,
            ctx.qp,
        )?;
        let r = decider.decide(&sub)?;
        rate += r.rd.rate;
        distortion += r.rd.distortion;
        cost_j += r.rd.cost_j;
        effort += r.effort;
        features += &r.features;
        recon.paste(ox, oy, &r.reconstruction);
        motion.extend(r.motion);
        leaves.merge(&r.leaves);
    }
    cost_j += ctx.lambda * flag_bits;
    Ok(ModeResult {
        mode: ModeId::SPLIT,
        rd: RdCost {
            rate,
            distortion,
            cost_j,
        },
        reconstruction: recon,
        features,
        effort,
        motion,
        leaves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{eval_merge_2nx2n, CodecConfig, FrameState};
    use crate::media::Frame;

    #[test]
    fn flat_static_split_is_four_skips() {
        let f = Frame::filled(64, 64, 200).unwrap();
        let cfg = CodecConfig::default();
        let refp = FrameState::new(&f, None, &cfg).original;
        let st = FrameState::new(&f, Some(refp), &cfg);
        let ctx = CuContext::new(&st, &cfg, 0, 0, 1, 30).unwrap();
        let mut decider = |c: &CuContext<'_>| eval_merge_2nx2n(c);
        let r = eval_split(&ctx, &mut decider).unwrap();
        assert_eq!(r.rd.distortion, 0);
        assert_eq!(r.leaves.skip_count(), 4);
        assert_eq!(r.rd.rate, 4.0 * cfg.headers.skip + cfg.headers.split_flag);
        let rel = (r.rd.cost_j - (r.rd.distortion as f64 + ctx.lambda * r.rd.rate)).abs() / r.rd.cost_j;
        assert!(rel < 1e-9);
        assert_eq!(r.features.get(FeatureId::Skip(16)), 4);
        assert_eq!(r.features.get(FeatureId::SplitFlag), 1);
    }

    #[test]
    fn split_at_depth_three_is_rejected() {
        let f = Frame::filled(64, 64, 0).unwrap();
        let cfg = CodecConfig::default();
        let st = FrameState::new(&f, None, &cfg);
        let ctx = CuContext::new(&st, &cfg, 0, 0, 3, 30).unwrap();
        let mut decider = |c: &CuContext<'_>| eval_merge_2nx2n(c);
        assert!(matches!(
            eval_split(&ctx, &mut decider),
            Err(CodecError::InvalidDepthForMode { depth: 3, .. })
        ));
    }
}
