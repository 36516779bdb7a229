use serde::{Deserialize, Serialize};

use super::{Genotype, Pipeline, PipelineError};
use crate::codec::{CodecConfig, CodecError, CuContext, FrameState, LeafStats, ModeId, ModeResult, CTU_SIZE};
use crate::media::Sequence;
use crate::objectives::FeatureCounts;

/// Decision summary of one CTU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtuReport {
    pub frame: usize,
    pub x: usize,
    pub y: usize,
    pub mode: ModeId,
    pub rate: f64,
    pub distortion: u64,
    pub cost_j: f64,
    pub effort: f64,
    pub leaves: LeafStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub index: usize,
    pub intra: bool,
    pub rate: f64,
    pub distortion: u64,
    pub effort: f64,
    pub features: FeatureCounts,
    pub leaves: LeafStats,
}

/// Everything measured while coding one sequence at one QP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeReport {
    pub sequence: String,
    pub qp: u8,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    /// Coded bits.
    pub total_rate: f64,
    /// Luma SSE over the visible area.
    pub total_distortion: u64,
    /// Visible luma samples over all frames.
    pub num_samples: u64,
    pub effort: f64,
    pub frames: Vec<FrameReport>,
    pub ctus: Vec<CtuReport>,
}

/// Codes `seq` at constant `qp`: frame 0 intra-only, every later frame
/// predicted from the previous reconstruction.
pub fn encode_sequence(
    seq: &Sequence,
    genotype: &Genotype,
    qp: u8,
    config: &CodecConfig,
) -> Result<EncodeReport, PipelineError> {
    encode_sequence_observed(seq, genotype, qp, config, |_, _| {})
}

/// As [`encode_sequence`], calling `observer` with the context and the
/// decision of every CTU just before the decision is committed.
pub fn encode_sequence_observed<F>(
    seq: &Sequence,
    genotype: &Genotype,
    qp: u8,
    config: &CodecConfig,
    mut observer: F,
) -> Result<EncodeReport, PipelineError>
where
    F: FnMut(&CuContext<'_>, &ModeResult),
{
    if qp > 51 {
        return Err(CodecError::OutOfRangeQp(qp as i32).into());
    }
    let mut pipeline = Pipeline::new(genotype.clone())?;
    let mut report = EncodeReport {
        sequence: seq.name().to_owned(),
        qp,
        width: seq.width(),
        height: seq.height(),
        frame_count: seq.frames().len(),
        total_rate: 0.0,
        total_distortion: 0,
        num_samples: 0,
        effort: 0.0,
        frames: Vec::with_capacity(seq.frames().len()),
        ctus: Vec::new(),
    };
    let mut reference = None;
    for (index, frame) in seq.frames().iter().enumerate() {
        let mut state = FrameState::new(frame, reference.take(), config);
        let mut fr = FrameReport {
            index,
            intra: state.is_intra(),
            rate: 0.0,
            distortion: 0,
            effort: 0.0,
            features: FeatureCounts::new(),
            leaves: LeafStats::default(),
        };
        let (pw, ph) = (state.original.width(), state.original.height());
        for y in (0..ph).step_by(CTU_SIZE) {
            for x in (0..pw).step_by(CTU_SIZE) {
                let result = {
                    let ctx = CuContext::new(&state, config, x, y, 0, qp)?;
                    let r = pipeline.decide_cu(&ctx)?;
                    observer(&ctx, &r);
                    r
                };
                fr.rate += result.rd.rate;
                fr.distortion += result.rd.distortion;
                fr.effort += result.effort;
                fr.features += &result.features;
                fr.leaves.merge(&result.leaves);
                report.ctus.push(CtuReport {
                    frame: index,
                    x,
                    y,
                    mode: result.mode,
                    rate: result.rd.rate,
                    distortion: result.rd.distortion,
                    cost_j: result.rd.cost_j,
                    effort: result.effort,
                    leaves: result.leaves,
                });
                state.commit(x, y, &result);
            }
        }
        report.total_rate += fr.rate;
        report.total_distortion += fr.distortion;
        report.effort += fr.effort;
        report.num_samples += (frame.width() * frame.height()) as u64;
        report.frames.push(fr);
        reference = Some(state.into_reference());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{synthesize_sequence, SyntheticKind};

    #[test]
    fn flat_static_second_frame_is_all_skip() {
        let seq = synthesize_sequence(SyntheticKind::Flat, 128, 64, 2, 0).unwrap();
        let cfg = CodecConfig::default();
        let r = encode_sequence(&seq, &Genotype::exhaustive(), 30, &cfg).unwrap();
        let f1 = &r.frames[1];
        assert!(!f1.intra);
        assert_eq!(f1.distortion, 0);
        assert_eq!(f1.leaves.skip_count(), f1.leaves.total());
        assert_eq!(r.total_distortion, 0);
        assert_eq!(r.num_samples, 2 * 128 * 64);
    }

    #[test]
    fn non_multiple_of_ctu_is_padded() {
        let seq = synthesize_sequence(SyntheticKind::Gradient, 72, 64, 2, 1).unwrap();
        let r = encode_sequence(&seq, &Genotype::heuristic(), 30, &CodecConfig::default()).unwrap();
        assert_eq!(r.ctus.len(), 4);
        assert_eq!(r.num_samples, 2 * 72 * 64);
    }

    #[test]
    fn deterministic_reports() {
        let seq = synthesize_sequence(SyntheticKind::MovingBlock, 64, 64, 3, 4).unwrap();
        let cfg = CodecConfig::default();
        let a = encode_sequence(&seq, &Genotype::heuristic(), 20, &cfg).unwrap();
        let b = encode_sequence(&seq, &Genotype::heuristic(), 20, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_qp() {
        let seq = synthesize_sequence(SyntheticKind::Flat, 64, 64, 2, 0).unwrap();
        assert!(encode_sequence(&seq, &Genotype::exhaustive(), 52, &CodecConfig::default()).is_err());
    }
}
