//! Guarded mode decision for one CU, and whole-sequence encoding on top of it.
//!
//! [`Pipeline::decide_cu`] walks the order vector of the CU's depth left to
//! right. A position runs when its guard is [`Guard::Always`] or names the
//! mode that currently has the lowest cost; the cheaper result replaces the
//! best one only on a strictly lower cost, so the earlier position wins ties.

mod encode;
mod genotype;

pub use encode::{encode_sequence, encode_sequence_observed, CtuReport, EncodeReport, FrameReport};
pub use genotype::{
    random_guard, Genotype, Guard, GuardVector, OrderVector, ParseError, Violation, DEPTHS,
    UNGUARDED_PREFIX,
};

use thiserror::Error;

use crate::codec::{eval_mode, eval_split, CodecError, CuContext, ModeId, ModeResult, SubCuDecider};

/// Effort charged for one guard comparison.
pub const GUARD_CHECK_EFFORT: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid genotype: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGenotype(Vec<Violation>),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// One visited order position of one CU decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub depth: u8,
    pub x: usize,
    pub y: usize,
    pub position: usize,
    pub mode: ModeId,
    /// Best mode before the guard was checked.
    pub best_before: Option<ModeId>,
    pub evaluated: bool,
    /// Cost of the evaluation, when it ran.
    pub cost_j: Option<f64>,
    /// Set for the Intra2Nx2N fallback of an intra picture in which no
    /// position was runnable.
    pub forced: bool,
}

/// Mode-decision engine for one genotype.
#[derive(Debug, Clone)]
pub struct Pipeline {
    genotype: Genotype,
    trace: Option<Vec<TraceEvent>>,
}

impl Pipeline {
    pub fn new(genotype: Genotype) -> Result<Self, PipelineError> {
        let violations = genotype.validate();
        if !violations.is_empty() {
            return Err(PipelineError::InvalidGenotype(violations));
        }
        Ok(Pipeline {
            genotype,
            trace: None,
        })
    }

    /// As [`Pipeline::new`], additionally recording every visited position.
    pub fn with_trace(genotype: Genotype) -> Result<Self, PipelineError> {
        let mut p = Self::new(genotype)?;
        p.trace = Some(Vec::new());
        Ok(p)
    }

    pub fn genotype(&self) -> &Genotype {
        &self.genotype
    }

    /// Recorded events, in visiting order, since the last call.
    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn record(&mut self, ev: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(ev);
        }
    }

    /// Decides one CU. The returned effort covers every evaluated mode,
    /// including losing ones and nested sub-CU decisions, plus the guard checks.
    ///
    /// In an intra picture inter modes are passed over without touching the
    /// best-mode state; if nothing ran, Intra2Nx2N is evaluated.
    pub fn decide_cu(&mut self, ctx: &CuContext<'_>) -> Result<ModeResult, CodecError> {
        let depth = ctx.depth;
        let intra_only = ctx.frame.is_intra();
        let n = self.genotype.order(depth).len();
        let mut best: Option<ModeResult> = None;
        let mut effort = 0.0;

        for position in 0..n {
            let mode = self.genotype.order(depth)[position];
            let guard = self.genotype.guards(depth)[position];
            let best_before = best.as_ref().map(|b| b.mode);
            let pass = match guard {
                Guard::Always => true,
                Guard::RequireBest(target) => {
                    effort += GUARD_CHECK_EFFORT;
                    best_before == Some(target)
                }
            };
            let runnable = pass && (!intra_only || mode.is_intra_capable());
            let result = if runnable {
                Some(if mode == ModeId::SPLIT {
                    eval_split(ctx, self)?
                } else {
                    eval_mode(ctx, mode)?
                })
            } else {
                None
            };
            self.record(TraceEvent {
                depth,
                x: ctx.x,
                y: ctx.y,
                position,
                mode,
                best_before,
                evaluated: runnable,
                cost_j: result.as_ref().map(|r| r.rd.cost_j),
                forced: false,
            });
            if let Some(r) = result {
                effort += r.effort;
                if best.as_ref().is_none_or(|b| r.rd.cost_j < b.rd.cost_j) {
                    best = Some(r);
                }
            }
        }

        let mut best = match best {
            Some(b) => b,
            None => {
                let r = eval_mode(ctx, ModeId::INTRA_2NX2N)?;
                self.record(TraceEvent {
                    depth,
                    x: ctx.x,
                    y: ctx.y,
                    position: n,
                    mode: ModeId::INTRA_2NX2N,
                    best_before: None,
                    evaluated: true,
                    cost_j: Some(r.rd.cost_j),
                    forced: true,
                });
                effort += r.effort;
                r
            }
        };
        best.effort = effort;
        Ok(best)
    }
}

impl SubCuDecider for Pipeline {
    fn decide(&mut self, ctx: &CuContext<'_>) -> Result<ModeResult, CodecError> {
        self.decide_cu(ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::genotype::tests::PB_TEXT;
    use super::*;
    use crate::codec::{CodecConfig, FrameState};
    use crate::media::{synthesize_sequence, Frame, SyntheticKind};

    fn inter_state(seed: u64) -> FrameState {
        let seq = synthesize_sequence(SyntheticKind::MovingBlock, 64, 64, 2, seed).unwrap();
        let cfg = CodecConfig::default();
        let refp = FrameState::new(&seq.frames()[0], None, &cfg).original;
        FrameState::new(&seq.frames()[1], Some(refp), &cfg)
    }

    #[test]
    fn pb_depth_three_guards() {
        let g: Genotype = PB_TEXT.parse().unwrap();
        let st = inter_state(3);
        let cfg = CodecConfig::default();
        let ctx = CuContext::new(&st, &cfg, 8, 8, 3, 30).unwrap();
        let mut p = Pipeline::with_trace(g).unwrap();
        p.decide_cu(&ctx).unwrap();
        let trace = p.take_trace();
        assert_eq!(trace.len(), 6);
        assert!(trace[0].evaluated && trace[1].evaluated);
        // O(3)={1,3,2,4,0,9}, G(3)={-,-,1,3,2,4}
        let targets = [None, None, Some(1), Some(3), Some(2), Some(4)];
        for (ev, t) in trace.iter().zip(targets) {
            if let Some(t) = t {
                assert_eq!(ev.evaluated, ev.best_before.map(|m| m.index()) == Some(t));
            }
        }
    }

    #[test]
    fn unsatisfiable_guards_leave_two_evaluations() {
        let mut g = Genotype::exhaustive();
        for i in 2..6 {
            g.guards[3].guards[i] = Guard::RequireBest(ModeId::INTRA_NXN);
        }
        // mode 9 sits at position 5 and can never become best before it runs
        let st = inter_state(5);
        let cfg = CodecConfig::default();
        let ctx = CuContext::new(&st, &cfg, 16, 16, 3, 22).unwrap();
        let mut p = Pipeline::with_trace(g).unwrap();
        let r = p.decide_cu(&ctx).unwrap();
        let trace = p.take_trace();
        assert_eq!(trace.iter().filter(|e| e.evaluated).count(), 2);
        assert!(r.effort > 0.0);
    }

    #[test]
    fn invalid_genotype_is_rejected() {
        let mut g = Genotype::exhaustive();
        g.orders[0].order.swap(0, 9);
        g.orders[0].order[0] = ModeId::INTRA_NXN;
        assert!(matches!(Pipeline::new(g), Err(PipelineError::InvalidGenotype(_))));
    }

    #[test]
    fn intra_picture_forces_intra_when_nothing_runs() {
        let f = Frame::filled(64, 64, 77).unwrap();
        let cfg = CodecConfig::default();
        let st = FrameState::new(&f, None, &cfg);
        let mut g = Genotype::exhaustive();
        // depth 3 leading inter modes, everything else guarded on inter
        g.orders[3].order = [1u8, 2, 0, 3, 4, 9].map(|m| ModeId::new(m).unwrap()).to_vec();
        for i in 2..6 {
            g.guards[3].guards[i] = Guard::RequireBest(ModeId::INTER_2NX2N);
        }
        let ctx = CuContext::new(&st, &cfg, 0, 0, 3, 30).unwrap();
        let mut p = Pipeline::with_trace(g).unwrap();
        let r = p.decide_cu(&ctx).unwrap();
        assert_eq!(r.mode, ModeId::INTRA_2NX2N);
        assert!(p.take_trace().last().unwrap().forced);
    }
}
