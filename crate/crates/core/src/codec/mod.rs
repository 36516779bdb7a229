//! A deterministic, simplified quadtree block encoder exposing the eleven
//! mode-evaluation functions of an HEVC-style mode decision.
//!
//! Every evaluator is a pure function of its [`CuContext`]: intra reference
//! samples and merge candidates come only from CTUs that were committed
//! before the current one, so the result of a mode never depends on which
//! modes were chosen for sibling CUs of the same CTU. This keeps guarded
//! searches an exact subset of the exhaustive search.

mod inter;
mod intra;
mod plane;
mod residual;
mod split;

pub use inter::{
    eval_inter_2nx2n, eval_inter_partitioned, eval_merge_2nx2n, motion_search, MotionSearch,
};
pub use intra::{eval_intra_2nx2n, eval_intra_nxn, predict_intra, IntraPredictor};
pub use plane::{sse_region, Block, Plane, CTU_SIZE};
pub use residual::{
    code_residual, quant_step, signed_exp_golomb_bits, ResidualCoding,
    RESIDUAL_BLOCK_OVERHEAD_BITS,
};
pub use split::{eval_split, SubCuDecider};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::Frame;
use crate::objectives::FeatureCounts;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("qp {0} outside 0..=51")]
    OutOfRangeQp(i32),
    #[error("mode id {0} outside 0..=10")]
    UnknownMode(u8),
    #[error("{mode} cannot be evaluated at depth {depth}")]
    InvalidDepthForMode { mode: ModeId, depth: u8 },
    #[error("partition {partition:?} cannot be used at depth {depth}")]
    InvalidDepthForPartition { partition: Partition, depth: u8 },
    #[error("block dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch { a: (usize, usize), b: (usize, usize) },
    #[error("invalid coding unit: {0}")]
    InvalidContext(String),
    #[error("inter mode evaluated without a reference frame")]
    MissingReference,
    #[error("sub-CU decision failed: {0}")]
    SubDecision(String),
}

/// Index into the table of mode-evaluation functions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ModeId(u8);

impl ModeId {
    pub const INTRA_2NX2N: ModeId = ModeId(0);
    pub const INTER_2NX2N: ModeId = ModeId(1);
    pub const MERGE_2NX2N: ModeId = ModeId(2);
    pub const INTER_NX2N: ModeId = ModeId(3);
    pub const INTER_2NXN: ModeId = ModeId(4);
    pub const INTER_2NXNU: ModeId = ModeId(5);
    pub const INTER_2NXND: ModeId = ModeId(6);
    pub const INTER_NLX2N: ModeId = ModeId(7);
    pub const INTER_NRX2N: ModeId = ModeId(8);
    pub const INTRA_NXN: ModeId = ModeId(9);
    pub const SPLIT: ModeId = ModeId(10);

    pub const COUNT: usize = 11;

    pub fn new(id: u8) -> Result<Self, CodecError> {
        if (id as usize) < Self::COUNT {
            Ok(ModeId(id))
        } else {
            Err(CodecError::UnknownMode(id))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = ModeId> {
        (0..Self::COUNT as u8).map(ModeId)
    }

    pub fn name(self) -> &'static str {
        [
            "Intra2Nx2N",
            "Inter2Nx2N",
            "Merge2Nx2N",
            "InterNx2N",
            "Inter2NxN",
            "Inter2NxnU",
            "Inter2NxnD",
            "InternLx2N",
            "InternRx2N",
            "IntraNxN",
            "Split",
        ][self.index()]
    }

    /// Depth rule: 0..=4 everywhere, 5..=8 and split above depth 3, IntraNxN
    /// only at depth 3.
    pub fn valid_at(self, depth: u8) -> bool {
        match self.0 {
            0..=4 => depth <= 3,
            5..=8 | 10 => depth <= 2,
            9 => depth == 3,
            _ => false,
        }
    }

    /// Valid modes at `depth` in table order.
    pub fn valid_modes(depth: u8) -> Vec<ModeId> {
        Self::all().filter(|m| m.valid_at(depth)).collect()
    }

    /// Modes usable in a frame without reference: the two intra evaluators and split.
    pub fn is_intra_capable(self) -> bool {
        matches!(self.0, 0 | 9 | 10)
    }

    pub fn partition(self) -> Option<Partition> {
        Partition::ALL.into_iter().find(|p| p.mode() == self)
    }
}

impl TryFrom<u8> for ModeId {
    type Error = CodecError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        ModeId::new(v)
    }
}

impl From<ModeId> for u8 {
    fn from(m: ModeId) -> u8 {
        m.0
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.0)
    }
}

impl fmt::Debug for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Two-PU inter partitions. Asymmetric ones split 1:3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Partition {
    Nx2N,
    TwoNxN,
    TwoNxnU,
    TwoNxnD,
    NLx2N,
    NRx2N,
}

impl Partition {
    pub const ALL: [Partition; 6] = [
        Partition::Nx2N,
        Partition::TwoNxN,
        Partition::TwoNxnU,
        Partition::TwoNxnD,
        Partition::NLx2N,
        Partition::NRx2N,
    ];

    pub fn mode(self) -> ModeId {
        match self {
            Partition::Nx2N => ModeId::INTER_NX2N,
            Partition::TwoNxN => ModeId::INTER_2NXN,
            Partition::TwoNxnU => ModeId::INTER_2NXNU,
            Partition::TwoNxnD => ModeId::INTER_2NXND,
            Partition::NLx2N => ModeId::INTER_NLX2N,
            Partition::NRx2N => ModeId::INTER_NRX2N,
        }
    }

    pub fn is_asymmetric(self) -> bool {
        !matches!(self, Partition::Nx2N | Partition::TwoNxN)
    }

    /// The two PU rectangles `(x, y, w, h)` relative to a CU of edge `size`.
    pub fn rects(self, size: usize) -> [(usize, usize, usize, usize); 2] {
        let (h, q) = (size / 2, size / 4);
        match self {
            Partition::Nx2N => [(0, 0, h, size), (h, 0, h, size)],
            Partition::TwoNxN => [(0, 0, size, h), (0, h, size, h)],
            Partition::TwoNxnU => [(0, 0, size, q), (0, q, size, size - q)],
            Partition::TwoNxnD => [(0, 0, size, size - q), (0, size - q, size, q)],
            Partition::NLx2N => [(0, 0, q, size), (q, 0, size - q, size)],
            Partition::NRx2N => [(0, 0, size - q, size), (size - q, 0, q, size)],
        }
    }
}

/// Lagrange multiplier `0.85 * 2^((qp - 12) / 3)`.
pub fn lambda(qp: i32) -> Result<f64, CodecError> {
    if !(0..=51).contains(&qp) {
        return Err(CodecError::OutOfRangeQp(qp));
    }
    Ok(0.85 * ((qp - 12) as f64 / 3.0).exp2())
}

/// Fixed signalling costs in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeaderBits {
    pub skip: f64,
    pub merge: f64,
    pub inter: f64,
    pub intra: f64,
    pub split_flag: f64,
    pub partition_symmetric: f64,
    pub partition_asymmetric: f64,
}

impl Default for HeaderBits {
    fn default() -> Self {
        HeaderBits {
            skip: 2.0,
            merge: 4.0,
            inter: 8.0,
            intra: 4.0,
            split_flag: 1.0,
            partition_symmetric: 1.0,
            partition_asymmetric: 2.0,
        }
    }
}

/// Codec parameters that are not part of the explored design space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodecConfig {
    /// Full-pel motion search range: candidates in `[-range, range]^2`.
    pub search_range: u32,
    pub headers: HeaderBits,
    pub intra_predictors: Vec<IntraPredictor>,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            search_range: 8,
            headers: HeaderBits::default(),
            intra_predictors: vec![IntraPredictor::Dc, IntraPredictor::Planar],
        }
    }
}

impl CodecConfig {
    /// Plane border needed so every motion-compensated fetch stays in memory.
    pub fn plane_border(&self) -> usize {
        self.search_range as usize + 8
    }

    /// Rate of `mode` when nothing but its fixed signalling is coded, i.e.
    /// with an all-zero residual and a zero motion vector difference.
    pub fn header_bits(&self, mode: ModeId) -> f64 {
        let h = &self.headers;
        match mode {
            ModeId::INTRA_2NX2N => h.intra + RESIDUAL_BLOCK_OVERHEAD_BITS,
            ModeId::INTER_2NX2N => h.inter + 2.0 + RESIDUAL_BLOCK_OVERHEAD_BITS,
            ModeId::MERGE_2NX2N => h.skip,
            ModeId::INTRA_NXN => 4.0 * (h.intra + RESIDUAL_BLOCK_OVERHEAD_BITS),
            ModeId::SPLIT => h.split_flag,
            m => {
                let p = m.partition().expect("partition mode");
                let part = if p.is_asymmetric() {
                    h.partition_asymmetric
                } else {
                    h.partition_symmetric
                };
                part + 2.0 * (h.merge + RESIDUAL_BLOCK_OVERHEAD_BITS)
            }
        }
    }
}

/// Rate and distortion with their Lagrangian cost `J = D + lambda * R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdCost {
    pub rate: f64,
    pub distortion: u64,
    pub cost_j: f64,
}

impl RdCost {
    pub fn new(rate: f64, distortion: u64, lambda: f64) -> Self {
        RdCost {
            rate,
            distortion,
            cost_j: distortion as f64 + lambda * rate,
        }
    }
}

/// Full-pel motion vector; the prediction of sample `(x, y)` is the reference
/// sample at `(x + dx, y + dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Mv {
    pub dx: i32,
    pub dy: i32,
}

impl Mv {
    pub const ZERO: Mv = Mv { dx: 0, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Self {
        Mv { dx, dy }
    }

    pub fn magnitude_sq(self) -> i32 {
        self.dx * self.dx + self.dy * self.dy
    }
}

/// Motion of one prediction block in absolute picture coordinates;
/// `mv == None` marks intra-coded area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionEntry {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub mv: Option<Mv>,
}

/// Per-depth histogram of the leaf decisions inside a result. Column 11
/// counts skip (Merge2Nx2N without residual).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LeafStats(pub [[u32; 12]; 4]);

impl LeafStats {
    pub const SKIP_COLUMN: usize = 11;

    pub fn single(depth: u8, mode: ModeId, skip: bool) -> Self {
        let mut s = LeafStats::default();
        let col = if skip { Self::SKIP_COLUMN } else { mode.index() };
        s.0[depth as usize][col] = 1;
        s
    }

    pub fn merge(&mut self, other: &LeafStats) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += y;
            }
        }
    }

    pub fn total(&self) -> u32 {
        self.0.iter().flatten().sum()
    }

    pub fn skip_count(&self) -> u32 {
        self.0.iter().map(|r| r[Self::SKIP_COLUMN]).sum()
    }
}

/// Output of one mode evaluator for one CU.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeResult {
    pub mode: ModeId,
    pub rd: RdCost,
    pub reconstruction: Block,
    pub features: FeatureCounts,
    /// Deterministic operation count of the evaluation.
    pub effort: f64,
    pub motion: Vec<MotionEntry>,
    pub leaves: LeafStats,
}

/// Per-4x4 motion storage of the picture being coded.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionField {
    cols: usize,
    rows: usize,
    cells: Vec<Option<Mv>>,
}

impl MotionField {
    pub fn new(width: usize, height: usize) -> Self {
        let (cols, rows) = (width / 4, height / 4);
        MotionField {
            cols,
            rows,
            cells: vec![None; cols * rows],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Option<Mv> {
        self.cells[(y / 4) * self.cols + x / 4]
    }

    pub fn store(&mut self, e: &MotionEntry) {
        for r in e.y / 4..(e.y + e.height) / 4 {
            for c in e.x / 4..(e.x + e.width) / 4 {
                debug_assert!(r < self.rows);
                self.cells[r * self.cols + c] = e.mv;
            }
        }
    }
}

/// Coding state of one picture. The reference is absent for intra pictures.
#[derive(Debug, Clone)]
pub struct FrameState {
    pub original: Plane,
    pub reference: Option<Plane>,
    pub recon: Plane,
    pub motion: MotionField,
    pub visible_width: usize,
    pub visible_height: usize,
}

impl FrameState {
    pub fn new(frame: &Frame, reference: Option<Plane>, config: &CodecConfig) -> Self {
        let border = config.plane_border();
        let original = Plane::from_frame_padded(frame, border);
        let recon = Plane::new(original.width(), original.height(), border);
        let motion = MotionField::new(original.width(), original.height());
        FrameState {
            original,
            reference,
            recon,
            motion,
            visible_width: frame.width(),
            visible_height: frame.height(),
        }
    }

    pub fn is_intra(&self) -> bool {
        self.reference.is_none()
    }

    /// Stores a decided CTU's reconstruction and motion.
    pub fn commit(&mut self, x: usize, y: usize, result: &ModeResult) {
        self.recon.write_block(x, y, &result.reconstruction);
        for e in &result.motion {
            self.motion.store(e);
        }
    }

    /// Finishes the picture and returns its reconstruction as a reference.
    pub fn into_reference(mut self) -> Plane {
        self.recon.extend_borders();
        self.recon
    }

    /// Number of visible columns and rows of a block at `(x, y)`.
    pub fn visible_extent(&self, x: usize, y: usize, w: usize, h: usize) -> (usize, usize) {
        (
            w.min(self.visible_width.saturating_sub(x)),
            h.min(self.visible_height.saturating_sub(y)),
        )
    }
}

/// Everything an evaluator needs to code one CU.
#[derive(Debug, Clone)]
pub struct CuContext<'a> {
    pub frame: &'a FrameState,
    pub config: &'a CodecConfig,
    pub x: usize,
    pub y: usize,
    pub depth: u8,
    pub size: usize,
    pub qp: u8,
    pub lambda: f64,
    /// Up to two distinct motion vectors from the left and upper CTU neighbours.
    pub neighbor_motion: Vec<Mv>,
}

impl<'a> CuContext<'a> {
    pub fn new(
        frame: &'a FrameState,
        config: &'a CodecConfig,
        x: usize,
        y: usize,
        depth: u8,
        qp: u8,
    ) -> Result<Self, CodecError> {
        let lambda = lambda(qp as i32)?;
        if depth > 3 {
            return Err(CodecError::InvalidContext(format!("depth {depth} > 3")));
        }
        let size = CTU_SIZE >> depth;
        if !x.is_multiple_of(size) || !y.is_multiple_of(size) {
            return Err(CodecError::InvalidContext(format!(
                "origin ({x}, {y}) not aligned to {size}"
            )));
        }
        if x + size > frame.original.width() || y + size > frame.original.height() {
            return Err(CodecError::InvalidContext(format!(
                "CU at ({x}, {y}) of size {size} outside picture"
            )));
        }
        let mut ctx = CuContext {
            frame,
            config,
            x,
            y,
            depth,
            size,
            qp,
            lambda,
            neighbor_motion: Vec::new(),
        };
        ctx.neighbor_motion = ctx.derive_neighbor_motion();
        Ok(ctx)
    }

    fn ctu_origin(&self) -> (usize, usize) {
        (self.x - self.x % CTU_SIZE, self.y - self.y % CTU_SIZE)
    }

    fn derive_neighbor_motion(&self) -> Vec<Mv> {
        let (cx, cy) = self.ctu_origin();
        let mut out = Vec::with_capacity(2);
        if cx > 0 {
            if let Some(mv) = self.frame.motion.get(cx - 1, self.y) {
                out.push(mv);
            }
        }
        if cy > 0 {
            if let Some(mv) = self.frame.motion.get(self.x, cy - 1) {
                if !out.contains(&mv) {
                    out.push(mv);
                }
            }
        }
        out
    }

    /// Reconstructed reference row above the CU, projected from the row just
    /// above the CTU; `None` in the first CTU row.
    pub fn intra_top(&self) -> Option<Vec<u8>> {
        let (_, cy) = self.ctu_origin();
        (cy > 0).then(|| {
            self.frame
                .recon
                .row(self.x as isize, cy as isize - 1, self.size)
                .to_vec()
        })
    }

    /// Reconstructed reference column left of the CU, projected from the
    /// column just left of the CTU; `None` in the first CTU column.
    pub fn intra_left(&self) -> Option<Vec<u8>> {
        let (cx, _) = self.ctu_origin();
        (cx > 0).then(|| {
            (0..self.size)
                .map(|r| self.frame.recon.get(cx as isize - 1, (self.y + r) as isize))
                .collect()
        })
    }

    pub fn original_block(&self) -> Block {
        self.frame
            .original
            .block(self.x as isize, self.y as isize, self.size, self.size)
    }

    pub fn visible_extent(&self) -> (usize, usize) {
        self.frame
            .visible_extent(self.x, self.y, self.size, self.size)
    }

    pub(crate) fn require_valid(&self, mode: ModeId) -> Result<(), CodecError> {
        if mode.valid_at(self.depth) {
            Ok(())
        } else {
            Err(CodecError::InvalidDepthForMode {
                mode,
                depth: self.depth,
            })
        }
    }
}

/// Evaluates one non-split mode. Split needs a sub-CU decider; see [`eval_split`].
pub fn eval_mode(ctx: &CuContext<'_>, mode: ModeId) -> Result<ModeResult, CodecError> {
    match mode {
        ModeId::INTRA_2NX2N => eval_intra_2nx2n(ctx),
        ModeId::INTER_2NX2N => eval_inter_2nx2n(ctx),
        ModeId::MERGE_2NX2N => eval_merge_2nx2n(ctx),
        ModeId::INTRA_NXN => eval_intra_nxn(ctx),
        ModeId::SPLIT => Err(CodecError::InvalidContext(
            "split requires a sub-CU decider".into(),
        )),
        m => eval_inter_partitioned(ctx, m.partition().expect("partition mode")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_reference_values() {
        assert!((lambda(12).unwrap() - 0.85).abs() < 1e-15);
        assert!((lambda(15).unwrap() - 1.70).abs() < 1e-12);
        // 0.85 * 2^6
        assert!((lambda(30).unwrap() - 54.40).abs() < 1e-9);
        assert!(matches!(lambda(52), Err(CodecError::OutOfRangeQp(52))));
        assert!(matches!(lambda(-1), Err(CodecError::OutOfRangeQp(-1))));
        for qp in 0..51 {
            assert!(lambda(qp + 1).unwrap() > lambda(qp).unwrap());
        }
    }

    #[test]
    fn depth_validity_sets() {
        let ids = |d: u8| ModeId::valid_modes(d).iter().map(|m| m.index()).collect::<Vec<_>>();
        for d in 0..3 {
            assert_eq!(ids(d), vec![0, 1, 2, 3, 4, 5, 6, 7, 8, 10]);
        }
        assert_eq!(ids(3), vec![0, 1, 2, 3, 4, 9]);
        assert!(ModeId::new(11).is_err());
    }

    #[test]
    fn partition_geometry() {
        assert_eq!(Partition::TwoNxN.rects(64), [(0, 0, 64, 32), (0, 32, 64, 32)]);
        assert_eq!(Partition::TwoNxnU.rects(64), [(0, 0, 64, 16), (0, 16, 64, 48)]);
        assert_eq!(Partition::TwoNxnD.rects(64), [(0, 0, 64, 48), (0, 48, 64, 16)]);
        assert_eq!(Partition::NLx2N.rects(32), [(0, 0, 8, 32), (8, 0, 24, 32)]);
        assert_eq!(Partition::NRx2N.rects(16), [(0, 0, 12, 16), (12, 0, 4, 16)]);
        assert_eq!(Partition::Nx2N.rects(8), [(0, 0, 4, 8), (4, 0, 4, 8)]);
        for p in Partition::ALL {
            assert_eq!(p.mode().partition(), Some(p));
        }
    }
}
