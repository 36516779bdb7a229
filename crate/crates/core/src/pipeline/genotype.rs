//! Genotype model: per-depth mode order vectors and guard vectors.
//!
//! Text form, one line per vector, guards aligned with the order positions
//! and `-` marking an unconditional position:
//!
//! ```text
//! O(3)={1,3,2,4,0,9}
//! G(3)={-,-,1,3,2,4}
//! ```

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::ModeId;

/// Number of quadtree depths.
pub const DEPTHS: usize = 4;

/// Number of leading order positions that are always evaluated.
pub const UNGUARDED_PREFIX: usize = 2;

/// Condition attached to one order position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Guard {
    /// Evaluate unconditionally.
    Always,
    /// Evaluate only if the best mode so far is this mode.
    RequireBest(ModeId),
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Always => f.write_str("-"),
            Guard::RequireBest(m) => write!(f, "{}", m.index()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderVector {
    pub depth: u8,
    pub order: Vec<ModeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GuardVector {
    pub depth: u8,
    pub guards: Vec<Guard>,
}

/// A point of the design space: order and guards for each depth.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Genotype {
    pub orders: [OrderVector; DEPTHS],
    pub guards: [GuardVector; DEPTHS],
}

/// One broken genotype invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DepthLabel { index: usize, found: u8 },
    NotAPermutation { depth: u8 },
    ModeInvalidAtDepth { depth: u8, position: usize, mode: ModeId },
    GuardTargetInvalidAtDepth { depth: u8, position: usize, mode: ModeId },
    LengthMismatch { depth: u8, order: usize, guards: usize },
    LeadingGuard { depth: u8, position: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DepthLabel { index, found } => {
                write!(f, "vector {index} labelled with depth {found}")
            }
            Violation::NotAPermutation { depth } => write!(
                f,
                "depth {depth}: not a permutation of the valid mode set"
            ),
            Violation::ModeInvalidAtDepth {
                depth,
                position,
                mode,
            } => write!(f, "depth {depth}: order position {position}: mode invalid at depth ({mode})"),
            Violation::GuardTargetInvalidAtDepth {
                depth,
                position,
                mode,
            } => write!(f, "depth {depth}: guard position {position}: mode invalid at depth ({mode})"),
            Violation::LengthMismatch {
                depth,
                order,
                guards,
            } => write!(f, "depth {depth}: {order} order entries but {guards} guards"),
            Violation::LeadingGuard { depth, position } => write!(
                f,
                "depth {depth}: position {position} must be unconditional"
            ),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("genotype line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl OrderVector {
    pub fn new(depth: u8, order: Vec<ModeId>) -> Self {
        OrderVector { depth, order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn is_permutation(&self) -> bool {
        let mut got = self.order.clone();
        got.sort();
        got == ModeId::valid_modes(self.depth)
    }
}

impl GuardVector {
    pub fn always(depth: u8, len: usize) -> Self {
        GuardVector {
            depth,
            guards: vec![Guard::Always; len],
        }
    }
}

/// Draws a guard for a conditional slot: unconditional with probability
/// `p_always`, else a uniformly chosen valid mode at `depth`.
pub fn random_guard<R: Rng + ?Sized>(rng: &mut R, depth: u8, p_always: f64) -> Guard {
    if rng.gen_bool(p_always) {
        Guard::Always
    } else {
        let modes = ModeId::valid_modes(depth);
        Guard::RequireBest(*modes.choose(rng).expect("non-empty mode set"))
    }
}

fn ids(v: &[u8]) -> Vec<ModeId> {
    v.iter().map(|&m| ModeId::new(m).expect("literal mode id")).collect()
}

impl Genotype {
    /// Every valid mode in table order, all unconditional.
    pub fn exhaustive() -> Self {
        let orders = std::array::from_fn(|d| OrderVector::new(d as u8, ModeId::valid_modes(d as u8)));
        let guards = std::array::from_fn(|d| GuardVector::always(d as u8, orders[d].len()));
        Genotype { orders, guards }
    }

    /// Fast-decision heuristic in the spirit of a reference encoder: merge and
    /// 2Nx2N inter first, then split and intra unconditionally, and the PU
    /// partitions only while 2Nx2N inter is still the best mode.
    pub fn heuristic() -> Self {
        let upper = ids(&[2, 1, 10, 0, 3, 4, 5, 6, 7, 8]);
        let lower = ids(&[2, 1, 0, 3, 4, 9]);
        let orders = std::array::from_fn(|d| {
            OrderVector::new(d as u8, if d < 3 { upper.clone() } else { lower.clone() })
        });
        let guards = std::array::from_fn(|d| {
            let n = orders[d].len();
            let g = (0..n)
                .map(|i| match orders[d].order[i].index() {
                    3..=8 => Guard::RequireBest(ModeId::INTER_2NX2N),
                    9 => Guard::RequireBest(ModeId::INTRA_2NX2N),
                    _ => Guard::Always,
                })
                .collect();
            GuardVector {
                depth: d as u8,
                guards: g,
            }
        });
        Genotype { orders, guards }
    }

    /// Uniformly shuffled orders; conditional slots drawn with [`random_guard`].
    pub fn random<R: Rng + ?Sized>(rng: &mut R, p_always: f64) -> Self {
        let orders = std::array::from_fn(|d| {
            let mut order = ModeId::valid_modes(d as u8);
            order.shuffle(rng);
            OrderVector::new(d as u8, order)
        });
        let guards = std::array::from_fn(|d: usize| {
            let n = ModeId::valid_modes(d as u8).len();
            let g = (0..n)
                .map(|i| {
                    if i < UNGUARDED_PREFIX {
                        Guard::Always
                    } else {
                        random_guard(rng, d as u8, p_always)
                    }
                })
                .collect();
            GuardVector {
                depth: d as u8,
                guards: g,
            }
        });
        Genotype { orders, guards }
    }

    pub fn order(&self, depth: u8) -> &[ModeId] {
        &self.orders[depth as usize].order
    }

    pub fn guards(&self, depth: u8) -> &[Guard] {
        &self.guards[depth as usize].guards
    }

    /// All invariant violations; empty iff the genotype is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for d in 0..DEPTHS {
            let (o, g) = (&self.orders[d], &self.guards[d]);
            if o.depth as usize != d {
                out.push(Violation::DepthLabel { index: d, found: o.depth });
            }
            if g.depth as usize != d {
                out.push(Violation::DepthLabel { index: d, found: g.depth });
            }
            let depth = d as u8;
            for (position, &mode) in o.order.iter().enumerate() {
                if !mode.valid_at(depth) {
                    out.push(Violation::ModeInvalidAtDepth {
                        depth,
                        position,
                        mode,
                    });
                }
            }
            if !o.is_permutation() {
                out.push(Violation::NotAPermutation { depth });
            }
            if o.len() != g.guards.len() {
                out.push(Violation::LengthMismatch {
                    depth,
                    order: o.len(),
                    guards: g.guards.len(),
                });
            }
            for (position, guard) in g.guards.iter().enumerate() {
                match guard {
                    Guard::RequireBest(_) if position < UNGUARDED_PREFIX => {
                        out.push(Violation::LeadingGuard { depth, position })
                    }
                    Guard::RequireBest(mode) if !mode.valid_at(depth) => {
                        out.push(Violation::GuardTargetInvalidAtDepth {
                            depth,
                            position,
                            mode: *mode,
                        })
                    }
                    _ => {}
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Per position of depth `depth`: whether some outcome of the RD
    /// comparisons lets the position run. A guarded position is reachable iff
    /// its target appears at an earlier reachable position.
    pub fn reachability(&self, depth: u8) -> Vec<bool> {
        let order = self.order(depth);
        let guards = self.guards(depth);
        let mut reachable = Vec::with_capacity(order.len());
        for (i, guard) in guards.iter().enumerate() {
            let ok = match guard {
                Guard::Always => true,
                Guard::RequireBest(m) => (0..i).any(|j| reachable[j] && order[j] == *m),
            };
            reachable.push(ok);
        }
        reachable
    }

    /// Single-line form: the text lines joined with `;`.
    pub fn to_compact(&self) -> String {
        self.to_string().trim_end().replace('\n', ";")
    }

    /// Renders the decision as nested conditionals, one block per depth.
    pub fn unwrapped_listing(&self) -> String {
        let mut out = String::new();
        for d in 0..DEPTHS as u8 {
            out.push_str(&format!("depth {d} (CU {0}x{0}):\n", 64 >> d));
            for (mode, guard) in self.order(d).iter().zip(self.guards(d)) {
                match guard {
                    Guard::Always => out.push_str(&format!("  test {}\n", mode)),
                    Guard::RequireBest(m) => out.push_str(&format!(
                        "  if best == {} {{ test {} }}\n",
                        m.name(),
                        mode
                    )),
                }
            }
        }
        out
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in 0..DEPTHS {
            let o: Vec<String> = self.orders[d]
                .order
                .iter()
                .map(|m| m.index().to_string())
                .collect();
            let g: Vec<String> = self.guards[d].guards.iter().map(|g| g.to_string()).collect();
            writeln!(f, "O({d})={{{}}}", o.join(","))?;
            writeln!(f, "G({d})={{{}}}", g.join(","))?;
        }
        Ok(())
    }
}

fn parse_vector_line(line: &str) -> Option<(char, usize, Vec<String>)> {
    let compact: String = line.chars().filter(|c| !c.is_whitespace()).collect();
    let kind = compact.chars().next()?;
    let rest = compact.get(1..)?;
    let rest = rest.strip_prefix('(')?;
    let (depth, rest) = rest.split_once(')')?;
    let depth = depth.parse::<usize>().ok()?;
    let body = rest.strip_prefix('=')?.strip_prefix('{')?.strip_suffix('}')?;
    let items = if body.is_empty() {
        Vec::new()
    } else {
        body.split(',').map(str::to_owned).collect()
    };
    Some((kind, depth, items))
}

impl FromStr for Genotype {
    type Err = ParseError;

    /// Accepts the text form with arbitrary whitespace, `#` comments, and `;`
    /// as an alternative line separator. Validity is not checked here.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut orders: [Option<Vec<ModeId>>; DEPTHS] = Default::default();
        let mut guards: [Option<Vec<Guard>>; DEPTHS] = Default::default();
        let lines = s.lines().flat_map(|l| l.split(';')).enumerate();
        for (i, raw) in lines {
            let line_no = i + 1;
            let err = |msg: String| ParseError { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (kind, depth, items) = parse_vector_line(line)
                .ok_or_else(|| err(format!("expected `O(d)={{..}}` or `G(d)={{..}}`, got `{line}`")))?;
            if depth >= DEPTHS {
                return Err(err(format!("depth {depth} out of range")));
            }
            let mode = |t: &str| -> Result<ModeId, ParseError> {
                t.parse::<u8>()
                    .ok()
                    .and_then(|v| ModeId::new(v).ok())
                    .ok_or_else(|| err(format!("bad mode id `{t}`")))
            };
            match kind {
                'O' => {
                    if orders[depth].is_some() {
                        return Err(err(format!("duplicate O({depth})")));
                    }
                    orders[depth] = Some(items.iter().map(|t| mode(t)).collect::<Result<_, _>>()?);
                }
                'G' => {
                    if guards[depth].is_some() {
                        return Err(err(format!("duplicate G({depth})")));
                    }
                    guards[depth] = Some(
                        items
                            .iter()
                            .map(|t| {
                                if t == "-" {
                                    Ok(Guard::Always)
                                } else {
                                    mode(t).map(Guard::RequireBest)
                                }
                            })
                            .collect::<Result<_, _>>()?,
                    );
                }
                other => return Err(err(format!("unknown vector kind `{other}`"))),
            }
        }
        let missing = |what: &str, d: usize| ParseError {
            line: 0,
            msg: format!("missing {what}({d})"),
        };
        let mut out_orders = Vec::with_capacity(DEPTHS);
        let mut out_guards = Vec::with_capacity(DEPTHS);
        for d in 0..DEPTHS {
            out_orders.push(OrderVector::new(
                d as u8,
                orders[d].take().ok_or_else(|| missing("O", d))?,
            ));
            out_guards.push(GuardVector {
                depth: d as u8,
                guards: guards[d].take().ok_or_else(|| missing("G", d))?,
            });
        }
        Ok(Genotype {
            orders: out_orders.try_into().expect("four depths"),
            guards: out_guards.try_into().expect("four depths"),
        })
    }
}
