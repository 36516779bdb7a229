use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::archive::ParetoArchive;
use super::DseError;
use crate::pipeline::{Genotype, ParseError};

/// The four operating points a campaign covers.
pub const CAMPAIGN_QPS: [u8; 4] = [10, 20, 30, 40];

/// One genotype per QP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinedSolution {
    pub per_qp: BTreeMap<u8, Genotype>,
}

/// Chooses one entry of an archive.
pub trait Picker {
    /// Index into `archive.sorted_entries()`, or `None` for an empty archive.
    fn pick(&self, qp: u8, archive: &ParetoArchive<f64>) -> Option<usize>;
}

/// Weights over the minimization objectives `[rate, -psnr, effort, energy]`.
///
/// Each objective is min-max normalized over the archive; the pick minimizes
/// `sum_k w_k * n_k^2`, the weighted squared distance to the ideal point.
/// Ties go to the earlier entry in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub weights: [f64; 4],
}

impl Anchor {
    pub const RATE: Anchor = Anchor {
        weights: [1.0, 0.0, 0.0, 0.0],
    };
    pub const BALANCED: Anchor = Anchor {
        weights: [1.0, 1.0, 1.0, 1.0],
    };
}

impl Picker for Anchor {
    fn pick(&self, _qp: u8, archive: &ParetoArchive<f64>) -> Option<usize> {
        let pts: Vec<[f64; 4]> = archive
            .sorted_entries()
            .iter()
            .map(|e| e.objectives.minimization())
            .collect();
        if pts.is_empty() {
            return None;
        }
        let mut lo = [f64::INFINITY; 4];
        let mut hi = [f64::NEG_INFINITY; 4];
        for p in &pts {
            for k in 0..4 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let score = |p: &[f64; 4]| -> f64 {
            (0..4)
                .map(|k| {
                    let range = hi[k] - lo[k];
                    let n = if range > 0.0 { (p[k] - lo[k]) / range } else { 0.0 };
                    self.weights[k] * n * n
                })
                .sum()
        };
        let mut best = 0;
        let mut best_score = score(&pts[0]);
        for (i, p) in pts.iter().enumerate().skip(1) {
            let s = score(p);
            if s < best_score {
                best = i;
                best_score = s;
            }
        }
        Some(best)
    }
}

impl<F: Fn(u8, &ParetoArchive<f64>) -> Option<usize>> Picker for F {
    fn pick(&self, qp: u8, archive: &ParetoArchive<f64>) -> Option<usize> {
        self(qp, archive)
    }
}

/// Picks one genotype per QP. Every QP of [`CAMPAIGN_QPS`] must be present.
pub fn combine_across_qps(
    archives: &BTreeMap<u8, ParetoArchive<f64>>,
    picker: &dyn Picker,
) -> Result<CombinedSolution, DseError> {
    let mut per_qp = BTreeMap::new();
    for qp in CAMPAIGN_QPS {
        let archive = archives.get(&qp).ok_or(DseError::MissingQp(qp))?;
        let idx = picker.pick(qp, archive).ok_or(DseError::EmptyArchive(qp))?;
        let entries = archive.sorted_entries();
        let entry = entries.get(idx).ok_or(DseError::EmptyArchive(qp))?;
        per_qp.insert(qp, entry.genotype.clone());
    }
    Ok(CombinedSolution { per_qp })
}

impl CombinedSolution {
    /// The same genotype at every campaign QP.
    pub fn uniform(genotype: &Genotype) -> Self {
        CombinedSolution {
            per_qp: CAMPAIGN_QPS.iter().map(|&q| (q, genotype.clone())).collect(),
        }
    }

    pub fn get(&self, qp: u8) -> Option<&Genotype> {
        self.per_qp.get(&qp)
    }
}

/// Sections `[qp=N]`, each followed by the genotype text.
impl fmt::Display for CombinedSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (qp, g) in &self.per_qp {
            writeln!(f, "[qp={qp}]")?;
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for CombinedSolution {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut per_qp = BTreeMap::new();
        let mut current: Option<(u8, usize, String)> = None;
        let mut flush = |cur: Option<(u8, usize, String)>| -> Result<(), ParseError> {
            if let Some((qp, start, text)) = cur {
                let g: Genotype = text.parse().map_err(|e: ParseError| ParseError {
                    line: if e.line == 0 { start } else { start + e.line },
                    msg: format!("qp {qp}: {}", e.msg),
                })?;
                if per_qp.insert(qp, g).is_some() {
                    return Err(ParseError {
                        line: start,
                        msg: format!("duplicate section for qp {qp}"),
                    });
                }
            }
            Ok(())
        };
        for (i, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let qp = inner
                    .trim()
                    .strip_prefix("qp=")
                    .and_then(|v| v.trim().parse::<u8>().ok())
                    .ok_or_else(|| ParseError {
                        line: i + 1,
                        msg: format!("bad section header `{line}`"),
                    })?;
                flush(current.take())?;
                current = Some((qp, i + 1, String::new()));
            } else if let Some((_, _, text)) = current.as_mut() {
                text.push_str(raw);
                text.push('\n');
            } else if !line.is_empty() {
                return Err(ParseError {
                    line: i + 1,
                    msg: "genotype text before the first `[qp=N]` section".into(),
                });
            }
        }
        flush(current.take())?;
        Ok(CombinedSolution { per_qp })
    }
}
