//! Bjøntegaard-delta comparison of two four-point operating curves.
//!
//! `log10(rate)` (or `log10(energy)`) is fitted by the cubic through the four
//! points as a function of PSNR; the fitted cubics are integrated exactly over
//! the common PSNR interval and the mean log difference is reported as a
//! percentage.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("operating points must strictly decrease in rate and PSNR with increasing QP (point {index})")]
    NotMonotone { index: usize },
    #[error("PSNR ranges of the two curves do not overlap")]
    NoOverlap,
    #[error("cubic fit is degenerate (repeated PSNR values)")]
    DegenerateFit,
    #[error("reference effort is zero at point {0}")]
    ZeroReferenceEffort(usize),
    #[error("report needs at least one row")]
    EmptyReport,
    #[error("csv output failed: {0}")]
    Csv(String),
}

/// One operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdPoint<T> {
    pub rate: T,
    pub psnr: T,
    pub energy: T,
    pub effort: T,
}

/// Four operating points ordered by increasing QP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdCurve<T> {
    points: [RdPoint<T>; 4],
}

impl<T: Scalar> RdCurve<T> {
    /// Validates positivity of rate and energy and strict monotonicity.
    pub fn new(points: [RdPoint<T>; 4]) -> Result<Self, MetricsError> {
        for p in &points {
            for (what, v) in [("rate", p.rate), ("energy", p.energy)] {
                if !(v > T::zero()) || !v.is_finite() {
                    return Err(MetricsError::NonPositive {
                        what,
                        value: v.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        for i in 1..4 {
            let (a, b) = (&points[i - 1], &points[i]);
            if !(b.rate < a.rate && b.psnr < a.psnr) {
                return Err(MetricsError::NotMonotone { index: i });
            }
        }
        Ok(RdCurve { points })
    }

    pub fn points(&self) -> &[RdPoint<T>; 4] {
        &self.points
    }

    /// The curve with every non-PSNR column multiplied by its factor.
    pub fn scaled(&self, rate: T, energy: T, effort: T) -> Result<Self, MetricsError> {
        Self::new(self.points.map(|p| RdPoint {
            rate: p.rate * rate,
            psnr: p.psnr,
            energy: p.energy * energy,
            effort: p.effort * effort,
        }))
    }
}

/// Coefficients `c` of `c0 + c1 t + c2 t^2 + c3 t^3` through the four points,
/// found by Gaussian elimination with partial pivoting.
pub fn fit_cubic<T: Scalar>(xs: [T; 4], ys: [T; 4]) -> Result<[T; 4], MetricsError> {
    let mut a = [[T::zero(); 5]; 4];
    for i in 0..4 {
        let mut p = T::one();
        for j in 0..4 {
            a[i][j] = p;
            p = p * xs[i];
        }
        a[i][4] = ys[i];
    }
    let scale = a
        .iter()
        .flat_map(|r| r[..4].iter())
        .fold(T::zero(), |m, v| m.max(v.abs()));
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).expect("finite"))
            .expect("non-empty range");
        if a[pivot][col].abs() <= T::epsilon() * T::lit(64.0) * scale {
            return Err(MetricsError::DegenerateFit);
        }
        a.swap(col, pivot);
        for r in 0..4 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..5 {
                    a[r][c] = a[r][c] - f * a[col][c];
                }
            }
        }
    }
    let c = std::array::from_fn(|i| a[i][4] / a[i][i]);
    if c.iter().any(|v: &T| !v.is_finite()) {
        return Err(MetricsError::DegenerateFit);
    }
    Ok(c)
}

pub fn eval_cubic<T: Scalar>(c: &[T; 4], t: T) -> T {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

fn integral<T: Scalar>(c: &[T; 4], lo: T, hi: T) -> T {
    let anti = |t: T| {
        (((c[3] / T::lit(4.0) * t + c[2] / T::lit(3.0)) * t + c[1] / T::lit(2.0)) * t + c[0]) * t
    };
    anti(hi) - anti(lo)
}

fn bd_generic<T: Scalar>(
    reference: &RdCurve<T>,
    test: &RdCurve<T>,
    value: impl Fn(&RdPoint<T>) -> T,
) -> Result<T, MetricsError> {
    let psnr_r = reference.points.map(|p| p.psnr);
    let psnr_t = test.points.map(|p| p.psnr);
    let min = |v: &[T; 4]| v.iter().copied().fold(T::infinity(), T::min);
    let max = |v: &[T; 4]| v.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = min(&psnr_r).max(min(&psnr_t));
    let hi = max(&psnr_r).min(max(&psnr_t));
    if !(hi > lo) {
        return Err(MetricsError::NoOverlap);
    }
    // centre the abscissa for a better-conditioned Vandermonde system
    let centre = (lo + hi) / T::lit(2.0);
    let fit = |c: &RdCurve<T>, ps: [T; 4]| {
        fit_cubic(
            ps.map(|p| p - centre),
            std::array::from_fn(|i| value(&c.points[i]).log10()),
        )
    };
    let cr = fit(reference, psnr_r)?;
    let ct = fit(test, psnr_t)?;
    let (a, b) = (lo - centre, hi - centre);
    let avg = (integral(&ct, a, b) - integral(&cr, a, b)) / (hi - lo);
    Ok((T::lit(10.0).powf(avg) - T::one()) * T::lit(100.0))
}

/// Average rate difference of `test` against `reference` at equal PSNR, in
/// percent. Negative means `test` needs fewer bits.
pub fn bd_rate<T: Scalar>(reference: &RdCurve<T>, test: &RdCurve<T>) -> Result<T, MetricsError> {
    bd_generic(reference, test, |p| p.rate)
}

/// As [`bd_rate`] with decoding energy in place of rate (PSNR stays the
/// independent axis).
pub fn bd_energy<T: Scalar>(reference: &RdCurve<T>, test: &RdCurve<T>) -> Result<T, MetricsError> {
    bd_generic(reference, test, |p| p.energy)
}

/// Mean over the four points of `(1 - effort_test / effort_ref) * 100`.
pub fn mean_effort_savings<T: Scalar>(reference: &RdCurve<T>, test: &RdCurve<T>) -> Result<T, MetricsError> {
    let mut sum = T::zero();
    for (i, (r, t)) in reference.points.iter().zip(&test.points).enumerate() {
        if r.effort == T::zero() {
            return Err(MetricsError::ZeroReferenceEffort(i));
        }
        sum = sum + (T::one() - t.effort / r.effort) * T::lit(100.0);
    }
    Ok(sum / T::lit(4.0))
}

/// Deltas of one validation sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub sequence: String,
    pub bd_rate_pct: f64,
    pub bd_energy_pct: f64,
    pub effort_savings_pct: f64,
}

impl ComparisonRow {
    pub fn compute(sequence: impl Into<String>, reference: &RdCurve<f64>, test: &RdCurve<f64>) -> Result<Self, MetricsError> {
        Ok(ComparisonRow {
            sequence: sequence.into(),
            bd_rate_pct: bd_rate(reference, test)?,
            bd_energy_pct: bd_energy(reference, test)?,
            effort_savings_pct: mean_effort_savings(reference, test)?,
        })
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Column header of the comparison CSV.
pub const COMPARISON_CSV_HEADER: [&str; 7] = [
    "sequence",
    "bd_rate_pct",
    "bd_rate_std",
    "bd_energy_pct",
    "bd_energy_std",
    "effort_savings_pct",
    "effort_savings_std",
];

/// Writes one row per sequence and a final `mean` row that carries the
/// standard deviations; the std columns are empty on per-sequence rows.
pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<(), MetricsError> {
    if rows.is_empty() {
        return Err(MetricsError::EmptyReport);
    }
    let err = |e: csv::Error| MetricsError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_CSV_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.sequence.clone(),
            r.bd_rate_pct.to_string(),
            String::new(),
            r.bd_energy_pct.to_string(),
            String::new(),
            r.effort_savings_pct.to_string(),
            String::new(),
        ])
        .map_err(err)?;
    }
    let col = |f: fn(&ComparisonRow) -> f64| mean_std(&rows.iter().map(f).collect::<Vec<_>>());
    let (r, rs) = col(|r| r.bd_rate_pct);
    let (e, es) = col(|r| r.bd_energy_pct);
    let (s, ss) = col(|r| r.effort_savings_pct);
    w.write_record(
        ["mean".to_string()]
            .into_iter()
            .chain([r, rs, e, es, s, ss].iter().map(|v| v.to_string())),
    )
    .map_err(err)?;
    w.flush().map_err(|e| MetricsError::Csv(e.to_string()))?;
    Ok(())
}
