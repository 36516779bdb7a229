//! The four optimization objectives: rate, distortion (as PSNR), encoding
//! effort and estimated decoding energy.

mod energy;

pub use energy::{
    estimate_energy, EnergyError, EnergyTable, FeatureCounts, FeatureId, ParsedTable,
    DEFAULT_TABLE,
};

use serde::{Deserialize, Serialize};

use crate::pipeline::EncodeReport;
use crate::scalar::Scalar;

/// PSNR reported for a lossless result.
pub const PSNR_CAP_DB: f64 = 100.0;

/// Objective values of one genotype at one QP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector<T> {
    /// Coded bits.
    pub rate: T,
    /// Luma PSNR in dB.
    pub psnr: T,
    /// Abstract effort units.
    pub effort: T,
    /// Estimated decoding energy.
    pub energy: T,
}

impl<T: Scalar> ObjectiveVector<T> {
    pub fn new(rate: T, psnr: T, effort: T, energy: T) -> Self {
        ObjectiveVector {
            rate,
            psnr,
            effort,
            energy,
        }
    }

    /// All four objectives oriented for minimization; distortion is `-psnr`.
    pub fn minimization(&self) -> [T; 4] {
        [self.rate, -self.psnr, self.effort, self.energy]
    }

    pub fn is_finite(&self) -> bool {
        self.minimization().iter().all(|v| v.is_finite())
    }

    /// Component-wise mean.
    pub fn mean(items: &[Self]) -> Option<Self> {
        if items.is_empty() {
            return None;
        }
        let n = T::from_usize(items.len())?;
        let sum = items.iter().fold(Self::new(T::zero(), T::zero(), T::zero(), T::zero()), |a, b| {
            Self::new(a.rate + b.rate, a.psnr + b.psnr, a.effort + b.effort, a.energy + b.energy)
        });
        Some(Self::new(sum.rate / n, sum.psnr / n, sum.effort / n, sum.energy / n))
    }
}

/// Luma PSNR of an 8-bit signal, capped at [`PSNR_CAP_DB`] for zero error.
pub fn psnr<T: Scalar>(total_sse: u64, num_samples: u64) -> T {
    assert!(num_samples > 0, "psnr over zero samples");
    if total_sse == 0 {
        return T::lit(PSNR_CAP_DB);
    }
    let mse = T::from_u64(total_sse).unwrap() / T::from_u64(num_samples).unwrap();
    let peak = T::lit(255.0 * 255.0);
    (T::lit(10.0) * (peak / mse).log10()).min(T::lit(PSNR_CAP_DB))
}

/// Sequence-level feature counts: the sum of the per-frame counts.
pub fn extract_features(report: &EncodeReport) -> FeatureCounts {
    report
        .frames
        .iter()
        .fold(FeatureCounts::new(), |mut acc, f| {
            acc += &f.features;
            acc
        })
}

pub fn collect_objectives(
    report: &EncodeReport,
    table: &EnergyTable<f64>,
) -> Result<ObjectiveVector<f64>, EnergyError> {
    let energy = estimate_energy(&extract_features(report), table)?;
    Ok(ObjectiveVector {
        rate: report.total_rate,
        psnr: psnr(report.total_distortion, report.num_samples),
        effort: report.effort,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_cap_and_reference_points() {
        assert_eq!(psnr::<f64>(0, 100), 100.0);
        // MSE = 255^2
        assert!((psnr::<f64>(65025 * 10, 10) - 0.0).abs() < 1e-12);
        // MSE = 65.025 -> 30 dB: 10*log10(1000)
        assert!((psnr::<f64>(65025, 1000) - 30.0).abs() < 1e-9);
        assert!((psnr::<f32>(65025, 1000) - 30.0).abs() < 1e-4);
    }

    #[test]
    fn minimization_orientation() {
        let v = ObjectiveVector::new(10.0, 40.0, 5.0, 2.0);
        assert_eq!(v.minimization(), [10.0, -40.0, 5.0, 2.0]);
        let m = ObjectiveVector::mean(&[v, ObjectiveVector::new(20.0, 30.0, 7.0, 4.0)]).unwrap();
        assert_eq!(m, ObjectiveVector::new(15.0, 35.0, 6.0, 3.0));
    }
}
