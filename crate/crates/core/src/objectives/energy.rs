//! Feature-based decoding energy model: `E = sum_f n_f * e_f`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("feature `{0}` has no entry in the energy table")]
    UnknownFeature(FeatureId),
    #[error("count of feature `{0}` is not representable in the energy scalar")]
    Unrepresentable(FeatureId),
    #[error("energy table line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Countable decoding event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FeatureId {
    /// Intra prediction of one square block of the given size.
    IntraPred(u8),
    /// Integer-pel motion compensation of one prediction block.
    MotionComp { width: u8, height: u8 },
    /// One skipped square block (prediction without residual).
    Skip(u8),
    /// One non-zero quantized residual coefficient.
    Coefficient,
    /// One coded bit.
    Bits,
    /// One coded split flag.
    SplitFlag,
}

impl FeatureId {
    /// The closed set of features the encoder can produce.
    pub fn all() -> Vec<FeatureId> {
        let mut out = Vec::new();
        for s in [4u8, 8, 16, 32, 64] {
            out.push(FeatureId::IntraPred(s));
        }
        for s in [8u8, 16, 32, 64] {
            out.push(FeatureId::Skip(s));
        }
        let mut mc = std::collections::BTreeSet::new();
        for s in [8u8, 16, 32, 64] {
            mc.insert((s, s));
            mc.insert((s / 2, s));
            mc.insert((s, s / 2));
            if s >= 16 {
                mc.insert((s, s / 4));
                mc.insert((s, 3 * s / 4));
                mc.insert((s / 4, s));
                mc.insert((3 * s / 4, s));
            }
        }
        out.extend(
            mc.into_iter()
                .map(|(width, height)| FeatureId::MotionComp { width, height }),
        );
        out.push(FeatureId::Coefficient);
        out.push(FeatureId::Bits);
        out.push(FeatureId::SplitFlag);
        out
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureId::IntraPred(s) => write!(f, "intra_pred_{s}"),
            FeatureId::MotionComp { width, height } => write!(f, "mc_int_{width}x{height}"),
            FeatureId::Skip(s) => write!(f, "skip_{s}"),
            FeatureId::Coefficient => f.write_str("coeff"),
            FeatureId::Bits => f.write_str("bits"),
            FeatureId::SplitFlag => f.write_str("split_flag"),
        }
    }
}

impl FromStr for FeatureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unknown feature id `{s}`");
        let size = |v: &str| v.parse::<u8>().map_err(|_| bad());
        match s {
            "coeff" => return Ok(FeatureId::Coefficient),
            "bits" => return Ok(FeatureId::Bits),
            "split_flag" => return Ok(FeatureId::SplitFlag),
            _ => {}
        }
        if let Some(v) = s.strip_prefix("intra_pred_") {
            return Ok(FeatureId::IntraPred(size(v)?));
        }
        if let Some(v) = s.strip_prefix("skip_") {
            return Ok(FeatureId::Skip(size(v)?));
        }
        if let Some(v) = s.strip_prefix("mc_int_") {
            let (w, h) = v.split_once('x').ok_or_else(bad)?;
            return Ok(FeatureId::MotionComp {
                width: size(w)?,
                height: size(h)?,
            });
        }
        Err(bad())
    }
}

impl From<FeatureId> for String {
    fn from(f: FeatureId) -> String {
        f.to_string()
    }
}

impl TryFrom<String> for FeatureId {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Occurrence counts `n_f`. Additive across any partition of the coded data.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureCounts(BTreeMap<FeatureId, u64>);

impl FeatureCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, feature: FeatureId, n: u64) {
        if n > 0 {
            *self.0.entry(feature).or_insert(0) += n;
        }
    }

    pub fn get(&self, feature: FeatureId) -> u64 {
        self.0.get(&feature).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (FeatureId, u64)> + '_ {
        self.0.iter().map(|(&f, &n)| (f, n))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, factor: u64) -> Self {
        let mut out = FeatureCounts::new();
        for (f, n) in self.iter() {
            FeatureCounts::add(&mut out, f, n * factor);
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }
}

impl AddAssign<&FeatureCounts> for FeatureCounts {
    fn add_assign(&mut self, rhs: &FeatureCounts) {
        for (f, n) in rhs.iter() {
            self.add(f, n);
        }
    }
}

impl Add<&FeatureCounts> for &FeatureCounts {
    type Output = FeatureCounts;
    fn add(self, rhs: &FeatureCounts) -> FeatureCounts {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl FromIterator<(FeatureId, u64)> for FeatureCounts {
    fn from_iter<I: IntoIterator<Item = (FeatureId, u64)>>(iter: I) -> Self {
        let mut out = FeatureCounts::new();
        for (f, n) in iter {
            FeatureCounts::add(&mut out, f, n);
        }
        out
    }
}

/// Specific energies `e_f` per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable<T> {
    entries: BTreeMap<FeatureId, T>,
}

/// Table file shipped with the crate. Values are synthetic; they preserve the
/// orderings a measured table has (inter costlier than intra per sample,
/// motion compensation growing with block count) but carry no physical claim.
pub const DEFAULT_TABLE: &str = include_str!("../../data/default_energy.tsv");

impl<T> Default for EnergyTable<T> {
    fn default() -> Self {
        EnergyTable {
            entries: BTreeMap::new(),
        }
    }
}

impl<T: Copy> EnergyTable<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, feature: FeatureId, energy: T) {
        self.entries.insert(feature, energy);
    }

    pub fn get(&self, feature: FeatureId) -> Option<T> {
        self.entries.get(&feature).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FeatureId, T)> + '_ {
        self.entries.iter().map(|(&f, &e)| (f, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Features producible by the encoder that have no entry.
    pub fn missing_features(&self) -> Vec<FeatureId> {
        FeatureId::all()
            .into_iter()
            .filter(|f| !self.entries.contains_key(f))
            .collect()
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> EnergyTable<U> {
        EnergyTable {
            entries: self.entries.iter().map(|(&k, &v)| (k, f(v))).collect(),
        }
    }
}

/// A parsed table and the lines that named features the encoder never emits.
#[derive(Debug, Clone)]
pub struct ParsedTable<T> {
    pub table: EnergyTable<T>,
    pub warnings: Vec<String>,
}

impl<T: Copy + FromStr> EnergyTable<T> {
    /// Parses the `feature_id <TAB> energy` format. `#` starts a comment.
    /// Unknown feature ids are reported as warnings and skipped.
    pub fn parse(text: &str) -> Result<ParsedTable<T>, EnergyError> {
        let mut table = EnergyTable::new();
        let mut warnings = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(id), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(EnergyError::Parse {
                    line: i + 1,
                    msg: format!("expected `feature<TAB>energy`, got `{line}`"),
                });
            };
            let energy = value.parse::<T>().map_err(|_| EnergyError::Parse {
                line: i + 1,
                msg: format!("bad energy value `{value}`"),
            })?;
            match id.parse::<FeatureId>() {
                Ok(f) if FeatureId::all().contains(&f) => table.insert(f, energy),
                _ => {
                    let w = format!("line {}: unknown feature `{id}` ignored", i + 1);
                    log::warn!("{w}");
                    warnings.push(w);
                }
            }
        }
        Ok(ParsedTable { table, warnings })
    }
}

impl EnergyTable<f64> {
    pub fn builtin() -> Self {
        EnergyTable::parse(DEFAULT_TABLE)
            .expect("built-in energy table parses")
            .table
    }

    /// Serializes in the tab-separated file format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# feature_id\tenergy_nJ\n");
        for (f, e) in self.iter() {
            out.push_str(&format!("{f}\t{e}\n"));
        }
        out
    }
}

/// Weighted feature sum. Exact whenever the scalar arithmetic is exact.
pub fn estimate_energy<T>(counts: &FeatureCounts, table: &EnergyTable<T>) -> Result<T, EnergyError>
where
    T: Num + Copy + FromPrimitive,
{
    counts.iter().try_fold(T::zero(), |acc, (f, n)| {
        let e = table.get(f).ok_or(EnergyError::UnknownFeature(f))?;
        let n = T::from_u64(n).ok_or(EnergyError::Unrepresentable(f))?;
        Ok(acc + n * e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn empty_counts_give_zero() {
        let table = EnergyTable::<f64>::builtin();
        assert_eq!(estimate_energy(&FeatureCounts::new(), &table).unwrap(), 0.0);
    }

    #[test]
    fn direct_linear_sum() {
        let mut table = EnergyTable::new();
        table.insert(FeatureId::Bits, 0.5);
        table.insert(FeatureId::Coefficient, 2.0);
        let counts: FeatureCounts = [(FeatureId::Bits, 100), (FeatureId::Coefficient, 10)]
            .into_iter()
            .collect();
        assert_eq!(estimate_energy(&counts, &table).unwrap(), 70.0);
    }

    #[test]
    fn unknown_feature_is_an_error() {
        let table = EnergyTable::<f64>::new();
        let counts: FeatureCounts = [(FeatureId::SplitFlag, 1)].into_iter().collect();
        assert_eq!(
            estimate_energy(&counts, &table),
            Err(EnergyError::UnknownFeature(FeatureId::SplitFlag))
        );
    }

    #[test]
    fn builtin_table_is_closed_world() {
        let t = EnergyTable::<f64>::builtin();
        assert!(t.missing_features().is_empty(), "{:?}", t.missing_features());
        let exact = t.map(|v| crate::scalar::exact_ratio(v).unwrap());
        assert_eq!(exact.len(), t.len());
    }

    #[test]
    fn feature_ids_round_trip_through_text() {
        for f in FeatureId::all() {
            assert_eq!(f.to_string().parse::<FeatureId>().unwrap(), f);
        }
        assert!("mc_int_9".parse::<FeatureId>().is_err());
    }

    #[test]
    fn parse_reports_unknown_and_rejects_garbage() {
        let parsed = EnergyTable::<f64>::parse("# c\nbits\t1.5\nwarp_drive\t3\n\ncoeff 2 # trailing\n").unwrap();
        assert_eq!(parsed.table.get(FeatureId::Bits), Some(1.5));
        assert_eq!(parsed.table.get(FeatureId::Coefficient), Some(2.0));
        assert_eq!(parsed.warnings.len(), 1);
        assert!(EnergyTable::<f64>::parse("bits\tabc\n").is_err());
        assert!(EnergyTable::<f64>::parse("bits\n").is_err());
        let round = EnergyTable::<f64>::parse(&EnergyTable::builtin().to_tsv()).unwrap();
        assert_eq!(round.table, EnergyTable::builtin());
    }

    #[test]
    fn exact_rational_scaling() {
        let table = EnergyTable::builtin().map(|v| crate::scalar::exact_ratio(v).unwrap());
        let counts: FeatureCounts = [(FeatureId::Skip(64), 3), (FeatureId::Bits, 17)]
            .into_iter()
            .collect();
        let one = estimate_energy(&counts, &table).unwrap();
        let five = estimate_energy(&counts.scaled(5), &table).unwrap();
        assert_eq!(five, one * Ratio::from_integer(5));
    }
}
