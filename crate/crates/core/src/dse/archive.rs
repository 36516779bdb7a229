use std::io::Write;

use super::pareto::{dominates, hypervolume};
use super::DseError;
use crate::objectives::ObjectiveVector;
use crate::pipeline::Genotype;
use crate::scalar::Scalar;

/// One archived solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry<T> {
    pub genotype: Genotype,
    pub objectives: ObjectiveVector<T>,
    /// Generation in which the entry was evaluated.
    pub generation: usize,
}

/// Mutually nondominated set of evaluated genotypes.
///
/// A candidate is rejected if an entry dominates it or has the same
/// objective vector; otherwise it is added and every entry it dominates is
/// dropped. Entries keep insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive<T> {
    entries: Vec<ArchiveEntry<T>>,
    capacity: Option<usize>,
}

impl<T> Default for ParetoArchive<T> {
    fn default() -> Self {
        ParetoArchive {
            entries: Vec::new(),
            capacity: None,
        }
    }
}

/// Column header of the archive CSV.
pub const ARCHIVE_CSV_HEADER: [&str; 7] = [
    "qp", "genotype", "rate_bits", "psnr_db", "effort", "energy", "rank",
];

impl<T: Scalar> ParetoArchive<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bounded archive. When full, the entry with the smallest crowding
    /// distance (first in insertion order among equals) is evicted, which
    /// gives up the monotone-hypervolume guarantee.
    pub fn with_capacity(capacity: usize) -> Self {
        ParetoArchive {
            entries: Vec::new(),
            capacity: Some(capacity.max(1)),
        }
    }

    pub fn entries(&self) -> &[ArchiveEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    /// Offers a candidate; returns whether it was stored.
    pub fn insert(&mut self, genotype: Genotype, objectives: ObjectiveVector<T>, generation: usize) -> bool {
        let cand = objectives.minimization();
        if !objectives.is_finite() {
            return false;
        }
        for e in &self.entries {
            let m = e.objectives.minimization();
            if m == cand || dominates(&m, &cand) {
                return false;
            }
        }
        self.entries
            .retain(|e| !dominates(&cand, &e.objectives.minimization()));
        self.entries.push(ArchiveEntry {
            genotype,
            objectives,
            generation,
        });
        if let Some(cap) = self.capacity {
            while self.entries.len() > cap {
                self.evict_most_crowded();
            }
        }
        true
    }

    fn evict_most_crowded(&mut self) {
        let pts: Vec<[T; 4]> = self.entries.iter().map(|e| e.objectives.minimization()).collect();
        let idx: Vec<usize> = (0..pts.len()).collect();
        let d = super::pareto::crowding_distance(&pts, &idx);
        let mut worst = 0;
        for i in 1..d.len() {
            if d[i] < d[worst] {
                worst = i;
            }
        }
        self.entries.remove(worst);
    }

    /// True iff no entry dominates another.
    pub fn is_mutually_nondominated(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, a)| {
            self.entries.iter().enumerate().all(|(j, b)| {
                i == j || !dominates(&a.objectives.minimization(), &b.objectives.minimization())
            })
        })
    }

    /// Hypervolume of the entries w.r.t. `reference` (minimization space).
    pub fn hypervolume(&self, reference: [T; 4]) -> T {
        let pts: Vec<[T; 4]> = self.entries.iter().map(|e| e.objectives.minimization()).collect();
        hypervolume(&pts, reference)
    }

    /// Entries in a canonical order: ascending rate, then distortion, effort,
    /// energy and genotype text.
    pub fn sorted_entries(&self) -> Vec<&ArchiveEntry<T>> {
        let mut v: Vec<&ArchiveEntry<T>> = self.entries.iter().collect();
        v.sort_by(|a, b| {
            let (x, y) = (a.objectives.minimization(), b.objectives.minimization());
            x.iter()
                .zip(&y)
                .map(|(p, q)| p.partial_cmp(q).expect("finite objectives"))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.genotype.to_compact().cmp(&b.genotype.to_compact()))
        });
        v
    }

    /// Writes the archive as CSV (see [`ARCHIVE_CSV_HEADER`]) in canonical
    /// order. `rank` is 0 for every row: archive entries form one front.
    pub fn write_csv<W: Write>(&self, qp: u8, out: W) -> Result<(), DseError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(ARCHIVE_CSV_HEADER)?;
        for e in self.sorted_entries() {
            let o = &e.objectives;
            w.write_record([
                qp.to_string(),
                e.genotype.to_compact(),
                o.rate.to_string(),
                o.psnr.to_string(),
                o.effort.to_string(),
                o.energy.to_string(),
                "0".to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
