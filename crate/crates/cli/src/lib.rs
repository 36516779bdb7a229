//! Campaign orchestration behind the `modedse` binary.
//!
//! A campaign is one TOML file naming training and validation sequences,
//! the search parameters and an output directory. `MODEDSE_OUTPUT_DIR`
//! overrides the output directory and nothing else.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use modedse::codec::CodecConfig;
use modedse::dse::{
    combine_across_qps, evaluate_genotype, run_dse_observed, Anchor, CombinedSolution, DseConfig,
    CAMPAIGN_QPS,
};
use modedse::media::{load_raw_video, synthesize_sequence, RawLayout};
use modedse::metrics::{write_comparison_csv, ComparisonRow, RdCurve, RdPoint};
use modedse::objectives::EnergyTable;
use modedse::pipeline::{encode_sequence, Guard};
use modedse::{EncodeReport, Genotype, ObjectiveVector, ParetoArchive, Sequence, SyntheticKind};

pub const OUTPUT_DIR_ENV: &str = "MODEDSE_OUTPUT_DIR";
pub const COMBINED_FILE: &str = "combined.txt";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const BASELINE_FILE: &str = "baseline.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const SCATTER_CSV_HEADER: [&str; 8] = [
    "qp",
    "genotype",
    "rate_increase_pct",
    "effort_savings_pct",
    "energy_savings_pct",
    "psnr_delta_db",
    "rate_bits",
    "effort",
];

pub fn archive_file(qp: u8) -> String {
    format!("archive_qp{qp}.csv")
}

/// Where a sequence comes from: a generator or a raw file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub name: String,
    /// Synthetic content kind; exclusive with `path`.
    #[serde(default)]
    pub synthetic: Option<SyntheticKind>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    #[serde(default)]
    pub layout: RawLayout,
    #[serde(default)]
    pub seed: u64,
}

impl SequenceSpec {
    /// Relative paths resolve against `base`, the directory of the config.
    pub fn load(&self, base: &Path) -> Result<Sequence> {
        let seq = match (&self.synthetic, &self.path) {
            (Some(kind), None) => synthesize_sequence(*kind, self.width, self.height, self.frames, self.seed)
                .with_context(|| format!("sequence `{}`", self.name))?,
            (None, Some(p)) => {
                let full = if p.is_absolute() { p.clone() } else { base.join(p) };
                load_raw_video(&full, self.width, self.height, self.frames, self.layout)
                    .with_context(|| format!("sequence `{}` from {}", self.name, full.display()))?
            }
            _ => bail!("sequence `{}`: give exactly one of `synthetic` and `path`", self.name),
        };
        let frames = seq.frames().to_vec();
        Ok(Sequence::new(self.name.clone(), frames)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Energy table file; the built-in table when absent.
    #[serde(default)]
    pub energy_table: Option<PathBuf>,
    /// Selection weights over `[rate, -psnr, effort, energy]`.
    #[serde(default = "default_anchor")]
    pub anchor: [f64; 4],
    /// Search parameters shared by every QP; `qp` is ignored here.
    #[serde(default)]
    pub dse: DseConfig,
    /// Per-QP overrides of `dse`, keyed by QP, e.g. `[per_qp.40]`.
    #[serde(default)]
    pub per_qp: BTreeMap<String, toml::Table>,
    #[serde(default)]
    pub train: Vec<SequenceSpec>,
    #[serde(default)]
    pub validate: Vec<SequenceSpec>,
    /// Location of the config file, for resolving relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("modedse-out")
}

fn default_anchor() -> [f64; 4] {
    Anchor::BALANCED.weights
}

impl CampaignConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: CampaignConfig = toml::from_str(text).context("parsing campaign config")?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.check()?;
        Ok(cfg)
    }

    /// Reads the file and applies the output directory override.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut cfg = Self::from_toml(&text, &base).with_context(|| format!("in {}", path.display()))?;
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }

    /// Checks that need no encoding, run before any computation.
    pub fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for s in &self.train {
            ensure!(seen.insert(&s.name), "training sequence `{}` listed twice", s.name);
        }
        let mut vseen = BTreeSet::new();
        for s in &self.validate {
            ensure!(vseen.insert(&s.name), "validation sequence `{}` listed twice", s.name);
            ensure!(
                !seen.contains(&s.name),
                "sequence `{}` is in both the training and the validation set; the sets must be disjoint",
                s.name
            );
        }
        for key in self.per_qp.keys() {
            let qp: u8 = key.parse().with_context(|| format!("per_qp key `{key}` is not a QP"))?;
            ensure!(CAMPAIGN_QPS.contains(&qp), "per_qp key {qp} is not one of {CAMPAIGN_QPS:?}");
        }
        ensure!(self.anchor.iter().all(|w| w.is_finite() && *w >= 0.0), "anchor weights must be finite and non-negative");
        for qp in CAMPAIGN_QPS {
            self.dse_for(qp)?.validate()?;
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        if self.output_dir.is_absolute() {
            self.output_dir.clone()
        } else {
            self.base_dir.join(&self.output_dir)
        }
    }

    /// The shared search parameters with the QP's overrides applied.
    pub fn dse_for(&self, qp: u8) -> Result<DseConfig> {
        let mut merged = toml::Table::try_from(&self.dse).context("serializing dse section")?;
        if let Some(over) = self.per_qp.get(&qp.to_string()) {
            for (k, v) in over {
                merged.insert(k.clone(), v.clone());
            }
        }
        let mut cfg: DseConfig = merged.try_into().with_context(|| format!("per_qp.{qp}"))?;
        cfg.qp = qp;
        Ok(cfg)
    }

    pub fn energy_table(&self) -> Result<EnergyTable<f64>> {
        match &self.energy_table {
            None => Ok(EnergyTable::builtin()),
            Some(p) => {
                let full = self.base_dir.join(p);
                let text = fs::read_to_string(&full).with_context(|| format!("reading energy table {}", full.display()))?;
                let parsed = EnergyTable::parse(&text).with_context(|| format!("in {}", full.display()))?;
                let missing = parsed.table.missing_features();
                ensure!(missing.is_empty(), "energy table {} lacks {missing:?}", full.display());
                Ok(parsed.table)
            }
        }
    }

    pub fn load_set(&self, specs: &[SequenceSpec]) -> Result<Vec<Sequence>> {
        specs.iter().map(|s| s.load(&self.base_dir)).collect()
    }
}

/// One archive point relative to the exhaustive baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow {
    pub qp: u8,
    pub genotype: String,
    pub rate_increase_pct: f64,
    pub effort_savings_pct: f64,
    pub energy_savings_pct: f64,
    pub psnr_delta_db: f64,
    pub rate_bits: f64,
    pub effort: f64,
}

impl ScatterRow {
    pub fn new(qp: u8, genotype: &Genotype, o: &ObjectiveVector, baseline: &ObjectiveVector) -> Self {
        ScatterRow {
            qp,
            genotype: genotype.to_compact(),
            rate_increase_pct: (o.rate / baseline.rate - 1.0) * 100.0,
            effort_savings_pct: (1.0 - o.effort / baseline.effort) * 100.0,
            energy_savings_pct: (1.0 - o.energy / baseline.energy) * 100.0,
            psnr_delta_db: o.psnr - baseline.psnr,
            rate_bits: o.rate,
            effort: o.effort,
        }
    }
}

pub struct TrainOutcome {
    pub archives: BTreeMap<u8, ParetoArchive>,
    pub baselines: BTreeMap<u8, ObjectiveVector>,
    pub combined: CombinedSolution,
    pub files: Vec<PathBuf>,
}

/// Runs one search per campaign QP and writes archives, the scatter data,
/// the baseline objectives and the combined solution.
pub fn cmd_train(cfg: &CampaignConfig, progress: &mut dyn FnMut(&str)) -> Result<TrainOutcome> {
    cfg.check()?;
    ensure!(!cfg.train.is_empty(), "no training sequences configured");
    let seqs = cfg.load_set(&cfg.train)?;
    let table = cfg.energy_table()?;
    let out = cfg.output_dir();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let mut archives = BTreeMap::new();
    let mut baselines = BTreeMap::new();
    let mut files = Vec::new();
    for qp in CAMPAIGN_QPS {
        let dse = cfg.dse_for(qp)?;
        let start = Instant::now();
        let baseline = evaluate_genotype(&Genotype::exhaustive(), &seqs, qp, &dse.codec, &table)?;
        let total = dse.generations;
        let run = run_dse_observed(&dse, &seqs, &table, |g| {
            if g.generation == total || g.generation % 10 == 0 {
                progress(&format!(
                    "qp {qp}: generation {}/{total}, archive {}, {} encodes",
                    g.generation,
                    g.archive.len(),
                    g.evaluations
                ));
            }
        })?;
        progress(&format!("qp {qp}: done in {:.1?}", start.elapsed()));
        let path = out.join(archive_file(qp));
        let mut buf = Vec::new();
        run.archive.write_csv(qp, &mut buf)?;
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        files.push(path);
        archives.insert(qp, run.archive);
        baselines.insert(qp, baseline);
    }

    let scatter = out.join(SCATTER_FILE);
    let mut w = csv::Writer::from_path(&scatter).with_context(|| format!("writing {}", scatter.display()))?;
    for (qp, archive) in &archives {
        for e in archive.sorted_entries() {
            w.serialize(ScatterRow::new(*qp, &e.genotype, &e.objectives, &baselines[qp]))?;
        }
    }
    w.flush()?;
    files.push(scatter);

    let base = out.join(BASELINE_FILE);
    let mut w = csv::Writer::from_path(&base)?;
    w.write_record(["qp", "rate_bits", "psnr_db", "effort", "energy"])?;
    for (qp, b) in &baselines {
        w.write_record([qp.to_string(), b.rate.to_string(), b.psnr.to_string(), b.effort.to_string(), b.energy.to_string()])?;
    }
    w.flush()?;
    files.push(base);

    let combined = combine_across_qps(&archives, &Anchor { weights: cfg.anchor })?;
    let path = out.join(COMBINED_FILE);
    fs::write(&path, combined.to_string()).with_context(|| format!("writing {}", path.display()))?;
    files.push(path);
    Ok(TrainOutcome {
        archives,
        baselines,
        combined,
        files,
    })
}

/// Reads either a per-QP combined file or a single genotype, which then
/// applies at every QP.
pub fn read_solution(path: &Path) -> Result<CombinedSolution> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let solution = if text.lines().any(|l| l.trim_start().starts_with('[')) {
        text.parse::<CombinedSolution>().with_context(|| format!("in {}", path.display()))?
    } else {
        let g: Genotype = text.parse().with_context(|| format!("in {}", path.display()))?;
        CombinedSolution::uniform(&g)
    };
    for qp in CAMPAIGN_QPS {
        let g = solution.get(qp).with_context(|| format!("{} has no genotype for qp {qp}", path.display()))?;
        let v = g.validate();
        ensure!(v.is_empty(), "genotype for qp {qp} in {} is invalid: {}", path.display(), join(&v));
    }
    Ok(solution)
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join("; ")
}

fn curve(seq: &Sequence, solution: &CombinedSolution, codec: &CodecConfig, table: &EnergyTable<f64>) -> Result<RdCurve<f64>> {
    let mut pts = Vec::with_capacity(4);
    for qp in CAMPAIGN_QPS {
        let g = solution.get(qp).expect("checked by read_solution");
        let o = evaluate_genotype(g, std::slice::from_ref(seq), qp, codec, table)?;
        pts.push(RdPoint {
            rate: o.rate,
            psnr: o.psnr,
            energy: o.energy,
            effort: o.effort,
        });
    }
    let pts: [RdPoint<f64>; 4] = pts.try_into().expect("four campaign QPs");
    RdCurve::new(pts).with_context(|| format!("operating points of `{}`", seq.name()))
}

/// Compares `solution` against the exhaustive baseline on every validation
/// sequence and writes the comparison report.
pub fn cmd_validate(cfg: &CampaignConfig, solution: &CombinedSolution, progress: &mut dyn FnMut(&str)) -> Result<(Vec<ComparisonRow>, PathBuf)> {
    cfg.check()?;
    ensure!(!cfg.validate.is_empty(), "no validation sequences configured");
    let seqs = cfg.load_set(&cfg.validate)?;
    let table = cfg.energy_table()?;
    let codec = cfg.dse.codec.clone();
    let baseline = CombinedSolution::uniform(&Genotype::exhaustive());
    let mut rows = Vec::new();
    for seq in &seqs {
        let reference = curve(seq, &baseline, &codec, &table)?;
        let test = curve(seq, solution, &codec, &table)?;
        let row = ComparisonRow::compute(seq.name(), &reference, &test).with_context(|| format!("comparing `{}`", seq.name()))?;
        progress(&format!(
            "{}: BD-rate {:+.2}%, BD-energy {:+.2}%, effort savings {:.1}%",
            row.sequence, row.bd_rate_pct, row.bd_energy_pct, row.effort_savings_pct
        ));
        rows.push(row);
    }
    let out = cfg.output_dir();
    fs::create_dir_all(&out)?;
    let path = out.join(COMPARISON_FILE);
    let mut buf = Vec::new();
    write_comparison_csv(&rows, &mut buf)?;
    fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
    Ok((rows, path))
}

/// Human-readable summary of a genotype with the modes that can never run.
pub fn inspect_genotype(g: &Genotype) -> String {
    let mut out = String::new();
    let mut unreachable_total = 0;
    for d in 0..4u8 {
        let order = g.order(d);
        let guards = g.guards(d);
        let reach = g.reachability(d);
        out.push_str(&format!("depth {d} (CU {0}x{0})\n", 64 >> d));
        let fmt_list = |v: Vec<String>| v.join(",");
        out.push_str(&format!("  O({d}) = {{{}}}\n", fmt_list(order.iter().map(|m| m.index().to_string()).collect())));
        out.push_str(&format!("  G({d}) = {{{}}}\n", fmt_list(guards.iter().map(|x| x.to_string()).collect())));
        let always: Vec<String> = order
            .iter()
            .zip(guards)
            .filter(|(_, gd)| **gd == Guard::Always)
            .map(|(m, _)| m.to_string())
            .collect();
        out.push_str(&format!("  unconditionally tested: {}\n", always.join(", ")));
        let dead: Vec<String> = order
            .iter()
            .zip(&reach)
            .filter(|(_, r)| !**r)
            .map(|(m, _)| m.to_string())
            .collect();
        unreachable_total += dead.len();
        if !dead.is_empty() {
            out.push_str(&format!("  unreachable: {}\n", dead.join(", ")));
        }
    }
    if unreachable_total == 0 {
        out.push_str("no unreachable modes\n");
    } else {
        out.push_str(&format!("{unreachable_total} unreachable modes\n"));
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EncodeOutput {
    pub wall_clock_ms: f64,
    pub genotype: String,
    pub report: EncodeReport,
}

pub fn cmd_encode(seq: &Sequence, genotype: &Genotype, qp: u8, codec: &CodecConfig) -> Result<EncodeOutput> {
    let start = Instant::now();
    let report = encode_sequence(seq, genotype, qp, codec)?;
    Ok(EncodeOutput {
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
        genotype: genotype.to_compact(),
        report,
    })
}
