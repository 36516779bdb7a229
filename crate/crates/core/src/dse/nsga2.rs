use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::archive::ParetoArchive;
use super::operators::{crossover, mutate};
use super::pareto::{crowding_distance, nondominated_sort};
use super::DseError;
use crate::codec::CodecConfig;
use crate::media::Sequence;
use crate::objectives::{collect_objectives, EnergyTable, ObjectiveVector};
use crate::pipeline::{encode_sequence, Genotype};

/// Parameters of one optimization run at one QP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DseConfig {
    pub population: usize,
    /// Number of generations after the initial population.
    pub generations: usize,
    pub qp: u8,
    pub crossover_prob: f64,
    pub swap_mutation_prob: f64,
    pub guard_mutation_prob: f64,
    /// Probability that a randomly drawn guard is unconditional.
    pub p_always: f64,
    pub seed: u64,
    pub archive_capacity: Option<usize>,
    pub codec: CodecConfig,
}

impl Default for DseConfig {
    fn default() -> Self {
        DseConfig {
            population: 40,
            generations: 200,
            qp: 20,
            crossover_prob: 0.9,
            swap_mutation_prob: 0.5,
            guard_mutation_prob: 0.5,
            p_always: 0.25,
            seed: 1,
            archive_capacity: None,
            codec: CodecConfig::default(),
        }
    }
}

impl DseConfig {
    pub fn validate(&self) -> Result<(), DseError> {
        if self.population < 4 {
            return Err(DseError::Config(format!(
                "population {} below the minimum of 4",
                self.population
            )));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("swap_mutation_prob", self.swap_mutation_prob),
            ("guard_mutation_prob", self.guard_mutation_prob),
            ("p_always", self.p_always),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(DseError::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.qp > 51 {
            return Err(DseError::Config(format!("qp {} outside 0..=51", self.qp)));
        }
        Ok(())
    }
}

/// A population member.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub objectives: Option<ObjectiveVector<f64>>,
    /// Front index; meaningful after the population has been ranked.
    pub rank: usize,
    pub crowding: f64,
}

impl Individual {
    fn new(genotype: Genotype) -> Self {
        Individual {
            genotype,
            objectives: None,
            rank: usize::MAX,
            crowding: 0.0,
        }
    }

    fn point(&self) -> [f64; 4] {
        self.objectives
            .expect("ranked individuals are evaluated")
            .minimization()
    }
}

/// State handed to the observer after every generation (generation 0 is the
/// initial population).
#[derive(Debug)]
pub struct GenerationReport<'a> {
    pub generation: usize,
    pub population: &'a [Individual],
    pub archive: &'a ParetoArchive<f64>,
    /// Distinct genotypes encoded so far.
    pub evaluations: usize,
    /// Evaluations answered from the cache so far.
    pub cache_hits: usize,
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct DseRun {
    pub archive: ParetoArchive<f64>,
    pub population: Vec<Individual>,
    pub generations: usize,
    pub evaluations: usize,
    pub cache_hits: usize,
}

/// Objectives of `genotype` averaged over `sequences`.
pub fn evaluate_genotype(
    genotype: &Genotype,
    sequences: &[Sequence],
    qp: u8,
    codec: &CodecConfig,
    table: &EnergyTable<f64>,
) -> Result<ObjectiveVector<f64>, DseError> {
    let wrap = |source: String| DseError::Evaluation {
        genotype: genotype.to_compact(),
        reason: source,
    };
    let mut per_seq = Vec::with_capacity(sequences.len());
    for seq in sequences {
        let report = encode_sequence(seq, genotype, qp, codec).map_err(|e| wrap(e.to_string()))?;
        per_seq.push(collect_objectives(&report, table).map_err(|e| wrap(e.to_string()))?);
    }
    ObjectiveVector::mean(&per_seq).ok_or(DseError::NoSequences)
}

struct Evaluator<'a> {
    sequences: &'a [Sequence],
    table: &'a EnergyTable<f64>,
    qp: u8,
    codec: &'a CodecConfig,
    cache: HashMap<Genotype, ObjectiveVector<f64>>,
    evaluations: usize,
}

impl Evaluator<'_> {
    /// Fills in the objectives of every unevaluated individual. Distinct new
    /// genotypes are encoded in parallel; results are gathered in order, so
    /// the outcome does not depend on the thread count.
    fn evaluate(&mut self, pop: &mut [Individual]) -> Result<(), DseError> {
        let mut todo: Vec<Genotype> = Vec::new();
        for ind in pop.iter() {
            if ind.objectives.is_none() && !self.cache.contains_key(&ind.genotype) && !todo.contains(&ind.genotype) {
                todo.push(ind.genotype.clone());
            }
        }
        let results: Vec<Result<ObjectiveVector<f64>, DseError>> = todo
            .par_iter()
            .map(|g| evaluate_genotype(g, self.sequences, self.qp, self.codec, self.table))
            .collect();
        self.evaluations += todo.len();
        for (g, r) in todo.into_iter().zip(results) {
            self.cache.insert(g, r?);
        }
        for ind in pop.iter_mut() {
            if ind.objectives.is_none() {
                ind.objectives = Some(self.cache[&ind.genotype]);
            }
        }
        Ok(())
    }
}

/// Assigns rank and crowding distance to every member.
pub fn rank_population(pop: &mut [Individual]) {
    let pts: Vec<[f64; 4]> = pop.iter().map(Individual::point).collect();
    for (rank, front) in nondominated_sort(&pts).into_iter().enumerate() {
        let d = crowding_distance(&pts, &front);
        for (k, &i) in front.iter().enumerate() {
            pop[i].rank = rank;
            pop[i].crowding = d[k];
        }
    }
}

/// `a` is preferred over `b`: lower rank, then larger crowding distance.
fn crowded_better(a: &Individual, b: &Individual) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding)
}

fn tournament<'p, R: Rng + ?Sized>(pop: &'p [Individual], rng: &mut R) -> &'p Individual {
    let i = rng.gen_range(0..pop.len());
    let j = rng.gen_range(0..pop.len());
    if crowded_better(&pop[j], &pop[i]) {
        &pop[j]
    } else {
        &pop[i]
    }
}

/// Elitist truncation of parents plus offspring to `size` members: whole
/// fronts while they fit, then the last front by decreasing crowding distance.
fn environmental_selection(mut merged: Vec<Individual>, size: usize) -> Vec<Individual> {
    let pts: Vec<[f64; 4]> = merged.iter().map(Individual::point).collect();
    let mut next = Vec::with_capacity(size);
    for (rank, front) in nondominated_sort(&pts).into_iter().enumerate() {
        if next.len() >= size {
            break;
        }
        let d = crowding_distance(&pts, &front);
        let mut members: Vec<(usize, f64)> = front.iter().copied().zip(d).collect();
        if next.len() + members.len() > size {
            members.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("comparable distances"));
            members.truncate(size - next.len());
        }
        for (i, crowd) in members {
            let mut ind = std::mem::replace(&mut merged[i], Individual::new(Genotype::exhaustive()));
            ind.rank = rank;
            ind.crowding = crowd;
            next.push(ind);
        }
    }
    rank_population(&mut next);
    next
}

fn initial_population<R: Rng + ?Sized>(config: &DseConfig, rng: &mut R) -> Vec<Individual> {
    let mut pop = vec![
        Individual::new(Genotype::exhaustive()),
        Individual::new(Genotype::heuristic()),
    ];
    while pop.len() < config.population {
        pop.push(Individual::new(Genotype::random(rng, config.p_always)));
    }
    pop.truncate(config.population);
    pop
}

/// Runs the search and returns the final archive.
pub fn run_dse(
    config: &DseConfig,
    sequences: &[Sequence],
    table: &EnergyTable<f64>,
) -> Result<ParetoArchive<f64>, DseError> {
    Ok(run_dse_observed(config, sequences, table, |_| {})?.archive)
}

/// As [`run_dse`], calling `observer` after the initial population and after
/// every generation.
pub fn run_dse_observed<F>(
    config: &DseConfig,
    sequences: &[Sequence],
    table: &EnergyTable<f64>,
    mut observer: F,
) -> Result<DseRun, DseError>
where
    F: FnMut(&GenerationReport<'_>),
{
    config.validate()?;
    if sequences.is_empty() {
        return Err(DseError::NoSequences);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eval = Evaluator {
        sequences,
        table,
        qp: config.qp,
        codec: &config.codec,
        cache: HashMap::new(),
        evaluations: 0,
    };
    let mut archive = match config.archive_capacity {
        Some(c) => ParetoArchive::with_capacity(c),
        None => ParetoArchive::new(),
    };
    let mut requested = 0usize;

    let mut pop = initial_population(config, &mut rng);
    requested += pop.len();
    eval.evaluate(&mut pop)?;
    for ind in &pop {
        archive.insert(ind.genotype.clone(), ind.objectives.expect("evaluated"), 0);
    }
    rank_population(&mut pop);
    observer(&GenerationReport {
        generation: 0,
        population: &pop,
        archive: &archive,
        evaluations: eval.evaluations,
        cache_hits: requested - eval.evaluations,
    });

    for generation in 1..=config.generations {
        let mut offspring = Vec::with_capacity(config.population + 1);
        while offspring.len() < config.population {
            let p1 = tournament(&pop, &mut rng).genotype.clone();
            let p2 = tournament(&pop, &mut rng).genotype.clone();
            let (c1, c2) = if rng.gen_bool(config.crossover_prob) {
                crossover(&p1, &p2, &mut rng)?
            } else {
                (p1, p2)
            };
            offspring.push(Individual::new(mutate(&c1, &mut rng, config)));
            offspring.push(Individual::new(mutate(&c2, &mut rng, config)));
        }
        offspring.truncate(config.population);
        requested += offspring.len();
        eval.evaluate(&mut offspring)?;
        for ind in &offspring {
            archive.insert(ind.genotype.clone(), ind.objectives.expect("evaluated"), generation);
        }
        let mut merged = pop;
        merged.extend(offspring);
        pop = environmental_selection(merged, config.population);
        observer(&GenerationReport {
            generation,
            population: &pop,
            archive: &archive,
            evaluations: eval.evaluations,
            cache_hits: requested - eval.evaluations,
        });
    }
    Ok(DseRun {
        archive,
        population: pop,
        generations: config.generations,
        evaluations: eval.evaluations,
        cache_hits: requested - eval.evaluations,
    })
}
