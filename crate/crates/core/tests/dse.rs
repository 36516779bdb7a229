use modedse::dse::{crossover, dominates, mutate, run_dse, run_dse_observed, DseConfig, ParetoArchive};
use modedse::media::synthesize_sequence;
use modedse::objectives::EnergyTable;
use modedse::{Genotype, Sequence, SyntheticKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tiny_set() -> Vec<Sequence> {
    vec![
        synthesize_sequence(SyntheticKind::MovingBlock, 64, 64, 2, 1).unwrap(),
        synthesize_sequence(SyntheticKind::Noise, 64, 64, 2, 2).unwrap(),
    ]
}

fn small_config(generations: usize) -> DseConfig {
    DseConfig {
        population: 8,
        generations,
        qp: 30,
        seed: 99,
        ..DseConfig::default()
    }
}

fn csv(a: &ParetoArchive<f64>) -> String {
    let mut out = Vec::new();
    a.write_csv(30, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn zero_generations_archive_the_initial_front() {
    let mut initial = Vec::new();
    let run = run_dse_observed(&small_config(0), &tiny_set(), &EnergyTable::builtin(), |g| {
        initial = g.population.iter().map(|i| (i.genotype.clone(), i.objectives.unwrap())).collect();
    })
    .unwrap();
    assert_eq!(initial.len(), 8);
    let pts: Vec<[f64; 4]> = initial.iter().map(|(_, o)| o.minimization()).collect();
    let mut expected: Vec<&Genotype> = Vec::new();
    for (i, (g, _)) in initial.iter().enumerate() {
        let dominated = pts.iter().any(|q| dominates(q, &pts[i]));
        let duplicate = pts[..i].contains(&pts[i]);
        if !dominated && !duplicate {
            expected.push(g);
        }
    }
    let got: Vec<&Genotype> = run.archive.entries().iter().map(|e| &e.genotype).collect();
    assert_eq!(got, expected);
}

#[test]
fn same_seed_same_archive() {
    let seqs = tiny_set();
    let table = EnergyTable::builtin();
    let a = run_dse(&small_config(3), &seqs, &table).unwrap();
    let b = run_dse(&small_config(3), &seqs, &table).unwrap();
    assert_eq!(csv(&a), csv(&b));
    assert!(a.is_mutually_nondominated());
}

#[test]
fn archive_only_grows_in_hypervolume() {
    let mut volumes = Vec::new();
    let reference = [1e9, 0.0, 1e12, 1e12];
    run_dse_observed(&small_config(4), &tiny_set(), &EnergyTable::builtin(), |g| {
        volumes.push(g.archive.hypervolume(reference));
    })
    .unwrap();
    assert_eq!(volumes.len(), 5);
    assert!(volumes.windows(2).all(|w| w[1] >= w[0]), "{volumes:?}");
}

#[test]
fn invalid_configurations_are_rejected() {
    let table = EnergyTable::builtin();
    let mut c = small_config(1);
    c.population = 2;
    assert!(run_dse(&c, &tiny_set(), &table).is_err());
    let mut c = small_config(1);
    c.crossover_prob = 1.5;
    assert!(run_dse(&c, &tiny_set(), &table).is_err());
    assert!(run_dse(&small_config(1), &[], &table).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn operators_preserve_validity(seed in any::<u64>(), p in 0.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Genotype::random(&mut rng, p);
        let b = Genotype::random(&mut rng, 1.0 - p);
        let (c, d) = crossover(&a, &b, &mut rng).unwrap();
        let cfg = DseConfig { swap_mutation_prob: 1.0, guard_mutation_prob: 1.0, p_always: p, ..DseConfig::default() };
        for g in [&c, &d, &mutate(&c, &mut rng, &cfg), &mutate(&d, &mut rng, &cfg)] {
            prop_assert!(g.is_valid(), "{:?}", g.validate());
            let text = g.to_string();
            prop_assert_eq!(&text.parse::<Genotype>().unwrap(), g);
        }
    }
}
