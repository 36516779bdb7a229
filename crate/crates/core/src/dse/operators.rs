//! Variation operators. Both keep every genotype invariant: orders stay
//! permutations of the depth's mode set and the two leading guards are never
//! touched.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{DseConfig, DseError};
use crate::pipeline::{random_guard, Genotype, OrderVector, DEPTHS, UNGUARDED_PREFIX};

/// Order crossover (OX). A random segment `[a, b]` of one parent is kept in
/// place; the remaining positions are filled left to right with the other
/// parent's modes in their relative order.
pub fn order_crossover<R: Rng + ?Sized>(
    p1: &OrderVector,
    p2: &OrderVector,
    rng: &mut R,
) -> Result<(OrderVector, OrderVector), DseError> {
    let (a, b) = crossover_cut(p1, p2, rng)?;
    Ok((ox_child(p1, p2, a, b), ox_child(p2, p1, a, b)))
}

fn crossover_cut<R: Rng + ?Sized>(
    p1: &OrderVector,
    p2: &OrderVector,
    rng: &mut R,
) -> Result<(usize, usize), DseError> {
    if p1.depth != p2.depth || p1.len() != p2.len() {
        return Err(DseError::DepthMismatch {
            left: p1.depth,
            right: p2.depth,
        });
    }
    let n = p1.len();
    if n == 0 {
        return Ok((0, 0));
    }
    let mut a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    Ok((a, b))
}

fn ox_child(keep: &OrderVector, fill: &OrderVector, a: usize, b: usize) -> OrderVector {
    let n = keep.len();
    if n == 0 {
        return keep.clone();
    }
    let segment = &keep.order[a..=b];
    let mut rest = fill.order.iter().filter(|m| !segment.contains(m));
    let order = (0..n)
        .map(|i| {
            if (a..=b).contains(&i) {
                keep.order[i]
            } else {
                *rest.next().expect("parents are permutations of one set")
            }
        })
        .collect();
    OrderVector::new(keep.depth, order)
}

/// Per depth, OX on the orders; each child takes its guards from the parent
/// whose segment it kept for positions inside the segment and from the other
/// parent elsewhere.
pub fn crossover<R: Rng + ?Sized>(
    g1: &Genotype,
    g2: &Genotype,
    rng: &mut R,
) -> Result<(Genotype, Genotype), DseError> {
    let mut c1 = g1.clone();
    let mut c2 = g2.clone();
    for d in 0..DEPTHS {
        let (o1, o2) = (&g1.orders[d], &g2.orders[d]);
        let (a, b) = crossover_cut(o1, o2, rng)?;
        c1.orders[d] = ox_child(o1, o2, a, b);
        c2.orders[d] = ox_child(o2, o1, a, b);
        let (x1, x2) = (&g1.guards[d].guards, &g2.guards[d].guards);
        for i in 0..x1.len() {
            let inside = (a..=b).contains(&i);
            c1.guards[d].guards[i] = if inside { x1[i] } else { x2[i] };
            c2.guards[d].guards[i] = if inside { x2[i] } else { x1[i] };
        }
    }
    Ok((c1, c2))
}

/// Per depth: with `swap_mutation_prob` swaps two order positions, and with
/// `guard_mutation_prob` redraws one guard slot at index >= 2.
pub fn mutate<R: Rng + ?Sized>(genotype: &Genotype, rng: &mut R, config: &DseConfig) -> Genotype {
    let mut g = genotype.clone();
    for d in 0..DEPTHS {
        if config.swap_mutation_prob > 0.0 && rng.gen_bool(config.swap_mutation_prob) {
            let order = &mut g.orders[d].order;
            let picks: Vec<usize> = (0..order.len()).collect::<Vec<_>>().choose_multiple(rng, 2).copied().collect();
            if let [i, j] = picks[..] {
                order.swap(i, j);
            }
        }
        if config.guard_mutation_prob > 0.0 && rng.gen_bool(config.guard_mutation_prob) {
            let n = g.guards[d].guards.len();
            if n > UNGUARDED_PREFIX {
                let slot = rng.gen_range(UNGUARDED_PREFIX..n);
                g.guards[d].guards[slot] = random_guard(rng, d as u8, config.p_always);
            }
        }
    }
    g
}
