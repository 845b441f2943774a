//! Baseline variation operators: binary tournament selection, simulated
//! binary crossover (SBX), and polynomial mutation, all bound-respecting.
//!
//! SBX spreads children around the parents with distribution index
//! `eta_c` (larger = closer to the parents); polynomial mutation perturbs
//! single genes with index `eta_m`. Both use the standard bounded
//! formulations, so children never need repair.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::sim::{Genome, GenomeBounds};

use super::Individual;

/// SBX distribution index.
pub const ETA_C: f64 = 20.0;
/// Polynomial-mutation distribution index.
pub const ETA_M: f64 = 20.0;
/// Per-pair crossover probability.
pub const P_CROSSOVER: f64 = 0.9;

/// Binary tournament on `(rank, crowding)`: lower rank wins, ties go to
/// the larger crowding distance, and a full tie keeps the first pick.
pub fn binary_tournament(population: &[Individual], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.gen_range(0..population.len());
    let b = rng.gen_range(0..population.len());
    let (ia, ib) = (&population[a], &population[b]);
    if ib.rank < ia.rank || (ib.rank == ia.rank && ib.crowding > ia.crowding) {
        b
    } else {
        a
    }
}

/// Bounded SBX on two parents. Each gene crosses with probability 0.5;
/// crossed genes draw a spread factor from the `eta_c` polynomial family,
/// adjusted per side so children respect the bounds, and children swap
/// sides with probability 0.5. Uncrossed genes copy through.
pub fn sbx_crossover(
    a: &Genome,
    b: &Genome,
    bounds: &GenomeBounds,
    rng: &mut ChaCha8Rng,
) -> (Genome, Genome) {
    let dim = a.len();
    let mut c1 = a.values.clone();
    let mut c2 = b.values.clone();
    for k in 0..dim {
        if rng.gen::<f64>() > 0.5 {
            continue;
        }
        let (y1, y2) = (a.values[k].min(b.values[k]), a.values[k].max(b.values[k]));
        if y2 - y1 < 1e-14 {
            continue;
        }
        let (lo, hi) = (bounds.lower[k], bounds.upper[k]);
        let u: f64 = rng.gen();

        let spread = |beta: f64| -> f64 {
            let alpha = 2.0 - beta.powi(-(ETA_C as i32 + 1));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (ETA_C + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (ETA_C + 1.0))
            }
        };

        let beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
        let betaq = spread(beta_lo);
        let mut v1 = 0.5 * ((y1 + y2) - betaq * (y2 - y1));

        let beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
        let betaq = spread(beta_hi);
        let mut v2 = 0.5 * ((y1 + y2) + betaq * (y2 - y1));

        v1 = v1.clamp(lo, hi);
        v2 = v2.clamp(lo, hi);
        if rng.gen::<f64>() <= 0.5 {
            std::mem::swap(&mut v1, &mut v2);
        }
        c1[k] = v1;
        c2[k] = v2;
    }
    (Genome::new(c1), Genome::new(c2))
}

/// Bounded polynomial mutation: each gene mutates with probability `pm`,
/// moving by a signed perturbation whose magnitude shrinks near the
/// violated bound.
pub fn polynomial_mutation(
    genome: &mut Genome,
    bounds: &GenomeBounds,
    pm: f64,
    rng: &mut ChaCha8Rng,
) {
    for k in 0..genome.len() {
        if rng.gen::<f64>() >= pm {
            continue;
        }
        let (lo, hi) = (bounds.lower[k], bounds.upper[k]);
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        let y = genome.values[k];
        let d1 = (y - lo) / range;
        let d2 = (hi - y) / range;
        let u: f64 = rng.gen();
        let mut_pow = 1.0 / (ETA_M + 1.0);
        let delta = if u <= 0.5 {
            let xy = 1.0 - d1;
            let val = 2.0 * u + (1.0 - 2.0 * u) * xy.powf(ETA_M + 1.0);
            val.powf(mut_pow) - 1.0
        } else {
            let xy = 1.0 - d2;
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(ETA_M + 1.0);
            1.0 - val.powf(mut_pow)
        };
        genome.values[k] = (y + delta * range).clamp(lo, hi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{ObjectiveKind, ObjectivePoint};
    use crate::seeding::stream;

    fn bounds(dim: usize) -> GenomeBounds {
        GenomeBounds { lower: vec![0.0; dim], upper: vec![10.0; dim] }
    }

    #[test]
    fn sbx_children_straddle_the_parent_midpoint_inside_bounds() {
        let b = bounds(6);
        let p1 = Genome::new(vec![1.0, 9.0, 5.0, 0.0, 10.0, 3.3]);
        let p2 = Genome::new(vec![2.0, 3.0, 5.0, 10.0, 0.0, 3.3]);
        let mut rng = stream(21, &[0]);
        for _ in 0..2000 {
            let (c1, c2) = sbx_crossover(&p1, &p2, &b, &mut rng);
            assert!(b.contains(&c1) && b.contains(&c2));
            for k in 0..6 {
                // Per gene, the side-adjusted spread keeps the lower child
                // in [lo, midpoint] and the upper in [midpoint, hi].
                let mid = 0.5 * (p1.values[k] + p2.values[k]);
                let (lo_child, hi_child) = (
                    c1.values[k].min(c2.values[k]),
                    c1.values[k].max(c2.values[k]),
                );
                assert!(lo_child <= mid + 1e-12 && hi_child >= mid - 1e-12);
            }
        }
    }

    #[test]
    fn sbx_copies_identical_genes_through() {
        let b = bounds(2);
        let p1 = Genome::new(vec![4.2, 4.2]);
        let p2 = Genome::new(vec![4.2, 4.2]);
        let mut rng = stream(22, &[0]);
        let (c1, c2) = sbx_crossover(&p1, &p2, &b, &mut rng);
        assert_eq!(c1, p1);
        assert_eq!(c2, p2);
    }

    #[test]
    fn mutation_respects_bounds_and_rate() {
        let b = bounds(1000);
        let mut g = Genome::new(vec![5.0; 1000]);
        let mut rng = stream(23, &[0]);
        polynomial_mutation(&mut g, &b, 0.1, &mut rng);
        assert!(b.contains(&g));
        let changed = g.values.iter().filter(|&&v| v != 5.0).count();
        // Binomial(1000, 0.1): far outside [40, 200] would mean a rate bug.
        assert!((40..=200).contains(&changed), "changed {changed} genes at pm=0.1");

        // pm = 0 leaves the genome untouched; pm = 1 moves essentially all
        // genes.
        let mut g0 = Genome::new(vec![5.0; 100]);
        polynomial_mutation(&mut g0, &bounds(100), 0.0, &mut stream(23, &[1]));
        assert_eq!(g0.values, vec![5.0; 100]);
        let mut g1 = Genome::new(vec![5.0; 100]);
        polynomial_mutation(&mut g1, &bounds(100), 1.0, &mut stream(23, &[2]));
        let changed = g1.values.iter().filter(|&&v| v != 5.0).count();
        assert!(changed > 90);
    }

    #[test]
    fn mutation_from_a_bound_stays_inside() {
        let b = bounds(50);
        let mut g = Genome::new(vec![0.0; 50]);
        polynomial_mutation(&mut g, &b, 1.0, &mut stream(24, &[0]));
        assert!(b.contains(&g));
        let mut g = Genome::new(vec![10.0; 50]);
        polynomial_mutation(&mut g, &b, 1.0, &mut stream(24, &[1]));
        assert!(b.contains(&g));
    }

    #[test]
    fn tournament_prefers_rank_then_crowding() {
        let mk = |rank, crowding| {
            let mut ind = Individual::new(
                Genome::new(vec![0.0]),
                ObjectivePoint { f1: 0.0, f2: 0.0, kind: ObjectiveKind::Deterministic },
            );
            ind.rank = rank;
            ind.crowding = crowding;
            ind
        };
        let pop = vec![mk(1, 0.5), mk(0, 0.1), mk(0, 2.0)];
        let mut rng = stream(25, &[0]);
        let mut wins = [0usize; 3];
        for _ in 0..3000 {
            wins[binary_tournament(&pop, &mut rng)] += 1;
        }
        // 2 beats 1 (crowding) and both beat 0 (rank); 0 only survives
        // self-draws.
        assert!(wins[2] > wins[1]);
        assert!(wins[1] > wins[0]);
        assert!(wins[0] > 0);
    }
}
