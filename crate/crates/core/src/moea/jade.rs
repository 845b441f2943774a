//! Adaptive differential evolution: current-to-pbest/1 trials with an
//! external archive and self-adapting `F`/`CR` location parameters.
//!
//! Per trial for slot `i`:
//!
//! * `F ~ Cauchy(mu_f, 0.1)`, redrawn while nonpositive, truncated to 1;
//! * `CR ~ Normal(mu_cr, 0.1)`, clipped to `[0, 1]`;
//! * donor `v = x_i + F (x_pbest - x_i) + F (x_r1 - x_r2)`, where `pbest`
//!   is a uniform pick among the best `p` fraction of the population, `r1`
//!   a population member and `r2` a member of population ∪ archive, all
//!   distinct from `i` (and `r2` from `r1`);
//! * binomial crossover at rate `CR` with one forced dimension; crossed
//!   genes are reflected into bounds.
//!
//! After a generation, parents beaten by their trial land in the archive
//! (random eviction beyond capacity) and the location parameters drift
//! toward the successful samples: `mu_cr` by arithmetic mean, `mu_f` by
//! Lehmer mean, both at learning rate `c`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};

use crate::sim::{Genome, GenomeBounds};

use super::{reflect, Individual};

/// Learning rate for the `mu_f` / `mu_cr` drift.
pub const ADAPTATION_RATE: f64 = 0.1;
/// Fraction of the population eligible as `pbest`.
pub const PBEST_FRACTION: f64 = 0.05;

/// Adaptive state carried across generations.
#[derive(Debug, Clone)]
pub struct JadeState {
    pub mu_f: f64,
    pub mu_cr: f64,
    /// Genomes of recently replaced parents; diversity for the `r2` pick.
    pub archive: Vec<Genome>,
    pub archive_capacity: usize,
}

impl JadeState {
    /// Fresh state: both location parameters at 0.5, empty archive sized
    /// to the population.
    pub fn new(np: usize) -> Self {
        JadeState { mu_f: 0.5, mu_cr: 0.5, archive: Vec::new(), archive_capacity: np }
    }

    /// Inserts a replaced parent, evicting a random entry once full.
    pub fn push_archive(&mut self, genome: Genome, rng: &mut ChaCha8Rng) {
        self.archive.push(genome);
        if self.archive.len() > self.archive_capacity {
            let victim = rng.gen_range(0..self.archive.len());
            self.archive.swap_remove(victim);
        }
    }
}

/// Draws a scale factor: Cauchy around `mu_f` with scale 0.1, redrawn
/// while nonpositive, truncated at 1. Always lands in `(0, 1]`.
pub fn sample_f(mu_f: f64, rng: &mut ChaCha8Rng) -> f64 {
    let dist = Cauchy::new(mu_f, 0.1).expect("scale 0.1 is positive");
    loop {
        let f = dist.sample(rng);
        if f > 0.0 {
            return f.min(1.0);
        }
    }
}

/// Draws a crossover rate: Normal around `mu_cr` with sd 0.1, clipped to
/// `[0, 1]`.
pub fn sample_cr(mu_cr: f64, rng: &mut ChaCha8Rng) -> f64 {
    let dist = Normal::new(mu_cr, 0.1).expect("sd 0.1 is positive");
    dist.sample(rng).clamp(0.0, 1.0)
}

/// Lehmer mean `Σ f² / Σ f`; weights larger successful scale factors more
/// than the arithmetic mean would. Caller guarantees a nonempty, positive
/// sample.
pub fn lehmer_mean<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &v in values {
        num += v * v;
        den += v;
    }
    debug_assert!(den > 0.0, "Lehmer mean needs positive values");
    num / den
}

/// Donor construction + binomial crossover with a forced dimension;
/// crossed genes are reflected into bounds. Split out from [`jade_trial`]
/// so degenerate parameter choices stay testable.
pub(crate) fn build_trial(
    target: &Genome,
    pbest: &Genome,
    r1: &Genome,
    r2: &Genome,
    f: f64,
    cr: f64,
    bounds: &GenomeBounds,
    rng: &mut ChaCha8Rng,
) -> Genome {
    let dim = target.len();
    let forced = rng.gen_range(0..dim);
    let mut values = Vec::with_capacity(dim);
    for k in 0..dim {
        let cross = rng.gen::<f64>() < cr || k == forced;
        if cross {
            let x = target.values[k];
            let donor = x + f * (pbest.values[k] - x) + f * (r1.values[k] - r2.values[k]);
            values.push(reflect(donor, bounds.lower[k], bounds.upper[k]));
        } else {
            values.push(target.values[k]);
        }
    }
    Genome::new(values)
}

/// Builds one trial for population slot `i`. `pbest_pool` holds the
/// indices eligible as `pbest` (at least two, so a pick distinct from `i`
/// always exists). Returns the trial genome with the `(F, CR)` sample that
/// made it. Draw order is fixed — F, CR, pbest, r1, r2, crossover mask —
/// so one seeded stream per slot reproduces the trial.
pub fn jade_trial(
    i: usize,
    population: &[Individual],
    pbest_pool: &[usize],
    state: &JadeState,
    bounds: &GenomeBounds,
    rng: &mut ChaCha8Rng,
) -> (Genome, f64, f64) {
    let np = population.len();
    debug_assert!(np >= 4, "need at least 4 members for distinct picks");
    debug_assert!(pbest_pool.len() >= 2 || !pbest_pool.contains(&i));

    let f = sample_f(state.mu_f, rng);
    let cr = sample_cr(state.mu_cr, rng);

    let pbest = loop {
        let cand = pbest_pool[rng.gen_range(0..pbest_pool.len())];
        if cand != i {
            break cand;
        }
    };
    let r1 = loop {
        let cand = rng.gen_range(0..np);
        if cand != i {
            break cand;
        }
    };
    let r2_genome = loop {
        let cand = rng.gen_range(0..np + state.archive.len());
        if cand != i && cand != r1 {
            break if cand < np {
                &population[cand].genome
            } else {
                &state.archive[cand - np]
            };
        }
    };

    let trial = build_trial(
        &population[i].genome,
        &population[pbest].genome,
        &population[r1].genome,
        r2_genome,
        f,
        cr,
        bounds,
        rng,
    );
    (trial, f, cr)
}

/// Drifts the location parameters toward this generation's successful
/// `(F, CR)` samples;  no successes leave the state unchanged.
pub fn update_jade_state(state: &mut JadeState, successes: &[(f64, f64)]) {
    if successes.is_empty() {
        return;
    }
    let mean_cr =
        successes.iter().map(|&(_, cr)| cr).sum::<f64>() / successes.len() as f64;
    let fs: Vec<f64> = successes.iter().map(|&(f, _)| f).collect();
    let c = ADAPTATION_RATE;
    state.mu_cr = (1.0 - c) * state.mu_cr + c * mean_cr;
    state.mu_f = (1.0 - c) * state.mu_f + c * lehmer_mean(&fs);
}
