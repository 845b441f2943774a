//! Full optimization runs: configuration, seeded initialization, and the
//! generation loops for the three algorithms.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Day, LineId};
use crate::objectives::{
    conservative_starts, evaluation_seed, robust_objectives_scoped, ConservativeStarts,
    ObjectivePoint,
};
use crate::seeding::stream;
use crate::sim::{Genome, GenomeBounds, NoiseScope, SPLIT_LEVELS};

use super::jade::{jade_trial, update_jade_state, JadeState, PBEST_FRACTION};
use super::nsga2::{binary_tournament, polynomial_mutation, sbx_crossover, P_CROSSOVER};
use super::{aggregate_pareto, dominates, select_next_generation, Individual};

const TAG_INIT: u64 = 0x494e_4954; // init streams
const TAG_TRIAL: u64 = 0x5452_4941; // DE trial streams
const TAG_REDUCE: u64 = 0x5244_4345; // per-generation reducer (archive eviction)
const TAG_VARY: u64 = 0x5641_5259; // baseline variation streams

/// Which search engine a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Adaptive DE trials under nondominated-sorting selection (the main
    /// engine).
    Nsjade,
    /// SBX + polynomial mutation under the same selection (baseline).
    Nsga2,
    /// Single-objective adaptive DE on `f1` with one-to-one replacement.
    Jade,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Nsjade => "nsjade",
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Jade => "jade",
        })
    }
}

/// Everything that determines a run (population, budget, evaluation mode,
/// seed). Two runs with equal configs on equal datasets give bit-identical
/// results regardless of thread count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    /// Population size.
    pub np: usize,
    /// Generations per genome dimension when `g_max` is not set.
    pub xi: usize,
    /// Explicit generation budget; overrides `xi`.
    pub g_max: Option<usize>,
    /// Noise realizations averaged per evaluation.
    pub h_samples: u32,
    /// Daily-output noise half-width.
    pub beta: f64,
    pub seed: u64,
    /// Scheduling snapshot the dataset was resolved for (echoed into
    /// manifests; keep equal to the dataset's).
    pub s_day: Day,
    pub noise_scope: NoiseScope,
}

impl RunConfig {
    /// Standard configuration: population 400, budget `10 · dimension`,
    /// 5-sample robust evaluation at `beta` 0.2.
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        RunConfig {
            algorithm,
            np: 400,
            xi: 10,
            g_max: None,
            h_samples: 5,
            beta: 0.2,
            seed,
            s_day: 0,
            noise_scope: NoiseScope::OrderDay,
        }
    }

    /// Generation budget for a genome dimension.
    pub fn generations(&self, dimension: usize) -> usize {
        self.g_max.unwrap_or(self.xi * dimension)
    }
}

/// Per-generation progress snapshot (population statistics after
/// selection).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenStats {
    pub generation: usize,
    pub best_f1: f64,
    pub best_f2: f64,
    pub mean_f1: f64,
    pub mean_f2: f64,
    /// Adaptive scale-factor location, engines that have one.
    pub mu_f: Option<f64>,
    /// Adaptive crossover-rate location, likewise.
    pub mu_cr: Option<f64>,
}

/// A finished run: final population, the per-generation trace, and the
/// nondominated front of the final population (distinct points, sorted).
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub population: Vec<Individual>,
    pub stats: Vec<GenStats>,
    pub front: Vec<ObjectivePoint>,
}

impl RunResult {
    /// Best `f1` per generation — the convergence trajectory.
    pub fn best_f1_trajectory(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.best_f1).collect()
    }
}

/// Runs one optimization to completion. The dataset must validate cleanly
/// (this is asserted in debug builds); the run itself cannot fail.
pub fn run(config: &RunConfig, d: &Dataset) -> RunResult {
    debug_assert!(
        crate::domain::validate_dataset(d).is_empty(),
        "run() requires a validated dataset"
    );
    assert!(config.np >= 5, "population too small for the variation operators");
    assert!(config.h_samples >= 1);
    let ctx = RunCtx::new(config, d);
    match config.algorithm {
        Algorithm::Nsjade => run_nsjade(&ctx),
        Algorithm::Nsga2 => run_nsga2(&ctx),
        Algorithm::Jade => run_jade_single(&ctx),
    }
}

/// Shared per-run context: dataset, bounds, conservative starts, budget.
struct RunCtx<'a> {
    cfg: &'a RunConfig,
    d: &'a Dataset,
    bounds: GenomeBounds,
    starts: ConservativeStarts,
    generations: usize,
}

impl<'a> RunCtx<'a> {
    fn new(cfg: &'a RunConfig, d: &'a Dataset) -> Self {
        let bounds = GenomeBounds::for_dataset(d);
        let generations = cfg.generations(bounds.dimension());
        RunCtx { cfg, d, bounds, starts: conservative_starts(d), generations }
    }

    /// Robust evaluation with a seed derived from `(run seed, generation,
    /// slot)`; where a genome lands in the loop fully determines its noise.
    fn evaluate(&self, genome: &Genome, generation: usize, slot: usize) -> ObjectivePoint {
        robust_objectives_scoped(
            genome,
            self.d,
            &self.starts,
            self.cfg.h_samples,
            self.cfg.beta,
            evaluation_seed(self.cfg.seed, generation as u64, slot as u64),
            self.cfg.noise_scope,
        )
        .expect("validated dataset: simulation cannot fail")
    }

    /// Evaluates a batch in parallel; results stay in slot order, so the
    /// thread count never affects them.
    fn evaluate_batch(&self, genomes: &[Genome], generation: usize) -> Vec<ObjectivePoint> {
        genomes
            .par_iter()
            .enumerate()
            .map(|(i, g)| self.evaluate(g, generation, i))
            .collect()
    }

    /// Seeded initial population: line slots drawn from each order's
    /// capable lines, split genes from the quantized levels, sequence keys
    /// uniform integers.
    fn init_population(&self) -> Vec<Individual> {
        let n = self.d.num_orders();
        let capable: Vec<Vec<LineId>> = self
            .d
            .orders
            .iter()
            .map(|o| self.d.valid_lines(o.product_type))
            .collect();
        let genomes: Vec<Genome> = (0..self.cfg.np)
            .map(|i| {
                let mut rng = stream(self.cfg.seed, &[TAG_INIT, i as u64]);
                let mut v = Vec::with_capacity(4 * n);
                for lines in &capable {
                    v.push(lines[rng.gen_range(0..lines.len())] as f64);
                    v.push(lines[rng.gen_range(0..lines.len())] as f64);
                }
                for _ in 0..n {
                    v.push(SPLIT_LEVELS[rng.gen_range(0..SPLIT_LEVELS.len())]);
                }
                for _ in 0..n {
                    v.push(rng.gen_range(1..=n) as f64);
                }
                Genome::new(v)
            })
            .collect();
        let points = self.evaluate_batch(&genomes, 0);
        genomes
            .into_iter()
            .zip(points)
            .map(|(g, p)| Individual::new(g, p))
            .collect()
    }
}

fn gen_stats(generation: usize, pop: &[Individual], state: Option<&JadeState>) -> GenStats {
    let n = pop.len() as f64;
    GenStats {
        generation,
        best_f1: pop.iter().map(|i| i.objectives.f1).fold(f64::INFINITY, f64::min),
        best_f2: pop.iter().map(|i| i.objectives.f2).fold(f64::INFINITY, f64::min),
        mean_f1: pop.iter().map(|i| i.objectives.f1).sum::<f64>() / n,
        mean_f2: pop.iter().map(|i| i.objectives.f2).sum::<f64>() / n,
        mu_f: state.map(|s| s.mu_f),
        mu_cr: state.map(|s| s.mu_cr),
    }
}

/// Eligible `pbest` indices: the best `PBEST_FRACTION` of the population
/// (at least two members so a pick distinct from any slot exists), by the
/// given ordering.
fn pbest_pool(np: usize, order: &[usize]) -> Vec<usize> {
    let count = ((PBEST_FRACTION * np as f64).ceil() as usize).max(2).min(np);
    order[..count].to_vec()
}

fn rank_order_multi(pop: &[Individual]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pop.len()).collect();
    idx.sort_by(|&a, &b| {
        pop[a]
            .rank
            .cmp(&pop[b].rank)
            .then(pop[b].crowding.total_cmp(&pop[a].crowding))
            .then(a.cmp(&b))
    });
    idx
}

fn run_nsjade(ctx: &RunCtx) -> RunResult {
    let cfg = ctx.cfg;
    let mut pop = select_next_generation(ctx.init_population(), cfg.np);
    let mut state = JadeState::new(cfg.np);
    let mut stats = Vec::with_capacity(ctx.generations + 1);
    stats.push(gen_stats(0, &pop, Some(&state)));

    for gen in 1..=ctx.generations {
        let pool_idx = pbest_pool(cfg.np, &rank_order_multi(&pop));
        let trials: Vec<(Genome, f64, f64)> = (0..cfg.np)
            .map(|i| {
                let mut rng = stream(cfg.seed, &[TAG_TRIAL, gen as u64, i as u64]);
                jade_trial(i, &pop, &pool_idx, &state, &ctx.bounds, &mut rng)
            })
            .collect();
        let genomes: Vec<Genome> = trials.iter().map(|(g, _, _)| g.clone()).collect();
        let points = ctx.evaluate_batch(&genomes, gen);

        // Sequential reducer: success bookkeeping and archive eviction in
        // slot order, one stream per generation.
        let mut reducer = stream(cfg.seed, &[TAG_REDUCE, gen as u64]);
        let mut successes = Vec::new();
        for i in 0..cfg.np {
            if dominates(&points[i], &pop[i].objectives) {
                successes.push((trials[i].1, trials[i].2));
                state.push_archive(pop[i].genome.clone(), &mut reducer);
            }
        }
        update_jade_state(&mut state, &successes);

        let mut pool = pop;
        for ((genome, f, cr), point) in trials.into_iter().zip(points) {
            let mut ind = Individual::new(genome, point);
            ind.f_used = Some(f);
            ind.cr_used = Some(cr);
            pool.push(ind);
        }
        pop = select_next_generation(pool, cfg.np);
        stats.push(gen_stats(gen, &pop, Some(&state)));
    }

    finish(ctx, pop, stats)
}

fn run_jade_single(ctx: &RunCtx) -> RunResult {
    let cfg = ctx.cfg;
    let mut pop = ctx.init_population();
    let mut state = JadeState::new(cfg.np);
    let mut stats = Vec::with_capacity(ctx.generations + 1);
    stats.push(gen_stats(0, &pop, Some(&state)));

    for gen in 1..=ctx.generations {
        let mut by_f1: Vec<usize> = (0..cfg.np).collect();
        by_f1.sort_by(|&a, &b| {
            pop[a].objectives.f1.total_cmp(&pop[b].objectives.f1).then(a.cmp(&b))
        });
        let pool_idx = pbest_pool(cfg.np, &by_f1);

        let trials: Vec<(Genome, f64, f64)> = (0..cfg.np)
            .map(|i| {
                let mut rng = stream(cfg.seed, &[TAG_TRIAL, gen as u64, i as u64]);
                jade_trial(i, &pop, &pool_idx, &state, &ctx.bounds, &mut rng)
            })
            .collect();
        let genomes: Vec<Genome> = trials.iter().map(|(g, _, _)| g.clone()).collect();
        let points = ctx.evaluate_batch(&genomes, gen);

        let mut reducer = stream(cfg.seed, &[TAG_REDUCE, gen as u64]);
        let mut successes = Vec::new();
        for (i, ((genome, f, cr), point)) in trials.into_iter().zip(points).enumerate() {
            // One-to-one replacement on strictly better f1.
            if point.f1 < pop[i].objectives.f1 {
                successes.push((f, cr));
                let parent = std::mem::replace(&mut pop[i], {
                    let mut ind = Individual::new(genome, point);
                    ind.f_used = Some(f);
                    ind.cr_used = Some(cr);
                    ind
                });
                state.push_archive(parent.genome, &mut reducer);
            }
        }
        update_jade_state(&mut state, &successes);
        stats.push(gen_stats(gen, &pop, Some(&state)));
    }

    finish(ctx, pop, stats)
}

fn run_nsga2(ctx: &RunCtx) -> RunResult {
    let cfg = ctx.cfg;
    let mut pop = select_next_generation(ctx.init_population(), cfg.np);
    let mut stats = Vec::with_capacity(ctx.generations + 1);
    stats.push(gen_stats(0, &pop, None));
    let pm = 1.0 / ctx.bounds.dimension() as f64;

    for gen in 1..=ctx.generations {
        let mut offspring: Vec<Genome> = Vec::with_capacity(cfg.np);
        let pairs = (cfg.np + 1) / 2;
        for pair in 0..pairs {
            let mut rng = stream(cfg.seed, &[TAG_VARY, gen as u64, pair as u64]);
            let a = binary_tournament(&pop, &mut rng);
            let b = binary_tournament(&pop, &mut rng);
            let (mut c1, mut c2) = if rng.gen::<f64>() <= P_CROSSOVER {
                sbx_crossover(&pop[a].genome, &pop[b].genome, &ctx.bounds, &mut rng)
            } else {
                (pop[a].genome.clone(), pop[b].genome.clone())
            };
            polynomial_mutation(&mut c1, &ctx.bounds, pm, &mut rng);
            polynomial_mutation(&mut c2, &ctx.bounds, pm, &mut rng);
            offspring.push(c1);
            if offspring.len() < cfg.np {
                offspring.push(c2);
            }
        }
        let points = ctx.evaluate_batch(&offspring, gen);

        let mut pool = pop;
        for (genome, point) in offspring.into_iter().zip(points) {
            pool.push(Individual::new(genome, point));
        }
        pop = select_next_generation(pool, cfg.np);
        stats.push(gen_stats(gen, &pop, None));
    }

    finish(ctx, pop, stats)
}

fn finish(ctx: &RunCtx, population: Vec<Individual>, stats: Vec<GenStats>) -> RunResult {
    let points: Vec<ObjectivePoint> = population.iter().map(|i| i.objectives).collect();
    RunResult {
        config: ctx.cfg.clone(),
        front: aggregate_pareto(&[points]),
        population,
        stats,
    }
}
