//! Multi-objective search machinery: Pareto ranking, crowding, elitist
//! selection, the adaptive differential-evolution engine, a classic
//! genetic baseline, and full optimization runs.
//!
//! The main engine builds one trial per population slot with adaptive
//! differential evolution (see [`jade`]), evaluates all trials, then keeps
//! the best `NP` of the combined parent+trial pool by nondominated rank and
//! crowding distance. The baseline ([`nsga2`]) uses binary tournaments,
//! simulated binary crossover, and polynomial mutation under the same
//! selection. A single-objective variant of the engine optimizes `f1` alone
//! with one-to-one replacement.
//!
//! Everything here is deterministic given a run seed: per-slot RNG streams
//! are derived from `(seed, stage, generation, slot)` and all reductions
//! happen in slot order.

pub mod jade;
pub mod nsga2;
mod run;

pub use run::{run, Algorithm, GenStats, RunConfig, RunResult};

use crate::objectives::ObjectivePoint;
use crate::sim::Genome;

/// One population member with its evaluated objectives and selection
/// bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub objectives: ObjectivePoint,
    /// Nondominated front index (0 is the best front).
    pub rank: usize,
    /// Crowding distance within the front (`INFINITY` at the extremes).
    pub crowding: f64,
    /// Scale factor that produced this individual, when it came from a
    /// differential-evolution trial.
    pub f_used: Option<f64>,
    /// Crossover rate that produced this individual, likewise.
    pub cr_used: Option<f64>,
}

impl Individual {
    /// Fresh member with no selection or operator history.
    pub fn new(genome: Genome, objectives: ObjectivePoint) -> Self {
        Individual { genome, objectives, rank: 0, crowding: 0.0, f_used: None, cr_used: None }
    }
}

/// Pareto dominance on objective points (see
/// [`ObjectivePoint::dominates`]).
pub fn dominates(a: &ObjectivePoint, b: &ObjectivePoint) -> bool {
    a.dominates(b)
}

/// Fast nondominated sorting: partitions point indices into fronts, best
/// first. Within a front, indices stay ascending. Equal points never
/// dominate each other, so duplicates share a front.
pub fn fast_nondominated_sort(points: &[ObjectivePoint]) -> Vec<Vec<usize>> {
    let n = points.len();
    if n == 0 {
        return vec![];
    }
    // dominated_by[p] lists points p dominates; counts[p] is how many
    // points dominate p.
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            if dominates(&points[p], &points[q]) {
                dominated_by[p].push(q);
                counts[q] += 1;
            } else if dominates(&points[q], &points[p]) {
                dominated_by[q].push(p);
                counts[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| counts[p] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each point within one front: per objective, the
/// extremes get `INFINITY` and interior points the normalized gap between
/// their sorted neighbors, summed over objectives. An objective with zero
/// range contributes nothing.
pub fn crowding_distance(points: &[ObjectivePoint]) -> Vec<f64> {
    let n = points.len();
    let mut dist = vec![0.0f64; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for obj in 0..2 {
        let value = |i: usize| if obj == 0 { points[i].f1 } else { points[i].f2 };
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| value(a).total_cmp(&value(b)));
        let range = value(idx[n - 1]) - value(idx[0]);
        dist[idx[0]] = f64::INFINITY;
        dist[idx[n - 1]] = f64::INFINITY;
        if range > 0.0 {
            for w in 1..n - 1 {
                let gap = (value(idx[w + 1]) - value(idx[w - 1])) / range;
                dist[idx[w]] += gap;
            }
        }
    }
    dist
}

/// Elitist environmental selection: ranks the pool, fills the next
/// generation front by front, and truncates the boundary front by crowding
/// distance (descending, ties by lower pool index). Selected members carry
/// their rank and crowding.
pub fn select_next_generation(pool: Vec<Individual>, np: usize) -> Vec<Individual> {
    assert!(np <= pool.len(), "cannot select {np} from a pool of {}", pool.len());
    let points: Vec<ObjectivePoint> = pool.iter().map(|i| i.objectives).collect();
    let fronts = fast_nondominated_sort(&points);

    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    let mut selected = Vec::with_capacity(np);
    for (rank, front) in fronts.iter().enumerate() {
        let front_points: Vec<ObjectivePoint> = front.iter().map(|&i| points[i]).collect();
        let crowd = crowding_distance(&front_points);
        if selected.len() + front.len() <= np {
            for (k, &i) in front.iter().enumerate() {
                let mut ind = slots[i].take().expect("front indices are unique");
                ind.rank = rank;
                ind.crowding = crowd[k];
                selected.push(ind);
            }
            if selected.len() == np {
                break;
            }
        } else {
            let mut by_crowding: Vec<usize> = (0..front.len()).collect();
            by_crowding.sort_by(|&a, &b| {
                crowd[b].total_cmp(&crowd[a]).then(front[a].cmp(&front[b]))
            });
            for &k in by_crowding.iter().take(np - selected.len()) {
                let mut ind = slots[front[k]].take().expect("front indices are unique");
                ind.rank = rank;
                ind.crowding = crowd[k];
                selected.push(ind);
            }
            break;
        }
    }
    selected
}

/// Union of per-run fronts reduced to one nondominated set: distinct
/// points only, sorted by `(f1, f2)`.
pub fn aggregate_pareto(per_run_fronts: &[Vec<ObjectivePoint>]) -> Vec<ObjectivePoint> {
    let mut all: Vec<ObjectivePoint> = per_run_fronts.iter().flatten().copied().collect();
    all.sort_by(|a, b| a.f1.total_cmp(&b.f1).then(a.f2.total_cmp(&b.f2)));
    all.dedup_by(|a, b| a.f1 == b.f1 && a.f2 == b.f2);
    all.iter().filter(|&p| !all.iter().any(|q| dominates(q, p))).copied().collect()
}

/// Reflects a value into `[lo, hi]` by folding it across the violated
/// bound, repeating as needed (triangle wave). Degenerate bounds collapse
/// to `lo`.
pub fn reflect(value: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi && value.is_finite());
    let range = hi - lo;
    if range <= 0.0 {
        return lo;
    }
    let t = (value - lo).rem_euclid(2.0 * range);
    lo + t.min(2.0 * range - t)
}
