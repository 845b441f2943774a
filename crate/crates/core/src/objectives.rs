//! Schedule scoring: tardiness, readiness clashes, and noise-averaged
//! (robust) evaluation.
//!
//! Two objectives, both minimized:
//!
//! * `f1` — total tardiness `Σ_j max(0, FD_j - due_j)`, where `FD_j` is the
//!   latest finish day over order `j`'s sub-orders;
//! * `f2` — total clashes `Σ_j max(0, C_j - AD_j)`, where `AD_j` is the
//!   earliest start day over the sub-orders and `C_j` the conservative
//!   start day implied by the order's unfinished pre-production events.
//!
//! The conservative start treats every unfinished event as pessimistically
//! late: an event due `|offset|` days before the start, still open at the
//! snapshot `s_day`, may complete as late as `s_day + |offset|`, so starting
//! earlier than that risks producing without its deliverable.
//!
//! Robust evaluation decodes a genome once and averages `(f1, f2)` over
//! `h_samples` independent counter-based noise realizations; with `beta = 0`
//! every realization equals the deterministic schedule, so the mean is
//! returned from a single noise-free simulation (exact, not approximate).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{Dataset, Day, Order, OrderId};
use crate::seeding::derive_seed;
use crate::sim::{
    decode_genome, sequence_plan, simulate_ordered, CounterNoise, Genome, NoiseScope, Schedule,
    SimError, ZeroNoise,
};

/// Hinge penalty `max(0, -x)`: zero when the margin `x` is nonnegative,
/// otherwise the size of the violation.
pub fn shortfall(x: f64) -> f64 {
    (-x).max(0.0)
}

/// Earliest start day for an order that cannot clash with its unfinished
/// pre-production events, assuming each completes as late as the snapshot
/// allows. With no unfinished events this is just `p_day`.
pub fn conservative_start(order: &Order, s_day: Day, p_day: Day) -> Day {
    let worst: Day = order
        .events
        .iter()
        .filter(|e| !e.finished)
        .map(|e| e.offset_days.abs())
        .max()
        .unwrap_or(0);
    let slack = p_day - s_day;
    if worst > slack {
        p_day + worst - slack
    } else {
        p_day
    }
}

/// Conservative start days for all orders, indexed by `order_id - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConservativeStarts {
    pub c_day: Vec<Day>,
}

impl ConservativeStarts {
    pub fn of(&self, order: OrderId) -> Day {
        self.c_day[order - 1]
    }
}

/// Computes [`ConservativeStarts`] for a dataset's snapshot.
pub fn conservative_starts(d: &Dataset) -> ConservativeStarts {
    ConservativeStarts {
        c_day: d.orders.iter().map(|o| conservative_start(o, d.s_day, d.p_day)).collect(),
    }
}

/// Total tardiness over all orders (whole late days).
pub fn total_tardiness(schedule: &Schedule, d: &Dataset) -> f64 {
    d.orders
        .iter()
        .map(|o| {
            let fd = schedule.order_finish(o.id).expect("schedule covers every order");
            shortfall((o.due_day - fd) as f64)
        })
        .sum()
}

/// Total clash days over all orders: how far each order starts before its
/// conservative start day.
pub fn total_clashes(schedule: &Schedule, starts: &ConservativeStarts) -> f64 {
    starts
        .c_day
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let ad = schedule.order_start(j + 1).expect("schedule covers every order");
            shortfall((ad - c) as f64)
        })
        .sum()
}

/// How an objective pair was produced. Points are only comparable within
/// one kind: a noise-averaged value and a deterministic one measure
/// different things.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ObjectiveKind {
    Deterministic,
    Robust { h_samples: u32, beta: f64 },
}

/// One evaluated objective pair (minimize both).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub f1: f64,
    pub f2: f64,
    pub kind: ObjectiveKind,
}

impl ObjectivePoint {
    /// Pareto dominance: at least as good in both objectives, strictly
    /// better in one. Panics when kinds differ — mixing evaluation modes in
    /// one comparison is a caller bug.
    pub fn dominates(&self, other: &ObjectivePoint) -> bool {
        assert_eq!(self.kind, other.kind, "cannot compare objective points of different kinds");
        (self.f1 <= other.f1 && self.f2 <= other.f2)
            && (self.f1 < other.f1 || self.f2 < other.f2)
    }
}

/// Decodes, simulates without noise, and scores a genome.
pub fn evaluate_deterministic(genome: &Genome, d: &Dataset) -> Result<ObjectivePoint, SimError> {
    let starts = conservative_starts(d);
    let plan = decode_genome(genome, d);
    let schedule = crate::sim::simulate(&plan, d, &mut ZeroNoise)?;
    Ok(ObjectivePoint {
        f1: total_tardiness(&schedule, d),
        f2: total_clashes(&schedule, &starts),
        kind: ObjectiveKind::Deterministic,
    })
}

/// Noise-averaged objectives with the default order-day noise scope.
pub fn robust_objectives(
    genome: &Genome,
    d: &Dataset,
    h_samples: u32,
    beta: f64,
    seed: u64,
) -> Result<ObjectivePoint, SimError> {
    let starts = conservative_starts(d);
    robust_objectives_scoped(genome, d, &starts, h_samples, beta, seed, NoiseScope::OrderDay)
}

/// Noise-averaged objectives. Decodes once, simulates `h_samples`
/// counter-based realizations `(seed, 0..h_samples)`, and reduces the
/// per-sample pairs in index order — evaluation order and thread count can
/// never change the result. `beta = 0` short-circuits to one noise-free
/// simulation, whose mean it equals exactly.
pub fn robust_objectives_scoped(
    genome: &Genome,
    d: &Dataset,
    starts: &ConservativeStarts,
    h_samples: u32,
    beta: f64,
    seed: u64,
    scope: NoiseScope,
) -> Result<ObjectivePoint, SimError> {
    assert!(h_samples >= 1, "robust evaluation needs at least one sample");
    let kind = ObjectiveKind::Robust { h_samples, beta };
    let plan = decode_genome(genome, d);
    let visit = sequence_plan(&plan);

    if beta == 0.0 {
        let schedule = simulate_ordered(&plan, &visit, d, &mut ZeroNoise)?;
        return Ok(ObjectivePoint {
            f1: total_tardiness(&schedule, d),
            f2: total_clashes(&schedule, starts),
            kind,
        });
    }

    let mut samples = Vec::with_capacity(h_samples as usize);
    for k in 0..h_samples {
        let mut noise = CounterNoise { seed, sample: k as u64, beta, scope };
        let schedule = simulate_ordered(&plan, &visit, d, &mut noise)?;
        samples.push((total_tardiness(&schedule, d), total_clashes(&schedule, starts)));
    }
    let (sum1, sum2) = samples.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    Ok(ObjectivePoint {
        f1: sum1 / h_samples as f64,
        f2: sum2 / h_samples as f64,
        kind,
    })
}

/// SHA-256 over the genome's little-endian IEEE-754 bit patterns, as lower
/// hex; identifies a genome exactly in evaluation logs.
pub fn genome_hash(genome: &Genome) -> String {
    let mut hasher = Sha256::new();
    for v in &genome.values {
        hasher.update(v.to_bits().to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Header for evaluation-log CSV rows.
pub const EVAL_CSV_HEADER: &str = "genome_hash,f1,f2,kind,h_samples,beta,seed";

/// One evaluation-log CSV row matching [`EVAL_CSV_HEADER`]. Deterministic
/// evaluations leave `h_samples`, `beta`, and `seed` empty.
pub fn eval_csv_row(genome: &Genome, point: &ObjectivePoint, seed: Option<u64>) -> String {
    let (kind, h, beta) = match point.kind {
        ObjectiveKind::Deterministic => ("deterministic", String::new(), String::new()),
        ObjectiveKind::Robust { h_samples, beta } => {
            ("robust", h_samples.to_string(), beta.to_string())
        }
    };
    let seed = seed.map(|s| s.to_string()).unwrap_or_default();
    format!("{},{},{},{},{},{},{}", genome_hash(genome), point.f1, point.f2, kind, h, beta, seed)
}

/// Per-evaluation seed for `(run_seed, generation, slot)`; public so
/// external tooling can reproduce a single evaluation out of a run.
pub fn evaluation_seed(run_seed: u64, generation: u64, slot: u64) -> u64 {
    const TAG_EVAL: u64 = 0x4556_414c; // "EVAL"
    derive_seed(&[run_seed, TAG_EVAL, generation, slot])
}
