//! Plan decoding and production-day simulation.
//!
//! A candidate solution is a flat real vector (a [`Genome`]) with three
//! parts for `n` orders on `m` lines:
//!
//! * part A, `2n` genes in `[1, m]` — two line slots per order; rounding
//!   gives the line pair, equal slots mean the order is not split;
//! * part B, `n` genes in `[0, 1]` — quantized to a split fraction in
//!   `{0.2, 0.4, 0.6, 0.8}` for the first sub-order;
//! * part C, `n` genes in `[1, n]` — random sequencing keys; every line
//!   runs its sub-orders by ascending key.
//!
//! Decoding produces an [`AssignmentPlan`] of 1–2 [`SubOrder`]s per order.
//! [`simulate`] then walks each line day by day: a sub-order's daily output
//! is `minutes · line_eff · curve_eff / smv`, scaled by `1 + noise` with
//! bounded noise from a [`NoiseStream`]. A successor of the same product
//! type continues on the finishing day's leftover minutes and keeps the
//! learning-curve day counter; a type change (or a first order) starts on
//! the next whole day with the counter reset to 1. Fractional pieces carry
//! across days; nothing is rounded until the finish-day minutes are charged.
//!
//! Noise draws are consumed in a fixed order — lines by ascending id, each
//! line's sub-orders in sequence, days ascending — and the counter-based
//! stream is addressed by coordinates rather than draw order, so identical
//! `(seed, sample)` pairs give identical schedules on any thread layout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Dataset, Day, DomainError, LineId, OrderId, TypeId};
use crate::seeding::{derive_seed, unit_f64};

/// Split fractions part-B genes quantize to (four equal bins over `[0, 1]`).
pub const SPLIT_LEVELS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// Leftover minutes below this do not count as a shareable partial day; the
/// successor starts on the next whole day instead. Guards against float dust
/// creating zero-output production days.
const MIN_SHARED_MINUTES: f64 = 1e-9;

/// Errors from decoding or simulating a plan.
#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    /// One piece must cost positive standard minutes.
    #[error("nonpositive smv {smv}")]
    NonpositiveSmv { smv: f64 },
    /// A sub-order landed on a line that cannot run its type; decoding
    /// repairs assignments, so reaching the simulator this way is a bug.
    #[error("order {order} assigned to line {line} with zero efficiency")]
    ZeroEfficiencyAssignment { order: OrderId, line: LineId },
    /// A replayed noise sequence ran out before the schedule was finished.
    #[error("noise stream exhausted after {supplied} draws")]
    NoiseExhausted { supplied: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Flat decision vector; layout `[A | B | C]` as described in the module
/// docs. Serializes as a bare JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome {
    pub values: Vec<f64>,
}

impl Genome {
    /// Genome length for `n` orders.
    pub fn dimension_for(n_orders: usize) -> usize {
        4 * n_orders
    }

    pub fn new(values: Vec<f64>) -> Self {
        Genome { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-gene box bounds; operators keep genomes inside these.
#[derive(Debug, Clone, PartialEq)]
pub struct GenomeBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl GenomeBounds {
    /// Bounds for a dataset: `[1, m]` for part A, `[0, 1]` for part B,
    /// `[1, n]` for part C.
    pub fn for_dataset(d: &Dataset) -> Self {
        let n = d.num_orders();
        let m = d.num_lines() as f64;
        let mut lower = Vec::with_capacity(4 * n);
        let mut upper = Vec::with_capacity(4 * n);
        lower.extend(std::iter::repeat(1.0).take(2 * n));
        upper.extend(std::iter::repeat(m).take(2 * n));
        lower.extend(std::iter::repeat(0.0).take(n));
        upper.extend(std::iter::repeat(1.0).take(n));
        lower.extend(std::iter::repeat(1.0).take(n));
        upper.extend(std::iter::repeat(n as f64).take(n));
        GenomeBounds { lower, upper }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    /// True when every gene lies inside its box.
    pub fn contains(&self, g: &Genome) -> bool {
        g.values.len() == self.dimension()
            && g.values
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v.is_finite() && v >= lo && v <= hi)
    }
}

/// Quantizes a part-B gene into a split fraction (out-of-range input is
/// clamped first, so any finite gene maps to a level).
pub fn split_level(gene: f64) -> f64 {
    let v = gene.clamp(0.0, 1.0);
    let idx = ((v * SPLIT_LEVELS.len() as f64) as usize).min(SPLIT_LEVELS.len() - 1);
    SPLIT_LEVELS[idx]
}

/// One piece of an order placed on one line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubOrder {
    pub order: OrderId,
    /// 0 for the first (or only) sub-order, 1 for the second.
    pub sub_index: u8,
    pub line: LineId,
    pub quantity: u32,
    /// Sequencing key; lines run their sub-orders by ascending key, ties by
    /// `(order, sub_index)`.
    pub sequence_key: f64,
}

/// Decoded assignment: 1–2 sub-orders per order plus the split fraction
/// actually applied (by `order_id - 1`; `None` when unsplit).
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentPlan {
    pub sub_orders: Vec<SubOrder>,
    pub split_fraction: Vec<Option<f64>>,
}

fn round_to_line(gene: f64, num_lines: usize) -> LineId {
    let r = gene.round();
    if r < 1.0 {
        1
    } else if r > num_lines as f64 {
        num_lines
    } else {
        r as LineId
    }
}

/// Remaps a line that cannot run `t` to the nearest higher id that can
/// (wrapping). The dataset guarantees some line can run every type.
fn repair_line(line: LineId, t: TypeId, d: &Dataset) -> LineId {
    if d.lines[line - 1].efficiency_for(t) > 0.0 {
        return line;
    }
    let m = d.num_lines();
    for step in 1..=m {
        let cand = (line - 1 + step) % m + 1;
        if d.lines[cand - 1].efficiency_for(t) > 0.0 {
            return cand;
        }
    }
    panic!("validated dataset must have a capable line for type {t}");
}

/// Decodes a genome into sub-orders. Total function for any in-bounds
/// genome on a validated dataset: line genes are rounded, clamped, and
/// repaired to capable lines; equal line slots (after repair) or a split
/// that rounds to zero pieces collapse to a single sub-order.
pub fn decode_genome(genome: &Genome, d: &Dataset) -> AssignmentPlan {
    let n = d.num_orders();
    assert_eq!(genome.len(), 4 * n, "genome length must be 4 * orders");
    let mut sub_orders = Vec::with_capacity(2 * n);
    let mut split_fraction = vec![None; n];

    for (j, order) in d.orders.iter().enumerate() {
        let t = order.product_type;
        let l1 = repair_line(round_to_line(genome.values[2 * j], d.num_lines()), t, d);
        let l2 = repair_line(round_to_line(genome.values[2 * j + 1], d.num_lines()), t, d);
        let key = genome.values[3 * n + j];
        let single = |line: LineId, sub_orders: &mut Vec<SubOrder>| {
            sub_orders.push(SubOrder {
                order: order.id,
                sub_index: 0,
                line,
                quantity: order.quantity,
                sequence_key: key,
            });
        };
        if l1 == l2 {
            single(l1, &mut sub_orders);
            continue;
        }
        let alpha = split_level(genome.values[2 * n + j]);
        let q1 = (alpha * order.quantity as f64).round() as u32;
        let q2 = order.quantity - q1;
        if q1 == 0 {
            single(l2, &mut sub_orders);
        } else if q2 == 0 {
            single(l1, &mut sub_orders);
        } else {
            split_fraction[j] = Some(alpha);
            sub_orders.push(SubOrder {
                order: order.id,
                sub_index: 0,
                line: l1,
                quantity: q1,
                sequence_key: key,
            });
            sub_orders.push(SubOrder {
                order: order.id,
                sub_index: 1,
                line: l2,
                quantity: q2,
                sequence_key: key,
            });
        }
    }

    AssignmentPlan { sub_orders, split_fraction }
}

fn sequence_cmp(a: &SubOrder, b: &SubOrder) -> std::cmp::Ordering {
    a.sequence_key
        .total_cmp(&b.sequence_key)
        .then(a.order.cmp(&b.order))
        .then(a.sub_index.cmp(&b.sub_index))
}

/// Sub-orders of one line in the order the line will run them.
pub fn sequence_line<'a>(plan: &'a AssignmentPlan, line: LineId) -> Vec<&'a SubOrder> {
    let mut subs: Vec<&SubOrder> = plan.sub_orders.iter().filter(|s| s.line == line).collect();
    subs.sort_by(|a, b| sequence_cmp(a, b));
    subs
}

/// Indices of all sub-orders in simulation order: line-major ascending,
/// then sequence order within each line.
pub(crate) fn sequence_plan(plan: &AssignmentPlan) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..plan.sub_orders.len()).collect();
    idx.sort_by(|&a, &b| {
        let (sa, sb) = (&plan.sub_orders[a], &plan.sub_orders[b]);
        sa.line.cmp(&sb.line).then(sequence_cmp(sa, sb))
    });
    idx
}

/// Which coordinates address a noise draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseScope {
    /// Draws keyed by `(order, sub_index, production day of the sub-order)`:
    /// each sub-order experiences its own disturbance sequence, wherever it
    /// lands in the calendar. The default.
    OrderDay,
    /// Draws keyed by `(line, calendar day)`: a line has one disturbance per
    /// day, shared by whatever runs on it.
    LineDay,
}

/// Coordinates of one production day, handed to the noise stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseContext {
    pub line: LineId,
    pub order: OrderId,
    pub sub_index: u8,
    /// 1-based production day within the sub-order.
    pub rel_day: u32,
    /// Calendar day being produced.
    pub abs_day: Day,
}

/// Source of the daily output disturbance, one value per production day.
pub trait NoiseStream {
    fn next_noise(&mut self, ctx: &NoiseContext) -> Result<f64, SimError>;
}

/// No disturbance; simulation becomes exactly deterministic.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseStream for ZeroNoise {
    fn next_noise(&mut self, _ctx: &NoiseContext) -> Result<f64, SimError> {
        Ok(0.0)
    }
}

/// Replays a recorded sequence in consumption order; errs when it runs dry
/// (supplying too few draws is a caller contract violation).
#[derive(Debug, Clone)]
pub struct ReplayNoise {
    values: Vec<f64>,
    pos: usize,
}

impl ReplayNoise {
    pub fn new(values: Vec<f64>) -> Self {
        ReplayNoise { values, pos: 0 }
    }
}

impl NoiseStream for ReplayNoise {
    fn next_noise(&mut self, _ctx: &NoiseContext) -> Result<f64, SimError> {
        let v = self
            .values
            .get(self.pos)
            .copied()
            .ok_or(SimError::NoiseExhausted { supplied: self.values.len() })?;
        self.pos += 1;
        Ok(v)
    }
}

/// Counter-based uniform noise in `[-beta, beta]`: each draw is a hash of
/// `(seed, sample, scope coordinates)`, so values depend only on where they
/// land, never on evaluation order or thread count.
#[derive(Debug, Clone, Copy)]
pub struct CounterNoise {
    pub seed: u64,
    /// Realization index; distinct samples give independent disturbances.
    pub sample: u64,
    pub beta: f64,
    pub scope: NoiseScope,
}

impl NoiseStream for CounterNoise {
    fn next_noise(&mut self, ctx: &NoiseContext) -> Result<f64, SimError> {
        let h = match self.scope {
            NoiseScope::OrderDay => derive_seed(&[
                self.seed,
                self.sample,
                1,
                ctx.order as u64,
                ctx.sub_index as u64,
                ctx.rel_day as u64,
            ]),
            NoiseScope::LineDay => {
                debug_assert!(ctx.abs_day >= 0, "production days never precede day 0");
                derive_seed(&[self.seed, self.sample, 2, ctx.line as u64, ctx.abs_day as u64])
            }
        };
        Ok(self.beta * (2.0 * unit_f64(h) - 1.0))
    }
}

/// Pieces a sub-order completes in one day: `n_time · e_p · e_o / smv`
/// scaled by `1 + noise`. `n_time` is the minutes worked that day, `e_p`
/// the line's efficiency for the product, `e_o` the learning-curve
/// efficiency for the consecutive type day.
pub fn daily_quantity(
    n_time: f64,
    e_p: f64,
    e_o: f64,
    smv: f64,
    noise: f64,
) -> Result<f64, SimError> {
    if !(smv > 0.0) {
        return Err(SimError::NonpositiveSmv { smv });
    }
    debug_assert!(n_time >= 0.0 && (0.0..=1.0).contains(&e_p) && (0.0..=1.0).contains(&e_o));
    Ok(n_time * e_p * e_o / smv * (1.0 + noise))
}

/// Per-line packing state while the simulator walks a line's sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LineCursor {
    pub line: LineId,
    /// Last calendar day with any production (day 0 before the first).
    pub day: Day,
    /// Minutes already charged on `day`.
    pub minutes_used: f64,
    /// Product type that ran last, if any.
    pub last_type: Option<TypeId>,
    /// Consecutive days `last_type` has run through `day` (learning-curve
    /// position).
    pub type_days: u32,
    /// Whether anything has run on the line yet.
    pub started: bool,
}

impl LineCursor {
    pub fn new(line: LineId) -> Self {
        LineCursor {
            line,
            day: 0,
            minutes_used: 0.0,
            last_type: None,
            type_days: 0,
            started: false,
        }
    }
}

/// One sub-order as scheduled: placement plus realized days.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledSubOrder {
    pub order: OrderId,
    pub sub_index: u8,
    pub line: LineId,
    pub quantity: u32,
    /// First production day.
    pub a_day: Day,
    /// Production days consumed (a shared partial start day counts).
    pub p_time: i64,
    /// Finish day: `a_day + p_time`, the first day all pieces exist.
    pub f_day: Day,
    trace_start: usize,
    trace_len: usize,
}

/// Result of one simulation run over a whole plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Scheduled sub-orders in simulation order (line-major).
    pub sub_orders: Vec<ScheduledSubOrder>,
    /// All daily quantities, one flat buffer; sliced per sub-order.
    trace: Vec<f64>,
}

impl Schedule {
    /// Realized pieces per production day of `sub_orders[i]`.
    pub fn daily_quantities(&self, i: usize) -> &[f64] {
        let s = &self.sub_orders[i];
        &self.trace[s.trace_start..s.trace_start + s.trace_len]
    }

    /// Earliest production day over the order's sub-orders.
    pub fn order_start(&self, order: OrderId) -> Option<Day> {
        self.sub_orders.iter().filter(|s| s.order == order).map(|s| s.a_day).min()
    }

    /// Latest finish day over the order's sub-orders.
    pub fn order_finish(&self, order: OrderId) -> Option<Day> {
        self.sub_orders.iter().filter(|s| s.order == order).map(|s| s.f_day).max()
    }
}

/// Simulates a plan day by day and returns the realized schedule.
///
/// Requires a validated dataset and a plan decoded for it (assignments on
/// zero-efficiency lines are rejected, not repaired, here). The noise
/// stream must supply one draw per simulated production day.
pub fn simulate<N: NoiseStream>(
    plan: &AssignmentPlan,
    d: &Dataset,
    noise: &mut N,
) -> Result<Schedule, SimError> {
    simulate_ordered(plan, &sequence_plan(plan), d, noise)
}

/// Simulation core over a precomputed sub-order visit order (so robust
/// evaluation can sequence once and replay many noise samples).
pub(crate) fn simulate_ordered<N: NoiseStream>(
    plan: &AssignmentPlan,
    visit: &[usize],
    d: &Dataset,
    noise: &mut N,
) -> Result<Schedule, SimError> {
    let mut schedule = Schedule {
        sub_orders: Vec::with_capacity(plan.sub_orders.len()),
        trace: Vec::with_capacity(plan.sub_orders.len() * 4),
    };
    let mut cursor = LineCursor::new(0);

    for &i in visit {
        let sub = &plan.sub_orders[i];
        if sub.line != cursor.line {
            cursor = LineCursor::new(sub.line);
        }
        let line = &d.lines[sub.line - 1];
        let order = &d.orders[sub.order - 1];
        let e_p = line.efficiency_for(order.product_type);
        if e_p <= 0.0 {
            return Err(SimError::ZeroEfficiencyAssignment { order: sub.order, line: sub.line });
        }
        let curve = &d.product_types[order.product_type - 1].learning_curve;

        // Place the start: share the predecessor's finish day when the type
        // continues and minutes remain, otherwise open the next whole day.
        let (a_day, mut n_time, mut u, shared_minutes) = if !cursor.started {
            (d.p_day, line.capacity_minutes, 1u32, 0.0)
        } else if cursor.last_type == Some(order.product_type) {
            let remaining = line.capacity_minutes - cursor.minutes_used;
            if remaining > MIN_SHARED_MINUTES {
                (cursor.day, remaining, cursor.type_days, cursor.minutes_used)
            } else {
                (cursor.day + 1, line.capacity_minutes, cursor.type_days + 1, 0.0)
            }
        } else {
            (cursor.day + 1, line.capacity_minutes, 1u32, 0.0)
        };

        let target = sub.quantity as f64;
        let trace_start = schedule.trace.len();
        let mut produced = 0.0;
        let mut day = a_day;
        let mut rel_day = 1u32;
        loop {
            let e_o = curve.efficiency(u)?;
            let eps = noise.next_noise(&NoiseContext {
                line: sub.line,
                order: sub.order,
                sub_index: sub.sub_index,
                rel_day,
                abs_day: day,
            })?;
            let q_d = daily_quantity(n_time, e_p, e_o, order.smv, eps)?;
            schedule.trace.push(q_d);
            produced += q_d;
            if produced >= target {
                // Charge the finish day with the minutes the leftover pieces
                // need at the nominal (noise-free) rate, on top of whatever a
                // shared start day already used.
                let remaining_pieces = target - (produced - q_d);
                let minutes = remaining_pieces * order.smv / (e_p * e_o);
                let base = if rel_day == 1 { shared_minutes } else { 0.0 };
                cursor.day = day;
                cursor.minutes_used = (base + minutes).min(line.capacity_minutes);
                cursor.last_type = Some(order.product_type);
                cursor.type_days = u;
                cursor.started = true;
                break;
            }
            day += 1;
            u += 1;
            rel_day += 1;
            n_time = line.capacity_minutes;
        }

        let p_time = rel_day as i64;
        schedule.sub_orders.push(ScheduledSubOrder {
            order: sub.order,
            sub_index: sub.sub_index,
            line: sub.line,
            quantity: sub.quantity,
            a_day,
            p_time,
            f_day: a_day + p_time,
            trace_start,
            trace_len: rel_day as usize,
        });
    }

    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{LearningCurve, Order, ProductType, ProductionLine};

    /// Constant disturbance, for hand-checkable noisy scenarios.
    struct ConstNoise(f64);

    impl NoiseStream for ConstNoise {
        fn next_noise(&mut self, _ctx: &NoiseContext) -> Result<f64, SimError> {
            Ok(self.0)
        }
    }

    /// Wraps a stream and records every draw it hands out.
    struct RecordingNoise<N: NoiseStream> {
        inner: N,
        log: Vec<f64>,
    }

    impl<N: NoiseStream> NoiseStream for RecordingNoise<N> {
        fn next_noise(&mut self, ctx: &NoiseContext) -> Result<f64, SimError> {
            let v = self.inner.next_noise(ctx)?;
            self.log.push(v);
            Ok(v)
        }
    }

    fn order(id: OrderId, t: TypeId, quantity: u32, smv: f64) -> Order {
        Order { id, product_type: t, quantity, due_day: 30, smv, events: vec![] }
    }

    /// One full-efficiency line (6720 min/day) and one at 80%, two types
    /// with distinguishable curves.
    fn two_line_dataset(orders: Vec<Order>) -> Dataset {
        Dataset {
            product_types: vec![
                ProductType { id: 1, name: "a".into(), learning_curve: LearningCurve::flat() },
                ProductType {
                    id: 2,
                    name: "b".into(),
                    learning_curve: LearningCurve {
                        breakpoints: vec![(1, 0.5), (2, 0.7), (3, 0.85), (4, 1.0)],
                    },
                },
            ],
            lines: vec![
                ProductionLine {
                    id: 1,
                    capacity_minutes: 6720.0,
                    efficiency_by_type: vec![1.0, 1.0],
                },
                ProductionLine {
                    id: 2,
                    capacity_minutes: 6720.0,
                    efficiency_by_type: vec![0.8, 0.8],
                },
            ],
            orders,
            s_day: -7,
            p_day: 0,
        }
    }

    fn genome_unsplit(n: usize, line: f64) -> Genome {
        // All orders whole on `line`, keys equal to order position.
        let mut v = vec![line; 2 * n];
        v.extend(std::iter::repeat(0.5).take(n));
        v.extend((0..n).map(|j| (j + 1) as f64));
        Genome::new(v)
    }

    #[test]
    fn daily_quantity_matches_hand_values() {
        // 6720 min at full efficiency on smv 14.2: 6720 / 14.2.
        let q = daily_quantity(6720.0, 1.0, 1.0, 14.2, 0.0).unwrap();
        assert!((q - 473.23943661971833).abs() < 1e-9);
        // 80% line on smv 18.2: 6720 * 0.8 / 18.2.
        let q = daily_quantity(6720.0, 0.8, 1.0, 18.2, 0.0).unwrap();
        assert!((q - 295.38461538461536).abs() < 1e-9);
        // +20% disturbance scales output by 1.2.
        let q = daily_quantity(6720.0, 1.0, 1.0, 14.2, 0.2).unwrap();
        assert!((q - 1.2 * 473.23943661971833).abs() < 1e-9);
        assert_eq!(
            daily_quantity(6720.0, 1.0, 1.0, 0.0, 0.0),
            Err(SimError::NonpositiveSmv { smv: 0.0 })
        );
    }

    #[test]
    fn split_levels_quantize_in_four_equal_bins() {
        assert_eq!(split_level(0.0), 0.2);
        assert_eq!(split_level(0.24), 0.2);
        assert_eq!(split_level(0.25), 0.4);
        assert_eq!(split_level(0.49), 0.4);
        assert_eq!(split_level(0.5), 0.6);
        assert_eq!(split_level(0.74), 0.6);
        assert_eq!(split_level(0.75), 0.8);
        assert_eq!(split_level(1.0), 0.8);
        // Out-of-range genes clamp instead of misindexing.
        assert_eq!(split_level(-0.3), 0.2);
        assert_eq!(split_level(1.7), 0.8);
    }

    #[test]
    fn decode_unsplit_when_both_slots_round_to_same_line() {
        let d = two_line_dataset(vec![order(1, 1, 500, 10.0)]);
        let g = Genome::new(vec![1.6, 2.4, 0.9, 1.0]);
        let plan = decode_genome(&g, &d);
        assert_eq!(plan.sub_orders.len(), 1);
        assert_eq!(plan.sub_orders[0].line, 2);
        assert_eq!(plan.sub_orders[0].quantity, 500);
        assert_eq!(plan.split_fraction[0], None);
    }

    #[test]
    fn decode_split_quantities_round_then_complement() {
        // 780 at fraction 0.4 -> 312 + 468; 870 -> 348 + 522.
        let d = two_line_dataset(vec![order(1, 1, 780, 34.0), order(2, 1, 870, 14.2)]);
        let g = Genome::new(vec![1.0, 2.0, 1.0, 2.0, 0.4, 0.4, 1.0, 2.0]);
        let plan = decode_genome(&g, &d);
        assert_eq!(plan.sub_orders.len(), 4);
        let q: Vec<u32> = plan.sub_orders.iter().map(|s| s.quantity).collect();
        assert_eq!(q, vec![312, 468, 348, 522]);
        assert_eq!(plan.split_fraction, vec![Some(0.4), Some(0.4)]);
        // Both halves carry the order's key.
        assert_eq!(plan.sub_orders[0].sequence_key, plan.sub_orders[1].sequence_key);
    }

    #[test]
    fn decode_collapses_degenerate_splits() {
        // Quantity 1 at fraction 0.2 rounds to 0 pieces on the first line.
        let d = two_line_dataset(vec![order(1, 1, 1, 10.0)]);
        let g = Genome::new(vec![1.0, 2.0, 0.1, 1.0]);
        let plan = decode_genome(&g, &d);
        assert_eq!(plan.sub_orders.len(), 1);
        assert_eq!(plan.sub_orders[0].line, 2);
        assert_eq!(plan.split_fraction[0], None);

        // Quantity 2 at fraction 0.8 rounds to all 2 on the first line.
        let d = two_line_dataset(vec![order(1, 1, 2, 10.0)]);
        let g = Genome::new(vec![1.0, 2.0, 0.9, 1.0]);
        let plan = decode_genome(&g, &d);
        assert_eq!(plan.sub_orders.len(), 1);
        assert_eq!(plan.sub_orders[0].line, 1);
    }

    #[test]
    fn decode_repairs_zero_efficiency_lines_upward() {
        let mut d = two_line_dataset(vec![order(1, 2, 100, 10.0)]);
        d.lines.push(ProductionLine {
            id: 3,
            capacity_minutes: 6720.0,
            efficiency_by_type: vec![1.0, 1.0],
        });
        // Line 2 cannot run type 2; a gene pointing there must wrap to 3.
        d.lines[1].efficiency_by_type = vec![0.8, 0.0];
        let g = Genome::new(vec![2.0, 2.0, 0.5, 1.0]);
        let plan = decode_genome(&g, &d);
        assert_eq!(plan.sub_orders[0].line, 3);

        // Wrap-around: line 3 incapable too, gene at 3 -> line 1.
        d.lines[2].efficiency_by_type = vec![1.0, 0.0];
        let g = Genome::new(vec![3.0, 3.0, 0.5, 1.0]);
        let plan = decode_genome(&g, &d);
        assert_eq!(plan.sub_orders[0].line, 1);
    }

    #[test]
    fn decode_clamps_out_of_range_line_genes() {
        let d = two_line_dataset(vec![order(1, 1, 100, 10.0)]);
        let g = Genome::new(vec![-3.0, 9.5, 0.5, 1.0]);
        let plan = decode_genome(&g, &d);
        assert_eq!(plan.sub_orders.len(), 2);
        assert_eq!(plan.sub_orders[0].line, 1);
        assert_eq!(plan.sub_orders[1].line, 2);
    }

    #[test]
    fn sequence_orders_by_key_then_id_then_sub_index() {
        let plan = AssignmentPlan {
            sub_orders: vec![
                SubOrder { order: 1, sub_index: 0, line: 1, quantity: 10, sequence_key: 2.5 },
                SubOrder { order: 2, sub_index: 0, line: 1, quantity: 10, sequence_key: 1.0 },
                SubOrder { order: 3, sub_index: 1, line: 1, quantity: 10, sequence_key: 2.5 },
                SubOrder { order: 3, sub_index: 0, line: 2, quantity: 10, sequence_key: 0.5 },
            ],
            split_fraction: vec![None, None, Some(0.4)],
        };
        let seq: Vec<(OrderId, u8)> =
            sequence_line(&plan, 1).iter().map(|s| (s.order, s.sub_index)).collect();
        assert_eq!(seq, vec![(2, 0), (1, 0), (3, 1)]);
        assert_eq!(sequence_line(&plan, 2).len(), 1);
        assert!(sequence_line(&plan, 5).is_empty());
    }

    #[test]
    fn single_order_takes_two_days_and_charges_finish_minutes() {
        // 870 pieces, smv 14.2, full line: 473.24 pieces/day. Day 0 leaves
        // 396.76 pieces for day 1 = 5634 minutes.
        let d = two_line_dataset(vec![order(1, 1, 870, 14.2)]);
        let plan = decode_genome(&genome_unsplit(1, 1.0), &d);
        let s = simulate(&plan, &d, &mut ZeroNoise).unwrap();
        assert_eq!(s.sub_orders.len(), 1);
        let so = &s.sub_orders[0];
        assert_eq!((so.a_day, so.p_time, so.f_day), (0, 2, 2));
        let trace = s.daily_quantities(0);
        assert_eq!(trace.len(), 2);
        assert!((trace[0] - 473.23943661971833).abs() < 1e-9);
        assert!((trace[0] + trace[1] - 2.0 * 473.23943661971833).abs() < 1e-9);
    }

    #[test]
    fn same_type_successor_shares_partial_finish_day() {
        // Order 1 as above ends day 1 with 6720 - 5634 = 1086 min left.
        // Order 2 (700 pieces, smv 18.2) rates: 1086/18.2 = 59.67 on day 1,
        // then 369.23/day; cumulative 59.67, 428.90, 798.13 -> 3 days,
        // finishing day 3, f_day 4.
        let d = two_line_dataset(vec![order(1, 1, 870, 14.2), order(2, 1, 700, 18.2)]);
        let plan = decode_genome(&genome_unsplit(2, 1.0), &d);
        let s = simulate(&plan, &d, &mut ZeroNoise).unwrap();
        let so = &s.sub_orders[1];
        assert_eq!((so.a_day, so.p_time, so.f_day), (1, 3, 4));
        let trace = s.daily_quantities(1);
        assert!((trace[0] - 59.67032967032967).abs() < 1e-9);
        assert!((trace[1] - 369.2307692307692).abs() < 1e-9);
    }

    #[test]
    fn different_type_successor_starts_next_whole_day() {
        let mut d = two_line_dataset(vec![order(1, 1, 870, 14.2), order(2, 2, 100, 18.2)]);
        // Make type 2 flat so the rate is hand-checkable.
        d.product_types[1].learning_curve = LearningCurve::flat();
        let plan = decode_genome(&genome_unsplit(2, 1.0), &d);
        let s = simulate(&plan, &d, &mut ZeroNoise).unwrap();
        let so = &s.sub_orders[1];
        // Predecessor finished on day 1 with minutes to spare, but the type
        // changed: start day 2 with the full budget.
        assert_eq!(so.a_day, 2);
        let trace = s.daily_quantities(1);
        // Full-day draw at 6720/18.2 = 369.23 pieces; 100 needed, one day.
        assert!((trace[0] - 369.2307692307692).abs() < 1e-9);
        assert_eq!(so.p_time, 1);
    }

    #[test]
    fn learning_curve_advances_across_same_type_orders() {
        // Type 2 ramps 0.5 / 0.7 / 0.85 / 1.0. First order consumes days
        // 0-1 (curve days 1-2); the successor shares day 1 at curve day 2
        // and continues on day 2 at curve day 3.
        let d = two_line_dataset(vec![order(1, 2, 400, 14.2), order(2, 2, 400, 14.2)]);
        let plan = decode_genome(&genome_unsplit(2, 1.0), &d);
        let s = simulate(&plan, &d, &mut ZeroNoise).unwrap();

        let t0 = s.daily_quantities(0);
        let full = 6720.0 / 14.2;
        assert!((t0[0] - 0.5 * full).abs() < 1e-9);
        assert_eq!(s.sub_orders[0].p_time, 2, "236.6 then 331.3 pieces reaches 400 on day 2");

        let so = &s.sub_orders[1];
        assert_eq!(so.a_day, 1, "successor shares day 1");
        let t1 = s.daily_quantities(1);
        // Day 1 leftover minutes: first order used (400 - 236.62) * 14.2/0.7
        // of day 1; successor gets the rest at curve day 2.
        let used = (400.0 - 0.5 * full) * 14.2 / 0.7;
        let expect_first = (6720.0 - used) * 0.7 / 14.2;
        assert!((t1[0] - expect_first).abs() < 1e-9);
        // Next day continues at curve day 3.
        assert!((t1[1] - 0.85 * full).abs() < 1e-9);
    }

    #[test]
    fn constant_noise_scales_whole_day_output() {
        let d = two_line_dataset(vec![order(1, 1, 870, 14.2)]);
        let plan = decode_genome(&genome_unsplit(1, 1.0), &d);
        let s = simulate(&plan, &d, &mut ConstNoise(0.2)).unwrap();
        let trace = s.daily_quantities(0);
        assert!((trace[0] - 1.2 * 473.23943661971833).abs() < 1e-9);
        // Still two days: 567.9 < 870 on day 0.
        assert_eq!(s.sub_orders[0].p_time, 2);

        let s = simulate(&plan, &d, &mut ConstNoise(-0.2)).unwrap();
        let trace = s.daily_quantities(0);
        assert!((trace[0] - 0.8 * 473.23943661971833).abs() < 1e-9);
    }

    #[test]
    fn counter_noise_is_bounded_and_coordinate_addressed() {
        let d = two_line_dataset(vec![
            order(1, 1, 2000, 14.2),
            order(2, 2, 1500, 18.2),
            order(3, 1, 900, 32.2),
        ]);
        let g = Genome::new(vec![1.0, 2.0, 2.0, 2.0, 1.0, 1.0, 0.4, 0.1, 0.6, 2.0, 1.0, 3.0]);
        let plan = decode_genome(&g, &d);
        let mut rec = RecordingNoise {
            inner: CounterNoise { seed: 99, sample: 3, beta: 0.2, scope: NoiseScope::OrderDay },
            log: vec![],
        };
        let s1 = simulate(&plan, &d, &mut rec).unwrap();
        assert!(!rec.log.is_empty());
        assert!(rec.log.iter().all(|v| v.abs() <= 0.2));
        // Draws vary (a constant stream would mean the hash ignores coords).
        assert!(rec.log.iter().any(|v| (v - rec.log[0]).abs() > 1e-12));

        // Replaying the recorded draws reproduces the schedule exactly.
        let s2 = simulate(&plan, &d, &mut ReplayNoise::new(rec.log.clone())).unwrap();
        assert_eq!(s1, s2);

        // Same coordinates, same draws: a fresh stream yields the same
        // schedule; a different sample index yields a different one.
        let mut again =
            CounterNoise { seed: 99, sample: 3, beta: 0.2, scope: NoiseScope::OrderDay };
        assert_eq!(simulate(&plan, &d, &mut again).unwrap(), s1);
        let mut other =
            CounterNoise { seed: 99, sample: 4, beta: 0.2, scope: NoiseScope::OrderDay };
        assert_ne!(simulate(&plan, &d, &mut other).unwrap(), s1);
    }

    #[test]
    fn line_day_scope_shares_draws_by_calendar_day() {
        let ctx_a = NoiseContext { line: 1, order: 1, sub_index: 0, rel_day: 1, abs_day: 5 };
        let ctx_b = NoiseContext { line: 1, order: 9, sub_index: 1, rel_day: 3, abs_day: 5 };
        let mut s = CounterNoise { seed: 7, sample: 0, beta: 0.2, scope: NoiseScope::LineDay };
        assert_eq!(s.next_noise(&ctx_a).unwrap(), s.next_noise(&ctx_b).unwrap());
        let mut s = CounterNoise { seed: 7, sample: 0, beta: 0.2, scope: NoiseScope::OrderDay };
        assert_ne!(s.next_noise(&ctx_a).unwrap(), s.next_noise(&ctx_b).unwrap());
    }

    #[test]
    fn replay_underrun_is_an_error() {
        let d = two_line_dataset(vec![order(1, 1, 870, 14.2)]);
        let plan = decode_genome(&genome_unsplit(1, 1.0), &d);
        let err = simulate(&plan, &d, &mut ReplayNoise::new(vec![0.0])).unwrap_err();
        assert_eq!(err, SimError::NoiseExhausted { supplied: 1 });
    }

    #[test]
    fn zero_efficiency_assignment_is_rejected_by_the_simulator() {
        let mut d = two_line_dataset(vec![order(1, 1, 100, 10.0)]);
        d.lines[1].efficiency_by_type = vec![0.0, 0.8];
        let plan = AssignmentPlan {
            sub_orders: vec![SubOrder {
                order: 1,
                sub_index: 0,
                line: 2,
                quantity: 100,
                sequence_key: 1.0,
            }],
            split_fraction: vec![None],
        };
        let err = simulate(&plan, &d, &mut ZeroNoise).unwrap_err();
        assert_eq!(err, SimError::ZeroEfficiencyAssignment { order: 1, line: 2 });
    }

    #[test]
    fn deterministic_stream_gives_identical_schedules() {
        let d = two_line_dataset(vec![order(1, 1, 870, 14.2), order(2, 2, 700, 18.2)]);
        let g = Genome::new(vec![1.0, 2.0, 2.0, 1.0, 0.4, 0.6, 2.0, 1.0]);
        let plan = decode_genome(&g, &d);
        let a = simulate(&plan, &d, &mut ZeroNoise).unwrap();
        let b = simulate(&plan, &d, &mut ZeroNoise).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cursor_starts_cold() {
        let c = LineCursor::new(4);
        assert_eq!(c.line, 4);
        assert_eq!(c.day, 0);
        assert_eq!(c.minutes_used, 0.0);
        assert_eq!(c.last_type, None);
        assert!(!c.started);
    }

    #[test]
    fn genome_bounds_cover_three_parts() {
        let d = two_line_dataset(vec![order(1, 1, 10, 1.0), order(2, 1, 10, 1.0)]);
        let b = GenomeBounds::for_dataset(&d);
        assert_eq!(b.dimension(), 8);
        assert_eq!(&b.lower, &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(&b.upper, &[2.0, 2.0, 2.0, 2.0, 1.0, 1.0, 2.0, 2.0]);
        assert!(b.contains(&Genome::new(vec![1.0, 2.0, 1.5, 1.0, 0.0, 1.0, 1.0, 2.0])));
        assert!(!b.contains(&Genome::new(vec![1.0, 2.5, 1.5, 1.0, 0.0, 1.0, 1.0, 2.0])));
        assert!(!b.contains(&Genome::new(vec![1.0; 7])));
    }
}
