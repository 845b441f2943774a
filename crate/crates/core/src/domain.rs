//! Problem data: production lines, product types, learning curves, orders,
//! and the pre-production events that gate order starts.
//!
//! Conventions used throughout the crate:
//!
//! * Days are integers. Day 0 is the planning day `p_day` (production may
//!   start that day); the scheduling snapshot `s_day` lies at or before it.
//!   Event offsets are non-positive days relative to an order's planned
//!   start.
//! * Ids are 1-based and contiguous: lines `1..=m`, orders `1..=n`, product
//!   types `1..=k`. Vectors indexed by id use `id - 1`.
//! * `smv` is the standard minute value of one piece: the minutes one fully
//!   efficient operator-minute stream needs to sew it.
//! * Line efficiency per type and learning-curve efficiency are fractions in
//!   `(0, 1]`; a per-type line efficiency of exactly `0` marks a line that
//!   cannot run that product at all.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 1-based product-type id.
pub type TypeId = usize;
/// 1-based production-line id.
pub type LineId = usize;
/// 1-based order id.
pub type OrderId = usize;
/// Calendar day relative to the planning day (day 0).
pub type Day = i64;

/// Errors from domain-level lookups.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    /// Learning-curve lookup for a day below 1; consecutive days count from 1.
    #[error("learning-curve day {0} is below 1")]
    DayBeforeCurveStart(u32),
    /// Learning curve without breakpoints cannot answer lookups.
    #[error("learning curve has no breakpoints")]
    EmptyCurve,
}

/// Step-wise operator efficiency by consecutive production day of one
/// product type on one line. Day 1 is the first day after a changeover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    /// `(day, efficiency)` breakpoints, strictly increasing in day, first
    /// day 1; efficiency holds from its breakpoint until the next one and
    /// the last value holds forever.
    pub breakpoints: Vec<(u32, f64)>,
}

impl LearningCurve {
    /// Curve that is already at full efficiency on day 1.
    pub fn flat() -> Self {
        LearningCurve { breakpoints: vec![(1, 1.0)] }
    }

    /// Efficiency on the given consecutive production day (1-based).
    pub fn efficiency(&self, day: u32) -> Result<f64, DomainError> {
        if day < 1 {
            return Err(DomainError::DayBeforeCurveStart(day));
        }
        let mut value = None;
        for &(d, e) in &self.breakpoints {
            if d <= day {
                value = Some(e);
            } else {
                break;
            }
        }
        value.ok_or(DomainError::EmptyCurve)
    }

    /// Efficiency the curve saturates at (its last breakpoint).
    pub fn saturation(&self) -> f64 {
        self.breakpoints.last().map(|&(_, e)| e).unwrap_or(0.0)
    }
}

/// A product family sharing one learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductType {
    pub id: TypeId,
    pub name: String,
    pub learning_curve: LearningCurve,
}

/// A sewing line with a daily minute budget and per-type efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductionLine {
    pub id: LineId,
    /// Available operator minutes per working day.
    pub capacity_minutes: f64,
    /// Efficiency per product type, indexed by `type_id - 1`; `0.0` means
    /// the line cannot run that type.
    pub efficiency_by_type: Vec<f64>,
}

impl ProductionLine {
    /// Line efficiency for one product type (`0.0` when out of range).
    pub fn efficiency_for(&self, t: TypeId) -> f64 {
        self.efficiency_by_type.get(t.wrapping_sub(1)).copied().unwrap_or(0.0)
    }
}

/// One pre-production milestone of an order, e.g. fabric receipt.
///
/// `offset_days` places its deadline relative to the order's planned start
/// (so it is never positive); `finished` records whether it was done by the
/// scheduling snapshot `s_day` the dataset was resolved for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreProductionEvent {
    pub name: String,
    pub offset_days: Day,
    pub finished: bool,
}

/// A customer order for one product type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    pub product_type: TypeId,
    /// Pieces ordered.
    pub quantity: u32,
    /// Day the order is due (finish day at or before this is on time).
    pub due_day: Day,
    /// Standard minute value of one piece.
    pub smv: f64,
    pub events: Vec<PreProductionEvent>,
}

/// A full scheduling problem instance, resolved for one snapshot day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub product_types: Vec<ProductType>,
    pub lines: Vec<ProductionLine>,
    pub orders: Vec<Order>,
    /// Scheduling snapshot day (when the plan is made), at or before day 0.
    pub s_day: Day,
    /// Planning day production may start; always day 0 in this model.
    pub p_day: Day,
}

impl Dataset {
    pub fn num_orders(&self) -> usize {
        self.orders.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    /// Lines able to run the given type (nonzero efficiency), ascending id.
    pub fn valid_lines(&self, t: TypeId) -> Vec<LineId> {
        self.lines
            .iter()
            .filter(|l| l.efficiency_for(t) > 0.0)
            .map(|l| l.id)
            .collect()
    }

    /// Copy with every pre-production event marked finished; useful for
    /// studying pure capacity questions with readiness clashes switched off.
    pub fn with_all_events_finished(&self) -> Dataset {
        let mut d = self.clone();
        for o in &mut d.orders {
            for e in &mut o.events {
                e.finished = true;
            }
        }
        d
    }

    /// Copy with every learning curve flattened to full efficiency; useful
    /// for capacity bounds that ignore ramp-up losses.
    pub fn with_flat_curves(&self) -> Dataset {
        let mut d = self.clone();
        for t in &mut d.product_types {
            t.learning_curve = LearningCurve::flat();
        }
        d
    }
}

/// Machine-readable reason a dataset failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    PDayNonzero,
    SDayAfterPDay,
    BadTypeIds,
    BadLineIds,
    BadOrderIds,
    NonpositiveCapacity,
    EfficiencyOutOfRange,
    InvalidLearningCurve,
    NonpositiveQuantity,
    NonpositiveSmv,
    UnknownProductType,
    UnschedulableOrder,
    PositiveEventOffset,
}

/// One validation finding with a human-readable location.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

fn ids_are_contiguous(ids: impl Iterator<Item = usize>) -> bool {
    // ids must be exactly 1..=n in order; reordering is a data error too,
    // because loaders index vectors by id - 1.
    ids.enumerate().all(|(i, id)| id == i + 1)
}

/// Checks every structural invariant of a dataset and returns all findings
/// (empty means every other module will accept it).
pub fn validate_dataset(d: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |code, message: String| out.push(Violation { code, message });

    if d.p_day != 0 {
        push(ViolationCode::PDayNonzero, format!("p_day is {}, expected 0", d.p_day));
    }
    if d.s_day > d.p_day {
        push(
            ViolationCode::SDayAfterPDay,
            format!("s_day {} is after p_day {}", d.s_day, d.p_day),
        );
    }
    if !ids_are_contiguous(d.product_types.iter().map(|t| t.id)) {
        push(ViolationCode::BadTypeIds, "product-type ids are not 1..=k in order".into());
    }
    if !ids_are_contiguous(d.lines.iter().map(|l| l.id)) {
        push(ViolationCode::BadLineIds, "line ids are not 1..=m in order".into());
    }
    if !ids_are_contiguous(d.orders.iter().map(|o| o.id)) {
        push(ViolationCode::BadOrderIds, "order ids are not 1..=n in order".into());
    }

    for t in &d.product_types {
        let bp = &t.learning_curve.breakpoints;
        let days_ok = bp.first().map(|&(day, _)| day == 1).unwrap_or(false)
            && bp.windows(2).all(|w| w[0].0 < w[1].0);
        let eff_ok = bp.iter().all(|&(_, e)| e > 0.0 && e <= 1.0)
            && bp.windows(2).all(|w| w[0].1 <= w[1].1);
        if !(days_ok && eff_ok) {
            push(
                ViolationCode::InvalidLearningCurve,
                format!("type {} ({}) has an invalid learning curve", t.id, t.name),
            );
        }
    }

    for l in &d.lines {
        if !(l.capacity_minutes > 0.0) {
            push(
                ViolationCode::NonpositiveCapacity,
                format!("line {} capacity {} is not positive", l.id, l.capacity_minutes),
            );
        }
        if l.efficiency_by_type.len() != d.product_types.len()
            || l.efficiency_by_type.iter().any(|&e| !(0.0..=1.0).contains(&e))
        {
            push(
                ViolationCode::EfficiencyOutOfRange,
                format!("line {} per-type efficiencies must all lie in [0, 1]", l.id),
            );
        }
    }

    for o in &d.orders {
        if o.quantity == 0 {
            push(ViolationCode::NonpositiveQuantity, format!("order {} has quantity 0", o.id));
        }
        if !(o.smv > 0.0) {
            push(
                ViolationCode::NonpositiveSmv,
                format!("order {} has nonpositive smv {}", o.id, o.smv),
            );
        }
        if o.product_type < 1 || o.product_type > d.product_types.len() {
            push(
                ViolationCode::UnknownProductType,
                format!("order {} references unknown product type {}", o.id, o.product_type),
            );
        } else if d.valid_lines(o.product_type).is_empty() {
            push(
                ViolationCode::UnschedulableOrder,
                format!("order {}: no line can run its product type", o.id),
            );
        }
        for e in &o.events {
            if e.offset_days > 0 {
                push(
                    ViolationCode::PositiveEventOffset,
                    format!("order {} event '{}' has positive offset {}", o.id, e.name, e.offset_days),
                );
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ramp_curve() -> LearningCurve {
        LearningCurve { breakpoints: vec![(1, 0.5), (2, 0.7), (3, 0.85), (4, 1.0)] }
    }

    pub(crate) fn tiny_dataset() -> Dataset {
        Dataset {
            product_types: vec![ProductType {
                id: 1,
                name: "shirts".into(),
                learning_curve: LearningCurve::flat(),
            }],
            lines: vec![
                ProductionLine { id: 1, capacity_minutes: 480.0, efficiency_by_type: vec![1.0] },
                ProductionLine { id: 2, capacity_minutes: 480.0, efficiency_by_type: vec![0.8] },
            ],
            orders: vec![Order {
                id: 1,
                product_type: 1,
                quantity: 100,
                due_day: 3,
                smv: 4.8,
                events: vec![PreProductionEvent {
                    name: "fabric receipt".into(),
                    offset_days: -10,
                    finished: true,
                }],
            }],
            s_day: -7,
            p_day: 0,
        }
    }

    #[test]
    fn curve_lookup_steps_and_saturates() {
        let c = ramp_curve();
        assert_eq!(c.efficiency(1).unwrap(), 0.5);
        assert_eq!(c.efficiency(2).unwrap(), 0.7);
        assert_eq!(c.efficiency(3).unwrap(), 0.85);
        assert_eq!(c.efficiency(4).unwrap(), 1.0);
        assert_eq!(c.efficiency(100).unwrap(), 1.0);
        assert_eq!(c.saturation(), 1.0);
    }

    #[test]
    fn curve_lookup_rejects_day_zero_and_empty_curve() {
        assert_eq!(ramp_curve().efficiency(0), Err(DomainError::DayBeforeCurveStart(0)));
        let empty = LearningCurve { breakpoints: vec![] };
        assert_eq!(empty.efficiency(1), Err(DomainError::EmptyCurve));
        assert_eq!(empty.saturation(), 0.0);
    }

    #[test]
    fn curve_with_sparse_breakpoints_holds_between_them() {
        let c = LearningCurve { breakpoints: vec![(1, 0.3), (5, 0.9)] };
        for d in 1..5 {
            assert_eq!(c.efficiency(d).unwrap(), 0.3);
        }
        assert_eq!(c.efficiency(5).unwrap(), 0.9);
        assert_eq!(c.efficiency(50).unwrap(), 0.9);
    }

    #[test]
    fn random_valid_curves_give_monotone_lookups() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let len = rng.gen_range(1..8usize);
            let mut day = 1u32;
            let mut eff: f64 = rng.gen_range(0.05..0.5);
            let mut bp = Vec::new();
            for _ in 0..len {
                bp.push((day, eff));
                day += rng.gen_range(1..4u32);
                eff = (eff + rng.gen_range(0.0..0.3)).min(1.0);
            }
            let c = LearningCurve { breakpoints: bp };
            let mut prev = 0.0;
            for d in 1..=20u32 {
                let e = c.efficiency(d).unwrap();
                assert!(e >= prev, "lookup must be nondecreasing in day");
                prev = e;
            }
        }
    }

    #[test]
    fn valid_dataset_has_no_violations() {
        assert!(validate_dataset(&tiny_dataset()).is_empty());
    }

    fn codes(d: &Dataset) -> Vec<ViolationCode> {
        validate_dataset(d).into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn each_broken_invariant_is_reported_under_its_own_code() {
        let base = tiny_dataset();

        let mut d = base.clone();
        d.p_day = 1;
        assert!(codes(&d).contains(&ViolationCode::PDayNonzero));

        let mut d = base.clone();
        d.s_day = 2;
        assert!(codes(&d).contains(&ViolationCode::SDayAfterPDay));

        let mut d = base.clone();
        d.lines[1].id = 5;
        assert!(codes(&d).contains(&ViolationCode::BadLineIds));

        let mut d = base.clone();
        d.orders[0].id = 2;
        assert!(codes(&d).contains(&ViolationCode::BadOrderIds));

        let mut d = base.clone();
        d.product_types[0].id = 3;
        assert!(codes(&d).contains(&ViolationCode::BadTypeIds));

        let mut d = base.clone();
        d.lines[0].capacity_minutes = 0.0;
        assert!(codes(&d).contains(&ViolationCode::NonpositiveCapacity));

        let mut d = base.clone();
        d.lines[0].efficiency_by_type = vec![1.2];
        assert!(codes(&d).contains(&ViolationCode::EfficiencyOutOfRange));

        let mut d = base.clone();
        d.product_types[0].learning_curve = LearningCurve { breakpoints: vec![(2, 0.5)] };
        assert!(codes(&d).contains(&ViolationCode::InvalidLearningCurve));

        let mut d = base.clone();
        d.product_types[0].learning_curve =
            LearningCurve { breakpoints: vec![(1, 0.9), (2, 0.5)] };
        assert!(codes(&d).contains(&ViolationCode::InvalidLearningCurve));

        let mut d = base.clone();
        d.orders[0].quantity = 0;
        assert!(codes(&d).contains(&ViolationCode::NonpositiveQuantity));

        let mut d = base.clone();
        d.orders[0].smv = 0.0;
        assert!(codes(&d).contains(&ViolationCode::NonpositiveSmv));

        let mut d = base.clone();
        d.orders[0].product_type = 9;
        assert!(codes(&d).contains(&ViolationCode::UnknownProductType));

        let mut d = base.clone();
        for l in &mut d.lines {
            l.efficiency_by_type = vec![0.0];
        }
        assert!(codes(&d).contains(&ViolationCode::UnschedulableOrder));

        let mut d = base.clone();
        d.orders[0].events[0].offset_days = 3;
        assert!(codes(&d).contains(&ViolationCode::PositiveEventOffset));
    }

    #[test]
    fn scenario_helpers_rewrite_events_and_curves() {
        let mut d = tiny_dataset();
        d.orders[0].events[0].finished = false;
        d.product_types[0].learning_curve = ramp_curve();

        let finished = d.with_all_events_finished();
        assert!(finished.orders[0].events[0].finished);
        assert_eq!(finished.product_types[0].learning_curve, ramp_curve());

        let flat = d.with_flat_curves();
        assert_eq!(flat.product_types[0].learning_curve, LearningCurve::flat());
        assert!(!flat.orders[0].events[0].finished);
    }

    #[test]
    fn valid_lines_skips_zero_efficiency() {
        let mut d = tiny_dataset();
        d.lines[0].efficiency_by_type = vec![0.0];
        assert_eq!(d.valid_lines(1), vec![2]);
    }
}
