//! Robust order scheduling for multi-line apparel production.
//!
//! The crate models a sewing floor with several production lines, a pool of
//! customer orders, and a calendar of pre-production events (fabric receipt,
//! sample approval, ...) that gate when each order can safely start. A
//! candidate plan assigns every order to one or two lines, splits quantities,
//! and sequences work per line; a day-by-day simulation turns the plan into
//! start/finish days under operator learning curves and bounded daily-output
//! noise. Plans are scored on two objectives:
//!
//! * `f1` — total tardiness: finish days past each order's due day, and
//! * `f2` — total clashes: planned starts earlier than the conservative
//!   start day implied by unfinished pre-production events.
//!
//! Search is carried out by an adaptive differential-evolution engine inside
//! an elitist nondominated-sorting loop, with a classic crossover/mutation
//! baseline and a single-objective variant for comparison runs. All
//! stochastic parts derive their streams from explicit seeds, so any result
//! is reproducible bit-for-bit regardless of thread count.
//!
//! Module map:
//!
//! * [`domain`] — dataset types (lines, orders, learning curves, events)
//!   and validation.
//! * [`sim`] — genome decoding, per-line sequencing, and the production-day
//!   simulation.
//! * [`objectives`] — tardiness/clash scoring, conservative start days, and
//!   noise-averaged (robust) evaluation.
//! * [`moea`] — nondominated sorting, crowding, the adaptive DE engine, the
//!   baseline engine, and full optimization runs.
//! * [`io`] — dataset JSON loading/saving, result CSV exports, run
//!   manifests, and front boundary statistics.

pub mod domain;
pub mod io;
pub mod moea;
pub mod objectives;
pub mod seeding;
pub mod sim;

pub use domain::{Dataset, LearningCurve, Order, PreProductionEvent, ProductType, ProductionLine};
pub use moea::{run, Algorithm, Individual, RunConfig, RunResult};
pub use objectives::{ObjectiveKind, ObjectivePoint};
pub use sim::{AssignmentPlan, Genome, Schedule};
