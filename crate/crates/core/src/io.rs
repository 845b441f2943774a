//! Dataset files, result exports, and run manifests.
//!
//! Datasets are JSON. The on-disk form is written for humans: product types
//! are referenced by name, line efficiencies are a name-keyed map, and an
//! event's `finished` flag is either a plain bool or a map keyed by the
//! stringified scheduling day (`"-14"`, `"-7"`, `"-3"`), so one file carries
//! every snapshot. Loading resolves names to contiguous ids and picks the
//! snapshot for the requested scheduling day.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::domain::{
    validate_dataset, Dataset, Day, LearningCurve, Order, PreProductionEvent, ProductType,
    ProductionLine, Violation,
};
use crate::moea::{GenStats, Individual, RunConfig};
use crate::objectives::ObjectivePoint;
use crate::sim::Schedule;

/// Default scheduling day when a dataset file does not set one.
pub const DEFAULT_S_DAY: Day = -7;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: invalid JSON at line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: order {order} event {event:?} has no snapshot for scheduling day {s_day}")]
    MissingScenario { path: String, order: usize, event: String, s_day: Day },
    #[error("{path}: line {line} lists an efficiency for unknown product type {key:?}")]
    UnknownEfficiencyKey { path: String, line: usize, key: String },
    #[error("{path}: order {order} references unknown product type {name:?}")]
    UnknownProductType { path: String, order: usize, name: String },
    #[error("{path}: dataset failed validation with {} issue(s)", violations.len())]
    Invalid { path: String, violations: Vec<Violation> },
}

/// A dataset resolved from disk, plus everything a manifest wants to know
/// about where it came from.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    /// The file's own name field (empty when absent).
    pub name: String,
    /// Non-fatal oddities: unknown fields, lines with no efficiency entry
    /// for some type (treated as not capable).
    pub warnings: Vec<String>,
    /// SHA-256 of the raw file bytes, lower hex.
    pub sha256: String,
}

// ---- raw on-disk schema ----

fn default_file_s_day() -> Day {
    DEFAULT_S_DAY
}

#[derive(Serialize, Deserialize)]
struct RawDataset {
    #[serde(default)]
    name: String,
    #[serde(default = "default_file_s_day")]
    s_day: Day,
    #[serde(default)]
    p_day: Day,
    product_types: Vec<RawType>,
    lines: Vec<RawLine>,
    orders: Vec<RawOrder>,
}

#[derive(Serialize, Deserialize)]
struct RawType {
    name: String,
    /// `[day, efficiency]` pairs, first day 1, efficiency nondecreasing.
    learning_curve: Vec<(u32, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawLine {
    #[serde(default)]
    name: String,
    capacity_minutes: f64,
    /// Keyed by product-type name; a missing type means the line cannot
    /// make it.
    efficiency: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct RawOrder {
    #[serde(default)]
    name: String,
    product_type: String,
    quantity: u32,
    due_day: Day,
    smv: f64,
    #[serde(default)]
    events: Vec<RawEvent>,
}

#[derive(Serialize, Deserialize)]
struct RawEvent {
    name: String,
    offset_days: Day,
    finished: FinishedSpec,
}

/// `true`/`false` for every snapshot, or per-snapshot values keyed by the
/// stringified scheduling day.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FinishedSpec {
    All(bool),
    ByScenario(BTreeMap<String, bool>),
}

/// SHA-256 of a byte string, lower hex.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

/// Loads a dataset using the scheduling day stored in the file itself.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<LoadedDataset, LoadError> {
    load_impl(path.as_ref(), None)
}

/// Loads a dataset resolved for an explicit scheduling day, overriding the
/// file's own.
pub fn load_dataset_scenario(path: impl AsRef<Path>, s_day: Day) -> Result<LoadedDataset, LoadError> {
    load_impl(path.as_ref(), Some(s_day))
}

fn load_impl(path: &Path, s_day_override: Option<Day>) -> Result<LoadedDataset, LoadError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: shown.clone(),
        source,
    })?;
    let sha256 = sha256_hex(text.as_bytes());

    let raw: RawDataset = serde_json::from_str(&text).map_err(|e| LoadError::Parse {
        path: shown.clone(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut warnings = match serde_json::from_str::<serde_json::Value>(&text) {
        Ok(v) => unknown_field_warnings(&v),
        Err(_) => Vec::new(),
    };

    let s_day = s_day_override.unwrap_or(raw.s_day);
    let dataset = resolve(&raw, s_day, &shown, &mut warnings)?;
    let violations = validate_dataset(&dataset);
    if !violations.is_empty() {
        return Err(LoadError::Invalid { path: shown, violations });
    }
    Ok(LoadedDataset { dataset, name: raw.name, warnings, sha256 })
}

fn resolve(
    raw: &RawDataset,
    s_day: Day,
    path: &str,
    warnings: &mut Vec<String>,
) -> Result<Dataset, LoadError> {
    let product_types: Vec<ProductType> = raw
        .product_types
        .iter()
        .enumerate()
        .map(|(i, t)| ProductType {
            id: i + 1,
            name: t.name.clone(),
            learning_curve: LearningCurve { breakpoints: t.learning_curve.clone() },
        })
        .collect();
    let type_id = |name: &str| product_types.iter().find(|t| t.name == name).map(|t| t.id);

    let mut lines = Vec::with_capacity(raw.lines.len());
    for (i, l) in raw.lines.iter().enumerate() {
        let mut by_type = vec![0.0; product_types.len()];
        for (key, &eff) in &l.efficiency {
            match type_id(key) {
                Some(t) => by_type[t - 1] = eff,
                None => {
                    return Err(LoadError::UnknownEfficiencyKey {
                        path: path.to_string(),
                        line: i + 1,
                        key: key.clone(),
                    })
                }
            }
        }
        for t in &product_types {
            if !l.efficiency.contains_key(&t.name) {
                warnings.push(format!(
                    "line {} has no efficiency entry for {:?}; treating it as not capable",
                    i + 1,
                    t.name
                ));
            }
        }
        lines.push(ProductionLine {
            id: i + 1,
            capacity_minutes: l.capacity_minutes,
            efficiency_by_type: by_type,
        });
    }

    let mut orders = Vec::with_capacity(raw.orders.len());
    for (i, o) in raw.orders.iter().enumerate() {
        let product_type = type_id(&o.product_type).ok_or_else(|| LoadError::UnknownProductType {
            path: path.to_string(),
            order: i + 1,
            name: o.product_type.clone(),
        })?;
        let mut events = Vec::with_capacity(o.events.len());
        for e in &o.events {
            let finished = match &e.finished {
                FinishedSpec::All(b) => *b,
                FinishedSpec::ByScenario(m) => {
                    *m.get(&s_day.to_string()).ok_or_else(|| LoadError::MissingScenario {
                        path: path.to_string(),
                        order: i + 1,
                        event: e.name.clone(),
                        s_day,
                    })?
                }
            };
            events.push(PreProductionEvent {
                name: e.name.clone(),
                offset_days: e.offset_days,
                finished,
            });
        }
        orders.push(Order {
            id: i + 1,
            product_type,
            quantity: o.quantity,
            due_day: o.due_day,
            smv: o.smv,
            events,
        });
    }

    Ok(Dataset { product_types, lines, orders, s_day, p_day: raw.p_day })
}

fn unknown_field_warnings(root: &serde_json::Value) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |v: &serde_json::Value, allowed: &[&str], at: String| {
        if let Some(obj) = v.as_object() {
            for k in obj.keys() {
                if !allowed.contains(&k.as_str()) {
                    out.push(format!("unknown field `{k}` in {at}"));
                }
            }
        }
    };
    check(root, &["name", "s_day", "p_day", "product_types", "lines", "orders"], "dataset".into());
    for (key, allowed) in [
        ("product_types", &["name", "learning_curve"] as &[&str]),
        ("lines", &["name", "capacity_minutes", "efficiency"]),
        ("orders", &["name", "product_type", "quantity", "due_day", "smv", "events"]),
    ] {
        if let Some(items) = root.get(key).and_then(|v| v.as_array()) {
            for (i, item) in items.iter().enumerate() {
                check(item, allowed, format!("{key}[{i}]"));
                if key == "orders" {
                    if let Some(events) = item.get("events").and_then(|v| v.as_array()) {
                        for (j, e) in events.iter().enumerate() {
                            check(
                                e,
                                &["name", "offset_days", "finished"],
                                format!("orders[{i}].events[{j}]"),
                            );
                        }
                    }
                }
            }
        }
    }
    out
}

/// Writes a resolved dataset back out in the on-disk schema (synthetic
/// `L{i}`/`O{i}` names, event flags already reduced to plain booleans).
/// Output bytes are deterministic, so saved files diff cleanly.
pub fn save_dataset(d: &Dataset, name: &str, path: impl AsRef<Path>) -> io::Result<()> {
    let raw = RawDataset {
        name: name.to_string(),
        s_day: d.s_day,
        p_day: d.p_day,
        product_types: d
            .product_types
            .iter()
            .map(|t| RawType {
                name: t.name.clone(),
                learning_curve: t.learning_curve.breakpoints.clone(),
            })
            .collect(),
        lines: d
            .lines
            .iter()
            .map(|l| RawLine {
                name: format!("L{}", l.id),
                capacity_minutes: l.capacity_minutes,
                efficiency: d
                    .product_types
                    .iter()
                    .map(|t| (t.name.clone(), l.efficiency_for(t.id)))
                    .collect(),
            })
            .collect(),
        orders: d
            .orders
            .iter()
            .map(|o| RawOrder {
                name: format!("O{}", o.id),
                product_type: d.product_types[o.product_type - 1].name.clone(),
                quantity: o.quantity,
                due_day: o.due_day,
                smv: o.smv,
                events: o
                    .events
                    .iter()
                    .map(|e| RawEvent {
                        name: e.name.clone(),
                        offset_days: e.offset_days,
                        finished: FinishedSpec::All(e.finished),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("dataset serializes");
    text.push('\n');
    fs::write(path, text)
}

// ---- result exports ----

/// `f1,f2` CSV, one row per point, in the given order.
pub fn write_front_csv(path: impl AsRef<Path>, points: &[ObjectivePoint]) -> io::Result<()> {
    let mut text = String::from("f1,f2\n");
    for p in points {
        writeln!(text, "{},{}", p.f1, p.f2).unwrap();
    }
    fs::write(path, text)
}

/// Full population dump: objectives, selection state, then every gene.
pub fn write_population_csv(path: impl AsRef<Path>, pop: &[Individual]) -> io::Result<()> {
    let dim = pop.first().map_or(0, |i| i.genome.len());
    let mut text = String::from("f1,f2,rank,crowding");
    for g in 1..=dim {
        write!(text, ",g{g}").unwrap();
    }
    text.push('\n');
    for ind in pop {
        write!(text, "{},{},{},{}", ind.objectives.f1, ind.objectives.f2, ind.rank, ind.crowding)
            .unwrap();
        for v in &ind.genome.values {
            write!(text, ",{v}").unwrap();
        }
        text.push('\n');
    }
    fs::write(path, text)
}

/// Per-generation progress CSV; adaptive-location columns are empty for
/// engines that have none.
pub fn write_stats_csv(path: impl AsRef<Path>, stats: &[GenStats]) -> io::Result<()> {
    let mut text = String::from("generation,best_f1,best_f2,mean_f1,mean_f2,mu_f,mu_cr\n");
    for s in stats {
        write!(text, "{},{},{},{},{}", s.generation, s.best_f1, s.best_f2, s.mean_f1, s.mean_f2)
            .unwrap();
        text.push(',');
        if let Some(v) = s.mu_f {
            write!(text, "{v}").unwrap();
        }
        text.push(',');
        if let Some(v) = s.mu_cr {
            write!(text, "{v}").unwrap();
        }
        text.push('\n');
    }
    fs::write(path, text)
}

/// One row per scheduled sub-order: where it ran and when.
pub fn write_gantt_csv(path: impl AsRef<Path>, schedule: &Schedule) -> io::Result<()> {
    let mut text = String::from("order,sub_index,line,quantity,start_day,processing_days,finish_day\n");
    for s in &schedule.sub_orders {
        writeln!(
            text,
            "{},{},{},{},{},{},{}",
            s.order, s.sub_index, s.line, s.quantity, s.a_day, s.p_time, s.f_day
        )
        .unwrap();
    }
    fs::write(path, text)
}

/// Nested JSON view of a schedule, daily piece counts included.
pub fn schedule_json(schedule: &Schedule) -> serde_json::Value {
    let subs: Vec<serde_json::Value> = schedule
        .sub_orders
        .iter()
        .enumerate()
        .map(|(i, s)| {
            serde_json::json!({
                "order": s.order,
                "sub_index": s.sub_index,
                "line": s.line,
                "quantity": s.quantity,
                "start_day": s.a_day,
                "processing_days": s.p_time,
                "finish_day": s.f_day,
                "daily_quantities": schedule.daily_quantities(i),
            })
        })
        .collect();
    serde_json::json!({ "sub_orders": subs })
}

// ---- cross-run boundary statistics ----

/// Mean and sample standard deviation of both coordinates of one chosen
/// boundary point across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordStats {
    pub mean_f1: f64,
    pub std_f1: f64,
    pub mean_f2: f64,
    pub std_f2: f64,
}

/// Stability of the two front extremes across repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStats {
    /// Stats of each run's lowest-`f1` point (ties broken by lower `f2`).
    pub min_f1_point: CoordStats,
    /// Stats of each run's lowest-`f2` point (ties broken by lower `f1`).
    pub min_f2_point: CoordStats,
}

fn coord_stats(points: &[(f64, f64)]) -> CoordStats {
    let n = points.len() as f64;
    let mean_f1 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_f2 = points.iter().map(|p| p.1).sum::<f64>() / n;
    // Sample std (n - 1); a single run has no spread to estimate.
    let std = |mean: f64, pick: fn(&(f64, f64)) -> f64| {
        if points.len() < 2 {
            0.0
        } else {
            (points.iter().map(|p| (pick(p) - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        }
    };
    CoordStats { mean_f1, std_f1: std(mean_f1, |p| p.0), mean_f2, std_f2: std(mean_f2, |p| p.1) }
}

/// Per-run front extremes summarized across runs. Every front must be
/// non-empty.
pub fn boundary_stats(fronts: &[Vec<ObjectivePoint>]) -> BoundaryStats {
    assert!(!fronts.is_empty() && fronts.iter().all(|f| !f.is_empty()));
    let pick = |key: fn(&ObjectivePoint) -> (f64, f64)| {
        fronts
            .iter()
            .map(|front| {
                let best = front
                    .iter()
                    .min_by(|a, b| {
                        let (a1, a2) = key(a);
                        let (b1, b2) = key(b);
                        a1.total_cmp(&b1).then(a2.total_cmp(&b2))
                    })
                    .unwrap();
                (best.f1, best.f2)
            })
            .collect::<Vec<_>>()
    };
    BoundaryStats {
        min_f1_point: coord_stats(&pick(|p| (p.f1, p.f2))),
        min_f2_point: coord_stats(&pick(|p| (p.f2, p.f1))),
    }
}

/// Element-wise mean of equal-length trajectories.
pub fn mean_trajectory(runs: &[Vec<f64>]) -> Vec<f64> {
    assert!(!runs.is_empty());
    let len = runs[0].len();
    assert!(runs.iter().all(|r| r.len() == len), "trajectories differ in length");
    (0..len)
        .map(|g| runs.iter().map(|r| r[g]).sum::<f64>() / runs.len() as f64)
        .collect()
}

// ---- run manifests ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestStatus {
    Running,
    Complete,
}

/// Provenance record written next to a run's artifacts: created first with
/// status `running`, rewritten as `complete` when everything else is on
/// disk. A `running` manifest after the process exits means the run died.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub created_utc: String,
    pub finished_utc: Option<String>,
    pub status: ManifestStatus,
    /// The invoking command line, verbatim.
    pub command: String,
    pub dataset_path: String,
    pub dataset_sha256: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    /// Artifact file names relative to the manifest's directory.
    pub artifacts: Vec<String>,
}

/// Current UTC time, RFC 3339.
pub fn now_rfc3339() -> String {
    OffsetDateTime::now_utc().format(&Rfc3339).expect("UTC formats")
}

impl RunManifest {
    pub fn begin(
        command: String,
        dataset_path: String,
        dataset_sha256: String,
        config: RunConfig,
        seeds: Vec<u64>,
    ) -> Self {
        RunManifest {
            created_utc: now_rfc3339(),
            finished_utc: None,
            status: ManifestStatus::Running,
            command,
            dataset_path,
            dataset_sha256,
            config,
            seeds,
            artifacts: Vec::new(),
        }
    }

    pub fn complete(&mut self, artifacts: Vec<String>) {
        self.artifacts = artifacts;
        self.finished_utc = Some(now_rfc3339());
        self.status = ManifestStatus::Complete;
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        let shown = path.as_ref().display().to_string();
        let text = fs::read_to_string(path.as_ref()).map_err(|source| LoadError::Io {
            path: shown.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| LoadError::Parse {
            path: shown,
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}
