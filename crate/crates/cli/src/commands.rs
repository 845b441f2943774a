//! The five subcommands. Campaign-style commands (optimize, sweep,
//! compare) share one runner that writes a `running` manifest, executes the
//! seeds in order, and finalizes the manifest only after every artifact is
//! on disk.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use stitchplan::io::{
    boundary_stats, load_dataset, load_dataset_scenario, mean_trajectory, schedule_json,
    write_front_csv, write_gantt_csv, write_stats_csv, BoundaryStats, CoordStats, LoadError,
    LoadedDataset, RunManifest,
};
use stitchplan::moea::aggregate_pareto;
use stitchplan::objectives::{evaluate_deterministic, robust_objectives, ObjectivePoint};
use stitchplan::sim::{decode_genome, simulate, ZeroNoise};
use stitchplan::{run, Algorithm, Dataset, Genome, RunConfig, Schedule};

use crate::{CompareArgs, DataArgs, DecodeArgs, OptimizeArgs, SearchArgs, SweepArgs, ValidateArgs};

/// Loads and optionally re-snapshots the dataset. The loader rejects
/// invalid instances; each violation is surfaced on stderr before bailing
/// so every later stage can assume a clean dataset.
fn load(data: &DataArgs) -> anyhow::Result<(Dataset, LoadedDataset)> {
    let shown = data.dataset.display().to_string();
    let loaded = match data.sday {
        Some(s_day) => load_dataset_scenario(&data.dataset, s_day),
        None => load_dataset(&data.dataset),
    };
    let loaded = match loaded {
        Ok(l) => l,
        Err(LoadError::Invalid { path, violations }) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            bail!("{path}: dataset failed validation with {} violation(s)", violations.len());
        }
        Err(e) => return Err(e).with_context(|| format!("loading {shown}")),
    };
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let mut dataset = loaded.dataset.clone();
    if data.no_events {
        dataset = dataset.with_all_events_finished();
    }
    Ok((dataset, loaded))
}

/// `STITCHPLAN_OUT` wins over `--out` so wrapper scripts can redirect whole
/// experiment batches without touching each command line.
fn resolve_out(flag: &Path) -> PathBuf {
    std::env::var_os("STITCHPLAN_OUT").map(PathBuf::from).unwrap_or_else(|| flag.to_path_buf())
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

struct CampaignOutput {
    aggregated: Vec<ObjectivePoint>,
    boundary: BoundaryStats,
}

/// Runs `runs` seeds of one configuration into `dir`: manifest first, then
/// per-run front and progress files, the aggregated front, boundary stats,
/// and (for the single-objective engine) the mean convergence trajectory.
fn campaign(
    dir: &Path,
    template: &RunConfig,
    search: &SearchArgs,
    dataset: &Dataset,
    loaded: &LoadedDataset,
    dataset_path: &Path,
) -> anyhow::Result<CampaignOutput> {
    if search.runs == 0 {
        bail!("--runs must be at least 1");
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let seeds: Vec<u64> = (0..search.runs as u64).map(|i| search.seed + i).collect();
    let mut manifest = RunManifest::begin(
        command_line(),
        dataset_path.display().to_string(),
        loaded.sha256.clone(),
        template.clone(),
        seeds.clone(),
    );
    let manifest_path = dir.join("manifest.json");
    manifest.save(&manifest_path).context("writing manifest")?;

    let mut artifacts = Vec::new();
    let mut fronts = Vec::new();
    let mut trajectories = Vec::new();
    for (i, &seed) in seeds.iter().enumerate() {
        let mut cfg = template.clone();
        cfg.seed = seed;
        let result = run(&cfg, dataset);

        let front_name = format!("front-run{i:02}.csv");
        write_front_csv(dir.join(&front_name), &result.front)?;
        let stats_name = format!("stats-run{i:02}.csv");
        write_stats_csv(dir.join(&stats_name), &result.stats)?;
        artifacts.push(front_name);
        artifacts.push(stats_name);

        let best = &result.front[0];
        println!(
            "  run {i:02} seed {seed}: {} front point(s), lowest f1 ({:.3}, {:.3})",
            result.front.len(),
            best.f1,
            best.f2
        );
        trajectories.push(result.best_f1_trajectory());
        fronts.push(result.front);
    }

    let aggregated = aggregate_pareto(&fronts);
    write_front_csv(dir.join("front.csv"), &aggregated)?;
    artifacts.push("front.csv".into());

    let boundary = boundary_stats(&fronts);
    write_json(&dir.join("boundary.json"), &serde_json::to_value(&boundary)?)?;
    artifacts.push("boundary.json".into());

    if template.algorithm == Algorithm::Jade {
        let mean = mean_trajectory(&trajectories);
        let mut text = String::from("generation,mean_best_f1\n");
        for (g, v) in mean.iter().enumerate() {
            text.push_str(&format!("{g},{v}\n"));
        }
        fs::write(dir.join("trajectory_mean.csv"), text)?;
        artifacts.push("trajectory_mean.csv".into());
    }

    manifest.complete(artifacts);
    manifest.save(&manifest_path).context("finalizing manifest")?;
    Ok(CampaignOutput { aggregated, boundary })
}

fn fmt_stat(mean: f64, std: f64) -> String {
    format!("{mean:.1}±{std:.1}")
}

fn print_boundary(label: &str, b: &BoundaryStats) {
    let cell = |c: &CoordStats| format!("f1 {}, f2 {}", fmt_stat(c.mean_f1, c.std_f1), fmt_stat(c.mean_f2, c.std_f2));
    println!("{label}: boundary point 1: {}; boundary point 2: {}", cell(&b.min_f1_point), cell(&b.min_f2_point));
}

// ---- validate ----

pub fn validate(args: ValidateArgs) -> anyhow::Result<()> {
    let (dataset, loaded) = load(&args.data)?;
    println!("dataset {} ({})", loaded.name, args.data.dataset.display());
    println!("  sha256 {}", loaded.sha256);
    println!(
        "  s_day {}, p_day {}; {} product types, {} lines, {} orders (genome dimension {})",
        dataset.s_day,
        dataset.p_day,
        dataset.product_types.len(),
        dataset.lines.len(),
        dataset.orders.len(),
        4 * dataset.orders.len(),
    );
    let starts = stitchplan::objectives::conservative_starts(&dataset);
    println!("  order  type     quantity  due  earliest safe start");
    for o in &dataset.orders {
        println!(
            "  O{:<5} {:<8} {:>8}  {:>3}  {:>3}",
            o.id,
            dataset.product_types[o.product_type - 1].name,
            o.quantity,
            o.due_day,
            starts.of(o.id),
        );
    }
    println!("ok: dataset is valid");
    Ok(())
}

// ---- optimize ----

pub fn optimize(args: OptimizeArgs) -> anyhow::Result<()> {
    let (dataset, loaded) = load(&args.data)?;
    let (&beta, &h_samples) = match (&args.beta[..], &args.h[..]) {
        ([b], [h]) => (b, h),
        _ => bail!("optimize takes a single --beta and --H; use sweep for value lists"),
    };
    let mut cfg = RunConfig::new(args.algo, args.search.seed);
    cfg.np = args.search.np;
    cfg.xi = args.search.xi;
    cfg.g_max = args.search.gmax;
    cfg.h_samples = h_samples;
    cfg.beta = beta;
    cfg.s_day = dataset.s_day;

    let out = resolve_out(&args.search.out);
    println!(
        "optimizing {} with {} ({} runs, np {}, {} generations, beta {beta}, H {h_samples})",
        loaded.name,
        args.algo,
        args.search.runs,
        cfg.np,
        cfg.generations(4 * dataset.orders.len()),
    );
    let output = campaign(&out, &cfg, &args.search, &dataset, &loaded, &args.data.dataset)?;
    println!("aggregated front: {} point(s)", output.aggregated.len());
    print_boundary(&args.algo.to_string(), &output.boundary);
    println!("artifacts in {}", out.display());
    Ok(())
}

// ---- decode ----

fn print_line_listing(dataset: &Dataset, schedule: &Schedule) {
    for line in &dataset.lines {
        // `sub_orders` is already in per-line processing order.
        let subs: Vec<_> = schedule.sub_orders.iter().filter(|s| s.line == line.id).collect();
        let listing = subs
            .iter()
            .map(|s| format!("O{}({})", s.order, s.quantity))
            .collect::<Vec<_>>()
            .join(", ");
        println!("  line {}: {}", line.id, if listing.is_empty() { "idle" } else { &listing });
    }
}

pub fn decode(args: DecodeArgs) -> anyhow::Result<()> {
    let (dataset, loaded) = load(&args.data)?;
    let text = fs::read_to_string(&args.genome)
        .with_context(|| format!("reading {}", args.genome.display()))?;
    let values: Vec<f64> = serde_json::from_str(&text)
        .with_context(|| format!("{} must be a JSON array of numbers", args.genome.display()))?;
    let dim = 4 * dataset.orders.len();
    if values.len() != dim {
        bail!("genome has {} value(s) but the dataset needs {dim} (4 per order)", values.len());
    }
    let genome = Genome::new(values);

    let out = resolve_out(&args.out);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut cfg = RunConfig::new(Algorithm::Nsjade, args.seed);
    cfg.h_samples = args.h;
    cfg.beta = args.beta;
    cfg.s_day = dataset.s_day;
    let mut manifest = RunManifest::begin(
        command_line(),
        args.data.dataset.display().to_string(),
        loaded.sha256.clone(),
        cfg,
        vec![args.seed],
    );
    let manifest_path = out.join("manifest.json");
    manifest.save(&manifest_path)?;

    let plan = decode_genome(&genome, &dataset);
    let schedule = simulate(&plan, &dataset, &mut ZeroNoise)
        .expect("validated dataset and repaired plan simulate");
    println!("schedule for {} ({} sub-orders):", loaded.name, schedule.sub_orders.len());
    print_line_listing(&dataset, &schedule);

    let point = evaluate_deterministic(&genome, &dataset).expect("decoded genome evaluates");
    println!("objectives: tardiness f1 = {}, clashes f2 = {}", point.f1, point.f2);
    if args.beta > 0.0 {
        let robust = robust_objectives(&genome, &dataset, args.h, args.beta, args.seed)?;
        println!(
            "robust (H {}, beta {}, seed {}): f1_eff = {}, f2_eff = {}",
            args.h, args.beta, args.seed, robust.f1, robust.f2
        );
    }

    write_gantt_csv(out.join("gantt.csv"), &schedule)?;
    write_json(&out.join("schedule.json"), &schedule_json(&schedule))?;
    manifest.complete(vec!["gantt.csv".into(), "schedule.json".into()]);
    manifest.save(&manifest_path)?;
    println!("artifacts in {}", out.display());
    Ok(())
}

// ---- sweep ----

pub fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let (dataset, loaded) = load(&args.data)?;
    if args.beta.is_empty() || args.h.is_empty() {
        bail!("sweep needs at least one --beta and one --H value");
    }
    let out = resolve_out(&args.search.out);
    let mut records = Vec::new();
    for &beta in &args.beta {
        for &h_samples in &args.h {
            let mut cfg = RunConfig::new(args.algo, args.search.seed);
            cfg.np = args.search.np;
            cfg.xi = args.search.xi;
            cfg.g_max = args.search.gmax;
            cfg.h_samples = h_samples;
            cfg.beta = beta;
            cfg.s_day = dataset.s_day;

            let sub = format!("b{beta}-h{h_samples}");
            println!("sweep combination beta {beta}, H {h_samples} -> {sub}/");
            let output =
                campaign(&out.join(&sub), &cfg, &args.search, &dataset, &loaded, &args.data.dataset)?;
            print_boundary(&sub, &output.boundary);
            records.push(serde_json::json!({
                "beta": beta,
                "h_samples": h_samples,
                "s_day": dataset.s_day,
                "dir": sub,
                "front_points": output.aggregated.len(),
                "boundary": output.boundary,
            }));
        }
    }
    write_json(&out.join("sweep.json"), &serde_json::json!({ "combinations": records }))?;
    println!("artifacts in {}", out.display());
    Ok(())
}

// ---- compare ----

pub fn compare(args: CompareArgs) -> anyhow::Result<()> {
    let (dataset, loaded) = load(&args.data)?;
    if args.algo.is_empty() {
        bail!("compare needs at least one --algo value");
    }
    let out = resolve_out(&args.search.out);
    let mut rows = Vec::new();
    for &algorithm in &args.algo {
        let mut cfg = RunConfig::new(algorithm, args.search.seed);
        cfg.np = args.search.np;
        cfg.xi = args.search.xi;
        cfg.g_max = args.search.gmax;
        cfg.h_samples = args.h;
        cfg.beta = args.beta;
        cfg.s_day = dataset.s_day;

        println!("comparing {algorithm} over {} runs", args.search.runs);
        let output = campaign(
            &out.join(algorithm.to_string()),
            &cfg,
            &args.search,
            &dataset,
            &loaded,
            &args.data.dataset,
        )?;
        rows.push((algorithm, output.boundary));
    }

    println!("s_day = {} ({} runs each)", dataset.s_day, args.search.runs);
    println!("{:<8} | {:^27} | {:^27}", "", "boundary point 1", "boundary point 2");
    println!("{:<8} | {:^13}{:^14} | {:^13}{:^14}", "", "f1", "f2", "f1", "f2");
    for (algorithm, b) in &rows {
        println!(
            "{:<8} | {:^13}{:^14} | {:^13}{:^14}",
            algorithm.to_string(),
            fmt_stat(b.min_f1_point.mean_f1, b.min_f1_point.std_f1),
            fmt_stat(b.min_f1_point.mean_f2, b.min_f1_point.std_f2),
            fmt_stat(b.min_f2_point.mean_f1, b.min_f2_point.std_f1),
            fmt_stat(b.min_f2_point.mean_f2, b.min_f2_point.std_f2),
        );
    }
    let comparison: Vec<serde_json::Value> = rows
        .iter()
        .map(|(algorithm, boundary)| {
            serde_json::json!({
                "algorithm": algorithm.to_string(),
                "dir": algorithm.to_string(),
                "boundary": boundary,
            })
        })
        .collect();
    write_json(
        &out.join("compare.json"),
        &serde_json::json!({
            "s_day": dataset.s_day,
            "runs": args.search.runs,
            "beta": args.beta,
            "h_samples": args.h,
            "algorithms": comparison,
        }),
    )?;
    println!("artifacts in {}", out.display());
    Ok(())
}
