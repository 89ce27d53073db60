//! `cv2i` command line: runs, sweeps and offline analysis.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure. A failed
//! command removes whatever it had written.

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use crate::analysis::{
    analyze_run, cdf_rows, summarize, threshold_sweep, AnalysisParams, RunAnalysis, RunInput, Summary, SweepCell,
};
use crate::config::{ConfigError, RunConfig};
use crate::detector::CollisionDetector;
use crate::entity::PairKind;
use crate::mobility::records::{read_csv, write_csv_with_header, COLLISION_HEADER, TRAJECTORY_HEADER};
use crate::mobility::{find_knee, generate_arrivals, stability_sweep, CollisionRecord, Scenario, TrajectoryRecord, World};
use crate::netmodel::{run_coupled, AlertRecord, LatencyProfile, LoopOptions, ReactionProfile, RunLogs, ALERT_HEADER};
use crate::time::SimTime;

#[derive(Debug, Parser)]
#[command(name = "cv2i", version, about = "Server-side C-V2I collision detection simulator")]
pub struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seeds to run (repeat or comma-separate); replaces the config list.
    #[arg(long, global = true, value_delimiter = ',')]
    pub seed: Vec<u64>,
    #[arg(long, global = true)]
    pub duration: Option<f64>,
    /// Server placement: metro or cloud.
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// hd (human driver) or av (automated vehicle).
    #[arg(long, global = true)]
    pub reaction: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Log CAMs but never run the detector.
    #[arg(long, global = true)]
    pub no_alerts: bool,
    /// Alerted entities brake in the simulation.
    #[arg(long, global = true)]
    pub closed_loop: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupled runs, one per seed, with logs and summaries.
    Run,
    /// Detector threshold grid replayed over recorded trajectories.
    SweepThresholds {
        /// Directory of a previous `run`; fresh open-loop runs otherwise.
        #[arg(long)]
        from: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        t2c: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        s2c: Vec<f64>,
    },
    /// Mean vehicle count over a grid of arrival rates.
    SweepArrivals {
        #[arg(long, value_delimiter = ',')]
        lambda_v: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        lambda_p: Vec<f64>,
        /// Upper end of the rates used to fit the linear trend.
        #[arg(long, default_value_t = 0.3)]
        fit_max: f64,
        /// Relative departure from the trend that marks the knee.
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
    },
    /// Same seeds under Metro/Cloud placement and HD/AV reaction.
    ComparePlacement,
    /// Re-classify the logs of a previous `run`.
    Analyze {
        #[arg(long)]
        from: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Config file plus command-line overrides, validated.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if !cli.seed.is_empty() {
        cfg.seeds = cli.seed.clone();
    }
    if let Some(d) = cli.duration {
        cfg.duration = d;
    }
    if let Some(p) = &cli.profile {
        cfg.latency = p.clone();
    }
    if let Some(r) = &cli.reaction {
        cfg.reaction = r.clone();
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if cli.no_alerts {
        cfg.alerts_enabled = false;
    }
    if cli.closed_loop {
        cfg.closed_loop = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    let scenario = cfg.load_scenario()?;
    let mut out = Outputs::new(&cfg.out)?;
    match &cli.command {
        Command::Run => cmd_run(&cfg, &scenario, &mut out)?,
        Command::SweepThresholds { from, t2c, s2c } => {
            let t2c = if t2c.is_empty() { &cfg.sweep.t2c } else { t2c };
            let s2c = if s2c.is_empty() { &cfg.sweep.s2c } else { s2c };
            cmd_sweep_thresholds(&cfg, &scenario, from.as_deref(), t2c, s2c, &mut out)?
        }
        Command::SweepArrivals { lambda_v, lambda_p, fit_max, tolerance } => {
            let lv = if lambda_v.is_empty() { &cfg.sweep.lambda_v } else { lambda_v };
            let lp = if lambda_p.is_empty() { &cfg.sweep.lambda_p } else { lambda_p };
            cmd_sweep_arrivals(&cfg, &scenario, lv, lp, *fit_max, *tolerance, &mut out)?
        }
        Command::ComparePlacement => cmd_compare_placement(&cfg, &scenario, &mut out)?,
        Command::Analyze { from } => cmd_analyze(&cfg, &scenario, from, &mut out)?,
    }
    out.commit();
    Ok(())
}

/// Tracks what a command creates so that a failure leaves nothing behind.
struct Outputs {
    root: PathBuf,
    root_created: bool,
    dirs: Vec<PathBuf>,
    files: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn new(root: &Path) -> Result<Self, CliError> {
        let root_created = !root.exists();
        fs::create_dir_all(root).map_err(|e| runtime(format!("cannot create {}: {e}", root.display())))?;
        Ok(Outputs { root: root.to_path_buf(), root_created, dirs: Vec::new(), files: Vec::new(), committed: false })
    }

    fn dir(&mut self, name: &str) -> Result<PathBuf, CliError> {
        let p = self.root.join(name);
        if !p.exists() {
            fs::create_dir_all(&p).map_err(|e| runtime(format!("cannot create {}: {e}", p.display())))?;
            self.dirs.push(p.clone());
        }
        Ok(p)
    }

    fn create(&mut self, path: PathBuf) -> Result<BufWriter<File>, CliError> {
        let f = File::create(&path).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(path);
        Ok(BufWriter::new(f))
    }

    fn csv<T: Serialize>(&mut self, path: PathBuf, rows: &[T], header: &[&str]) -> Result<(), CliError> {
        let w = self.create(path)?;
        write_csv_with_header(rows, header, w).map_err(runtime)
    }

    fn json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<(), CliError> {
        let w = self.create(path)?;
        serde_json::to_writer_pretty(w, value).map_err(runtime)
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir_all(d);
        }
        if self.root_created {
            let _ = fs::remove_dir_all(&self.root);
        }
    }
}

fn run_one(scenario: &Scenario, cfg: &RunConfig, opts: &LoopOptions, seed: u64) -> Result<RunLogs, CliError> {
    let world = World::new(scenario.clone(), generate_arrivals(&cfg.arrivals(seed), cfg.duration)).map_err(runtime)?;
    let detector = CollisionDetector::new(cfg.detector).map_err(runtime)?;
    run_coupled(world, detector, opts, SimTime::from_secs(cfg.duration)).map_err(runtime)
}

fn run_batch(
    scenario: &Scenario,
    cfg: &RunConfig,
    opts: &LoopOptions,
) -> Result<Vec<(u64, RunLogs, RunAnalysis)>, CliError> {
    let params = AnalysisParams::new(cfg.detector, opts.reaction, scenario);
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let logs = run_one(scenario, cfg, opts, seed)?;
            let a = analyze_run(&logs.trajectories, &logs.collisions, &logs.alerts, &params, scenario)
                .map_err(runtime)?;
            Ok((seed, logs, a))
        })
        .collect()
}

const CLASSIFIED_HEADER: &[&str] = &["time", "a", "b", "kind", "outcome", "t_fa", "t_d", "t_h", "t_a", "t_b"];

fn write_report(
    out: &mut Outputs,
    dir: &Path,
    summary: &Summary,
    runs: &[RunAnalysis],
) -> Result<(), CliError> {
    out.json(dir.join("summary.json"), summary)?;
    out.csv(dir.join("outcomes.csv"), &summary.outcome_rows(), &["label", "kind", "outcome", "count", "pct"])?;
    out.csv(dir.join("alert_classes.csv"), &summary.alert_rows(), &["label", "kind", "class", "count", "pct"])?;
    out.csv(dir.join("fp_cdf.csv"), &cdf_rows(&summary.label, runs), &["label", "kind", "distance", "fraction"])?;
    let classified: Vec<_> = runs.iter().flat_map(|r| r.collisions.iter().copied()).collect();
    out.csv(dir.join("collisions_classified.csv"), &classified, CLASSIFIED_HEADER)
}

fn print_summary(s: &Summary) {
    println!("{} ({} runs, {} alerts)", s.label, s.runs, s.total_alerts);
    for k in &s.kinds {
        let p = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.1}%"));
        println!(
            "  {}: {} collisions, in time {}, too late {}, not detected {}; {} alerts, {} false positives ({})",
            k.kind,
            k.collisions,
            k.detected_in_time,
            k.detected_too_late,
            k.not_detected,
            k.alerts,
            k.false_positives,
            p(k.pct_false_positive),
        );
    }
}

fn cmd_run(cfg: &RunConfig, scenario: &Scenario, out: &mut Outputs) -> Result<(), CliError> {
    let opts = cfg.loop_options()?;
    let tag = format!("{}-{}", cfg.latency.to_ascii_lowercase(), cfg.reaction.to_ascii_lowercase());
    let results = run_batch(scenario, cfg, &opts)?;
    let mut analyses = Vec::new();
    for (seed, logs, a) in results {
        let dir = out.dir(&format!("seed{seed}-{tag}"))?;
        out.csv(dir.join("trajectories.csv"), &logs.trajectories, TRAJECTORY_HEADER)?;
        out.csv(dir.join("collisions.csv"), &logs.collisions, COLLISION_HEADER)?;
        out.csv(dir.join("alerts.csv"), &logs.alerts, ALERT_HEADER)?;
        let s = summarize(&format!("seed{seed}-{tag}"), std::slice::from_ref(&a), opts.latency, opts.reaction);
        write_report(out, &dir, &s, std::slice::from_ref(&a))?;
        analyses.push(a);
    }
    let summary = summarize(&tag, &analyses, opts.latency, opts.reaction);
    let root = out.root.clone();
    write_report(out, &root, &summary, &analyses)?;
    print_summary(&summary);
    Ok(())
}

/// Log directories of a previous run, sorted by name.
fn run_dirs(from: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(from).map_err(|e| runtime(format!("cannot read {}: {e}", from.display())))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("trajectories.csv").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(runtime(format!("no run logs under {}", from.display())));
    }
    Ok(dirs)
}

fn read_table<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let f = File::open(path).map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))?;
    read_csv(BufReader::new(f)).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn cmd_sweep_thresholds(
    cfg: &RunConfig,
    scenario: &Scenario,
    from: Option<&Path>,
    t2c: &[f64],
    s2c: &[f64],
    out: &mut Outputs,
) -> Result<(), CliError> {
    let opts = cfg.loop_options()?;
    let end = SimTime::from_secs(cfg.duration);
    let runs: Vec<RunInput> = match from {
        Some(dir) => run_dirs(dir)?
            .iter()
            .map(|d| {
                Ok(RunInput {
                    trajectories: read_table::<TrajectoryRecord>(&d.join("trajectories.csv"))?,
                    collisions: read_table::<CollisionRecord>(&d.join("collisions.csv"))?,
                    duration: end,
                })
            })
            .collect::<Result<_, CliError>>()?,
        None => {
            let open = LoopOptions { alerts_enabled: false, closed_loop: false, ..opts };
            cfg.seeds
                .par_iter()
                .map(|&seed| {
                    let logs = run_one(scenario, cfg, &open, seed)?;
                    Ok(RunInput { trajectories: logs.trajectories, collisions: logs.collisions, duration: end })
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    let base = AnalysisParams::new(cfg.detector, opts.reaction, scenario);
    let cells = threshold_sweep(&runs, t2c, s2c, &base, &opts.latency).map_err(runtime)?;
    out.csv(
        out.root.join("threshold_cells.csv"),
        &cells,
        &[
            "kind", "t2c", "s2c", "collisions", "not_detected", "too_late", "undetected_or_late_pct", "alerts",
            "false_positives", "fp_pct", "alerted_pairs",
        ],
    )?;
    for kind in PairKind::ALL {
        let of_kind: Vec<&SweepCell> = cells.iter().filter(|c| c.kind == kind).collect();
        for (metric, get) in [
            ("undetected_or_late_pct", (|c: &SweepCell| c.undetected_or_late_pct) as fn(&SweepCell) -> Option<f64>),
            ("fp_pct", |c: &SweepCell| c.fp_pct),
        ] {
            let path = out.root.join(format!("threshold_{}_{metric}.csv", kind.label().to_ascii_lowercase()));
            let w = out.create(path)?;
            write_matrix(w, &of_kind, t2c, s2c, get).map_err(runtime)?;
        }
    }
    println!("{} cells over {} runs written to {}", cells.len(), runs.len(), out.root.display());
    Ok(())
}

/// Rows are `t2c` values, columns `s2c` values; empty where undefined.
fn write_matrix<W: std::io::Write>(
    w: W,
    cells: &[&SweepCell],
    t2c: &[f64],
    s2c: &[f64],
    get: fn(&SweepCell) -> Option<f64>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    let mut header = vec!["t2c\\s2c".to_string()];
    header.extend(s2c.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for &t in t2c {
        let mut row = vec![t.to_string()];
        for &s in s2c {
            let v = cells.iter().find(|c| c.t2c == t && c.s2c == s).and_then(|c| get(c));
            row.push(v.map_or(String::new(), |v| format!("{v:.3}")));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct KneeRow {
    lambda_p: f64,
    knee_lambda_v: Option<f64>,
}

fn cmd_sweep_arrivals(
    cfg: &RunConfig,
    scenario: &Scenario,
    lambda_v: &[f64],
    lambda_p: &[f64],
    fit_max: f64,
    tolerance: f64,
    out: &mut Outputs,
) -> Result<(), CliError> {
    let points = stability_sweep(scenario, lambda_v, lambda_p, cfg.duration, &cfg.seeds).map_err(runtime)?;
    out.csv(
        out.root.join("stability.csv"),
        &points,
        &["lambda_v", "lambda_p", "mean_vehicles", "ci95", "seeds"],
    )?;
    let knees: Vec<KneeRow> = lambda_p
        .iter()
        .map(|&lp| {
            let pts: Vec<_> = points.iter().filter(|p| p.lambda_p == lp).copied().collect();
            KneeRow { lambda_p: lp, knee_lambda_v: find_knee(&pts, fit_max, tolerance) }
        })
        .collect();
    out.csv(out.root.join("knees.csv"), &knees, &["lambda_p", "knee_lambda_v"])?;
    for k in &knees {
        match k.knee_lambda_v {
            Some(v) => println!("lambda_p={}: knee at lambda_v={v}", k.lambda_p),
            None => println!("lambda_p={}: no knee inside the grid", k.lambda_p),
        }
    }
    Ok(())
}

pub const PLACEMENTS: [(&str, LatencyProfile, ReactionProfile); 4] = [
    ("Metro-HD", LatencyProfile::METRO, ReactionProfile::HUMAN_DRIVER),
    ("Metro-AV", LatencyProfile::METRO, ReactionProfile::AUTOMATED),
    ("Cloud-HD", LatencyProfile::CLOUD, ReactionProfile::HUMAN_DRIVER),
    ("Cloud-AV", LatencyProfile::CLOUD, ReactionProfile::AUTOMATED),
];

fn cmd_compare_placement(cfg: &RunConfig, scenario: &Scenario, out: &mut Outputs) -> Result<(), CliError> {
    let base = cfg.loop_options()?;
    let mut summaries = Vec::new();
    let mut mean_td = Vec::new();
    for (label, latency, reaction) in PLACEMENTS {
        let opts = LoopOptions { latency, reaction, ..base };
        let runs: Vec<RunAnalysis> = run_batch(scenario, cfg, &opts)?.into_iter().map(|r| r.2).collect();
        let delays: Vec<f64> =
            runs.iter().flat_map(|r| r.alerts.iter()).map(|a| a.delivery_delay().as_secs()).collect();
        mean_td.push((!delays.is_empty()).then(|| delays.iter().sum::<f64>() / delays.len() as f64));
        let s = summarize(label, &runs, latency, reaction);
        let dir = out.dir(label)?;
        write_report(out, &dir, &s, &runs)?;
        print_summary(&s);
        summaries.push(s);
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let fmt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.3}"));
    for kind in PairKind::ALL {
        let metrics: [(&str, fn(&crate::analysis::KindSummary) -> String); 8] = [
            ("collisions", |k| k.collisions.to_string()),
            ("detected_in_time", |k| k.detected_in_time.to_string()),
            ("detected_too_late", |k| k.detected_too_late.to_string()),
            ("not_detected", |k| k.not_detected.to_string()),
            ("alerts", |k| k.alerts.to_string()),
            ("false_positives", |k| k.false_positives.to_string()),
            ("pct_false_positive", |k| k.pct_false_positive.map_or(String::new(), |v| format!("{v:.3}"))),
            ("pct_fp_pairs_within_5m", |k| k.pct_fp_pairs_within_5m.map_or(String::new(), |v| format!("{v:.3}"))),
        ];
        for (name, get) in metrics {
            let mut row = vec![format!("{}.{name}", kind.label())];
            row.extend(summaries.iter().map(|s| get(s.kind(kind))));
            rows.push(row);
        }
    }
    let mut row = vec!["mean_t_d_s".to_string()];
    row.extend(mean_td.iter().map(|v| fmt(*v)));
    rows.push(row);

    let w = out.create(out.root.join("placement.csv"))?;
    let mut w = csv::Writer::from_writer(w);
    let mut header = vec!["metric"];
    header.extend(PLACEMENTS.iter().map(|p| p.0));
    w.write_record(&header).map_err(runtime)?;
    for r in &rows {
        w.write_record(r).map_err(runtime)?;
    }
    w.flush().map_err(runtime)?;
    Ok(())
}

fn cmd_analyze(cfg: &RunConfig, scenario: &Scenario, from: &Path, out: &mut Outputs) -> Result<(), CliError> {
    let reaction = cfg.reaction_profile()?;
    let latency = cfg.latency_profile()?;
    let params = AnalysisParams::new(cfg.detector, reaction, scenario);
    let runs: Vec<RunAnalysis> = run_dirs(from)?
        .iter()
        .map(|d| {
            let alerts_path = d.join("alerts.csv");
            if !alerts_path.is_file() {
                return Err(runtime(format!("missing {}", alerts_path.display())));
            }
            let traj: Vec<TrajectoryRecord> = read_table(&d.join("trajectories.csv"))?;
            let cols: Vec<CollisionRecord> = read_table(&d.join("collisions.csv"))?;
            let alerts: Vec<AlertRecord> = read_table(&alerts_path)?;
            analyze_run(&traj, &cols, &alerts, &params, scenario).map_err(runtime)
        })
        .collect::<Result<_, _>>()?;
    let summary = summarize("analysis", &runs, latency, reaction);
    let root = out.root.clone();
    write_report(out, &root, &summary, &runs)?;
    print_summary(&summary);
    Ok(())
}
