//! The `awe` command line.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 malformed input file,
//! 5 invalid configuration, 6 computation error, 7 a check failed
//! (oracle mismatch, waypoint not reached, or some batch items failed).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::comparison::{compare_methods, Method};
use crate::error::Error;
use crate::io::{
    emit_plot_data, load_trajectory, load_waypoints, save_relabeled, save_trajectory,
    save_waypoints, trajectory_paths, Provenance, TaskDefaults,
};
use crate::reconstruction::{segment_losses, MetricConfig};
use crate::relabel::relabel_trajectory;
use crate::replay::{replay_waypoints, FollowerConfig};
use crate::solver::{extract_waypoints_bruteforce, extract_waypoints_dp, sweep_eta, ErrorBudget};
use crate::state_space::StateSpace;
use crate::synthetic::SegmentCorpus;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_INPUT: u8 = 4;
pub const EXIT_CONFIG: u8 = 5;
pub const EXIT_COMPUTE: u8 = 6;
pub const EXIT_CHECK: u8 = 7;

#[derive(Debug, Parser)]
#[command(name = "awe", version, about = "Waypoint extraction for robot demonstrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract waypoints from one trajectory file.
    Extract(ExtractArgs),
    /// Extract and relabel every trajectory in a directory.
    Relabel(RelabelArgs),
    /// Print waypoint counts, ratios, per-segment losses, and timings.
    Stats(StatsArgs),
    /// Compare the optimal selector with heuristics at matched counts.
    Compare(CompareArgs),
    /// Replay a waypoint file with the kinematic follower.
    ReplayCheck(ReplayArgs),
    /// Extract at several budgets and write plot data.
    Sweep(SweepArgs),
    /// Cross-check the solver against exhaustive search (at most 20 frames).
    Oracle(OracleArgs),
    /// Write a seeded synthetic corpus of piecewise-linear demonstrations.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Error budget.
    #[arg(long, conflicts_with = "task", required_unless_present = "task")]
    eta: Option<f64>,
    /// Take the budget from the task defaults table.
    #[arg(long)]
    task: Option<String>,
    /// JSON file with metric weights.
    #[arg(long)]
    metric_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlainBudgetArgs {
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    metric_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    output: PathBuf,
    /// Leave the creation time out of the provenance block.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct RelabelArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    budget: PlainBudgetArgs,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// A trajectory file or a directory of them.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    budget: PlainBudgetArgs,
    /// Acceptable waypoint ratio band as `LOW,HIGH` denominators (1:LOW to 1:HIGH).
    #[arg(long, default_value = "5,15", value_parser = parse_band)]
    ratio_band: (f64, f64),
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    budget: PlainBudgetArgs,
    #[arg(long, default_value = "awe,zero-vel,fixed", value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 1)]
    control_multiplier: u32,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    waypoints: PathBuf,
    #[arg(long, default_value_t = 1)]
    control_multiplier: u32,
    /// Step per tick; defaults to the demonstration's largest frame-to-frame move.
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    reach_tolerance: Option<f64>,
    #[arg(long)]
    tick_limit: Option<usize>,
    /// Only advance once a waypoint is reached.
    #[arg(long)]
    blocking: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    etas: Vec<f64>,
    #[arg(long)]
    plot_out: PathBuf,
    #[arg(long)]
    metric_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    budget: PlainBudgetArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "ee", value_parser = parse_state_space)]
    state_space: StateSpace,
    #[arg(long, default_value_t = 0.001)]
    noise: f64,
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LOW,HIGH")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > 0.0 && hi >= lo {
        Ok((lo, hi))
    } else {
        Err("need 0 < LOW <= HIGH".into())
    }
}

fn parse_state_space(s: &str) -> Result<StateSpace, String> {
    match s {
        "ee" => Ok(StateSpace::Ee),
        "joint" => Ok(StateSpace::Joint),
        other => Err(format!("unknown state space `{other}`")),
    }
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } => EXIT_IO,
            Error::Parse { .. } | Error::Schema { .. } | Error::Validation { .. } => EXIT_INPUT,
            Error::InvalidConfig(_) => EXIT_CONFIG,
            _ => EXIT_COMPUTE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

fn config_failure(message: String) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message,
    }
}

type CliResult = Result<u8, Failure>;

fn load_metric(path: Option<&Path>) -> Result<MetricConfig, Failure> {
    let Some(path) = path else {
        return Ok(MetricConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let metric: MetricConfig = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    metric.validate()?;
    Ok(metric)
}

fn resolve_budget(args: &BudgetArgs) -> Result<ErrorBudget, Failure> {
    let metric = load_metric(args.metric_config.as_deref())?;
    let eta = match (args.eta, &args.task) {
        (Some(eta), None) => eta,
        (None, Some(task)) => TaskDefaults::from_env()?
            .eta(task)
            .ok_or_else(|| config_failure(format!("unknown task `{task}`")))?,
        _ => return Err(config_failure("give exactly one of --eta and --task".into())),
    };
    Ok(ErrorBudget::new(eta, metric)?)
}

fn plain_budget(args: &PlainBudgetArgs) -> Result<ErrorBudget, Failure> {
    Ok(ErrorBudget::new(args.eta, load_metric(args.metric_config.as_deref())?)?)
}

fn fmt_ratio(ratio: f64) -> String {
    format!("1:{:.1}", 1.0 / ratio)
}

fn extract(args: &ExtractArgs, out: &mut dyn Write) -> CliResult {
    let budget = resolve_budget(&args.budget)?;
    let traj = load_trajectory(&args.input)?;
    let (extraction, stats) = extract_waypoints_dp(&traj, &budget)?;
    let mut provenance = Provenance::new(traj.name(), budget.eta(), budget.metric().clone());
    if !args.no_timestamp {
        provenance = provenance.stamped();
    }
    save_waypoints(&args.output, &extraction, &provenance)?;
    writeln!(
        out,
        "{}: eta={} waypoints={} frames={} ratio={} segment_loss={:.6e} global_loss={:.6e} wall_time_s={:.6}",
        traj.name(),
        budget.eta(),
        extraction.waypoints.len(),
        traj.len(),
        fmt_ratio(extraction.waypoints.ratio()),
        extraction.segment_loss,
        extraction.global_loss,
        stats.wall_time.as_secs_f64(),
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct ManifestEntry {
    source: String,
    output: String,
    frames: usize,
    waypoints: usize,
}

#[derive(Serialize)]
struct Manifest {
    provenance: Provenance,
    datasets: Vec<ManifestEntry>,
    failures: Vec<(String, String)>,
    mean_waypoints: f64,
    mean_ratio: f64,
}

fn relabel(args: &RelabelArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let budget = plain_budget(&args.budget)?;
    let paths = trajectory_paths(&args.input)?;
    if paths.is_empty() {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("no trajectory files in {}", args.input.display()),
        });
    }
    fs::create_dir_all(&args.output).map_err(|e| Error::io(&args.output, e))?;
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    let (mut wp_sum, mut ratio_sum) = (0usize, 0.0);
    for path in &paths {
        let result = (|| {
            let traj = load_trajectory(path)?;
            let (extraction, _) = extract_waypoints_dp(&traj, &budget)?;
            let ds = relabel_trajectory(&traj, &extraction.waypoints, budget.eta())?;
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            let target = args.output.join(format!("{stem}.jsonl"));
            save_relabeled(&target, &ds)?;
            Ok::<_, Error>((traj, extraction, ds, target))
        })();
        match result {
            Ok((traj, extraction, ds, target)) => {
                wp_sum += extraction.waypoints.len();
                ratio_sum += extraction.waypoints.ratio();
                writeln!(
                    out,
                    "{}: waypoints={} frames={} ratio={} -> {}",
                    traj.name(),
                    extraction.waypoints.len(),
                    traj.len(),
                    fmt_ratio(extraction.waypoints.ratio()),
                    target.display()
                )?;
                entries.push(ManifestEntry {
                    source: traj.name().to_string(),
                    output: target.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                    frames: ds.len(),
                    waypoints: extraction.waypoints.len(),
                });
            }
            Err(e) => {
                writeln!(err, "failed: {e}")?;
                failures.push((path.display().to_string(), e.to_string()));
            }
        }
    }
    let n = entries.len().max(1) as f64;
    let manifest = Manifest {
        provenance: Provenance::new(args.input.display().to_string(), budget.eta(), budget.metric().clone()),
        mean_waypoints: wp_sum as f64 / n,
        mean_ratio: ratio_sum / n,
        datasets: entries,
        failures,
    };
    writeln!(
        out,
        "corpus: trajectories={} failed={} mean_waypoints={:.2} mean_ratio={}",
        manifest.datasets.len(),
        manifest.failures.len(),
        manifest.mean_waypoints,
        if manifest.datasets.is_empty() { "n/a".into() } else { fmt_ratio(manifest.mean_ratio) },
    )?;
    let manifest_path = args.output.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(if manifest.failures.is_empty() { 0 } else { EXIT_CHECK })
}

fn stats(args: &StatsArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let budget = plain_budget(&args.budget)?;
    let (lo, hi) = args.ratio_band;
    let paths = trajectory_paths(&args.input)?;
    let (mut ratio_sum, mut time_sum, mut count) = (0.0, 0.0, 0usize);
    for path in &paths {
        let traj = load_trajectory(path)?;
        let (extraction, solve) = extract_waypoints_dp(&traj, &budget)?;
        let ratio = extraction.waypoints.ratio();
        let seconds = solve.wall_time.as_secs_f64();
        writeln!(
            out,
            "{}: frames={} waypoints={} ratio={} segment_loss={:.6e} global_loss={:.6e} wall_time_s={:.6}",
            traj.name(),
            traj.len(),
            extraction.waypoints.len(),
            fmt_ratio(ratio),
            extraction.segment_loss,
            extraction.global_loss,
            seconds
        )?;
        let losses = segment_losses(&traj, extraction.waypoints.indices(), budget.metric())?;
        let rendered: Vec<String> = losses.iter().map(|l| format!("{l:.3e}")).collect();
        writeln!(out, "  segment_losses=[{}]", rendered.join(", "))?;
        if ratio > 1.0 / lo || ratio < 1.0 / hi {
            writeln!(
                err,
                "warning: {} ratio {} outside 1:{lo}..1:{hi}",
                traj.name(),
                fmt_ratio(ratio)
            )?;
        }
        ratio_sum += ratio;
        time_sum += seconds;
        count += 1;
    }
    if count == 0 {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("no trajectory files in {}", args.input.display()),
        });
    }
    writeln!(
        out,
        "summary: trajectories={count} mean_ratio={} mean_wall_time_s={:.6}",
        fmt_ratio(ratio_sum / count as f64),
        time_sum / count as f64
    )?;
    Ok(0)
}

fn compare(args: &CompareArgs, out: &mut dyn Write) -> CliResult {
    let budget = plain_budget(&args.budget)?;
    let paths = trajectory_paths(&args.input)?;
    writeln!(
        out,
        "{:<24} {:<10} {:>5} {:>12} {:>12} {:>12} {:>7}",
        "trajectory", "method", "count", "segment_loss", "global_loss", "replay_dev", "reached"
    )?;
    // per method: (trajectories where awe is no worse on global loss, on replay deviation)
    let mut wins: Vec<(Method, usize, usize)> = Vec::new();
    let mut total = 0usize;
    for path in &paths {
        let traj = load_trajectory(path)?;
        let scores = compare_methods(&traj, &budget, &args.methods, args.control_multiplier, None)?;
        let awe = scores.iter().find(|s| s.method == Method::Awe);
        for s in &scores {
            writeln!(
                out,
                "{:<24} {:<10} {:>5}{} {:>12.4e} {:>12.4e} {:>12.4e} {:>7}",
                traj.name(),
                s.method.to_string(),
                s.waypoints.len(),
                if s.exact_count { " " } else { "~" },
                s.segment_loss,
                s.global_loss,
                s.replay_deviation,
                s.replay_reached_final
            )?;
            if let (Some(a), false) = (awe, s.method == Method::Awe) {
                let slot = match wins.iter_mut().find(|w| w.0 == s.method) {
                    Some(w) => w,
                    None => {
                        wins.push((s.method, 0, 0));
                        wins.last_mut().unwrap()
                    }
                };
                slot.1 += usize::from(a.global_loss <= s.global_loss);
                slot.2 += usize::from(a.replay_deviation <= s.replay_deviation);
            }
        }
        total += 1;
    }
    for (method, loss_wins, replay_wins) in wins {
        writeln!(
            out,
            "awe vs {method}: global_loss no worse on {loss_wins}/{total}, replay deviation no worse on {replay_wins}/{total}"
        )?;
    }
    Ok(0)
}

fn replay_check(args: &ReplayArgs, out: &mut dyn Write) -> CliResult {
    let traj = load_trajectory(&args.input)?;
    let file = load_waypoints(&args.waypoints)?;
    let wp = file.waypoints()?;
    let mut cfg = FollowerConfig::for_trajectory(&traj, file.provenance.metric.clone(), args.control_multiplier);
    if let Some(step) = args.max_step {
        cfg.max_step = step;
    }
    if let Some(tol) = args.reach_tolerance {
        cfg.reach_tolerance = tol;
    }
    if let Some(limit) = args.tick_limit {
        cfg.tick_limit = limit;
    }
    cfg.blocking = args.blocking;
    let report = replay_waypoints(&traj, &wp, &cfg)?;
    let reached = report.per_waypoint_reached.iter().filter(|r| **r).count();
    writeln!(
        out,
        "{}: reached_final={} waypoints_reached={}/{} max_tracking_deviation={:.6e} max_polyline_deviation={:.6e} ticks={} (limit {}) max_step={:.6e} multiplier={}",
        traj.name(),
        report.reached_final,
        reached,
        report.per_waypoint_reached.len(),
        report.max_tracking_deviation,
        report.max_polyline_deviation,
        report.ticks_used,
        cfg.tick_limit,
        cfg.max_step,
        cfg.control_multiplier
    )?;
    Ok(if report.reached_final { 0 } else { EXIT_CHECK })
}

fn sweep(args: &SweepArgs, out: &mut dyn Write) -> CliResult {
    let metric = load_metric(args.metric_config.as_deref())?;
    let traj = load_trajectory(&args.input)?;
    let results = sweep_eta(&traj, &args.etas, &metric)?;
    for (eta, e) in &results {
        writeln!(
            out,
            "eta={eta} waypoints={} ratio={} global_loss={:.6e}",
            e.waypoints.len(),
            fmt_ratio(e.waypoints.ratio()),
            e.global_loss
        )?;
    }
    emit_plot_data(&args.plot_out, &traj, &results)?;
    writeln!(out, "plot data -> {}", args.plot_out.display())?;
    Ok(0)
}

fn oracle(args: &OracleArgs, out: &mut dyn Write) -> CliResult {
    let budget = plain_budget(&args.budget)?;
    let traj = load_trajectory(&args.input)?;
    let (dp, _) = extract_waypoints_dp(&traj, &budget)?;
    let bf = extract_waypoints_bruteforce(&traj, &budget)?;
    writeln!(out, "dp:          {:?}", dp.waypoints.indices())?;
    writeln!(out, "brute force: {:?}", bf.waypoints.indices())?;
    if dp.waypoints.len() == bf.waypoints.len() {
        writeln!(out, "MATCH ({} waypoints)", dp.waypoints.len())?;
        Ok(0)
    } else {
        writeln!(out, "MISMATCH")?;
        Ok(EXIT_CHECK)
    }
}

fn synth(args: &SynthArgs, out: &mut dyn Write) -> CliResult {
    let gen = SegmentCorpus {
        state_space: args.state_space,
        noise_sigma: args.noise,
        ..SegmentCorpus::default()
    };
    if !(args.noise >= 0.0 && args.noise.is_finite()) {
        return Err(config_failure(format!("bad noise level {}", args.noise)));
    }
    fs::create_dir_all(&args.output).map_err(|e| Error::io(&args.output, e))?;
    for traj in gen.generate(args.seed, args.count) {
        let path = args.output.join(format!("{}.json", traj.name()));
        save_trajectory(&path, &traj)?;
        writeln!(out, "{} frames -> {}", traj.len(), path.display())?;
    }
    Ok(0)
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Extract(a) => extract(a, out),
        Command::Relabel(a) => relabel(a, out, err),
        Command::Stats(a) => stats(a, out, err),
        Command::Compare(a) => compare(a, out),
        Command::ReplayCheck(a) => replay_check(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::Synth(a) => synth(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run(args, &mut stdout.lock(), &mut stderr.lock());
    ExitCode::from(code)
}

