//! The `chtbench` command line.
//!
//! Exit codes: 0 on success, 1 when `verify` or `relax` finds a violation,
//! 2 on a usage, configuration or I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::harness::{
    self, ratio_scaling_grid, sign_grid, sort_benchmark, verify_relaxation, verify_sign_equivalence,
    xi_sensitivity_sweep, RunConfig, DEFAULT_XI_GRID,
};
use crate::par::Execution;
use crate::problem;

pub const OUT_ENV: &str = "CHTBENCH_OUT";

#[derive(Debug, Parser)]
#[command(name = "chtbench", version, about = "Constraint-handling benchmark harness")]
struct Cli {
    /// Worker threads for trial fan-out; 1 runs sequentially.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Repeated optimization runs; writes results.csv and aggregate.json.
    Run(RunArgs),
    /// Check the quantized comparison against the qualitative criterion.
    Verify(VerifyArgs),
    /// Measure misorderings caused by overestimated scales.
    Relax(RelaxArgs),
    /// Time sorting by evaluation against sorting by comparison.
    Sortbench(SortArgs),
    /// Sweep the initial xi and record median convergence traces.
    Sweep(SweepArgs),
    /// Print the problem registry.
    List,
}

#[derive(Debug, Args, Default)]
struct ExperimentArgs {
    /// Run-config JSON file; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Dotted override such as `de.np=60` or `cht.xi_max=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    problem: Option<String>,
    /// qpc, frules, eps, penalty or sr.
    #[arg(long)]
    cht: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    max_fes: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    xi_max: Option<f64>,
    #[arg(long)]
    xi_min: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    penalty_r: Option<f64>,
    #[arg(long)]
    sr_pf: Option<f64>,
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    f: Option<f64>,
    #[arg(long)]
    cr: Option<f64>,
    /// bin or exp.
    #[arg(long)]
    xover: Option<String>,
    /// Output directory; defaults to $CHTBENCH_OUT, then `results`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Also write one trace_<run>.csv per run.
    #[arg(long)]
    traces: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Comma-separated problem names.
    #[arg(long, value_delimiter = ',', default_value = "g06,g11,g24,ring5")]
    problems: Vec<String>,
    #[arg(long, default_value_t = 100_000)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also evaluate pi on scales multiplied by 0.5, 2 and 10.
    #[arg(long)]
    ratio_scaling: bool,
}

#[derive(Debug, Args)]
struct RelaxArgs {
    #[arg(long, default_value_t = 1_000_000)]
    points: usize,
    /// Overestimation factor of the objective range.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    xi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SortArgs {
    #[arg(long, default_value = "g06")]
    problem: String,
    #[arg(long, value_delimiter = ',', default_value = "10,20,50,100,200")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Initial xi values; defaults to 1, 0.1, ..., 1e-5.
    #[arg(long, value_delimiter = ',')]
    xis: Vec<f64>,
}

fn output_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("results")),
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        let map = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("`{key}`: `{part}` is not inside a table")))?;
        if parts.peek().is_none() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .get_mut(part)
            .ok_or_else(|| Error::Config(format!("`{key}`: unknown section `{part}`")))?;
    }
    Err(Error::Config("empty override key".into()))
}

fn parse_override(item: &str) -> Result<(String, Value)> {
    let (k, v) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{item}` is not KEY=VALUE")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Defaults, then the config file, then `--set` overrides, then flags.
fn resolve_config(a: &ExperimentArgs) -> Result<RunConfig> {
    let base = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let mut tree = serde_json::to_value(&base)?;
    let mut overrides = a.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>>>()?;
    let flags: [(&str, Option<Value>); 15] = [
        ("problem", a.problem.clone().map(Value::String)),
        ("cht.cht", a.cht.as_ref().map(|s| Value::String(s.to_ascii_lowercase()))),
        ("runs", a.runs.map(Value::from)),
        ("de.max_fes", a.max_fes.map(Value::from)),
        ("seed", a.seed.map(Value::from)),
        ("cht.xi_max", a.xi_max.map(num)),
        ("cht.xi_min", a.xi_min.map(num)),
        ("cht.p", a.p.map(num)),
        ("cht.eps", a.eps.map(num)),
        ("cht.penalty_r", a.penalty_r.map(num)),
        ("cht.sr_pf", a.sr_pf.map(num)),
        ("de.np", a.np.map(Value::from)),
        ("de.f", a.f.map(num)),
        ("de.cr", a.cr.map(num)),
        ("de.xover", a.xover.clone().map(Value::String)),
    ];
    overrides.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
    for (k, v) in overrides {
        set_path(&mut tree, &k, v)?;
    }
    let config: RunConfig =
        serde_json::from_value(tree).map_err(|e| Error::Config(format!("invalid configuration: {e}")))?;
    config.de.validate()?;
    config.cht.validate()?;
    if config.runs == 0 {
        return Err(Error::Config("runs must be positive".into()));
    }
    Ok(config)
}

fn cmd_run(a: &RunArgs, exec: Execution, out: &mut dyn Write) -> Result<i32> {
    let config = resolve_config(&a.exp)?;
    let cop = problem::find(&config.problem)?;
    let set = harness::run_trials(&cop, &config.cht, &config.de, config.runs, config.seed, exec)?;
    let dir = output_dir(a.exp.out.as_deref());
    std::fs::create_dir_all(&dir)?;
    harness::write_results_csv(&dir.join("results.csv"), cop.name(), config.cht.cht.as_str(), &set.stats.records)?;
    harness::write_json(&dir.join("aggregate.json"), &set.stats.aggregate)?;
    if a.traces {
        for (i, r) in set.runs.iter().enumerate() {
            harness::write_trace_csv(&dir.join(format!("trace_{i:03}.csv")), &r.trace)?;
        }
    }
    let agg = &set.stats.aggregate;
    writeln!(
        out,
        "{} {}: runs={} fr={:.2} sr={} best={:.6e} median={:.6e} worst={:.6e} -> {}",
        cop.name(),
        config.cht.cht.as_str(),
        config.runs,
        agg.fr,
        agg.sr.map_or("n/a".into(), |s| format!("{s:.2}")),
        agg.best,
        agg.median,
        agg.worst,
        dir.display()
    )?;
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, exec: Execution, out: &mut dyn Write) -> Result<i32> {
    let problems = a.problems.iter().map(|p| problem::find(p.trim())).collect::<Result<Vec<_>>>()?;
    let mut grid = sign_grid();
    if a.ratio_scaling {
        grid.extend(ratio_scaling_grid());
    }
    let report = verify_sign_equivalence(&problems, a.pairs, &grid, a.seed, exec)?;
    writeln!(
        out,
        "pairs={} checks={} mismatches={}",
        report.pairs, report.checks, report.mismatches
    )?;
    if let Some(m) = &report.first {
        writeln!(out, "first mismatch: {}", serde_json::to_string(m)?)?;
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_relax(a: &RelaxArgs, exec: Execution, out: &mut dyn Write) -> Result<i32> {
    let r = verify_relaxation(a.points, a.c, a.xi, a.seed, exec)?;
    writeln!(
        out,
        "points={} c={} xi={} disagreements={} rate={:.6} mu={:.6} bound={:.6} outside_wedge={}",
        r.n_points, r.c, r.xi, r.disagreements, r.empirical_rate, r.mu, r.bound, r.outside_wedge
    )?;
    Ok(if r.passed() { 0 } else { 1 })
}

fn cmd_sortbench(a: &SortArgs, out: &mut dyn Write) -> Result<i32> {
    let cop = problem::find(&a.problem)?;
    let rows = sort_benchmark(&cop, &a.sizes, a.repeats, a.seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let dir = output_dir(a.out.as_deref());
    std::fs::create_dir_all(&dir)?;
    harness::write_atomic(&dir.join("sortbench.csv"), &bytes)?;
    out.write_all(&bytes)?;
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs, exec: Execution, out: &mut dyn Write) -> Result<i32> {
    let config = resolve_config(&a.exp)?;
    let cop = problem::find(&config.problem)?;
    let xis = if a.xis.is_empty() { DEFAULT_XI_GRID.to_vec() } else { a.xis.clone() };
    let series = xi_sensitivity_sweep(&cop, &config.cht, &config.de, &xis, config.runs, config.seed, exec)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["xi", "fes", "best_f", "best_viol"])?;
    for s in &series {
        for t in &s.trace {
            w.write_record([
                s.xi.to_string(),
                t.fes.to_string(),
                t.best_f.map_or(String::new(), |f| f.to_string()),
                t.best_viol.to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let dir = output_dir(a.exp.out.as_deref());
    std::fs::create_dir_all(&dir)?;
    harness::write_atomic(&dir.join("sweep.csv"), &bytes)?;
    for s in &series {
        let agg = &s.stats.aggregate;
        writeln!(
            out,
            "xi={:e} fr={:.2} sr={} median={:.6e}",
            s.xi,
            agg.fr,
            agg.sr.map_or("n/a".into(), |v| format!("{v:.2}")),
            agg.median
        )?;
    }
    Ok(0)
}

fn cmd_list(out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "{:<8} {:>4} {:>22}", "name", "dim", "best_known_f")?;
    for cop in problem::registry() {
        let best = cop.best_known_f().map_or("-".into(), |f| format!("{f:.12}"));
        writeln!(out, "{:<8} {:>4} {:>22}", cop.name(), cop.dimension(), best)?;
    }
    Ok(0)
}

/// Parses `args` (including the program name) and executes the command,
/// writing reports to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let exec = Execution::from_jobs(cli.jobs);
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a, exec, out),
        Command::Verify(a) => cmd_verify(a, exec, out),
        Command::Relax(a) => cmd_relax(a, exec, out),
        Command::Sortbench(a) => cmd_sortbench(a, out),
        Command::Sweep(a) => cmd_sweep(a, exec, out),
        Command::List => cmd_list(out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
