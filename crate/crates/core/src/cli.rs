//! Command-line front end: `tune`, `lap` and `report`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bo::{run_campaign, CampaignRecord, Source, StopReason};
use crate::config::CampaignConfig;
use crate::controller::GainVector;
use crate::cost::{evaluate_cost, CostBreakdown};
use crate::error::{Error, Result};
use crate::io::{self, CampaignRow, OutputLock, Summary};
use crate::sim::{run_lap, LapLog, LapResult, LapRow, Termination};

pub const EXIT_OK: i32 = 0;
/// Invalid configuration or arguments, detected before any work is done.
pub const EXIT_CONFIG: i32 = 3;
/// Failure while running: evaluator abort, I/O, locked or empty directory.
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gaintune", version, about = "Bayesian-optimization gain tuning for a simulated path-following robot")]
pub struct Cli {
    /// TOML campaign configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    /// Add cost components and expected improvement to each iteration line.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a tuning campaign.
    Tune(TuneArgs),
    /// Simulate one lap with the given gains.
    Lap(LapArgs),
    /// Export plot-ready tables from a campaign directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Write a lap CSV for every iteration, not only the notable ones.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct LapArgs {
    /// Velocity gain.
    #[arg(allow_negative_numbers = true)]
    pub lambda_v: f64,
    /// Heading-convergence gain.
    #[arg(allow_negative_numbers = true)]
    pub lambda_a: f64,
    /// Lyapunov weight on the alpha term.
    #[arg(allow_negative_numbers = true)]
    pub k1: f64,
    /// Lyapunov weight on the beta term.
    #[arg(allow_negative_numbers = true)]
    pub k2: f64,
    /// Disable actuator and measurement noise.
    #[arg(long)]
    pub noiseless: bool,
    /// CSV destination; defaults to lap.csv in the output directory.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Campaign directory; defaults to the configured output directory.
    pub dir: Option<PathBuf>,
    /// Iterations for path, state and error tables (default: baseline, best, last).
    #[arg(long, value_delimiter = ',', value_name = "I,J,..")]
    pub iterations: Option<Vec<usize>>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) | Error::Parse { .. } | Error::OutOfDomain(_) | Error::InvalidArgument(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn load_config(cli: &Cli) -> Result<CampaignConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Parse { path: p.clone(), message: e.to_string() })?;
            CampaignConfig::from_toml_str(&text).map_err(|message| Error::Parse { path: p.clone(), message })?
        }
        None => CampaignConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed command line, printing progress to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Tune(a) => tune(&load_config(cli)?, a, cli.verbose, out),
        Command::Lap(a) => lap(&load_config(cli)?, a, out),
        Command::Report(a) => {
            let dir = match &a.dir {
                Some(d) => d.clone(),
                None => load_config(cli)?.output_dir,
            };
            report(&dir, a.iterations.as_deref(), out)
        }
    }
}

fn console(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn fmt_gains(g: &GainVector) -> String {
    let [a, b, c, d] = g.to_array();
    format!("[{a:.4e}, {b:.4e}, {c:.4e}, {d:.4e}]")
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Completed => "completed",
        Termination::Diverged => "diverged",
        Termination::Timeout => "timeout",
    }
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Budget => "budget",
        StopReason::EiBelowThreshold => "ei_below_threshold",
        StopReason::Stalled => "stalled",
    }
}

fn source_name(s: Source) -> &'static str {
    match s {
        Source::Baseline => "baseline",
        Source::SpaceFilling => "space_filling",
        Source::Acquisition => "acquisition",
        Source::Random => "random",
    }
}

fn write_lap(path: &Path, lap: &LapLog) -> Result<()> {
    io::atomic_write(path, lap.to_csv_string().as_bytes())
}

fn tune(cfg: &CampaignConfig, args: &TuneArgs, verbose: bool, out: &mut dyn Write) -> Result<()> {
    let dir = cfg.output_dir.clone();
    let _lock = OutputLock::acquire(&dir)?;
    io::atomic_write(&dir.join(io::CONFIG_FILE), cfg.to_toml_string().as_bytes())?;

    let objective = cfg.objective();
    let mut best = f64::INFINITY;
    let mut evaluator = |i: usize, theta: &GainVector| {
        let (eval, lap) = objective.evaluate_lap(i, theta)?;
        let notable = i == 1 || eval.j_bo < best || !lap.completed;
        best = best.min(eval.j_bo);
        if args.all || notable {
            write_lap(&dir.join(io::lap_file(i)), &lap.log)?;
        }
        Ok(eval)
    };
    let mut observer = |rec: &CampaignRecord| -> Result<()> {
        io::atomic_write(&dir.join(io::CAMPAIGN_FILE), io::campaign_jsonl(rec).as_bytes())?;
        let (r, best) = (rec.iterations.last().expect("observer runs after an evaluation"), rec.best_j());
        let mut line =
            format!("{:>3} {:<13} theta={} j_bo={:.3} best={:.3}", r.i, source_name(r.source), fmt_gains(&r.theta), r.j_bo, best);
        if verbose {
            if let Some(c) = &r.cost {
                let _ = write!(line, " j_lat={:.3} j_head={:.3} completion={:.4}", c.j_lat, c.j_head, c.completion_ratio);
            }
            if let Some(ei) = r.ei_at_selection {
                let _ = write!(line, " ei={ei:.4e}");
            }
        }
        console(out, &line)
    };

    let result = run_campaign(&cfg.search_domain(), &cfg.baseline, &cfg.settings(), &mut evaluator, &mut observer);
    let (record, error) = match result {
        Ok(r) => (r, None),
        Err(abort) => (*abort.partial, Some(abort.error)),
    };
    let summary = Summary::new(&record, error.as_ref().map(|e| e.to_string()));
    io::atomic_write(&dir.join(io::CAMPAIGN_FILE), io::campaign_jsonl(&record).as_bytes())?;
    io::atomic_write(&dir.join(io::SUMMARY_FILE), summary.to_json().as_bytes())?;
    if let Some(e) = error {
        return Err(e);
    }
    if let Some(b) = record.best() {
        console(
            out,
            &format!(
                "done: {} evaluations, stop={}, best i={} theta={} j_bo={:.3}",
                record.iterations.len(),
                stop_name(record.stop_reason.expect("finished campaigns have a stop reason")),
                b.i,
                fmt_gains(&b.theta),
                b.j_bo
            ),
        )?;
    }
    Ok(())
}

fn print_breakdown(out: &mut dyn Write, lap: &LapResult, c: &CostBreakdown) -> Result<()> {
    let s = lap.summary();
    console(out, &format!("termination   {}", termination_name(s.termination)))?;
    console(out, &format!("completion    {:.4} ({:.2} / {:.2} m)", c.completion_ratio, s.l_comp, s.l_lap))?;
    if let Some(t) = s.diverged_at {
        console(out, &format!("diverged_at   {t:.2} s"))?;
    }
    console(out, &format!("J_lat         {:.4}", c.j_lat))?;
    console(out, &format!("J_head        {:.4}", c.j_head))?;
    console(out, &format!("J             {:.4}", c.j))?;
    console(out, &format!("penalty       {:.4}", c.penalty()))?;
    console(out, &format!("J_BO          {:.4}", c.j_bo))
}

fn lap(cfg: &CampaignConfig, args: &LapArgs, out: &mut dyn Write) -> Result<()> {
    let gains = GainVector::from_array([args.lambda_v, args.lambda_a, args.k1, args.k2]);
    gains.validate()?;
    cfg.search_domain().check(&gains)?;
    let mut sim = cfg.sim;
    sim.seed = cfg.seed;
    if args.noiseless {
        sim = sim.noiseless();
    }
    let result = run_lap(&cfg.track, &gains, &sim)?;
    let cost = evaluate_cost(&result, &cfg.cost)?;
    let path = match &args.out {
        Some(p) => p.clone(),
        None => {
            fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
            cfg.output_dir.join("lap.csv")
        }
    };
    write_lap(&path, &result.log)?;
    console(out, &format!("gains         {}", fmt_gains(&gains)))?;
    print_breakdown(out, &result, &cost)?;
    console(out, &format!("csv           {}", path.display()))
}

fn load_trace(dir: &Path, row: &CampaignRow, cfg: Option<&CampaignConfig>) -> std::result::Result<Vec<LapRow>, String> {
    let path = dir.join(io::lap_file(row.i));
    if path.exists() {
        return io::read_csv(&path).map_err(|e| e.to_string());
    }
    let cfg = cfg.ok_or_else(|| format!("{} missing and no {} to re-simulate from", path.display(), io::CONFIG_FILE))?;
    let objective = cfg.objective();
    let (_, lap) = objective.evaluate_lap(row.i, &row.gains()).map_err(|e| e.to_string())?;
    Ok(lap.log.rows().collect())
}

#[derive(Serialize)]
struct CostRow {
    i: usize,
    source: Source,
    j_bo: f64,
    j: Option<f64>,
    j_lat: Option<f64>,
    j_head: Option<f64>,
    completion: Option<f64>,
    ei_at_selection: Option<f64>,
}

#[derive(Serialize)]
struct BestRow {
    i: usize,
    best_j_bo: f64,
}

#[derive(Serialize)]
struct PathRow {
    i: usize,
    t: f64,
    x: f64,
    y: f64,
    x_t: f64,
    y_t: f64,
}

#[derive(Serialize)]
struct StateRow {
    i: usize,
    t: f64,
    x: f64,
    y: f64,
    phi: f64,
    v_cmd: f64,
    omega_cmd: f64,
    rho: f64,
    alpha: f64,
    beta: f64,
    e_lat: f64,
    e_head_deg: f64,
}

#[derive(Serialize)]
struct ErrorStatsRow {
    i: usize,
    mean_abs_e_lat_m: f64,
    rms_e_lat_m: f64,
    max_abs_e_lat_m: f64,
    mean_abs_e_head_deg: f64,
    rms_e_head_deg: f64,
    max_abs_e_head_deg: f64,
}

fn stats(xs: &[f64]) -> (f64, f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().map(|x| x.abs()).sum::<f64>() / n;
    let rms = (xs.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
    let max = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    (mean, rms, max)
}

fn report(dir: &Path, selected: Option<&[usize]>, out: &mut dyn Write) -> Result<()> {
    let campaign = dir.join(io::CAMPAIGN_FILE);
    if !campaign.exists() {
        return Err(Error::io(&campaign, std::io::Error::new(std::io::ErrorKind::NotFound, "no campaign record")));
    }
    let rows = io::read_campaign(&campaign)?;
    if rows.is_empty() {
        return Err(Error::Parse { path: campaign, message: "campaign record is empty".into() });
    }
    let _lock = OutputLock::acquire(dir)?;
    let cfg_path = dir.join(io::CONFIG_FILE);
    let cfg = if cfg_path.exists() { Some(CampaignConfig::load(&cfg_path)?) } else { None };

    let cost: Vec<CostRow> = rows
        .iter()
        .map(|r| CostRow {
            i: r.i,
            source: r.source,
            j_bo: r.j_bo,
            j: r.j,
            j_lat: r.j_lat,
            j_head: r.j_head,
            completion: r.completion,
            ei_at_selection: r.ei_at_selection,
        })
        .collect();
    let best: Vec<BestRow> = rows
        .iter()
        .scan(f64::INFINITY, |run, r| {
            *run = run.min(r.j_bo);
            Some(BestRow { i: r.i, best_j_bo: *run })
        })
        .collect();
    io::atomic_write(
        &dir.join("cost_vs_iteration.csv"),
        &io::csv_bytes(&cost, "i,source,j_bo,j,j_lat,j_head,completion,ei_at_selection"),
    )?;
    io::atomic_write(&dir.join("best_so_far.csv"), &io::csv_bytes(&best, "i,best_j_bo"))?;

    let wanted: Vec<usize> = match selected {
        Some(s) => s.to_vec(),
        None => {
            let best_i = rows.iter().fold(&rows[0], |b, r| if r.j_bo < b.j_bo { r } else { b }).i;
            let mut v = vec![rows[0].i, best_i, rows[rows.len() - 1].i];
            v.sort_unstable();
            v.dedup();
            v
        }
    };

    let mut paths = Vec::new();
    let mut states = Vec::new();
    let mut errors = Vec::new();
    let mut missing = 0;
    for &i in &wanted {
        let Some(row) = rows.iter().find(|r| r.i == i) else {
            console(out, &format!("iteration {i}: not in campaign record, skipped"))?;
            missing += 1;
            continue;
        };
        let trace = match load_trace(dir, row, cfg.as_ref()) {
            Ok(t) => t,
            Err(msg) => {
                console(out, &format!("iteration {i}: {msg}, skipped"))?;
                missing += 1;
                continue;
            }
        };
        for s in &trace {
            paths.push(PathRow { i, t: s.t, x: s.x, y: s.y, x_t: s.x_t, y_t: s.y_t });
            states.push(StateRow {
                i,
                t: s.t,
                x: s.x,
                y: s.y,
                phi: s.phi,
                v_cmd: s.v_cmd,
                omega_cmd: s.omega_cmd,
                rho: s.rho,
                alpha: s.alpha,
                beta: s.beta,
                e_lat: s.e_lat,
                e_head_deg: s.e_head.to_degrees(),
            });
        }
        let el: Vec<f64> = trace.iter().map(|s| s.e_lat).collect();
        let eh: Vec<f64> = trace.iter().map(|s| s.e_head.to_degrees()).collect();
        let (lm, lr, lx) = stats(&el);
        let (hm, hr, hx) = stats(&eh);
        errors.push(ErrorStatsRow {
            i,
            mean_abs_e_lat_m: lm,
            rms_e_lat_m: lr,
            max_abs_e_lat_m: lx,
            mean_abs_e_head_deg: hm,
            rms_e_head_deg: hr,
            max_abs_e_head_deg: hx,
        });
    }
    io::atomic_write(&dir.join("paths.csv"), &io::csv_bytes(&paths, "i,t,x,y,x_t,y_t"))?;
    io::atomic_write(
        &dir.join("states.csv"),
        &io::csv_bytes(&states, "i,t,x,y,phi,v_cmd,omega_cmd,rho,alpha,beta,e_lat,e_head_deg"),
    )?;
    io::atomic_write(
        &dir.join("error_stats.csv"),
        &io::csv_bytes(
            &errors,
            "i,mean_abs_e_lat_m,rms_e_lat_m,max_abs_e_lat_m,mean_abs_e_head_deg,rms_e_head_deg,max_abs_e_head_deg",
        ),
    )?;
    console(
        out,
        &format!("report: {} iterations, {} of {} selected laps exported", rows.len(), wanted.len() - missing, wanted.len()),
    )
}
