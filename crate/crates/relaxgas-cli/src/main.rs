//! Command-line front end: plan breakdown data, run simulations, verify the
//! emitted artifacts, and tabulate velocity profiles.
//!
//! Exit codes: 0 on success (a detected blow-up is a successful run), 1 when
//! `verify` finds a failing check, 2 for usage/configuration errors and
//! infeasible plans, 3 when a run aborts on a boundary breach.

mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use config::{DataMode, Overrides, Settings};
use relaxgas::csvio;
use relaxgas::diagnostics::{
    apriori_check, cone_check, conservation_check, entropy_budget_check, envelope_check,
    holder_check, jensen_check, measure, s2_bound_check, CheckReport, Recorder,
};
use relaxgas::model::{to_conservative, ModelParams};
use relaxgas::planner::{self, BlowupPlan, DataSpec, InitialData, PlanPolicy, Sense};
use relaxgas::profile::{profile_norm_sq, velocity_profile, ProfileSpec, ProfileVariant};
use relaxgas::report;
use relaxgas::solver::{self, BlowupKind, Field, Grid, RunOutcome, SimConfig};
use relaxgas::{Error, Result};

#[derive(Parser)]
#[command(
    name = "relaxgas",
    about = "Finite-volume runs of a relaxed gas model with breakdown diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Subcommand)]
enum Cmd {
    /// Select breakdown data (amplitude, half-width) and report the
    /// admissibility checks
    Plan(PlanArgs),
    /// Run the finite-volume scheme and write series/snapshot artifacts
    Simulate(SimArgs),
    /// Re-check the artifacts of a finished run
    Verify(VerifyArgs),
    /// Tabulate the initial velocity profile
    Profile(ProfileArgs),
}

#[derive(clap::Args)]
struct PlanArgs {
    #[command(flatten)]
    ov: Overrides,
    /// Cap on the profile half-width search
    #[arg(long = "max-M")]
    max_m: Option<u64>,
    /// Directory to write plan.json into
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SimArgs {
    #[command(flatten)]
    ov: Overrides,
    /// Output directory for series.csv, snapshots, and the run manifest
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Run directory (or the manifest.json inside it)
    #[arg(default_value = ".")]
    path: PathBuf,
}

#[derive(clap::Args)]
struct ProfileArgs {
    /// Plateau amplitude
    #[arg(long = "L", default_value_t = 2.0)]
    l_amp: f64,
    /// Half-width, even integer
    #[arg(long = "M", default_value_t = 8)]
    m_halfwidth: u64,
    /// Tabulation step
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Profile variant: corrected or printed
    #[arg(long = "profile-variant")]
    variant: Option<String>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    // Die quietly when the consumer of a pipe goes away (`relaxgas ... |
    // head`), like other line-oriented tools, instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Plan(a) => cmd_plan(a),
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Profile(a) => cmd_profile(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Diagnostics(_) => 1,
                _ => 2,
            })
        }
    }
}

// ============================================================================
// plan
// ============================================================================

fn sense_str(s: &Sense) -> &'static str {
    match s {
        Sense::StrictLess => "<",
        Sense::AtMost => "<=",
        Sense::AtLeast => ">=",
    }
}

fn print_plan(plan: &BlowupPlan) {
    println!(
        "plan: {}",
        if plan.admissible {
            "admissible"
        } else {
            "NOT admissible"
        }
    );
    println!(
        "  gamma = {}, tau = {}, rho_bar = {}",
        plan.gamma, plan.tau, plan.rho_bar
    );
    println!(
        "  density window = [{}, {}], R = {}",
        plan.rho_min, plan.rho_max, plan.r_support
    );
    println!("  sigma_tilde = {:.12}", plan.sigma_tilde);
    println!("  L = {}, M = {}", plan.l_amp, plan.m_halfwidth);
    println!("  h0 = {:.6e}, norm_sq = {:.6e}", plan.h0, plan.norm_sq);
    println!(
        "  F0 = {:.6e} (threshold {:.6e})",
        plan.f0, plan.f0_threshold
    );
    println!(
        "  c1 = {:.6e}, c2 = {:.6e}, c3 = {:.6e}, c4 = {:.6e}, c5 = {:.6e}",
        plan.c1, plan.c2, plan.c3, plan.c4, plan.c5
    );
    println!("  t_star = {:.6}", plan.t_star);
    println!("checks:");
    for c in &plan.checks {
        println!(
            "  {:<22} {:>13.6e} {:>2} {:>13.6e}  margin {:>10.3e}  {}",
            c.name,
            c.lhs,
            sense_str(&c.sense),
            c.rhs,
            c.margin,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
}

fn cmd_plan(args: &PlanArgs) -> Result<ExitCode> {
    let mut settings = Settings::resolve(&args.ov)?;
    if let Some(m) = args.max_m {
        settings.max_m = m;
    }
    let params = ModelParams::new(settings.gamma, settings.tau, settings.rho_bar)?;
    let ds = DataSpec {
        rho_bump: None,
        s_bump: None,
        r_support: settings.r_support,
    };
    let policy = PlanPolicy {
        max_m: settings.max_m,
        ..PlanPolicy::default()
    };
    let plan = planner::plan(&params, &ds, &policy)?;
    print_plan(&plan);
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        let path = dir.join("plan.json");
        fs::write(&path, report::report_to_string(&plan)?)?;
        println!("wrote {}", path.display());
    }
    Ok(if plan.admissible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

// ============================================================================
// simulate
// ============================================================================

fn kind_str(kind: BlowupKind) -> &'static str {
    match kind {
        BlowupKind::NonFinite => "non_finite",
        BlowupKind::NonPositiveDensity => "non_positive_density",
        BlowupKind::DensityFloor => "density_floor",
        BlowupKind::GradientLimit => "gradient_limit",
    }
}

const SERIES_PLOT: &str = "\
# Time-series overview: weighted momentum and the entropy budget.
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 1000,600
set output 'series.png'
set xlabel 't'
plot 'series.csv' using 1:4 with lines title 'F', \\
     'series.csv' using 1:5 with lines title 'E'
";

fn write_snapshot_file(path: &Path, field: &Field) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    csvio::write_snapshot(&mut w, field)?;
    w.flush()?;
    Ok(())
}

fn write_manifest(dir: &Path, manifest: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

fn cmd_simulate(args: &SimArgs) -> Result<ExitCode> {
    let t0 = Instant::now();
    let settings = Settings::resolve(&args.ov)?;
    let params = ModelParams::new(settings.gamma, settings.tau, settings.rho_bar)?;
    let out = &args.out;
    fs::create_dir_all(out)?;

    // Initial data (and, for planned runs, the breakdown plan itself).
    let mut plan_opt: Option<BlowupPlan> = None;
    let data = match settings.mode {
        DataMode::Equilibrium => InitialData::equilibrium(settings.rho_bar),
        DataMode::Explicit => {
            let spec = ProfileSpec::new(settings.l_amp, settings.m_halfwidth, settings.r_support)?;
            let ds = DataSpec {
                rho_bump: None,
                s_bump: None,
                r_support: settings.r_support,
            };
            InitialData::planned(&ds, &spec, settings.variant, settings.rho_bar)?
        }
        DataMode::Planned => {
            let ds = DataSpec {
                rho_bump: None,
                s_bump: None,
                r_support: settings.r_support,
            };
            let policy = PlanPolicy {
                max_m: settings.max_m,
                ..PlanPolicy::default()
            };
            match planner::plan(&params, &ds, &policy) {
                Ok(plan) if plan.admissible => {
                    let spec = plan.profile_spec()?;
                    let d = InitialData::planned(&ds, &spec, settings.variant, settings.rho_bar)?;
                    plan_opt = Some(plan);
                    d
                }
                Ok(plan) => {
                    let manifest = json!({
                        "config": settings.echo(),
                        "plan": report::plan_to_report(&plan)?,
                        "outputs": {},
                        "outcome": {"status": "inadmissible_plan",
                                    "detail": "one or more admissibility checks failed"},
                        "steps": 0,
                        "records": 0,
                        "duration_seconds": t0.elapsed().as_secs_f64(),
                    });
                    write_manifest(out, &manifest)?;
                    eprintln!("error: plan is not admissible; see manifest.json");
                    return Ok(ExitCode::from(2));
                }
                Err(Error::Infeasible { constraint, detail }) => {
                    let manifest = json!({
                        "config": settings.echo(),
                        "plan": null,
                        "outputs": {},
                        "outcome": {"status": "inadmissible_plan",
                                    "detail": format!("constraint `{constraint}`: {detail}")},
                        "steps": 0,
                        "records": 0,
                        "duration_seconds": t0.elapsed().as_secs_f64(),
                    });
                    write_manifest(out, &manifest)?;
                    eprintln!("error: planning infeasible: constraint `{constraint}`: {detail}");
                    return Ok(ExitCode::from(2));
                }
                Err(e) => return Err(e),
            }
        }
    };
    let sigma = plan_opt
        .as_ref()
        .map(|p| p.sigma_tilde)
        .unwrap_or_else(|| planner::sigma_tilde(&params, data.rho_min, data.rho_max));

    let grid = match settings.x_half {
        Some(half) => Grid::symmetric(half, settings.dx)?,
        None => Grid::cone_sized(
            data.support_radius,
            sigma,
            settings.t_end,
            settings.dx,
            settings.margin,
        )?,
    };

    let mut cfg = SimConfig::new(params, settings.t_end);
    cfg.cfl = settings.cfl;
    cfg.order = settings.order;
    cfg.splitting = settings.splitting;
    cfg.record_every = settings.record_every.max(1);
    cfg.eps_support = settings.eps_support;
    cfg.max_grad_limit = settings.resolved_grad_limit();
    cfg.min_rho_limit = settings.min_rho_limit;

    let snap_dir = out.join("snapshots");
    fs::create_dir_all(&snap_dir)?;
    let mut recorder = Recorder::new(params, settings.eps_support);
    let mut skipped_records: u64 = 0;
    let mut snapshots: Vec<(String, f64)> = Vec::new();
    let mut io_err: Option<Error> = None;
    let mut last_field: Option<Field> = None;
    let mut obs_index: u64 = 0;

    let summary = solver::run(&grid, &data, &cfg, &mut |field| {
        if recorder.record(field).is_err() {
            skipped_records += 1;
        }
        let want = obs_index == 0
            || (settings.snapshot_every > 0 && obs_index % settings.snapshot_every == 0);
        if want && io_err.is_none() {
            let name = format!("{:04}.csv", snapshots.len());
            match write_snapshot_file(&snap_dir.join(&name), field) {
                Ok(()) => snapshots.push((format!("snapshots/{name}"), field.time)),
                Err(Error::Io(e)) => io_err = Some(Error::Io(e)),
                Err(e) => eprintln!("warning: snapshot at t = {:.6e} skipped: {e}", field.time),
            }
        }
        obs_index += 1;
        last_field = Some(field.clone());
    })?;
    if let Some(e) = io_err {
        return Err(e);
    }

    // Terminal snapshot, unless the cadence already captured that instant.
    if let Some(field) = &last_field {
        let covered = snapshots.last().is_some_and(|(_, t)| *t == field.time);
        if !covered {
            match write_snapshot_file(&snap_dir.join("final.csv"), field) {
                Ok(()) => snapshots.push(("snapshots/final.csv".to_string(), field.time)),
                Err(Error::Io(e)) => return Err(Error::Io(e)),
                Err(e) => eprintln!("warning: final snapshot skipped: {e}"),
            }
        }
    }
    if skipped_records > 0 {
        eprintln!("warning: {skipped_records} observation(s) were not recordable");
    }

    let series_rel = "series.csv";
    {
        let mut w = std::io::BufWriter::new(fs::File::create(out.join(series_rel))?);
        csvio::write_series(&mut w, &recorder.records)?;
        w.flush()?;
    }
    let plot_rel = "series_plot.gp";
    fs::write(out.join(plot_rel), SERIES_PLOT)?;
    let mut outputs = json!({
        "series": series_rel,
        "plot": plot_rel,
        "snapshots": snapshots
            .iter()
            .map(|(path, t)| json!({"path": path, "t": t}))
            .collect::<Vec<_>>(),
    });
    let plan_value = match &plan_opt {
        Some(plan) => {
            let rel = "plan.json";
            fs::write(out.join(rel), report::report_to_string(plan)?)?;
            outputs["plan"] = json!(rel);
            report::plan_to_report(plan)?
        }
        None => Value::Null,
    };

    let outcome = match &summary.outcome {
        RunOutcome::Completed => json!({"status": "completed", "time": summary.final_time}),
        RunOutcome::BlowUp(sig) => json!({
            "status": "blow_up",
            "time": sig.time,
            "x": sig.x,
            "kind": kind_str(sig.kind),
        }),
        RunOutcome::BoundaryBreach { time, x } => {
            json!({"status": "boundary_breach", "time": time, "x": x})
        }
    };
    let manifest = json!({
        "config": settings.echo(),
        "grid": {
            "x_min": grid.x_min,
            "x_max": grid.x_max,
            "n_cells": grid.n_cells,
            "dx": grid.dx,
        },
        "sigma_tilde": sigma,
        "plan": plan_value,
        "outputs": outputs,
        "outcome": outcome,
        "steps": summary.steps,
        "records": recorder.records.len(),
        "duration_seconds": t0.elapsed().as_secs_f64(),
    });
    write_manifest(out, &manifest)?;

    match &summary.outcome {
        RunOutcome::Completed => {
            println!(
                "run completed: t = {:.6}, steps = {}, records = {}",
                summary.final_time,
                summary.steps,
                recorder.records.len()
            );
            println!("wrote {}", out.join("manifest.json").display());
            Ok(ExitCode::SUCCESS)
        }
        RunOutcome::BlowUp(sig) => {
            println!(
                "blow-up detected: t = {:.6}, x = {:.3}, kind = {}",
                sig.time,
                sig.x,
                kind_str(sig.kind)
            );
            if let Some(plan) = &plan_opt {
                println!(
                    "breakdown deadline t* = {:.6}: {}",
                    plan.t_star,
                    if sig.time < plan.t_star {
                        "met"
                    } else {
                        "missed"
                    }
                );
            }
            println!("wrote {}", out.join("manifest.json").display());
            Ok(ExitCode::SUCCESS)
        }
        RunOutcome::BoundaryBreach { time, x } => {
            eprintln!(
                "boundary breach at t = {time:.6}, x = {x:.3}: the wave left the domain; \
                 enlarge x_half or the cone margin"
            );
            Ok(ExitCode::from(3))
        }
    }
}

// ============================================================================
// verify
// ============================================================================

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Parse(format!("manifest is missing key {key:?}")))
}

fn get_f64(v: &Value, key: &str) -> Result<f64> {
    get(v, key)?
        .as_f64()
        .ok_or_else(|| Error::Parse(format!("manifest key {key:?} is not a number")))
}

fn get_str<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    get(v, key)?
        .as_str()
        .ok_or_else(|| Error::Parse(format!("manifest key {key:?} is not a string")))
}

fn snapshot_field(dir: &Path, rel: &str, t: f64) -> Result<Field> {
    let text = fs::read_to_string(dir.join(rel))?;
    let (xs, states) = csvio::parse_snapshot(&text)?;
    if xs.len() < 2 {
        return Err(Error::Parse(format!(
            "snapshot {rel} has fewer than two cells"
        )));
    }
    let dx = xs[1] - xs[0];
    let grid = Grid::new(xs[0] - 0.5 * dx, xs[xs.len() - 1] + 0.5 * dx, xs.len())?;
    Ok(Field {
        grid,
        cells: states.into_iter().map(to_conservative).collect(),
        time: t,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let manifest_path = if args.path.is_dir() {
        args.path.join("manifest.json")
    } else {
        args.path.clone()
    };
    let dir = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(&manifest_path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", manifest_path.display()))
        })?)?;

    let cfgv = get(&manifest, "config")?;
    let params = ModelParams::new(
        get_f64(cfgv, "model.gamma")?,
        get_f64(cfgv, "model.tau")?,
        get_f64(cfgv, "model.rho_bar")?,
    )?;
    let eps_support = get_f64(cfgv, "diagnostics.eps_support")?;
    let grad_limit = get_f64(cfgv, "diagnostics.max_grad_limit")?;
    let outcome = get(&manifest, "outcome")?;
    let status = get_str(outcome, "status")?;
    if status == "inadmissible_plan" {
        println!("outcome: inadmissible_plan; nothing to verify");
        return Ok(ExitCode::from(1));
    }

    let gridv = get(&manifest, "grid")?;
    let dx = get_f64(gridv, "dx")?;
    let span = get_f64(gridv, "x_max")? - get_f64(gridv, "x_min")?;
    let sigma = get_f64(&manifest, "sigma_tilde")?;

    let plan = match get(&manifest, "plan")? {
        Value::Null => None,
        v => Some(report::report_to_plan(v)?),
    };
    // Planned runs take profile geometry from the plan; the config echo only
    // holds the pre-plan settings.
    let (r_data, m_halfwidth) = match (&plan, get_str(cfgv, "profile.mode")?) {
        (Some(p), _) => (p.r_support, p.m_halfwidth as f64),
        (None, "equilibrium") => (0.0, 0.0),
        (None, _) => (get_f64(cfgv, "profile.R")?, get_f64(cfgv, "profile.M")?),
    };

    let outputs = get(&manifest, "outputs")?;
    let series_text = fs::read_to_string(dir.join(get_str(outputs, "series")?))?;
    let records = csvio::parse_series(&series_text)?;

    let mut reports: Vec<CheckReport> = Vec::new();
    reports.push(conservation_check(&records, params.rho_bar * span));
    reports.push(entropy_budget_check(&records));
    reports.push(cone_check(&records, r_data, m_halfwidth, sigma, dx));
    match &plan {
        Some(p) => {
            let env = p.envelope_params();
            reports.push(s2_bound_check(&records, p.h0, p.rho_max, p.norm_sq));
            reports.push(envelope_check(&records, &env, grad_limit));
            reports.push(apriori_check(&records, &env, grad_limit));
            if status == "blow_up" {
                let t_trip = get_f64(outcome, "time")?;
                let margin = (p.t_star - t_trip) / p.t_star;
                let detail = format!("trip t = {t_trip:.6e} vs deadline t* = {:.6e}", p.t_star);
                reports.push(if t_trip < p.t_star {
                    CheckReport::pass("breakdown_deadline", margin, detail)
                } else {
                    CheckReport::fail("breakdown_deadline", margin, detail)
                });
            } else {
                reports.push(CheckReport::not_applicable(
                    "breakdown_deadline",
                    format!("outcome is {status}, no trip time to compare"),
                ));
            }
        }
        None => {
            for name in [
                "s2_bound",
                "riccati_envelope",
                "apriori",
                "breakdown_deadline",
            ] {
                reports.push(CheckReport::not_applicable(
                    name,
                    "needs a planned run".to_string(),
                ));
            }
        }
    }

    for snap in get(outputs, "snapshots")?
        .as_array()
        .ok_or_else(|| Error::Parse("outputs.snapshots is not an array".to_string()))?
    {
        let rel = get_str(snap, "path")?;
        let t = get_f64(snap, "t")?;
        let bt = r_data.max(m_halfwidth) + sigma * t;
        match snapshot_field(&dir, rel, t) {
            Ok(field) => {
                let mass_dev = match measure(&field, &params, eps_support, 0.0) {
                    Ok(rec) => rec.mass_dev,
                    Err(e) => {
                        reports.push(CheckReport::fail("snapshot", 0.0, format!("[{rel}] {e}")));
                        continue;
                    }
                };
                for check in [
                    holder_check(&field, bt),
                    jensen_check(&field, &params, bt, mass_dev),
                ] {
                    reports.push(match check {
                        Ok(mut r) => {
                            r.detail = format!("[{rel}] {}", r.detail);
                            r
                        }
                        Err(e) => CheckReport::fail("snapshot", 0.0, format!("[{rel}] {e}")),
                    });
                }
            }
            Err(e) => reports.push(CheckReport::fail("snapshot", 0.0, format!("[{rel}] {e}"))),
        }
    }

    println!("{:<20} {:>6} {:>12}  detail", "check", "status", "margin");
    for r in &reports {
        let status = if !r.applicable {
            "SKIP"
        } else if r.passed {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "{:<20} {:>6} {:>12.4e}  {}",
            r.name, status, r.worst_margin, r.detail
        );
    }
    let failed = reports.iter().filter(|r| r.applicable && !r.passed).count();
    if failed == 0 {
        println!(
            "verify: all applicable checks passed ({} reports)",
            reports.len()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verify: {failed} check(s) FAILED");
        Ok(ExitCode::from(1))
    }
}

// ============================================================================
// profile
// ============================================================================

const PROFILE_PLOT: &str = "\
# Initial velocity profile.
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 1000,500
set output 'profile.png'
set xlabel 'x'
plot 'profile.csv' using 1:2 with lines title 'u0'
";

fn cmd_profile(args: &ProfileArgs) -> Result<ExitCode> {
    let spec = ProfileSpec::new(args.l_amp, args.m_halfwidth, 0.0)?;
    let variant = match &args.variant {
        Some(v) => config::parse_variant(v)?,
        None => ProfileVariant::Corrected,
    };
    if !(args.step > 0.0) || !args.step.is_finite() {
        return Err(Error::config(format!(
            "step must be positive, got {}",
            args.step
        )));
    }
    let m = spec.m();
    let n = (2.0 * m / args.step).round() as usize;
    fs::create_dir_all(&args.out)?;
    let path = args.out.join("profile.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "x,u")?;
    for i in 0..=n {
        let x = -m + i as f64 * args.step;
        writeln!(
            w,
            "{},{}",
            csvio::fmt(x),
            csvio::fmt(velocity_profile(&spec, variant, x))
        )?;
    }
    w.flush()?;
    fs::write(args.out.join("profile_plot.gp"), PROFILE_PLOT)?;
    println!(
        "profile: L = {}, M = {}, rows = {}",
        args.l_amp,
        args.m_halfwidth,
        n + 1
    );
    println!(
        "norm_sq = {:.12e} (coarse bound 2 L^2 M = {:.12e})",
        profile_norm_sq(&spec),
        2.0 * args.l_amp * args.l_amp * m
    );
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}
