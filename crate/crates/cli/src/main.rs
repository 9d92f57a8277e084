//! `phasefront`: reduction reports, wave profiles, simulations and the
//! model comparison matrix, written as CSV/JSON into an output directory.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use phasefront_core::analysis::{
    comparison_matrix, measure_speed, predicted_speed, write_comparison_csv, write_trajectory_csv,
    AnalysisError, CompareConfig, RunSetup,
};
use phasefront_core::pde_sim::SimWarning;
use phasefront_core::profile::{
    decay_rates_in, existence_gate, solve_profile, speed_for_forcing, DecayWindow,
    GateClause,
};
use phasefront_core::tensor_reduction::{check_a1, check_a2, jump_w, reduce, validate};
use phasefront_core::{
    init_from_profile, run, DoubleWell, ModelKind, PotentialSpec, ProfileError, ReductionError,
    SimError, SimParams, SimState,
};

use config::{require, ConfigError, RawConfig};

#[derive(Parser, Debug)]
#[command(name = "phasefront", version, about = "Phase-field front experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce an elastic system to the scalar coefficients.
    Reduce,
    /// Solve the connecting profile and fit its tail decay.
    Profile,
    /// Run one model and record snapshots, trajectory and speed.
    Simulate,
    /// Run the model × forcing comparison matrix.
    Compare,
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    dx: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long = "L", global = true, value_name = "L")]
    l: Option<f64>,
    #[arg(long, global = true)]
    t_end: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, global = true)]
    model: Option<ModelKind>,
    #[arg(long, global = true)]
    potential: Option<String>,
    #[arg(long, global = true)]
    delta: Option<f64>,
}

/// Existence conditions failed; exit code 3.
#[derive(Debug)]
struct GateFailed(String);

impl std::fmt::Display for GateFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no connecting wave: {}", self.0)
    }
}

impl std::error::Error for GateFailed {}

/// Elastic system rejected by validation; exit code 2.
#[derive(Debug)]
struct InvalidSystem;

impl std::fmt::Display for InvalidSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid elastic system")
    }
}

impl std::error::Error for InvalidSystem {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() || cause.is::<InvalidSystem>() || cause.is::<ReductionError>() {
            return 2;
        }
        if cause.is::<GateFailed>() {
            return 3;
        }
        if let Some(ProfileError::UnequalWells { .. }) = cause.downcast_ref::<ProfileError>() {
            return 3;
        }
        if let Some(SimError::Blowup { .. } | SimError::Unstable { .. }) = cause.downcast_ref::<SimError>() {
            return 4;
        }
        if let Some(AnalysisError::Sim(SimError::Blowup { .. } | SimError::Unstable { .. })) =
            cause.downcast_ref::<AnalysisError>()
        {
            return 4;
        }
    }
    1
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut raw = match &cli.flags.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    apply_flags(&mut raw, &cli.flags, &cli.command);
    raw.check()?;
    fs::create_dir_all(&cli.flags.out)
        .with_context(|| format!("creating {}", cli.flags.out.display()))?;
    let out = cli.flags.out.as_path();
    match cli.command {
        Command::Reduce => cmd_reduce(&raw, out),
        Command::Profile => cmd_profile(&raw, out),
        Command::Simulate => cmd_simulate(&raw, out),
        Command::Compare => cmd_compare(&raw, out),
    }
}

fn apply_flags(raw: &mut RawConfig, flags: &Flags, command: &Command) {
    let compare = matches!(command, Command::Compare);
    if let Some(mu) = flags.mu {
        raw.clear(&["alpha", "beta", "t11", "mus"]);
        raw.set(if compare { "mus" } else { "mu" }, mu);
    }
    if let Some(m) = flags.model {
        raw.clear(&["bc", "models"]);
        raw.set(if compare { "models" } else { "model" }, m);
    }
    if let Some(p) = &flags.potential {
        raw.clear(&["poly"]);
        raw.set("potential", p);
    }
    if let Some(j) = flags.jobs {
        raw.set("jobs", j);
    }
    if let Some(d) = flags.delta {
        raw.set("delta", d);
    }
    if let Some(dt) = flags.dt {
        raw.set("dt", dt);
    }
    let grid = [("L", flags.l), ("dx", flags.dx), ("t_end", flags.t_end)];
    for (key, value) in grid {
        let Some(value) = value else { continue };
        if compare {
            raw.set(&format!("ac_{key}"), value);
            raw.set(&format!("ch_{key}"), value);
        } else {
            raw.set(key, value);
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn build_well(raw: &RawConfig) -> Result<(PotentialSpec, DoubleWell)> {
    let spec = raw.potential()?;
    let well = spec.build().with_context(|| format!("building potential `{spec}`"))?;
    Ok((spec, well))
}

/// Forcing from `mu`, from `alpha`/`beta` with `t11`, or from the elastic
/// system with `t11`. Defaults to 0.
fn resolve_mu(raw: &RawConfig) -> Result<f64> {
    if let Some(mu) = raw.f64("mu")? {
        return Ok(mu);
    }
    if raw.has("alpha") || raw.has("beta") {
        let alpha = raw.f64("alpha")?.unwrap_or(0.0);
        let beta = raw.f64("beta")?.unwrap_or(0.0);
        let t11 = if alpha != 0.0 { require(raw.f64("t11")?, "t11")? } else { 0.0 };
        return Ok(alpha * t11 + beta);
    }
    if let Some(system) = raw.elastic()? {
        let report = validate(&system);
        if !report.valid {
            eprintln!("{}", serde_json::to_string_pretty(&report)?);
            bail!(InvalidSystem);
        }
        let t11 = require(raw.f64("t11")?, "t11")?;
        return Ok(reduce(&system)?.mu(t11));
    }
    Ok(0.0)
}

fn cmd_reduce(raw: &RawConfig, out: &Path) -> Result<()> {
    let system = require(raw.elastic()?, "n, D, eps1")?;
    let (_, well) = build_well(raw)?;
    let report = validate(&system);
    if !report.valid {
        eprintln!("{}", serde_json::to_string_pretty(&report)?);
        bail!(InvalidSystem);
    }
    let coeffs = reduce(&system)?;
    let a1 = check_a1(&system);
    let a1_max = a1.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let a2 = check_a2(&system);
    let tol = phasefront_core::tensor_reduction::RESIDUAL_TOL;
    let mut doc = json!({
        "valid": report.valid,
        "c": report.c,
        "a1_residual": a1,
        "a2_residual": a2,
        "a1_failed": a1_max > tol,
        "a2_failed": a2.abs() > tol,
        "alpha": coeffs.alpha,
        "beta": coeffs.beta,
        "gamma": coeffs.gamma,
        "jump_w": jump_w(&system, well.v_minus, well.v_plus)?,
    });
    if let Some(t11) = raw.f64("t11")? {
        doc["t11"] = json!(t11);
        doc["mu"] = json!(coeffs.mu(t11));
    }
    write_json(out, "reduction.json", &doc)
}

fn gate_message(failures: &[GateClause]) -> String {
    failures
        .iter()
        .map(|c| match c {
            GateClause::UnequalWells { gap } => format!("unequal wells, gap {gap}"),
            GateClause::NonzeroForcing { mu } => format!("classic Allen-Cahn with forcing {mu}"),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn cmd_profile(raw: &RawConfig, out: &Path) -> Result<()> {
    let (spec, well) = build_well(raw)?;
    let model = raw.model()?.unwrap_or(ModelKind::ModifiedAC);
    let mu = resolve_mu(raw)?;
    let gate = existence_gate(&well, mu, model);
    if !gate.passed {
        bail!(GateFailed(gate_message(&gate.failures)));
    }
    // algebraic tails need a much longer half-line to reach the fit window
    let default_hw = if well.m1 > 1 || well.m2 > 1 { 100.0 } else { 20.0 };
    let hw = raw.positive("profile_half_width")?.unwrap_or(default_hw);
    let dx = raw.positive("profile_dx")?.unwrap_or(1e-3);
    let window = DecayWindow {
        lo: raw.positive("decay_lo")?.unwrap_or(DecayWindow::default().lo),
        hi: raw.positive("decay_hi")?.unwrap_or(DecayWindow::default().hi),
    };
    let conservation = model.conservation();
    let s = speed_for_forcing(mu, &well, conservation)?;
    let profile = solve_profile(&well, hw, dx, conservation)?.with_speed(s);

    let mut w = create(out, "profile.csv")?;
    profile.write_csv(&mut w)?;
    w.flush()?;
    let (plus, minus) = decay_rates_in(&profile, &well, window)?;
    write_json(out, "decay.json", &serde_json::to_value([plus, minus])?)?;

    let manifest = json!({
        "model": model.name(),
        "mu": mu,
        "potential": spec.to_string(),
        "profile_half_width": hw,
        "profile_dx": dx,
        "decay_lo": window.lo,
        "decay_hi": window.hi,
    });
    write_json(out, "manifest.json", &manifest)
}

fn cmd_simulate(raw: &RawConfig, out: &Path) -> Result<()> {
    let (spec, well) = build_well(raw)?;
    let model = raw.model()?.unwrap_or(ModelKind::ModifiedAC);
    let mu = if model.is_conserved() { 0.0 } else { resolve_mu(raw)? };
    let defaults = CompareConfig::standard(well.clone()).setup_for(model);
    let l = raw.positive("L")?.unwrap_or(defaults.l);
    let dx = raw.positive("dx")?.unwrap_or(defaults.dx);
    let t_end = raw.positive("t_end")?.unwrap_or(defaults.t_end);
    let snapshot_every = raw.positive("snapshot_every")?.unwrap_or(defaults.snapshot_every);
    let delta = raw.f64("delta")?.unwrap_or(0.0);
    let seed = raw.u64("seed")?.unwrap_or(0);
    let perturb = raw.f64("perturb")?.unwrap_or(0.0);
    let hw = raw.positive("profile_half_width")?.unwrap_or(l.min(10.0));
    let profile_dx = raw.positive("profile_dx")?.unwrap_or(1e-3);

    let mut params = SimParams::new(model, mu, l, dx).with_delta(delta);
    params.dt = raw.positive("dt")?;

    let (state, profile) = if well.equal_wells() {
        let profile = solve_profile(&well, hw, profile_dx, model.conservation())?;
        (init_from_profile(&profile, &well, &params)?, Some(profile))
    } else {
        let (vm, vp) = (well.v_minus, well.v_plus);
        let s = SimState::from_fn(&well, &params, |x| {
            0.5 * (vm + vp) + 0.5 * (vp - vm) * (x / 2f64.sqrt()).tanh()
        })?;
        (s, None)
    };
    for warning in &state.warnings {
        let SimWarning::DomainTooWide { profile_half_width, l } = warning;
        eprintln!("warning: profile half width {profile_half_width} < L = {l}; padded with well values");
    }
    let state = if perturb != 0.0 { state.perturbed(seed, perturb) } else { state };
    let trajectory = run(&state, t_end, snapshot_every)?;

    let mut w = create(out, "snapshots.csv")?;
    trajectory.write_snapshots_csv(&mut w)?;
    w.flush()?;
    let mut w = create(out, "trajectory.csv")?;
    write_trajectory_csv(&trajectory, well.v_star, &mut w)?;
    w.flush()?;

    let predicted = predicted_speed(&well, model, mu);
    let speed = match measure_speed(&trajectory, well.v_star, predicted) {
        Ok(fit) => serde_json::to_value(fit)?,
        Err(e) => json!({ "error": e.to_string(), "s_predicted": predicted }),
    };
    write_json(out, "speed.json", &speed)?;

    let manifest = json!({
        "model": model.name(),
        "mu": mu,
        "dx": dx,
        "dt": state.dt,
        "L": l,
        "t_end": t_end,
        "bc": state.bc.tag(),
        "potential": spec.to_string(),
        "seed": seed,
        "perturb": perturb,
        "snapshot_every": snapshot_every,
        "delta": delta,
        "profile_half_width": profile.as_ref().map(|p| p.half_width()).unwrap_or(hw),
        "profile_dx": profile_dx,
    });
    write_json(out, "manifest.json", &manifest)
}

fn run_setup(raw: &RawConfig, prefix: &str, base: RunSetup) -> Result<RunSetup> {
    Ok(RunSetup {
        l: raw.positive(&format!("{prefix}_L"))?.unwrap_or(base.l),
        dx: raw.positive(&format!("{prefix}_dx"))?.unwrap_or(base.dx),
        t_end: raw.positive(&format!("{prefix}_t_end"))?.unwrap_or(base.t_end),
        snapshot_every: raw.positive("snapshot_every")?.unwrap_or(base.snapshot_every),
        dt: raw.positive("dt")?.or(base.dt),
    })
}

fn cmd_compare(raw: &RawConfig, out: &Path) -> Result<()> {
    let (spec, well) = build_well(raw)?;
    let mut cfg = CompareConfig::standard(well);
    if let Some(models) = raw.models()? {
        cfg.models = models;
    }
    if let Some(mus) = raw.list("mus")? {
        cfg.mus = mus;
    }
    cfg.ac = run_setup(raw, "ac", cfg.ac)?;
    cfg.ch = run_setup(raw, "ch", cfg.ch)?;
    cfg.profile_half_width = raw.positive("profile_half_width")?.unwrap_or(cfg.profile_half_width);
    cfg.profile_dx = raw.positive("profile_dx")?.unwrap_or(cfg.profile_dx);
    cfg.delta = raw.f64("delta")?.unwrap_or(0.0);
    cfg.jobs = raw.u64("jobs")?.unwrap_or(0) as usize;

    let rows = comparison_matrix(&cfg)?;
    let mut w = create(out, "comparison.csv")?;
    write_comparison_csv(&rows, &mut w)?;
    w.flush()?;

    let mut manifest = Map::new();
    manifest.insert("potential".into(), json!(spec.to_string()));
    manifest.insert(
        "models".into(),
        json!(cfg.models.iter().map(|m| m.name()).collect::<Vec<_>>()),
    );
    manifest.insert("mus".into(), json!(cfg.mus));
    for (prefix, setup) in [("ac", cfg.ac), ("ch", cfg.ch)] {
        manifest.insert(format!("{prefix}_L"), json!(setup.l));
        manifest.insert(format!("{prefix}_dx"), json!(setup.dx));
        manifest.insert(format!("{prefix}_t_end"), json!(setup.t_end));
    }
    manifest.insert("snapshot_every".into(), json!(cfg.ac.snapshot_every));
    if let Some(dt) = cfg.ac.dt {
        manifest.insert("dt".into(), json!(dt));
    }
    manifest.insert("profile_half_width".into(), json!(cfg.profile_half_width));
    manifest.insert("profile_dx".into(), json!(cfg.profile_dx));
    manifest.insert("delta".into(), json!(cfg.delta));
    write_json(out, "manifest.json", &Value::Object(manifest))
}
