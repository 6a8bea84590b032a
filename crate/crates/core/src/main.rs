use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use serde_json::{json, Value};

use kaclab::fock::build_kac_hamiltonian_with_cap;
use kaclab::game::{Game, GamePoint};
use kaclab::io::store::{
    fmt_f64, GAME_FILE, GAME_GRID_COLUMNS, GAME_GRID_FILE, GAP_COLUMNS, GAP_FILE,
    PRESSURE_ED_FILE, PRESSURE_MF_COLUMNS, PRESSURE_MF_FILE, SWEEP_FILE, SWEEP_MANIFEST,
};
use kaclab::io::{apply_tolerance_overrides, emit_plot_data, parse_config, ExperimentConfig, PlotKind, ResultStore};
use kaclab::lattice::LatticeBox;
use kaclab::potential::{cone_check, GridSpec};
use kaclab::quasifree::quasifree_moments;
use kaclab::selftest::run_selftest;
use kaclab::sweep::{limit_report, run_sweep, SweepRecord};
use kaclab::{KacError, Result};

#[derive(Parser, Debug)]
#[command(name = "kaclab", version, about = "Kac-limit and mean-field pressures of lattice fermions")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Comma-separated `name=value` tolerance overrides
    /// (quadrature, x_tol, tol_gap, degeneracy_window).
    #[arg(long, global = true)]
    tolerance_overrides: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,

    /// Result directory; falls back to `output_dir` in the config, then `kaclab_out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check declared potentials for positive definiteness and scaling monotonicity.
    ValidatePotential {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exact-diagonalization pressure of the Kac model for every box size.
    PressureEd(Common),
    /// Pressure of the approximating model at the configured game points.
    PressureMf(Common),
    /// Solve the two-player game for each β.
    Game {
        #[command(flatten)]
        common: Common,
        /// Also store the payoff surface.
        #[arg(long)]
        dump_grid: bool,
    },
    /// Solve the gap equations by damped iteration for each β.
    Gap(Common),
    /// Finite-volume pressures along the γ schedules, with limit reports.
    KacSweep(Common),
    /// Write plot-ready columns from a result directory.
    PlotData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
    },
    /// Run the built-in oracle checks.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn load(path: &Path, overrides: &Option<String>) -> Result<ExperimentConfig> {
    let mut cfg = parse_config(path)?;
    if let Some(spec) = overrides {
        apply_tolerance_overrides(&mut cfg, spec)?;
    }
    Ok(cfg)
}

fn store_for(common: &Common, cfg: &ExperimentConfig) -> Result<ResultStore> {
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("kaclab_out"));
    ResultStore::open(dir)
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json(v: &Value) {
    emit(&serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn to_json<S: serde::Serialize>(s: &S) -> Value {
    serde_json::to_value(s).unwrap_or(Value::Null)
}

fn validate_potential(cfg: &ExperimentConfig) -> Result<()> {
    let grid = GridSpec::<f64>::default();
    let mut out = serde_json::Map::new();
    for p in &cfg.potentials {
        let pot = p.build(cfg.dimension)?;
        out.insert(p.name.clone(), to_json(&cone_check(&pot, &grid)?));
    }
    print_json(&Value::Object(out));
    Ok(())
}

fn pressure_ed(cfg: &ExperimentConfig, store: &ResultStore) -> Result<()> {
    let hash = cfg.config_hash();
    let (gm, gp) = (cfg.gamma_minus_schedule[0], cfg.gamma_plus_schedule[0]);
    let mut records = Vec::new();
    for &beta in &cfg.betas {
        let mp = cfg.model_params(beta, gm, gp)?;
        for &l in &cfg.l_list {
            let start = std::time::Instant::now();
            let lbox = LatticeBox::new(cfg.dimension, l, cfg.boundary)?;
            let obs = build_kac_hamiltonian_with_cap(&mp, &lbox, cfg.dimension_cap)?
                .gibbs_observables(beta)?;
            records.push(SweepRecord {
                d: cfg.dimension,
                l,
                beta,
                gamma_minus: gm,
                gamma_plus: gp,
                boundary: cfg.boundary,
                pressure: obs.pressure,
                density: obs.density,
                runtime_ms: start.elapsed().as_millis() as u64,
                config_hash: hash.clone(),
            });
        }
    }
    store.append_records(PRESSURE_ED_FILE, &records)?;
    print_json(&to_json(&records));
    Ok(())
}

fn pressure_mf(cfg: &ExperimentConfig, store: &ResultStore) -> Result<()> {
    let hash = cfg.config_hash();
    let quad = cfg.quadrature_spec();
    let mut rows = Vec::new();
    let mut report = Vec::new();
    for &beta in &cfg.betas {
        let mf = cfg.mean_field(beta)?;
        for [cm, cp] in &cfg.game.points {
            let m = quasifree_moments(&mf, Complex::new(*cm, 0.0), Complex::new(*cp, 0.0), &quad)?;
            rows.push(vec![
                hash.clone(),
                fmt_f64(beta),
                fmt_f64(*cm),
                fmt_f64(*cp),
                fmt_f64(m.pressure),
                fmt_f64(m.density),
                fmt_f64(m.pair_amplitude.norm()),
            ]);
            report.push(json!({
                "beta": beta, "c_minus": cm, "c_plus": cp,
                "pressure": m.pressure, "density": m.density,
                "pair_amplitude": [m.pair_amplitude.re, m.pair_amplitude.im],
            }));
        }
    }
    store.append_rows(PRESSURE_MF_FILE, &PRESSURE_MF_COLUMNS, &rows, |r| r[..4].to_vec())?;
    print_json(&Value::Array(report));
    Ok(())
}

fn game(cfg: &ExperimentConfig, store: &ResultStore, dump_grid: bool) -> Result<()> {
    let hash = cfg.config_hash();
    let mut results = Vec::new();
    let mut grid_rows = Vec::new();
    for &beta in &cfg.betas {
        let mf = cfg.mean_field(beta)?;
        let (eta_plus, eta_minus) = (mf.eta_plus, mf.eta_minus);
        let g = Game::new(mf, cfg.quadrature_spec(), cfg.optimizer)?;
        let r = g.solve()?;
        results.push(json!({
            "beta": beta, "eta_plus": eta_plus, "eta_minus": eta_minus, "result": to_json(&r),
        }));
        if dump_grid {
            let grid = g.payoff_grid(cfg.game.grid[0], cfg.game.grid[1]);
            for (i, cm) in grid.c_minus.iter().enumerate() {
                for (j, cp) in grid.c_plus.iter().enumerate() {
                    grid_rows.push(vec![
                        hash.clone(),
                        fmt_f64(beta),
                        fmt_f64(*cm),
                        fmt_f64(*cp),
                        fmt_f64(grid.values[i][j]),
                    ]);
                }
            }
        }
    }
    store.record_run(GAME_FILE, &hash, Value::Array(results.clone()))?;
    if dump_grid {
        store.append_rows(GAME_GRID_FILE, &GAME_GRID_COLUMNS, &grid_rows, |r| r[..4].to_vec())?;
    }
    print_json(&Value::Array(results));
    Ok(())
}

fn gap(cfg: &ExperimentConfig, store: &ResultStore) -> Result<()> {
    let hash = cfg.config_hash();
    let mut rows = Vec::new();
    let mut report = Vec::new();
    for &beta in &cfg.betas {
        let g = Game::new(cfg.mean_field(beta)?, cfg.quadrature_spec(), cfg.optimizer)?;
        let (bm, bp) = g.search_box();
        let [sm, sp] = cfg.game.start.unwrap_or([0.5 * bm, 0.5 * bp]);
        let s = g.solve_gap_fixed_point(GamePoint::new(sm, sp), cfg.game.damping)?;
        rows.push(vec![
            hash.clone(),
            fmt_f64(beta),
            fmt_f64(s.c_minus),
            fmt_f64(s.c_plus),
            fmt_f64(s.residual),
            s.iterations.to_string(),
            s.converged.to_string(),
        ]);
        report.push(json!({ "beta": beta, "solution": to_json(&s) }));
    }
    store.append_rows(GAP_FILE, &GAP_COLUMNS, &rows, |r| r[..2].to_vec())?;
    print_json(&Value::Array(report));
    Ok(())
}

/// Returns true when some records could not be computed.
fn kac_sweep(cfg: &ExperimentConfig, store: &ResultStore) -> Result<bool> {
    let hash = cfg.config_hash();
    let mut any_failed = false;
    let mut runs = Vec::new();
    for &beta in &cfg.betas {
        let plan = cfg.sweep_plan(beta)?;
        let existing = store.read_sweep()?;
        let outcome = run_sweep(&plan, &hash, &existing, |r| {
            store.append_records(SWEEP_FILE, std::slice::from_ref(r)).map(|_| ())
        })?;
        any_failed |= !outcome.failures.is_empty();
        for f in &outcome.failures {
            log::error!("L={} γ₋={} γ₊={}: {}", f.l, f.gamma_minus, f.gamma_plus, f.error);
        }
        let game = Game::new(cfg.mean_field(beta)?, cfg.quadrature_spec(), cfg.optimizer)?.solve()?;
        let mut reports = Vec::new();
        for order in &plan.orders {
            match limit_report(&plan, &outcome.records, *order, &game) {
                Ok(r) => reports.push(to_json(&r)),
                Err(e) => reports.push(json!({ "order": order, "error": e.to_string() })),
            }
        }
        runs.push(json!({
            "beta": beta,
            "records": outcome.records.len(),
            "reused": outcome.reused,
            "failures": to_json(&outcome.failures),
            "p_sharp": game.p_sharp,
            "p_flat": game.p_flat,
            "reports": reports,
        }));
    }
    let entry = json!({
        "config": cfg.to_toml_string()?,
        "columns": kaclab::io::store::SWEEP_COLUMNS,
        "runs": runs,
    });
    store.record_run(SWEEP_MANIFEST, &hash, entry.clone())?;
    print_json(&entry["runs"]);
    Ok(any_failed)
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| KacError::config(format!("cannot start {n} threads: {e}")))?;
    }
    let ov = &cli.tolerance_overrides;
    match &cli.command {
        Command::ValidatePotential { config } => validate_potential(&load(config, ov)?)?,
        Command::PressureEd(c) => {
            let cfg = load(&c.config, ov)?;
            pressure_ed(&cfg, &store_for(c, &cfg)?)?
        }
        Command::PressureMf(c) => {
            let cfg = load(&c.config, ov)?;
            pressure_mf(&cfg, &store_for(c, &cfg)?)?
        }
        Command::Game { common, dump_grid } => {
            let cfg = load(&common.config, ov)?;
            game(&cfg, &store_for(common, &cfg)?, *dump_grid)?
        }
        Command::Gap(c) => {
            let cfg = load(&c.config, ov)?;
            gap(&cfg, &store_for(c, &cfg)?)?
        }
        Command::KacSweep(c) => {
            let cfg = load(&c.config, ov)?;
            if kac_sweep(&cfg, &store_for(c, &cfg)?)? {
                return Ok(ExitCode::from(4));
            }
        }
        Command::PlotData { out, kind } => {
            let files = emit_plot_data(*kind, &ResultStore::existing(out)?)?;
            emit(&format!("{} ({} rows)", files.data.display(), files.rows));
        }
        Command::Selftest { seed } => {
            let checks = run_selftest(*seed);
            for c in &checks {
                emit(&format!(
                    "{} {:<22} {:.3e} (tolerance {:.1e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                ));
            }
            if checks.iter().any(|c| !c.passed) {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kaclab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
