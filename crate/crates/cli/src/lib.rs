//! `stochdim` command-line runner.
//!
//! Exit codes: 0 success, 1 a requested test or verification failed, 2 bad
//! command line or configuration, 3 any other runtime error.

pub mod config;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use stochdim_core::io::{self, IoError, PathCsvWriter};
use stochdim_core::martingale::deflation_note;
use stochdim_core::{
    admissibility_from_inf, build_piecewise_deflator, dissect_path, integrate_dissected, integrate_schedule,
    martingale_test, reassemble, refine_resets, reset_levels, simulate_scenario, simulate_strict_local_mart_scenario,
    validate_path, wealth_process, AdmissibilityReport, CheckpointSamples, MartingaleTestReport, PiecewisePath,
    Scenario, TestMode,
};

use config::{RunConfig, TestKind};

pub const WORKERS_ENV: &str = "STOCHDIM_WORKERS";
const CHUNK: usize = 2048;

#[derive(Debug)]
pub enum CliError {
    /// Bad command line or configuration.
    Config(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        runtime(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "stochdim", version, about = "Markets whose number of assets changes over time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub scenarios: Option<usize>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// z level for the martingale tests.
    #[arg(long, global = true)]
    pub z: Option<f64>,
    /// Input path CSV.
    #[arg(long, global = true)]
    pub paths: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Generate scenarios and write `paths.csv`.
    Simulate,
    /// Cut paths into fixed-dimension pieces and write `dissected.csv`.
    Dissect,
    /// Integrate the strategy and write `gains.csv` (and `wealth.csv`).
    Integrate,
    /// Check path invariants on a path CSV.
    Verify,
    /// Run martingale, deflator and admissibility tests.
    Test,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Dissect => "dissect",
            Command::Integrate => "integrate",
            Command::Verify => "verify",
            Command::Test => "test",
        }
    }
}

pub enum Outcome {
    Passed,
    Failed,
}

/// Parse `args` (program name first) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match worker_pool() {
        Ok(pool) => pool.install(|| execute(&cli)),
        Err(e) => Err(e),
    };
    match result {
        Ok(Outcome::Passed) => 0,
        Ok(Outcome::Failed) => 1,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Config(_) => 2,
                CliError::Runtime(_) => 3,
            }
        }
    }
}

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(runtime)
}

/// Config file plus command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.scenarios.is_some() {
        cfg.n_scenarios = cli.scenarios;
    }
    if let Some(z) = cli.z {
        cfg.test.z = z;
    }
    if cli.paths.is_some() {
        cfg.paths = cli.paths.clone();
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    cfg.resolve()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = resolve_config(cli)?;
    let hash = cfg.hash();
    let seed = cfg.effective_seed().map_or("none".to_string(), |s| s.to_string());
    log::info!("{}: config sha256 {hash}, seed {seed}", cli.command.name());
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)?;
    let ctx = Ctx { cfg: &cfg, hash, out, command: cli.command };
    match cli.command {
        Command::Simulate => simulate(&ctx),
        Command::Dissect => dissect(&ctx),
        Command::Integrate => integrate(&ctx),
        Command::Verify => verify(&ctx),
        Command::Test => test(&ctx),
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    hash: String,
    out: PathBuf,
    command: Command,
}

impl Ctx<'_> {
    fn create(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.out.join(name);
        Ok(BufWriter::new(File::create(&p).map_err(|e| runtime(format!("{}: {e}", p.display())))?))
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(runtime)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn run_record(&self, n: usize, outputs: &[&str], extra: serde_json::Value) -> Result<(), CliError> {
        let mut v = json!({
            "command": self.command.name(),
            "config_sha256": self.hash,
            "seed": self.cfg.effective_seed(),
            "n_scenarios": n,
            "outputs": outputs,
            "version": env!("CARGO_PKG_VERSION"),
        });
        if let (Some(o), serde_json::Value::Object(e)) = (v.as_object_mut(), extra) {
            o.extend(e);
        }
        self.write_json("run.json", &v)
    }
}

/// One scenario as seen by the commands.
struct Item {
    id: u64,
    path: PiecewisePath,
    scenario: Option<Scenario>,
    /// Overshoot and unresolved flag of the strict local martingale example.
    overshoot: Option<(f64, bool)>,
}

enum Source {
    Market(stochdim_core::MarketSpec),
    Example(stochdim_core::StrictLocalMartSpec),
    Csv(Vec<(u64, PiecewisePath)>),
}

impl Source {
    fn from_config(cfg: &RunConfig, prefer_csv: bool) -> Result<Self, CliError> {
        if prefer_csv {
            if let Some(p) = &cfg.paths {
                let f = File::open(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
                return Ok(Source::Csv(io::read_paths(std::io::BufReader::new(f))?));
            }
        }
        match (&cfg.market, &cfg.example) {
            (Some(m), _) => Ok(Source::Market(m.clone())),
            (None, Some(e)) => Ok(Source::Example(e.clone())),
            (None, None) if prefer_csv => {
                Err(CliError::Config("need `paths` (or --paths), `market` or `example`".into()))
            }
            (None, None) => Err(CliError::Config("need `market` or `example` in the config".into())),
        }
    }

    fn len(&self) -> usize {
        match self {
            Source::Market(m) => m.n_scenarios,
            Source::Example(e) => e.n_scenarios,
            Source::Csv(v) => v.len(),
        }
    }

    fn item(&self, j: usize) -> Result<Item, CliError> {
        let id = j as u64;
        match self {
            Source::Market(m) => {
                let s = simulate_scenario(m, id).map_err(runtime)?;
                Ok(Item { id, path: s.path.clone(), scenario: Some(s), overshoot: None })
            }
            Source::Example(e) => {
                let s = simulate_strict_local_mart_scenario(e, id).map_err(runtime)?;
                Ok(Item { id, path: s.path, scenario: None, overshoot: Some((s.overshoot, s.truncated)) })
            }
            Source::Csv(v) => {
                let (id, p) = &v[j];
                Ok(Item { id: *id, path: p.clone(), scenario: None, overshoot: None })
            }
        }
    }

    /// Map every scenario in parallel and consume the results in order.
    fn for_each<T, F, C>(&self, f: F, mut consume: C) -> Result<(), CliError>
    where
        T: Send,
        F: Fn(Item) -> Result<T, CliError> + Sync,
        C: FnMut(T) -> Result<(), CliError>,
    {
        let n = self.len();
        let mut start = 0;
        while start < n {
            let end = (start + CHUNK).min(n);
            let batch: Vec<Result<T, CliError>> = (start..end).into_par_iter().map(|j| f(self.item(j)?)).collect();
            for r in batch {
                consume(r?)?;
            }
            start = end;
        }
        Ok(())
    }
}

fn simulate(ctx: &Ctx) -> Result<Outcome, CliError> {
    let source = Source::from_config(ctx.cfg, false)?;
    let mut w = PathCsvWriter::new(ctx.create("paths.csv")?)?;
    let mut max_overshoot: Option<f64> = None;
    let mut unresolved = 0usize;
    source.for_each(Ok, |item| {
        if let Some((o, truncated)) = item.overshoot {
            max_overshoot = Some(max_overshoot.map_or(o, |m: f64| m.max(o)));
            unresolved += usize::from(truncated);
        }
        w.write_path(item.id, &item.path).map_err(CliError::from)
    })?;
    w.finish()?.flush()?;
    let extra = match max_overshoot {
        Some(o) => json!({ "max_overshoot": o, "unresolved_paths": unresolved }),
        None => json!({}),
    };
    ctx.run_record(source.len(), &["paths.csv"], extra)?;
    Ok(Outcome::Passed)
}

fn dissect(ctx: &Ctx) -> Result<Outcome, CliError> {
    let source = Source::from_config(ctx.cfg, true)?;
    let mut w = io::dissected_writer(ctx.create("dissected.csv")?)?;
    let extra = &ctx.cfg.extra_resets;
    source.for_each(
        |item| {
            let resets = refine_resets(&item.path.minimal_resets(), extra, &item.path).map_err(runtime)?;
            let pieces = dissect_path(&item.path, &resets).map_err(runtime)?;
            Ok((item, pieces))
        },
        |(item, pieces)| io::write_dissected(&mut w, item.id, &item.path, &pieces).map_err(CliError::from),
    )?;
    w.flush()?;
    ctx.run_record(source.len(), &["dissected.csv"], json!({}))?;
    Ok(Outcome::Passed)
}

fn integrate(ctx: &Ctx) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    let source = Source::from_config(cfg, true)?;
    let strategy = cfg.strategy.build(cfg.seed_term)?;
    let v = cfg.initial_wealth;
    if v.is_some() && cfg.seed_term {
        return Err(CliError::Config("wealth needs H_0 = 0; drop `seed_term` or `initial_wealth`".into()));
    }
    let mut gains_out = io::gains_writer(ctx.create("gains.csv")?)?;
    let mut wealth_out = match v {
        Some(_) => Some(io::gains_writer(ctx.create("wealth.csv")?)?),
        None => None,
    };
    let mut inf = f64::INFINITY;
    let mut wealth_min = f64::INFINITY;
    source.for_each(
        |item| {
            let h = strategy.schedule(&item.path).map_err(runtime)?;
            let g = match v {
                Some(v) => wealth_process(v, &h, &item.path).map_err(runtime)?.gains().clone(),
                None => integrate_schedule(&h, &item.path).map_err(runtime)?,
            };
            Ok((item.id, g))
        },
        |(id, g)| {
            inf = inf.min(g.min());
            io::write_gains(&mut gains_out, id, &g)?;
            if let (Some(w), Some(v)) = (&mut wealth_out, v) {
                let wealth = g.shifted(v);
                wealth_min = wealth_min.min(wealth.min());
                io::write_gains(w, id, &wealth)?;
            }
            Ok(())
        },
    )?;
    gains_out.flush()?;
    let mut outputs = vec!["gains.csv"];
    if let (Some(mut w), Some(v)) = (wealth_out, v) {
        w.flush()?;
        outputs.extend(["wealth.csv", "wealth.json"]);
        ctx.write_json(
            "wealth.json",
            &json!({
                "v": v,
                "config_sha256": ctx.hash,
                "strategy": cfg.strategy,
                "min_wealth": wealth_min,
                "nonnegative": wealth_min >= 0.0,
            }),
        )?;
    }
    if let Some(a) = &cfg.admissibility {
        let report = admissibility_from_inf(source.len(), inf, a.c_claimed);
        log::info!("admissibility: {}", report.verdict);
        ctx.write_json("admissibility.json", &report)?;
        outputs.push("admissibility.json");
    }
    ctx.run_record(source.len(), &outputs, json!({ "seed_term": cfg.seed_term }))?;
    Ok(Outcome::Passed)
}

const REL_TOL: f64 = 1e-9;

/// Problems with one valid path beyond the record checks.
fn invariant_problems(path: &PiecewisePath, strategy: &stochdim_core::Strategy) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    let minimal = path.minimal_resets();
    let stored = path.stored_resets();
    let dense = path.dense();
    let scale = dense.values.iter().flat_map(|v| v.as_slice()).fold(1.0_f64, |m, x| m.max(x.abs()));
    for resets in [&minimal, &stored] {
        let pieces = dissect_path(path, resets).map_err(runtime)?;
        let back = reassemble(path.initial(), &pieces);
        for (i, (a, b)) in back.iter().zip(&dense.values).enumerate() {
            let far = a.dim() != b.dim()
                || a.as_slice().iter().zip(b.as_slice()).any(|(x, y)| (x - y).abs() > REL_TOL * scale);
            if far {
                out.push(format!("reassembly differs at t={}", path.grid().time(i)));
                break;
            }
        }
    }
    let h = strategy.schedule(path).map_err(runtime)?;
    let direct = integrate_schedule(&h, path).map_err(runtime)?;
    let dissected = integrate_dissected(&h, path, &stored).map_err(runtime)?;
    let gscale = direct.values().iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    if direct.values().iter().zip(dissected.values()).any(|(a, b)| (a - b).abs() > REL_TOL * gscale) {
        out.push("gains depend on the reset sequence".into());
    }
    for l in reset_levels(&h, path, &stored).map_err(runtime)? {
        if l.before != l.after {
            out.push(format!("gains not conserved at reset t={}: {} vs {}", l.time, l.before, l.after));
        }
    }
    Ok(out)
}

fn verify(ctx: &Ctx) -> Result<Outcome, CliError> {
    let file = ctx.cfg.paths.as_ref().ok_or_else(|| CliError::Config("verify needs `paths` or --paths".into()))?;
    let f = File::open(file).map_err(|e| runtime(format!("{}: {e}", file.display())))?;
    let records = match io::read_path_records(std::io::BufReader::new(f)) {
        Ok(r) => r,
        Err(e @ (IoError::Malformed { .. } | IoError::Header { .. })) => {
            println!("FAIL {}: {e}", file.display());
            return Ok(Outcome::Failed);
        }
        Err(e) => return Err(e.into()),
    };
    let strategy = ctx.cfg.strategy.build(false)?;
    let checked: Vec<(u64, Vec<String>)> = records
        .par_iter()
        .map(|(id, rec)| {
            let violations = validate_path(rec);
            if !violations.is_empty() {
                return Ok((*id, violations.iter().map(ToString::to_string).collect()));
            }
            let path = PiecewisePath::from_record(rec).map_err(runtime)?;
            Ok((*id, invariant_problems(&path, &strategy)?))
        })
        .collect::<Result<_, CliError>>()?;
    let mut bad = 0;
    let mut lines = Vec::new();
    for (id, problems) in &checked {
        if !problems.is_empty() {
            bad += 1;
        }
        for p in problems {
            lines.push(format!("scenario {id}: {p}"));
        }
    }
    for l in &lines {
        println!("{l}");
    }
    let verdict = if bad == 0 { "PASS" } else { "FAIL" };
    println!("{verdict}: {} scenario(s) checked, {bad} with violations", checked.len());
    ctx.write_json(
        "verify.json",
        &json!({
            "config_sha256": ctx.hash,
            "input": file.file_name().map(|f| f.to_string_lossy().into_owned()),
            "scenarios": checked.len(),
            "failed_scenarios": bad,
            "violations": lines,
        }),
    )?;
    Ok(if bad == 0 { Outcome::Passed } else { Outcome::Failed })
}

#[derive(Serialize)]
struct TestOutput<'a> {
    config_sha256: &'a str,
    seed: Option<u64>,
    n_scenarios: usize,
    v: f64,
    reports: Vec<MartingaleTestReport>,
    admissibility: Option<AdmissibilityReport>,
}

struct Rows {
    gains: Vec<f64>,
    wealth: Vec<f64>,
    z: Vec<f64>,
    zv: Vec<f64>,
    min_gains: f64,
    min_wealth: f64,
}

fn test(ctx: &Ctx) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    let source = Source::from_config(cfg, false)?;
    let horizon = match &source {
        Source::Market(m) => m.grid.horizon,
        Source::Example(e) => e.grid.horizon,
        Source::Csv(_) => unreachable!("csv input is not used by test"),
    };
    let checkpoints = match (&cfg.test.checkpoints, &source) {
        (Some(c), _) => c.clone(),
        (None, Source::Market(m)) => m.default_checkpoints(),
        (None, _) => vec![0.0, horizon],
    };
    let kinds = cfg
        .test
        .tests
        .clone()
        .unwrap_or_else(|| vec![TestKind::GainsMartingale, TestKind::Deflator, TestKind::DeflatedWealth]);
    let needs_z = kinds.iter().any(|k| matches!(k, TestKind::Deflator | TestKind::DeflatedWealth));
    let strategy = cfg.strategy.build(false)?;

    let first = source.item(0)?;
    let v = match cfg.initial_wealth {
        Some(v) => v,
        None => {
            let h = strategy.schedule(&first.path).map_err(runtime)?;
            h.intervals()[0].dot(first.path.initial()).map_err(runtime)?
        }
    };

    let mut rows: Vec<Rows> = Vec::with_capacity(source.len());
    source.for_each(
        |item| {
            let h = strategy.schedule(&item.path).map_err(runtime)?;
            let w = wealth_process(v, &h, &item.path).map_err(runtime)?;
            let z = match (&item.scenario, needs_z) {
                (Some(s), true) => Some(build_piecewise_deflator(s).map_err(|e| runtime(format!("scenario {}: {e}", item.id)))?),
                _ => None,
            };
            let mut r = Rows {
                gains: Vec::new(),
                wealth: Vec::new(),
                z: Vec::new(),
                zv: Vec::new(),
                min_gains: w.gains().min(),
                min_wealth: w.min(),
            };
            for &t in &checkpoints {
                let i = item.path.grid().locate(t).map_err(|e| CliError::Config(format!("checkpoint: {e}")))?;
                let g = w.gains().values()[i];
                let zi = z.as_ref().map_or(1.0, |z| z.at_index(i));
                r.gains.push(g);
                r.wealth.push(v + g);
                r.z.push(zi);
                r.zv.push(zi * (v + g));
            }
            Ok(r)
        },
        |r| {
            rows.push(r);
            Ok(())
        },
    )?;

    let nonnegative = rows.iter().all(|r| r.min_wealth >= 0.0);
    let mut reports = Vec::new();
    for k in &kinds {
        let (name, mode, pick): (&str, TestMode, fn(&Rows) -> &Vec<f64>) = match k {
            TestKind::GainsMartingale => ("H.X", TestMode::Martingale, |r| &r.gains),
            TestKind::GainsSupermartingale => ("H.X", TestMode::Supermartingale, |r| &r.gains),
            TestKind::WealthMartingale => ("V", TestMode::Martingale, |r| &r.wealth),
            TestKind::Deflator => ("Z", TestMode::Martingale, |r| &r.z),
            TestKind::DeflatedWealth => ("Z*V", TestMode::Supermartingale, |r| &r.zv),
        };
        let samples = CheckpointSamples::new(name, checkpoints.clone(), rows.iter().map(|r| pick(r).clone()).collect());
        let mut report = martingale_test(&samples, mode, cfg.test.z).map_err(|e| CliError::Config(format!("test: {e}")))?;
        if *k == TestKind::DeflatedWealth {
            report.note = deflation_note(1, nonnegative);
        }
        reports.push(report);
    }
    let admissibility = cfg.admissibility.as_ref().map(|a| {
        let inf = rows.iter().map(|r| r.min_gains).fold(f64::INFINITY, f64::min);
        admissibility_from_inf(rows.len(), inf, a.c_claimed)
    });

    let failed = reports.iter().any(|r| !r.passed)
        || matches!(admissibility.as_ref().map(|a| a.verdict), Some(stochdim_core::Admissibility::Violates { .. }));
    let output = TestOutput {
        config_sha256: &ctx.hash,
        seed: cfg.effective_seed(),
        n_scenarios: rows.len(),
        v,
        reports,
        admissibility,
    };
    ctx.write_json("report.json", &output)?;
    let seed = output.seed.map_or("none".to_string(), |s| s.to_string());
    let mut text = format!("config sha256 {}\nseed {seed}, v = {v}\n\n", ctx.hash);
    for r in &output.reports {
        text.push_str(&r.to_text());
        text.push('\n');
    }
    if let Some(a) = &output.admissibility {
        text.push_str(&format!("admissibility: {} (pathwise inf {})\n{}\n", a.verdict, a.pathwise_inf, a.note));
    }
    let mut w = ctx.create("report.txt")?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    print!("{text}");
    ctx.run_record(output.n_scenarios, &["report.json", "report.txt"], json!({}))?;
    Ok(if failed { Outcome::Failed } else { Outcome::Passed })
}

/// Directory holding the bundled fixtures.
pub fn fixtures_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}
