//! `hsft`: batch front end for the transform and the uncertainty checks.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage, configuration or I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::Deserialize;

use heisenberg_sft::checks::{self, Check, CheckConfig, CheckGrids, CheckReport, Tolerances};
use heisenberg_sft::fan::FanProfile;
use heisenberg_sft::hgroup::GridProfile;
use heisenberg_sft::sft::{forward_table, l1_envelope};
use heisenberg_sft::suite::{Resolution, TestFunction};
use heisenberg_sft::uncertainty::SetSampler;

#[derive(Parser, Debug)]
#[command(name = "hsft", version, about = "Fourier transform on the Heisenberg group and uncertainty checks")]
struct Cli {
    /// JSON run configuration (`"schema": "1"`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base resolution: `default_n1` or `reduced_n2`.
    #[arg(long, global = true)]
    profile: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Spectral table of one preset: CSV plus JSON sidecar.
    Transform {
        /// Preset name; defaults to the config's `function`, else `gauss`.
        #[arg(long)]
        function: Option<String>,
    },
    /// Run checks and write one JSON report each.
    Verify {
        /// Check name, or `all`.
        name: Option<String>,
        #[arg(long = "check")]
        checks: Vec<String>,
    },
    /// Seeded Donoho-Stark and chain sweep as an aggregate CSV.
    Sweep,
}

const SCHEMA: &str = "1";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    schema: String,
    profile: Option<String>,
    grid: Option<GridProfile>,
    fan: Option<FanProfile>,
    #[serde(rename = "L_w")]
    l_w: Option<f64>,
    #[serde(rename = "N_w")]
    n_w: Option<usize>,
    suite: Option<Vec<String>>,
    function: Option<String>,
    seed: Option<u64>,
    pairs: Option<usize>,
    trials: Option<usize>,
    sampler: Option<SetSampler>,
    tolerances: Option<Tolerances>,
    grids: Option<CheckGrids>,
    out: Option<PathBuf>,
}

/// Why the run stopped early; maps onto exit code 2.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

struct Setup {
    cfg: CheckConfig,
    function: Option<String>,
    out: PathBuf,
}

fn profile(name: &str) -> anyhow::Result<Resolution> {
    match name {
        "default_n1" => Ok(Resolution::default_n1()),
        "reduced_n2" => Ok(Resolution::reduced_n2()),
        _ => bail!("unknown profile '{name}' (expected default_n1 or reduced_n2)"),
    }
}

fn load(cli: &Cli) -> anyhow::Result<Setup> {
    let rc: RunConfig = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => RunConfig { schema: SCHEMA.into(), ..Default::default() },
    };
    if rc.schema != SCHEMA {
        bail!("unsupported config schema '{}' (expected \"{SCHEMA}\")", rc.schema);
    }
    let mut res = profile(cli.profile.as_deref().or(rc.profile.as_deref()).unwrap_or("default_n1"))?;
    if let Some(g) = rc.grid {
        res.grid = g;
    }
    if let Some(f) = rc.fan {
        res.fan = f;
    }
    if let Some(l) = rc.l_w {
        res.l_w = l;
    }
    if let Some(m) = rc.n_w {
        res.n_w = m;
    }
    let mut cfg = CheckConfig { resolution: res, ..Default::default() };
    if let Some(names) = &rc.suite {
        cfg.suite = names.iter().map(|s| TestFunction::from_name(s)).collect::<Result<_, _>>()?;
    }
    cfg.seed = cli.seed.or(rc.seed).unwrap_or(cfg.seed);
    cfg.pairs = rc.pairs.unwrap_or(cfg.pairs);
    cfg.trials = rc.trials.unwrap_or(cfg.trials);
    cfg.sampler = rc.sampler.unwrap_or(cfg.sampler);
    cfg.tolerances = rc.tolerances.unwrap_or(cfg.tolerances);
    cfg.grids = rc.grids.unwrap_or(cfg.grids);
    cfg.validate()?;
    let out = cli.out.clone().or(rc.out).unwrap_or_else(|| PathBuf::from("hsft-out"));
    Ok(Setup { cfg, function: rc.function, out })
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(path)
}

fn json_bytes<T: serde::Serialize>(v: &T) -> anyhow::Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn transform(s: &Setup, name: Option<&str>) -> anyhow::Result<bool> {
    let name = name.or(s.function.as_deref()).unwrap_or("gauss");
    let f = TestFunction::from_name(name).map_err(|e| ConfigError(e.into()))?;
    let r = &s.cfg.resolution;
    let field = f.sample(r.hgrid()?);
    let table = forward_table(&field, &r.fan_grid()?, &r.wgrid()?)?;
    let env = l1_envelope(&field, &table).ok();
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    let mut side = Vec::new();
    table.write_sidecar(&mut side, env)?;
    side.push(b'\n');
    let a = write_file(&s.out, &format!("transform_{name}.csv"), &csv)?;
    let b = write_file(&s.out, &format!("transform_{name}.json"), &side)?;
    println!("wrote {} and {} (max |F| = {:.6e})", a.display(), b.display(), table.max_abs());
    Ok(true)
}

fn print_report(r: &CheckReport) {
    println!(
        "{} {}: lhs={:.6e} rhs={:.6e} slack={}",
        if r.pass { "PASS" } else { "FAIL" },
        r.check.name(),
        r.lhs,
        r.rhs,
        r.slack
    );
    if let Some(n) = &r.note {
        println!("  note: {n}");
    }
}

fn verify(s: &Setup, names: &[String]) -> anyhow::Result<bool> {
    if names.is_empty() {
        return Err(ConfigError(anyhow::anyhow!("verify needs a check name or --check NAME")).into());
    }
    let mut list = Vec::new();
    for n in names {
        if n == "all" {
            list.extend(Check::ALL);
        } else {
            list.push(Check::from_name(n).map_err(|e| ConfigError(e.into()))?);
        }
    }
    let mut reports = Vec::new();
    for c in list {
        let r = checks::run(c, &s.cfg)?;
        print_report(&r);
        reports.push(r);
    }
    for r in &reports {
        write_file(&s.out, &format!("{}.json", r.check.name()), &json_bytes(r)?)?;
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn sweep(s: &Setup) -> anyhow::Result<bool> {
    let records = checks::sweep(&s.cfg, &s.cfg.resolution)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in &records {
        wtr.serialize(r)?;
    }
    let csv = wtr.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    let report = checks::donoho_report(&s.cfg, &records);
    let summary = serde_json::json!({
        "inputs": checks::sweep_inputs(&s.cfg),
        "cases": records.len(),
        "donoho_violations": records.iter().filter(|r| !r.ds_pass).count(),
        "chain_failures": records.iter().filter(|r| !r.chain_pass).count(),
    });
    let a = write_file(&s.out, "sweep.csv", &csv)?;
    write_file(&s.out, "sweep.json", &json_bytes(&summary)?)?;
    let pass = report.pass && records.iter().all(|r| r.chain_pass);
    println!("{} sweep: {} cases, wrote {}", if pass { "PASS" } else { "FAIL" }, records.len(), a.display());
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let setup = match load(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("hsft: configuration error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.cmd {
        Cmd::Transform { function } => transform(&setup, function.as_deref()),
        Cmd::Verify { name, checks } => {
            let names: Vec<String> = name.iter().cloned().chain(checks.iter().cloned()).collect();
            verify(&setup, &names)
        }
        Cmd::Sweep => sweep(&setup),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let kind = if e.is::<ConfigError>() { "configuration error" } else { "error" };
            eprintln!("hsft: {kind}: {e:#}");
            ExitCode::from(2)
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}
