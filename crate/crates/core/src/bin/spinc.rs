//! Batch driver: algebra self-test, scenario verification, convergence
//! studies and reconstruction from dumped spinor fields.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on bad input.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spinc::config::{exit_code, parse_settings, RunConfig};
use spinc::export;
use spinc::pipeline::{
    algebra_suite, convergence, parse_connection, parse_spinor, reconstruct,
    verify_scenario, write_artifacts, AlgebraFault, Format,
};
use spinc::scenarios;
use spinc::weierstrass::rigid_align;
use spinc::Error;

#[derive(Parser)]
#[command(name = "spinc", version, about = "Spinorial representation of isometric immersions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized Clifford-algebra identity checks.
    VerifyAlgebra(AlgebraArgs),
    /// Immersion -> spinor -> 1-form -> reconstruction for one scenario.
    VerifyScenario(ScenarioArgs),
    /// Repeats verify-scenario on several grids and fits convergence orders.
    Convergence(ScenarioArgs),
    /// Rebuilds an immersion from a spinor dump.
    Reconstruct(ReconstructArgs),
}

#[derive(Args)]
struct Common {
    /// TOML settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifacts to write: obj, ply, json, csv (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    format: Vec<String>,
}

#[derive(Args)]
struct AlgebraArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Algebra dimensions, e.g. `2,3,4,5,6`.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

#[derive(Args)]
struct Tolerance {
    #[arg(long = "tol-algebra")]
    algebra: Option<f64>,
    #[arg(long = "tol-identity")]
    identity: Option<f64>,
    #[arg(long = "tol-floor")]
    floor: Option<f64>,
    #[arg(long = "tol-closedness")]
    closedness: Option<f64>,
    #[arg(long = "tol-killing")]
    killing: Option<f64>,
    #[arg(long = "tol-dxi")]
    dxi: Option<f64>,
    #[arg(long = "tol-metric")]
    metric: Option<f64>,
    #[arg(long = "tol-sff")]
    sff: Option<f64>,
    #[arg(long = "tol-normconn")]
    normconn: Option<f64>,
    #[arg(long = "tol-roundtrip")]
    roundtrip: Option<f64>,
    #[arg(long = "tol-path")]
    path: Option<f64>,
}

impl Tolerance {
    fn insert_into(&self, map: &mut BTreeMap<String, String>) {
        let entries = [
            ("algebra", self.algebra),
            ("identity", self.identity),
            ("floor", self.floor),
            ("closedness", self.closedness),
            ("killing", self.killing),
            ("dxi", self.dxi),
            ("metric", self.metric),
            ("sff", self.sff),
            ("normconn", self.normconn),
            ("roundtrip", self.roundtrip),
            ("path", self.path),
        ];
        for (k, v) in entries {
            if let Some(v) = v {
                map.insert(format!("tol.{k}"), v.to_string());
            }
        }
    }
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    tolerance: Tolerance,
    #[arg(long)]
    scenario: Option<String>,
    /// Nodes per axis: `N` or `NxM`.
    #[arg(long)]
    grid: Option<String>,
    /// Comma separated grids for convergence, e.g. `32,64,128`.
    #[arg(long)]
    grids: Option<String>,
    #[arg(long)]
    spacing: Option<f64>,
    /// none, const:THETA or uv.
    #[arg(long)]
    gauge: Option<String>,
    /// Rotate the first two normals by `T sin(x0) cos(x1)` (codimension >= 2).
    #[arg(long)]
    normal_twist: Option<f64>,
    /// Scenario parameter override, e.g. `radius=2`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    spinor: PathBuf,
    /// Chart coframe and U(1) connection dump; orthonormal chart when omitted.
    #[arg(long)]
    connection: Option<PathBuf>,
    /// Scenario to align the result against.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long = "tol-closedness")]
    closedness: Option<f64>,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn settings(common: &Common) -> Result<BTreeMap<String, String>, Error> {
    let mut map = match &common.config {
        Some(path) => parse_settings(&read(path)?)?,
        None => BTreeMap::new(),
    };
    if let Some(out) = &common.out {
        map.insert("out".into(), out.display().to_string());
    }
    if !common.format.is_empty() {
        map.insert("format".into(), common.format.join(","));
    }
    Ok(map)
}

fn print_json<T: serde::Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::Input(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

fn verdict(passed: bool, first_failure: Option<&str>) -> i32 {
    match first_failure {
        Some(name) if !passed => {
            eprintln!("FAIL: {name}");
            1
        }
        _ => 0,
    }
}

fn run_algebra(args: &AlgebraArgs) -> Result<i32, Error> {
    let mut map = settings(&args.common)?;
    if let Some(s) = args.seed {
        map.insert("seed".into(), s.to_string());
    }
    if let Some(t) = args.trials {
        map.insert("trials".into(), t.to_string());
    }
    if let Some(d) = &args.dims {
        map.insert("dims".into(), d.clone());
    }
    let config = RunConfig::from_map(&map)?;
    let fault = match args.inject_fault.as_deref() {
        None => None,
        Some("tau") => Some(AlgebraFault::BrokenTau),
        Some(other) => return Err(Error::Input(format!("unknown fault '{other}'"))),
    };
    if config.dims.contains(&1) {
        return Err(Error::Input("algebra suite needs dimensions of at least 2".into()));
    }
    let report = algebra_suite(config.seed, config.trials, &config.dims, fault)?;
    if let Some(dir) = &config.out {
        write_file(&dir.join("algebra_report.json"), &serde_json::to_string_pretty(&report).expect("serializes"))?;
    }
    print_json(&report);
    Ok(verdict(report.passed, report.first_failure.as_deref()))
}

fn scenario_map(args: &ScenarioArgs) -> Result<RunConfig, Error> {
    let mut map = settings(&args.common)?;
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            map.insert(k.into(), v);
        }
    };
    put("scenario", args.scenario.clone());
    put("grid", args.grid.clone());
    put("grids", args.grids.clone());
    put("spacing", args.spacing.map(|h| h.to_string()));
    put("gauge", args.gauge.clone());
    put("normal-twist", args.normal_twist.map(|t| t.to_string()));
    for p in &args.params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("--param expects KEY=VALUE, got '{p}'")))?;
        map.insert(format!("param.{}", k.trim()), v.trim().to_string());
    }
    args.tolerance.insert_into(&mut map);
    RunConfig::from_map(&map)
}

fn run_scenario(args: &ScenarioArgs) -> Result<i32, Error> {
    let config = scenario_map(args)?;
    let extents = config
        .grids
        .first()
        .ok_or_else(|| Error::Input("no grid given".into()))?;
    let run = verify_scenario(&config.scenario_config(extents)?)?;
    if let Some(dir) = &config.out {
        write_artifacts(&run, dir, &config.formats)?;
    }
    print_json(&run.summary);
    Ok(verdict(run.summary.passed, run.summary.first_failure.as_deref()))
}

fn run_convergence(args: &ScenarioArgs) -> Result<i32, Error> {
    let config = scenario_map(args)?;
    let base = config.scenario_config(&config.grids[0])?;
    let (report, summaries) = convergence(&base, &config.grids)?;
    if let Some(dir) = &config.out {
        write_file(&dir.join("convergence.json"), &serde_json::to_string_pretty(&report).expect("serializes"))?;
        for s in &summaries {
            let name = format!("summary_{}.json", s.grid.iter().map(usize::to_string).collect::<Vec<_>>().join("x"));
            write_file(&dir.join(name), &serde_json::to_string_pretty(s).expect("serializes"))?;
        }
    }
    print_json(&report);
    Ok(verdict(report.passed, report.first_failure.as_deref()))
}

fn run_reconstruct(args: &ReconstructArgs) -> Result<i32, Error> {
    let mut map = settings(&args.common)?;
    if let Some(c) = args.closedness {
        map.insert("tol.closedness".into(), c.to_string());
    }
    let config = RunConfig::from_map(&map)?;
    let spinor = parse_spinor(&read(&args.spinor)?)?;
    let connection = match &args.connection {
        Some(path) => Some(parse_connection(&read(path)?)?),
        None => None,
    };
    let rec = reconstruct(&spinor, connection.as_ref(), config.tolerances.closedness_threshold)?;
    let mut report = serde_json::json!({
        "grid": rec.grid.extents(),
        "ambient_dim": rec.ambient_dim,
        "closedness_max": rec.closedness_max,
        "path_discrepancy": rec.path_discrepancy,
    });
    if let Some(name) = &args.scenario {
        let scenario = scenarios::by_name(name)?;
        let reference = scenarios::sample(&scenario, &rec.grid)?;
        let fit = rigid_align(&rec.positions, reference.positions(), rec.ambient_dim)?;
        report["scenario"] = serde_json::json!(name);
        report["roundtrip_rms"] = serde_json::json!(fit.rms);
    }
    if let Some(out) = &config.out {
        let formats = if config.formats.is_empty() { vec![Format::Obj] } else { config.formats.clone() };
        for format in formats {
            let (ext, text) = match format {
                Format::Obj => ("obj", export::to_obj(&rec.grid, rec.ambient_dim, &rec.positions)),
                Format::Ply => ("ply", export::to_ply(&rec.grid, rec.ambient_dim, &rec.positions)),
                Format::Json => ("json", serde_json::to_string_pretty(&rec).expect("serializes")),
                Format::Csv => return Err(Error::Input("reconstruct exports obj, ply or json".into())),
            };
            let path = if out.extension().is_some_and(|e| e == ext) {
                out.clone()
            } else {
                out.join(format!("reconstruction.{ext}"))
            };
            write_file(&path, &text)?;
        }
    }
    print_json(&report);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::VerifyAlgebra(a) => run_algebra(a),
        Command::VerifyScenario(a) => run_scenario(a),
        Command::Convergence(a) => run_convergence(a),
        Command::Reconstruct(a) => run_reconstruct(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
