//! Command-line front end: case conversion/validation, PTDF and DCOPF
//! solves, best-attack construction, detection profiles, the NPDSB
//! detector, the residual-bypass demo, and seeded Monte-Carlo batches.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gridshield::attack::{
    alpha_min_deviation, attack_direction, attack_objective, find_alpha_min, greedy_best_attack,
    AlphaMinMode, AttackSpec, Direction, ALPHA_CAP_DEFAULT, ALPHA_STEP_DEFAULT,
};
use gridshield::dc::{compute_ptdf, solve_dcpf};
use gridshield::detector::{
    build_asset_profile, classify, parse_profile, serialize_profile, CUTOFF_DEFAULT,
    RATIO_THRESHOLD,
};
use gridshield::dispatch::solve_dcopf;
use gridshield::grid::{convert_matpower, parse_case, serialize_case};
use gridshield::scenario::{default_zeroed_count, monte_carlo, BatchConfig, NoiseKind};
use gridshield::se::{deviations_to_state_error, MeasurementModel};
use gridshield::{AssetProfile, GridCase, PtdfMatrix, SusceptanceSystem};

#[derive(Parser)]
#[command(name = "gridshield", version, about = "Load-redistribution attack and detection toolkit for DC grid models")]
struct Cli {
    /// Key=value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a MATPOWER-format .m case to the native case format.
    Convert(ConvertArgs),
    /// Check a case file for structural violations.
    Validate(ValidateArgs),
    /// Emit PTDF rows as CSV.
    Ptdf(PtdfArgs),
    /// Least-cost dispatch for a loads file.
    Dcopf(DcopfArgs),
    /// Best load-redistribution attack against one branch.
    Attack(AttackArgs),
    /// Build a detection profile for one branch.
    Profile(ProfileArgs),
    /// Screen estimated loads against profiles.
    Detect(DetectArgs),
    /// Show that a crafted attack vector leaves the estimation residual unchanged.
    BddDemo(BddDemoArgs),
    /// Seeded Monte-Carlo batch of attacks and noise through the full pipeline.
    Simulate(SimulateArgs),
    /// Summarize a simulate CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Scale all branch ratings by this factor.
    #[arg(long)]
    rating_scale: Option<f64>,
    /// Replace negative loads with zero.
    #[arg(long)]
    zero_negative_loads: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    case: PathBuf,
}

#[derive(Args)]
struct PtdfArgs {
    #[arg(long)]
    case: PathBuf,
    /// Branch selector (`id` or `from-to` bus ids); all branches if omitted.
    #[arg(long)]
    target: Option<String>,
    /// Reference bus id; the case reference if omitted.
    #[arg(long)]
    reference: Option<usize>,
    /// Output CSV path; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DcopfArgs {
    #[arg(long)]
    case: PathBuf,
    /// Loads CSV (`bus,load_mw`); case loads if omitted.
    #[arg(long)]
    loads: Option<PathBuf>,
    /// Dispatch CSV output path; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    /// Case file route: computes the PTDF row and direction internally.
    #[arg(long)]
    case: Option<PathBuf>,
    /// Branch selector (`id` or `from-to`); required with --case.
    #[arg(long)]
    target: Option<String>,
    /// Row route: CSV (`bus,ptdf`) with the target's PTDF row.
    #[arg(long)]
    ptdf_csv: Option<PathBuf>,
    /// Loads CSV; required with --ptdf-csv, defaults to case loads otherwise.
    #[arg(long)]
    loads: Option<PathBuf>,
    /// Attack direction `+` or `-`; required with --ptdf-csv.
    #[arg(long)]
    direction: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Deviations CSV output path; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    case: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    ptdf_csv: Option<PathBuf>,
    #[arg(long)]
    loads: Option<PathBuf>,
    #[arg(long)]
    direction: Option<String>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    alpha_cap: Option<f64>,
    /// Explicit minimum damaging shift factor; skips the search.
    #[arg(long)]
    alpha_min: Option<f64>,
    /// alpha_min search mode: `pipeline` or `deviation`.
    #[arg(long)]
    alpha_min_mode: Option<String>,
    /// Flow-deviation threshold in MW for deviation mode.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Profile output path; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// One or more profile files.
    #[arg(long, required = true)]
    profile: Vec<PathBuf>,
    /// Estimated loads CSV (`bus,load_mw`), paired with --forecast.
    #[arg(long)]
    estimated: Option<PathBuf>,
    #[arg(long)]
    forecast: Option<PathBuf>,
    /// Direct deviations CSV (`bus,delta_mw`) instead of estimated/forecast.
    #[arg(long)]
    deviations: Option<PathBuf>,
    #[arg(long)]
    ratio_threshold: Option<f64>,
}

#[derive(Args)]
struct BddDemoArgs {
    #[arg(long)]
    case: PathBuf,
    /// Deviations CSV (`bus,delta_mw`) to embed as a bypass vector.
    #[arg(long)]
    deviations: PathBuf,
    /// Gaussian measurement noise sigma in MW.
    #[arg(long)]
    noise_mw: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    case: PathBuf,
    /// Branch selector; required unless --profile is given.
    #[arg(long)]
    target: Option<String>,
    /// Prebuilt profile file; built on the fly if omitted.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    attacks: Option<usize>,
    #[arg(long)]
    noise: Option<usize>,
    /// `gaussian` or `cauchy`.
    #[arg(long)]
    noise_kind: Option<String>,
    /// Bound factor for noise vectors; alpha_cap if omitted.
    #[arg(long)]
    noise_alpha: Option<f64>,
    #[arg(long)]
    alpha_cap: Option<f64>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    alpha_min_mode: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Sensitive buses zeroed per attack; round(0.128*TNSB) if omitted.
    #[arg(long)]
    zeroed: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// A simulate CSV.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Grid(#[from] gridshield::grid::GridError),
    #[error("{0}")]
    Dc(#[from] gridshield::dc::DcError),
    #[error("{0}")]
    Dispatch(#[from] gridshield::dispatch::DispatchError),
    #[error("{0}")]
    Se(#[from] gridshield::se::SeError),
    #[error("{0}")]
    Profile(#[from] gridshield::detector::ProfileError),
    #[error("{0}")]
    Scenario(#[from] gridshield::scenario::ScenarioError),
    #[error("{0}")]
    Msg(String),
}

fn err(msg: impl Into<String>) -> CliError {
    CliError::Msg(msg.into())
}

/// Key=value config file plus the resolved-value echo each run emits.
struct Config {
    values: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl Config {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            for (i, line) in std::fs::read_to_string(path)?.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| err(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Self {
            values,
            echo: BTreeMap::new(),
        })
    }

    fn resolve<T: std::str::FromStr + std::fmt::Display + Copy>(
        &mut self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        let v = match flag {
            Some(v) => v,
            None => match self.values.get(key) {
                Some(s) => s
                    .parse()
                    .map_err(|_| err(format!("config key {key}: cannot parse {s:?}")))?,
                None => default,
            },
        };
        self.echo.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.echo.insert(key.to_string(), value.to_string());
    }

    fn print_echo(&self) {
        for (k, v) in &self.echo {
            eprintln!("config {k}={v}");
        }
    }
}

fn read_case(path: &Path) -> Result<GridCase, CliError> {
    Ok(parse_case(&std::fs::read_to_string(path)?)?)
}

/// Two-column CSV with a header row; returns (first, second) per data row.
fn read_csv2(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            if line.split(',').count() < 2 {
                return Err(err(format!("{}: expected a two-column CSV", path.display())));
            }
            continue;
        }
        let mut cols = line.split(',');
        let a = cols.next().unwrap_or("").trim().to_string();
        let b = cols
            .next()
            .ok_or_else(|| err(format!("{}:{}: missing second column", path.display(), i + 1)))?
            .trim()
            .to_string();
        rows.push((a, b));
    }
    Ok(rows)
}

/// `bus,value` CSV into (external bus id, value) pairs.
fn read_bus_values(path: &Path) -> Result<Vec<(usize, f64)>, CliError> {
    read_csv2(path)?
        .into_iter()
        .map(|(a, b)| {
            let bus = a
                .parse()
                .map_err(|_| err(format!("{}: bad bus id {a:?}", path.display())))?;
            let v = b
                .parse()
                .map_err(|_| err(format!("{}: bad value {b:?}", path.display())))?;
            Ok((bus, v))
        })
        .collect()
}

/// Per-bus vector in case order; unknown bus ids are rejected, absent buses
/// default to zero.
fn vector_for_case(case: &GridCase, pairs: &[(usize, f64)]) -> Result<Vec<f64>, CliError> {
    let mut v = vec![0.0; case.n_buses()];
    for &(id, val) in pairs {
        let i = case
            .bus_index(id)
            .ok_or_else(|| err(format!("unknown bus id {id}")))?;
        v[i] = val;
    }
    Ok(v)
}

/// Branch selector: a branch id, or `from-to` endpoint bus ids.
fn parse_target(case: &GridCase, sel: &str) -> Result<usize, CliError> {
    if let Some((a, b)) = sel.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| err(format!("bad target {sel:?}")))?;
        let b: usize = b.trim().parse().map_err(|_| err(format!("bad target {sel:?}")))?;
        case.branch_between(a, b)
            .ok_or_else(|| err(format!("no branch between buses {a} and {b}")))
    } else {
        let id: usize = sel.trim().parse().map_err(|_| err(format!("bad target {sel:?}")))?;
        case.branch_index(id)
            .ok_or_else(|| err(format!("no branch with id {id}")))
    }
}

fn parse_direction(s: &str) -> Result<Direction, CliError> {
    match s {
        "+" | "positive" => Ok(Direction::Positive),
        "-" | "negative" => Ok(Direction::Negative),
        other => Err(err(format!("direction must be + or -, got {other:?}"))),
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn build_network(case: &GridCase) -> Result<(SusceptanceSystem, PtdfMatrix), CliError> {
    let sys = SusceptanceSystem::build(case)?;
    let ptdf = compute_ptdf(&sys, case.reference())?;
    Ok((sys, ptdf))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command, &mut cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command, cfg: &mut Config) -> Result<ExitCode, CliError> {
    match command {
        Command::Convert(a) => cmd_convert(a, cfg),
        Command::Validate(a) => cmd_validate(a, cfg),
        Command::Ptdf(a) => cmd_ptdf(a, cfg),
        Command::Dcopf(a) => cmd_dcopf(a, cfg),
        Command::Attack(a) => cmd_attack(a, cfg),
        Command::Profile(a) => cmd_profile(a, cfg),
        Command::Detect(a) => cmd_detect(a, cfg),
        Command::BddDemo(a) => cmd_bdd_demo(a, cfg),
        Command::Simulate(a) => cmd_simulate(a, cfg),
        Command::Report(a) => cmd_report(a, cfg),
    }
}

fn cmd_convert(a: ConvertArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    let rating_scale = cfg.resolve(a.rating_scale, "rating_scale", 1.0)?;
    cfg.note("input", a.input.display());
    cfg.note("output", a.output.display());
    cfg.note("zero_negative_loads", a.zero_negative_loads);
    cfg.print_echo();
    let case: GridCase = convert_matpower(&std::fs::read_to_string(&a.input)?)?;
    let case = case.apply_modifications(rating_scale, a.zero_negative_loads);
    std::fs::write(&a.output, serialize_case(&case))?;
    println!(
        "{}",
        json!({
            "buses": case.n_buses(),
            "branches": case.n_branches(),
            "generators": case.generators.len(),
            "output": a.output.display().to_string(),
        })
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(a: ValidateArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    cfg.note("case", a.case.display());
    cfg.print_echo();
    let case = read_case(&a.case)?;
    let report = case.validate();
    let violations: Vec<String> = report.violations.iter().map(|v| format!("{v:?}")).collect();
    println!(
        "{}",
        json!({ "valid": report.is_valid(), "violations": violations })
    );
    Ok(if report.is_valid() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_ptdf(a: PtdfArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    cfg.note("case", a.case.display());
    let case = read_case(&a.case)?;
    let reference = match a.reference {
        Some(id) => case
            .bus_index(id)
            .ok_or_else(|| err(format!("unknown reference bus id {id}")))?,
        None => case.reference(),
    };
    cfg.note("reference", case.buses[reference].id);
    let sys = SusceptanceSystem::build(&case)?;
    let targets: Vec<usize> = match &a.target {
        Some(sel) => vec![parse_target(&case, sel)?],
        None => (0..case.n_branches()).collect(),
    };
    cfg.note("target", a.target.as_deref().unwrap_or("all"));
    cfg.print_echo();
    let mut out = String::from("branch,bus,ptdf\n");
    for &k in &targets {
        let row = sys.ptdf_row(k, reference)?;
        for (i, v) in row.iter().enumerate() {
            writeln!(out, "{},{},{:.10e}", case.branches[k].id, case.buses[i].id, v).unwrap();
        }
    }
    write_output(a.output.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_dcopf(a: DcopfArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    cfg.note("case", a.case.display());
    let case = read_case(&a.case)?;
    let loads = match &a.loads {
        Some(p) => {
            cfg.note("loads", p.display());
            vector_for_case(&case, &read_bus_values(p)?)?
        }
        None => case.loads(),
    };
    cfg.print_echo();
    let (_, ptdf) = build_network(&case)?;
    let sol = solve_dcopf(&case, &ptdf, &loads)?;
    let mut out = String::from("gen,dispatch_mw\n");
    for (j, g) in case.generators.iter().enumerate() {
        writeln!(out, "{},{}", g.id, sol.dispatch[j]).unwrap();
    }
    write_output(a.output.as_deref(), &out)?;
    let flows: Vec<serde_json::Value> = case
        .branches
        .iter()
        .enumerate()
        .map(|(k, b)| json!({ "branch": b.id, "flow_mw": sol.cyber_flows[k] }))
        .collect();
    println!("{}", json!({ "total_cost": sol.total_cost, "flows": flows }));
    Ok(ExitCode::SUCCESS)
}

/// Row-route inputs: PTDF row, loads, and the external ids both share.
fn row_inputs(
    ptdf_csv: &Path,
    loads_csv: Option<&Path>,
) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>), CliError> {
    let row_pairs = read_bus_values(ptdf_csv)?;
    let loads_path =
        loads_csv.ok_or_else(|| err("--loads is required together with --ptdf-csv"))?;
    let load_pairs = read_bus_values(loads_path)?;
    if row_pairs.len() != load_pairs.len() {
        return Err(err("--ptdf-csv and --loads list different bus counts"));
    }
    let ids: Vec<usize> = row_pairs.iter().map(|&(id, _)| id).collect();
    let mut loads = vec![0.0; ids.len()];
    for &(id, v) in &load_pairs {
        let i = ids
            .iter()
            .position(|&x| x == id)
            .ok_or_else(|| err(format!("bus {id} in loads but not in the PTDF row")))?;
        loads[i] = v;
    }
    let row = row_pairs.into_iter().map(|(_, v)| v).collect();
    Ok((row, loads, ids))
}

fn cmd_attack(a: AttackArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    let alpha = cfg.resolve(a.alpha, "alpha", ALPHA_CAP_DEFAULT)?;
    let (row, loads, ids, direction, target_id) = match (&a.case, &a.ptdf_csv) {
        (Some(case_path), None) => {
            cfg.note("case", case_path.display());
            let case = read_case(case_path)?;
            let sel = a
                .target
                .as_deref()
                .ok_or_else(|| err("--target is required with --case"))?;
            let target = parse_target(&case, sel)?;
            let (_, ptdf) = build_network(&case)?;
            let direction = match &a.direction {
                Some(d) => parse_direction(d)?,
                None => attack_direction(&case, &ptdf, target)?,
            };
            let loads = match &a.loads {
                Some(p) => vector_for_case(&case, &read_bus_values(p)?)?,
                None => case.loads(),
            };
            let ids = case.buses.iter().map(|b| b.id).collect();
            (
                ptdf.row(target).to_vec(),
                loads,
                ids,
                direction,
                case.branches[target].id,
            )
        }
        (None, Some(ptdf_csv)) => {
            cfg.note("ptdf_csv", ptdf_csv.display());
            let (row, loads, ids) = row_inputs(ptdf_csv, a.loads.as_deref())?;
            let d = a
                .direction
                .as_deref()
                .ok_or_else(|| err("--direction is required with --ptdf-csv"))?;
            (row, loads, ids, parse_direction(d)?, 0)
        }
        _ => return Err(err("give exactly one of --case or --ptdf-csv")),
    };
    cfg.note("direction", if direction == Direction::Positive { "+" } else { "-" });
    cfg.print_echo();
    let spec = AttackSpec {
        target_branch: target_id,
        direction,
        alpha,
    };
    let dev = greedy_best_attack(&row, &loads, &spec);
    let objective = attack_objective(&dev, &row, direction);
    let mut out = String::from("bus,delta_mw\n");
    for (i, &id) in ids.iter().enumerate() {
        writeln!(out, "{},{}", id, dev.deltas[i]).unwrap();
    }
    let summary = json!({
        "target": a.target.as_deref().unwrap_or("row"),
        "direction": if direction == Direction::Positive { "+" } else { "-" },
        "alpha": alpha,
        "objective_mw": objective,
    });
    match &a.output {
        Some(p) => {
            std::fs::write(p, out)?;
            println!("{summary}");
        }
        None => {
            print!("{out}");
            eprintln!("{summary}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_profile(a: ProfileArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    let cutoff = cfg.resolve(a.cutoff, "cutoff", CUTOFF_DEFAULT)?;
    let alpha_cap = cfg.resolve(a.alpha_cap, "alpha_cap", ALPHA_CAP_DEFAULT)?;
    let step = cfg.resolve(a.step, "alpha_min_step", ALPHA_STEP_DEFAULT)?;
    let mode = a.alpha_min_mode.as_deref().unwrap_or("deviation");
    let (profile, ids) = match (&a.case, &a.ptdf_csv) {
        (Some(case_path), None) => {
            cfg.note("case", case_path.display());
            let case = read_case(case_path)?;
            let sel = a
                .target
                .as_deref()
                .ok_or_else(|| err("--target is required with --case"))?;
            let target = parse_target(&case, sel)?;
            let (_, ptdf) = build_network(&case)?;
            let direction = match &a.direction {
                Some(d) => parse_direction(d)?,
                None => attack_direction(&case, &ptdf, target)?,
            };
            let loads = case.loads();
            let alpha_min = match a.alpha_min {
                Some(v) => Some(v),
                None => {
                    let m = match mode {
                        "pipeline" => AlphaMinMode::Pipeline,
                        "deviation" => AlphaMinMode::Deviation {
                            threshold: a
                                .threshold
                                .ok_or_else(|| err("--threshold is required in deviation mode"))?,
                        },
                        other => return Err(err(format!("unknown alpha_min mode {other:?}"))),
                    };
                    find_alpha_min(&case, &ptdf, target, m, step, alpha_cap)?
                }
            };
            let ids = case.buses.iter().map(|b| b.id).collect();
            (
                build_asset_profile(
                    case.branches[target].id,
                    ptdf.row(target),
                    &loads,
                    direction,
                    alpha_min,
                    cutoff,
                    alpha_cap,
                ),
                ids,
            )
        }
        (None, Some(ptdf_csv)) => {
            cfg.note("ptdf_csv", ptdf_csv.display());
            let (row, loads, ids) = row_inputs(ptdf_csv, a.loads.as_deref())?;
            let direction = parse_direction(a.direction.as_deref().unwrap_or("+"))?;
            let alpha_min = match a.alpha_min {
                Some(v) => Some(v),
                None => {
                    let threshold = a
                        .threshold
                        .ok_or_else(|| err("--threshold or --alpha-min is required with --ptdf-csv"))?;
                    alpha_min_deviation(&row, &loads, direction, threshold, step, alpha_cap)
                }
            };
            (
                build_asset_profile(0, &row, &loads, direction, alpha_min, cutoff, alpha_cap),
                ids,
            )
        }
        _ => return Err(err("give exactly one of --case or --ptdf-csv")),
    };
    match profile.alpha_min {
        Some(v) => cfg.note("alpha_min", v),
        None => cfg.note("alpha_min", "none (not attackable within the cap)"),
    }
    cfg.note("tnsb", profile.tnsb());
    cfg.print_echo();
    // profile bus entries are vector indices; report external ids alongside
    let sensitive_ids: Vec<usize> = profile.buses.iter().map(|b| ids[b.bus]).collect();
    eprintln!("sensitive buses (by |PTDF| desc): {sensitive_ids:?}");
    write_output(a.output.as_deref(), &serialize_profile(&profile))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_detect(a: DetectArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    let ratio_threshold = cfg.resolve(a.ratio_threshold, "ratio_threshold", RATIO_THRESHOLD)?;
    let deltas: Vec<f64> = match (&a.deviations, &a.estimated, &a.forecast) {
        (Some(dev), None, None) => {
            cfg.note("deviations", dev.display());
            read_bus_values(dev)?.into_iter().map(|(_, v)| v).collect()
        }
        (None, Some(est), Some(fc)) => {
            cfg.note("estimated", est.display());
            cfg.note("forecast", fc.display());
            let est = read_bus_values(est)?;
            let fc = read_bus_values(fc)?;
            if est.len() != fc.len() {
                return Err(err("estimated and forecast CSVs list different bus counts"));
            }
            est.iter()
                .zip(&fc)
                .map(|(&(ei, ev), &(fi, fv))| {
                    if ei != fi {
                        return Err(err(format!("bus order mismatch: {ei} vs {fi}")));
                    }
                    Ok(ev - fv)
                })
                .collect::<Result<_, _>>()?
        }
        _ => return Err(err("give --deviations, or --estimated with --forecast")),
    };
    cfg.print_echo();
    let mut reports = Vec::new();
    for path in &a.profile {
        let profile: AssetProfile = parse_profile(&std::fs::read_to_string(path)?)?;
        let verdict = classify(&profile, &deltas, ratio_threshold)?;
        let detail: Vec<serde_json::Value> = profile
            .buses
            .iter()
            .map(|sb| {
                let d = deltas[sb.bus];
                let sign_ok = if sb.expected_sign > 0 { d > 0.0 } else { d < 0.0 };
                json!({
                    "bus": sb.bus,
                    "delta_mw": d,
                    "expected_sign": if sb.expected_sign > 0 { "+" } else { "-" },
                    "threshold_mw": sb.threshold,
                    "matched": sign_ok && d.abs() > sb.threshold,
                })
            })
            .collect();
        reports.push(json!({
            "asset": profile.target_branch,
            "npdsb": verdict.npdsb,
            "tnsb": verdict.tnsb,
            "ratio": verdict.ratio,
            "flagged": verdict.flagged,
            "per_bus_detail": detail,
        }));
    }
    println!("{}", json!(reports));
    Ok(ExitCode::SUCCESS)
}

fn cmd_bdd_demo(a: BddDemoArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    let noise_mw = cfg.resolve(a.noise_mw, "noise_mw", 0.0)?;
    let seed = cfg.resolve(a.seed, "seed", 1u64)?;
    cfg.note("case", a.case.display());
    cfg.note("deviations", a.deviations.display());
    cfg.print_echo();
    let case = read_case(&a.case)?;
    let deltas = vector_for_case(&case, &read_bus_values(&a.deviations)?)?;
    let (sys, ptdf) = build_network(&case)?;
    let model = MeasurementModel::build(&case, &sys);
    // honest operating point: dispatch the true loads, measure the flows
    let sol = solve_dcopf(&case, &ptdf, &case.loads())?;
    let mut injections = vec![0.0; case.n_buses()];
    for (j, g) in case.generators.iter().enumerate() {
        injections[g.bus] += sol.dispatch[j];
    }
    for (i, l) in case.loads().iter().enumerate() {
        injections[i] -= l;
    }
    let flow = solve_dcpf(&sys, &injections)?;
    let mut z = model.apply(&flow.angles)?;
    if noise_mw > 0.0 {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, noise_mw).unwrap();
        for v in &mut z {
            *v += dist.sample(&mut rng);
        }
    }
    let c = deviations_to_state_error(&sys, &deltas)?;
    let attack = model.craft_bypass(&c)?;
    let za: Vec<f64> = z.iter().zip(&attack).map(|(z, a)| z + a).collect();
    let base = model.estimate_states(&z)?;
    let attacked = model.estimate_states(&za)?;
    println!(
        "{}",
        json!({
            "base_residual": base.residual_norm,
            "attacked_residual": attacked.residual_norm,
            "difference": (attacked.residual_norm - base.residual_norm).abs(),
        })
    );
    Ok(ExitCode::SUCCESS)
}

fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_simulate(a: SimulateArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    let attacks = cfg.resolve(a.attacks, "attacks", 500usize)?;
    let noise = cfg.resolve(a.noise, "noise", 500usize)?;
    let alpha_cap = cfg.resolve(a.alpha_cap, "alpha_cap", ALPHA_CAP_DEFAULT)?;
    let cutoff = cfg.resolve(a.cutoff, "cutoff", CUTOFF_DEFAULT)?;
    let step = cfg.resolve(a.step, "alpha_min_step", ALPHA_STEP_DEFAULT)?;
    let noise_alpha = cfg.resolve(a.noise_alpha, "noise_alpha", alpha_cap)?;
    let seed = cfg.resolve(a.seed, "seed", 1u64)?;
    let noise_kind = match a.noise_kind.as_deref().unwrap_or("gaussian") {
        "gaussian" => NoiseKind::Gaussian,
        "cauchy" => NoiseKind::Cauchy,
        other => return Err(err(format!("unknown noise kind {other:?}"))),
    };
    cfg.note("case", a.case.display());
    let case = read_case(&a.case)?;
    let (_, ptdf) = build_network(&case)?;
    let profile: AssetProfile = match &a.profile {
        Some(p) => {
            cfg.note("profile", p.display());
            parse_profile(&std::fs::read_to_string(p)?)?
        }
        None => {
            let sel = a
                .target
                .as_deref()
                .ok_or_else(|| err("--target is required when no --profile is given"))?;
            let target = parse_target(&case, sel)?;
            let direction = attack_direction(&case, &ptdf, target)?;
            let mode = match a.alpha_min_mode.as_deref().unwrap_or("deviation") {
                "pipeline" => AlphaMinMode::Pipeline,
                "deviation" => AlphaMinMode::Deviation {
                    threshold: a
                        .threshold
                        .ok_or_else(|| err("--threshold is required in deviation mode"))?,
                },
                other => return Err(err(format!("unknown alpha_min mode {other:?}"))),
            };
            let alpha_min = find_alpha_min(&case, &ptdf, target, mode, step, alpha_cap)?;
            let mut profile = build_asset_profile(
                target,
                ptdf.row(target),
                &case.loads(),
                direction,
                alpha_min,
                cutoff,
                alpha_cap,
            );
            // profiles built here address the deviation vector by case index
            profile.target_branch = target;
            profile
        }
    };
    // built profiles store the branch index; files may store an id — the
    // batch needs the index, so resolve ids back when loading from a file
    let target = if a.profile.is_some() {
        case.branch_index(profile.target_branch)
            .unwrap_or(profile.target_branch)
    } else {
        profile.target_branch
    };
    let mut profile = profile;
    profile.target_branch = target;
    let zeroed = cfg.resolve(a.zeroed, "zeroed", default_zeroed_count(profile.tnsb()))?;
    cfg.note("tnsb", profile.tnsb());
    cfg.print_echo();
    let batch = BatchConfig {
        n_attacks: attacks,
        n_noise: noise,
        noise_kind,
        noise_alpha,
        alpha_cap,
        zeroed_count: zeroed,
        base_seed: seed,
    };
    let records = monte_carlo(&case, &ptdf, &profile, &batch)?;
    let meta = json!({
        "rng": "chacha8",
        "base_seed": seed,
        "attacks": attacks,
        "noise": noise,
        "noise_kind": match noise_kind { NoiseKind::Gaussian => "gaussian", NoiseKind::Cauchy => "cauchy" },
        "noise_alpha": noise_alpha,
        "alpha_cap": alpha_cap,
        "cutoff": cutoff,
        "alpha_min": profile.alpha_min,
        "zeroed": zeroed,
        "target_branch": case.branches[target].id,
        "rating_mw": case.branches[target].rating,
    });
    let mut out = format!("# {meta}\n");
    out.push_str("index,kind,alpha,npdsb,tnsb,ratio,flagged,cyber_flow_mw,physical_flow_mw,overflow_mw\n");
    for r in &records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.kind.label(),
            csv_opt(r.deviations.alpha),
            r.npdsb,
            r.tnsb,
            r.ratio,
            r.flagged,
            csv_opt(r.cyber_flow),
            csv_opt(r.physical_flow),
            csv_opt(r.overflow),
        )
        .unwrap();
    }
    write_output(a.output.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(a: ReportArgs, cfg: &mut Config) -> Result<ExitCode, CliError> {
    cfg.note("input", a.input.display());
    cfg.print_echo();
    let text = std::fs::read_to_string(&a.input)?;
    let mut metadata = serde_json::Value::Null;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header_seen = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if metadata.is_null() {
                metadata = serde_json::from_str(rest.trim()).unwrap_or(serde_json::Value::Null);
            }
            continue;
        }
        if !header_seen {
            if !line.starts_with("index,kind,") {
                return Err(err("not a simulate CSV: unexpected header"));
            }
            header_seen = true;
            continue;
        }
        rows.push(line.split(',').map(|s| s.trim().to_string()).collect());
    }
    if rows.is_empty() {
        println!("{}", json!({ "warning": "empty batch", "metadata": metadata }));
        return Ok(ExitCode::SUCCESS);
    }
    let mut kinds: BTreeMap<String, (usize, usize, usize, f64, f64, usize)> = BTreeMap::new();
    for row in &rows {
        if row.len() < 10 {
            return Err(err("malformed simulate CSV row"));
        }
        let kind = row[1].clone();
        let flagged = row[6] == "true";
        let overflow: Option<f64> = row[9].parse().ok();
        let e = kinds.entry(kind).or_insert((0, 0, 0, 0.0, 0.0, 0));
        e.0 += 1;
        if flagged {
            e.1 += 1;
        }
        match overflow {
            Some(v) => {
                e.2 += 1;
                e.3 += v;
                if v > e.4 {
                    e.4 = v;
                }
            }
            None => e.5 += 1,
        }
    }
    let per_kind: BTreeMap<String, serde_json::Value> = kinds
        .into_iter()
        .map(|(k, (n, nf, nfeas, osum, omax, ninf))| {
            (
                k,
                json!({
                    "count": n,
                    "flag_rate": nf as f64 / n as f64,
                    "feasible": nfeas,
                    "infeasible": ninf,
                    "mean_overflow_mw": if nfeas > 0 { osum / nfeas as f64 } else { 0.0 },
                    "max_overflow_mw": omax,
                }),
            )
        })
        .collect();
    println!(
        "{}",
        json!({ "records": rows.len(), "kinds": per_kind, "metadata": metadata })
    );
    Ok(ExitCode::SUCCESS)
}
