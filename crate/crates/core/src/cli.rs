//! Configuration parsing and the `susyq` pipeline: validation, construction
//! of the partner, oracle verification and tabulated output.
//!
//! A configuration is a line-oriented `key = value` file:
//!
//! ```text
//! # fourth-order transform below the ground state
//! order = 4
//! epsilons = -11/2, -9/2, -7/2, -5/2
//! parities = -1, +1, -1, +1     # optional, derived from the interval class
//! x_max = 10
//! grid_n = 4000
//! levels_to_report = 8
//! output_dir = out
//! ```

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::design::{self, rules, AddedLevel, TransformationPlan, ValidationReport};
use crate::oracle::{self, Grid};
use crate::partner::{normalize, BaseState, PartnerPotential};
use crate::seeds::Parity;

/// Largest residual accepted for a claimed eigenfunction.
pub const RESIDUAL_TOL: f64 = 1e-4;

/// Largest deviation between a predicted level and the oracle's.
pub const SPECTRUM_TOL: f64 = 5e-3;

/// Number of isospectral states written to `states.csv`.
pub const ISOSPECTRAL_STATES: usize = 4;

/// Points at which eigen-residuals are measured.
fn residual_sample() -> Vec<f64> {
    (1..=24).map(|i| 0.25 * i as f64).collect()
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

fn line_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanConfig {
    pub order: usize,
    pub epsilons: Vec<f64>,
    pub parities: Option<Vec<Parity>>,
    pub x_max: f64,
    pub grid_n: usize,
    pub levels_to_report: usize,
    /// `None` writes next to the configuration file.
    pub output_dir: Option<PathBuf>,
}

impl PlanConfig {
    pub fn plan(&self) -> crate::Result<TransformationPlan> {
        match &self.parities {
            Some(p) => TransformationPlan::new(self.epsilons.clone(), p.clone()),
            None => TransformationPlan::auto(self.epsilons.clone()),
        }
    }

    pub fn grid(&self) -> crate::Result<Grid> {
        Grid::with_extent(self.x_max, self.grid_n)
    }
}

/// Decimal number or fraction `p/q`.
fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            p as f64 / q as f64
        }
        None => s.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

fn parse_list<T>(
    value: &str,
    line: usize,
    item: impl Fn(&str) -> Option<T>,
) -> Result<Vec<T>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|s| {
            item(s.trim())
                .ok_or_else(|| line_err(line, format!("cannot parse list entry `{}`", s.trim())))
        })
        .collect()
}

fn parse_parity(s: &str) -> Option<Parity> {
    match s {
        "+1" | "1" => Some(Parity::Even),
        "-1" => Some(Parity::Odd),
        _ => None,
    }
}

/// Parse a configuration file's text.
pub fn parse_config(text: &str) -> Result<PlanConfig, ConfigError> {
    let mut order = None;
    let mut epsilons = None;
    let mut parities = None;
    let mut x_max = None;
    let mut grid_n = None;
    let mut levels = None;
    let mut output_dir = None;
    let mut seen: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| line_err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(line_err(line, format!("duplicate key `{key}`")));
        }
        seen.push(key.to_string());
        let int = |v: &str| -> Result<usize, ConfigError> {
            v.parse().map_err(|_| {
                line_err(
                    line,
                    format!("`{key}` needs a non-negative integer, got `{v}`"),
                )
            })
        };
        match key {
            "order" => order = Some(int(value)?),
            "epsilons" => epsilons = Some(parse_list(value, line, parse_number)?),
            "parities" => parities = Some(parse_list(value, line, parse_parity)?),
            "x_max" => {
                x_max = Some(parse_number(value).ok_or_else(|| {
                    line_err(line, format!("`x_max` needs a number, got `{value}`"))
                })?)
            }
            "grid_n" => grid_n = Some(int(value)?),
            "levels_to_report" => levels = Some(int(value)?),
            "output_dir" => {
                if value.is_empty() {
                    return Err(line_err(line, "`output_dir` is empty"));
                }
                output_dir = Some(PathBuf::from(value))
            }
            _ => return Err(line_err(line, format!("unknown key `{key}`"))),
        }
    }

    let epsilons: Vec<f64> = epsilons.ok_or(ConfigError::Missing("epsilons"))?;
    let order = order.unwrap_or(epsilons.len());
    if epsilons.len() != order {
        return Err(ConfigError::Invalid(format!(
            "order = {order} but {} epsilons given",
            epsilons.len()
        )));
    }
    if let Some(p) = &parities {
        let p: &Vec<Parity> = p;
        if p.len() != order {
            return Err(ConfigError::Invalid(format!(
                "order = {order} but {} parities given",
                p.len()
            )));
        }
    }
    let levels_to_report = levels.unwrap_or(8);
    if levels_to_report == 0 || levels_to_report > oracle::MAX_EIGENVALUES {
        return Err(ConfigError::Invalid(format!(
            "levels_to_report must be in 1..={}, got {levels_to_report}",
            oracle::MAX_EIGENVALUES
        )));
    }
    let config = PlanConfig {
        order,
        epsilons,
        parities,
        x_max: x_max.unwrap_or(10.0),
        grid_n: grid_n.unwrap_or(4000),
        levels_to_report,
        output_dir,
    };
    config
        .grid()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(config)
}

/// What a subcommand does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Validation, construction, oracle checks and all output files.
    Run,
    /// Design rules only; writes `report.json`.
    Validate,
    /// Oracle spectrum of the partner only; writes `report.json`.
    Spectrum,
}

/// Process exit status of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    RuleViolation,
    NumericalFailure,
    ConfigError,
    IoError,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::RuleViolation => 2,
            Status::NumericalFailure => 3,
            Status::ConfigError => 64,
            Status::IoError => 74,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Config(_) => Status::ConfigError,
            CliError::Numerical(_) => Status::NumericalFailure,
            CliError::Io { .. } => Status::IoError,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Round to 12 significant digits so that reports are byte-stable.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round_sig)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(io_err(&path))?;
    f.write_all(contents.as_bytes()).map_err(io_err(&path))?;
    Ok(path)
}

fn write_json(dir: &Path, mut report: Value) -> Result<PathBuf, CliError> {
    round_json(&mut report);
    let mut text = serde_json::to_string_pretty(&report).expect("report is plain data");
    text.push('\n');
    write_file(dir, "report.json", &text)
}

fn csv_number(v: f64) -> String {
    format!("{v:.11e}")
}

fn plan_json(plan: &TransformationPlan, grid: &Grid) -> Value {
    json!({
        "order": plan.order(),
        "epsilons": plan.epsilons(),
        "parities": plan.parities().iter().map(|p| p.value()).collect::<Vec<_>>(),
        "interval": plan.interval(),
        "grid": { "x_min": grid.x_min(), "x_max": grid.x_max(), "n": grid.n() },
    })
}

fn rule_table(report: &ValidationReport) -> Value {
    let table: serde_json::Map<String, Value> = rules::ALL
        .iter()
        .map(|&r| {
            let state = if report.skipped.contains(&r) {
                "skipped"
            } else if report.has_violation(r) {
                "fail"
            } else {
                "pass"
            };
            (r.to_string(), Value::from(state))
        })
        .collect();
    Value::Object(table)
}

/// One predicted level: an added seed energy or an isospectral one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedLevel {
    pub energy: f64,
    pub source: &'static str,
    /// Seed index for added levels, n for isospectral ones.
    pub index: usize,
}

/// The `count` lowest predicted levels.
pub fn predicted_spectrum(report: &ValidationReport, count: usize) -> Vec<PredictedLevel> {
    let mut levels: Vec<PredictedLevel> = report
        .predicted_added
        .iter()
        .map(|a| PredictedLevel {
            energy: a.epsilon,
            source: "added",
            index: a.index,
        })
        .chain((0..count).map(|n| PredictedLevel {
            energy: report.predicted_isospectral_branch.energy(n),
            source: "isospectral",
            index: n,
        }))
        .collect();
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    levels.truncate(count);
    levels
}

struct State {
    label: String,
    energy: f64,
    norm: f64,
    eval: Box<dyn Fn(f64) -> crate::Result<f64> + Sync>,
}

fn physical_states(partner: &PartnerPotential, report: &ValidationReport) -> Vec<State> {
    let mut states: Vec<State> = Vec::new();
    for a in &report.predicted_added {
        let p = partner.clone();
        let j = a.index;
        states.push(State {
            label: String::new(),
            energy: a.epsilon,
            norm: 1.0,
            eval: Box::new(move |x| p.added_state(j, x)),
        });
    }
    for n in 0..ISOSPECTRAL_STATES {
        let p = partner.clone();
        let s = BaseState::new(report.predicted_isospectral_branch, n);
        states.push(State {
            label: String::new(),
            energy: s.energy(),
            norm: 1.0,
            eval: Box::new(move |x| p.transformed_eigenfunction(&s, x)),
        });
    }
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    for s in &mut states {
        s.label = format!("E={}", round_sig(s.energy));
    }
    states
}

/// Execute `mode` on a parsed configuration, writing into `out_dir`.
pub fn execute(mode: Mode, config: &PlanConfig, out_dir: &Path) -> Result<Status, CliError> {
    let plan = config.plan()?;
    let grid = config.grid()?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    match mode {
        Mode::Validate => {
            let report = design::validate_on(&plan, &grid)?;
            let status = if report.ok {
                Status::Success
            } else {
                Status::RuleViolation
            };
            write_json(
                out_dir,
                json!({
                    "command": mode,
                    "plan": plan_json(&plan, &grid),
                    "validation": report,
                    "rules": rule_table(&report),
                    "ok": report.ok,
                }),
            )?;
            Ok(status)
        }
        Mode::Spectrum => {
            let partner = plan.partner()?;
            let t = oracle::discretize(|x| partner.value(x), &grid)?;
            let spectrum = oracle::eigenvalues_low(&t, config.levels_to_report)?;
            write_json(
                out_dir,
                json!({
                    "command": mode,
                    "plan": plan_json(&plan, &grid),
                    "oracle_spectrum": spectrum,
                }),
            )?;
            Ok(Status::Success)
        }
        Mode::Run => run_pipeline(config, &plan, &grid, out_dir),
    }
}

fn run_pipeline(
    config: &PlanConfig,
    plan: &TransformationPlan,
    grid: &Grid,
    out_dir: &Path,
) -> Result<Status, CliError> {
    let report = design::validate_on(plan, grid)?;
    if !report.ok {
        write_json(
            out_dir,
            json!({
                "command": Mode::Run,
                "plan": plan_json(plan, grid),
                "validation": report,
                "rules": rule_table(&report),
                "ok": false,
            }),
        )?;
        return Ok(Status::RuleViolation);
    }
    let partner = plan.partner()?;
    let xs: Vec<f64> = grid.interior().collect();
    let vtilde = partner.sample(grid)?;
    let t = oracle::discretize(|x| partner.value(x), grid)?;
    let spectrum = oracle::eigenvalues_low(&t, config.levels_to_report)?;
    let predicted = predicted_spectrum(&report, config.levels_to_report);
    let spectrum_checks: Vec<Value> = predicted
        .iter()
        .zip(&spectrum)
        .map(|(p, &o)| {
            let dev = (p.energy - o).abs();
            json!({
                "predicted": p.energy,
                "source": p.source,
                "index": p.index,
                "oracle": o,
                "deviation": dev,
                "pass": dev <= SPECTRUM_TOL,
            })
        })
        .collect();

    let mut states = physical_states(&partner, &report);
    let sample = residual_sample();
    let mut residuals = Vec::new();
    for s in &mut states {
        s.norm = normalize(&s.eval, grid)?;
        let (n, f) = (s.norm, &s.eval);
        let r = oracle::residual(|x| partner.value(x), |x| Ok(n * f(x)?), s.energy, &sample)?;
        residuals.push(json!({
            "label": s.label,
            "energy": s.energy,
            "residual": r,
            "pass": r <= RESIDUAL_TOL,
        }));
    }
    let all_pass = spectrum_checks
        .iter()
        .chain(&residuals)
        .all(|c| c["pass"] == Value::Bool(true));

    let mut potential = String::from("x,V,Vtilde\n");
    for (x, vt) in xs.iter().zip(&vtilde) {
        potential.push_str(&format!(
            "{},{},{}\n",
            csv_number(*x),
            csv_number(0.5 * x * x),
            csv_number(*vt)
        ));
    }
    write_file(out_dir, "potential.csv", &potential)?;

    let columns = states
        .iter()
        .map(|s| {
            xs.iter()
                .map(|&x| Ok(s.norm * (s.eval)(x)?))
                .collect::<crate::Result<Vec<f64>>>()
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut table = String::from("x");
    for s in &states {
        table.push(',');
        table.push_str(&s.label);
    }
    table.push('\n');
    for (i, x) in xs.iter().enumerate() {
        table.push_str(&csv_number(*x));
        for c in &columns {
            table.push(',');
            table.push_str(&csv_number(c[i]));
        }
        table.push('\n');
    }
    write_file(out_dir, "states.csv", &table)?;

    let added: Vec<AddedLevel> = report.predicted_added.clone();
    write_json(
        out_dir,
        json!({
            "command": Mode::Run,
            "plan": plan_json(plan, grid),
            "validation": report,
            "rules": rule_table(&report),
            "predicted_added": added,
            "predicted_spectrum": predicted,
            "oracle_spectrum": spectrum,
            "spectrum_checks": spectrum_checks,
            "residuals": residuals,
            "ok": all_pass,
        }),
    )?;
    Ok(if all_pass {
        Status::Success
    } else {
        Status::NumericalFailure
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "susyq",
    version,
    about = "Higher-order supersymmetric partners of the truncated harmonic oscillator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate, build the partner, verify with the oracle and write all outputs
    Run(Target),
    /// Check the design rules and write report.json
    Validate(Target),
    /// Compute the oracle spectrum of the partner and write report.json
    Spectrum(Target),
}

#[derive(Debug, clap::Args)]
struct Target {
    /// Plan configuration file
    config: PathBuf,
    /// Output directory, overriding `output_dir` in the configuration
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

/// Where outputs go: the command-line override, else `output_dir` resolved
/// against the configuration file's directory, else that directory itself.
pub fn output_dir_for(
    config_path: &Path,
    config: &PlanConfig,
    cli_override: Option<&Path>,
) -> PathBuf {
    if let Some(dir) = cli_override {
        return dir.to_path_buf();
    }
    let base = config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    match &config.output_dir {
        Some(d) => base.join(d),
        None => base.to_path_buf(),
    }
}

fn load_and_execute(mode: Mode, target: &Target) -> Result<(Status, PathBuf), CliError> {
    let bytes = fs::read(&target.config).map_err(io_err(&target.config))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| ConfigError::Invalid("configuration is not valid UTF-8".into()))?;
    let config = parse_config(&text)?;
    let out = output_dir_for(&target.config, &config, target.output_dir.as_deref());
    Ok((execute(mode, &config, &out)?, out))
}

/// Entry point of the `susyq` binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                Status::ConfigError.code()
            } else {
                0
            });
        }
    };
    let (mode, target) = match &cli.command {
        Command::Run(t) => (Mode::Run, t),
        Command::Validate(t) => (Mode::Validate, t),
        Command::Spectrum(t) => (Mode::Spectrum, t),
    };
    match load_and_execute(mode, target) {
        Ok((status, out)) => {
            match status {
                Status::Success => eprintln!("susyq: ok, outputs in {}", out.display()),
                Status::RuleViolation => eprintln!(
                    "susyq: design rules violated, see {}",
                    out.join("report.json").display()
                ),
                _ => eprintln!(
                    "susyq: oracle checks failed, see {}",
                    out.join("report.json").display()
                ),
            }
            ExitCode::from(status.code())
        }
        Err(e) => {
            eprintln!("susyq: {e}");
            ExitCode::from(e.status().code())
        }
    }
}
