//! Command-line front end.
//!
//! Every subcommand and every task of a scenario file produces rows of one
//! CSV table on stdout and a short text summary on stderr. When
//! `LORENTZDIST_OUT_DIR` is set the same table, the summary and certificate
//! sidecars are also written to that directory.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::causal::{
    equivalence_scan, gradient_causal_check, gradient_steep_check, operator_causal_check,
    operator_steep_check, CausalVerdict, ScanSettings, NSD_TOL,
};
use crate::clifford::{verify_clifford, ChiralitySign, CliffordModule};
use crate::distance::{
    analytic_distance, bounding_grid, duality_gap, oracle_distance, steep_family_distance,
    Certificate, DistanceResult, OracleSettings, SteepFamily, SteepSettings, DEFAULT_MAX_RAPIDITY,
    IMPROVEMENT_TOL, SANDWICH_EPS, STEEP_SLACK,
};
use crate::error::{Error, Result};
use crate::spacetime::{CovectorSample, ScaleFactor, SpacetimeModel};

pub const OUT_DIR_ENV: &str = "LORENTZDIST_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_T_DOMAIN: [f64; 2] = [0.5, 4.0];
const DEFAULT_CLIFFORD_TOL: f64 = 1e-12;
const DEFAULT_CLOSE_TOL: f64 = 5e-3;
const DEFAULT_GRID_PAD: f64 = 1.0;
const DEFAULT_GRID_POINTS: usize = 5;

#[derive(Parser, Debug)]
#[command(
    name = "lorentzdist",
    version,
    about = "Lorentzian distance and operator causality checks on model spacetimes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance between two chart points.
    Dist(DistArgs),
    /// Causality of a covector at a point, by both routes.
    CheckCausal(CheckArgs),
    /// Steepness of a covector at a point, by both routes.
    CheckSteep(CheckArgs),
    /// Verify the Clifford identities of the standard module.
    VerifyClifford(VerifyArgs),
    /// Compare operator and gradient verdicts on random covectors.
    EquivalenceScan(ScanArgs),
    /// Curve-oracle lower bound against steep-family upper bound.
    Gap(GapArgs),
    /// Run every task of a scenario file.
    Run(RunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModelName {
    Minkowski,
    Flrw,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MethodName {
    Analytic,
    Oracle,
    Steep,
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyName {
    Boost,
    Time,
    TimeLinear,
    MilneBoost,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "minkowski")]
    model: ModelName,
    /// Spacetime dimension.
    #[arg(long)]
    n: usize,
    /// Scale factor for FLRW: c, t, c*t, c*t+d, t^p or c*t^p.
    #[arg(long, default_value = "t")]
    a: String,
    /// FLRW time interval as `lo,hi`.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0.5,4"
    )]
    t_domain: Vec<f64>,
    /// Chirality sign, +1 or -1.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    chi_sign: f64,
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    /// Steep family; defaults to boost on Minkowski and time on FLRW.
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    /// Parameter box half-width of the family.
    #[arg(long)]
    family_bound: Option<f64>,
    /// Padding of the steepness validation grid around `p` and `q`.
    #[arg(long, default_value_t = DEFAULT_GRID_PAD)]
    grid_pad: f64,
    /// Validation grid points per axis.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
}

#[derive(Args, Debug, Clone)]
struct DistArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    p: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    q: Vec<f64>,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodName,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 64)]
    segments: usize,
    #[arg(long, default_value_t = 2000)]
    iterations: usize,
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    point: Vec<f64>,
    /// Gradient components `f,0,...,f,n-1`.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    df: Vec<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = NSD_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Clone)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_CLIFFORD_TOL)]
    tol: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    chi_sign: f64,
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, allow_hyphen_values = true, default_value_t = NSD_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Clone)]
struct GapArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    p: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    q: Vec<f64>,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 64)]
    segments: usize,
    #[arg(long, default_value_t = 2000)]
    iterations: usize,
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gap above which the family is reported as too small.
    #[arg(long, default_value_t = DEFAULT_CLOSE_TOL)]
    close_tol: f64,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Scenario file (TOML).
    config: PathBuf,
}

/// Scenario file layout.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    model: ModelSpec,
    #[serde(default)]
    points: std::collections::BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    kind: ModelName,
    n: usize,
    a: Option<String>,
    t_domain: Option<[f64; 2]>,
    chi_sign: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum TaskKind {
    Dist,
    CheckCausal,
    CheckSteep,
    VerifyClifford,
    EquivalenceScan,
    Gap,
}

impl TaskKind {
    fn as_str(self) -> &'static str {
        match self {
            TaskKind::Dist => "dist",
            TaskKind::CheckCausal => "check-causal",
            TaskKind::CheckSteep => "check-steep",
            TaskKind::VerifyClifford => "verify-clifford",
            TaskKind::EquivalenceScan => "equivalence-scan",
            TaskKind::Gap => "gap",
        }
    }

    fn needs_seed(self, method: MethodName) -> bool {
        match self {
            TaskKind::Dist => method != MethodName::Analytic,
            TaskKind::EquivalenceScan | TaskKind::Gap => true,
            _ => false,
        }
    }
}

/// A point given inline or by name from `[points]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PointRef {
    Inline(Vec<f64>),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSpec {
    id: Option<String>,
    task: TaskKind,
    p: Option<PointRef>,
    q: Option<PointRef>,
    point: Option<PointRef>,
    df: Option<Vec<f64>>,
    method: Option<MethodName>,
    family: Option<FamilyName>,
    family_bound: Option<f64>,
    grid_pad: Option<f64>,
    grid_points: Option<usize>,
    segments: Option<usize>,
    iterations: Option<usize>,
    starts: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    close_tol: Option<f64>,
}

/// Fully resolved task ready to execute.
#[derive(Debug, Clone)]
struct Task {
    id: String,
    kind: TaskKind,
    model: SpacetimeModel,
    chi_sign: ChiralitySign,
    p: Vec<f64>,
    q: Vec<f64>,
    df: Vec<f64>,
    method: MethodName,
    family: Option<FamilyName>,
    family_bound: Option<f64>,
    grid_pad: f64,
    grid_points: usize,
    oracle: OracleSettings,
    steep_iterations: usize,
    trials: usize,
    seed: u64,
    tol: f64,
    close_tol: f64,
}

impl Task {
    fn new(id: String, kind: TaskKind, model: SpacetimeModel, chi_sign: ChiralitySign) -> Self {
        Task {
            id,
            kind,
            model,
            chi_sign,
            p: Vec::new(),
            q: Vec::new(),
            df: Vec::new(),
            method: MethodName::All,
            family: None,
            family_bound: None,
            grid_pad: DEFAULT_GRID_PAD,
            grid_points: DEFAULT_GRID_POINTS,
            oracle: OracleSettings::default(),
            steep_iterations: SteepSettings::default().iterations,
            trials: ScanSettings::default().trials,
            seed: 0,
            tol: NSD_TOL,
            close_tol: DEFAULT_CLOSE_TOL,
        }
    }
}

/// One output row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row {
    pub task: String,
    pub model: String,
    pub n: usize,
    pub p: String,
    pub q: String,
    pub method: String,
    pub value: String,
    pub margin: String,
    pub gap: String,
    pub seed: String,
    pub status: String,
    pub tol: String,
}

const HEADER: [&str; 12] = [
    "task", "model", "n", "p", "q", "method", "value", "margin", "gap", "seed", "status", "tol",
];

impl Row {
    fn fields(&self) -> [String; 12] {
        [
            self.task.clone(),
            self.model.clone(),
            self.n.to_string(),
            self.p.clone(),
            self.q.clone(),
            self.method.clone(),
            self.value.clone(),
            self.margin.clone(),
            self.gap.clone(),
            self.seed.clone(),
            self.status.clone(),
            self.tol.clone(),
        ]
    }
}

struct Sidecar {
    name: String,
    contents: String,
}

#[derive(Default)]
struct Outcome {
    rows: Vec<Row>,
    summary: Vec<String>,
    sidecars: Vec<Sidecar>,
    failed: bool,
}

fn fmt_point(x: &[f64]) -> String {
    x.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(";")
}

/// Shortest round-trip form, in exponent notation for very small or large
/// magnitudes.
fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn base_row(task: &Task) -> Row {
    Row {
        task: task.id.clone(),
        model: task.model.to_string(),
        n: task.model.n(),
        ..Row::default()
    }
}

fn build_model(
    kind: ModelName,
    n: usize,
    a: Option<&str>,
    domain: Option<&[f64]>,
) -> Result<SpacetimeModel> {
    match kind {
        ModelName::Minkowski => SpacetimeModel::minkowski(n),
        ModelName::Flrw => {
            let scale = ScaleFactor::parse(a.unwrap_or("t"))?;
            let domain = domain.unwrap_or(&DEFAULT_T_DOMAIN);
            if domain.len() != 2 {
                return Err(Error::Config(format!(
                    "t-domain needs two values, got {}",
                    domain.len()
                )));
            }
            SpacetimeModel::flrw(n, scale, domain[0], domain[1])
        }
    }
}

impl ModelArgs {
    fn resolve(&self) -> Result<(SpacetimeModel, ChiralitySign)> {
        let model = build_model(self.model, self.n, Some(&self.a), Some(&self.t_domain))?;
        Ok((model, ChiralitySign::from_f64(self.chi_sign)?))
    }
}

impl FamilyArgs {
    fn apply(&self, task: &mut Task) {
        task.family = self.family;
        task.family_bound = self.family_bound;
        task.grid_pad = self.grid_pad;
        task.grid_points = self.grid_points;
    }
}

fn tasks_from_command(cmd: Command) -> Result<Vec<Task>> {
    let task = match cmd {
        Command::Dist(a) => {
            let (model, sign) = a.model.resolve()?;
            let mut t = Task::new("dist".into(), TaskKind::Dist, model, sign);
            t.p = a.p;
            t.q = a.q;
            t.method = a.method;
            a.family.apply(&mut t);
            t.oracle = OracleSettings {
                segments: a.segments,
                iterations: a.iterations,
                starts: a.starts,
                seed: a.seed,
            };
            t.seed = a.seed;
            t
        }
        Command::CheckCausal(a) | Command::CheckSteep(a) => {
            // both variants share arguments; the kind is fixed below
            let (model, sign) = a.model.resolve()?;
            let mut t = Task::new(String::new(), TaskKind::CheckCausal, model, sign);
            t.p = a.point;
            t.df = a.df;
            t.tol = a.tol;
            t
        }
        Command::VerifyClifford(a) => {
            let model = SpacetimeModel::minkowski(a.n)?;
            let mut t = Task::new(
                "verify-clifford".into(),
                TaskKind::VerifyClifford,
                model,
                ChiralitySign::from_f64(a.chi_sign)?,
            );
            t.tol = a.tol;
            t
        }
        Command::EquivalenceScan(a) => {
            let (model, sign) = a.model.resolve()?;
            let mut t = Task::new(
                "equivalence-scan".into(),
                TaskKind::EquivalenceScan,
                model,
                sign,
            );
            t.trials = a.trials;
            t.seed = a.seed;
            t.tol = a.tol;
            t
        }
        Command::Gap(a) => {
            let (model, sign) = a.model.resolve()?;
            let mut t = Task::new("gap".into(), TaskKind::Gap, model, sign);
            t.p = a.p;
            t.q = a.q;
            a.family.apply(&mut t);
            t.oracle = OracleSettings {
                segments: a.segments,
                iterations: a.iterations,
                starts: a.starts,
                seed: a.seed,
            };
            t.seed = a.seed;
            t.close_tol = a.close_tol;
            t
        }
        Command::Run(a) => return load_scenario(&a.config),
    };
    Ok(vec![task])
}

/// Read and resolve a scenario file into executable tasks.
fn load_scenario(path: &Path) -> Result<Vec<Task>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: ScenarioConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    resolve_scenario(&cfg)
}

fn resolve_scenario(cfg: &ScenarioConfig) -> Result<Vec<Task>> {
    let m = &cfg.model;
    if m.kind == ModelName::Minkowski && (m.a.is_some() || m.t_domain.is_some()) {
        return Err(Error::Config(
            "a and t_domain apply only to flrw models".into(),
        ));
    }
    let model = build_model(
        m.kind,
        m.n,
        m.a.as_deref(),
        m.t_domain.as_ref().map(|d| &d[..]),
    )?;
    let sign = ChiralitySign::from_f64(m.chi_sign.unwrap_or(1.0))?;
    if cfg.tasks.is_empty() {
        return Err(Error::Config("scenario has no tasks".into()));
    }

    let point = |r: &Option<PointRef>, what: &str, id: &str| -> Result<Vec<f64>> {
        match r {
            None => Err(Error::Config(format!("task '{id}' needs '{what}'"))),
            Some(PointRef::Inline(v)) => Ok(v.clone()),
            Some(PointRef::Named(name)) => cfg
                .points
                .get(name)
                .cloned()
                .ok_or_else(|| Error::Config(format!("task '{id}': unknown point '{name}'"))),
        }
    };

    let mut out = Vec::with_capacity(cfg.tasks.len());
    for (i, spec) in cfg.tasks.iter().enumerate() {
        let id = spec.id.clone().unwrap_or_else(|| format!("task{}", i + 1));
        if out.iter().any(|t: &Task| t.id == id) {
            return Err(Error::Config(format!("duplicate task id '{id}'")));
        }
        if id.is_empty() || id.contains(['/', '\\']) || id.starts_with('.') {
            return Err(Error::Config(format!("invalid task id '{id}'")));
        }
        let mut t = Task::new(id.clone(), spec.task, model.clone(), sign);
        t.method = spec.method.unwrap_or(MethodName::All);
        if spec.task.needs_seed(t.method) && spec.seed.is_none() {
            return Err(Error::Config(format!("task '{id}' needs an explicit seed")));
        }
        t.seed = spec.seed.unwrap_or(0);
        match spec.task {
            TaskKind::Dist | TaskKind::Gap => {
                t.p = point(&spec.p, "p", &id)?;
                t.q = point(&spec.q, "q", &id)?;
            }
            TaskKind::CheckCausal | TaskKind::CheckSteep => {
                t.p = point(&spec.point, "point", &id)?;
                t.df = spec
                    .df
                    .clone()
                    .ok_or_else(|| Error::Config(format!("task '{id}' needs 'df'")))?;
            }
            TaskKind::VerifyClifford | TaskKind::EquivalenceScan => {}
        }
        t.family = spec.family;
        t.family_bound = spec.family_bound;
        t.grid_pad = spec.grid_pad.unwrap_or(DEFAULT_GRID_PAD);
        t.grid_points = spec.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        let d = OracleSettings::default();
        t.oracle = OracleSettings {
            segments: spec.segments.unwrap_or(d.segments),
            iterations: spec.iterations.unwrap_or(d.iterations),
            starts: spec.starts.unwrap_or(d.starts),
            seed: t.seed,
        };
        t.trials = spec.trials.unwrap_or(t.trials);
        t.tol = spec.tol.unwrap_or(match spec.task {
            TaskKind::VerifyClifford => DEFAULT_CLIFFORD_TOL,
            _ => NSD_TOL,
        });
        t.close_tol = spec.close_tol.unwrap_or(DEFAULT_CLOSE_TOL);
        out.push(t);
    }
    Ok(out)
}

fn make_family(task: &Task) -> Result<SteepFamily> {
    let grid = bounding_grid(
        &task.model,
        &task.p,
        &task.q,
        task.grid_pad,
        task.grid_points,
    );
    let n = task.model.n();
    let default = if task.model.is_minkowski() {
        FamilyName::Boost
    } else {
        FamilyName::Time
    };
    match task.family.unwrap_or(default) {
        FamilyName::Boost => {
            SteepFamily::boost(n, task.family_bound.unwrap_or(DEFAULT_MAX_RAPIDITY), grid)
        }
        FamilyName::Time => SteepFamily::time(grid),
        FamilyName::TimeLinear => {
            SteepFamily::time_plus_linear(n, task.family_bound.unwrap_or(1.0), grid)
        }
        FamilyName::MilneBoost => {
            SteepFamily::milne_boost(task.family_bound.unwrap_or(DEFAULT_MAX_RAPIDITY), grid)
        }
    }
}

fn steep_settings(task: &Task) -> SteepSettings {
    SteepSettings {
        starts: task.oracle.starts,
        iterations: task.steep_iterations,
        seed: task.seed,
    }
}

fn certificate_sidecar(task: &Task, result: &DistanceResult) -> Option<Sidecar> {
    let mut s = String::new();
    let suffix = match &result.certificate {
        Certificate::None => return None,
        Certificate::Curve(curve) => {
            let n = task.model.n();
            let header: Vec<String> = std::iter::once("t".to_string())
                .chain((1..n).map(|i| format!("x{i}")))
                .collect();
            let _ = writeln!(s, "{}", header.join(","));
            for node in curve.nodes() {
                let line: Vec<String> = node.iter().map(|v| fmt_num(*v)).collect();
                let _ = writeln!(s, "{}", line.join(","));
            }
            "curve"
        }
        Certificate::Parameters(theta) => {
            let header: Vec<String> = (0..theta.len()).map(|i| format!("theta{i}")).collect();
            let _ = writeln!(s, "{}", header.join(","));
            let line: Vec<String> = theta.iter().map(|v| fmt_num(*v)).collect();
            let _ = writeln!(s, "{}", line.join(","));
            "params"
        }
    };
    Some(Sidecar {
        name: format!("{}.{}.{}.csv", task.id, result.method, suffix),
        contents: s,
    })
}

fn distance_row(task: &Task, result: &DistanceResult, tol: f64) -> Row {
    Row {
        p: fmt_point(&task.p),
        q: fmt_point(&task.q),
        method: result.method.to_string(),
        value: fmt_num(result.value),
        seed: match result.method {
            crate::distance::Method::Analytic => String::new(),
            _ => task.seed.to_string(),
        },
        status: "ok".into(),
        tol: fmt_num(tol),
        ..base_row(task)
    }
}

fn run_dist(task: &Task, out: &mut Outcome) -> Result<()> {
    let want = |m: MethodName| task.method == m || task.method == MethodName::All;
    let mut results: Vec<(DistanceResult, f64)> = Vec::new();
    let mut line = format!("{} [{} n={}]", task.id, task.model, task.model.n());

    if want(MethodName::Analytic) {
        match analytic_distance(&task.model, &task.p, &task.q) {
            Ok(r) => results.push((r, 0.0)),
            Err(Error::Unsupported(msg)) if task.method == MethodName::All => {
                out.rows.push(Row {
                    p: fmt_point(&task.p),
                    q: fmt_point(&task.q),
                    method: "analytic".into(),
                    status: "unsupported".into(),
                    tol: fmt_num(0.0),
                    ..base_row(task)
                });
                let _ = write!(line, " analytic=unsupported({msg})");
            }
            Err(e) => return Err(e),
        }
    }
    if want(MethodName::Oracle) {
        results.push((
            oracle_distance(&task.model, &task.p, &task.q, task.oracle)?,
            IMPROVEMENT_TOL,
        ));
    }
    if want(MethodName::Steep) {
        let family = make_family(task)?;
        results.push((
            steep_family_distance(&task.model, &family, &task.p, &task.q, steep_settings(task))?,
            STEEP_SLACK,
        ));
    }

    for (r, tol) in &results {
        out.rows.push(distance_row(task, r, *tol));
        let _ = write!(line, " {}={}", r.method, fmt_num(r.value));
        out.sidecars.extend(certificate_sidecar(task, r));
    }

    // lower and upper bounds must sandwich each other
    let value_of = |m: crate::distance::Method| {
        results
            .iter()
            .find(|(r, _)| r.method == m)
            .map(|(r, _)| r.value)
    };
    if let (Some(lo), Some(hi)) = (
        value_of(crate::distance::Method::CurveOracle),
        value_of(crate::distance::Method::SteepVariational),
    ) {
        if lo > hi + SANDWICH_EPS {
            out.failed = true;
            for row in out.rows.iter_mut().filter(|r| r.task == task.id) {
                row.status = "sandwich-violated".into();
            }
            line.push_str(" SANDWICH VIOLATED");
        }
    }
    out.summary.push(line);
    Ok(())
}

fn verdict_row(task: &Task, v: &CausalVerdict, steep: bool) -> Row {
    let (holds, margin) = if steep {
        (v.steep, v.steep_margin)
    } else {
        (v.causal, v.causal_margin)
    };
    Row {
        p: fmt_point(&task.p),
        q: fmt_point(&task.df),
        method: v.route.as_str().into(),
        value: holds.to_string(),
        margin: fmt_num(margin),
        status: "ok".into(),
        tol: fmt_num(task.tol),
        ..base_row(task)
    }
}

fn run_check(task: &Task, steep: bool, out: &mut Outcome) -> Result<()> {
    let sample = CovectorSample::new(task.p.clone(), task.df.clone())?;
    let cliff = CliffordModule::build(task.model.n(), task.chi_sign)?;
    let (g, o) = if steep {
        (
            gradient_steep_check(&task.model, &sample, task.tol)?,
            operator_steep_check(&cliff, &task.model, &sample, task.tol)?,
        )
    } else {
        (
            gradient_causal_check(&task.model, &sample, task.tol)?,
            operator_causal_check(&cliff, &task.model, &sample, task.tol)?,
        )
    };
    let mut rows = vec![verdict_row(task, &g, steep), verdict_row(task, &o, steep)];
    let (hg, ho) = if steep {
        (g.steep, o.steep)
    } else {
        (g.causal, o.causal)
    };
    let what = if steep { "steep" } else { "causal" };
    if hg != ho {
        out.failed = true;
        for r in &mut rows {
            r.status = "routes-disagree".into();
        }
    }
    out.summary.push(format!(
        "{} [{} n={}] {what}: gradient={hg} operator={ho}{}",
        task.id,
        task.model,
        task.model.n(),
        if hg == ho { "" } else { " ROUTES DISAGREE" }
    ));
    out.rows.extend(rows);
    Ok(())
}

fn run_verify(task: &Task, out: &mut Outcome) -> Result<()> {
    let cliff = CliffordModule::build(task.model.n(), task.chi_sign)?;
    let report = verify_clifford(&cliff, task.tol);
    let status = if report.passed { "pass" } else { "fail" };
    out.failed |= !report.passed;
    out.rows.push(Row {
        model: "clifford".into(),
        method: "identities".into(),
        value: report.checks.len().to_string(),
        margin: fmt_num(report.max_deviation),
        status: status.into(),
        tol: fmt_num(task.tol),
        ..base_row(task)
    });
    let mut line = format!(
        "{} n={} fiber={} checks={} max_deviation={:e} {status}",
        task.id,
        cliff.n(),
        cliff.fiber_dim(),
        report.checks.len(),
        report.max_deviation
    );
    for v in report.violations() {
        let _ = write!(line, "\n  violated: {} ({:e})", v.identity, v.deviation);
    }
    out.summary.push(line);
    Ok(())
}

fn run_scan(task: &Task, out: &mut Outcome) -> Result<()> {
    let cliff = CliffordModule::build(task.model.n(), task.chi_sign)?;
    let report = equivalence_scan(
        &cliff,
        &task.model,
        ScanSettings {
            trials: task.trials,
            seed: task.seed,
            tol: task.tol,
        },
    )?;
    let passed = report.passed();
    out.failed |= !passed;
    let status = if passed { "pass" } else { "fail" };
    for (what, agree, compared) in [
        ("causal", report.causal_agree, report.causal_compared),
        ("steep", report.steep_agree, report.steep_compared),
    ] {
        out.rows.push(Row {
            method: format!("gradient-vs-operator:{what}"),
            value: format!("{agree}/{compared}"),
            margin: fmt_num(report.max_spectrum_residual),
            seed: task.seed.to_string(),
            status: status.into(),
            tol: fmt_num(task.tol),
            ..base_row(task)
        });
    }
    let mut line = format!(
        "{} [{} n={}] trials={} seed={} causal agreement {}/{} steep agreement {}/{} \
         spectrum residual {:e}",
        task.id,
        task.model,
        task.model.n(),
        report.trials,
        report.seed,
        report.causal_agree,
        report.causal_compared,
        report.steep_agree,
        report.steep_compared,
        report.max_spectrum_residual
    );
    if let Some(r) = report.max_extension_residual {
        let _ = write!(line, " extension residual {r:e}");
    }
    if let Some(r) = report.max_split_residual {
        let _ = write!(line, " split residual {r:e}");
    }
    if report.steep_not_causal > 0 {
        let _ = write!(line, " steep-not-causal={}", report.steep_not_causal);
    }
    let _ = write!(line, " {status}");
    out.summary.push(line);
    Ok(())
}

fn run_gap(task: &Task, out: &mut Outcome) -> Result<()> {
    let family = make_family(task)?;
    let report = duality_gap(
        &task.model,
        &family,
        &task.p,
        &task.q,
        task.oracle,
        steep_settings(task),
        task.close_tol,
    )?;
    let status = if report.sandwich_violated {
        out.failed = true;
        "sandwich-violated"
    } else if report.family_too_small {
        "family-too-small"
    } else {
        "closed"
    };
    for (r, tol) in [
        (&report.lower, IMPROVEMENT_TOL),
        (&report.upper, STEEP_SLACK),
    ] {
        let mut row = distance_row(task, r, tol);
        row.gap = fmt_num(report.gap);
        row.status = status.into();
        row.tol = format!("{};close={}", fmt_num(tol), fmt_num(task.close_tol));
        out.rows.push(row);
        out.sidecars.extend(certificate_sidecar(task, r));
    }
    out.summary.push(format!(
        "{} [{} n={}] lower={} upper={} gap={:e} family={} {status}",
        task.id,
        task.model,
        task.model.n(),
        fmt_num(report.lower.value),
        fmt_num(report.upper.value),
        report.gap,
        family.name()
    ));
    Ok(())
}

fn execute(task: &Task, out: &mut Outcome) -> Result<()> {
    match task.kind {
        TaskKind::Dist => run_dist(task, out),
        TaskKind::CheckCausal => run_check(task, false, out),
        TaskKind::CheckSteep => run_check(task, true, out),
        TaskKind::VerifyClifford => run_verify(task, out),
        TaskKind::EquivalenceScan => run_scan(task, out),
        TaskKind::Gap => run_gap(task, out),
    }
}

fn render_csv(rows: &[Row]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

fn write_out_dir(dir: &Path, csv: &[u8], summary: &str, sidecars: &[Sidecar]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), csv)?;
    fs::write(dir.join("summary.txt"), summary)?;
    for s in sidecars {
        fs::write(dir.join(&s.name), &s.contents)?;
    }
    Ok(())
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::Domain(_)
            | Error::DimensionMismatch { .. }
            | Error::Unsupported(_)
            | Error::EmptyFamily
    )
}

/// Parse `args` (including the program name), run, and write the CSV table
/// to `stdout` and the summary to `stderr`. Returns the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };

    let fixed_kind = match &cli.command {
        Command::CheckCausal(_) => Some(TaskKind::CheckCausal),
        Command::CheckSteep(_) => Some(TaskKind::CheckSteep),
        _ => None,
    };
    let tasks = match tasks_from_command(cli.command) {
        Ok(mut t) => {
            if let Some(kind) = fixed_kind {
                for task in &mut t {
                    task.kind = kind;
                    task.id = kind.as_str().into();
                }
            }
            t
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };

    let mut out = Outcome::default();
    for task in &tasks {
        if let Err(e) = execute(task, &mut out) {
            let _ = writeln!(stderr, "error in task '{}': {e}", task.id);
            return if is_usage_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAILED
            };
        }
    }

    let csv = match render_csv(&out.rows) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_FAILED;
        }
    };
    let mut summary = out.summary.join("\n");
    summary.push('\n');
    let _ = stdout.write_all(&csv);
    let _ = stderr.write_all(summary.as_bytes());

    if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
        if let Err(e) = write_out_dir(Path::new(&dir), &csv, &summary, &out.sidecars) {
            let _ = writeln!(stderr, "error writing output directory: {e}");
            return EXIT_FAILED;
        }
    }

    if out.failed {
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

/// Entry point used by the binary.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
