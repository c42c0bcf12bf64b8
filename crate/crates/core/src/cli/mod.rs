//! Command-line front end: configuration, dispatch and emission.

mod validate;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::edge_analysis::{
    cusps, finite_n_cusp, find_critical_points, hard_edge, soft_edges, tune_exact_cusp,
};
use crate::error::Error;
use crate::fredholm::{finite_hard_edge_det, hard_edge_prediction, pearcey_gap};
use crate::kernels::{grid_csv, HardEdgeKernelSpec, PearceyKernel, PearceyParams, Representation};
use crate::montecarlo::{empirical_cusp_counts, empirical_smallest_cdf, simulate, Mode};
use crate::spectral_model::{density_grid, support_with, PopulationSpectrum};

pub use validate::{run_checks, CheckOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the worker threads.
pub const ENV_THREADS: &str = "RMTEDGE_THREADS";
/// Environment variable giving the directory relative output paths are resolved against.
pub const ENV_OUTPUT_DIR: &str = "RMTEDGE_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[default]
    Density,
    Support,
    CuspScan,
    Pearcey,
    HardEdge,
    Simulate,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    #[default]
    HardEdge,
    Cusp,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityKnobs {
    pub range: [f64; 2],
    pub points: usize,
    /// Use the finite-size spectrum (n/N and the rounded atom weights).
    pub finite_n: bool,
}

impl Default for DensityKnobs {
    fn default() -> Self {
        Self {
            range: [0.0, 4.0],
            points: 800,
            finite_n: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupportKnobs {
    pub scan_points: usize,
}

impl Default for SupportKnobs {
    fn default() -> Self {
        Self { scan_points: 2048 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CuspScanKnobs {
    pub sizes: Vec<usize>,
    /// Also report the family with an exact cusp at each size.
    pub tune: bool,
    /// Atom moved by the tuning; the last atom when absent.
    pub tunable_atom: Option<usize>,
}

impl Default for CuspScanKnobs {
    fn default() -> Self {
        Self {
            sizes: vec![50, 100, 200],
            tune: false,
            tunable_atom: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PearceyKnobs {
    pub tau: f64,
    /// Interval (s, t) of the gap probability; a kernel grid is emitted when absent.
    pub gap: Option<[f64; 2]>,
    pub grid_range: [f64; 2],
    pub grid_points: usize,
    pub representation: Representation,
    pub order: usize,
}

impl Default for PearceyKnobs {
    fn default() -> Self {
        Self {
            tau: 0.0,
            gap: None,
            grid_range: [-3.0, 3.0],
            grid_points: 13,
            representation: Representation::Functions,
            order: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardEdgeKnobs {
    pub alpha: i32,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub s: Vec<f64>,
    /// Add the 1/N correction, the finite-size determinant and the residual.
    pub expansion: bool,
    pub order: usize,
    pub nodes: usize,
}

impl Default for HardEdgeKnobs {
    fn default() -> Self {
        Self {
            alpha: 2,
            big_n: 100,
            s: (1..=9).map(f64::from).collect(),
            expansion: false,
            order: 40,
            nodes: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateKnobs {
    #[serde(rename = "N")]
    pub big_n: usize,
    /// Number of population eigenvalues; round(gamma N) when absent.
    pub n: Option<usize>,
    pub reps: usize,
    pub seed: u64,
    pub mode: SimMode,
    /// Half-width of the rescaled window kept in cusp mode.
    pub window: f64,
    /// Thresholds of the survival function in hard-edge mode.
    pub s_grid: Vec<f64>,
}

impl Default for SimulateKnobs {
    fn default() -> Self {
        Self {
            big_n: 100,
            n: None,
            reps: 1000,
            seed: 0,
            mode: SimMode::HardEdge,
            window: 3.0,
            s_grid: vec![0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateKnobs {
    pub quick: bool,
}

/// Every knob of a run. Unknown keys are rejected when read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Command,
    pub spec_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub density: DensityKnobs,
    pub support: SupportKnobs,
    pub cusp_scan: CuspScanKnobs,
    pub pearcey: PearceyKnobs,
    pub hard_edge: HardEdgeKnobs,
    pub simulate: SimulateKnobs,
    pub validate: ValidateKnobs,
    pub threads: Option<usize>,
}

/// Failure of a CLI run, carrying its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_CONFIG },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(e.to_string())
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
    }

    /// Range checks on every knob, run before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        self.validate_knobs()?;
        let needs_spec = matches!(
            self.command,
            Command::Density | Command::Support | Command::CuspScan
        ) || (self.command == Command::Simulate && self.simulate.mode != SimMode::HardEdge);
        if needs_spec && self.spec_path.is_none() {
            return Err(CliError::config(format!("{:?} needs --spec", self.command)));
        }
        Ok(())
    }

    /// Range checks on the numeric knobs alone.
    pub fn validate_knobs(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::config(m));
        let d = &self.density;
        if !(d.range[0] < d.range[1] && d.range[0] >= 0.0) || d.points < 2 {
            return bad(format!("density: need 0 <= lo < hi and >= 2 points, got {:?}", d));
        }
        if self.support.scan_points < 16 {
            return bad("support: scan_points must be >= 16".into());
        }
        if self.cusp_scan.sizes.is_empty() || self.cusp_scan.sizes.contains(&0) {
            return bad("cusp_scan: sizes must be positive".into());
        }
        let p = &self.pearcey;
        if let Some([s, t]) = p.gap {
            if !(s <= t) {
                return bad(format!("pearcey: gap needs s <= t, got ({s}, {t})"));
            }
        }
        if !(p.grid_range[0] <= p.grid_range[1]) || p.grid_points == 0 || p.order < 8 {
            return bad("pearcey: invalid grid or order < 8".into());
        }
        let h = &self.hard_edge;
        if h.big_n == 0 || (h.big_n as i64 + h.alpha as i64) <= 0 {
            return bad("hard_edge: N and N + alpha must be positive".into());
        }
        if h.s.is_empty() || h.s.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("hard_edge: s values must be positive".into());
        }
        if h.order < 8 || h.nodes < 16 {
            return bad("hard_edge: order >= 8 and nodes >= 16 required".into());
        }
        let m = &self.simulate;
        if m.big_n == 0 || m.reps == 0 || m.n == Some(0) {
            return bad("simulate: N, n and reps must be positive".into());
        }
        if !(m.window > 0.0) {
            return bad("simulate: window must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 of the knobs that influence results.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_path = None;
        c.threads = None;
        let digest = Sha256::digest(serde_json::to_vec(&c).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn provenance(&self) -> serde_json::Value {
        serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": self.hash(),
            "seed": self.simulate.seed,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "rmtedge", version, about = "Spectral edges, cusps and hard-edge corrections")]
pub struct Cli {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub show_config: bool,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Cmd>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Limiting (or finite-size) eigenvalue density on a grid.
    Density(DensityArgs),
    /// Support intervals and critical points.
    Support(SpecArg),
    /// Cusps, soft edges and finite-size cusp sequences.
    CuspScan(CuspScanArgs),
    /// Pearcey kernel grid or gap probability.
    Pearcey(PearceyArgs),
    /// Bessel gap probability and its 1/N expansion.
    HardEdge(HardEdgeArgs),
    /// Monte Carlo sampling of the smallest or cusp eigenvalues.
    Simulate(SimulateArgs),
    /// Run the numerical self-checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SpecArg {
    /// Population spectrum JSON file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Interval as lo:hi.
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub finite_n: bool,
}

#[derive(Debug, Args)]
pub struct CuspScanArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Comma-separated sizes N.
    #[arg(long = "sizes")]
    pub sizes: Option<String>,
    #[arg(long)]
    pub tune: bool,
    #[arg(long)]
    pub tunable_atom: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PearceyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Emit the gap probability on [s, t] instead of a kernel grid.
    #[arg(long)]
    pub gap: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Grid as lo:hi:count.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub representation: Option<Representation>,
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct HardEdgeArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long)]
    pub expansion: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<i32>,
    #[arg(long = "N")]
    pub big_n: Option<usize>,
    /// Values of s as lo:hi:count or a comma-separated list.
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long = "N")]
    pub big_n: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<SimMode>,
    #[arg(long)]
    pub window: Option<f64>,
    /// Survival thresholds as a comma-separated list.
    #[arg(long)]
    pub s_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub quick: bool,
}

/// Parses "lo:hi" or "lo:hi:count" (linearly spaced) or "a,b,c".
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::config(format!("not a number: {s:?}")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [a, b] => Ok(vec![num(a)?, num(b)?]),
            [a, b, c] => {
                let (a, b) = (num(a)?, num(b)?);
                let k: usize = c
                    .trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("not a count: {c:?}")))?;
                if k < 2 {
                    return Ok(vec![a]);
                }
                Ok((0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect())
            }
            _ => Err(CliError::config(format!("bad range {text:?}"))),
        }
    } else {
        text.split(',').map(num).collect()
    }
}

fn pair(text: &str) -> Result<[f64; 2], CliError> {
    match parse_values(text)?.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(CliError::config(format!("expected lo:hi, got {text:?}"))),
    }
}

/// Merges a parsed command line into a configuration.
pub fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.output.is_some() {
        cfg.output_path = cli.output.clone();
    }
    let set_spec = |cfg: &mut RunConfig, s: &SpecArg| {
        if s.spec.is_some() {
            cfg.spec_path = s.spec.clone();
        }
    };
    match &cli.command {
        None => {}
        Some(Cmd::Density(a)) => {
            cfg.command = Command::Density;
            set_spec(&mut cfg, &a.spec);
            if let Some(r) = &a.range {
                cfg.density.range = pair(r)?;
            }
            if let Some(p) = a.points {
                cfg.density.points = p;
            }
            cfg.density.finite_n |= a.finite_n;
        }
        Some(Cmd::Support(a)) => {
            cfg.command = Command::Support;
            set_spec(&mut cfg, a);
        }
        Some(Cmd::CuspScan(a)) => {
            cfg.command = Command::CuspScan;
            set_spec(&mut cfg, &a.spec);
            if let Some(s) = &a.sizes {
                cfg.cusp_scan.sizes = s
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| CliError::config(format!("bad size {v:?}"))))
                    .collect::<Result<_, _>>()?;
            }
            cfg.cusp_scan.tune |= a.tune;
            if a.tunable_atom.is_some() {
                cfg.cusp_scan.tunable_atom = a.tunable_atom;
            }
        }
        Some(Cmd::Pearcey(a)) => {
            cfg.command = Command::Pearcey;
            let p = &mut cfg.pearcey;
            if let Some(t) = a.tau {
                p.tau = t;
            }
            if a.gap || a.s.is_some() || a.t.is_some() {
                let [s0, t0] = p.gap.unwrap_or([-1.0, 1.0]);
                p.gap = Some([a.s.unwrap_or(s0), a.t.unwrap_or(t0)]);
            }
            if let Some(g) = &a.grid {
                let v = g.split(':').collect::<Vec<_>>();
                if v.len() != 3 {
                    return Err(CliError::config("grid must be lo:hi:count"));
                }
                p.grid_range = pair(&format!("{}:{}", v[0], v[1]))?;
                p.grid_points = v[2]
                    .trim()
                    .parse()
                    .map_err(|_| CliError::config("bad grid count"))?;
            }
            if let Some(r) = a.representation {
                p.representation = r;
            }
            if let Some(o) = a.order {
                p.order = o;
            }
        }
        Some(Cmd::HardEdge(a)) => {
            cfg.command = Command::HardEdge;
            set_spec(&mut cfg, &a.spec);
            let h = &mut cfg.hard_edge;
            h.expansion |= a.expansion;
            if let Some(v) = a.alpha {
                h.alpha = v;
            }
            if let Some(v) = a.big_n {
                h.big_n = v;
            }
            if let Some(s) = &a.s {
                h.s = parse_values(s)?;
            }
            if let Some(v) = a.order {
                h.order = v;
            }
            if let Some(v) = a.nodes {
                h.nodes = v;
            }
        }
        Some(Cmd::Simulate(a)) => {
            cfg.command = Command::Simulate;
            set_spec(&mut cfg, &a.spec);
            let m = &mut cfg.simulate;
            if let Some(v) = a.big_n {
                m.big_n = v;
            }
            if a.n.is_some() {
                m.n = a.n;
            }
            if let Some(v) = a.reps {
                m.reps = v;
            }
            if let Some(v) = a.seed {
                m.seed = v;
            }
            if let Some(v) = a.mode {
                m.mode = v;
            }
            if let Some(v) = a.window {
                m.window = v;
            }
            if let Some(s) = &a.s_grid {
                m.s_grid = parse_values(s)?;
            }
        }
        Some(Cmd::Validate(a)) => {
            cfg.command = Command::Validate;
            cfg.validate.quick |= a.quick;
        }
    }
    if cfg.threads.is_none() {
        if let Ok(v) = std::env::var(ENV_THREADS) {
            cfg.threads = Some(
                v.parse()
                    .map_err(|_| CliError::config(format!("{ENV_THREADS} must be an integer")))?,
            );
        }
    }
    Ok(cfg)
}

fn load_spec(cfg: &RunConfig) -> Result<PopulationSpectrum, CliError> {
    let path = cfg
        .spec_path
        .as_ref()
        .ok_or_else(|| CliError::config("a population spectrum (--spec) is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    Ok(PopulationSpectrum::from_json(&text)?)
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(ENV_OUTPUT_DIR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Result of a command: the text body and whether it is CSV or JSON.
enum Body {
    Csv(String),
    Json(serde_json::Value),
}

fn render(cfg: &RunConfig, body: Body) -> String {
    match body {
        Body::Csv(csv) => format!("# {}\n{csv}", cfg.provenance()),
        Body::Json(v) => {
            let wrapped = serde_json::json!({ "provenance": cfg.provenance(), "result": v });
            format!("{}\n", serde_json::to_string_pretty(&wrapped).expect("json"))
        }
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(p) => std::fs::write(resolve_output(p), text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable result")
}

/// Runs a validated configuration and returns the exit status.
pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    cfg.validate()?;
    if let Some(t) = cfg.threads {
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut code = EXIT_OK;
    let body = match cfg.command {
        Command::Density => {
            let spec = load_spec(cfg)?;
            let d = &cfg.density;
            let spec = spec.effective(d.finite_n)?;
            // The density is evaluated off the origin, where it may be singular.
            let lo = if d.range[0] > 0.0 { d.range[0] } else { 1e-6 * d.range[1] };
            let curve = density_grid(&spec, lo, d.range[1], d.points)?;
            Body::Csv(curve.to_csv())
        }
        Command::Support => {
            let spec = load_spec(cfg)?;
            Body::Json(to_json(&support_with(&spec, cfg.support.scan_points)?))
        }
        Command::CuspScan => Body::Json(cusp_scan(cfg, &load_spec(cfg)?)?),
        Command::Pearcey => {
            let p = &cfg.pearcey;
            match p.gap {
                Some([s, t]) => {
                    let g = pearcey_gap(p.tau, s, t, p.order)?;
                    Body::Csv(format!("s,t,tau,det\n{s},{t},{},{:.15e}\n", p.tau, g.value))
                }
                None => {
                    let k = PearceyKernel::new(PearceyParams::new(p.tau))?;
                    let xs = linspace(p.grid_range, p.grid_points);
                    let kernel = RepresentationKernel(k, p.representation);
                    Body::Csv(grid_csv(&kernel, &xs, &xs)?)
                }
            }
        }
        Command::HardEdge => Body::Csv(hard_edge_table(cfg)?),
        Command::Simulate => {
            let (csv, summary) = simulation(cfg)?;
            let summary_text = render(cfg, Body::Json(summary));
            match &cfg.output_path {
                Some(p) => {
                    let mut sp = resolve_output(p).into_os_string();
                    sp.push(".json");
                    std::fs::write(sp, summary_text)?;
                }
                None => std::io::stderr().write_all(summary_text.as_bytes())?,
            }
            Body::Csv(csv)
        }
        Command::Validate => {
            let outcomes = run_checks(cfg.validate.quick);
            let mut csv = String::from("check,status,detail\n");
            for o in &outcomes {
                let status = if o.pass { "PASS" } else { "FAIL" };
                csv.push_str(&format!("{},{status},{}\n", o.name, o.detail.replace(',', ";")));
                if !o.pass {
                    code = EXIT_VALIDATION;
                }
            }
            Body::Csv(csv)
        }
    };
    emit(cfg, &render(cfg, body))?;
    Ok(code)
}

fn linspace(range: [f64; 2], k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![range[0]];
    }
    (0..k)
        .map(|i| range[0] + (range[1] - range[0]) * i as f64 / (k - 1) as f64)
        .collect()
}

struct RepresentationKernel(PearceyKernel, Representation);

impl crate::kernels::KernelEvaluator for RepresentationKernel {
    fn eval(&self, x: f64, y: f64) -> crate::Result<f64> {
        self.0.eval_with(x, y, self.1)
    }
}

fn cusp_scan(cfg: &RunConfig, spec: &PopulationSpectrum) -> Result<serde_json::Value, CliError> {
    let (points, warnings) = find_critical_points(spec);
    let found = cusps(spec)?;
    let mut families = Vec::new();
    for c in &found {
        let mut rows = Vec::new();
        for &big_n in &cfg.cusp_scan.sizes {
            let n = (spec.gamma() * big_n as f64).round() as usize;
            let fam = spec.clone().with_finite_n(big_n, n.max(1))?;
            let row = match finite_n_cusp(&fam, c.c) {
                Ok(seq) => serde_json::json!({ "sequence": seq, "tau_N": crate::edge_analysis::tau_from_kappa(seq.kappa_n, c.g3) }),
                Err(e) => serde_json::json!({ "N": big_n, "error": e.to_string() }),
            };
            rows.push(row);
        }
        families.push(rows);
    }
    let mut tuned = Vec::new();
    if cfg.cusp_scan.tune {
        let atom = cfg
            .cusp_scan
            .tunable_atom
            .unwrap_or(spec.atoms().len().saturating_sub(1));
        for &big_n in &cfg.cusp_scan.sizes {
            let (s, seq) = tune_exact_cusp(spec, big_n, atom)?;
            tuned.push(serde_json::json!({ "spectrum": s, "sequence": seq }));
        }
    }
    let hard = if (spec.gamma() - 1.0).abs() < 1e-12 {
        Some(hard_edge(spec, cfg.hard_edge.big_n, 0)?)
    } else {
        None
    };
    Ok(serde_json::json!({
        "critical_points": points,
        "warnings": warnings,
        "cusps": found,
        "soft_edges": soft_edges(spec),
        "hard_edge": hard,
        "finite_n": families,
        "tuned": tuned,
    }))
}

fn hard_edge_table(cfg: &RunConfig) -> Result<String, CliError> {
    let h = &cfg.hard_edge;
    let base = match &cfg.spec_path {
        Some(_) => load_spec(cfg)?,
        None => PopulationSpectrum::dirac(1.0, 1.0)?,
    };
    let n = (h.big_n as i64 + h.alpha as i64) as usize;
    let consts = hard_edge(&base, h.big_n, h.alpha)?;
    let mut out = if h.expansion {
        String::from("s,F_alpha,correction,prediction,finiteN_det,residual\n")
    } else {
        String::from("s,F_alpha,s_dF_ds\n")
    };
    for &s in &h.s {
        let p = hard_edge_prediction(h.alpha, s, h.big_n, consts.sigma_n, consts.zeta_n, h.order)?;
        if h.expansion {
            let fam = base.clone().with_finite_n(h.big_n, n)?;
            let mut ks = HardEdgeKernelSpec::new(&fam, s)?;
            ks.nodes = h.nodes;
            let det = finite_hard_edge_det(&ks, s, h.order)?.value;
            out.push_str(&format!(
                "{s},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}\n",
                p.f_alpha,
                p.correction,
                p.prediction,
                det,
                det - p.prediction
            ));
        } else {
            out.push_str(&format!("{s},{:.15e},{:.15e}\n", p.f_alpha, p.s_df_ds));
        }
    }
    Ok(out)
}

fn simulation(cfg: &RunConfig) -> Result<(String, serde_json::Value), CliError> {
    let m = &cfg.simulate;
    let base = match &cfg.spec_path {
        Some(_) => load_spec(cfg)?,
        None => PopulationSpectrum::dirac(1.0, 1.0)?,
    };
    let n = m
        .n
        .unwrap_or_else(|| ((base.gamma() * m.big_n as f64).round() as usize).max(1));
    let fam = base.clone().with_finite_n(m.big_n, n)?;
    let lambdas = fam.expanded_lambdas().expect("finite_n present");
    let alpha = n as i64 - m.big_n as i64;
    let (mode, extra) = match m.mode {
        SimMode::HardEdge => {
            let c = hard_edge(&base, m.big_n, alpha as i32)?;
            (Mode::HardEdge { sigma_n: c.sigma_n }, serde_json::json!({ "sigma_N": c.sigma_n, "zeta_N": c.zeta_n }))
        }
        SimMode::Cusp => {
            let cusp = cusps(&base)?
                .into_iter()
                .next()
                .ok_or_else(|| CliError::config("spectrum has no cusp"))?;
            let seq = finite_n_cusp(&fam, cusp.c)?;
            (
                Mode::Cusp {
                    a_n: seq.a_n,
                    sigma_n: seq.sigma_n,
                    window: m.window,
                },
                to_json(&seq),
            )
        }
        SimMode::Global => (Mode::Global, serde_json::Value::Null),
    };
    let run = simulate(&lambdas, m.big_n, m.reps, m.seed, mode)?;
    let mut csv = String::from("replica,value\n");
    for (r, vals) in run.samples.iter().enumerate() {
        for v in vals {
            csv.push_str(&format!("{r},{v:.15e}\n"));
        }
    }
    let stats = match mode {
        Mode::HardEdge { .. } => to_json(&empirical_smallest_cdf(&run, &m.s_grid)?),
        Mode::Cusp { window, .. } => {
            let inner = (window / 3.0 * 2.0).min(window);
            to_json(&[
                empirical_cusp_counts(&run, (-window, window))?,
                empirical_cusp_counts(&run, (-inner, inner))?,
            ])
        }
        Mode::Global => {
            let all: Vec<f64> = run.samples.iter().flatten().cloned().collect();
            let zeros = all.iter().filter(|x| **x < 1e-10).count();
            serde_json::json!({
                "count": all.len(),
                "zeros": zeros,
                "mean": all.iter().sum::<f64>() / all.len() as f64,
            })
        }
    };
    let summary = serde_json::json!({
        "N": m.big_n,
        "n": n,
        "reps": m.reps,
        "seed": m.seed,
        "mode": m.mode,
        "constants": extra,
        "statistics": stats,
    });
    Ok((csv, summary))
}

/// Entry point shared by the binary: parse, run, map failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = build_config(&cli).and_then(|cfg| {
        if cli.show_config {
            cfg.validate_knobs()?;
            let text = serde_json::to_string_pretty(&cfg).expect("config serializes");
            println!("{text}");
            return Ok(EXIT_OK);
        }
        if cli.command.is_none() && cli.config.is_none() {
            return Err(CliError::config("no command given; see --help"));
        }
        run(&cfg)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
