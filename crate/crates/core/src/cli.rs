//! Experiment runner behind the `schrodlab` binary: configuration loading,
//! dispatch to the numerical modules, and atomic report output.
//!
//! A run writes four files into its output directory: `summary.json`
//! (deterministic for a fixed config and seed), `data.csv` in long format
//! (`series,x,y`), `plot.json` describing how to draw the CSV, and
//! `metadata.json` with the timestamp and timing.

use crate::error::{Error, Result};
use crate::exponents::{compare_nondegenerate, de_f64, n_p, ser_f64, Exponents};
use crate::geometry::{self, GeometryOptions};
use crate::kernel::{self, OscillatoryPlan, SurfaceOptions, DEFAULT_EPS};
use crate::potential::{self, BornOptions, Potential, PotentialSpec};
use crate::spectral::{self, Probe, SpectralGrid};
use crate::symbol::{PolySymbol, SymbolFile};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exit status for a run whose asserted tolerances all hold.
pub const EXIT_PASS: i32 = 0;
/// Exit status for a configuration error or a numerical refusal.
pub const EXIT_REFUSED: i32 = 1;
/// Exit status for a completed run with a failed assertion.
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "schrodlab", version, about = "Numerical checks for higher-order Schrödinger equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Type, convexity and curvature of the level surface {P = 1}.
    Analyze(RunArgs),
    /// Exponent tables and admissible intervals.
    Exponents(RunArgs),
    /// Kernel decay fit, evaluator agreement and the scaling identity.
    KernelDecay(RunArgs),
    /// Propagator identities and the L^p - L^q time decay slope.
    Dispersive(RunArgs),
    /// Resolvent identities, Laplace representation and Re λ slopes.
    Resolvent(RunArgs),
    /// Integrated group: closed form, Laplace identity and growth.
    IntegratedGroup(RunArgs),
    /// Perturbed operator: gate, Born series, splitting and growth.
    Potential(RunArgs),
    /// Run every config listed in a suite file.
    Suite(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "SCHRODLAB_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Analyze,
    Exponents,
    KernelDecay,
    Dispersive,
    Resolvent,
    IntegratedGroup,
    Potential,
    Suite,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Analyze => "analyze",
            Kind::Exponents => "exponents",
            Kind::KernelDecay => "kernel-decay",
            Kind::Dispersive => "dispersive",
            Kind::Resolvent => "resolvent",
            Kind::IntegratedGroup => "integrated-group",
            Kind::Potential => "potential",
            Kind::Suite => "suite",
        }
    }
}

impl Command {
    fn split(&self) -> (Kind, &RunArgs) {
        match self {
            Command::Analyze(a) => (Kind::Analyze, a),
            Command::Exponents(a) => (Kind::Exponents, a),
            Command::KernelDecay(a) => (Kind::KernelDecay, a),
            Command::Dispersive(a) => (Kind::Dispersive, a),
            Command::Resolvent(a) => (Kind::Resolvent, a),
            Command::IntegratedGroup(a) => (Kind::IntegratedGroup, a),
            Command::Potential(a) => (Kind::Potential, a),
            Command::Suite(a) => (Kind::Suite, a),
        }
    }
}

/// Entry point used by the binary; returns the process exit status.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_REFUSED } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (kind, args) = cli.command.split();
    if let Some(k) = args.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_REFUSED;
        }
        // a second initialization (e.g. from tests) keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let result = if kind == Kind::Suite {
        run_suite(args)
    } else {
        run_one(kind, &args.config, args.out.as_deref(), args.seed).map(|o| o.pass)
    };
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_REFUSED
        }
    }
}

/// Top-level shape shared by every experiment config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<Kind>,
    pub symbol: SymbolSource,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: Value,
}

/// A symbol file path (relative to the config) or an inline description.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SymbolSource {
    Path(PathBuf),
    Inline(SymbolFile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteConfig {
    #[serde(default)]
    kind: Option<Kind>,
    runs: Vec<PathBuf>,
    #[serde(default)]
    out: Option<PathBuf>,
}

/// Parse a TOML or JSON document, chosen by file extension.
pub fn read_document(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        Some("json") => serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        _ => Err(Error::Config(format!(
            "{}: config files must end in .toml or .json",
            path.display()
        ))),
    }
}

fn load_symbol(src: &SymbolSource, base: &Path) -> Result<(PolySymbol, SymbolFile)> {
    let file: SymbolFile = match src {
        SymbolSource::Inline(f) => f.clone(),
        SymbolSource::Path(p) => {
            let full = base.join(p);
            serde_json::from_value(read_document(&full)?)
                .map_err(|e| Error::Config(format!("symbol file {}: {e}", full.display())))?
        }
    };
    let sym = PolySymbol::try_from(file.clone())?;
    Ok((sym, file))
}

fn params<T: for<'de> Deserialize<'de>>(v: &Value, kind: Kind) -> Result<T> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| Error::Config(format!("{} params: {e}", kind.name())))
}

/// Outcome of a single run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub out_dir: PathBuf,
    pub summary: Value,
}

/// One asserted quantity.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    pub target: String,
    pub pass: bool,
}

fn check(name: &str, value: f64, target: String, pass: bool) -> Check {
    Check {
        name: name.into(),
        value,
        target,
        pass,
    }
}

fn at_most(name: &str, value: f64, tol: f64) -> Check {
    check(name, value, format!("<= {tol:e}"), value <= tol)
}

fn within(name: &str, value: f64, want: f64, tol: f64) -> Check {
    check(name, value, format!("{want} ± {tol}"), (value - want).abs() <= tol)
}

#[derive(Debug, Clone, Serialize)]
struct PlotSpec {
    data: &'static str,
    x_label: String,
    y_label: String,
    log_x: bool,
    log_y: bool,
    title: String,
}

struct Report {
    checks: Vec<Check>,
    result: Value,
    params: Value,
    series: Vec<(String, f64, f64)>,
    plot: PlotSpec,
    /// Additional CSV files with their own column layout.
    tables: Vec<(&'static str, Vec<u8>)>,
}

fn plot(title: &str, x: &str, y: &str, log_x: bool, log_y: bool) -> PlotSpec {
    PlotSpec {
        data: "data.csv",
        x_label: x.into(),
        y_label: y.into(),
        log_x,
        log_y,
        title: title.into(),
    }
}

/// Run one experiment config. Configuration is validated before any
/// computation; nothing is written unless the run completes.
pub fn run_one(kind: Kind, config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<Outcome> {
    let start = Instant::now();
    let doc = read_document(config)?;
    let cfg: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
    if let Some(k) = cfg.kind {
        if k != kind {
            return Err(Error::Config(format!(
                "{} declares kind {} but was run as {}",
                config.display(),
                k.name(),
                kind.name()
            )));
        }
    }
    let base = config.parent().unwrap_or(Path::new("."));
    let (symbol, symbol_file) = load_symbol(&cfg.symbol, base)?;
    let seed = seed.or(cfg.seed).unwrap_or(1);
    let out_dir = out
        .map(Path::to_path_buf)
        .or(cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("schrodlab-out").join(kind.name()));
    let explicit: Vec<String> = cfg.params.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default();
    let report = match kind {
        Kind::Analyze => run_analyze(&symbol, params(&cfg.params, kind)?)?,
        Kind::Exponents => run_exponents(&symbol, params(&cfg.params, kind)?)?,
        Kind::KernelDecay => run_kernel_decay(&symbol, params(&cfg.params, kind)?)?,
        Kind::Dispersive => run_dispersive(&symbol, seed, params(&cfg.params, kind)?)?,
        Kind::Resolvent => run_resolvent(&symbol, seed, params(&cfg.params, kind)?)?,
        Kind::IntegratedGroup => run_integrated(&symbol, seed, params(&cfg.params, kind)?)?,
        Kind::Potential => run_potential(&symbol, base, params(&cfg.params, kind)?)?,
        Kind::Suite => return Err(Error::Config("suite files are run with the suite subcommand".into())),
    };
    let pass = report.checks.iter().all(|c| c.pass);
    let summary = json!({
        "kind": kind.name(),
        "pass": pass,
        "symbol": symbol_file,
        "seed": seed,
        "params": report.params,
        "explicit_params": explicit,
        "checks": report.checks,
        "result": report.result,
    });
    let metadata = json!({
        "unix_time": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        "elapsed_seconds": start.elapsed().as_secs_f64(),
        "threads": rayon::current_num_threads(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": config.display().to_string(),
    });
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["series", "x", "y"]).map_err(csv_err)?;
    for (s, x, y) in &report.series {
        csv.write_record([s.clone(), fmt_f64(*x), fmt_f64(*y)]).map_err(csv_err)?;
    }
    let csv_bytes = csv.into_inner().map_err(|e| Error::Numerical(format!("csv buffer: {e}")))?;
    let mut files = vec![
        ("summary.json", pretty(&summary)?),
        ("data.csv", csv_bytes),
        ("plot.json", pretty(&serde_json::to_value(&report.plot)?)?),
        ("metadata.json", pretty(&metadata)?),
    ];
    files.extend(report.tables);
    write_atomic(&out_dir, &files)?;
    Ok(Outcome { pass, out_dir, summary })
}

fn table_csv<S: Serialize>(rows: &[S]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Numerical(format!("csv buffer: {e}")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Numerical(format!("csv: {e}"))
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

fn pretty(v: &Value) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

/// Write every file to a temporary name first, then rename them into place.
pub fn write_atomic(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let tag = std::process::id();
    let mut staged = Vec::new();
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.{tag}.tmp"));
        if let Err(e) = std::fs::write(&tmp, bytes) {
            for (t, _) in &staged {
                let _ = std::fs::remove_file(t);
            }
            let _ = std::fs::remove_file(&tmp);
            return Err(e.into());
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, dst) in staged {
        std::fs::rename(tmp, dst)?;
    }
    Ok(())
}

fn run_suite(args: &RunArgs) -> Result<bool> {
    let doc = read_document(&args.config)?;
    let suite: SuiteConfig =
        serde_json::from_value(doc).map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    if suite.kind.is_some_and(|k| k != Kind::Suite) {
        return Err(Error::Config(format!("{} is not a suite file", args.config.display())));
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    let root = args
        .out
        .clone()
        .or(suite.out)
        .unwrap_or_else(|| PathBuf::from("schrodlab-out").join("suite"));
    // validate every entry before running any of them
    let mut plan = Vec::new();
    for run in &suite.runs {
        let path = base.join(run);
        let cfg: ExperimentConfig = serde_json::from_value(read_document(&path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let kind = cfg.kind.ok_or_else(|| Error::Config(format!("{} must declare its kind", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
        plan.push((kind, path, stem));
    }
    let mut entries = Vec::new();
    let mut all_pass = true;
    let mut refused = false;
    for (kind, path, stem) in plan {
        let out = root.join(&stem);
        let (status, detail) = match run_one(kind, &path, Some(&out), args.seed) {
            Ok(o) => {
                all_pass &= o.pass;
                (if o.pass { EXIT_PASS } else { EXIT_FAILED }, Value::Null)
            }
            Err(e) => {
                refused = true;
                (EXIT_REFUSED, Value::String(e.to_string()))
            }
        };
        let line = match status {
            EXIT_PASS => "pass",
            EXIT_FAILED => "FAIL",
            _ => "refused",
        };
        eprintln!("{:<8} {:<18} {}", line, kind.name(), path.display());
        entries.push(json!({"config": path.display().to_string(), "kind": kind.name(), "status": status, "error": detail}));
    }
    write_atomic(&root, &[("summary.json", pretty(&json!({"kind": "suite", "runs": entries}))?)])?;
    if refused {
        return Err(Error::Precondition("at least one suite entry was refused".into()));
    }
    Ok(all_pass)
}

// ---- experiment parameters -------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// Points per axis.
    #[serde(rename = "N", alias = "points")]
    pub points: usize,
    /// The grid covers `[-L, L)^n`.
    #[serde(rename = "L", alias = "half_width")]
    pub half_width: f64,
}

impl GridParams {
    fn build(&self, p: &PolySymbol) -> Result<SpectralGrid> {
        SpectralGrid::new(p, self.points, self.half_width)
    }
}

fn detect_k(p: &PolySymbol, k: Option<u32>) -> Result<u32> {
    match k {
        Some(k) => Ok(k),
        None => Ok(geometry::detect_type(p, &GeometryOptions::for_dim(p.dim()))?.k),
    }
}

fn default_band(grid: &SpectralGrid, band: Option<f64>) -> f64 {
    band.unwrap_or(spectral::BAND_FRACTION * grid.nyquist())
}

fn probes(grid: &SpectralGrid, symbol: &PolySymbol, band: f64, seed: u64) -> Result<Vec<Probe>> {
    spectral::probe_family(grid, band, seed, &spectral::curvature_extremes(symbol)?)
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn ratio_series(rows: &[spectral::RatioRow]) -> Vec<(String, f64, f64)> {
    rows.iter().map(|r| (format!("{}/{}", r.track, r.probe), r.x, r.ratio)).collect()
}

fn default_true() -> bool {
    true
}

// ---- analyze ---------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeParams {
    #[serde(default)]
    pub surface_density: Option<usize>,
    #[serde(default)]
    pub direction_density: Option<usize>,
    #[serde(default = "d_curvature_samples")]
    pub curvature_samples: usize,
    #[serde(default)]
    pub expect_k: Option<u32>,
    #[serde(default)]
    pub expect_convex: Option<bool>,
}

fn d_curvature_samples() -> usize {
    512
}

fn run_analyze(p: &PolySymbol, prm: AnalyzeParams) -> Result<Report> {
    let mut opts = GeometryOptions::for_dim(p.dim());
    if let Some(d) = prm.surface_density {
        opts.surface_density = d;
    }
    if let Some(d) = prm.direction_density {
        opts.direction_density = d;
    }
    let rep = geometry::analyze(p, &opts)?;
    let mut checks = Vec::new();
    if let Some(k) = prm.expect_k {
        checks.push(check("type k", rep.k as f64, format!("= {k}"), rep.k == k));
    }
    if let Some(c) = prm.expect_convex {
        checks.push(check("convex", rep.convex as u8 as f64, format!("= {c}"), rep.convex == c));
    }
    let mut series = Vec::new();
    for (i, sp) in geometry::sample_surface(p, prm.curvature_samples)?.iter().enumerate() {
        let x = if p.dim() == 2 { sp.xi[1].atan2(sp.xi[0]) } else { i as f64 };
        series.push(("curvature".to_string(), x, geometry::gaussian_curvature(p, &sp.xi)?));
    }
    let x = if p.dim() == 2 { "angle" } else { "sample" };
    Ok(Report {
        tables: Vec::new(),
        checks,
        result: json!({"m": p.degree(), "n": p.dim(), "options": opts, "surface": rep}),
        params: serde_json::to_value(&prm)?,
        series,
        plot: plot("Gaussian curvature of the level surface", x, "curvature", false, false),
    })
}

// ---- exponents -------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentParams {
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default = "d_p_list")]
    pub p: Vec<f64>,
    #[serde(default)]
    pub expect: Vec<IntervalExpectation>,
    #[serde(default)]
    pub sweep: Option<SweepParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    #[serde(default = "d_sweep_m")]
    pub m: Vec<u32>,
    #[serde(default = "d_sweep_n")]
    pub n: Vec<usize>,
    #[serde(default = "d_p_list")]
    pub p: Vec<f64>,
    #[serde(default = "d_sweep_tol")]
    pub tol: f64,
}

fn d_sweep_m() -> Vec<u32> {
    vec![4, 6, 8]
}
fn d_sweep_n() -> Vec<usize> {
    vec![2, 3, 4]
}
fn d_sweep_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalExpectation {
    pub p: f64,
    #[serde(default)]
    pub i_p: Option<String>,
    #[serde(default)]
    pub i_prime_p: Option<String>,
}

fn d_p_list() -> Vec<f64> {
    vec![1.0, 1.25, 1.5, 1.75, 2.0]
}

fn run_exponents(p: &PolySymbol, prm: ExponentParams) -> Result<Report> {
    let k = detect_k(p, prm.k)?;
    let ex = Exponents::new(p.degree(), p.dim(), k)?;
    let mut tables = Vec::new();
    let mut series = Vec::new();
    for &pp in &prm.p {
        let t = ex.table(pp)?;
        series.push(("q".to_string(), pp, t.q));
        series.push(("n_p".to_string(), pp, t.n_p));
        tables.push(t);
    }
    let comparisons = if k == 2 {
        prm.p
            .iter()
            .filter(|&&pp| pp < 2.0)
            .map(|&pp| compare_nondegenerate(p.degree(), p.dim(), pp))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let mut checks = Vec::new();
    for e in &prm.expect {
        let t = ex.table(e.p)?;
        if let Some(want) = &e.i_p {
            checks.push(check(&format!("I_p at p = {}", e.p), e.p, format!("= {want}"), &t.i_p_bracket == want));
        }
        if let Some(want) = &e.i_prime_p {
            checks.push(check(
                &format!("I'_p at p = {}", e.p),
                e.p,
                format!("= {want}"),
                &t.i_prime_p_bracket == want,
            ));
        }
    }
    let sweep = match &prm.sweep {
        Some(sw) => {
            let r = crate::exponents::sweep(&sw.m, &sw.n, &sw.p, sw.tol)?;
            checks.push(check(
                "sweep violations",
                r.violations.len() as f64,
                format!("= 0 over {} cases", r.cases),
                r.violations.is_empty(),
            ));
            Some(r)
        }
        None => None,
    };
    Ok(Report {
        tables: Vec::new(),
        checks,
        result: json!({"k": k, "exponents": ex, "tables": tables, "nondegenerate": comparisons, "sweep": sweep}),
        params: serde_json::to_value(&prm)?,
        series,
        plot: plot("Target exponent q(p) and n_p", "p", "value", false, false),
    })
}

// ---- kernel decay ----------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDecayParams {
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default = "d_r_min")]
    pub r_min: f64,
    #[serde(default = "d_r_max")]
    pub r_max: f64,
    #[serde(default = "d_per_octave")]
    pub per_octave: u32,
    #[serde(default = "d_directions")]
    pub directions: usize,
    #[serde(default = "d_slack")]
    pub slack: f64,
    #[serde(default = "d_eps")]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub agreement: Option<AgreementParams>,
    #[serde(default)]
    pub scaling: Option<ScalingParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgreementParams {
    pub grid: GridParams,
    pub window: [f64; 2],
    #[serde(default = "d_bias_scale")]
    pub bias_scale: f64,
    #[serde(default = "d_agree_lo")]
    pub r_lo: f64,
    #[serde(default = "d_agree_hi")]
    pub r_hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingParams {
    pub grid: GridParams,
    pub window: [f64; 2],
    #[serde(default = "d_scaling_times")]
    pub times: Vec<f64>,
    #[serde(default = "d_agree_lo")]
    pub r_lo: f64,
    #[serde(default = "d_agree_hi")]
    pub r_hi: f64,
    #[serde(default = "d_scaling_tol")]
    pub tol: f64,
}

fn d_r_min() -> f64 {
    8.0
}
fn d_r_max() -> f64 {
    256.0
}
fn d_per_octave() -> u32 {
    2
}
fn d_directions() -> usize {
    12
}
fn d_slack() -> f64 {
    0.1
}
fn d_eps() -> Vec<f64> {
    DEFAULT_EPS.to_vec()
}
fn d_bias_scale() -> f64 {
    0.8
}
fn d_agree_lo() -> f64 {
    2.0
}
fn d_agree_hi() -> f64 {
    20.0
}
fn d_scaling_times() -> Vec<f64> {
    vec![1.0, 4.0, 16.0]
}
fn d_scaling_tol() -> f64 {
    1e-3
}

/// Geometric ladder from `r_min` to `r_max` with `per_octave` radii per doubling.
pub fn radius_ladder(r_min: f64, r_max: f64, per_octave: u32) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min) || per_octave == 0 {
        return Err(Error::Config(format!(
            "ladder needs 0 < r_min < r_max and per_octave >= 1 (r_min = {r_min}, r_max = {r_max})"
        )));
    }
    let steps = ((r_max / r_min).log2() * per_octave as f64).round() as i32;
    Ok((0..=steps).map(|j| r_min * 2f64.powf(j as f64 / per_octave as f64)).collect())
}

fn run_kernel_decay(p: &PolySymbol, prm: KernelDecayParams) -> Result<Report> {
    let k = detect_k(p, prm.k)?;
    let ex = Exponents::new(p.degree(), p.dim(), k)?;
    let ladder = radius_ladder(prm.r_min, prm.r_max, prm.per_octave)?;
    // build any grids first so a bad size is refused before the long work
    let agree_grid = prm.agreement.as_ref().map(|a| a.grid.build(p)).transpose()?;
    let scale_grid = prm.scaling.as_ref().map(|s| s.grid.build(p)).transpose()?;
    let reach = prm.agreement.as_ref().map_or(0.0, |a| 1.5 * a.r_hi).max(prm.r_max);
    let plan = OscillatoryPlan::new(p.degree(), p.dim(), kernel::profile_range(p, reach)?, &prm.eps)?;
    let opts = SurfaceOptions::default();
    let dirs = kernel::half_directions(p.dim(), prm.directions);
    let decay = kernel::fit_decay(p, k, &plan, &ladder, &dirs, prm.slack, &opts)?;
    let mut checks = vec![
        check(
            "envelope slope",
            decay.envelope.slope,
            format!("<= -h + {} = {:.6}", prm.slack, -ex.h + prm.slack),
            decay.envelope.slope <= -ex.h + prm.slack,
        ),
        check("flagged kernel values", decay.flagged as f64, "= 0".into(), decay.flagged == 0),
    ];
    let agreement = match (&prm.agreement, &agree_grid) {
        (Some(a), Some(g)) => {
            let r = kernel::compare_evaluators(&plan, g, (a.window[0], a.window[1]), a.bias_scale, a.r_lo, a.r_hi, &opts)?;
            checks.push(at_most("evaluator difference / budget", r.max_ratio, 1.0));
            Some(r)
        }
        _ => None,
    };
    let scaling = match (&prm.scaling, &scale_grid) {
        (Some(s), Some(g)) => {
            let rows = kernel::scaling_check(g, &s.times, (s.window[0], s.window[1]), s.r_lo, s.r_hi)?;
            for r in &rows {
                checks.push(at_most(&format!("scaling rel L∞ at t = {}", r.t), r.rel_linf, s.tol));
            }
            Some(rows)
        }
        _ => None,
    };
    let mut series: Vec<(String, f64, f64)> =
        decay.rows.iter().map(|r| (format!("direction {}", r.direction), r.r, r.abs)).collect();
    series.extend(decay.envelope.x.iter().zip(&decay.envelope.y).map(|(x, y)| ("envelope".to_string(), *x, *y)));
    Ok(Report {
        tables: vec![("decay.csv", table_csv(&decay.rows)?)],
        checks,
        result: json!({
            "k": k,
            "h": ex.h,
            "ladder": ladder,
            "plan_interpolation_error": plan.interpolation_error,
            "surface_options": opts,
            "decay": decay,
            "agreement": agreement,
            "scaling": scaling,
        }),
        params: serde_json::to_value(&prm)?,
        series,
        plot: plot("|K(x)| along rays", "r", "|K|", true, true),
    })
}

// ---- dispersive ------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersiveParams {
    pub grid: GridParams,
    #[serde(default)]
    pub band: Option<f64>,
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default = "d_one")]
    pub p: f64,
    #[serde(default = "d_inf", deserialize_with = "de_f64", serialize_with = "ser_f64")]
    pub q: f64,
    #[serde(default = "d_times")]
    pub times: Vec<f64>,
    #[serde(default = "d_dispersive_tol")]
    pub tol: f64,
    /// `(t₁, t₂)` for the conservation and group-law checks.
    #[serde(default = "d_group_times")]
    pub group_times: [f64; 2],
    #[serde(default = "d_identity_tol")]
    pub identity_tol: f64,
}

fn d_one() -> f64 {
    1.0
}
fn d_inf() -> f64 {
    f64::INFINITY
}
fn d_times() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0, 16.0]
}
fn d_dispersive_tol() -> f64 {
    0.05
}
fn d_group_times() -> [f64; 2] {
    [0.5, 0.5]
}
fn d_identity_tol() -> f64 {
    1e-12
}

fn run_dispersive(p: &PolySymbol, seed: u64, prm: DispersiveParams) -> Result<Report> {
    let grid = prm.grid.build(p)?;
    let k = detect_k(p, prm.k)?;
    let ex = Exponents::new(p.degree(), p.dim(), k)?;
    let band = default_band(&grid, prm.band);
    let fam = probes(&grid, p, band, seed)?;
    let ids = spectral::propagator_identities(&grid, &fam[0].field, prm.group_times[0], prm.group_times[1])?;
    let rep = spectral::dispersive_probe(&grid, &ex, prm.p, prm.q, &prm.times, &fam)?;
    let fit = &rep.tracks[0].fit;
    let checks = vec![
        at_most("L2 drift", ids.l2_drift, prm.identity_tol),
        at_most("group law", ids.group_law, prm.identity_tol),
        within("dispersive slope", fit.slope, fit.predicted_slope, prm.tol),
    ];
    Ok(Report {
        tables: Vec::new(),
        checks,
        result: json!({"k": k, "grid": grid.info(), "band": band, "identities": ids, "probe": rep}),
        params: serde_json::to_value(&prm)?,
        series: ratio_series(&rep.rows),
        plot: plot("‖e^{itP}u‖_q / ‖u‖_p", "t", "ratio", true, true),
    })
}

// ---- resolvent -------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventParams {
    pub grid: GridParams,
    #[serde(default)]
    pub band: Option<f64>,
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default = "d_one")]
    pub p: f64,
    #[serde(default = "d_inf", deserialize_with = "de_f64", serialize_with = "ser_f64")]
    pub q: f64,
    #[serde(default = "d_times")]
    pub ladder: Vec<f64>,
    #[serde(default = "d_resolvent_tol")]
    pub tol: f64,
    /// Also fit the `(2, 2)` slope, which is exactly −1.
    #[serde(default = "default_true")]
    pub two_two: bool,
    #[serde(default = "d_two_two_tol")]
    pub two_two_tol: f64,
    #[serde(default = "d_lambda")]
    pub lambda: [f64; 2],
    #[serde(default = "d_mu")]
    pub mu: [f64; 2],
    #[serde(default = "d_resolvent_identity_tol")]
    pub identity_tol: f64,
    #[serde(default)]
    pub laplace: Option<LaplaceParams>,
}

/// Laplace identity on a separate, smaller grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaplaceParams {
    pub grid: GridParams,
    pub band: f64,
    pub lambda: [f64; 2],
    /// Integration order; absent means `n_p + beta_offset`.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub beta_offset: f64,
    pub tol: f64,
}

fn d_resolvent_tol() -> f64 {
    0.07
}
fn d_two_two_tol() -> f64 {
    1e-3
}
fn d_lambda() -> [f64; 2] {
    [1.5, 0.4]
}
fn d_mu() -> [f64; 2] {
    [0.5, -2.0]
}
fn d_resolvent_identity_tol() -> f64 {
    1e-11
}

fn run_laplace(p: &PolySymbol, seed: u64, lp: &LaplaceParams, pexp: f64) -> Result<(spectral::LaplaceCheck, Check)> {
    let g = lp.grid.build(p)?;
    let fam = probes(&g, p, lp.band, seed)?;
    let beta = lp.beta.unwrap_or(n_p(p.dim(), pexp) + lp.beta_offset);
    let r = spectral::laplace_check(&g, &fam[0].field, complex(lp.lambda), beta)?;
    let c = at_most(&format!("Laplace identity (beta = {beta})"), r.relative_error, lp.tol);
    Ok((r, c))
}

fn run_resolvent(p: &PolySymbol, seed: u64, prm: ResolventParams) -> Result<Report> {
    let grid = prm.grid.build(p)?;
    let k = detect_k(p, prm.k)?;
    let ex = Exponents::new(p.degree(), p.dim(), k)?;
    let band = default_band(&grid, prm.band);
    let fam = probes(&grid, p, band, seed)?;
    let mut checks = Vec::new();
    let ids = spectral::resolvent_identities(&grid, &fam[0].field, complex(prm.lambda), complex(prm.mu))?;
    checks.push(at_most("resolvent identity and conjugation", ids.relations(), prm.identity_tol));
    let floor = prm.identity_tol.max(ids.defining_floor());
    checks.push(at_most("defining relation", ids.defining, floor));
    let laplace = match &prm.laplace {
        Some(lp) => {
            let (r, c) = run_laplace(p, seed, lp, prm.p)?;
            checks.push(c);
            Some(r)
        }
        None => None,
    };
    let rep = spectral::resolvent_probe(&grid, &ex, prm.p, prm.q, &prm.ladder, &fam)?;
    for tr in &rep.tracks {
        checks.push(within(&format!("slope ({}, {}) {}", prm.p, prm.q, tr.track), tr.fit.slope, tr.fit.predicted_slope, prm.tol));
    }
    let mut series = ratio_series(&rep.rows);
    let two = if prm.two_two {
        let r = spectral::resolvent_probe(&grid, &ex, 2.0, 2.0, &prm.ladder, &fam)?;
        for tr in &r.tracks {
            checks.push(within(&format!("slope (2, 2) {}", tr.track), tr.fit.slope, -1.0, prm.two_two_tol));
        }
        series.extend(r.rows.iter().map(|x| (format!("2-2/{}/{}", x.track, x.probe), x.x, x.ratio)));
        Some(r)
    } else {
        None
    };
    Ok(Report {
        tables: Vec::new(),
        checks,
        result: json!({"k": k, "grid": grid.info(), "band": band, "identities": ids, "laplace": laplace, "probe": rep, "two_two": two}),
        params: serde_json::to_value(&prm)?,
        series,
        plot: plot("‖R(λ)u‖_q / ‖u‖_p", "Re λ", "ratio", true, true),
    })
}

// ---- integrated group ------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratedParams {
    pub grid: GridParams,
    #[serde(default)]
    pub band: Option<f64>,
    #[serde(default = "d_one")]
    pub p: f64,
    /// Orders as offsets above `n_p`.
    #[serde(default = "d_beta_offsets")]
    pub beta_offsets: Vec<f64>,
    #[serde(default = "d_times")]
    pub times: Vec<f64>,
    #[serde(default = "d_slack")]
    pub slack: f64,
    #[serde(default)]
    pub closed_form: Option<ClosedFormParams>,
    #[serde(default)]
    pub laplace: Option<LaplaceParams>,
}

/// `β = 1` quadrature against the closed form, on its own grid: every
/// distinct symbol value on the probe's support costs one quadrature.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFormParams {
    pub grid: GridParams,
    pub band: f64,
    #[serde(default = "d_one")]
    pub t: f64,
    #[serde(default = "d_closed_form_tol")]
    pub tol: f64,
}

fn d_beta_offsets() -> Vec<f64> {
    vec![0.2, 1.2]
}
fn d_closed_form_tol() -> f64 {
    1e-10
}

fn run_integrated(p: &PolySymbol, seed: u64, prm: IntegratedParams) -> Result<Report> {
    let grid = prm.grid.build(p)?;
    let band = default_band(&grid, prm.band);
    let fam = probes(&grid, p, band, seed)?;
    let mut checks = Vec::new();
    let cf = match &prm.closed_form {
        Some(c) => {
            let g = c.grid.build(p)?;
            let f = probes(&g, p, c.band, seed)?;
            let r = spectral::closed_form_check(&g, &f[0].field, c.t)?;
            checks.push(at_most("beta = 1 closed form", r.max_relative, c.tol));
            Some(r)
        }
        None => None,
    };
    let laplace = match &prm.laplace {
        Some(lp) => {
            let (r, c) = run_laplace(p, seed, lp, prm.p)?;
            checks.push(c);
            Some(r)
        }
        None => None,
    };
    let np = n_p(p.dim(), prm.p);
    let mut growth = Vec::new();
    let mut series = Vec::new();
    for off in &prm.beta_offsets {
        let beta = np + off;
        let r = spectral::growth_probe(&grid, prm.p, beta, &prm.times, &fam)?;
        let slope = r.tracks[0].fit.slope;
        checks.push(check(
            &format!("growth slope (beta = {beta})"),
            slope,
            format!("<= beta + {} = {:.4}", prm.slack, beta + prm.slack),
            slope <= beta + prm.slack,
        ));
        series.extend(r.rows.iter().map(|x| (format!("beta {beta}/{}", x.probe), x.x, x.ratio)));
        growth.push(r);
    }
    Ok(Report {
        tables: Vec::new(),
        checks,
        result: json!({"grid": grid.info(), "band": band, "n_p": np, "closed_form": cf, "laplace": laplace, "growth": growth}),
        params: serde_json::to_value(&prm)?,
        series,
        plot: plot("‖T(t)u‖_p / ‖u‖_p", "t", "ratio", true, true),
    })
}

// ---- potential -------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialParams {
    pub grid: GridParams,
    #[serde(default)]
    pub k: Option<u32>,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub gate_cases: Vec<GateCase>,
    #[serde(default)]
    pub born: Option<BornParams>,
    #[serde(default)]
    pub strang: Option<StrangParams>,
    #[serde(default)]
    pub duhamel: Option<DuhamelParams>,
    #[serde(default)]
    pub gronwall: Option<GronwallParams>,
    #[serde(default)]
    pub growth: Option<PotentialGrowthParams>,
}

/// A worked `(p, s₁, s₂)` case with its expected verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateCase {
    pub p: f64,
    #[serde(deserialize_with = "de_f64", serialize_with = "ser_f64")]
    pub s1: f64,
    #[serde(deserialize_with = "de_f64", serialize_with = "ser_f64")]
    pub s2: f64,
    pub admissible: bool,
    #[serde(default)]
    pub interval: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BornParams {
    #[serde(default = "d_two")]
    pub p: f64,
    pub lambda: [f64; 2],
    /// Source term: `û = e^{-w²|ξ|²/2}`.
    #[serde(default = "d_one")]
    pub source_width: f64,
    #[serde(default = "d_agree_tol")]
    pub agreement_tol: f64,
    #[serde(default = "d_residual_tol")]
    pub residual_tol: f64,
    /// Gammas along `Re λ ∈ ladder` at the same `Im λ`.
    #[serde(default = "d_gamma_ladder")]
    pub ladder: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrangParams {
    #[serde(default = "d_one")]
    pub t: f64,
    #[serde(default = "d_dts")]
    pub dts: Vec<f64>,
    #[serde(default = "d_state_width")]
    pub state_width: f64,
    #[serde(default = "d_order_tol")]
    pub tol: f64,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuhamelParams {
    #[serde(default = "d_duhamel_times")]
    pub times: Vec<f64>,
    #[serde(default = "d_nodes")]
    pub nodes: usize,
    #[serde(default = "d_state_width")]
    pub state_width: f64,
    #[serde(default = "d_spread")]
    pub max_spread: f64,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallParams {
    #[serde(default = "d_one")]
    pub t: f64,
    #[serde(default = "d_gronwall_dt")]
    pub dt: f64,
    #[serde(default = "d_state_width")]
    pub state_width: f64,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialGrowthParams {
    pub p: f64,
    /// Offset above `n_p + 1`.
    #[serde(default = "d_growth_offset")]
    pub beta_offset: f64,
    #[serde(default = "d_growth_times")]
    pub times: Vec<f64>,
    #[serde(default = "d_growth_dt")]
    pub dt: f64,
    #[serde(default = "d_growth_widths")]
    pub state_widths: Vec<f64>,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
}

fn d_two() -> f64 {
    2.0
}
fn d_agree_tol() -> f64 {
    1e-9
}
fn d_residual_tol() -> f64 {
    1e-8
}
fn d_gamma_ladder() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0, 16.0]
}
fn d_dts() -> Vec<f64> {
    (4..=7).map(|k| 2f64.powi(-k)).collect()
}
fn d_state_width() -> f64 {
    3.0
}
fn d_order_tol() -> f64 {
    0.15
}
fn d_duhamel_times() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}
fn d_nodes() -> usize {
    16
}
fn d_spread() -> f64 {
    2.0
}
fn d_gronwall_dt() -> f64 {
    0.005
}
fn d_growth_offset() -> f64 {
    0.2
}
fn d_growth_times() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 4.0, 8.0]
}
fn d_growth_dt() -> f64 {
    0.05
}
fn d_growth_widths() -> Vec<f64> {
    vec![3.0, 4.0]
}

fn gaussian_state(grid: &SpectralGrid, w: f64) -> spectral::StateField {
    grid.from_spectrum(|xi| Complex64::new((-0.5 * w * w * xi.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0))
}

fn usable(v: Potential, what: &str) -> Result<Potential> {
    if v.is_singular() {
        return Err(Error::Precondition(format!(
            "{what}: potential {} is singular and excluded from checked runs",
            v.summary().label
        )));
    }
    Ok(v)
}

fn run_potential(p: &PolySymbol, base: &Path, prm: PotentialParams) -> Result<Report> {
    let grid = prm.grid.build(p)?;
    let k = detect_k(p, prm.k)?;
    let ex = Exponents::new(p.degree(), p.dim(), k)?;
    let main = Potential::build(&grid, &prm.potential, Some(base))?;
    let pick = |o: &Option<PotentialSpec>| -> Result<Potential> {
        match o {
            Some(s) => Potential::build(&grid, s, Some(base)),
            None => Ok(main.clone()),
        }
    };
    let mut checks = Vec::new();
    let mut series = Vec::new();
    let mut result = serde_json::Map::new();
    result.insert("k".into(), json!(k));
    result.insert("grid".into(), serde_json::to_value(grid.info())?);
    result.insert("potential".into(), serde_json::to_value(main.summary())?);

    let mut gates = Vec::new();
    for c in &prm.gate_cases {
        let g = potential::admissibility_gate(&ex, c.p, c.s1, c.s2);
        let interval_ok = c.interval.as_ref().is_none_or(|w| &g.interval.bracket() == w);
        checks.push(check(
            &format!("gate p = {}, s = ({}, {})", c.p, c.s1, c.s2),
            g.admissible as u8 as f64,
            format!(
                "admissible = {}{}",
                c.admissible,
                c.interval.as_ref().map(|w| format!(", I'_p = {w}")).unwrap_or_default()
            ),
            g.admissible == c.admissible && interval_ok,
        ));
        gates.push(g);
    }
    result.insert("gate_cases".into(), serde_json::to_value(&gates)?);

    if let Some(b) = &prm.born {
        let v = usable(main.clone(), "born")?;
        let [s1, s2] = v.exponents();
        let gate = potential::admissibility_gate(&ex, b.p, s1, s2);
        let f = gaussian_state(&grid, b.source_width);
        let lambda = complex(b.lambda);
        let opts = BornOptions {
            residual_tol: b.residual_tol,
            ..BornOptions::default()
        };
        let r = potential::born_resolvent(&grid, &v, &gate, &f, lambda, opts)?;
        checks.push(at_most("Born residual", r.residual, b.residual_tol));
        checks.push(at_most("Born vs direct solve", r.series_vs_direct, b.agreement_tol));
        let gammas = b
            .ladder
            .iter()
            .map(|a| potential::contraction(&grid, &v, Complex64::new(*a, lambda.im), b.p))
            .collect::<Result<Vec<_>>>()?;
        let worst_rise = gammas.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        checks.push(at_most("gamma rise along ladder", worst_rise, 1.05));
        series.extend(b.ladder.iter().zip(&gammas).map(|(a, g)| ("gamma".to_string(), *a, *g)));
        series.extend(r.increments.iter().enumerate().map(|(j, x)| ("born increment".to_string(), (j + 1) as f64, *x)));
        let omega = potential::find_omega(&grid, &v, b.p, lambda.im)?;
        result.insert("born".into(), json!({"gate": gate, "series": r, "gamma_ladder": gammas, "omega": omega}));
    }

    if let Some(s) = &prm.strang {
        let v = pick(&s.potential)?;
        let u0 = gaussian_state(&grid, s.state_width);
        let r = potential::strang_order(&grid, &v, &u0, s.t, &s.dts)?;
        checks.push(within("Strang order", r.fit.slope, 2.0, s.tol));
        series.extend(r.dts.iter().zip(&r.errors).map(|(d, e)| ("strang error".to_string(), *d, *e)));
        result.insert("strang".into(), json!({"potential": v.summary(), "order": r}));
    }

    if let Some(d) = &prm.duhamel {
        let v = pick(&d.potential)?;
        let u0 = gaussian_state(&grid, d.state_width);
        let r = potential::duhamel_check(&grid, &v, &u0, &d.times, d.nodes)?;
        checks.push(at_most("Duhamel t^3 ratio spread", r.spread_t3, d.max_spread));
        for row in &r.rows {
            series.push(("duhamel three-term / t^3".into(), row.t, row.three_term_over_t3));
            series.push(("duhamel two-term / t^2".into(), row.t, row.two_term_over_t2));
        }
        result.insert("duhamel".into(), json!({"potential": v.summary(), "report": r}));
    }

    if let Some(g) = &prm.gronwall {
        let v = pick(&g.potential)?;
        let u0 = gaussian_state(&grid, g.state_width);
        let r = potential::gronwall_check(&grid, &v, &u0, g.t, g.dt)?;
        checks.push(check("Gronwall envelope", r.norm_ratio, format!("<= {:.12}", r.bound), r.pass));
        result.insert("gronwall".into(), json!({"potential": v.summary(), "report": r}));
    }

    if let Some(gp) = &prm.growth {
        let v = usable(pick(&gp.potential)?, "growth")?;
        let [s1, s2] = v.exponents();
        let gate = potential::admissibility_gate(&ex, gp.p, s1, s2);
        let beta = gate.beta_threshold + gp.beta_offset;
        let fam: Vec<Probe> = gp
            .state_widths
            .iter()
            .map(|w| Probe {
                label: format!("gaussian:{w}"),
                field: gaussian_state(&grid, *w),
            })
            .collect();
        let r = potential::growth_check(&grid, &v, &gate, beta, &gp.times, &fam, gp.dt)?;
        checks.push(check("growth envelope finite", r.finite as u8 as f64, "= true".into(), r.finite));
        checks.push(at_most("growth log-slope increase", r.slope_increase, potential::CONCAVITY_SLACK));
        series.extend(r.times.iter().zip(&r.envelope).map(|(t, e)| ("growth envelope".to_string(), *t, *e)));
        result.insert("growth".into(), json!({"potential": v.summary(), "gate": gate, "report": r}));
    }

    Ok(Report {
        tables: Vec::new(),
        checks,
        result: Value::Object(result),
        params: serde_json::to_value(&prm)?,
        series,
        plot: plot("Perturbed-operator diagnostics", "x", "y", true, true),
    })
}
