//! Command-line front end: JSON run configs in, CSV tables and a JSON
//! summary out.
//!
//! Every table starts with a `# config_sha256=...` line followed by a
//! header row. Numbers are written with 17 significant digits, so a rerun of
//! the same config reproduces the files byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::families;
use crate::krein::{convergence_metric, khrushchev_residual};
use crate::mat::{C64, I};
use crate::model::{Hamiltonian, PotentialSpec};
use crate::scatter::{modified_phase, scatter_error, Channel, Shape, WavePacket};
use crate::szego::{
    criterion_hamiltonian, criterion_maximal, criterion_potential, entropy_bootstrap, entropy_direct, entropy_ode, log_integral,
    DirectRoute, SzegoReport, DEFAULT_SLOPE,
};
use crate::transfer::evolve_canonical;
use crate::weyl::{boundary_density, weyl_estimate, weyl_profile, EpsSchedule, SpectralGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "canonical-spectra", version, about = "Spectral experiments for half-line Dirac operators and canonical systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `horizon` in the config.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Overrides `tol` in the config.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Szego criteria as partial sums over blocks, with verdicts.
    Szego,
    /// Weyl function on the z grid, boundary density and transfer checks.
    Weyl,
    /// Entropy profile from the ODE and the Bernstein-Szego route.
    Entropy,
    /// Convergence metric and the nodal Khrushchev identity.
    Khrushchev,
    /// Wave-operator error curve and the modified phase.
    Scatter,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Szego => "szego",
            Command::Weyl => "weyl",
            Command::Entropy => "entropy",
            Command::Khrushchev => "khrushchev",
            Command::Scatter => "scatter",
        }
    }
}

/// A family name such as `"bump"` or a full specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialInput {
    Family(String),
    Spec(PotentialSpec),
}

impl PotentialInput {
    pub fn spec(&self) -> Result<PotentialSpec> {
        match self {
            PotentialInput::Family(name) => families::by_name(name).ok_or_else(|| Error::Config(format!("unknown family {name:?}"))),
            PotentialInput::Spec(s) => {
                s.validate()?;
                Ok(s.clone())
            }
        }
    }
}

/// `n` equally spaced points from `start` to `end` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformGrid {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|k| if k + 1 == self.n { self.end } else { self.start + k as f64 * step }).collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite() && self.start >= 0.0 && self.end > self.start && self.n >= 2) {
            return Err(Error::Config(format!("{what} grid needs finite 0 <= start < end and n >= 2")));
        }
        Ok(())
    }
}

/// Grid used for logarithmic integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LogGrid {
    Tan { n: usize },
    Hybrid { inner: f64, width: f64, outer: usize, reach: f64 },
}

impl Default for LogGrid {
    fn default() -> Self {
        LogGrid::Hybrid { inner: 30.0, width: 0.5, outer: 128, reach: 1000.0 }
    }
}

impl LogGrid {
    pub fn build(&self) -> Result<SpectralGrid> {
        match *self {
            LogGrid::Tan { n } if n >= 8 => Ok(SpectralGrid::tan(n)),
            LogGrid::Tan { .. } => Err(Error::Config("tan log grid needs n >= 8".into())),
            LogGrid::Hybrid { inner, width, outer, reach } => SpectralGrid::hybrid(inner, width, outer, reach).map_err(|e| Error::Config(e.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Defaults to `0 ..= horizon / 2` in steps of `0.25`.
    pub r: Option<UniformGrid>,
    /// Defaults to `a + 0.5 ..= horizon / 2` in steps of `0.5`.
    pub t: Option<UniformGrid>,
    /// Nodes of the uniform tangent grid.
    pub x_nodes: usize,
    /// Points `[re, im]`.
    pub z: Vec<[f64; 2]>,
    pub blocks: usize,
    pub log: LogGrid,
    /// Step of the Krein table in `s`.
    pub ds: f64,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { r: None, t: None, x_nodes: 256, z: vec![[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]], blocks: 20, log: LogGrid::default(), ds: 1.0 / 512.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_experiment")]
    pub experiment: String,
    pub potential: PotentialInput,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Transfer-matrix tolerance for the direct transfer dumps.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_depth")]
    pub max_depth: f64,
    #[serde(default = "default_slope")]
    pub slope: f64,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default = "default_packet")]
    pub packet: WavePacket,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_experiment() -> String {
    "run".into()
}
fn default_horizon() -> f64 {
    20.0
}
fn default_tol() -> f64 {
    1e-12
}
fn default_depth() -> f64 {
    64.0
}
fn default_slope() -> f64 {
    DEFAULT_SLOPE
}
fn default_packet() -> WavePacket {
    WavePacket { shape: Shape::Bump, channel: Channel::First, a: 1.0 }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.horizon) || !pos(self.tol) || !pos(self.max_depth) || !pos(self.slope) || !pos(self.grids.ds) || !pos(self.packet.a) {
            return Err(Error::Config("horizon, tol, max_depth, slope, ds and the packet radius must be positive and finite".into()));
        }
        if self.max_depth <= self.horizon / 2.0 {
            return Err(Error::Config("max_depth must exceed the end of the r grid".into()));
        }
        if self.grids.x_nodes < 8 || self.grids.blocks == 0 {
            return Err(Error::Config("x_nodes must be at least 8 and blocks at least 1".into()));
        }
        if self.grids.z.iter().any(|[re, im]| !re.is_finite() || !(*im > 0.0 && im.is_finite())) {
            return Err(Error::Config("z points need finite real parts and positive imaginary parts".into()));
        }
        if let Some(g) = &self.grids.r {
            g.validate("r")?;
            if g.start != 0.0 {
                return Err(Error::Config("the r grid must start at 0".into()));
            }
        }
        if let Some(g) = &self.grids.t {
            g.validate("t")?;
            if g.start <= self.packet.a {
                return Err(Error::Config("the t grid must start beyond the packet support".into()));
            }
        }
        self.grids.log.build()?;
        self.potential.spec().map(|_| ())
    }

    pub fn r_grid(&self) -> Vec<f64> {
        match &self.grids.r {
            Some(g) => g.points(),
            None => {
                let end = self.horizon / 2.0;
                let n = (end / 0.25).round().max(1.0) as usize;
                (0..=n).map(|k| k as f64 * end / n as f64).collect()
            }
        }
    }

    pub fn t_grid(&self) -> Vec<f64> {
        match &self.grids.t {
            Some(g) => g.points(),
            None => {
                let start = self.packet.a + 0.5;
                let end = (self.horizon / 2.0).max(start + 0.5);
                let n = ((end - start) / 0.5).round() as usize;
                (0..=n).map(|k| start + k as f64 * 0.5).collect()
            }
        }
    }

    /// SHA-256 of the effective config. The output directory only says where
    /// files go, so it is left out.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&RunConfig { out_dir: None, ..self.clone() }).expect("config serializes");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Output {
    dir: PathBuf,
    hash: String,
    files: Vec<String>,
}

impl Output {
    fn new(dir: PathBuf, hash: String) -> Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(Output { dir, hash, files: Vec::new() })
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut s = format!("# config_sha256={}\n{}\n", self.hash, header.join(","));
        for row in rows {
            let _ = writeln!(s, "{}", row.join(","));
        }
        self.write(name, &s)
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        fs::write(self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn report_rows(rep: &SzegoReport) -> Vec<Vec<String>> {
    (0..rep.terms.len())
        .map(|k| vec![k.to_string(), num(rep.blocks[k]), num(rep.terms[k]), num(rep.partial_sums[k]), u8::from(rep.flagged[k]).to_string()])
        .collect()
}

fn report_summary(rep: &SzegoReport) -> Value {
    json!({
        "verdict": rep.verdict,
        "blocks": rep.terms.len(),
        "sum": rep.partial_sums.last().copied().unwrap_or(0.0),
        "slope": rep.slope,
        "note": rep.note,
    })
}

/// An inapplicable criterion is a result, not a failure.
fn or_inapplicable(r: Result<SzegoReport>) -> Result<SzegoReport> {
    match r {
        Err(Error::Inapplicable(why)) | Err(Error::InvalidInput(why)) => Ok(SzegoReport::inapplicable(why)),
        other => other,
    }
}

fn cmd_szego(cfg: &RunConfig, spec: &PotentialSpec, h: &Hamiltonian, out: &mut Output) -> Result<Value> {
    let n = cfg.grids.blocks;
    let pot = or_inapplicable(criterion_potential(spec, n, cfg.slope))?;
    let ham = or_inapplicable(criterion_hamiltonian(h, n, cfg.horizon, cfg.slope))?;
    let max = or_inapplicable(criterion_maximal(spec, n, cfg.slope))?;
    let header = ["n", "block", "term", "partial_sum", "flagged"];
    out.csv("szego_potential.csv", &header, report_rows(&pot))?;
    out.csv("szego_hamiltonian.csv", &header, report_rows(&ham))?;
    out.csv("szego_maximal.csv", &header, report_rows(&max))?;
    Ok(json!({
        "potential": report_summary(&pot),
        "hamiltonian": report_summary(&ham),
        "maximal": report_summary(&max),
    }))
}

fn z_points(cfg: &RunConfig) -> Vec<C64> {
    cfg.grids.z.iter().map(|[a, b]| C64::new(*a, *b)).collect()
}

fn cmd_weyl(cfg: &RunConfig, h: &Hamiltonian, out: &mut Output) -> Result<Value> {
    let mut rows = Vec::new();
    let mut radius: f64 = 0.0;
    for z in z_points(cfg) {
        let e = weyl_estimate(h, 0.0, z, cfg.max_depth)?;
        radius = radius.max(e.radius);
        rows.push(vec![num(z.re), num(z.im), num(e.value.re), num(e.value.im), num(e.radius)]);
    }
    out.csv("weyl_m.csv", &["re_z", "im_z", "re_m", "im_m", "radius"], rows)?;
    let r = cfg.r_grid();
    let prof = weyl_profile(h, I, &r, cfg.max_depth)?;
    out.csv("weyl_profile.csv", &["r", "re_m", "im_m"], r.iter().zip(&prof).map(|(r, m)| vec![num(*r), num(m.re), num(m.im)]).collect())?;
    let grid = SpectralGrid::tan(cfg.grids.x_nodes);
    let data = boundary_density(h, 0.0, &grid, &EpsSchedule::preferred(h), cfg.max_depth)?;
    out.csv(
        "weyl_density.csv",
        &["x", "w", "flagged"],
        (0..grid.len()).map(|k| vec![num(grid.x[k]), num(data.w[k]), u8::from(data.flagged[k]).to_string()]).collect(),
    )?;
    let mut det_rows = Vec::new();
    let mut det_err: f64 = 0.0;
    let t: Vec<f64> = r.iter().copied().filter(|&t| t > 0.0).collect();
    for z in z_points(cfg) {
        for st in evolve_canonical(h, z, &t, cfg.tol)? {
            let d = (st.det() - 1.0).norm();
            det_err = det_err.max(d);
            det_rows.push(vec![num(st.t), num(z.re), num(z.im), num(d)]);
        }
    }
    out.csv("weyl_transfer.csv", &["t", "re_z", "im_z", "det_error"], det_rows)?;
    let mass: f64 = data.w.iter().zip(&data.flagged).zip(&grid.weights).filter(|((_, f), _)| !**f).map(|((w, _), p)| w * p).sum();
    Ok(json!({
        "max_radius": radius,
        "m_i": [prof[0].re, prof[0].im],
        "a": data.a,
        "b": data.b,
        "density_mass": mass,
        "flagged_nodes": data.flagged.iter().filter(|f| **f).count(),
        "max_det_error": det_err,
    }))
}

fn cmd_entropy(cfg: &RunConfig, h: &Hamiltonian, out: &mut Output) -> Result<Value> {
    let r = cfg.r_grid();
    let boot = entropy_bootstrap(h, &cfg.grids.log.build()?, &EpsSchedule::preferred(h), cfg.max_depth)?;
    let prof = entropy_ode(h, &boot, &r, cfg.max_depth)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut min_k = f64::INFINITY;
    let mut max_rise = f64::NEG_INFINITY;
    for k in 0..r.len() {
        let d = entropy_direct(h, &boot, r[k], &DirectRoute::MeanValue, cfg.max_depth)?;
        worst = worst.max((d.k - prof.k[k]).abs());
        min_k = min_k.min(prof.k[k]);
        if k > 0 {
            max_rise = max_rise.max(prof.k[k] - prof.k[k - 1]);
        }
        rows.push(vec![num(r[k]), num(prof.i[k]), num(prof.re[k]), num(prof.k[k]), num(prof.gamma[k]), num(d.k), num(d.k - prof.k[k])]);
    }
    out.csv("entropy_profile.csv", &["r", "I", "R", "K", "gamma", "K_direct", "difference"], rows)?;
    Ok(json!({
        "k0": boot.k0,
        "i0": boot.i0,
        "r0": boot.r0,
        "j0": boot.j0.value,
        "clipped_mass": boot.j0.clipped_mass,
        "excluded_mass": boot.j0.excluded_mass,
        "log_grid": boot.grid,
        "initial_mismatch": prof.initial_mismatch,
        "max_route_difference": worst,
        "min_k": min_k,
        "max_k_increase": max_rise,
    }))
}

fn cmd_khrushchev(cfg: &RunConfig, h: &Hamiltonian, out: &mut Output) -> Result<Value> {
    let r = cfg.r_grid();
    let eps = EpsSchedule::preferred(h);
    let log_data = boundary_density(h, 0.0, &cfg.grids.log.build()?, &eps, cfg.max_depth)?;
    let metric = convergence_metric(h, &log_data, &r, cfg.max_depth)?;
    out.csv("khrushchev_metric.csv", &["r", "metric"], r.iter().zip(&metric).map(|(r, m)| vec![num(*r), num(*m)]).collect())?;
    let data = boundary_density(h, 0.0, &SpectralGrid::tan(cfg.grids.x_nodes), &eps, cfg.max_depth)?;
    let mut rows = Vec::new();
    let mut worst = Vec::new();
    for &rr in r.iter().filter(|&&v| v > 0.0) {
        let rep = khrushchev_residual(h, rr, &data, &eps, cfg.max_depth)?;
        for k in 0..rep.x.len() {
            rows.push(vec![num(rr), num(rep.x[k]), num(rep.residual[k])]);
        }
        worst.push(json!({"r": rr, "max_residual": rep.max_residual, "theta_drift": rep.theta_drift, "flagged": rep.flagged.iter().filter(|f| **f).count()}));
    }
    out.csv("khrushchev_residual.csv", &["r", "x", "residual"], rows)?;
    Ok(json!({
        "metric_final": metric.last().copied().unwrap_or(0.0),
        "metric": metric,
        "residuals": worst,
        "log_integral": log_integral(&log_data).value,
    }))
}

fn cmd_scatter(cfg: &RunConfig, h: &Hamiltonian, out: &mut Output) -> Result<Value> {
    let t = cfg.t_grid();
    let data = boundary_density(h, 0.0, &SpectralGrid::tan(cfg.grids.x_nodes), &EpsSchedule::preferred(h), cfg.max_depth)?;
    let rep = scatter_error(h, &cfg.packet, &t, &data, cfg.grids.ds, cfg.max_depth)?;
    out.csv("scatter_error.csv", &["t", "error"], t.iter().zip(&rep.error).map(|(t, e)| vec![num(*t), num(*e)]).collect())?;
    let r = cfg.r_grid();
    let ph = modified_phase(h, &r, cfg.max_depth)?;
    out.csv(
        "scatter_phase.csv",
        &["r", "gamma", "phi", "surrogate", "surrogate_integral"],
        (0..r.len()).map(|k| vec![num(r[k]), num(ph.gamma[k]), num(ph.phi[k]), num(ph.surrogate[k]), num(ph.surrogate_integral[k])]).collect(),
    )?;
    Ok(json!({
        "error_final": rep.error.last().copied().unwrap_or(0.0),
        "final_slope": rep.final_slope,
        "excluded_nodes": rep.excluded_nodes,
        "target": rep.target,
        "phi_final": ph.phi.last().copied().unwrap_or(0.0),
        "surrogate_min": ph.surrogate.iter().copied().fold(f64::INFINITY, f64::min),
        "surrogate_integral": ph.surrogate_integral.last().copied().unwrap_or(0.0),
    }))
}

/// Outcome of a command: exit code and the summary that was printed.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: Value,
    pub out_dir: Option<PathBuf>,
}

fn load(common: &Common) -> Result<RunConfig> {
    let path = common.config.as_ref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(o) = &common.out {
        cfg.out_dir = Some(o.clone());
    }
    if let Some(hz) = common.horizon {
        cfg.horizon = hz;
    }
    if let Some(t) = common.tol {
        cfg.tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cmd: Command, cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let spec = cfg.potential.spec()?;
    let h = Hamiltonian::from_potential(&spec)?;
    match cmd {
        Command::Szego => cmd_szego(cfg, &spec, &h, out),
        Command::Weyl => cmd_weyl(cfg, &h, out),
        Command::Entropy => cmd_entropy(cfg, &h, out),
        Command::Khrushchev => cmd_khrushchev(cfg, &h, out),
        Command::Scatter => cmd_scatter(cfg, &h, out),
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::InvalidInput(_))
}

/// Runs one command; the summary also goes to `<command>_summary.json`.
pub fn execute(cli: &Cli) -> Outcome {
    if let Some(n) = cli.common.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cfg = match load(&cli.common) {
        Ok(c) => c,
        Err(e) => return Outcome { code: EXIT_CONFIG, summary: json!({"status": "config-error", "error": e.to_string()}), out_dir: None },
    };
    let dir = cfg.out_dir.clone().unwrap_or_else(|| Path::new("out").join(&cfg.experiment));
    let hash = cfg.hash();
    let mut out = match Output::new(dir.clone(), hash.clone()) {
        Ok(o) => o,
        Err(e) => return Outcome { code: EXIT_CONFIG, summary: json!({"status": "config-error", "error": e.to_string()}), out_dir: None },
    };
    let name = cli.command.name();
    let (code, summary) = match dispatch(cli.command, &cfg, &mut out) {
        Ok(v) => (EXIT_OK, json!({"status": "ok", "command": name, "experiment": cfg.experiment, "config_sha256": hash, "files": out.files.clone(), "result": v})),
        Err(e) => {
            let code = if is_config_error(&e) { EXIT_CONFIG } else { EXIT_NUMERIC };
            let diag = json!({"status": if code == EXIT_CONFIG { "config-error" } else { "numeric-failure" }, "command": name, "config_sha256": hash, "error": e.to_string()});
            let _ = out.write("diagnostics.json", &serde_json::to_string_pretty(&diag).expect("json"));
            (code, diag)
        }
    };
    if code == EXIT_OK {
        let text = serde_json::to_string_pretty(&summary).expect("json");
        if let Err(e) = out.write(&format!("{name}_summary.json"), &text) {
            return Outcome { code: EXIT_NUMERIC, summary: json!({"status": "io-error", "error": e.to_string()}), out_dir: Some(dir) };
        }
    }
    Outcome { code, summary, out_dir: Some(dir) }
}

pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => Outcome { code: EXIT_CONFIG, summary: json!({"status": "usage-error", "error": e.to_string()}), out_dir: None },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_hash() {
        let cfg = RunConfig::from_json(r#"{"potential": "bump"}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.r_grid().len(), 41);
        assert_eq!(cfg.t_grid().first(), Some(&1.5));
        assert_eq!(cfg.hash(), RunConfig::from_json(r#"{"potential": "bump"}"#).unwrap().hash());
        let other = RunConfig::from_json(r#"{"potential": "bump", "horizon": 10}"#).unwrap();
        assert_ne!(cfg.hash(), other.hash());
        let moved = RunConfig { out_dir: Some("elsewhere".into()), ..cfg.clone() };
        assert_eq!(cfg.hash(), moved.hash());
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"potential": "nope"}"#,
            r#"{"potential": "bump", "tol": -1}"#,
            r#"{"potential": "bump", "grids": {"r": {"start": 1, "end": 2, "n": 3}}}"#,
            r#"{"potential": "bump", "grids": {"z": [[0, -1]]}}"#,
            r#"{"potential": "bump", "unknown": 1}"#,
        ] {
            assert!(RunConfig::from_json(text).and_then(|c| c.validate()).is_err(), "{text}");
        }
        let spec = r#"{"potential": {"kind": "off_diagonal", "params": {"law": "constant", "value": 0.5}}}"#;
        RunConfig::from_json(spec).unwrap().validate().unwrap();
    }
}
