//! Command-line driver: configuration, stage orchestration and artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::equilibrium::{boundary_asymptotics, classify, solve, EquilibriumProfile};
use crate::error::{Error, Result};
use crate::evolve::{
    cauchy_solve, default_dt, evolve_linear, modal_seed, random_smooth_data, ModalSeed, DEFAULT_DELTA,
};
use crate::exterior::{horizons, match_metric, BoundaryJet, MatchReport};
use crate::linearop::{build_xchart, structural_checks, XChart};
use crate::model::{validate_spec, EosSpec, ModelParams};
use crate::modes::{solve_modes, ModeSet};

/// Pipeline stages in dependency order.
pub const STAGES: [&str; 6] = ["equilibrium", "operator", "modes", "evolve", "cauchy", "match"];

/// A single central density or a sweep list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoC {
    One(f64),
    List(Vec<f64>),
}

impl RhoC {
    pub fn values(&self) -> Vec<f64> {
        match self {
            RhoC::One(v) => vec![*v],
            RhoC::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the structure integration.
    #[serde(default = "default_tov_tol")]
    pub tov: f64,
    /// Smallness threshold for Cauchy data.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_tov_tol() -> f64 {
    1e-10
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tov: default_tov_tol(), delta: default_delta() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default = "one")]
    pub nu: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default, rename = "Theta0")]
    pub theta0: f64,
    /// Run length; ten periods of mode `nu` when absent.
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Step; the stable default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Steps between rows of the trajectory table.
    #[serde(default = "one")]
    pub record_every: usize,
    /// Steps between full state dumps; none when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    /// Seed of the random Cauchy data.
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

fn default_eps() -> f64 {
    1e-3
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            nu: 1,
            eps: default_eps(),
            theta0: 0.0,
            duration: None,
            dt: None,
            record_every: 1,
            snapshot_every: None,
            seed: 0,
        }
    }
}

/// Contents of the JSON configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub eos: EosSpec,
    pub params: ModelParams,
    pub rho_c: RhoC,
    /// Cosmological constants for a sweep; `params.Lambda` when absent.
    #[serde(default, rename = "Lambda_list", skip_serializing_if = "Option::is_none")]
    pub lambda_list: Option<Vec<f64>>,
    #[serde(default = "default_stages")]
    pub stages: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Finite-volume grid intervals.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Collocation intervals of the chart.
    #[serde(default = "default_chart_grid")]
    pub chart_grid: usize,
    #[serde(default)]
    pub evolve: EvolveConfig,
    /// Include `lambda_1` in sweep tables.
    #[serde(default)]
    pub sweep_lambda1: bool,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

fn default_stages() -> Vec<String> {
    vec!["equilibrium".into()]
}

fn default_modes() -> usize {
    3
}

fn default_grid() -> usize {
    256
}

fn default_chart_grid() -> usize {
    64
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        for s in &self.stages {
            if !STAGES.contains(&s.as_str()) {
                return bad(format!("unknown stage {s:?}"));
            }
        }
        if self.stages.is_empty() {
            return bad("stage list is empty".into());
        }
        let t = &self.tolerances;
        if !(t.tov > 0.0) || !(t.delta > 0.0) {
            return bad("tolerances must be positive".into());
        }
        let rho = self.rho_c.values();
        check_list("rho_c", &rho)?;
        if rho.iter().any(|v| !(*v > 0.0)) {
            return bad("central densities must be positive".into());
        }
        if let Some(l) = &self.lambda_list {
            check_list("Lambda_list", l)?;
        }
        if self.modes == 0 || self.grid < 8 * self.modes || self.chart_grid < 8 {
            return bad("need modes >= 1, grid >= 8 modes and chart_grid >= 8".into());
        }
        let e = &self.evolve;
        if e.nu == 0 || e.nu > self.modes {
            return bad(format!("evolve.nu = {} outside 1..={}", e.nu, self.modes));
        }
        if e.record_every == 0 || e.snapshot_every == Some(0) {
            return bad("cadences must be positive".into());
        }
        if e.dt.is_some_and(|d| !(d > 0.0)) || e.duration.is_some_and(|d| !(d >= 0.0)) {
            return bad("dt must be positive and T non-negative".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output directory left out.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).unwrap_or_default();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("output_dir");
        }
        let text = serde_json::to_string(&v).unwrap_or_default();
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    fn lambdas(&self) -> Vec<f64> {
        self.lambda_list.clone().unwrap_or_else(|| vec![self.params.lambda])
    }

    /// Requested stages plus their prerequisites, in pipeline order.
    pub fn resolved_stages(&self) -> Vec<&'static str> {
        let want = |s: &str| self.stages.iter().any(|x| x == s);
        let mut need = [false; STAGES.len()];
        for (i, s) in STAGES.iter().enumerate() {
            need[i] = want(s);
        }
        // evolve/cauchy -> modes -> operator -> equilibrium; match -> equilibrium
        if need[3] || need[4] {
            need[2] = true;
        }
        if need[2] {
            need[1] = true;
        }
        if need[1] || need[5] {
            need[0] = true;
        }
        STAGES.iter().zip(need).filter(|(_, n)| *n).map(|(s, _)| *s).collect()
    }
}

fn check_list(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::ConfigInvalid(format!("{name} is empty")));
    }
    if v.iter().any(|a| !a.is_finite()) || v.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::ConfigInvalid(format!("{name} must be finite and sorted ascending")));
    }
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "tovds", version, about = "Relativistic polytropes with a cosmological constant: equilibria, pulsations, exterior matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline for one central density.
    Run(Overrides),
    /// Equilibrium family over the central density and Lambda lists.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Also compute the lowest pulsation eigenvalue per point.
        #[arg(long)]
        lambda1: bool,
    },
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated stage names.
    #[arg(long, value_delimiter = ',')]
    pub stages: Option<Vec<String>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub theta0: Option<f64>,
    #[arg(long = "T")]
    pub duration: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Steps between full state dumps.
    #[arg(long)]
    pub snapshot_every: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = &self.stages {
            cfg.stages = v.clone();
        }
        if let Some(v) = self.tol {
            cfg.tolerances.tov = v;
        }
        if let Some(v) = self.modes {
            cfg.modes = v;
        }
        if let Some(v) = self.grid {
            cfg.grid = v;
        }
        if let Some(v) = self.eps {
            cfg.evolve.eps = v;
        }
        if let Some(v) = self.theta0 {
            cfg.evolve.theta0 = v;
        }
        if let Some(v) = self.duration {
            cfg.evolve.duration = Some(v);
        }
        if let Some(v) = self.dt {
            cfg.evolve.dt = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.evolve.seed = v;
        }
        if let Some(v) = self.snapshot_every {
            cfg.evolve.snapshot_every = Some(v);
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub seconds: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub version: String,
    pub stages: Vec<StageRecord>,
    pub outputs: Vec<String>,
    /// Headline numbers of the run.
    pub results: Value,
}

/// Failure of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: String,
    pub error: Error,
}

impl StageError {
    pub fn to_json(&self) -> Value {
        json!({ "stage": self.stage, "error": self.error.name(), "message": self.error.to_string() })
    }
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let p = self.path(name);
        fs::write(p, serde_json::to_string_pretty(v)? + "\n")?;
        Ok(())
    }
}

#[derive(Default)]
struct Pipeline {
    profile: Option<EquilibriumProfile>,
    chart: Option<XChart>,
    modes: Option<ModeSet>,
    modal_match: Option<MatchReport>,
}

fn stage_equilibrium(cfg: &RunConfig, rho_c: f64, out: &mut Outputs, p: &mut Pipeline, results: &mut Value) -> Result<()> {
    let eos = validate_spec(&cfg.eos, &cfg.params)?;
    let profile = solve(rho_c, &eos, &cfg.params, cfg.tolerances.tov)?;
    profile.write_csv(&out.path("profile.csv"))?;
    let fit = boundary_asymptotics(&profile).ok();
    let summary = profile.summary();
    out.json(
        "profile.json",
        &json!({
            "rho_c": rho_c,
            "summary": summary,
            "classification": classify(&profile),
            "boundary_fit": fit,
            "horizons": horizons(profile.m_plus, &cfg.params),
        }),
    )?;
    results["r_plus"] = json!(summary.r_plus);
    results["m_plus"] = json!(summary.m_plus);
    results["kappa_plus"] = json!(summary.kappa_plus);
    results["Q_plus"] = json!(summary.q_plus);
    p.profile = Some(profile);
    Ok(())
}

fn stage_operator(cfg: &RunConfig, out: &mut Outputs, p: &mut Pipeline, results: &mut Value) -> Result<()> {
    let profile = p.profile.as_ref().ok_or_else(|| Error::InvalidInput("no profile".into()))?;
    let chart = build_xchart(profile, cfg.chart_grid)?;
    chart.write_csv(&out.path("chart.csv"))?;
    out.json("chart.json", &json!({ "summary": chart.summary(), "structure": structural_checks(&chart)? }))?;
    results["xi_plus"] = json!(chart.xi_plus);
    p.chart = Some(chart);
    Ok(())
}

fn stage_modes(cfg: &RunConfig, out: &mut Outputs, p: &mut Pipeline, results: &mut Value) -> Result<()> {
    let chart = p.chart.as_ref().ok_or_else(|| Error::InvalidInput("no chart".into()))?;
    let modes = solve_modes(chart, cfg.modes, cfg.grid)?;
    modes.write_csv(&out.path("modes.csv"))?;
    out.json("modes.json", &modes.summary())?;
    results["lambdas"] = json!(modes.lambdas);
    p.modes = Some(modes);
    Ok(())
}

fn stage_evolve(cfg: &RunConfig, out: &mut Outputs, p: &mut Pipeline, results: &mut Value) -> Result<()> {
    let modes = p.modes.as_ref().ok_or_else(|| Error::InvalidInput("no modes".into()))?;
    let profile = p.profile.as_ref().ok_or_else(|| Error::InvalidInput("no profile".into()))?;
    let e = &cfg.evolve;
    let seed = ModalSeed::new(e.nu, e.eps, e.theta0);
    let initial = modal_seed(modes, &seed, 0.0)?;
    let lambda = modes.lambdas[e.nu - 1];
    let period = 2.0 * std::f64::consts::PI / lambda.sqrt();
    let duration = e.duration.unwrap_or(10.0 * period);
    let dt = e.dt.unwrap_or_else(|| default_dt(&modes.op));
    let every = e.snapshot_every.unwrap_or(usize::MAX);
    let traj = evolve_linear(&initial, &modes.op, dt, duration, every)?;
    write_trajectory(&traj, e.record_every, &out.path("trajectory.csv"))?;
    if e.snapshot_every.is_some() {
        for (k, s) in traj.snapshots.iter().enumerate() {
            s.write_csv(&modes.op, &out.path(&format!("snapshot_{k:05}.csv")))?;
        }
    }
    let jet = BoundaryJet::from_state(&traj.final_state, &modes.op, profile)?;
    p.modal_match = Some(match_metric(profile, &jet, traj.final_state.t)?);
    let summary = json!({
        "seed": seed,
        "lambda": lambda,
        "dt": traj.dt,
        "T": duration,
        "steps": traj.times.len() - 1,
        "expected_period": period,
        "measured_period": traj.boundary_period(),
        "density_law_period": traj.density_law_period(),
        "energy_drift": traj.energy_drift,
        "quadratic_term_sup": traj.quadratic_sup,
    });
    out.json("trajectory.json", &summary)?;
    results["measured_period"] = summary["measured_period"].clone();
    results["energy_drift"] = json!(traj.energy_drift);
    Ok(())
}

fn write_trajectory(traj: &crate::evolve::Trajectory, every: usize, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "y_at_x1", "v_at_x1", "energy", "C_of_t"])?;
    let last = traj.times.len() - 1;
    for i in (0..=last).filter(|i| i % every == 0 || *i == last) {
        w.write_record([traj.times[i], traj.y_at_x1[i], traj.v_at_x1[i], traj.energy[i], traj.c_of_t[i]].map(|a| format!("{a:e}")))?;
    }
    w.flush()?;
    Ok(())
}

fn stage_cauchy(cfg: &RunConfig, out: &mut Outputs, p: &mut Pipeline, results: &mut Value) -> Result<()> {
    let modes = p.modes.as_ref().ok_or_else(|| Error::InvalidInput("no modes".into()))?;
    let e = &cfg.evolve;
    let delta = cfg.tolerances.delta;
    let (psi0, psi1) = random_smooth_data(&modes.op, e.seed, 0.5 * delta);
    let lambda = modes.lambdas[0].abs();
    let duration = e.duration.unwrap_or(10.0 * 2.0 * std::f64::consts::PI / lambda.sqrt());
    let dt = e.dt.unwrap_or_else(|| default_dt(&modes.op));
    let (traj, report) = cauchy_solve(&psi0, &psi1, &modes.op, dt, duration, delta, usize::MAX)?;
    write_trajectory(&traj, e.record_every, &out.path("cauchy.csv"))?;
    out.json("cauchy.json", &json!({ "seed": e.seed, "delta": delta, "T": duration, "report": report }))?;
    results["cauchy_sup_ratio"] = json!(report.sup_ratio);
    Ok(())
}

fn stage_match(out: &mut Outputs, p: &mut Pipeline, results: &mut Value) -> Result<()> {
    let profile = p.profile.as_ref().ok_or_else(|| Error::InvalidInput("no profile".into()))?;
    let eq = match_metric(profile, &BoundaryJet::equilibrium(profile), 0.0)?;
    print!("equilibrium matching\n{}", eq.defect_table());
    if let Some(m) = &p.modal_match {
        print!("modal state at t = {:e}\n{}", m.t, m.defect_table());
    }
    out.json("match.json", &json!({ "equilibrium": eq, "modal": p.modal_match }))?;
    results["jump_A"] = json!(p.modal_match.as_ref().map_or(eq.jump_a, |m| m.jump_a));
    Ok(())
}

/// Executes the stages of `cfg` for its first central density and writes
/// artifacts plus `manifest.json`; on failure also `error.json`.
pub fn run(cfg: &RunConfig) -> std::result::Result<Manifest, StageError> {
    let fail = |stage: &str, error: Error| StageError { stage: stage.into(), error };
    cfg.validate().map_err(|e| fail("config", e))?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| fail("config", e.into()))?;
    let rho_c = cfg.rho_c.values()[0];
    let mut out = Outputs { dir: cfg.output_dir.clone(), files: Vec::new() };
    let mut pipe = Pipeline::default();
    let mut results = json!({});
    let mut records = Vec::new();
    let mut failure = None;
    for stage in cfg.resolved_stages() {
        let t0 = Instant::now();
        let res = match stage {
            "equilibrium" => stage_equilibrium(cfg, rho_c, &mut out, &mut pipe, &mut results),
            "operator" => stage_operator(cfg, &mut out, &mut pipe, &mut results),
            "modes" => stage_modes(cfg, &mut out, &mut pipe, &mut results),
            "evolve" => stage_evolve(cfg, &mut out, &mut pipe, &mut results),
            "cauchy" => stage_cauchy(cfg, &mut out, &mut pipe, &mut results),
            _ => stage_match(&mut out, &mut pipe, &mut results),
        };
        let status = match &res {
            Ok(()) => "ok".to_string(),
            Err(e) => format!("failed: {}", e.name()),
        };
        records.push(StageRecord { name: stage.into(), seconds: t0.elapsed().as_secs_f64(), status });
        if let Err(e) = res {
            failure = Some(fail(stage, e));
            break;
        }
    }
    finish(cfg, out, records, results, failure)
}

fn finish(
    cfg: &RunConfig,
    mut out: Outputs,
    stages: Vec<StageRecord>,
    results: Value,
    failure: Option<StageError>,
) -> std::result::Result<Manifest, StageError> {
    let io = |e: Error| StageError { stage: "manifest".into(), error: e };
    if let Some(f) = &failure {
        out.json("error.json", &f.to_json()).map_err(io)?;
    }
    let manifest = Manifest {
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        stages,
        outputs: out.files.clone(),
        results,
    };
    out.json("manifest.json", &manifest).map_err(io)?;
    match failure {
        Some(f) => Err(f),
        None => Ok(manifest),
    }
}

/// One row of `family.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPoint {
    pub rho_c: f64,
    pub lambda: f64,
    pub outcome: std::result::Result<FamilyValues, Error>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyValues {
    pub r_plus: f64,
    pub m_plus: f64,
    pub kappa_plus: f64,
    pub q_plus: f64,
    pub lambda_1: Option<f64>,
}

fn family_point(cfg: &RunConfig, rho_c: f64, lambda: f64, with_lambda1: bool) -> std::result::Result<FamilyValues, Error> {
    let params = ModelParams { lambda, ..cfg.params };
    let eos = validate_spec(&cfg.eos, &params)?;
    let profile = solve(rho_c, &eos, &params, cfg.tolerances.tov)?;
    let lambda_1 = if with_lambda1 {
        let chart = build_xchart(&profile, cfg.chart_grid)?;
        Some(solve_modes(&chart, 1, cfg.grid)?.lambdas[0])
    } else {
        None
    };
    Ok(FamilyValues {
        r_plus: profile.r_plus,
        m_plus: profile.m_plus,
        kappa_plus: profile.kappa_plus,
        q_plus: profile.q_plus,
        lambda_1,
    })
}

/// Equilibria over every `(rho_c, Lambda)` pair, Lambda-major, in parallel.
pub fn family(cfg: &RunConfig, with_lambda1: bool) -> Vec<FamilyPoint> {
    let pairs: Vec<(f64, f64)> =
        cfg.lambdas().into_iter().flat_map(|l| cfg.rho_c.values().into_iter().map(move |r| (r, l))).collect();
    pairs
        .par_iter()
        .map(|&(rho_c, lambda)| FamilyPoint { rho_c, lambda, outcome: family_point(cfg, rho_c, lambda, with_lambda1) })
        .collect()
}

pub fn write_family(points: &[FamilyPoint], with_lambda1: bool, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut head = vec!["rho_c", "Lambda", "r_plus", "m_plus", "kappa_plus", "Q_plus"];
    if with_lambda1 {
        head.push("lambda_1");
    }
    head.push("error");
    w.write_record(&head)?;
    for p in points {
        let mut row = vec![format!("{:e}", p.rho_c), format!("{:e}", p.lambda)];
        match &p.outcome {
            Ok(v) => {
                row.extend([v.r_plus, v.m_plus, v.kappa_plus, v.q_plus].map(|a| format!("{a:e}")));
                if with_lambda1 {
                    row.push(v.lambda_1.map(|a| format!("{a:e}")).unwrap_or_default());
                }
                row.push(String::new());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), if with_lambda1 { 5 } else { 4 }));
                row.push(e.name().to_string());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `family.csv` and `manifest.json` for the sweep in `cfg`.
pub fn sweep(cfg: &RunConfig, with_lambda1: bool) -> std::result::Result<Manifest, StageError> {
    let fail = |stage: &str, error: Error| StageError { stage: stage.into(), error };
    cfg.validate().map_err(|e| fail("config", e))?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| fail("config", e.into()))?;
    let mut out = Outputs { dir: cfg.output_dir.clone(), files: Vec::new() };
    let t0 = Instant::now();
    let points = family(cfg, with_lambda1);
    let path = out.path("family.csv");
    let written = write_family(&points, with_lambda1, &path);
    let failed = points.iter().filter(|p| p.outcome.is_err()).count();
    let status = match &written {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("failed: {}", e.name()),
    };
    let records = vec![StageRecord { name: "sweep".into(), seconds: t0.elapsed().as_secs_f64(), status }];
    let results = json!({ "points": points.len(), "failed_points": failed });
    finish(cfg, out, records, results, written.err().map(|e| fail("sweep", e)))
}

/// Entry point behind the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let (ov, sweep_flag) = match &cli.command {
        Command::Run(o) => (o, None),
        Command::Sweep { overrides, lambda1 } => (overrides, Some(*lambda1)),
    };
    let cfg = match RunConfig::from_file(&ov.config) {
        Ok(c) => ov.apply(c),
        Err(e) => {
            let err = StageError { stage: "config".into(), error: e };
            eprintln!("{}", err.to_json());
            return 2;
        }
    };
    let res = match sweep_flag {
        None => run(&cfg),
        Some(flag) => sweep(&cfg, flag || cfg.sweep_lambda1),
    };
    match res {
        Ok(m) => {
            println!("{}", serde_json::to_string_pretty(&m.results).unwrap_or_default());
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            if e.stage == "config" {
                2
            } else {
                1
            }
        }
    }
}
