//! Command-line driver: `solve`, `recover`, `certify`, `particles`, `sweep` and `threedelta`.
//!
//! Settings come from an optional flat `key = value` file, overridden by flags.
//! Every artifact carries the resolved [`RunConfig`] and SHA-256 hashes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::certify::{certify, pipeline_candidate, Candidate, CandidateSource, SupportThresholds};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lp::IpmOptions;
use crate::particles::{clusters_1d, histogram, histogram_csv, simulate, ParticleOptions};
use crate::potential::{
    build_potential, load_tabulated, PotentialSpec, SampledPotential, TableOptions,
};
use crate::recovery::RecoveryOptions;
use crate::relaxation::{
    complementarity_report, mode_table, solve_relaxation, RelaxOptions, RelaxationSolution,
};
use crate::sweep::{
    classify_regions, phase_sweep, region_csv, table_jsonl, SweepConfig, SweepControl,
};
use crate::threedelta::{evaluate, minimize_three_delta, samples_csv, ThreeDeltaOptions};

pub const SCHEMA: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Solve,
    Recover,
    Certify,
    Particles,
    Sweep,
    Threedelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSettings {
    pub count: usize,
    pub dt: f64,
    pub t_end: f64,
    pub force_tol: f64,
    pub snapshot_every: usize,
    /// Histogram bins; 0 uses the grid size.
    pub bins: usize,
    /// Gap separating clusters in 1D reports.
    pub cluster_gap: f64,
}

impl Default for ParticleSettings {
    fn default() -> Self {
        let p = ParticleOptions::default();
        Self {
            count: p.count,
            dt: p.dt,
            t_end: p.t_end,
            force_tol: p.force_tol,
            snapshot_every: p.snapshot_every,
            bins: 0,
            cluster_gap: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeDeltaSettings {
    pub k_max: usize,
    pub p_max: u64,
    /// Uniform separations `j / (2 s_steps)`, `j = 1..=s_steps`.
    pub s_steps: usize,
}

impl Default for ThreeDeltaSettings {
    fn default() -> Self {
        let o = ThreeDeltaOptions::default();
        Self {
            k_max: o.k_max,
            p_max: o.p_max,
            s_steps: 500,
        }
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub potential: PotentialSpec,
    /// Points per axis (taken from the file for tabulated potentials).
    pub n: usize,
    pub lp_tol: f64,
    pub tol1: f64,
    pub tol2: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub starts: usize,
    pub out: PathBuf,
    /// `solve` also recovers ρ*.
    pub recover: bool,
    /// `solve`/`recover` also certify; `threedelta` also compares against `E_R`.
    pub certify: bool,
    pub particles: ParticleSettings,
    pub threedelta: ThreeDeltaSettings,
    pub sweep: Option<SweepConfig>,
}

const SWEEP_KEYS: &[&str] = &[
    "family",
    "sigma",
    "L_min",
    "L_max",
    "G_min",
    "G_max",
    "steps",
    "L_steps",
    "G_steps",
    "n",
    "lp_tol",
    "recover",
    "seed",
    "starts",
    "max_iters",
    "workers",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for {key}: {v:?}")))
}

fn default_n(spec: &PotentialSpec) -> usize {
    match spec {
        PotentialSpec::PeriodicMorse1D { .. } => 800,
        PotentialSpec::Local { .. } => 360,
        PotentialSpec::RegularizedPowerLaw { .. } => 1000,
        PotentialSpec::MultiScale { .. } => 1024,
        PotentialSpec::Morse2D { .. } => 40,
        PotentialSpec::Tabulated { .. } => 0,
    }
}

impl RunConfig {
    /// Builds a config from merged `key = value` pairs; unknown keys are errors.
    pub fn from_pairs(command: CommandKind, pairs: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let f = |k: &str, d: f64| get(k).map_or(Ok(d), |v| num(k, v));
        let family = get("family").unwrap_or("morse1d");
        let potential = match family {
            "morse1d" | "periodic_morse1d" => {
                PotentialSpec::morse1d(f("sigma", 0.1)?, f("L", 1.2)?, f("G", 0.9)?)
            }
            "local" => PotentialSpec::local(f("lc", 0.1)?),
            "powerlaw" | "power_law" => PotentialSpec::RegularizedPowerLaw {
                eps: f("eps", crate::potential::DEFAULT_POWER_LAW_EPS)?,
                coefficient: f(
                    "coefficient",
                    crate::potential::DEFAULT_POWER_LAW_COEFFICIENT,
                )?,
            },
            "multiscale" | "multi_scale" => PotentialSpec::MultiScale {
                width: f("width", crate::potential::DEFAULT_TRIANGLE_WIDTH)?,
            },
            "morse2d" => PotentialSpec::morse2d(f("L", 1.5)?, f("G", 0.9)?),
            "tabulated" => PotentialSpec::Tabulated {
                source: get("file")
                    .ok_or_else(|| Error::Parse("tabulated family needs file = <path>".into()))?
                    .into(),
            },
            other => return Err(Error::Parse(format!("unknown family {other:?}"))),
        };
        let p_def = ParticleSettings::default();
        let t_def = ThreeDeltaSettings::default();
        let r_def = RecoveryOptions::default();
        let mut cfg = Self {
            command,
            n: get("n").map_or(Ok(default_n(&potential)), |v| num("n", v))?,
            potential,
            lp_tol: f("lp_tol", crate::lp::DEFAULT_TOL)?,
            tol1: f("tol1", r_def.tol1)?,
            tol2: f("tol2", r_def.tol2)?,
            max_iters: get("max_iters").map_or(Ok(r_def.max_iters), |v| num("max_iters", v))?,
            seed: get("seed").map_or(Ok(0), |v| num("seed", v))?,
            starts: get("starts").map_or(Ok(r_def.starts), |v| num("starts", v))?,
            out: get("out").map_or_else(|| PathBuf::from("out"), PathBuf::from),
            recover: get("recover").map_or(Ok(false), |v| num("recover", v))?,
            certify: get("certify").map_or(Ok(false), |v| num("certify", v))?,
            particles: ParticleSettings {
                count: get("N").map_or(Ok(p_def.count), |v| num("N", v))?,
                dt: f("dt", p_def.dt)?,
                t_end: f("t_end", p_def.t_end)?,
                force_tol: f("force_tol", p_def.force_tol)?,
                snapshot_every: get("snapshot_every")
                    .map_or(Ok(p_def.snapshot_every), |v| num("snapshot_every", v))?,
                bins: get("bins").map_or(Ok(p_def.bins), |v| num("bins", v))?,
                cluster_gap: f("cluster_gap", p_def.cluster_gap)?,
            },
            threedelta: ThreeDeltaSettings {
                k_max: get("k_max").map_or(Ok(t_def.k_max), |v| num("k_max", v))?,
                p_max: get("p_max").map_or(Ok(t_def.p_max), |v| num("p_max", v))?,
                s_steps: get("s_steps").map_or(Ok(t_def.s_steps), |v| num("s_steps", v))?,
            },
            sweep: None,
        };
        const KNOWN: &[&str] = &[
            "family",
            "sigma",
            "L",
            "G",
            "lc",
            "eps",
            "coefficient",
            "width",
            "file",
            "n",
            "lp_tol",
            "tol1",
            "tol2",
            "max_iters",
            "seed",
            "starts",
            "out",
            "recover",
            "certify",
            "N",
            "dt",
            "t_end",
            "force_tol",
            "snapshot_every",
            "bins",
            "cluster_gap",
            "k_max",
            "p_max",
            "s_steps",
        ];
        for k in pairs.keys() {
            if !KNOWN.contains(&k.as_str()) && !SWEEP_KEYS.contains(&k.as_str()) {
                return Err(Error::Parse(format!("unknown key {k:?}")));
            }
        }
        if command == CommandKind::Sweep {
            let mut sp: BTreeMap<String, String> = pairs
                .iter()
                .filter(|(k, _)| SWEEP_KEYS.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            // sweeps default to their own coarse grid
            if !pairs.contains_key("n") {
                sp.remove("n");
            }
            if !pairs.contains_key("starts") {
                sp.insert("starts".into(), "1".into());
            }
            if !pairs.contains_key("max_iters") {
                sp.remove("max_iters");
            }
            let sweep = SweepConfig::from_pairs(&sp)?;
            cfg.n = sweep.n;
            cfg.sweep = Some(sweep);
        }
        // tolerances below double-precision resolution cannot be met by any solve
        if !(1e-14..1.0).contains(&cfg.lp_tol) {
            return Err(Error::ParameterDomain(format!(
                "lp_tol must lie in [1e-14, 1), got {:e}",
                cfg.lp_tol
            )));
        }
        if !(cfg.tol1 >= 0.0 && cfg.tol2 >= 0.0) {
            return Err(Error::ParameterDomain(
                "tol1 and tol2 must be non-negative".into(),
            ));
        }
        cfg.potential.validate()?;
        Ok(cfg)
    }

    pub fn relax_options(&self) -> RelaxOptions {
        RelaxOptions {
            ipm: IpmOptions {
                tol: self.lp_tol,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    pub fn recovery_options(&self) -> RecoveryOptions {
        RecoveryOptions {
            tol1: self.tol1,
            tol2: self.tol2,
            max_iters: self.max_iters,
            seed: self.seed,
            starts: self.starts,
            ..Default::default()
        }
    }

    pub fn particle_options(&self) -> ParticleOptions {
        ParticleOptions {
            count: self.particles.count,
            seed: self.seed,
            dt: self.particles.dt,
            t_end: self.particles.t_end,
            snapshot_every: self.particles.snapshot_every,
            force_tol: self.particles.force_tol,
            ..Default::default()
        }
    }

    /// Samples the configured potential.
    pub fn potential(&self) -> Result<SampledPotential> {
        match &self.potential {
            PotentialSpec::Tabulated { source } => {
                load_tabulated(Path::new(source), TableOptions::default())
            }
            spec => build_potential(spec, Grid::new(spec.dim().unwrap_or(1), self.n)?),
        }
    }

    /// Hash of every parameter except the output directory.
    pub fn sha256(&self) -> String {
        let hashed = Self {
            out: PathBuf::new(),
            ..self.clone()
        };
        sha256_hex(
            serde_json::to_string(&hashed)
                .unwrap_or_default()
                .as_bytes(),
        )
    }
}

/// Parses flat `key = value` text; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("line {}: expected key = value, got {raw:?}", i + 1))
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Debug, Parser)]
#[command(
    name = "relaxcert",
    version,
    about = "Relaxation bounds, recovery and certificates for pairwise energies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the relaxation and write F_R, the dual decomposition and the mode table.
    Solve(RunArgs),
    /// Solve, then recover ρ* from F_R.
    Recover(RunArgs),
    /// Full pipeline with the optimality certificate.
    Certify(RunArgs),
    /// Particle gradient-flow simulation.
    Particles(RunArgs),
    /// Morse phase-diagram sweep with checkpointing.
    Sweep(RunArgs),
    /// Three-atom restricted relaxation.
    Threedelta(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Tabulated potential file (same as `--family tabulated --tabulated FILE`).
    pub input: Option<PathBuf>,
    /// `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// morse1d, local, powerlaw, multiscale, morse2d or tabulated.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub tabulated: Option<PathBuf>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long = "G")]
    pub g: Option<f64>,
    #[arg(long)]
    pub lc: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub coefficient: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub lp_tol: Option<f64>,
    #[arg(long)]
    pub tol1: Option<f64>,
    #[arg(long)]
    pub tol2: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub recover: bool,
    #[arg(long)]
    pub certify: bool,
    /// Particle count.
    #[arg(long = "N")]
    pub count: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub force_tol: Option<f64>,
    /// Extra `key=value` settings (sweep ranges and the like); repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl RunArgs {
    /// Config-file pairs with flags layered on top.
    pub fn merged_pairs(&self) -> Result<BTreeMap<String, String>> {
        let mut pairs = match &self.config {
            Some(p) => parse_kv(&std::fs::read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.insert(k.to_string(), v);
            }
        };
        let s = |x: Option<f64>| x.map(|v| v.to_string());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("family", self.family.clone());
        if let Some(p) = self.tabulated.as_ref().or(self.input.as_ref()) {
            put("family", Some("tabulated".into()));
            put("file", Some(p.display().to_string()));
        }
        put("sigma", s(self.sigma));
        put("L", s(self.l));
        put("G", s(self.g));
        put("lc", s(self.lc));
        put("eps", s(self.eps));
        put("coefficient", s(self.coefficient));
        put("width", s(self.width));
        put("n", self.n.map(|v| v.to_string()));
        put("lp_tol", s(self.lp_tol));
        put("tol1", s(self.tol1));
        put("tol2", s(self.tol2));
        put("max_iters", self.max_iters.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("starts", self.starts.map(|v| v.to_string()));
        put("recover", self.recover.then(|| "true".into()));
        put("certify", self.certify.then(|| "true".into()));
        put("N", self.count.map(|v| v.to_string()));
        put("dt", s(self.dt));
        put("t_end", s(self.t_end));
        put("force_tol", s(self.force_tol));
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            pairs.insert(k.trim().into(), v.trim().into());
        }
        Ok(pairs)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ParameterDomain(_) | Error::Shape(_) | Error::Parse(_) | Error::Io(_) => EXIT_CONFIG,
        Error::CertificateInconsistent { .. } | Error::Inconsistent(_) => EXIT_CERTIFICATE,
        _ => EXIT_SOLVER,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::ParameterDomain(_) => "parameter_domain",
        Error::Shape(_) => "shape",
        Error::MaxIterations { .. } => "max_iterations",
        Error::NumericalFailure(_) => "numerical_failure",
        Error::CertificateInconsistent { .. } => "certificate_inconsistent",
        Error::NotAtomic => "not_atomic",
        Error::DivergentRatio { .. } => "divergent_ratio",
        Error::Inconsistent(_) => "inconsistent",
        Error::Internal(_) => "internal",
        Error::Io(_) => "io",
        Error::Parse(_) => "parse",
    }
}

/// Writes artifacts into the output directory, recording their hashes.
struct Artifacts<'a> {
    cfg: &'a RunConfig,
    config_hash: String,
    written: BTreeMap<String, String>,
}

impl<'a> Artifacts<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        std::fs::create_dir_all(&cfg.out)?;
        Ok(Self {
            cfg,
            config_hash: cfg.sha256(),
            written: BTreeMap::new(),
        })
    }

    fn raw(&mut self, name: &str, body: &str) -> Result<()> {
        std::fs::write(self.cfg.out.join(name), body)?;
        self.written
            .insert(name.into(), sha256_hex(body.as_bytes()));
        Ok(())
    }

    /// CSV with two comment lines carrying the schema, hashes and config.
    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let header = format!(
            "# schema={SCHEMA} config_sha256={} content_sha256={}\n# config={}\n",
            self.config_hash,
            sha256_hex(body.as_bytes()),
            serde_json::to_string(self.cfg)?
        );
        self.raw(name, &(header + body))
    }

    fn json(&mut self, name: &str, result: Value) -> Result<Value> {
        let doc = self.envelope(result)?;
        self.raw(name, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
        Ok(doc)
    }

    fn envelope(&self, result: Value) -> Result<Value> {
        let content = sha256_hex(serde_json::to_string(&result)?.as_bytes());
        Ok(json!({
            "schema": SCHEMA,
            "command": self.cfg.command,
            "config": self.cfg,
            "config_sha256": self.config_hash,
            "result": result,
            "content_sha256": content,
        }))
    }
}

fn grid_csv(grid: Grid, columns: &[(&str, &[f64])]) -> String {
    let mut out = if grid.dim() == 1 {
        String::from("x")
    } else {
        String::from("x,y")
    };
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for j in 0..grid.len() {
        let c = grid.coords(j);
        out.push_str(&format!("{:.17e}", c[0]));
        if grid.dim() == 2 {
            out.push_str(&format!(",{:.17e}", c[1]));
        }
        for (_, col) in columns {
            let _ = write!(out, ",{:.17e}", col[j]);
        }
        out.push('\n');
    }
    out
}

fn relaxation_summary(sol: &RelaxationSolution, w: &SampledPotential) -> Value {
    json!({
        "e_r": sol.e_r,
        "kind": sol.kind,
        "degenerate": sol.degenerate,
        "stats": sol.stats,
        "tol": sol.tol,
        "e_d": sol.decomp.e_d,
        "decomposition_residual": sol.decomp.residual,
        "complementarity": complementarity_report(&sol.f_r, &sol.decomp, sol.tol, w.max_abs()),
        "cone": sol.f_r.cone_report(),
    })
}

fn write_relaxation(
    art: &mut Artifacts,
    sol: &RelaxationSolution,
    w: &SampledPotential,
) -> Result<Value> {
    let g = sol.f_r.grid;
    art.csv(
        "decomposition.csv",
        &grid_csv(
            g,
            &[
                ("W", &w.values),
                ("W_plus", &sol.decomp.w_plus),
                ("K", &sol.decomp.k),
            ],
        ),
    )?;
    art.csv("f_r.csv", &grid_csv(g, &[("F_R", &sol.f_r.values)]))?;
    let mut modes = if g.dim() == 1 {
        String::from("k,K_hat,F_R_hat\n")
    } else {
        String::from("kx,ky,K_hat,F_R_hat\n")
    };
    for (k, kh, fh) in mode_table(sol) {
        if g.dim() == 1 {
            let _ = writeln!(modes, "{},{kh:.17e},{fh:.17e}", k[0]);
        } else {
            let _ = writeln!(modes, "{},{},{kh:.17e},{fh:.17e}", k[0], k[1]);
        }
    }
    art.csv("coefficients.csv", &modes)?;
    if let Some(atoms) = sol.kind.atoms() {
        art.json("atoms.json", serde_json::to_value(atoms)?)?;
    }
    let summary = relaxation_summary(sol, w);
    art.json("relaxation.json", summary.clone())?;
    Ok(summary)
}

fn candidate_summary(c: &Candidate) -> Value {
    match &c.source {
        CandidateSource::Recovered {
            per_seed,
            iterations,
            converged,
            ..
        } => json!({
            "source": "recovered", "kl_final": c.kl_final, "per_seed": per_seed,
            "iterations": iterations, "converged": converged,
        }),
        CandidateSource::Direct => json!({"source": "direct", "kl_final": c.kl_final}),
        CandidateSource::Constant => json!({"source": "constant", "kl_final": c.kl_final}),
    }
}

fn write_candidate(art: &mut Artifacts, c: &Candidate) -> Result<()> {
    art.csv("rho.csv", &grid_csv(c.rho.grid, &[("rho", &c.rho.values)]))?;
    if let CandidateSource::Recovered { kl_trace, .. } = &c.source {
        let mut s = String::from("iter,kl\n");
        for (i, v) in kl_trace.iter().enumerate() {
            let _ = writeln!(s, "{i},{v:.17e}");
        }
        art.csv("kl_trace.csv", &s)?;
    }
    Ok(())
}

/// Executes a resolved config; returns the summary document.
pub fn execute(cfg: &RunConfig) -> Result<Value> {
    let mut art = Artifacts::new(cfg)?;
    let result = match cfg.command {
        CommandKind::Solve | CommandKind::Recover | CommandKind::Certify => {
            let w = cfg.potential()?;
            let sol = solve_relaxation(&w, &cfg.relax_options())?;
            let mut out = json!({ "relaxation": write_relaxation(&mut art, &sol, &w)? });
            let wants_candidate = cfg.command != CommandKind::Solve || cfg.recover || cfg.certify;
            if wants_candidate {
                let cand = pipeline_candidate(&w, &sol, &cfg.recovery_options())?;
                write_candidate(&mut art, &cand)?;
                out["candidate"] = candidate_summary(&cand);
                if cfg.command == CommandKind::Certify || cfg.certify {
                    let rep = certify(&cand.rho, &w, &sol, &SupportThresholds::default())?;
                    art.csv(
                        "lambda.csv",
                        &grid_csv(cand.rho.grid, &[("lambda", &rep.first_order.lambda)]),
                    )?;
                    let mut v = serde_json::to_value(&rep)?;
                    if let Some(fo) = v.get_mut("first_order").and_then(Value::as_object_mut) {
                        fo.remove("lambda");
                    }
                    out["alpha"] = json!(rep.alpha);
                    out["certificate"] = v;
                }
            }
            out
        }
        CommandKind::Particles => {
            let w = cfg.potential()?;
            let trace = simulate(&w, &cfg.particle_options())?;
            let last = trace.last();
            art.csv("snapshots.csv", &trace.snapshots_csv())?;
            let bins = if cfg.particles.bins == 0 {
                w.grid.n()
            } else {
                cfg.particles.bins
            };
            art.csv("histogram.csv", &histogram_csv(&histogram(last, bins)?))?;
            let mut out = json!({
                "steps": trace.steps,
                "time": last.time,
                "final_energy": trace.final_energy,
                "final_max_force": trace.final_max_force,
                "final_dt": trace.final_dt,
            });
            if last.dim == 1 {
                let clusters = clusters_1d(last, cfg.particles.cluster_gap);
                out["clusters"] = serde_json::to_value(&clusters)?;
            }
            out
        }
        CommandKind::Sweep => {
            let sc = cfg
                .sweep
                .as_ref()
                .ok_or_else(|| Error::Internal("sweep settings missing".into()))?;
            let table = phase_sweep(
                sc,
                Some(&cfg.out.join("checkpoint.jsonl")),
                SweepControl::default(),
            )?;
            art.raw("table.jsonl", &table_jsonl(&table)?)?;
            let map = classify_regions(&table, sc.l_steps, sc.g_steps)?;
            art.csv("regions.csv", &region_csv(&table, &map))?;
            art.json("regions.json", serde_json::to_value(&map)?)?;
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for p in &table {
                *counts.entry(p.region_key()).or_default() += 1;
            }
            json!({
                "points": table.len(),
                "failures": table.iter().filter(|p| p.error.is_some()).count(),
                "kinds": counts,
                "regions": map.regions.len(),
                "table_sha256": art.written.get("table.jsonl"),
            })
        }
        CommandKind::Threedelta => {
            let w = cfg.potential()?;
            if w.grid.dim() != 1 {
                return Err(Error::ParameterDomain(
                    "threedelta needs a one-dimensional potential".into(),
                ));
            }
            let t = &cfg.threedelta;
            let s_grid: Vec<f64> = (1..=t.s_steps)
                .map(|j| 0.5 * j as f64 / t.s_steps as f64)
                .collect();
            let res = minimize_three_delta(
                &w,
                &s_grid,
                &ThreeDeltaOptions {
                    k_max: t.k_max,
                    p_max: t.p_max,
                },
            )?;
            art.csv(
                "samples.csv",
                &samples_csv(&evaluate(&w, &s_grid, t.k_max)?),
            )?;
            let mut out = serde_json::to_value(&res)?;
            if cfg.certify {
                let sol = solve_relaxation(&w, &cfg.relax_options())?;
                out["e_r"] = json!(sol.e_r);
                out["bound_holds"] =
                    json!(sol.e_r <= res.e_star + 10.0 * sol.tol * w.max_abs().max(1.0));
            }
            out
        }
    };
    let name = format!(
        "{}.json",
        serde_json::to_value(cfg.command)?
            .as_str()
            .unwrap_or("summary")
    );
    let mut doc = art.json(&name, result)?;
    doc["artifacts"] = serde_json::to_value(&art.written)?;
    Ok(doc)
}

fn error_document(e: &Error) -> Value {
    json!({
        "schema": SCHEMA,
        "status": "error",
        "exit_code": exit_code(e),
        "error": { "kind": error_kind(e), "message": e.to_string() },
    })
}

/// Parses arguments, runs the command and prints a JSON summary; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (kind, args) = match cli.command {
        Command::Solve(a) => (CommandKind::Solve, a),
        Command::Recover(a) => (CommandKind::Recover, a),
        Command::Certify(a) => (CommandKind::Certify, a),
        Command::Particles(a) => (CommandKind::Particles, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
        Command::Threedelta(a) => (CommandKind::Threedelta, a),
    };
    let cfg = match args
        .merged_pairs()
        .and_then(|p| RunConfig::from_pairs(kind, &p))
    {
        Ok(c) => c,
        Err(e) => {
            println!("{}", error_document(&e));
            return EXIT_CONFIG;
        }
    };
    match execute(&cfg) {
        Ok(doc) => {
            let summary = json!({
                "schema": SCHEMA,
                "status": "ok",
                "command": cfg.command,
                "out": cfg.out,
                "content_sha256": doc["content_sha256"],
                "artifacts": doc["artifacts"],
            });
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            let doc = error_document(&e);
            if std::fs::create_dir_all(&cfg.out).is_ok() {
                let _ = std::fs::write(cfg.out.join("error.json"), doc.to_string() + "\n");
            }
            println!("{doc}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_parsing() {
        let kv = parse_kv("# comment\nfamily = local\nlc=0.2 # trailing\n\n").unwrap();
        assert_eq!(kv["family"], "local");
        assert_eq!(kv["lc"], "0.2");
        assert!(parse_kv("novalue").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "family = local\nlc = 0.2\nn = 100\n").unwrap();
        let args = RunArgs {
            config: Some(path),
            n: Some(50),
            ..Default::default()
        };
        let cfg = RunConfig::from_pairs(CommandKind::Solve, &args.merged_pairs().unwrap()).unwrap();
        assert_eq!(cfg.n, 50);
        assert_eq!(cfg.potential, PotentialSpec::local(0.2));
    }

    #[test]
    fn unknown_keys_and_codes() {
        let mut kv = BTreeMap::new();
        kv.insert("bogus".to_string(), "1".to_string());
        let e = RunConfig::from_pairs(CommandKind::Solve, &kv).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        assert_eq!(
            exit_code(&Error::CertificateInconsistent { residual: 1.0 }),
            EXIT_CERTIFICATE
        );
        assert_eq!(
            exit_code(&Error::MaxIterations { iterations: 3 }),
            EXIT_SOLVER
        );
    }

    #[test]
    fn family_defaults() {
        let cfg = RunConfig::from_pairs(CommandKind::Solve, &BTreeMap::new()).unwrap();
        assert_eq!(cfg.n, 800);
        assert_eq!(cfg.potential, PotentialSpec::morse1d(0.1, 1.2, 0.9));
        let mut kv = BTreeMap::new();
        kv.insert("steps".to_string(), "3".to_string());
        let sweep = RunConfig::from_pairs(CommandKind::Sweep, &kv).unwrap();
        assert_eq!(sweep.n, 200);
        assert_eq!(sweep.sweep.unwrap().l_steps, 3);
    }
}
