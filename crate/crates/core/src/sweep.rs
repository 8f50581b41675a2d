//! Phase diagrams of the periodic Morse family over an `(L, G)` window, with an
//! append-only JSON-lines checkpoint so interrupted sweeps resume where they stopped.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{certify, pipeline_candidate, SupportThresholds};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lp::IpmOptions;
use crate::potential::{build_potential, PotentialSpec};
use crate::recovery::RecoveryOptions;
use crate::relaxation::{solve_relaxation, RelaxOptions, SolutionKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub sigma: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub l_steps: usize,
    pub g_steps: usize,
    pub n: usize,
    pub tol: f64,
    /// Recover and certify each point (otherwise only the relaxation is solved).
    pub recover: bool,
    pub seed: u64,
    pub starts: usize,
    pub recovery_max_iters: usize,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            l_min: 0.5,
            l_max: 2.0,
            g_min: 0.5,
            g_max: 2.0,
            l_steps: 10,
            g_steps: 10,
            n: 200,
            tol: crate::lp::DEFAULT_TOL,
            recover: false,
            seed: 0,
            starts: 1,
            recovery_max_iters: 20_000,
            workers: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for {key}: {v:?}")))
}

impl SweepConfig {
    /// Reads `key = value` pairs; unknown keys are rejected.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in pairs {
            match k.as_str() {
                "family" => {
                    if !matches!(v.as_str(), "morse1d" | "periodic_morse1d") {
                        return Err(Error::Parse(format!(
                            "sweeps support the morse1d family only (got {v})"
                        )));
                    }
                }
                "sigma" => c.sigma = parse_num(k, v)?,
                "L_min" | "l_min" => c.l_min = parse_num(k, v)?,
                "L_max" | "l_max" => c.l_max = parse_num(k, v)?,
                "G_min" | "g_min" => c.g_min = parse_num(k, v)?,
                "G_max" | "g_max" => c.g_max = parse_num(k, v)?,
                "steps" => {
                    c.l_steps = parse_num(k, v)?;
                    c.g_steps = c.l_steps;
                }
                "L_steps" | "l_steps" => c.l_steps = parse_num(k, v)?,
                "G_steps" | "g_steps" => c.g_steps = parse_num(k, v)?,
                "n" => c.n = parse_num(k, v)?,
                "tol" | "lp_tol" => c.tol = parse_num(k, v)?,
                "recover" => c.recover = parse_num(k, v)?,
                "seed" => c.seed = parse_num(k, v)?,
                "seeds" | "starts" => c.starts = parse_num(k, v)?,
                "recovery_max_iters" | "max_iters" => c.recovery_max_iters = parse_num(k, v)?,
                "workers" => c.workers = parse_num(k, v)?,
                _ => return Err(Error::Parse(format!("unknown sweep key {k:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ParameterDomain(m));
        if self.l_steps == 0 || self.g_steps == 0 {
            return bad("sweep needs at least one step per axis".into());
        }
        if !(self.l_min > 0.0
            && self.l_max >= self.l_min
            && self.g_min > 0.0
            && self.g_max >= self.g_min)
        {
            return bad(format!(
                "invalid window L in [{}, {}], G in [{}, {}]",
                self.l_min, self.l_max, self.g_min, self.g_max
            ));
        }
        if self.n < 2 {
            return bad("sweep grid needs n >= 2".into());
        }
        PotentialSpec::morse1d(self.sigma, self.l_min, self.g_min).validate()
    }

    fn axis(lo: f64, hi: f64, steps: usize, i: usize) -> f64 {
        if steps == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (steps - 1) as f64
        }
    }

    pub fn l_value(&self, i: usize) -> f64 {
        Self::axis(self.l_min, self.l_max, self.l_steps, i)
    }

    pub fn g_value(&self, i: usize) -> f64 {
        Self::axis(self.g_min, self.g_max, self.g_steps, i)
    }

    pub fn len(&self) -> usize {
        self.l_steps * self.g_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMeta {
    pub sigma: f64,
    pub n: usize,
    pub tol: f64,
    pub recover: bool,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    /// Row-major index `i_l * g_steps + i_g`.
    pub index: usize,
    pub i_l: usize,
    pub i_g: usize,
    pub l: f64,
    pub g: f64,
    /// Classifier label, or `"error"`.
    pub kind: String,
    pub atoms: Option<usize>,
    pub spacing: Option<Vec<f64>>,
    pub e_r: Option<f64>,
    pub alpha: Option<f64>,
    pub error: Option<String>,
    pub meta: PointMeta,
}

impl PhasePoint {
    /// Region key: the label, refined by the atom count for lattices.
    pub fn region_key(&self) -> String {
        match (self.kind.as_str(), self.atoms) {
            ("dirac_lattice", Some(a)) => format!("dirac_lattice:{a}"),
            (k, _) => k.to_string(),
        }
    }
}

/// Checkpoint line: a point plus its wall time, which is kept out of the final table.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointRecord {
    point: PhasePoint,
    wall_seconds: f64,
}

pub fn solve_point(cfg: &SweepConfig, i_l: usize, i_g: usize) -> PhasePoint {
    let (l, g) = (cfg.l_value(i_l), cfg.g_value(i_g));
    let meta = PointMeta {
        sigma: cfg.sigma,
        n: cfg.n,
        tol: cfg.tol,
        recover: cfg.recover,
        seeds: if cfg.recover {
            (0..cfg.starts.max(1) as u64)
                .map(|i| cfg.seed + i)
                .collect()
        } else {
            Vec::new()
        },
    };
    let mut point = PhasePoint {
        index: i_l * cfg.g_steps + i_g,
        i_l,
        i_g,
        l,
        g,
        kind: "error".into(),
        atoms: None,
        spacing: None,
        e_r: None,
        alpha: None,
        error: None,
        meta,
    };
    let run = || -> Result<(SolutionKind, f64, Option<f64>)> {
        let w = build_potential(&PotentialSpec::morse1d(cfg.sigma, l, g), Grid::line(cfg.n))?;
        let relax = RelaxOptions {
            ipm: IpmOptions {
                tol: cfg.tol,
                ..Default::default()
            },
            ..Default::default()
        };
        let sol = solve_relaxation(&w, &relax)?;
        let alpha = if cfg.recover {
            let rec = RecoveryOptions {
                seed: cfg.seed,
                starts: cfg.starts,
                max_iters: cfg.recovery_max_iters,
                ..Default::default()
            };
            let cand = pipeline_candidate(&w, &sol, &rec)?;
            Some(certify(&cand.rho, &w, &sol, &SupportThresholds::default())?.alpha)
        } else {
            None
        };
        Ok((sol.kind, sol.e_r, alpha))
    };
    match run() {
        Ok((kind, e_r, alpha)) => {
            point.kind = kind.label().into();
            point.atoms = kind.atoms().map(<[_]>::len);
            if let SolutionKind::DiracLattice { spacing, .. } = &kind {
                point.spacing = Some(spacing.clone());
            }
            point.e_r = Some(e_r);
            point.alpha = alpha;
        }
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

/// Reads completed points; a torn final line (crash mid-write) is ignored.
fn read_checkpoint(path: &Path) -> Result<BTreeMap<usize, PhasePoint>> {
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(rec) = serde_json::from_str::<CheckpointRecord>(&line) {
            done.insert(rec.point.index, rec.point);
        }
    }
    Ok(done)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepControl {
    /// Stop after computing this many new points (used to simulate interruption).
    pub max_new_points: Option<usize>,
}

/// Runs every missing point of the window and returns the table sorted by index.
///
/// Points already present in `checkpoint` are reused; each newly solved point is
/// appended there as soon as it finishes. Failures are recorded in the point.
pub fn phase_sweep(
    cfg: &SweepConfig,
    checkpoint: Option<&Path>,
    control: SweepControl,
) -> Result<Vec<PhasePoint>> {
    cfg.validate()?;
    let mut done = match checkpoint {
        Some(p) => read_checkpoint(p)?,
        None => BTreeMap::new(),
    };
    done.retain(|&i, _| i < cfg.len());
    let mut todo: Vec<usize> = (0..cfg.len()).filter(|i| !done.contains_key(i)).collect();
    if let Some(limit) = control.max_new_points {
        todo.truncate(limit);
    }
    let writer = match checkpoint {
        Some(p) => {
            // a torn last line would merge with the next record, so start on a fresh line
            let needs_newline = std::fs::read(p)
                .map(|b| b.last().is_some_and(|&c| c != b'\n'))
                .unwrap_or(false);
            let mut f = OpenOptions::new().create(true).append(true).open(p)?;
            if needs_newline {
                f.write_all(b"\n")?;
            }
            Some(Mutex::new(f))
        }
        None => None,
    };
    let work = || -> Result<Vec<PhasePoint>> {
        todo.par_iter()
            .map(|&idx| {
                let start = Instant::now();
                let point = solve_point(cfg, idx / cfg.g_steps, idx % cfg.g_steps);
                if let Some(w) = &writer {
                    let rec = CheckpointRecord {
                        point: point.clone(),
                        wall_seconds: start.elapsed().as_secs_f64(),
                    };
                    let mut line = serde_json::to_string(&rec)?;
                    line.push('\n');
                    let mut f = w
                        .lock()
                        .map_err(|_| Error::Internal("checkpoint writer poisoned".into()))?;
                    f.write_all(line.as_bytes())?;
                    f.flush()?;
                }
                Ok(point)
            })
            .collect()
    };
    let fresh = if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?
            .install(work)?
    } else {
        work()?
    };
    for p in fresh {
        done.insert(p.index, p);
    }
    Ok(done.into_values().collect())
}

/// Final table as JSON lines, one point per line in index order.
pub fn table_jsonl(table: &[PhasePoint]) -> Result<String> {
    let mut out = String::new();
    for p in table {
        out.push_str(&serde_json::to_string(p)?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    pub key: String,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub l_steps: usize,
    pub g_steps: usize,
    /// Region id per point index.
    pub labels: Vec<usize>,
    pub regions: Vec<Region>,
    /// Cell edges separating different regions, as `[(L, G), (L, G)]` in parameter units.
    pub boundaries: Vec<[[f64; 2]; 2]>,
}

/// Connected components (axis neighbours in the parameter grid) of equal region keys.
pub fn classify_regions(table: &[PhasePoint], l_steps: usize, g_steps: usize) -> Result<RegionMap> {
    if table.len() != l_steps * g_steps || table.iter().enumerate().any(|(i, p)| p.index != i) {
        return Err(Error::Shape(format!(
            "expected a complete {l_steps}x{g_steps} table in index order"
        )));
    }
    let keys: Vec<String> = table.iter().map(PhasePoint::region_key).collect();
    let mut labels = vec![usize::MAX; table.len()];
    let mut regions = Vec::new();
    for start in 0..table.len() {
        if labels[start] != usize::MAX {
            continue;
        }
        let id = regions.len();
        let mut cells = Vec::new();
        let mut stack = vec![start];
        labels[start] = id;
        while let Some(c) = stack.pop() {
            cells.push(c);
            let (a, b) = (c / g_steps, c % g_steps);
            let mut nbrs = Vec::with_capacity(4);
            if a > 0 {
                nbrs.push(c - g_steps);
            }
            if a + 1 < l_steps {
                nbrs.push(c + g_steps);
            }
            if b > 0 {
                nbrs.push(c - 1);
            }
            if b + 1 < g_steps {
                nbrs.push(c + 1);
            }
            for q in nbrs {
                if labels[q] == usize::MAX && keys[q] == keys[start] {
                    labels[q] = id;
                    stack.push(q);
                }
            }
        }
        cells.sort_unstable();
        regions.push(Region {
            id,
            key: keys[start].clone(),
            cells,
        });
    }
    // boundaries sit halfway between neighbouring points with different labels
    let mut boundaries = Vec::new();
    let half = |a: &PhasePoint, b: &PhasePoint| [(a.l + b.l) / 2.0, (a.g + b.g) / 2.0];
    let dl = if l_steps > 1 {
        (table[g_steps].l - table[0].l) / 2.0
    } else {
        0.5
    };
    let dg = if g_steps > 1 {
        (table[1].g - table[0].g) / 2.0
    } else {
        0.5
    };
    for c in 0..table.len() {
        let (a, b) = (c / g_steps, c % g_steps);
        if a + 1 < l_steps && labels[c] != labels[c + g_steps] {
            let m = half(&table[c], &table[c + g_steps]);
            boundaries.push([[m[0], m[1] - dg], [m[0], m[1] + dg]]);
        }
        if b + 1 < g_steps && labels[c] != labels[c + 1] {
            let m = half(&table[c], &table[c + 1]);
            boundaries.push([[m[0] - dl, m[1]], [m[0] + dl, m[1]]]);
        }
    }
    Ok(RegionMap {
        l_steps,
        g_steps,
        labels,
        regions,
        boundaries,
    })
}

/// `i_l,i_g,L,G,kind,atoms,region` rows.
pub fn region_csv(table: &[PhasePoint], map: &RegionMap) -> String {
    let mut out = String::from("i_l,i_g,L,G,kind,atoms,region\n");
    for (p, r) in table.iter().zip(&map.labels) {
        let atoms = p.atoms.map(|a| a.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.i_l, p.i_g, p.l, p.g, p.kind, atoms, r
        );
    }
    out
}
