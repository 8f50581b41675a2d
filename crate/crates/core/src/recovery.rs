//! Recovery of a density from a target autocorrelation by the Schulz–Snyder
//! multiplicative iteration, which decreases the Kullback–Leibler divergence
//! `F(ρ) = h^d Σ F_R ln(F_R / F_ρ)` monotonically.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::{autocorrelation, correlate, Correlogram, Density};

/// Values below this are treated as zero in ratios and logarithms.
pub const RATIO_FLOOR: f64 = 1e-30;
/// Target values below this fraction of the target maximum are transform noise.
pub const TARGET_ZERO_REL: f64 = 1e-12;
/// Minimum mirror-symmetry residual of an initial density.
pub const MIN_ASYMMETRY: f64 = 1e-3;
const INIT_DRAWS: usize = 64;
/// Allowed KL increase per step before the run is declared broken.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Default relative level below which target values are treated as solver tail.
pub const DEFAULT_TARGET_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    /// Stop when the KL decrease of one step is below this...
    pub tol1: f64,
    /// ...and the L¹ step length is below this.
    pub tol2: f64,
    pub max_iters: usize,
    /// First seed; multi-start uses `seed, seed + 1, ...`.
    pub seed: u64,
    pub starts: usize,
    /// Target cells below `target_floor · max F_R` are zeroed before iterating.
    pub target_floor: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            tol1: 1e-10,
            tol2: 1e-8,
            max_iters: 100_000,
            seed: 0,
            starts: 3,
            target_floor: DEFAULT_TARGET_FLOOR,
        }
    }
}

/// `F_R` with values below `floor · max F_R` set to zero, renormalized.
///
/// Interior-point solutions are strictly positive, leaving a tail many decades
/// below the support. Iterating against it drives `F_ρ` into transform
/// roundoff where the ratio `F_R / F_ρ` is meaningless.
pub fn recovery_target(f_r: &Correlogram, floor: f64) -> Result<Correlogram> {
    let cut = floor * f_r.values.iter().cloned().fold(0.0, f64::max);
    let values: Vec<f64> = f_r
        .values
        .iter()
        .map(|&v| if v >= cut { v } else { 0.0 })
        .collect();
    let mass = f_r.grid.cell_volume() * values.iter().sum::<f64>();
    if !(mass > 0.0) {
        return Err(Error::ParameterDomain(
            "target has no mass above the floor".into(),
        ));
    }
    Correlogram::new(f_r.grid, values.into_iter().map(|v| v / mass).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub rho: Density,
    pub kl_final: f64,
    pub kl_trace: Vec<f64>,
    pub step_deltas: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

impl RecoveryResult {
    /// `iter,kl,l1_delta` rows; row 0 is the initial density.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,kl,l1_delta\n");
        for (i, kl) in self.kl_trace.iter().enumerate() {
            let d = if i == 0 { 0.0 } else { self.step_deltas[i - 1] };
            let _ = writeln!(out, "{i},{kl:.17e},{d:.17e}");
        }
        out
    }
}

/// Outcome of a multi-start recovery: the best run plus every run's final KL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStart {
    pub best: RecoveryResult,
    pub per_seed: Vec<(u64, f64)>,
}

pub fn kl_divergence(f_r: &Correlogram, f_rho: &Correlogram) -> f64 {
    let v = f_r.grid.cell_volume();
    let zero = zero_level(f_r);
    let mut total = 0.0;
    for (&a, &b) in f_r.values.iter().zip(&f_rho.values) {
        if a <= zero {
            continue;
        }
        if b < RATIO_FLOOR {
            return f64::INFINITY;
        }
        total += a * (a / b).ln();
    }
    v * total
}

/// Largest `|ρ_j - ρ_{σ(j)}|` over the mirror maps of the grid, minimized over maps.
///
/// The reflections checked are `j -> c - j` for every centre `c` (1D) and, in 2D,
/// the same per axis. A density close to any of them would stay near an
/// invariant set of the iteration.
fn min_symmetry_residual(grid: Grid, values: &[f64]) -> f64 {
    let n = grid.n();
    let mut best = f64::INFINITY;
    for axis in 0..grid.dim() {
        for c in 0..n {
            let mut worst = 0.0_f64;
            for j in 0..grid.len() {
                let mut idx = grid.unflatten(j);
                idx[axis] = (c + n - idx[axis]) % n;
                worst = worst.max((values[j] - values[grid.flatten(idx)]).abs());
            }
            best = best.min(worst);
        }
    }
    best
}

pub fn init_density(grid: Grid, seed: u64) -> Density {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Density)> = None;
    // Tiny grids (n = 2) admit no asymmetric density, so the redraws are capped.
    for _ in 0..INIT_DRAWS {
        let raw: Vec<f64> = (0..grid.len())
            .map(|_| 1.0 + rng.random_range(0.0..0.5))
            .collect();
        let rho = Density::normalized(grid, raw).expect("positive values");
        let r = if grid.len() < 2 {
            f64::INFINITY
        } else {
            min_symmetry_residual(grid, &rho.values)
        };
        if r >= MIN_ASYMMETRY {
            return rho;
        }
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, rho));
        }
    }
    best.expect("at least one draw").1
}

fn zero_level(f_r: &Correlogram) -> f64 {
    RATIO_FLOOR.max(TARGET_ZERO_REL * f_r.values.iter().cloned().fold(0.0, f64::max))
}

/// Ratio `F_R / F_ρ` with the zero conventions.
fn ratio(f_r: &Correlogram, f_rho: &Correlogram) -> Result<Vec<f64>> {
    let zero = zero_level(f_r);
    f_r.values
        .iter()
        .zip(&f_rho.values)
        .enumerate()
        .map(|(j, (&a, &b))| {
            if a <= zero {
                Ok(0.0)
            } else if b < RATIO_FLOOR {
                Err(Error::DivergentRatio { index: j })
            } else {
                Ok(a / b)
            }
        })
        .collect()
}

fn step_with(rho: &Density, f_r: &Correlogram, f_rho: &Correlogram) -> Result<Density> {
    let r = ratio(f_r, f_rho)?;
    let grid = rho.grid;
    // (h^d Σ_i ρ_{j+i} R_i) is the correlation of R against ρ at lag j
    let c = correlate(grid, &r, &rho.values);
    let mut values: Vec<f64> = rho
        .values
        .iter()
        .zip(&c)
        .map(|(p, q)| if *p > 0.0 { p * q.max(0.0) } else { 0.0 })
        .collect();
    // the map preserves mass exactly; renormalizing only removes transform roundoff
    let m = grid.cell_volume() * values.iter().sum::<f64>();
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Internal(format!("iterate lost its mass ({m})")));
    }
    values.iter_mut().for_each(|v| *v /= m);
    Ok(Density { grid, values })
}

pub fn schulz_snyder_step(rho: &Density, f_r: &Correlogram) -> Result<Density> {
    if rho.grid != f_r.grid {
        return Err(Error::Shape(
            "density and target live on different grids".into(),
        ));
    }
    step_with(rho, f_r, &autocorrelation(rho))
}

fn l1_distance(a: &Density, b: &Density) -> f64 {
    a.grid.cell_volume()
        * a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
}

/// Single run from one seed.
pub fn recover(f_r: &Correlogram, opts: &RecoveryOptions) -> Result<RecoveryResult> {
    recover_from(f_r, init_density(f_r.grid, opts.seed), opts)
}

/// Iterates from `start` against the floored target (see [`recovery_target`]).
pub fn recover_from(
    f_r: &Correlogram,
    start: Density,
    opts: &RecoveryOptions,
) -> Result<RecoveryResult> {
    if start.grid != f_r.grid {
        return Err(Error::Shape(
            "initial density and target live on different grids".into(),
        ));
    }
    let target = recovery_target(f_r, opts.target_floor)?;
    let f_r = &target;
    let mut rho = start;
    let mut f_rho = autocorrelation(&rho);
    let mut kl = kl_divergence(f_r, &f_rho);
    let mut kl_trace = vec![kl];
    let mut step_deltas = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        let next = step_with(&rho, f_r, &f_rho)?;
        let f_next = autocorrelation(&next);
        let kl_next = kl_divergence(f_r, &f_next);
        iterations += 1;
        let slack = MONOTONE_SLACK.max(1e-13 * kl.abs());
        if kl_next > kl + slack {
            return Err(Error::Internal(format!(
                "KL increased from {kl:.12e} to {kl_next:.12e} at iteration {iterations}"
            )));
        }
        let delta = l1_distance(&next, &rho);
        let decrease = kl - kl_next;
        kl_trace.push(kl_next);
        step_deltas.push(delta);
        rho = next;
        f_rho = f_next;
        kl = kl_next;
        if decrease < opts.tol1 && delta < opts.tol2 {
            converged = true;
            break;
        }
    }
    Ok(RecoveryResult {
        rho,
        kl_final: kl.max(0.0),
        kl_trace,
        step_deltas,
        iterations,
        converged,
        seed: opts.seed,
    })
}

/// Runs `opts.starts` seeds concurrently and keeps the lowest final KL.
pub fn recover_multistart(f_r: &Correlogram, opts: &RecoveryOptions) -> Result<MultiStart> {
    let runs: Vec<RecoveryResult> = (0..opts.starts.max(1) as u64)
        .into_par_iter()
        .map(|i| {
            recover(
                f_r,
                &RecoveryOptions {
                    seed: opts.seed + i,
                    ..*opts
                },
            )
        })
        .collect::<Result<_>>()?;
    let per_seed = runs.iter().map(|r| (r.seed, r.kl_final)).collect();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.kl_final.total_cmp(&b.kl_final).then(a.seed.cmp(&b.seed)))
        .expect("at least one start");
    Ok(MultiStart { best, per_seed })
}

/// `max_j |ρ_j · (h^d Σ_i ρ_{j+i} R_i) - ρ_j|`, zero at a fixed point of the map.
pub fn fixed_point_residual(rho: &Density, f_r: &Correlogram) -> Result<f64> {
    let f_rho = autocorrelation(rho);
    let r = ratio(f_r, &f_rho)?;
    let c = correlate(rho.grid, &r, &rho.values);
    Ok(rho
        .values
        .iter()
        .zip(&c)
        .map(|(p, q)| (p * q - p).abs())
        .fold(0.0, f64::max))
}

/// Pinsker bound `‖F_ρ - F_R‖₁ ≤ √(2 KL)` as `(l1, bound)`.
pub fn pinsker_check(f_r: &Correlogram, rho: &Density) -> (f64, f64) {
    let f_rho = autocorrelation(rho);
    let v = f_r.grid.cell_volume();
    let l1 = v * f_r
        .values
        .iter()
        .zip(&f_rho.values)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>();
    (l1, (2.0 * kl_divergence(f_r, &f_rho)).sqrt())
}
