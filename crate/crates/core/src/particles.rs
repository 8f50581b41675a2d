//! N-particle gradient flow `dx_j/dt = -∇_{x_j} E_N` with
//! `E_N = (1/2N²) Σ_i Σ_j W(x_i - x_j)` on the periodic box, used to
//! cross-check recovered densities against particle steady states.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{periodic_diff, wrap_unit, Grid};
use crate::potential::SampledPotential;
use crate::spectral::{discrete_energy_of_atoms, Density};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    /// Positions in `[0,1)^d`; the second entry is unused in 1D.
    pub positions: Vec<[f64; 2]>,
    pub time: f64,
    pub dim: usize,
}

impl ParticleState {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Uniform random positions.
    pub fn random(dim: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = (0..count)
            .map(|_| {
                let x = rng.random_range(0.0..1.0);
                let y = if dim == 2 {
                    rng.random_range(0.0..1.0)
                } else {
                    0.0
                };
                [x, y]
            })
            .collect();
        Self {
            positions,
            time: 0.0,
            dim,
        }
    }

    pub fn energy(&self, w: &SampledPotential) -> f64 {
        discrete_energy_of_atoms(&self.positions, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleOptions {
    pub count: usize,
    pub seed: u64,
    pub dt: f64,
    pub t_end: f64,
    /// Record a snapshot every this many accepted steps (0 keeps only the ends).
    pub snapshot_every: usize,
    /// Stop once the largest force norm drops below this.
    pub force_tol: f64,
    /// Halve the step whenever `E_N` rises by more than `1e-8 |E_N|`.
    pub energy_guard: bool,
    /// Nodes of the 1D lookup table for `W` and `W'` (0 evaluates the potential directly).
    pub table_points: usize,
}

impl Default for ParticleOptions {
    fn default() -> Self {
        Self {
            count: 400,
            seed: 0,
            dt: 1e-2,
            t_end: 1e3,
            snapshot_every: 0,
            force_tol: 0.0,
            energy_guard: true,
            table_points: DEFAULT_TABLE_POINTS,
        }
    }
}

pub const DEFAULT_TABLE_POINTS: usize = 1 << 16;

/// Pair interaction used by the integrator.
enum Kernel<'a> {
    Direct(&'a SampledPotential),
    /// `W` and `W'` on `m` equispaced nodes of the circle, linearly interpolated.
    Table {
        value: Vec<f64>,
        slope: Vec<f64>,
        m: usize,
    },
}

impl<'a> Kernel<'a> {
    fn new(w: &'a SampledPotential, points: usize) -> Self {
        if points == 0 || w.grid.dim() != 1 {
            return Kernel::Direct(w);
        }
        let x = |i: usize| i as f64 / points as f64;
        let value = (0..=points).map(|i| w.value_at([x(i), 0.0])).collect();
        let mut slope: Vec<f64> = (0..=points)
            .map(|i| w.gradient_at([x(i), 0.0])[0])
            .collect();
        // the origin is a kink for cusped potentials; keep the averaged slope only there
        slope[points] = slope[0];
        Kernel::Table {
            value,
            slope,
            m: points,
        }
    }

    fn lookup(table: &[f64], m: usize, d: f64) -> f64 {
        let u = crate::grid::wrap_unit(d) * m as f64;
        let i = (u as usize).min(m - 1);
        let t = u - i as f64;
        table[i] * (1.0 - t) + table[i + 1] * t
    }

    fn grad(&self, d: [f64; 2]) -> [f64; 2] {
        match self {
            Kernel::Direct(w) => w.gradient_at(d),
            Kernel::Table { slope, m, .. } => [Self::lookup(slope, *m, d[0]), 0.0],
        }
    }

    fn value(&self, d: [f64; 2]) -> f64 {
        match self {
            Kernel::Direct(w) => w.value_at(d),
            Kernel::Table { value, m, .. } => Self::lookup(value, *m, d[0]),
        }
    }

    fn energy(&self, positions: &[[f64; 2]]) -> f64 {
        match self {
            Kernel::Direct(w) => discrete_energy_of_atoms(positions, w),
            Kernel::Table { .. } => {
                let n = positions.len();
                if n == 0 {
                    return 0.0;
                }
                let mut off = 0.0;
                for j in 0..n {
                    for i in (j + 1)..n {
                        off += self.value([positions[j][0] - positions[i][0], 0.0]);
                    }
                }
                (2.0 * off + n as f64 * self.value([0.0, 0.0])) / (2.0 * (n * n) as f64)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleTrace {
    pub snapshots: Vec<ParticleState>,
    pub steps: usize,
    pub final_max_force: f64,
    pub final_dt: f64,
    pub final_energy: f64,
}

impl ParticleTrace {
    pub fn last(&self) -> &ParticleState {
        self.snapshots.last().expect("trace keeps the final state")
    }

    /// One row per snapshot: `time, x_1, ..., x_N` (2D rows interleave `x_i, y_i`).
    pub fn snapshots_csv(&self) -> String {
        let mut out = String::new();
        let Some(first) = self.snapshots.first() else {
            return out;
        };
        out.push_str("time");
        for i in 0..first.len() {
            if first.dim == 2 {
                let _ = write!(out, ",x{i},y{i}");
            } else {
                let _ = write!(out, ",x{i}");
            }
        }
        out.push('\n');
        for s in &self.snapshots {
            let _ = write!(out, "{:.10e}", s.time);
            for p in &s.positions {
                if s.dim == 2 {
                    let _ = write!(out, ",{:.15e},{:.15e}", p[0], p[1]);
                } else {
                    let _ = write!(out, ",{:.15e}", p[0]);
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Forces `-∇_{x_j} E_N = -(1/N²) Σ_{i≠j} ∇W(x_j - x_i)`.
pub fn gradient(state: &ParticleState, w: &SampledPotential) -> Vec<[f64; 2]> {
    forces(&state.positions, &Kernel::Direct(w))
}

fn forces(positions: &[[f64; 2]], w: &Kernel) -> Vec<[f64; 2]> {
    let n = positions.len();
    let mut f = vec![[0.0; 2]; n];
    if n < 2 {
        return f;
    }
    let scale = 1.0 / (n * n) as f64;
    for j in 0..n {
        for i in (j + 1)..n {
            let d = [
                periodic_diff(positions[j][0], positions[i][0]),
                periodic_diff(positions[j][1], positions[i][1]),
            ];
            // ∇W is odd, so the pair contributes equal and opposite forces
            let g = w.grad(d);
            for a in 0..2 {
                f[j][a] -= scale * g[a];
                f[i][a] += scale * g[a];
            }
        }
    }
    f
}

fn max_norm(f: &[[f64; 2]]) -> f64 {
    f.iter()
        .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
        .fold(0.0, f64::max)
}

/// One RK4 step; `k1` are the forces at `x`.
fn rk4_step(x: &[[f64; 2]], k1: &[[f64; 2]], dt: f64, w: &Kernel) -> Vec<[f64; 2]> {
    let shift = |base: &[[f64; 2]], k: &[[f64; 2]], h: f64| -> Vec<[f64; 2]> {
        base.iter()
            .zip(k)
            .map(|(p, v)| [p[0] + h * v[0], p[1] + h * v[1]])
            .collect()
    };
    let k2 = forces(&shift(x, k1, 0.5 * dt), w);
    let k3 = forces(&shift(x, &k2, 0.5 * dt), w);
    let k4 = forces(&shift(x, &k3, dt), w);
    x.iter()
        .enumerate()
        .map(|(j, p)| {
            let mut q = [0.0; 2];
            for a in 0..2 {
                q[a] = p[a] + dt / 6.0 * (k1[j][a] + 2.0 * k2[j][a] + 2.0 * k3[j][a] + k4[j][a]);
            }
            q
        })
        .collect()
}

fn wrap(mut x: Vec<[f64; 2]>, dim: usize) -> Vec<[f64; 2]> {
    for p in &mut x {
        p[0] = wrap_unit(p[0]);
        p[1] = if dim == 2 { wrap_unit(p[1]) } else { 0.0 };
    }
    x
}

/// Integrates from `start` with RK4 at step `opts.dt`.
///
/// When the energy guard trips the step is halved and the step retried; after a
/// run of accepted steps it is doubled again, never beyond `opts.dt`.
pub fn simulate_from(
    start: ParticleState,
    w: &SampledPotential,
    opts: &ParticleOptions,
) -> Result<ParticleTrace> {
    if !(opts.dt > 0.0) || !(opts.t_end >= 0.0) {
        return Err(Error::ParameterDomain(format!(
            "need dt > 0 and t_end >= 0 (dt = {}, t_end = {})",
            opts.dt, opts.t_end
        )));
    }
    if start.dim != w.grid.dim() {
        return Err(Error::Shape(
            "particle dimension differs from the potential's".into(),
        ));
    }
    let dim = start.dim;
    let kernel = Kernel::new(w, opts.table_points);
    let w = &kernel;
    let mut x = wrap(start.positions, dim);
    let mut t = start.time;
    let mut dt = opts.dt;
    let mut streak = 0;
    let mut energy = w.energy(&x);
    let mut snapshots = vec![ParticleState {
        positions: x.clone(),
        time: t,
        dim,
    }];
    let mut steps = 0;
    let mut f = forces(&x, w);
    let mut max_force = max_norm(&f);
    while t < opts.t_end - 1e-12 * opts.t_end.max(1.0) && max_force > opts.force_tol {
        let h = dt.min(opts.t_end - t);
        let next = wrap(rk4_step(&x, &f, h, w), dim);
        if opts.energy_guard {
            let e_next = w.energy(&next);
            if e_next > energy + 1e-8 * energy.abs().max(f64::MIN_POSITIVE) {
                dt *= 0.5;
                streak = 0;
                if dt < 1e-12 * opts.dt {
                    return Err(Error::NumericalFailure(
                        "particle step size collapsed under the energy guard".into(),
                    ));
                }
                continue;
            }
            energy = e_next;
            streak += 1;
            if streak >= 16 && dt < opts.dt {
                dt = (2.0 * dt).min(opts.dt);
                streak = 0;
            }
        }
        x = next;
        t += h;
        steps += 1;
        f = forces(&x, w);
        max_force = max_norm(&f);
        if opts.snapshot_every > 0 && steps % opts.snapshot_every == 0 {
            snapshots.push(ParticleState {
                positions: x.clone(),
                time: t,
                dim,
            });
        }
    }
    if snapshots.last().map(|s| s.time) != Some(t) || snapshots.len() == 1 {
        snapshots.push(ParticleState {
            positions: x.clone(),
            time: t,
            dim,
        });
    }
    Ok(ParticleTrace {
        snapshots,
        steps,
        final_max_force: max_force,
        final_dt: dt,
        final_energy: w.energy(&x),
    })
}

/// Uniform random start with `opts.count` particles drawn from `opts.seed`.
pub fn simulate(w: &SampledPotential, opts: &ParticleOptions) -> Result<ParticleTrace> {
    simulate_from(
        ParticleState::random(w.grid.dim(), opts.count, opts.seed),
        w,
        opts,
    )
}

/// Binned positions normalized to unit mass.
pub fn histogram(state: &ParticleState, bins: usize) -> Result<Density> {
    if bins == 0 {
        return Err(Error::ParameterDomain(
            "histogram needs at least one bin".into(),
        ));
    }
    if state.is_empty() {
        return Err(Error::ParameterDomain("histogram of an empty state".into()));
    }
    let grid = Grid::new(state.dim, bins)?;
    let mut counts = vec![0.0; grid.len()];
    let bin = |x: f64| ((wrap_unit(x) * bins as f64) as usize).min(bins - 1);
    for p in &state.positions {
        counts[grid.flatten([bin(p[0]), bin(p[1])])] += 1.0;
    }
    Density::normalized(grid, counts)
}

/// `center,density` rows (`cx,cy,density` in 2D).
pub fn histogram_csv(rho: &Density) -> String {
    let g = rho.grid;
    let mut out = String::from(if g.dim() == 2 {
        "cx,cy,density\n"
    } else {
        "center,density\n"
    });
    for (j, v) in rho.values.iter().enumerate() {
        let c = g.coords(j);
        let half = 0.5 * g.h();
        if g.dim() == 2 {
            let _ = writeln!(out, "{},{},{v}", c[0] + half, c[1] + half);
        } else {
            let _ = writeln!(out, "{},{v}", c[0] + half);
        }
    }
    out
}

/// A run of particles on the circle with no internal gap larger than the cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub count: usize,
    /// Start of the cluster, unwrapped so that `start + width` may exceed 1.
    pub start: f64,
    pub width: f64,
}

/// Splits 1D positions into clusters at gaps wider than `gap`, largest first.
pub fn clusters_1d(state: &ParticleState, gap: f64) -> Vec<Cluster> {
    let mut xs: Vec<f64> = state.positions.iter().map(|p| wrap_unit(p[0])).collect();
    if xs.is_empty() {
        return Vec::new();
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let gaps: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 < n {
                xs[i + 1] - xs[i]
            } else {
                xs[0] + 1.0 - xs[i]
            }
        })
        .collect();
    let cuts: Vec<usize> = (0..n).filter(|&i| gaps[i] > gap).collect();
    if cuts.is_empty() {
        return vec![Cluster {
            count: n,
            start: 0.0,
            width: 1.0,
        }];
    }
    let mut out = Vec::new();
    for (c, &cut) in cuts.iter().enumerate() {
        // a cluster runs from the particle after one cut to the particle at the next cut
        let first = (cut + 1) % n;
        let last = cuts[(c + 1) % cuts.len()];
        let count = (last + n - first) % n + 1;
        let width = (0..count - 1).map(|k| gaps[(first + k) % n]).sum();
        out.push(Cluster {
            count,
            start: xs[first],
            width,
        });
    }
    out.sort_by(|a, b| b.count.cmp(&a.count).then(a.start.total_cmp(&b.start)));
    out
}

/// Width (max minus min, across the seam) of the most populated cluster.
pub fn cluster_width(state: &ParticleState, gap: f64) -> Option<f64> {
    clusters_1d(state, gap).first().map(|c| c.width)
}
