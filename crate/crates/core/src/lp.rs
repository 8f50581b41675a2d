//! The discretized relaxation as a linear program over the cone of
//! non-negative, cosine-positive, unit-mass grid measures, and a dense
//! primal-dual interior-point solver for it.
//!
//! Variables are the masses `g_r` carried by each reflection class `r` of the
//! grid (the measure is mirror symmetric by construction, so sine rows are
//! never needed). With `φ_k(x) = cos(2π k·x)` the program reads
//!
//! ```text
//!   minimize   ½ Σ_r W_r g_r
//!   subject to g ≥ 0,   Σ_r φ_k(x_r) g_r ≥ 0  (k reduced, k ≠ 0),   Σ_r g_r = 1.
//! ```
//!
//! The cosine inequalities get explicit slacks `s_k`, giving the standard form
//! `min cᵀx, Ax = b, x ≥ 0` with `x = (g, s)`. Stationarity
//! `½ W_r = z_r + Σ_k y_k φ_k(x_r) + μ` yields the decomposition
//! `W = W⁺ + K + 2E_D` with `W⁺ = 2z`, `K = 2 Σ_k y_k φ_k` and `E_D = μ`.

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Orbit};
use crate::potential::SampledPotential;
use crate::spectral::cosine_coefficients;

pub const DEFAULT_TOL: f64 = 1e-8;
/// Consecutive iterations with vanishing complementarity before the solve is declared stalled.
const STALL_WINDOW: usize = 5;
pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Assembled relaxation in reduced (mirror-symmetric) variables.
#[derive(Debug, Clone)]
pub struct ConicLp {
    pub grid: Grid,
    pub orbits: Vec<Orbit>,
    /// Flat wavenumbers of the cosine rows.
    pub wavenumbers: Vec<usize>,
    /// `½ W` at each class representative.
    pub objective: Vec<f64>,
    /// `φ_k(x_r)`, one row per wavenumber, one column per class.
    pub cosine_rows: DMatrix<f64>,
}

impl ConicLp {
    pub fn num_vars(&self) -> usize {
        self.orbits.len()
    }

    pub fn num_cosine_rows(&self) -> usize {
        self.wavenumbers.len()
    }

    /// Class masses of the uniform density (`w_r h^d`).
    pub fn uniform_masses(&self) -> Vec<f64> {
        let v = self.grid.cell_volume();
        self.orbits.iter().map(|o| o.weight() as f64 * v).collect()
    }

    /// Cosine row `i` applied to class masses.
    pub fn row_dot(&self, i: usize, g: &[f64]) -> f64 {
        self.cosine_rows
            .row(i)
            .iter()
            .zip(g)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Expands class masses to grid values (density per unit volume).
    pub fn expand(&self, g: &[f64]) -> Vec<f64> {
        let v = self.grid.cell_volume();
        let mut out = vec![0.0; self.grid.len()];
        for (o, &m) in self.orbits.iter().zip(g) {
            let per_cell = m / (o.weight() as f64 * v);
            for &j in &o.members {
                out[j] = per_cell;
            }
        }
        out
    }

    /// Collapses mirror-symmetric grid values to class masses.
    pub fn collapse(&self, values: &[f64]) -> Vec<f64> {
        let v = self.grid.cell_volume();
        self.orbits
            .iter()
            .map(|o| o.members.iter().map(|&j| values[j]).sum::<f64>() * v)
            .collect()
    }

    pub fn objective_value(&self, g: &[f64]) -> f64 {
        self.objective.iter().zip(g).map(|(a, b)| a * b).sum()
    }

    /// Standard-form dump: dimensions, objective, constraint triplets, right-hand side and bounds.
    pub fn dump(&self) -> String {
        let m = self.num_vars();
        let p = self.num_cosine_rows();
        let mut s = String::new();
        let _ = writeln!(s, "# standard form: minimize c'x subject to Ax = b, x >= 0; x = (class masses, cosine slacks)");
        let _ = writeln!(s, "rows {}", p + 1);
        let _ = writeln!(s, "cols {}", m + p);
        let _ = writeln!(s, "objective");
        for (j, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                let _ = writeln!(s, "{j} {c:.17e}");
            }
        }
        let _ = writeln!(s, "entries");
        for i in 0..p {
            for j in 0..m {
                let v = self.cosine_rows[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(s, "{i} {j} {v:.17e}");
                }
            }
            let _ = writeln!(s, "{i} {} -1", m + i);
        }
        for j in 0..m {
            let _ = writeln!(s, "{p} {j} 1");
        }
        let _ = writeln!(s, "rhs");
        let _ = writeln!(s, "{p} 1");
        let _ = writeln!(s, "bounds");
        let _ = writeln!(s, "all 0 inf");
        s
    }
}

pub fn assemble_relaxation(w: &SampledPotential) -> Result<ConicLp> {
    let grid = w.grid;
    if !w.mean_zero || !w.mirror_symmetric {
        return Err(Error::ParameterDomain(
            "relaxation needs a mean-zero, mirror-symmetric potential".into(),
        ));
    }
    let orbits = grid.orbits();
    let wavenumbers = grid.reduced_wavenumbers();
    let objective = orbits.iter().map(|o| 0.5 * w.values[o.rep]).collect();
    let cosine_rows = DMatrix::from_fn(wavenumbers.len(), orbits.len(), |i, r| {
        grid.phase(wavenumbers[i], orbits[r].rep).cos()
    });
    Ok(ConicLp {
        grid,
        orbits,
        wavenumbers,
        objective,
        cosine_rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
    /// Residuals stopped improving before reaching the tolerance; the best iterate is returned.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    /// Class masses.
    pub primal: Vec<f64>,
    /// Cosine slacks `Σ_r φ_k(x_r) g_r`.
    pub slack: Vec<f64>,
    pub objective: f64,
    /// Dual objective (equals the mass multiplier).
    pub dual_objective: f64,
    pub dual_nonneg: Vec<f64>,
    pub dual_cosine: Vec<f64>,
    pub dual_mass: f64,
    pub status: LpStatus,
    pub iterations: usize,
    pub residuals: Residuals,
}

impl LpSolution {
    pub fn into_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::MaxIterations => Err(Error::MaxIterations {
                iterations: self.iterations,
            }),
            LpStatus::NumericalFailure | LpStatus::Stalled => {
                Err(Error::NumericalFailure(format!(
                    "{:?} after {} iterations (residuals {:?})",
                    self.status, self.iterations, self.residuals
                )))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpmOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Operator `A` of the standard form and its normal matrix.
struct Operator<'a> {
    c: &'a DMatrix<f64>,
    m: usize,
    p: usize,
}

impl Operator<'_> {
    /// `A v` for `v = (v_g, v_s)`.
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let vg = DVector::from_column_slice(&v[..self.m]);
        let cg = self.c * vg;
        let mut out = Vec::with_capacity(self.p + 1);
        for i in 0..self.p {
            out.push(cg[i] - v[self.m + i]);
        }
        out.push(v[..self.m].iter().sum());
        out
    }

    /// `Aᵀ y`.
    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        let yc = DVector::from_column_slice(&y[..self.p]);
        let ym = y[self.p];
        let ctg = self.c.tr_mul(&yc);
        let mut out = Vec::with_capacity(self.m + self.p);
        out.extend(ctg.iter().map(|v| v + ym));
        out.extend(y[..self.p].iter().map(|v| -v));
        out
    }

    /// `A diag(d) Aᵀ`.
    fn normal_matrix(&self, d: &[f64]) -> DMatrix<f64> {
        let (m, p) = (self.m, self.p);
        let mut b = self.c.clone();
        for (col, &dj) in d[..m].iter().enumerate() {
            let s = dj.sqrt();
            b.column_mut(col).iter_mut().for_each(|v| *v *= s);
        }
        let bbt = &b * b.transpose();
        let cd = self.c * DVector::from_column_slice(&d[..m]);
        let mut out = DMatrix::zeros(p + 1, p + 1);
        out.view_mut((0, 0), (p, p)).copy_from(&bbt);
        for i in 0..p {
            out[(i, i)] += d[m + i];
            out[(i, p)] = cd[i];
            out[(p, i)] = cd[i];
        }
        out[(p, p)] = d[..m].iter().sum();
        out
    }
}

fn factor(mut mat: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let scale = (0..mat.nrows())
        .map(|i| mat[(i, i)].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut reg = 1e-14 * scale;
    for _ in 0..8 {
        for i in 0..mat.nrows() {
            mat[(i, i)] += reg;
        }
        if let Some(ch) = mat.clone().cholesky() {
            return Some(ch);
        }
        reg *= 100.0;
    }
    None
}

/// Max-abs norm that propagates NaN (`f64::max` would drop it).
fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| {
        if x.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(x.abs())
        }
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_step(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

/// Merit, iteration, residuals and the `(x, y, z)` iterate.
type Snapshot = (f64, usize, Residuals, Vec<f64>, Vec<f64>, Vec<f64>);

/// Primal-dual path-following solve with Mehrotra's predictor-corrector.
pub fn solve_lp(lp: &ConicLp, opts: &IpmOptions) -> Result<LpSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let m = lp.num_vars();
    let p = lp.num_cosine_rows();
    let nvar = m + p;
    let op = Operator {
        c: &lp.cosine_rows,
        m,
        p,
    };
    let mut cost = lp.objective.clone();
    cost.extend(std::iter::repeat_n(0.0, p));
    let mut b = vec![0.0; p + 1];
    b[p] = 1.0;
    let b_norm = 1.0;
    let c_norm = inf_norm(&cost);

    // Mehrotra's starting point
    let (mut x, mut y, mut z) = {
        let ch = factor(op.normal_matrix(&vec![1.0; nvar]))
            .ok_or_else(|| Error::NumericalFailure("singular constraint matrix at start".into()))?;
        let v = ch.solve(&DVector::from_column_slice(&b));
        let x0 = op.apply_t(v.as_slice());
        let ac = op.apply(&cost);
        let y0 = ch.solve(&DVector::from_column_slice(&ac));
        let aty = op.apply_t(y0.as_slice());
        let z0: Vec<f64> = cost.iter().zip(&aty).map(|(c, a)| c - a).collect();
        let dx = (-1.5 * x0.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
        let dz = (-1.5 * z0.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
        let mut x: Vec<f64> = x0.iter().map(|v| v + dx).collect();
        let mut z: Vec<f64> = z0.iter().map(|v| v + dz).collect();
        let xz = dot(&x, &z);
        let sx: f64 = x.iter().sum();
        let sz: f64 = z.iter().sum();
        let ex = if sz > 0.0 { 0.5 * xz / sz } else { 0.0 };
        let ez = if sx > 0.0 { 0.5 * xz / sx } else { 0.0 };
        x.iter_mut().for_each(|v| *v = (*v + ex).max(1e-4));
        z.iter_mut().for_each(|v| *v = (*v + ez).max(1e-4));
        (x, y0.as_slice().to_vec(), z)
    };

    let mut status = LpStatus::MaxIterations;
    let mut iterations = 0;
    let mut residuals = Residuals {
        primal: f64::INFINITY,
        dual: f64::INFINITY,
        gap: f64::INFINITY,
    };
    let mut stalled = 0;
    // best iterate seen so far, by the largest relative residual
    let mut best: Option<Snapshot> = None;
    let mut collapsed = 0;

    for iter in 0..=opts.max_iterations {
        iterations = iter;
        let ax = op.apply(&x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, a)| bi - a).collect();
        let aty = op.apply_t(&y);
        let rd: Vec<f64> = (0..nvar).map(|j| cost[j] - aty[j] - z[j]).collect();
        let xz = dot(&x, &z);
        let pobj = dot(&cost, &x);
        let dobj = dot(&b, &y);
        residuals = Residuals {
            primal: inf_norm(&rp) / (1.0 + b_norm),
            dual: inf_norm(&rd) / (1.0 + c_norm),
            gap: xz.max((pobj - dobj).abs()) / (1.0 + pobj.abs()),
        };
        let merit = residuals.primal.max(residuals.dual).max(residuals.gap);
        if !merit.is_finite() {
            status = LpStatus::NumericalFailure;
            break;
        }
        if residuals.primal <= opts.tol && residuals.dual <= opts.tol && residuals.gap <= opts.tol {
            status = LpStatus::Optimal;
            best = None;
            break;
        }
        // complementarity has collapsed but feasibility is stuck above tol
        if xz / (nvar as f64) < 1e-6 * opts.tol {
            collapsed += 1;
            if collapsed >= STALL_WINDOW {
                status = LpStatus::Stalled;
                break;
            }
        } else {
            collapsed = 0;
        }
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, iter, residuals, x.clone(), y.clone(), z.clone()));
        }
        if iter == opts.max_iterations {
            break;
        }
        let mu = xz / nvar as f64;
        let d: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a / b).collect();
        let Some(ch) = factor(op.normal_matrix(&d)) else {
            status = LpStatus::NumericalFailure;
            break;
        };

        // solves the Newton system for a complementarity right-hand side rc
        let newton = |rc: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
            let t: Vec<f64> = (0..nvar).map(|j| (rc[j] - x[j] * rd[j]) / z[j]).collect();
            let at = op.apply(&t);
            let rhs: Vec<f64> = rp.iter().zip(&at).map(|(a, b)| a - b).collect();
            let dy = ch.solve(&DVector::from_column_slice(&rhs));
            let atdy = op.apply_t(dy.as_slice());
            let dz: Vec<f64> = (0..nvar).map(|j| rd[j] - atdy[j]).collect();
            let dx: Vec<f64> = (0..nvar).map(|j| (rc[j] - x[j] * dz[j]) / z[j]).collect();
            (dx, dy.as_slice().to_vec(), dz)
        };

        let rc_aff: Vec<f64> = x.iter().zip(&z).map(|(a, b)| -a * b).collect();
        let (dx_a, _, dz_a) = newton(&rc_aff);
        let ap = max_step(&x, &dx_a).min(1.0);
        let ad = max_step(&z, &dz_a).min(1.0);
        let mu_aff = (0..nvar)
            .map(|j| (x[j] + ap * dx_a[j]) * (z[j] + ad * dz_a[j]))
            .sum::<f64>()
            / nvar as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        let rc: Vec<f64> = (0..nvar)
            .map(|j| sigma * mu - x[j] * z[j] - dx_a[j] * dz_a[j])
            .collect();
        let (dx, dy, dz) = newton(&rc);
        let eta = (1.0 - mu).clamp(0.9, 0.999_5);
        let ap = (eta * max_step(&x, &dx)).min(1.0);
        let ad = (eta * max_step(&z, &dz)).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            stalled += 1;
            if stalled > 3 {
                status = LpStatus::NumericalFailure;
                break;
            }
        } else {
            stalled = 0;
        }
        for j in 0..nvar {
            x[j] += ap * dx[j];
            z[j] += ad * dz[j];
        }
        for i in 0..=p {
            y[i] += ad * dy[i];
        }
    }

    if let Some((_, at, r, bx, by, bz)) = best {
        if status != LpStatus::Optimal {
            (iterations, residuals, x, y, z) = (at, r, bx, by, bz);
        }
    }
    let primal = x[..m].to_vec();
    Ok(LpSolution {
        objective: lp.objective_value(&primal),
        primal,
        slack: x[m..].to_vec(),
        dual_objective: y[p],
        dual_nonneg: z[..m].to_vec(),
        dual_cosine: y[..p].to_vec(),
        dual_mass: y[p],
        status,
        iterations,
        residuals,
    })
}

/// Optimal split `W = W⁺ + K + 2E_D` recovered from the multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualDecomposition {
    pub grid: Grid,
    pub w_plus: Vec<f64>,
    pub k: Vec<f64>,
    /// Cosine coefficients of `K` indexed like `spectral::mode_indices`.
    pub k_hat: Vec<f64>,
    pub e_d: f64,
    /// `max_j |W_j - W⁺_j - K_j - 2E_D|`.
    pub residual: f64,
}

pub fn extract_dual_decomposition(
    lp: &ConicLp,
    sol: &LpSolution,
    w: &SampledPotential,
    tol: f64,
) -> Result<DualDecomposition> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::NumericalFailure(
            "dual decomposition requires an optimal solve".into(),
        ));
    }
    let grid = lp.grid;
    let mut w_plus = vec![0.0; grid.len()];
    for (o, &zr) in lp.orbits.iter().zip(&sol.dual_nonneg) {
        for &j in &o.members {
            w_plus[j] = 2.0 * zr;
        }
    }
    let k: Vec<f64> = (0..grid.len())
        .map(|j| {
            2.0 * lp
                .wavenumbers
                .iter()
                .zip(&sol.dual_cosine)
                .map(|(&kk, &yk)| yk * grid.phase(kk, j).cos())
                .sum::<f64>()
        })
        .collect();
    let e_d = sol.dual_mass;
    let residual = (0..grid.len())
        .map(|j| (w.values[j] - w_plus[j] - k[j] - 2.0 * e_d).abs())
        .fold(0.0, f64::max);
    let scale = w.max_abs().max(f64::MIN_POSITIVE);
    if residual > 10.0 * tol * scale.max(1.0) {
        return Err(Error::CertificateInconsistent { residual });
    }
    let k_hat = cosine_coefficients(grid, &k)?;
    Ok(DualDecomposition {
        grid,
        w_plus,
        k,
        k_hat,
        e_d,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{SampledPotential, TableOptions};
    use std::f64::consts::PI;

    fn cosine_potential(n: usize, sign: f64) -> SampledPotential {
        let g = Grid::line(n);
        let v = (0..n)
            .map(|j| sign * (2.0 * PI * g.coords(j)[0]).cos())
            .collect();
        SampledPotential::tabulated(g, v, "cos", TableOptions::default()).unwrap()
    }

    #[test]
    fn assembly_counts_and_row_identities() {
        let w = cosine_potential(4, 1.0);
        let lp = assemble_relaxation(&w).unwrap();
        assert_eq!(lp.num_vars(), 3);
        assert_eq!(lp.num_cosine_rows(), 2);
        let uniform = lp.uniform_masses();
        assert!((uniform.iter().sum::<f64>() - 1.0).abs() == 0.0);
        for n in [6usize, 9, 16] {
            let lp = assemble_relaxation(&cosine_potential(n, 1.0)).unwrap();
            let u = lp.uniform_masses();
            for i in 0..lp.num_cosine_rows() {
                assert!(lp.row_dot(i, &u).abs() <= 1e-10 * n as f64);
            }
        }
    }

    #[test]
    fn zero_potential_has_zero_objective() {
        let g = Grid::line(8);
        let w =
            SampledPotential::tabulated(g, vec![0.0; 8], "zero", TableOptions::default()).unwrap();
        let lp = assemble_relaxation(&w).unwrap();
        assert!(lp.objective.iter().all(|c| *c == 0.0));
        let sol = solve_lp(&lp, &IpmOptions::default())
            .unwrap()
            .into_optimal()
            .unwrap();
        assert!(sol.objective.abs() < 1e-8);
    }

    #[test]
    fn negative_cosine_gives_delta() {
        let w = cosine_potential(8, -1.0);
        let lp = assemble_relaxation(&w).unwrap();
        assert!(lp.objective[0] < 0.0);
        let sol = solve_lp(&lp, &IpmOptions::default())
            .unwrap()
            .into_optimal()
            .unwrap();
        assert!((sol.objective + 0.5).abs() < 1e-7, "{}", sol.objective);
        assert!(sol.primal[0] > 1.0 - 1e-6);
        let d = extract_dual_decomposition(&lp, &sol, &w, 1e-8).unwrap();
        // W(0) is the minimum: W⁺ = W - W(0), K = 0
        for j in 0..8 {
            assert!((d.w_plus[j] - (w.values[j] - w.values[0])).abs() < 1e-6);
            assert!(d.k[j].abs() < 1e-6);
        }
        assert!((d.e_d - 0.5 * w.values[0]).abs() < 1e-7);
    }

    #[test]
    fn positive_cosine_gives_constant() {
        let w = cosine_potential(8, 1.0);
        let lp = assemble_relaxation(&w).unwrap();
        let sol = solve_lp(&lp, &IpmOptions::default())
            .unwrap()
            .into_optimal()
            .unwrap();
        assert!(sol.objective.abs() < 1e-7);
        // only the k = 1 mode is pinned; higher modes are free on the optimal face
        assert!(sol.slack[0].abs() < 1e-6);
        let d = extract_dual_decomposition(&lp, &sol, &w, 1e-8).unwrap();
        for j in 0..8 {
            assert!(d.w_plus[j].abs() < 1e-6);
            assert!((d.k[j] - w.values[j]).abs() < 1e-6);
        }
        assert!(d.e_d.abs() < 1e-7);
    }

    #[test]
    fn scaling_doubles_objective_and_duals() {
        let g = Grid::line(10);
        let v: Vec<f64> = (0..10)
            .map(|j| ((j * 7) % 5) as f64 - (j as f64 * 0.3).sin())
            .collect();
        let w = SampledPotential::tabulated(g, v, "r", TableOptions::default()).unwrap();
        let w2 = w.scaled(2.0);
        let s1 = solve_lp(&assemble_relaxation(&w).unwrap(), &IpmOptions::default())
            .unwrap()
            .into_optimal()
            .unwrap();
        let s2 = solve_lp(&assemble_relaxation(&w2).unwrap(), &IpmOptions::default())
            .unwrap()
            .into_optimal()
            .unwrap();
        assert!((s2.objective - 2.0 * s1.objective).abs() < 1e-7);
        assert!((s2.dual_mass - 2.0 * s1.dual_mass).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_tolerance_and_unnormalized_input() {
        let w = cosine_potential(8, 1.0);
        let lp = assemble_relaxation(&w).unwrap();
        assert!(solve_lp(
            &lp,
            &IpmOptions {
                tol: 0.0,
                ..Default::default()
            }
        )
        .is_err());
        let raw =
            SampledPotential::from_values(Grid::line(4), vec![1.0, 2.0, 3.0, 2.0], "raw").unwrap();
        assert!(assemble_relaxation(&raw).is_err());
    }

    #[test]
    fn iteration_cap_reports_status() {
        let w = cosine_potential(16, -1.0);
        let lp = assemble_relaxation(&w).unwrap();
        let sol = solve_lp(
            &lp,
            &IpmOptions {
                tol: 1e-8,
                max_iterations: 1,
            },
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::MaxIterations);
        assert!(matches!(
            sol.into_optimal(),
            Err(Error::MaxIterations { .. })
        ));
    }

    #[test]
    fn dump_lists_dimensions() {
        let lp = assemble_relaxation(&cosine_potential(6, 1.0)).unwrap();
        let text = lp.dump();
        assert!(text.contains("rows 4"));
        assert!(text.contains("cols 7"));
        assert!(text.contains("3 0 1"));
    }
}
