//! Transforms, autocorrelations and energy quadrature on the periodic grid.
//!
//! All integrals use the midpoint rule with weight `h^d`. Correlations and
//! convolutions go through the FFT, so they cost `O(n^d log n)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{periodic_diff, Grid};
use crate::potential::SampledPotential;

type PlanCache = RwLock<HashMap<PlanKey, Arc<dyn Fft<f64>>>>;

type PlanKey = (usize, bool);

fn plan_cache() -> &'static RwLock<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    if let Some(p) = plan_cache()
        .read()
        .expect("fft cache poisoned")
        .get(&(n, inverse))
    {
        return Arc::clone(p);
    }
    let mut planner = FftPlanner::new();
    let p = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    plan_cache()
        .write()
        .expect("fft cache poisoned")
        .insert((n, inverse), Arc::clone(&p));
    p
}

fn transform_in_place(grid: Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let fft = plan(n, inverse);
    // rows (last axis is contiguous)
    fft.process(data);
    if grid.dim() == 2 {
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                column[r] = data[r * n + c];
            }
            fft.process(&mut column);
            for r in 0..n {
                data[r * n + c] = column[r];
            }
        }
    }
}

/// Unnormalized forward DFT `Σ_j f_j e^{-2πi k·j/n}`.
pub fn dft(grid: Grid, f: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_in_place(grid, &mut data, false);
    data
}

/// Inverse DFT including the `1/n^d` factor; returns the real part.
pub fn idft_real(grid: Grid, mut spectrum: Vec<Complex64>) -> Vec<f64> {
    transform_in_place(grid, &mut spectrum, true);
    let scale = 1.0 / grid.len() as f64;
    spectrum.into_iter().map(|c| c.re * scale).collect()
}

fn check_len(grid: Grid, f: &[f64]) -> Result<()> {
    if f.len() != grid.len() {
        return Err(Error::Shape(format!(
            "grid has {} samples, vector has {}",
            grid.len(),
            f.len()
        )));
    }
    Ok(())
}

/// Flat wavenumbers reported by [`cosine_coefficients`]: zero first, then the
/// reduced non-zero set.
pub fn mode_indices(grid: Grid) -> Vec<usize> {
    std::iter::once(0)
        .chain(grid.reduced_wavenumbers())
        .collect()
}

/// `h^d Σ_j f_j cos(2π k·x_j)` for every `k` in [`mode_indices`].
pub fn cosine_coefficients(grid: Grid, f: &[f64]) -> Result<Vec<f64>> {
    check_len(grid, f)?;
    let spec = dft(grid, f);
    let w = grid.cell_volume();
    Ok(mode_indices(grid)
        .into_iter()
        .map(|k| w * spec[k].re)
        .collect())
}

/// `h^d Σ_j f_j sin(2π k·x_j)` for every `k` in [`mode_indices`].
pub fn sine_coefficients(grid: Grid, f: &[f64]) -> Result<Vec<f64>> {
    check_len(grid, f)?;
    let spec = dft(grid, f);
    let w = grid.cell_volume();
    Ok(mode_indices(grid)
        .into_iter()
        .map(|k| -w * spec[k].im)
        .collect())
}

/// Periodic cross-correlation `c_j = h^d Σ_i a_i b_{i+j}`.
pub fn correlate(grid: Grid, a: &[f64], b: &[f64]) -> Vec<f64> {
    let fa = dft(grid, a);
    let fb = dft(grid, b);
    let prod = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    let w = grid.cell_volume();
    idft_real(grid, prod).into_iter().map(|v| v * w).collect()
}

/// Periodic convolution `c_j = h^d Σ_i a_{j-i} b_i`.
pub fn convolve(grid: Grid, a: &[f64], b: &[f64]) -> Vec<f64> {
    let fa = dft(grid, a);
    let fb = dft(grid, b);
    let prod = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let w = grid.cell_volume();
    idft_real(grid, prod).into_iter().map(|v| v * w).collect()
}

/// Probability density sampled on the grid (values per unit volume).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// Atomic measure: `(flat index, mass)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atoms {
    pub grid: Grid,
    pub atoms: Vec<(usize, f64)>,
}

impl Atoms {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Grid embedding: each atom becomes one cell of height `mass / h^d`.
    pub fn to_grid_values(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.grid.len()];
        let w = self.grid.cell_volume();
        for &(j, m) in &self.atoms {
            v[j] += m / w;
        }
        v
    }

    pub fn to_density(&self) -> Result<Density> {
        Density::new(self.grid, self.to_grid_values())
    }
}

impl Density {
    /// Validates non-negativity and unit mass (within `1e-10`).
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(grid, &values)?;
        if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::ParameterDomain(format!(
                "density negative at cell {j}: {v}"
            )));
        }
        let d = Self { grid, values };
        let m = d.mass();
        if (m - 1.0).abs() > 1e-10 {
            return Err(Error::ParameterDomain(format!(
                "density has mass {m}, expected 1"
            )));
        }
        Ok(d)
    }

    /// Scales non-negative values to unit mass.
    pub fn normalized(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        check_len(grid, &values)?;
        let m: f64 = grid.cell_volume() * values.iter().sum::<f64>();
        if !(m > 0.0) {
            return Err(Error::ParameterDomain(
                "cannot normalize a vector with non-positive mass".into(),
            ));
        }
        values.iter_mut().for_each(|v| *v /= m);
        Self::new(grid, values)
    }

    pub fn uniform(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![1.0; grid.len()],
        }
    }

    /// Unit atom at flat index `j`, embedded as a tall cell.
    pub fn atom(grid: Grid, j: usize) -> Self {
        let mut values = vec![0.0; grid.len()];
        values[j] = 1.0 / grid.cell_volume();
        Self { grid, values }
    }

    pub fn mass(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    /// Cells with `ρ_j ≥ tau · max ρ`.
    pub fn support(&self, tau: f64) -> Vec<bool> {
        let cut = tau * self.values.iter().cloned().fold(0.0, f64::max);
        self.values.iter().map(|&v| v > 0.0 && v >= cut).collect()
    }

    /// Lebesgue measure of [`Density::support`].
    pub fn support_measure(&self, tau: f64) -> f64 {
        self.grid.cell_volume() * self.support(tau).iter().filter(|&&b| b).count() as f64
    }

    /// Number of periodic connected components of the support (axis neighbours).
    pub fn support_components(&self, tau: f64) -> usize {
        let inside = self.support(tau);
        let g = self.grid;
        let n = g.n();
        let mut seen = vec![false; g.len()];
        let mut count = 0;
        for start in 0..g.len() {
            if !inside[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(j) = stack.pop() {
                let [a, b] = g.unflatten(j);
                let mut nbrs = vec![g.flatten([a + 1, b]), g.flatten([a + n - 1, b])];
                if g.dim() == 2 {
                    nbrs.extend([g.flatten([a, b + 1]), g.flatten([a, b + n - 1])]);
                }
                for q in nbrs {
                    if inside[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        count
    }

    /// Cell masses `h^d ρ_j`.
    pub fn cell_masses(&self) -> Vec<f64> {
        let w = self.grid.cell_volume();
        self.values.iter().map(|v| v * w).collect()
    }

    /// Cells whose mass is at least `min_mass`, as atoms.
    pub fn to_atoms(&self, min_mass: f64) -> Atoms {
        let atoms = self
            .cell_masses()
            .into_iter()
            .enumerate()
            .filter(|(_, m)| *m >= min_mass)
            .collect();
        Atoms {
            grid: self.grid,
            atoms,
        }
    }
}

/// Autocorrelation-like measure on the grid, with cached cosine modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlogram {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Indexed like [`mode_indices`].
    pub cosine_coeffs: Vec<f64>,
}

/// Residuals of the membership conditions of the relaxed cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub min_value: f64,
    pub max_asymmetry: f64,
    pub min_cosine: f64,
    pub mass: f64,
    pub max_sine: f64,
}

impl ConeReport {
    pub fn passes(&self, scale: f64) -> bool {
        self.min_value >= -1e-10 * scale
            && self.max_asymmetry <= 1e-10 * scale
            && self.min_cosine >= -1e-8
            && (self.mass - 1.0).abs() <= 1e-8
    }
}

impl Correlogram {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let cosine_coeffs = cosine_coefficients(grid, &values)?;
        Ok(Self {
            grid,
            values,
            cosine_coeffs,
        })
    }

    pub fn mass(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn cell_masses(&self) -> Vec<f64> {
        let w = self.grid.cell_volume();
        self.values.iter().map(|v| v * w).collect()
    }

    pub fn from_atoms(atoms: &Atoms) -> Result<Self> {
        Self::new(atoms.grid, atoms.to_grid_values())
    }

    /// Reads the correlogram as a density (used for self-correlating lattices).
    pub fn as_density(&self) -> Result<Density> {
        let clipped = self.values.iter().map(|v| v.max(0.0)).collect();
        Density::normalized(self.grid, clipped)
    }

    pub fn cone_report(&self) -> ConeReport {
        let g = self.grid;
        let min_value = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_asymmetry = (0..g.len())
            .map(|j| (self.values[j] - self.values[g.neg(j)]).abs())
            .fold(0.0, f64::max);
        let min_cosine = self
            .cosine_coeffs
            .iter()
            .skip(1)
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let max_sine = sine_coefficients(g, &self.values)
            .expect("length checked at construction")
            .into_iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        ConeReport {
            min_value,
            max_asymmetry,
            min_cosine: min_cosine.min(f64::MAX),
            mass: self.mass(),
            max_sine,
        }
    }
}

/// `F(s_i) = h^d Σ_j ρ_j ρ_{j+i}`.
pub fn autocorrelation(rho: &Density) -> Correlogram {
    let g = rho.grid;
    let spectrum = dft(g, &rho.values);
    let w = g.cell_volume();
    // |ρ̂|² is real and even, so the cosine modes are read off directly
    let power: Vec<Complex64> = spectrum
        .iter()
        .map(|c| Complex64::new(c.norm_sqr(), 0.0))
        .collect();
    let cosine_coeffs = mode_indices(g)
        .into_iter()
        .map(|k| w * w * power[k].re)
        .collect();
    let values = idft_real(g, power).into_iter().map(|v| v * w).collect();
    Correlogram {
        grid: g,
        values,
        cosine_coeffs,
    }
}

/// `½ h^d Σ_i F_ρ(s_i) W(s_i)`.
pub fn pairwise_energy(rho: &Density, w: &SampledPotential) -> Result<f64> {
    if rho.grid != w.grid {
        return Err(Error::Shape(
            "density and potential live on different grids".into(),
        ));
    }
    Ok(correlogram_energy(&autocorrelation(rho), w))
}

/// `½ ⟨F, W⟩` for any grid measure.
pub fn correlogram_energy(f: &Correlogram, w: &SampledPotential) -> f64 {
    0.5 * f.grid.cell_volume()
        * f.values
            .iter()
            .zip(&w.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
}

/// `(1 / 2N²) Σ_i Σ_j W(x_i - x_j)` with periodic differences.
pub fn discrete_energy_of_atoms(positions: &[[f64; 2]], w: &SampledPotential) -> f64 {
    let n = positions.len();
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for a in positions {
        for b in positions {
            let d = [periodic_diff(a[0], b[0]), periodic_diff(a[1], b[1])];
            total += w.value_at(d);
        }
    }
    total / (2.0 * (n * n) as f64)
}
