//! Solving the relaxation for a potential: assembly, interior-point solve,
//! validation of the dual split, and classification of the minimizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{periodic_diff, Grid};
use crate::lp::{
    assemble_relaxation, extract_dual_decomposition, solve_lp, IpmOptions, LpStatus, Residuals,
};
use crate::potential::SampledPotential;
use crate::spectral::{autocorrelation, mode_indices, Correlogram};

pub use crate::lp::DualDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierThresholds {
    /// `max |F - 1|` below which the solution is the constant.
    pub tau_const: f64,
    /// Minimum cell mass for a cell to count as support.
    pub tau_atom: f64,
    /// Mass allowed outside the atoms of an atomic measure.
    pub tau_mass: f64,
    /// Widest run of cells (per axis) that is still read as one smeared atom.
    pub max_atom_cells: usize,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        Self {
            tau_const: 1e-4,
            tau_atom: 1e-3,
            tau_mass: 1e-2,
            max_atom_cells: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSite {
    /// Mass-weighted centre in `[0,1)^d` (second entry 0 in 1D).
    pub position: [f64; 2],
    pub mass: f64,
    /// Flat indices of the cells carrying the atom.
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionKind {
    Constant,
    SingleDelta {
        atom: AtomSite,
    },
    /// Equispaced atoms; `spacing` holds one period per axis.
    DiracLattice {
        spacing: Vec<f64>,
        atoms: Vec<AtomSite>,
    },
    AtomicNonLattice {
        atoms: Vec<AtomSite>,
    },
    Continuous,
}

impl SolutionKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::SingleDelta { .. } => "single_delta",
            Self::DiracLattice { .. } => "dirac_lattice",
            Self::AtomicNonLattice { .. } => "atomic_non_lattice",
            Self::Continuous => "continuous",
        }
    }

    pub fn atoms(&self) -> Option<&[AtomSite]> {
        match self {
            Self::SingleDelta { atom } => Some(std::slice::from_ref(atom)),
            Self::DiracLattice { atoms, .. } | Self::AtomicNonLattice { atoms } => Some(atoms),
            _ => None,
        }
    }

    /// Whether `F_R` is self-correlating, hence usable directly as the minimizer.
    pub fn is_self_correlating(&self) -> bool {
        matches!(self, Self::SingleDelta { .. } | Self::DiracLattice { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: LpStatus,
    pub iterations: usize,
    pub residuals: Residuals,
    pub num_vars: usize,
    pub num_cosine_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSolution {
    pub f_r: Correlogram,
    /// Primal optimum `½⟨F_R, W⟩`.
    pub e_r: f64,
    pub decomp: DualDecomposition,
    pub kind: SolutionKind,
    pub stats: SolverStats,
    pub tol: f64,
    /// `W` vanishes to within `tol`, so every feasible `F` is optimal.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RelaxOptions {
    pub ipm: IpmOptions,
    pub thresholds: ClassifierThresholds,
}

pub fn solve_relaxation(w: &SampledPotential, opts: &RelaxOptions) -> Result<RelaxationSolution> {
    let lp = assemble_relaxation(w)?;
    // Solve two decades below the reporting tolerance: at the reporting level the
    // iterate still spreads O(1e-5) mass next to atoms.
    let inner = IpmOptions {
        tol: (opts.ipm.tol * 1e-2).max(1e-12),
        ..opts.ipm
    };
    let mut sol = solve_lp(&lp, &inner)?;
    if sol.status != LpStatus::Optimal {
        let r = sol.residuals;
        if r.primal.max(r.dual).max(r.gap) <= opts.ipm.tol {
            sol.status = LpStatus::Optimal;
        } else {
            let fallback = solve_lp(&lp, &opts.ipm)?;
            sol = fallback;
        }
    }
    let sol = sol.into_optimal()?;
    let decomp = extract_dual_decomposition(&lp, &sol, w, opts.ipm.tol)?;
    // interior iterates are strictly positive; clip roundoff anyway
    let masses: Vec<f64> = sol.primal.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = masses.iter().sum();
    let values = lp.expand(&masses.iter().map(|m| m / total).collect::<Vec<_>>());
    let mut f_r = Correlogram::new(w.grid, values)?;
    let mut e_r = sol.objective;
    let mut kind = classify_solution(&f_r, &opts.thresholds);
    if let Some((clean, energy)) = purify_atomic(&f_r, &kind, w, sol.objective, opts.ipm.tol) {
        f_r = clean;
        e_r = energy;
        kind = classify_solution(&f_r, &opts.thresholds);
    }
    Ok(RelaxationSolution {
        e_r,
        f_r,
        decomp,
        kind,
        stats: SolverStats {
            status: sol.status,
            iterations: sol.iterations,
            residuals: sol.residuals,
            num_vars: lp.num_vars(),
            num_cosine_rows: lp.num_cosine_rows(),
        },
        tol: opts.ipm.tol,
        degenerate: w.max_abs() <= opts.ipm.tol,
    })
}

/// Drops the interior-point tail around an atomic solution.
///
/// The iterate keeps `O(tol)`-priced mass on cells next to the atoms. The atoms
/// alone are accepted when they stay in the cone and their energy does not
/// exceed the primal optimum by more than the solver tolerance.
fn purify_atomic(
    f: &Correlogram,
    kind: &SolutionKind,
    w: &SampledPotential,
    objective: f64,
    tol: f64,
) -> Option<(Correlogram, f64)> {
    let atoms = kind.atoms()?;
    let grid = f.grid;
    let v = grid.cell_volume();
    let total: f64 = atoms.iter().map(|a| a.mass).sum();
    let mut values = vec![0.0; grid.len()];
    for a in atoms {
        for &j in &a.cells {
            values[j] = f.values[j] / total;
        }
    }
    let clean = Correlogram::new(grid, values).ok()?;
    let scale = w.max_abs().max(1.0);
    let min_cos = clean
        .cosine_coeffs
        .iter()
        .skip(1)
        .cloned()
        .fold(0.0_f64, f64::min);
    let energy = 0.5
        * v
        * clean
            .values
            .iter()
            .zip(&w.values)
            .map(|(a, b)| a * b)
            .sum::<f64>();
    (min_cos >= -tol && energy <= objective + 10.0 * tol * scale).then_some((clean, energy))
}

/// Periodic connected components (axis neighbours) of a cell set.
fn components(grid: Grid, member: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; grid.len()];
    let mut out = Vec::new();
    for start in 0..grid.len() {
        if !member[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut comp = Vec::new();
        while let Some(j) = stack.pop() {
            comp.push(j);
            let [a, b] = grid.unflatten(j);
            let n = grid.n();
            let mut nbrs = vec![grid.flatten([a + 1, b]), grid.flatten([a + n - 1, b])];
            if grid.dim() == 2 {
                nbrs.push(grid.flatten([a, b + 1]));
                nbrs.push(grid.flatten([a, b + n - 1]));
            }
            for q in nbrs {
                if member[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Number of distinct positions along `axis` spanned by a component (periodic).
fn extent(grid: Grid, comp: &[usize], axis: usize) -> usize {
    let mut coords: Vec<usize> = comp.iter().map(|&j| grid.unflatten(j)[axis]).collect();
    coords.sort_unstable();
    coords.dedup();
    coords.len()
}

/// Mass-weighted periodic centre of a set of cells.
fn centroid(grid: Grid, cells: &[usize], masses: &[f64]) -> [f64; 2] {
    let anchor = grid.coords(cells[0]);
    let total: f64 = cells.iter().map(|&j| masses[j]).sum();
    let mut c = [0.0; 2];
    for &j in cells {
        let x = grid.coords(j);
        for a in 0..2 {
            c[a] += masses[j] * periodic_diff(x[a], anchor[a]);
        }
    }
    let mut out = [0.0; 2];
    for a in 0..grid.dim() {
        out[a] = crate::grid::wrap_unit(anchor[a] + c[a] / total);
    }
    out
}

fn periodic_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = periodic_diff(a[0], b[0]);
    let dy = periodic_diff(a[1], b[1]);
    (dx * dx + dy * dy).sqrt()
}

pub fn classify_solution(f: &Correlogram, th: &ClassifierThresholds) -> SolutionKind {
    let grid = f.grid;
    if f.values.iter().all(|v| (v - 1.0).abs() <= th.tau_const) {
        return SolutionKind::Constant;
    }
    let masses = f.cell_masses();
    let total: f64 = masses.iter().sum();
    let support: Vec<bool> = masses.iter().map(|&m| m >= th.tau_atom).collect();
    let comps = components(grid, &support);
    let (atomic, spread): (Vec<_>, Vec<_>) = comps
        .into_iter()
        .partition(|c| (0..grid.dim()).all(|a| extent(grid, c, a) <= th.max_atom_cells));
    let atoms: Vec<AtomSite> = atomic
        .into_iter()
        .map(|cells| AtomSite {
            position: centroid(grid, &cells, &masses),
            mass: cells.iter().map(|&j| masses[j]).sum(),
            cells,
        })
        .collect();
    let atom_mass: f64 = atoms.iter().map(|a| a.mass).sum();

    if atoms.len() == 1 && atoms[0].mass >= total * (1.0 - th.tau_mass) {
        return SolutionKind::SingleDelta {
            atom: atoms.into_iter().next().expect("one atom"),
        };
    }
    if !atoms.is_empty() && spread.is_empty() && atom_mass >= total * (1.0 - th.tau_mass) {
        return match lattice_spacing(grid, &atoms) {
            Some(spacing) => SolutionKind::DiracLattice { spacing, atoms },
            None => SolutionKind::AtomicNonLattice { atoms },
        };
    }
    if atom_mass > th.tau_mass * total {
        return SolutionKind::AtomicNonLattice { atoms };
    }
    SolutionKind::Continuous
}

/// Per-axis periods when the atoms form a rectangular lattice containing the origin.
fn lattice_spacing(grid: Grid, atoms: &[AtomSite]) -> Option<Vec<f64>> {
    let tol = 1.01 * grid.h();
    let at_origin = atoms
        .iter()
        .any(|a| periodic_dist(a.position, [0.0, 0.0]) <= tol);
    if !at_origin {
        return None;
    }
    if grid.dim() == 1 {
        let mut xs: Vec<f64> = atoms.iter().map(|a| a.position[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let count = xs.len();
        let gaps: Vec<f64> = (0..count)
            .map(|i| {
                if i + 1 < count {
                    xs[i + 1] - xs[i]
                } else {
                    xs[0] + 1.0 - xs[i]
                }
            })
            .collect();
        let mut sorted = gaps.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let median = sorted[count / 2];
        if gaps.iter().all(|g| (g - median).abs() <= tol) {
            return Some(vec![1.0 / count as f64]);
        }
        return None;
    }
    // closure under translation by every atom (a finite subgroup of the torus)
    let closed = atoms.iter().all(|a| {
        atoms.iter().all(|b| {
            let t = [
                crate::grid::wrap_unit(a.position[0] + b.position[0]),
                crate::grid::wrap_unit(a.position[1] + b.position[1]),
            ];
            atoms
                .iter()
                .any(|c| periodic_dist(c.position, t) <= 2.0 * tol)
        })
    });
    if !closed {
        return None;
    }
    let axis_period = |axis: usize| -> f64 {
        atoms
            .iter()
            .filter(|a| a.position[1 - axis].min(1.0 - a.position[1 - axis]) <= tol)
            .map(|a| a.position[axis])
            .filter(|&x| x > tol && x < 1.0 - tol)
            .fold(1.0, f64::min)
    };
    let (p0, p1) = (axis_period(0), axis_period(1));
    let count0 = (1.0 / p0).round();
    let count1 = (1.0 / p1).round();
    if (count0 * count1) as usize == atoms.len() {
        Some(vec![1.0 / count0, 1.0 / count1])
    } else {
        None
    }
}

/// Grid size commensurate with the detected atom spacing.
pub fn regrid_for_lattice(kind: &SolutionKind, grid: Grid) -> Result<Grid> {
    let atoms = kind.atoms().ok_or(Error::NotAtomic)?;
    let per_axis = |axis: usize| -> usize {
        if let SolutionKind::DiracLattice { spacing, .. } = kind {
            return (1.0 / spacing[axis.min(spacing.len() - 1)])
                .round()
                .max(1.0) as usize;
        }
        let mut xs: Vec<f64> = atoms.iter().map(|a| a.position[axis]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        xs.dedup_by(|a, b| (*a - *b).abs() <= 1.01 * grid.h());
        if xs.len() < 2 {
            return 1;
        }
        let mut gaps: Vec<f64> = (0..xs.len())
            .map(|i| {
                if i + 1 < xs.len() {
                    xs[i + 1] - xs[i]
                } else {
                    xs[0] + 1.0 - xs[i]
                }
            })
            .collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        (1.0 / gaps[gaps.len() / 2]).round().max(1.0) as usize
    };
    let q = if grid.dim() == 1 {
        per_axis(0)
    } else {
        let (a, b) = (per_axis(0), per_axis(1));
        a / gcd(a, b) * b
    };
    if matches!(kind, SolutionKind::SingleDelta { .. }) || q <= 1 {
        return Ok(grid);
    }
    let multiple = ((grid.n() as f64 / q as f64).round() as usize).max(1);
    Grid::new(grid.dim(), multiple * q)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityReport {
    /// `h^d Σ_j W⁺_j F_j`.
    pub r1: f64,
    /// `Σ_k K̂(k) F̂(k)` over the full lattice (`= h^d Σ_j K_j F_j`).
    pub r2: f64,
    /// `max_j h^d W⁺_j F_j`.
    pub max_wplus_product: f64,
    /// `max_k K̂(k) F̂(k)`.
    pub max_mode_product: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn complementarity_report(
    f_r: &Correlogram,
    decomp: &DualDecomposition,
    tol: f64,
    scale: f64,
) -> ComplementarityReport {
    let v = f_r.grid.cell_volume();
    let wf: Vec<f64> = decomp
        .w_plus
        .iter()
        .zip(&f_r.values)
        .map(|(a, b)| v * a * b)
        .collect();
    let r1 = wf.iter().sum();
    let r2 = v * decomp
        .k
        .iter()
        .zip(&f_r.values)
        .map(|(a, b)| a * b)
        .sum::<f64>();
    let max_mode_product = decomp
        .k_hat
        .iter()
        .zip(&f_r.cosine_coeffs)
        .skip(1)
        .map(|(a, b)| a * b)
        .fold(0.0_f64, f64::max);
    let threshold = 10.0 * tol * scale.max(1.0);
    let max_wplus_product = wf.into_iter().fold(0.0_f64, f64::max);
    ComplementarityReport {
        pass: r1 <= threshold && r2 <= threshold,
        r1,
        r2,
        max_wplus_product,
        max_mode_product,
        threshold,
    }
}

/// `max_j |(F_R ∘ F_R)_j - F_R,j| h^d`, the self-correlation defect of an atomic solution.
pub fn lattice_self_consistency(f_r: &Correlogram) -> Result<f64> {
    let rho = f_r.as_density()?;
    let ff = autocorrelation(&rho);
    let v = f_r.grid.cell_volume();
    Ok(ff
        .values
        .iter()
        .zip(&f_r.values)
        .map(|(a, b)| v * (a - b).abs())
        .fold(0.0, f64::max))
}

/// Cosine-mode table `(k, K̂, F̂_R)` for reporting.
pub fn mode_table(sol: &RelaxationSolution) -> Vec<([i64; 2], f64, f64)> {
    let g = sol.f_r.grid;
    mode_indices(g)
        .into_iter()
        .zip(sol.decomp.k_hat.iter().zip(&sol.f_r.cosine_coeffs))
        .map(|(k, (a, b))| (g.signed(k), *a, *b))
        .collect()
}
