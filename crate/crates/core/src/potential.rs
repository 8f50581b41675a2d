//! Interaction potentials sampled on the periodic grid.
//!
//! Every family is evaluated in closed form at the grid points, made exactly
//! mirror symmetric by evaluating one representative per reflection class,
//! and shifted by its discrete (midpoint-rule) mean so the constant density
//! carries zero energy on the grid.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{wrap_unit, Grid};

/// Default regularization of the power-law family.
pub const DEFAULT_POWER_LAW_EPS: f64 = 0.01;
/// Default weight `c` of the attractive term `c x^-0.2` in the power-law family.
pub const DEFAULT_POWER_LAW_COEFFICIENT: f64 = 3.5;
/// Default half-width of the repulsive triangle in the multi-scale family.
pub const DEFAULT_TRIANGLE_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// Morse potential summed over periodic images, one-dimensional.
    #[serde(rename = "morse1d")]
    PeriodicMorse1D { sigma: f64, l: f64, g: f64 },
    /// Compactly supported piecewise-linear potential of range `lc`.
    Local { lc: f64 },
    /// `x^-0.4 - c x^-0.2` regularized by `eps` and mirrored.
    #[serde(rename = "powerlaw")]
    RegularizedPowerLaw {
        eps: f64,
        #[serde(default = "default_power_law_coefficient")]
        coefficient: f64,
    },
    /// Repulsive triangle plus `-cos(4πx)/2`.
    #[serde(rename = "multiscale")]
    MultiScale { width: f64 },
    /// Two-dimensional Morse-like potential built on `|sin πx| + |sin πy|`.
    #[serde(rename = "morse2d")]
    Morse2D { l: f64, g: f64 },
    /// Samples supplied from a file or vector.
    Tabulated { source: String },
}

impl PotentialSpec {
    pub fn morse1d(sigma: f64, l: f64, g: f64) -> Self {
        Self::PeriodicMorse1D { sigma, l, g }
    }

    pub fn local(lc: f64) -> Self {
        Self::Local { lc }
    }

    pub fn power_law() -> Self {
        Self::RegularizedPowerLaw {
            eps: DEFAULT_POWER_LAW_EPS,
            coefficient: DEFAULT_POWER_LAW_COEFFICIENT,
        }
    }

    pub fn multi_scale() -> Self {
        Self::MultiScale {
            width: DEFAULT_TRIANGLE_WIDTH,
        }
    }

    pub fn morse2d(l: f64, g: f64) -> Self {
        Self::Morse2D { l, g }
    }

    /// Spatial dimension the family lives in; `None` for tabulated data.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Morse2D { .. } => Some(2),
            Self::Tabulated { .. } => None,
            _ => Some(1),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PeriodicMorse1D { .. } => "morse1d",
            Self::Local { .. } => "local",
            Self::RegularizedPowerLaw { .. } => "powerlaw",
            Self::MultiScale { .. } => "multiscale",
            Self::Morse2D { .. } => "morse2d",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ParameterDomain(msg));
        match *self {
            Self::PeriodicMorse1D { sigma, l, g } => {
                if !(sigma > 0.0 && l > 0.0 && g > 0.0) {
                    return bad(format!(
                        "morse requires sigma, L, G > 0 (got {sigma}, {l}, {g})"
                    ));
                }
            }
            Self::Morse2D { l, g } => {
                if !(l > 0.0 && g > 0.0) {
                    return bad(format!("morse2d requires L, G > 0 (got {l}, {g})"));
                }
            }
            Self::Local { lc } => {
                if !(lc > 0.0 && lc <= 1.0) {
                    return bad(format!("local potential requires 0 < lc <= 1 (got {lc})"));
                }
            }
            Self::RegularizedPowerLaw { eps, coefficient } => {
                if !(eps > 0.0) {
                    return bad(format!("power law requires eps > 0 (got {eps})"));
                }
                if !coefficient.is_finite() {
                    return bad(format!(
                        "power law coefficient must be finite (got {coefficient})"
                    ));
                }
            }
            Self::MultiScale { width } => {
                if !(width > 0.0 && width <= 0.5) {
                    return bad(format!("triangle width must lie in (0, 1/2] (got {width})"));
                }
            }
            Self::Tabulated { .. } => {}
        }
        Ok(())
    }

    /// Closed-form value before mean subtraction; `None` for tabulated data.
    pub fn eval_raw(&self, x: [f64; 2]) -> Option<f64> {
        let x0 = wrap_unit(x[0]);
        Some(match *self {
            Self::PeriodicMorse1D { sigma, l, g } => {
                let a = -g * l / (1.0 - (-1.0 / (l * sigma)).exp());
                let b = 1.0 / (1.0 - (-1.0 / sigma).exp());
                a * ((-x0 / (l * sigma)).exp() + (-(1.0 - x0) / (l * sigma)).exp())
                    + b * ((-x0 / sigma).exp() + (-(1.0 - x0) / sigma).exp())
            }
            Self::Local { lc } => [-1.0, 0.0, 1.0]
                .iter()
                .map(|m| local_profile((x0 + m) / lc))
                .sum(),
            Self::RegularizedPowerLaw {
                eps,
                coefficient: c,
            } => power_law_core(x0 + eps, c) + power_law_core(1.0 - x0 + eps, c),
            Self::MultiScale { width } => {
                (1.0 - x0 / width).max(0.0) + (1.0 - (1.0 - x0) / width).max(0.0)
                    - 0.5 * (4.0 * PI * x0).cos()
            }
            Self::Morse2D { l, g } => {
                let s = (PI * x[0]).sin().abs() + (PI * x[1]).sin().abs();
                -g * l * (-s / l).exp() + (-s).exp()
            }
            Self::Tabulated { .. } => return None,
        })
    }

    /// Closed-form gradient. At kinks the left and right one-sided slopes are averaged.
    pub fn grad_raw(&self, x: [f64; 2]) -> Option<[f64; 2]> {
        let x0 = wrap_unit(x[0]);
        let d = match *self {
            Self::PeriodicMorse1D { sigma, l, g } => {
                if x0 == 0.0 {
                    0.0
                } else {
                    let ls = l * sigma;
                    let a = -g * l / (1.0 - (-1.0 / ls).exp());
                    let b = 1.0 / (1.0 - (-1.0 / sigma).exp());
                    a * (-(-x0 / ls).exp() + (-(1.0 - x0) / ls).exp()) / ls
                        + b * (-(-x0 / sigma).exp() + (-(1.0 - x0) / sigma).exp()) / sigma
                }
            }
            Self::Local { lc } => [-1.0, 0.0, 1.0]
                .iter()
                .map(|m| {
                    let r = (x0 + m) / lc;
                    local_slope(r) / lc
                })
                .sum(),
            Self::RegularizedPowerLaw {
                eps,
                coefficient: c,
            } => {
                if x0 == 0.0 {
                    0.0
                } else {
                    power_law_slope(x0 + eps, c) - power_law_slope(1.0 - x0 + eps, c)
                }
            }
            Self::MultiScale { width } => {
                let tri = |r: f64| -> f64 {
                    // slope of max(1 - r, 0) in r, averaged at the kinks
                    if r < 1.0 {
                        -1.0
                    } else if r == 1.0 {
                        -0.5
                    } else {
                        0.0
                    }
                };
                let t = if x0 == 0.0 {
                    0.0
                } else {
                    tri(x0 / width) / width - tri((1.0 - x0) / width) / width
                };
                t + 2.0 * PI * (4.0 * PI * x0).sin()
            }
            Self::Morse2D { l, g } => {
                let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
                let s = sx.abs() + sy.abs();
                let dw_ds = g * (-s / l).exp() - (-s).exp();
                let ds = |v: f64, sv: f64| PI * (PI * v).cos() * sign_or_zero(sv);
                return Some([dw_ds * ds(x[0], sx), dw_ds * ds(x[1], sy)]);
            }
            Self::Tabulated { .. } => return None,
        };
        Some([d, 0.0])
    }
}

fn sign_or_zero(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else {
        v.signum()
    }
}

/// Piecewise-linear local profile with breakpoints at 1/2, 3/5, 9/10 and 1.
pub fn local_profile(r: f64) -> f64 {
    let a = r.abs();
    if a <= 0.5 {
        0.1
    } else if a <= 0.6 {
        9.0 * a - 4.4
    } else if a <= 0.9 {
        1.0
    } else if a <= 1.0 {
        10.0 - 10.0 * a
    } else {
        0.0
    }
}

fn local_slope(r: f64) -> f64 {
    let a = r.abs();
    let s = r.signum();
    let piece = |a: f64| -> f64 {
        if a < 0.5 {
            0.0
        } else if a < 0.6 {
            9.0
        } else if a < 0.9 {
            0.0
        } else if a < 1.0 {
            -10.0
        } else {
            0.0
        }
    };
    let breaks = [0.5, 0.6, 0.9, 1.0];
    if a == 0.0 {
        return 0.0;
    }
    let slope = if breaks.iter().any(|&b| (a - b).abs() < 1e-13) {
        0.5 * (piece(a - 1e-9) + piece(a + 1e-9))
    } else {
        piece(a)
    };
    s * slope
}

fn default_power_law_coefficient() -> f64 {
    DEFAULT_POWER_LAW_COEFFICIENT
}

fn power_law_core(u: f64, c: f64) -> f64 {
    u.powf(-0.4) - c * u.powf(-0.2)
}

fn power_law_slope(u: f64, c: f64) -> f64 {
    -0.4 * u.powf(-1.4) + 0.2 * c * u.powf(-1.2)
}

/// Grid samples of an interaction potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPotential {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub mean_zero: bool,
    pub mirror_symmetric: bool,
    pub spec: PotentialSpec,
    /// Constant subtracted from the closed form during normalization.
    pub offset: f64,
}

impl SampledPotential {
    /// Wraps raw samples without symmetrizing or normalizing.
    pub fn from_values(grid: Grid, values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} samples for the grid, got {}",
                grid.len(),
                values.len()
            )));
        }
        let mut w = Self {
            grid,
            values,
            mean_zero: false,
            mirror_symmetric: false,
            spec: PotentialSpec::Tabulated {
                source: source.into(),
            },
            offset: 0.0,
        };
        w.mean_zero = mean_residual(&w).abs() <= 1e-12 * w.max_abs().max(f64::MIN_POSITIVE);
        w.mirror_symmetric = max_asymmetry(&w) == 0.0;
        Ok(w)
    }

    /// Tabulated samples, symmetrized and normalized unless told otherwise.
    pub fn tabulated(
        grid: Grid,
        values: Vec<f64>,
        source: impl Into<String>,
        opts: TableOptions,
    ) -> Result<Self> {
        let mut w = Self::from_values(grid, values, source)?;
        if opts.symmetrize {
            w = symmetrize(&w);
        }
        if opts.normalize {
            w = normalize_mean_zero(&w);
        }
        Ok(w)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Value at an arbitrary point: closed form when available, periodic
    /// cubic interpolation of the samples otherwise.
    pub fn value_at(&self, x: [f64; 2]) -> f64 {
        match self.spec.eval_raw(x) {
            Some(v) => v - self.offset,
            None => interpolate_cubic(self, x),
        }
    }

    /// Gradient at an arbitrary point (closed form or differentiated interpolant).
    pub fn gradient_at(&self, x: [f64; 2]) -> [f64; 2] {
        if let Some(g) = self.spec.grad_raw(x) {
            return g;
        }
        let step = 1e-3 * self.grid.h();
        let mut g = [0.0; 2];
        for (axis, gi) in g.iter_mut().enumerate().take(self.grid.dim()) {
            let mut p = x;
            let mut m = x;
            p[axis] += step;
            m[axis] -= step;
            *gi = (interpolate_cubic(self, p) - interpolate_cubic(self, m)) / (2.0 * step);
        }
        g
    }

    /// Scaled copy `factor * W`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.offset *= factor;
        if out.spec.eval_raw([0.0, 0.0]).is_some() && factor != 1.0 {
            // closed form no longer describes the samples
            out.spec = PotentialSpec::Tabulated {
                source: format!("{} x {factor}", self.spec.name()),
            };
            out.offset = 0.0;
        }
        out
    }
}

/// Flags for tabulated input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableOptions {
    pub symmetrize: bool,
    pub normalize: bool,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            symmetrize: true,
            normalize: true,
        }
    }
}

/// Samples a closed-form family on the grid.
pub fn build_potential(spec: &PotentialSpec, grid: Grid) -> Result<SampledPotential> {
    spec.validate()?;
    match spec.dim() {
        None => {
            return Err(Error::ParameterDomain(
                "tabulated potentials are loaded with `load_tabulated` or `SampledPotential::tabulated`".into(),
            ))
        }
        Some(d) if d != grid.dim() => {
            return Err(Error::Shape(format!(
                "{} is {d}-dimensional but the grid is {}-dimensional",
                spec.name(),
                grid.dim()
            )))
        }
        _ => {}
    }
    let mut values = vec![0.0; grid.len()];
    for orbit in grid.orbits() {
        let v = spec.eval_raw(grid.coords(orbit.rep)).expect("closed form");
        for &m in &orbit.members {
            values[m] = v;
        }
    }
    let raw = SampledPotential {
        grid,
        values,
        mean_zero: false,
        mirror_symmetric: true,
        spec: spec.clone(),
        offset: 0.0,
    };
    Ok(normalize_mean_zero(&raw))
}

/// Even part `(W(x) + W(-x)) / 2`.
pub fn symmetrize(w: &SampledPotential) -> SampledPotential {
    let g = w.grid;
    let mut out = w.clone();
    for orbit in g.orbits() {
        let avg = orbit.members.iter().map(|&j| w.values[j]).sum::<f64>() / orbit.weight() as f64;
        for &m in &orbit.members {
            out.values[m] = avg;
        }
    }
    out.mirror_symmetric = true;
    out
}

/// Subtracts the discrete mean `h^d Σ W_j`.
pub fn normalize_mean_zero(w: &SampledPotential) -> SampledPotential {
    let mean = w.values.iter().sum::<f64>() / w.values.len() as f64;
    let mut out = w.clone();
    out.values.iter_mut().for_each(|v| *v -= mean);
    out.offset += mean;
    out.mean_zero = true;
    out
}

fn mean_residual(w: &SampledPotential) -> f64 {
    w.grid.cell_volume() * w.values.iter().sum::<f64>()
}

fn max_asymmetry(w: &SampledPotential) -> f64 {
    (0..w.grid.len())
        .map(|j| (w.values[j] - w.values[w.grid.neg(j)]).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub mirror_symmetric: bool,
    pub max_asymmetry: f64,
    pub mean_zero: bool,
    pub mean_residual: f64,
    /// Largest jump between neighbouring samples along any axis.
    pub max_adjacent_jump: f64,
    /// `max_adjacent_jump / max|W|`.
    pub continuity_proxy: f64,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.mirror_symmetric && self.mean_zero
    }
}

pub fn check_potential_properties(w: &SampledPotential) -> PropertyReport {
    let g = w.grid;
    let scale = w.max_abs();
    let asym = max_asymmetry(w);
    let mean = mean_residual(w);
    let mut jump = 0.0_f64;
    for j in 0..g.len() {
        let [a, b] = g.unflatten(j);
        jump = jump.max((w.values[j] - w.values[g.flatten([a + 1, b])]).abs());
        if g.dim() == 2 {
            jump = jump.max((w.values[j] - w.values[g.flatten([a, b + 1])]).abs());
        }
    }
    PropertyReport {
        mirror_symmetric: asym <= 1e-14 * scale.max(f64::MIN_POSITIVE),
        max_asymmetry: asym,
        mean_zero: mean.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE),
        mean_residual: mean,
        max_adjacent_jump: jump,
        continuity_proxy: if scale > 0.0 { jump / scale } else { 0.0 },
    }
}

/// Parses the tabulated text format: a header `dim n` followed by `n^dim`
/// whitespace-separated reals in row-major order.
pub fn parse_tabulated(text: &str) -> Result<(Grid, Vec<f64>)> {
    let mut tokens = text.split_whitespace();
    let mut header = || -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad header: {e}")))
    };
    let dim = header()?;
    let n = header()?;
    let grid = Grid::new(dim, n)?;
    let values = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad sample {t:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != grid.len() {
        return Err(Error::Shape(format!(
            "header promises {} samples, found {}",
            grid.len(),
            values.len()
        )));
    }
    Ok((grid, values))
}

pub fn load_tabulated(path: &Path, opts: TableOptions) -> Result<SampledPotential> {
    let text = std::fs::read_to_string(path)?;
    let (grid, values) = parse_tabulated(&text)?;
    SampledPotential::tabulated(grid, values, path.display().to_string(), opts)
}

pub fn write_tabulated(w: &SampledPotential) -> String {
    let mut s = format!("{} {}\n", w.grid.dim(), w.grid.n());
    for row in w.values.chunks(w.grid.n()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

fn lagrange4(t: f64) -> [f64; 4] {
    // nodes at -1, 0, 1, 2
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

fn interpolate_cubic(w: &SampledPotential, x: [f64; 2]) -> f64 {
    let g = w.grid;
    let n = g.n() as f64;
    let split = |v: f64| {
        let u = wrap_unit(v) * n;
        let base = u.floor();
        (base as i64, u - base)
    };
    let (i0, t0) = split(x[0]);
    let wx = lagrange4(t0);
    let ni = g.n() as i64;
    let idx = |i: i64| i.rem_euclid(ni) as usize;
    if g.dim() == 1 {
        (0..4)
            .map(|a| wx[a] * w.values[idx(i0 - 1 + a as i64)])
            .sum()
    } else {
        let (i1, t1) = split(x[1]);
        let wy = lagrange4(t1);
        let mut s = 0.0;
        for (a, ca) in wx.iter().enumerate() {
            for (b, cb) in wy.iter().enumerate() {
                let j = g.flatten([idx(i0 - 1 + a as i64), idx(i1 - 1 + b as i64)]);
                s += ca * cb * w.values[j];
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: &[f64]) -> SampledPotential {
        SampledPotential::from_values(Grid::line(values.len()), values.to_vec(), "test").unwrap()
    }

    #[test]
    fn symmetrize_by_hand() {
        let w = symmetrize(&table(&[0.0, 1.0, 0.0, 3.0]));
        assert_eq!(w.values, vec![0.0, 2.0, 0.0, 2.0]);
        assert!(w.mirror_symmetric);
        let again = symmetrize(&w);
        assert_eq!(again.values, w.values);
    }

    #[test]
    fn normalize_by_hand() {
        let w = normalize_mean_zero(&table(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(w.values, vec![-1.5, -0.5, 0.5, 1.5]);
        let c = normalize_mean_zero(&table(&[2.5; 6]));
        assert!(c.values.iter().all(|&v| v == 0.0));
        let g = Grid::line(16);
        let cosine: Vec<f64> = (0..16).map(|j| (2.0 * PI * g.coords(j)[0]).cos()).collect();
        let w = normalize_mean_zero(&table(&cosine));
        for (a, b) in w.values.iter().zip(&cosine) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_table_is_mean_zero() {
        let w = SampledPotential::tabulated(
            Grid::line(8),
            vec![0.0; 8],
            "zero",
            TableOptions::default(),
        )
        .unwrap();
        assert!(w.mean_zero);
        assert!(w.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn morse_builds_and_passes_checks() {
        let w = build_potential(&PotentialSpec::morse1d(0.1, 1.2, 0.9), Grid::line(800)).unwrap();
        let r = check_potential_properties(&w);
        assert!(r.all_pass(), "{r:?}");
        // repulsive core: the origin is a cusp-shaped local maximum
        let w0 = w.values[0];
        assert!(w0 > w.values[1] && w0 > w.values[799]);
        assert!(w.values.iter().cloned().fold(f64::INFINITY, f64::min) < w0);
    }

    #[test]
    fn morse_refinement_agrees_at_shared_points() {
        let spec = PotentialSpec::morse1d(0.1, 1.2, 0.9);
        let coarse = build_potential(&spec, Grid::line(100)).unwrap();
        let fine = build_potential(&spec, Grid::line(200)).unwrap();
        for j in 0..100 {
            let a = coarse.values[j] + coarse.offset;
            let b = fine.values[2 * j] + fine.offset;
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{j}: {a} vs {b}");
        }
    }

    #[test]
    fn local_vanishes_beyond_range() {
        let w = build_potential(&PotentialSpec::local(0.1), Grid::line(360)).unwrap();
        let g = w.grid;
        for j in 0..g.len() {
            let x = g.coords(j)[0];
            if x > 0.1 + 1e-12 && x < 0.9 - 1e-12 {
                assert!((w.values[j] + w.offset).abs() < 1e-14);
            }
        }
        let r = check_potential_properties(&w);
        let bound = 10.0 * g.h() / 0.1;
        assert!(
            r.max_adjacent_jump <= bound + 1e-12,
            "{} > {bound}",
            r.max_adjacent_jump
        );
    }

    #[test]
    fn local_profile_breakpoints() {
        assert_eq!(local_profile(0.3), 0.1);
        assert!((local_profile(0.55) - 0.55).abs() < 1e-12);
        assert_eq!(local_profile(0.7), 1.0);
        assert!((local_profile(0.95) - 0.5).abs() < 1e-12);
        assert_eq!(local_profile(1.5), 0.0);
        assert_eq!(local_profile(-0.7), 1.0);
    }

    #[test]
    fn asymmetric_table_fails_mirror_check() {
        let w = table(&[0.0, 1.0, 0.0, 3.0]);
        let r = check_potential_properties(&w);
        assert!(!r.mirror_symmetric);
        assert_eq!(r.max_asymmetry, 2.0);
    }

    #[test]
    fn all_families_satisfy_invariants() {
        let specs = [
            (PotentialSpec::morse1d(0.1, 0.7, 1.4), Grid::line(64)),
            (PotentialSpec::local(0.25), Grid::line(60)),
            (PotentialSpec::power_law(), Grid::line(100)),
            (PotentialSpec::multi_scale(), Grid::line(128)),
            (PotentialSpec::morse2d(1.5, 0.9), Grid::square(12)),
        ];
        for (spec, grid) in specs {
            let w = build_potential(&spec, grid).unwrap();
            let r = check_potential_properties(&w);
            assert!(r.all_pass(), "{spec:?}: {r:?}");
            assert_eq!(r.max_asymmetry, 0.0);
        }
    }

    #[test]
    fn parameter_and_shape_errors() {
        assert!(matches!(
            build_potential(&PotentialSpec::morse1d(0.1, 1.0, 0.0), Grid::line(8)),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            build_potential(&PotentialSpec::local(1.5), Grid::line(8)),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            build_potential(&PotentialSpec::morse2d(1.0, 1.0), Grid::line(8)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn closed_form_gradient_matches_differences() {
        let specs = [
            PotentialSpec::morse1d(0.1, 1.2, 0.9),
            PotentialSpec::power_law(),
            PotentialSpec::multi_scale(),
            PotentialSpec::local(0.3),
        ];
        for spec in specs {
            for &x in &[0.037, 0.21, 0.48, 0.77] {
                let e = 1e-6;
                let fd = (spec.eval_raw([x + e, 0.0]).unwrap()
                    - spec.eval_raw([x - e, 0.0]).unwrap())
                    / (2.0 * e);
                let g = spec.grad_raw([x, 0.0]).unwrap()[0];
                assert!(
                    (fd - g).abs() < 1e-5 * fd.abs().max(1.0),
                    "{spec:?} at {x}: {fd} vs {g}"
                );
            }
        }
        let spec = PotentialSpec::morse2d(1.5, 0.9);
        let p = [0.13, 0.71];
        let e = 1e-6;
        let g = spec.grad_raw(p).unwrap();
        let fx = (spec.eval_raw([p[0] + e, p[1]]).unwrap()
            - spec.eval_raw([p[0] - e, p[1]]).unwrap())
            / (2.0 * e);
        let fy = (spec.eval_raw([p[0], p[1] + e]).unwrap()
            - spec.eval_raw([p[0], p[1] - e]).unwrap())
            / (2.0 * e);
        assert!((g[0] - fx).abs() < 1e-6 && (g[1] - fy).abs() < 1e-6);
    }

    #[test]
    fn tabulated_round_trip_and_interpolation() {
        let w = build_potential(&PotentialSpec::morse1d(0.1, 1.2, 0.9), Grid::line(64)).unwrap();
        let text = write_tabulated(&w);
        let (grid, values) = parse_tabulated(&text).unwrap();
        let t = SampledPotential::tabulated(grid, values, "mem", TableOptions::default()).unwrap();
        for (a, b) in t.values.iter().zip(&w.values) {
            assert!((a - b).abs() < 1e-12);
        }
        // interpolant reproduces the samples at the nodes
        for j in [0usize, 5, 33, 63] {
            let x = grid.coords(j);
            assert!((t.value_at(x) - t.values[j]).abs() < 1e-12);
        }
        assert!(parse_tabulated("1 4\n1 2 3").is_err());
        assert!(parse_tabulated("3 4\n1 2 3 4").is_err());
    }
}
