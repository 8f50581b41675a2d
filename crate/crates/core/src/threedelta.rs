//! Relaxation restricted to three atoms `(1 - 2β) δ_0 + β (δ_s + δ_{-s})`.
//!
//! The cosine constraints give `β ≤ θ(s) = inf_k 1 / (2(1 - cos 2πks))`, so the
//! best energy at separation `s` is `E(s) = ½W(0) + θ(s) min(W(s) - W(0), 0)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::SampledPotential;

pub const DEFAULT_K_MAX: usize = 10_000;
pub const DEFAULT_P_MAX: u64 = 64;
/// Distance below which `s` is taken to equal a continued-fraction convergent.
pub const RATIONAL_TOL: f64 = 1e-12;

/// Best rational `q/p` with `p ≤ p_max` within `tol` of `s`, from continued fractions.
pub fn rational_approx(s: f64, p_max: u64, tol: f64) -> Option<(u64, u64)> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut x = s;
    for _ in 0..64 {
        let a = x.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let h = a.checked_mul(h1)?.checked_add(h0)?;
        let k = a.checked_mul(k1)?.checked_add(k0)?;
        if k > p_max {
            break;
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        if (s - h as f64 / k as f64).abs() <= tol {
            return Some((h, k));
        }
        let frac = x - a as f64;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}

fn theta_terms(s: f64, k_last: usize) -> f64 {
    (1..=k_last)
        .filter_map(|k| {
            let c = 1.0 - (2.0 * PI * k as f64 * s).cos();
            // ks integer: the constraint is vacuous
            (c > 1e-14).then(|| 1.0 / (2.0 * c))
        })
        .fold(f64::INFINITY, f64::min)
}

/// `θ(s)` for `0 < s ≤ ½`.
///
/// For `s = q/p` with `p ≤ k_max` the cosine sequence is `p`-periodic in `k`, so
/// the infimum is a minimum over `k ≤ p`, evaluated with exact rational phases.
/// Otherwise the infimum is estimated over `k ≤ k_max`.
pub fn theta(s: f64, k_max: usize) -> Result<f64> {
    if !(s > 0.0 && s <= 0.5) {
        return Err(Error::ParameterDomain(format!(
            "theta needs 0 < s <= 1/2 (got {s})"
        )));
    }
    if k_max == 0 {
        return Err(Error::ParameterDomain("theta needs k_max >= 1".into()));
    }
    if let Some((q, p)) = rational_approx(s, k_max as u64, RATIONAL_TOL) {
        let best = (1..=p)
            .filter_map(|k| {
                let r = (k * q) % p;
                (r != 0).then(|| 1.0 / (2.0 * (1.0 - (2.0 * PI * r as f64 / p as f64).cos())))
            })
            .fold(f64::INFINITY, f64::min);
        return Ok(best);
    }
    Ok(theta_terms(s, k_max))
}

/// Closed form for `θ(1/p)`, `p` odd: `1 / (2(1 + cos(π/p)))`.
pub fn theta_odd_closed_form(p: u64) -> f64 {
    1.0 / (2.0 * (1.0 + (PI / p as f64).cos()))
}

/// `E(s) = ½W(0)` when `W(s) ≥ W(0)`, else `½W(0) + θ(s)(W(s) - W(0))`.
pub fn restricted_energy(s: f64, w: &SampledPotential, k_max: usize) -> Result<f64> {
    let w0 = w.value_at([0.0, 0.0]);
    let ws = w.value_at([s, 0.0]);
    if ws >= w0 {
        return Ok(0.5 * w0);
    }
    Ok(0.5 * w0 + theta(s, k_max)? * (ws - w0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFit {
    pub q: u64,
    pub p: u64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeDeltaResult {
    pub s_star: f64,
    pub beta_star: f64,
    pub e_star: f64,
    pub rational_fit: Option<RationalFit>,
    /// `E(s)` is constant (`W(0)` is the minimum), so every `s` ties.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeDeltaOptions {
    pub k_max: usize,
    pub p_max: u64,
}

impl Default for ThreeDeltaOptions {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            p_max: DEFAULT_P_MAX,
        }
    }
}

/// One evaluated candidate separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeDeltaSample {
    pub s: f64,
    pub theta: f64,
    pub energy: f64,
}

/// Candidate separations: the supplied grid plus every reduced `q/p ≤ ½`, `p ≤ p_max`.
pub fn candidate_separations(s_grid: &[f64], p_max: u64) -> Vec<f64> {
    let mut out: Vec<f64> = s_grid
        .iter()
        .copied()
        .filter(|&s| s > 0.0 && s <= 0.5)
        .collect();
    for p in 2..=p_max {
        for q in 1..=p / 2 {
            if gcd(q, p) == 1 {
                out.push(q as f64 / p as f64);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= RATIONAL_TOL);
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn evaluate(
    w: &SampledPotential,
    s_values: &[f64],
    k_max: usize,
) -> Result<Vec<ThreeDeltaSample>> {
    s_values
        .iter()
        .map(|&s| {
            Ok(ThreeDeltaSample {
                s,
                theta: theta(s, k_max)?,
                energy: restricted_energy(s, w, k_max)?,
            })
        })
        .collect()
}

pub fn minimize_three_delta(
    w: &SampledPotential,
    s_grid: &[f64],
    opts: &ThreeDeltaOptions,
) -> Result<ThreeDeltaResult> {
    let samples = evaluate(w, &candidate_separations(s_grid, opts.p_max), opts.k_max)?;
    let best = samples
        .iter()
        .min_by(|a, b| a.energy.total_cmp(&b.energy).then(a.s.total_cmp(&b.s)))
        .ok_or_else(|| Error::ParameterDomain("no separations in (0, 1/2] to evaluate".into()))?;
    let w0 = w.value_at([0.0, 0.0]);
    let spread = samples
        .iter()
        .map(|p| (p.energy - 0.5 * w0).abs())
        .fold(0.0, f64::max);
    let degenerate = spread <= 1e-14 * w.max_abs().max(1.0);
    let beta_star = if w.value_at([best.s, 0.0]) < w0 {
        best.theta
    } else {
        0.0
    };
    let rational_fit =
        rational_approx(best.s, opts.p_max, RATIONAL_TOL).map(|(q, p)| RationalFit {
            q,
            p,
            error: (best.s - q as f64 / p as f64).abs(),
        });
    Ok(ThreeDeltaResult {
        s_star: best.s,
        beta_star,
        e_star: best.energy,
        rational_fit,
        degenerate,
    })
}

/// `s,theta,energy` rows.
pub fn samples_csv(samples: &[ThreeDeltaSample]) -> String {
    let mut out = String::from("s,theta,energy\n");
    for p in samples {
        let _ = writeln!(out, "{:.17e},{:.17e},{:.17e}", p.s, p.theta, p.energy);
    }
    out
}
