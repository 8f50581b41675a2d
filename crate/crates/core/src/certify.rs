//! Optimality certificates for a candidate density: the guarantee factor α
//! against the relaxation bound, first-order residuals, the convex-support
//! sufficient condition, and the closed-form exact cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::SampledPotential;
use crate::recovery::{
    kl_divergence, recover_multistart, recovery_target, MultiStart, RecoveryOptions,
    DEFAULT_TARGET_FLOOR,
};
use crate::relaxation::{
    complementarity_report, solve_relaxation, ComplementarityReport, RelaxOptions,
    RelaxationSolution, SolutionKind,
};
use crate::spectral::{
    autocorrelation, convolve, cosine_coefficients, pairwise_energy, Correlogram, Density,
};

/// Overshoot of α above 1 that is still read as roundoff.
pub const ALPHA_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportThresholds {
    /// Relative level `ρ_j > τ max ρ` defining the support of densities and correlograms.
    pub tau_supp: f64,
    /// Mass of `F_ρ` allowed outside the support of `F_R`.
    pub tau_leak: f64,
}

impl Default for SupportThresholds {
    fn default() -> Self {
        Self {
            tau_supp: 1e-3,
            tau_leak: 1e-3,
        }
    }
}

/// α with `ν = 0`: `E_candidate / E_R` clamped to `[0, 1]`.
///
/// `abs_tol` is the absolute energy resolution; when `|E_R| ≤ abs_tol` the
/// ratio is meaningless and α is 1 if the candidate attains the bound, else 0.
pub fn guarantee_alpha(e_candidate: f64, e_r: f64, abs_tol: f64) -> Result<f64> {
    if e_candidate < e_r - abs_tol.max(ALPHA_SLACK * e_r.abs()) {
        return Err(Error::Inconsistent(format!(
            "candidate energy {e_candidate:.12e} lies below the lower bound {e_r:.12e}"
        )));
    }
    if e_r.abs() <= abs_tol {
        return Ok(if e_candidate <= e_r + abs_tol {
            1.0
        } else {
            0.0
        });
    }
    if e_r > 0.0 {
        // the constant state has zero energy, so a positive bound contradicts E_0 ≤ 0
        return Err(Error::Inconsistent(format!(
            "lower bound {e_r:.12e} is positive"
        )));
    }
    let alpha = e_candidate / e_r;
    if alpha > 1.0 + ALPHA_SLACK {
        return Err(Error::Inconsistent(format!("alpha = {alpha} exceeds 1")));
    }
    Ok(alpha.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderReport {
    /// `E(ρ)`, the Lagrange multiplier of the mass constraint.
    pub mu: f64,
    /// `max_{j ∈ S} |Λ_j - 2μ|`.
    pub lambda_residual_on_support: f64,
    /// `min_{j ∉ S} (Λ_j - 2μ)`; `None` when ρ has full support.
    pub lambda_min_off_support: Option<f64>,
    pub support_size: usize,
    pub lambda: Vec<f64>,
}

/// `Λ = W * ρ` and the stationarity residuals against `2μ`.
pub fn first_order_report(
    rho: &Density,
    w: &SampledPotential,
    support_threshold: f64,
) -> Result<FirstOrderReport> {
    let mu = pairwise_energy(rho, w)?;
    let lambda = convolve(rho.grid, &w.values, &rho.values);
    let cut = support_threshold * rho.values.iter().cloned().fold(0.0, f64::max);
    let mut on = 0.0_f64;
    let mut off: Option<f64> = None;
    let mut support_size = 0;
    for (&r, &l) in rho.values.iter().zip(&lambda) {
        let d = l - 2.0 * mu;
        if r > cut {
            support_size += 1;
            on = on.max(d.abs());
        } else {
            off = Some(off.map_or(d, |m| m.min(d)));
        }
    }
    Ok(FirstOrderReport {
        mu,
        lambda_residual_on_support: on,
        lambda_min_off_support: off,
        support_size,
        lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SupportVerdict {
    Holds,
    Fails { leaked_mass: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportCheck {
    pub verdict: SupportVerdict,
    /// Mass of `F_ρ` on cells where `F_R` is below the support level.
    pub leaked_mass: f64,
    /// `h^d Σ W⁺_j F_ρ,j`; zero when the hypothesis holds exactly.
    pub wplus_overlap: f64,
    /// Fraction of the mass of `F_ρ` lying inside `supp F_R`.
    pub support_match: f64,
}

pub fn convex_support_check(
    rho: &Density,
    f_r: &Correlogram,
    w_plus: &[f64],
    th: &SupportThresholds,
) -> SupportCheck {
    let f_rho = autocorrelation(rho);
    let v = rho.grid.cell_volume();
    let cut_r = th.tau_supp * f_r.values.iter().cloned().fold(0.0, f64::max);
    let (mut leaked, mut total) = (0.0, 0.0);
    for (&a, &b) in f_r.values.iter().zip(&f_rho.values) {
        let m = v * b.max(0.0);
        total += m;
        if a < cut_r {
            leaked += m;
        }
    }
    let wplus_overlap = v * w_plus
        .iter()
        .zip(&f_rho.values)
        .map(|(a, b)| a * b.max(0.0))
        .sum::<f64>();
    let verdict = if leaked <= th.tau_leak {
        SupportVerdict::Holds
    } else {
        SupportVerdict::Fails {
            leaked_mass: leaked,
        }
    };
    SupportCheck {
        verdict,
        leaked_mass: leaked,
        wplus_overlap,
        support_match: if total > 0.0 {
            1.0 - leaked / total
        } else {
            1.0
        },
    }
}

/// The point mass is a global minimizer iff `W(0) ≤ W(x)` everywhere.
pub fn exact_case_delta(w: &SampledPotential) -> bool {
    let slack = 1e-12 * w.max_abs();
    let w0 = w.values[0];
    w.values.iter().all(|&v| w0 <= v + slack)
}

/// The constant state is a global minimizer iff every non-zero cosine mode of `W` is non-negative.
pub fn exact_case_constant(w: &SampledPotential) -> bool {
    let slack = 1e-12 * w.max_abs();
    cosine_coefficients(w.grid, &w.values)
        .expect("potential length matches its grid")
        .iter()
        .skip(1)
        .all(|&c| c >= -slack)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    DeltaExact,
    ConstantExact,
    LatticeExact,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub alpha: f64,
    pub energy_candidate: f64,
    pub e_r: f64,
    pub first_order: FirstOrderReport,
    pub support: SupportCheck,
    pub complementarity: ComplementarityReport,
    pub exactness: Exactness,
    /// KL between `F_R` and the candidate's autocorrelation.
    pub kl: f64,
}

/// Absolute energy resolution used for α and the lower-bound check.
pub fn energy_tolerance(sol: &RelaxationSolution, w: &SampledPotential) -> f64 {
    10.0 * sol.tol * w.max_abs().max(1.0)
}

pub fn certify(
    rho: &Density,
    w: &SampledPotential,
    sol: &RelaxationSolution,
    th: &SupportThresholds,
) -> Result<CertificateReport> {
    let energy_candidate = pairwise_energy(rho, w)?;
    let alpha = guarantee_alpha(energy_candidate, sol.e_r, energy_tolerance(sol, w))?;
    let first_order = first_order_report(rho, w, th.tau_supp)?;
    let support = convex_support_check(rho, &sol.f_r, &sol.decomp.w_plus, th);
    let complementarity = complementarity_report(&sol.f_r, &sol.decomp, sol.tol, w.max_abs());
    let kl = kl_divergence(
        &recovery_target(&sol.f_r, DEFAULT_TARGET_FLOOR)?,
        &autocorrelation(rho),
    );
    let exactness = if exact_case_delta(w) {
        Exactness::DeltaExact
    } else if exact_case_constant(w) {
        Exactness::ConstantExact
    } else if matches!(sol.kind, SolutionKind::DiracLattice { .. }) && alpha >= 1.0 - ALPHA_SLACK {
        Exactness::LatticeExact
    } else {
        Exactness::None
    };
    Ok(CertificateReport {
        alpha,
        energy_candidate,
        e_r: sol.e_r,
        first_order,
        support,
        complementarity,
        exactness,
        kl: if kl.is_finite() { kl } else { f64::MAX },
    })
}

/// Where the candidate density came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum CandidateSource {
    /// `F_R` is itself self-correlating (point mass or lattice) and is used as ρ*.
    Direct,
    Constant,
    Recovered {
        per_seed: Vec<(u64, f64)>,
        iterations: usize,
        converged: bool,
        kl_trace: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub rho: Density,
    pub kl_final: f64,
    pub source: CandidateSource,
}

/// Builds ρ* from a relaxation solution, running recovery only when needed.
pub fn candidate_from(sol: &RelaxationSolution, opts: &RecoveryOptions) -> Result<Candidate> {
    match &sol.kind {
        SolutionKind::Constant => Ok(Candidate {
            rho: Density::uniform(sol.f_r.grid),
            kl_final: 0.0,
            source: CandidateSource::Constant,
        }),
        kind if kind.is_self_correlating() => {
            let rho = sol.f_r.as_density()?;
            let kl = kl_divergence(&sol.f_r, &autocorrelation(&rho));
            Ok(Candidate {
                rho,
                kl_final: kl,
                source: CandidateSource::Direct,
            })
        }
        _ => {
            let MultiStart { best, per_seed } = recover_multistart(&sol.f_r, opts)?;
            Ok(Candidate {
                kl_final: best.kl_final,
                source: CandidateSource::Recovered {
                    per_seed,
                    iterations: best.iterations,
                    converged: best.converged,
                    kl_trace: best.kl_trace,
                },
                rho: best.rho,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub relaxation: RelaxationSolution,
    pub candidate: Candidate,
    pub certificate: CertificateReport,
}

/// Candidate for `w`: the known minimizer when `w` meets an exact-case condition,
/// otherwise [`candidate_from`].
///
/// In the exact cases the relaxed optimum need not be unique (zero modes of `W`
/// leave a face of optima), so the minimizer is taken from the condition itself.
pub fn pipeline_candidate(
    w: &SampledPotential,
    sol: &RelaxationSolution,
    opts: &RecoveryOptions,
) -> Result<Candidate> {
    let grid = sol.f_r.grid;
    if exact_case_delta(w) {
        let rho = Density::atom(grid, 0);
        let kl = kl_divergence(
            &recovery_target(&sol.f_r, DEFAULT_TARGET_FLOOR)?,
            &autocorrelation(&rho),
        );
        return Ok(Candidate {
            rho,
            kl_final: kl,
            source: CandidateSource::Direct,
        });
    }
    if exact_case_constant(w) {
        let rho = Density::uniform(grid);
        let kl = kl_divergence(
            &recovery_target(&sol.f_r, DEFAULT_TARGET_FLOOR)?,
            &autocorrelation(&rho),
        );
        return Ok(Candidate {
            rho,
            kl_final: kl,
            source: CandidateSource::Constant,
        });
    }
    candidate_from(sol, opts)
}

/// Relaxation, recovery and certification in one call.
pub fn run_pipeline(
    w: &SampledPotential,
    relax: &RelaxOptions,
    recovery: &RecoveryOptions,
    th: &SupportThresholds,
) -> Result<PipelineResult> {
    let relaxation = solve_relaxation(w, relax)?;
    let candidate = pipeline_candidate(w, &relaxation, recovery)?;
    let certificate = certify(&candidate.rho, w, &relaxation, th)?;
    Ok(PipelineResult {
        relaxation,
        candidate,
        certificate,
    })
}
