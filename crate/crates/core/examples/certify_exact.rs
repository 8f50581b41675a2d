//! Potentials for which the relaxation is tight: a point mass when `W(0)` is the
//! minimum, and the uniform density when every cosine mode is non-negative.

use std::f64::consts::PI;

use relaxcert::certify::{exact_case_constant, exact_case_delta, run_pipeline, SupportThresholds};
use relaxcert::potential::{SampledPotential, TableOptions};
use relaxcert::recovery::RecoveryOptions;
use relaxcert::relaxation::RelaxOptions;
use relaxcert::Grid;

fn cosine_series(n: usize, terms: &[(f64, f64)]) -> relaxcert::Result<SampledPotential> {
    let values = (0..n)
        .map(|j| {
            terms
                .iter()
                .map(|&(k, a)| a * (2.0 * PI * k * j as f64 / n as f64).cos())
                .sum()
        })
        .collect();
    SampledPotential::tabulated(
        Grid::line(n),
        values,
        "cosine series",
        TableOptions::default(),
    )
}

fn main() -> relaxcert::Result<()> {
    let cases = [
        (
            "attractive well",
            cosine_series(128, &[(1.0, -1.0), (2.0, -0.3)])?,
        ),
        (
            "repulsive modes",
            cosine_series(
                128,
                &(1..64)
                    .map(|k| (k as f64, 1.0 / (k * k) as f64))
                    .collect::<Vec<_>>(),
            )?,
        ),
    ];
    for (name, w) in &cases {
        let out = run_pipeline(
            w,
            &RelaxOptions::default(),
            &RecoveryOptions::default(),
            &SupportThresholds::default(),
        )?;
        println!(
            "{name:16} delta-exact {:5} constant-exact {:5} -> {:14} E_R = {:+.6e} alpha = {}",
            exact_case_delta(w),
            exact_case_constant(w),
            out.relaxation.kind.label(),
            out.relaxation.e_r,
            out.certificate.alpha
        );
    }
    Ok(())
}
