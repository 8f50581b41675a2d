//! Guarantees for the regularized power law and the multi-scale potential.
//!
//! Both take a while (the relaxation has about 500 variables and recovery runs
//! up to 1e5 iterations).

use relaxcert::certify::{run_pipeline, SupportThresholds};
use relaxcert::potential::{build_potential, PotentialSpec};
use relaxcert::recovery::RecoveryOptions;
use relaxcert::relaxation::RelaxOptions;
use relaxcert::Grid;

fn main() -> relaxcert::Result<()> {
    for (spec, n) in [
        (PotentialSpec::power_law(), 1000),
        (PotentialSpec::multi_scale(), 1024),
    ] {
        let start = std::time::Instant::now();
        let w = build_potential(&spec, Grid::line(n))?;
        let rec = RecoveryOptions {
            starts: 1,
            ..Default::default()
        };
        let out = run_pipeline(
            &w,
            &RelaxOptions::default(),
            &rec,
            &SupportThresholds::default(),
        )?;
        let rho = &out.candidate.rho;
        println!("{} (n = {n})", spec.name());
        println!(
            "  E_R = {:.6e}, E(rho*) = {:.6e}",
            out.relaxation.e_r, out.certificate.energy_candidate
        );
        println!(
            "  alpha = {:.4}, KL = {:.2e}",
            out.certificate.alpha, out.candidate.kl_final
        );
        println!(
            "  support: measure {:.4}, {} components",
            rho.support_measure(1e-3),
            rho.support_components(1e-3)
        );
        println!("  {:.1?}", start.elapsed());
    }
    Ok(())
}
