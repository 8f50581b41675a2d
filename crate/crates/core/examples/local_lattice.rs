//! A compactly supported potential whose relaxation is solved by a lattice of atoms.
//!
//! The lattice is self-correlating, so it is itself the minimizer and the
//! certificate is exact.

use relaxcert::certify::{run_pipeline, SupportThresholds};
use relaxcert::potential::{build_potential, PotentialSpec};
use relaxcert::recovery::RecoveryOptions;
use relaxcert::relaxation::{lattice_self_consistency, RelaxOptions, SolutionKind};
use relaxcert::Grid;

fn main() -> relaxcert::Result<()> {
    let w = build_potential(&PotentialSpec::local(0.1), Grid::line(360))?;
    let out = run_pipeline(
        &w,
        &RelaxOptions::default(),
        &RecoveryOptions::default(),
        &SupportThresholds::default(),
    )?;
    let sol = &out.relaxation;
    if let SolutionKind::DiracLattice { spacing, atoms } = &sol.kind {
        println!("{} atoms, spacing {:?}", atoms.len(), spacing);
        for a in atoms {
            println!("  x = {:.4}  mass = {:.6}", a.position[0], a.mass);
        }
    } else {
        println!("unexpected kind {}", sol.kind.label());
    }
    println!(
        "|F_R o F_R - F_R| = {:.2e}",
        lattice_self_consistency(&sol.f_r)?
    );
    println!(
        "alpha = {}  exactness = {:?}",
        out.certificate.alpha, out.certificate.exactness
    );
    Ok(())
}
