//! Two-dimensional Morse-like potential on a 40x40 grid: relaxation, recovery and certificate.
//!
//! `cargo run --release --example morse_2d -- 1.5 0.9`

use relaxcert::certify::{run_pipeline, SupportThresholds};
use relaxcert::potential::{build_potential, PotentialSpec};
use relaxcert::recovery::RecoveryOptions;
use relaxcert::relaxation::RelaxOptions;
use relaxcert::Grid;

fn main() -> relaxcert::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let (l, g) = (
        args.first().copied().unwrap_or(1.5),
        args.get(1).copied().unwrap_or(0.9),
    );
    let n = args.get(2).map_or(40, |&v| v as usize);
    let w = build_potential(&PotentialSpec::morse2d(l, g), Grid::square(n))?;
    let start = std::time::Instant::now();
    let starts = args.get(3).map_or(1, |&v| v as usize);
    let rec = RecoveryOptions {
        starts,
        ..Default::default()
    };
    let out = run_pipeline(
        &w,
        &RelaxOptions::default(),
        &rec,
        &SupportThresholds::default(),
    )?;
    let c = &out.certificate;
    println!("L = {l}, G = {g}, grid {n}x{n}");
    println!(
        "E_R          {:.6e}  ({})",
        out.relaxation.e_r,
        out.relaxation.kind.label()
    );
    println!("E(rho*)      {:.6e}", c.energy_candidate);
    println!("alpha        {:.4}", c.alpha);
    println!("kl_final     {:.3e}", out.candidate.kl_final);
    println!(
        "support      {:?} (leak {:.2e}, match {:.3})",
        c.support.verdict, c.support.leaked_mass, c.support.support_match
    );
    println!(
        "support area {:.4}",
        out.candidate.rho.support_measure(1e-3)
    );
    println!("wall         {:.1?}", start.elapsed());
    Ok(())
}
