//! Recovering a density from the relaxed autocorrelation with the Schulz-Snyder iteration.
//!
//! `cargo run --release --example recover_morse -- [starts]`

use relaxcert::potential::{build_potential, PotentialSpec};
use relaxcert::recovery::{recover_multistart, RecoveryOptions};
use relaxcert::relaxation::{solve_relaxation, RelaxOptions};
use relaxcert::Grid;

fn main() -> relaxcert::Result<()> {
    let starts = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);
    let w = build_potential(&PotentialSpec::morse1d(0.1, 1.2, 0.9), Grid::line(800))?;
    let sol = solve_relaxation(&w, &RelaxOptions::default())?;
    let ms = recover_multistart(
        &sol.f_r,
        &RecoveryOptions {
            starts,
            ..Default::default()
        },
    )?;
    for (seed, kl) in &ms.per_seed {
        println!("seed {seed}: kl_final = {kl:.3e}");
    }
    let best = &ms.best;
    println!(
        "best seed {} after {} iterations (converged: {})",
        best.seed, best.iterations, best.converged
    );
    let mut k = 1;
    while k < best.kl_trace.len() {
        println!("  iter {k:>6}  KL = {:.3e}", best.kl_trace[k]);
        k *= 10;
    }
    println!(
        "support width of rho*: {:.4}",
        best.rho.support_measure(1e-3)
    );
    Ok(())
}
