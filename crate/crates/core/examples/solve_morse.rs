//! Relaxation of the periodic Morse potential and its dual decomposition.
//!
//! `cargo run --release --example solve_morse -- [L] [G] [n]`

use relaxcert::potential::{build_potential, PotentialSpec};
use relaxcert::relaxation::{complementarity_report, solve_relaxation, RelaxOptions};
use relaxcert::Grid;

fn main() -> relaxcert::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let l = args.first().copied().unwrap_or(1.2);
    let g = args.get(1).copied().unwrap_or(0.9);
    let n = args.get(2).map_or(800, |&v| v as usize);

    let w = build_potential(&PotentialSpec::morse1d(0.1, l, g), Grid::line(n))?;
    let sol = solve_relaxation(&w, &RelaxOptions::default())?;
    let d = &sol.decomp;
    println!("Morse sigma = 0.1, L = {l}, G = {g}, n = {n}");
    println!("E_R = {:.8e}  kind = {}", sol.e_r, sol.kind.label());
    println!(
        "IPM: {:?} after {} iterations",
        sol.stats.status, sol.stats.iterations
    );
    println!(
        "W = W+ + K + 2 E_D with E_D = {:.8e}, residual {:.2e}",
        d.e_d, d.residual
    );
    println!(
        "min W+ = {:.2e}, min K_hat = {:.2e}",
        min(&d.w_plus),
        min(&d.k_hat[1..])
    );
    let c = complementarity_report(&sol.f_r, d, sol.tol, w.max_abs());
    println!(
        "complementarity: r1 = {:.2e}, r2 = {:.2e} (threshold {:.1e})",
        c.r1, c.r2, c.threshold
    );

    let h = sol.f_r.grid.h();
    let support = sol.f_r.values.iter().filter(|&&v| v > 1e-3).count() as f64 * h;
    println!("measure of supp F_R: {support:.4}");
    Ok(())
}

fn min(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}
