//! Particle gradient flow for the Morse potential, compared with the recovered support width.
//!
//! `cargo run --release --example particle_flow -- [N] [seed]`

use relaxcert::particles::{cluster_width, clusters_1d, simulate, ParticleOptions};
use relaxcert::potential::{build_potential, PotentialSpec};
use relaxcert::Grid;

fn main() -> relaxcert::Result<()> {
    let mut args = std::env::args().skip(1);
    let count = args.next().and_then(|s| s.parse().ok()).unwrap_or(400);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let w = build_potential(&PotentialSpec::morse1d(0.1, 1.2, 0.9), Grid::line(800))?;
    let opts = ParticleOptions {
        count,
        seed,
        dt: 4.0,
        t_end: 2e4,
        force_tol: 1e-9,
        ..Default::default()
    };
    let start = std::time::Instant::now();
    let trace = simulate(&w, &opts)?;
    let last = trace.last();
    println!(
        "N = {count}, seed {seed}: stopped at t = {:.0} after {} steps",
        last.time, trace.steps
    );
    println!(
        "max force {:.2e}, energy {:.8e}",
        trace.final_max_force, trace.final_energy
    );
    for c in clusters_1d(last, 0.05) {
        println!(
            "  cluster of {} particles from x = {:.4}, width {:.4}",
            c.count, c.start, c.width
        );
    }
    if let Some(wd) = cluster_width(last, 0.05) {
        println!("terminal width {wd:.4}");
    }
    println!("{:.1?}", start.elapsed());
    Ok(())
}
