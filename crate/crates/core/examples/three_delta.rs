//! The relaxation restricted to three atoms `(1 - 2b) d_0 + b (d_s + d_-s)`.

use relaxcert::potential::{build_potential, PotentialSpec};
use relaxcert::relaxation::{solve_relaxation, RelaxOptions};
use relaxcert::threedelta::{
    minimize_three_delta, theta, theta_odd_closed_form, ThreeDeltaOptions,
};
use relaxcert::Grid;

fn main() -> relaxcert::Result<()> {
    println!("theta(1/2) = {}", theta(0.5, 10)?);
    for p in [3u64, 5, 7, 9] {
        println!(
            "theta(1/{p}) = {:.15}  closed form {:.15}",
            theta(1.0 / p as f64, 1000)?,
            theta_odd_closed_form(p)
        );
    }

    let w = build_potential(&PotentialSpec::morse1d(0.1, 1.2, 0.9), Grid::line(800))?;
    let grid: Vec<f64> = (1..=400).map(|j| j as f64 / 800.0).collect();
    let r = minimize_three_delta(&w, &grid, &ThreeDeltaOptions::default())?;
    let e_r = solve_relaxation(&w, &RelaxOptions::default())?.e_r;
    println!(
        "Morse (1.2, 0.9): s* = {:.6}, beta* = {:.6}, E* = {:.6e}",
        r.s_star, r.beta_star, r.e_star
    );
    if let Some(f) = &r.rational_fit {
        println!("s* = {}/{}", f.q, f.p);
    }
    println!("E_R = {e_r:.6e} <= E* : {}", e_r <= r.e_star);
    Ok(())
}
