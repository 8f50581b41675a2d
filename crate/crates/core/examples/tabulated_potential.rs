//! Supplying a potential as samples: write the tabulated text format, read it back and solve.

use std::f64::consts::PI;

use relaxcert::potential::{load_tabulated, write_tabulated, SampledPotential, TableOptions};
use relaxcert::relaxation::{solve_relaxation, RelaxOptions};
use relaxcert::Grid;

fn main() -> relaxcert::Result<()> {
    let n = 200;
    // soft-core repulsion with a ring of attraction at distance 1/4
    let values: Vec<f64> = (0..n)
        .map(|j| {
            let x = j as f64 / n as f64;
            let d = x.min(1.0 - x);
            (-(d / 0.05).powi(2)).exp() - 0.6 * (-((d - 0.25) / 0.05).powi(2)).exp()
                + 0.1 * (2.0 * PI * x).cos()
        })
        .collect();
    let w = SampledPotential::tabulated(Grid::line(n), values, "inline", TableOptions::default())?;
    let path = std::env::temp_dir().join("relaxcert_ring.txt");
    std::fs::write(&path, write_tabulated(&w))?;

    let loaded = load_tabulated(&path, TableOptions::default())?;
    let sol = solve_relaxation(&loaded, &RelaxOptions::default())?;
    println!(
        "read {} samples from {}",
        loaded.values.len(),
        path.display()
    );
    println!("E_R = {:.6e}, kind = {}", sol.e_r, sol.kind.label());
    if let Some(atoms) = sol.kind.atoms() {
        for a in atoms {
            println!("  atom at {:.3} with mass {:.4}", a.position[0], a.mass);
        }
    }
    Ok(())
}
