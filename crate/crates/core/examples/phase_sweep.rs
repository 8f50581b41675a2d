//! Coarse phase diagram of the periodic Morse family in the `(L, G)` plane.
//!
//! Prints one letter per point (A delta, B continuous, C constant, digits for
//! lattices by atom count, `*` other atomic) and writes the table, region map
//! and checkpoint into `target/phase_sweep/`. Re-running resumes from the checkpoint.
//!
//! `cargo run --release --example phase_sweep -- [steps]`

use relaxcert::sweep::{
    classify_regions, phase_sweep, region_csv, table_jsonl, SweepConfig, SweepControl,
};

fn main() -> relaxcert::Result<()> {
    let steps = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    let cfg = SweepConfig {
        l_steps: steps,
        g_steps: steps,
        ..Default::default()
    };
    let dir = std::path::Path::new("target/phase_sweep");
    std::fs::create_dir_all(dir)?;
    let start = std::time::Instant::now();
    let table = phase_sweep(
        &cfg,
        Some(&dir.join("checkpoint.jsonl")),
        SweepControl::default(),
    )?;
    let map = classify_regions(&table, cfg.l_steps, cfg.g_steps)?;

    println!(
        "rows: L from {} to {}; columns: G from {} to {}",
        cfg.l_min, cfg.l_max, cfg.g_min, cfg.g_max
    );
    for i in 0..cfg.l_steps {
        let row: String = (0..cfg.g_steps)
            .map(|j| {
                let p = &table[i * cfg.g_steps + j];
                match (p.kind.as_str(), p.atoms) {
                    ("single_delta", _) => 'A',
                    ("continuous", _) => 'B',
                    ("constant", _) => 'C',
                    ("dirac_lattice", Some(a)) if a < 10 => {
                        char::from_digit(a as u32, 10).unwrap_or('L')
                    }
                    ("dirac_lattice", _) => 'L',
                    ("atomic_non_lattice", _) => '*',
                    _ => '?',
                }
            })
            .flat_map(|c| [c, ' '])
            .collect();
        println!("L = {:5.3}  {row}", cfg.l_value(i));
    }
    println!(
        "{} regions, {} boundary segments",
        map.regions.len(),
        map.boundaries.len()
    );
    std::fs::write(dir.join("table.jsonl"), table_jsonl(&table)?)?;
    std::fs::write(dir.join("regions.csv"), region_csv(&table, &map))?;
    println!("wall {:.1?}", start.elapsed());
    Ok(())
}
