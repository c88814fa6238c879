//! Seed-averaged metrics as the trendiness boost grows.
//!
//! `cargo run --release --example alpha_trends`

use junk_bubbles::sweep::{run_sweep, Metric, SeedSpec, SweepGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = SweepGrid {
        alphas: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
        ns: vec![20],
        cs: vec![12.0],
        iterations: 10_000,
        burn_in: 100,
        seeds: SeedSpec::Range { base: 0, count: 20 },
    };
    let rows = run_sweep(&grid)?;

    print!("{:>6}", "alpha");
    for m in Metric::ALL {
        print!("  {:>16}", m.name());
    }
    println!();
    for row in &rows {
        print!("{:>6}", row.alpha);
        for m in Metric::ALL {
            let s = row.stat(m);
            match (s.mean, s.std) {
                (Some(mean), Some(std)) => print!("  {:>8.4}±{:<7.1e}", mean, std),
                _ => print!("  {:>16}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
