//! Gini concentration of visibility rows, from a flat arena to a dominated one.
//!
//! `cargo run --example concentration`

use junk_bubbles::{gini, run, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (label, row) in [
        ("uniform", vec![0.25; 4]),
        ("one-hot", vec![0.0, 1.0, 0.0, 0.0]),
        ("skewed", vec![0.1, 0.2, 0.3, 0.4]),
    ] {
        println!("{label:>8} {row:?} -> gini {:.4}", gini(&row)?);
    }

    for alpha in [0.0, 3.0] {
        let trace = run(&ModelParams::new(alpha, 20, 12.0, 10_000, 7)?);
        let last = trace.row(trace.len());
        let mean: f64 = trace.rows().skip(100).map(|r| gini(r).unwrap()).sum::<f64>() / (trace.len() - 100) as f64;
        println!(
            "alpha={alpha}: final-row gini {:.4}, post-burn-in mean {mean:.4}",
            gini(last)?
        );
    }
    Ok(())
}
