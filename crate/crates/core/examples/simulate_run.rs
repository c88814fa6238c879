//! One seeded run: prints the replacement count, the longest-lived item and
//! the summary metrics, then writes the trace to `target/example-trace.csv`.
//!
//! `cargo run --release --example simulate_run -- 2.0`

use std::fs::File;
use std::io::BufWriter;

use junk_bubbles::metrics::segment_lifecycles;
use junk_bubbles::trace_io::write_trace_csv;
use junk_bubbles::{run, summarize, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha: f64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(1.0);
    let params = ModelParams::new(alpha, 20, 12.0, 10_000, 42)?;
    let trace = run(&params);

    println!(
        "alpha={alpha} n={} c={} sigma={:.6}",
        params.n,
        params.c,
        params.noise_sigma()
    );
    println!(
        "rows={} replacements={} degenerate resets={}",
        trace.len(),
        trace.events.len(),
        trace.degenerate_resets.len()
    );

    let longest = segment_lifecycles(&trace)
        .into_iter()
        .filter(|r| r.is_completed())
        .max_by_key(|r| r.length());
    if let Some(r) = longest {
        println!(
            "longest completed lifecycle: item {} in slot {} lived t={}..{} and peaked at {:.4}",
            r.item_id,
            r.slot,
            r.birth_t,
            r.death_t.unwrap(),
            r.peak_height
        );
    }

    let summary = summarize(&trace)?;
    println!("{}", summary.to_json(&params));

    let path = "target/example-trace.csv";
    std::fs::create_dir_all("target")?;
    write_trace_csv(&trace, BufWriter::new(File::create(path)?))?;
    println!("trace written to {path}");
    Ok(())
}
