//! Stackplot series for the four canonical regimes, alpha in {0, 1, 2, 3},
//! written to `target/stackplots/`. Each file is long-form
//! `t,item_id,visibility` and can be pivoted on `item_id` for plotting.
//!
//! `cargo run --release --example regime_stackplots`

use std::fs::{self, File};
use std::io::BufWriter;

use junk_bubbles::run;
use junk_bubbles::sweep::{emit_stackplot, write_stackplot_csv, SweepGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = SweepGrid::four_regimes();
    let dir = "target/stackplots";
    fs::create_dir_all(dir)?;
    for cell in grid.cells() {
        let params = cell.params(grid.iterations, grid.burn_in, 0)?;
        let trace = run(&params);
        let rows = emit_stackplot(&trace, 100)?;
        let distinct = {
            let mut ids: Vec<u64> = rows.iter().map(|r| r.item_id).collect();
            ids.sort_unstable();
            ids.dedup();
            ids.len()
        };
        let path = format!("{dir}/alpha{}.csv", cell.alpha);
        write_stackplot_csv(&rows, BufWriter::new(File::create(&path)?))?;
        println!(
            "alpha={}: {distinct} distinct items in the first 100 steps -> {path}",
            cell.alpha
        );
    }
    Ok(())
}
