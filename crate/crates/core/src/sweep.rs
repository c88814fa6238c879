//! Seeded parameter sweeps and plot-ready exports.
//!
//! Every `(alpha, n, c)` cell is run once per seed and the resulting
//! [`MetricsSummary`] values are reduced to a mean and a sample standard
//! deviation. Runs execute in parallel; reduction happens afterwards in
//! seed order, so the output does not depend on scheduling.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::{run, ItemId, RunTrace};
use crate::metrics::{summarize, MetricsError, MetricsSummary};
use crate::params::{ModelParams, ParamError, DEFAULT_BURN_IN};
use crate::trace_io::format_share;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("max_t {max_t} outside 1..={len}")]
    OutOfRange { max_t: usize, len: usize },
}

/// Seeds either listed explicitly or as `count` consecutive values from `base`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    untagged,
    expecting = "`seeds` must be a list of integers or an object {\"base\": <u64>, \"count\": <n>}"
)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { base: u64, count: usize },
}

impl SeedSpec {
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range { base, count } => (0..*count as u64).map(|i| base.wrapping_add(i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub alphas: Vec<f64>,
    pub ns: Vec<usize>,
    pub cs: Vec<f64>,
    pub iterations: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    pub seeds: SeedSpec,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl Default for SweepGrid {
    /// Thirteen boosts from 0 to 3, `n` in {10, 20, 50}, `c = 12`,
    /// 10 000 iterations and 20 seeds.
    fn default() -> Self {
        SweepGrid {
            alphas: (0..=12).map(|k| k as f64 * 0.25).collect(),
            ns: vec![10, 20, 50],
            cs: vec![12.0],
            iterations: 10_000,
            burn_in: DEFAULT_BURN_IN,
            seeds: SeedSpec::Range { base: 0, count: 20 },
        }
    }
}

impl SweepGrid {
    /// The four stack-plot regimes: boosts 0..=3 at `n = 20`, `c = 12`.
    pub fn four_regimes() -> Self {
        SweepGrid {
            alphas: vec![0.0, 1.0, 2.0, 3.0],
            ns: vec![20],
            ..SweepGrid::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let grid: SweepGrid = serde_json::from_str(text).map_err(|e| e.to_string())?;
        grid.validate().map_err(|e| e.to_string())?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let empty = |name| ParamError::new(name, "must not be empty");
        if self.alphas.is_empty() {
            return Err(empty("alphas"));
        }
        if self.ns.is_empty() {
            return Err(empty("ns"));
        }
        if self.cs.is_empty() {
            return Err(empty("cs"));
        }
        let seeds = self.seeds.resolve();
        if seeds.is_empty() {
            return Err(empty("seeds"));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(ParamError::new("seeds", format!("duplicate seed {}", w[0])));
        }
        for cell in self.cells() {
            cell.params(self.iterations, self.burn_in, 0)?;
        }
        Ok(())
    }

    /// Distinct cells ordered by `(n, c, alpha)`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells: Vec<Cell> = self
            .ns
            .iter()
            .flat_map(|&n| {
                self.cs
                    .iter()
                    .flat_map(move |&c| self.alphas.iter().map(move |&alpha| Cell { alpha, n, c }))
            })
            .collect();
        cells.sort_by(|a, b| {
            a.n.cmp(&b.n)
                .then(a.c.total_cmp(&b.c))
                .then(a.alpha.total_cmp(&b.alpha))
        });
        cells.dedup();
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub alpha: f64,
    pub n: usize,
    pub c: f64,
}

impl Cell {
    pub fn params(&self, iterations: usize, burn_in: usize, seed: u64) -> Result<ModelParams, ParamError> {
        ModelParams::with_burn_in(self.alpha, self.n, self.c, iterations, seed, burn_in)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanSlope,
    MeanLifecycle,
    TurnoverRatio,
    MeanPeakHeight,
    MeanGini,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::MeanSlope,
        Metric::MeanLifecycle,
        Metric::TurnoverRatio,
        Metric::MeanPeakHeight,
        Metric::MeanGini,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::MeanSlope => "mean_slope",
            Metric::MeanLifecycle => "mean_lifecycle",
            Metric::TurnoverRatio => "turnover_ratio",
            Metric::MeanPeakHeight => "mean_peak_height",
            Metric::MeanGini => "mean_gini",
        }
    }

    pub fn of(self, s: &MetricsSummary) -> Option<f64> {
        match self {
            Metric::MeanSlope => Some(s.mean_slope),
            Metric::MeanLifecycle => s.mean_lifecycle,
            Metric::TurnoverRatio => Some(s.turnover_ratio),
            Metric::MeanPeakHeight => s.mean_peak_height,
            Metric::MeanGini => Some(s.mean_gini),
        }
    }
}

/// Mean and sample standard deviation over the seeds that defined the metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub seeds: usize,
}

impl MetricStat {
    pub fn from_values(values: &[f64]) -> Self {
        let k = values.len();
        if k == 0 {
            return MetricStat {
                mean: None,
                std: None,
                seeds: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / k as f64;
        let std = if k == 1 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
        };
        MetricStat {
            mean: Some(mean),
            std: Some(std),
            seeds: k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub alpha: f64,
    pub n: usize,
    pub c: f64,
    pub seeds: usize,
    /// One entry per [`Metric::ALL`], in that order.
    pub stats: Vec<MetricStat>,
}

impl AggregateRow {
    pub fn stat(&self, metric: Metric) -> &MetricStat {
        let idx = Metric::ALL
            .iter()
            .position(|&m| m == metric)
            .expect("metric listed in ALL");
        &self.stats[idx]
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        self.stat(metric).mean
    }

    pub fn aggregate(cell: Cell, summaries: &[MetricsSummary]) -> Self {
        let stats = Metric::ALL
            .iter()
            .map(|m| {
                let values: Vec<f64> = summaries.iter().filter_map(|s| m.of(s)).collect();
                MetricStat::from_values(&values)
            })
            .collect();
        AggregateRow {
            alpha: cell.alpha,
            n: cell.n,
            c: cell.c,
            seeds: summaries.len(),
            stats,
        }
    }
}

/// Runs every cell for every seed and aggregates per cell.
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<AggregateRow>, SweepError> {
    grid.validate()?;
    let cells = grid.cells();
    let seeds = grid.seeds.resolve();
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|ci| seeds.iter().map(move |&s| (ci, s)))
        .collect();

    let summaries: Vec<MetricsSummary> = jobs
        .par_iter()
        .map(|&(ci, seed)| {
            let params = cells[ci].params(grid.iterations, grid.burn_in, seed)?;
            Ok(summarize(&run(&params))?)
        })
        .collect::<Result<_, SweepError>>()?;

    Ok(cells
        .iter()
        .zip(summaries.chunks(seeds.len()))
        .map(|(&cell, chunk)| AggregateRow::aggregate(cell, chunk))
        .collect())
}

pub const AGGREGATE_HEADER: &str = "n,c,alpha,metric,mean,std,seeds";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Long format, one line per cell and metric; undefined statistics are empty.
pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "{AGGREGATE_HEADER}")?;
    for row in rows {
        for (metric, stat) in Metric::ALL.iter().zip(&row.stats) {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.n,
                row.c,
                row.alpha,
                metric.name(),
                opt(stat.mean),
                opt(stat.std),
                stat.seeds
            )?;
        }
    }
    out.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackRow {
    pub t: usize,
    pub item_id: ItemId,
    pub visibility: f64,
}

/// Long-format rows for the first `max_t` iterations of a trace.
pub fn emit_stackplot(trace: &RunTrace, max_t: usize) -> Result<Vec<StackRow>, SweepError> {
    if max_t == 0 || max_t > trace.len() {
        return Err(SweepError::OutOfRange {
            max_t,
            len: trace.len(),
        });
    }
    Ok((1..=max_t)
        .flat_map(|t| {
            trace
                .ids(t)
                .iter()
                .zip(trace.row(t))
                .map(move |(&item_id, &visibility)| StackRow { t, item_id, visibility })
        })
        .collect())
}

pub const STACKPLOT_HEADER: &str = "t,item_id,visibility";

pub fn write_stackplot_csv<W: Write>(rows: &[StackRow], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "{STACKPLOT_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.t, r.item_id, format_share(r.visibility))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> SweepGrid {
        SweepGrid {
            alphas: vec![2.0, 0.0],
            ns: vec![8, 4],
            cs: vec![12.0],
            iterations: 400,
            burn_in: 50,
            seeds: SeedSpec::Range { base: 10, count: 3 },
        }
    }

    #[test]
    fn grid_json_forms() {
        let g = SweepGrid::from_json(
            r#"{"alphas":[0,1],"ns":[20],"cs":[12],"iterations":500,"seeds":{"base":5,"count":3}}"#,
        )
        .unwrap();
        assert_eq!(g.seeds.resolve(), vec![5, 6, 7]);
        assert_eq!(g.burn_in, DEFAULT_BURN_IN);
        let g = SweepGrid::from_json(r#"{"alphas":[0],"ns":[20],"cs":[12],"iterations":500,"seeds":[9,3]}"#).unwrap();
        assert_eq!(g.seeds.resolve(), vec![9, 3]);
    }

    #[test]
    fn grid_errors_name_the_field() {
        let err =
            SweepGrid::from_json(r#"{"alphas":[],"ns":[20],"cs":[12],"iterations":500,"seeds":[1]}"#).unwrap_err();
        assert!(err.contains("alphas"), "{err}");
        let err = SweepGrid::from_json(r#"{"ns":[20],"cs":[12],"iterations":500,"seeds":[1]}"#).unwrap_err();
        assert!(err.contains("alphas"), "{err}");
        let err =
            SweepGrid::from_json(r#"{"alphas":[0],"ns":[20],"cs":[12],"iterations":500,"seeds":"x"}"#).unwrap_err();
        assert!(err.contains("seeds"), "{err}");
        let err =
            SweepGrid::from_json(r#"{"alphas":[0],"ns":[1],"cs":[12],"iterations":500,"seeds":[1]}"#).unwrap_err();
        assert!(err.contains("`n`"), "{err}");
        let err =
            SweepGrid::from_json(r#"{"alphas":[0],"ns":[5],"cs":[12],"iterations":500,"seeds":[1,1]}"#).unwrap_err();
        assert!(err.contains("seeds"), "{err}");
        let err = SweepGrid::from_json(r#"{"alphas":[0],"ns":[5],"cs":[12],"iterations":500,"seeds":[1],"gamma":2}"#)
            .unwrap_err();
        assert!(err.contains("gamma"), "{err}");
    }

    #[test]
    fn default_grids() {
        let d = SweepGrid::default();
        assert_eq!(d.alphas.len(), 13);
        assert_eq!(d.alphas[12], 3.0);
        assert_eq!(d.seeds.resolve().len(), 20);
        assert_eq!(d.cells().len(), 39);
        assert_eq!(SweepGrid::four_regimes().cells().len(), 4);
    }

    #[test]
    fn rows_ordered_by_n_c_alpha() {
        let rows = run_sweep(&small_grid()).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.n, r.alpha)).collect();
        assert_eq!(keys, vec![(4, 0.0), (4, 2.0), (8, 0.0), (8, 2.0)]);
        assert!(rows.iter().all(|r| r.seeds == 3 && r.stats.len() == 5));
    }

    #[test]
    fn single_seed_row_equals_run_summary() {
        let grid = SweepGrid {
            alphas: vec![1.5],
            ns: vec![10],
            cs: vec![4.0],
            iterations: 600,
            burn_in: 100,
            seeds: SeedSpec::List(vec![77]),
        };
        let rows = run_sweep(&grid).unwrap();
        let s = summarize(&run(&ModelParams::with_burn_in(1.5, 10, 4.0, 600, 77, 100).unwrap())).unwrap();
        for m in Metric::ALL {
            assert_eq!(rows[0].mean(m), m.of(&s));
            assert_eq!(rows[0].stat(m).std, m.of(&s).map(|_| 0.0));
        }
    }

    #[test]
    fn cells_reproducible_in_isolation_and_deterministic() {
        let grid = small_grid();
        let rows = run_sweep(&grid).unwrap();
        assert_eq!(run_sweep(&grid).unwrap(), rows);
        let single = SweepGrid {
            alphas: vec![2.0],
            ns: vec![8],
            ..grid.clone()
        };
        assert_eq!(run_sweep(&single).unwrap()[0], rows[3]);
    }

    #[test]
    fn extending_seeds_only_touches_affected_cells() {
        let grid = small_grid();
        let base = run_sweep(&grid).unwrap();
        let more = run_sweep(&SweepGrid {
            seeds: SeedSpec::Range { base: 10, count: 4 },
            ..grid.clone()
        })
        .unwrap();
        let fourth = run_sweep(&SweepGrid {
            seeds: SeedSpec::List(vec![13]),
            ..grid
        })
        .unwrap();
        for ((b, m), f) in base.iter().zip(&more).zip(&fourth) {
            let combined = (b.mean(Metric::MeanGini).unwrap() * 3.0 + f.mean(Metric::MeanGini).unwrap()) / 4.0;
            assert!((m.mean(Metric::MeanGini).unwrap() - combined).abs() < 1e-12);
        }
    }

    #[test]
    fn undefined_lifecycle_gives_null_stats() {
        // alpha 0 with vanishing noise: nothing ever dies
        let grid = SweepGrid {
            alphas: vec![0.0],
            ns: vec![5],
            cs: vec![1e12],
            iterations: 200,
            burn_in: 10,
            seeds: SeedSpec::List(vec![1, 2]),
        };
        let row = &run_sweep(&grid).unwrap()[0];
        assert_eq!(row.stat(Metric::MeanLifecycle).mean, None);
        assert_eq!(row.stat(Metric::MeanLifecycle).seeds, 0);
        assert!(row.mean(Metric::MeanSlope).is_some());

        let mut buf = Vec::new();
        write_aggregate_csv(std::slice::from_ref(row), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some(AGGREGATE_HEADER));
        assert!(text.contains("5,1000000000000,0,mean_lifecycle,,,0"), "{text}");
    }

    #[test]
    fn stackplot_shape_and_sums() {
        let trace = run(&ModelParams::new(2.0, 20, 12.0, 1_000, 3).unwrap());
        let rows = emit_stackplot(&trace, 100).unwrap();
        assert_eq!(rows.len(), 100 * 20);
        for t in 1..=100 {
            let total: f64 = rows.iter().filter(|r| r.t == t).map(|r| r.visibility).sum();
            assert!((total - 1.0).abs() <= 1e-12);
        }
        assert!(emit_stackplot(&trace, 0).is_err());
        assert!(emit_stackplot(&trace, 1_001).is_err());
        assert_eq!(emit_stackplot(&trace, 1_000).unwrap().len(), 20_000);
    }
}
