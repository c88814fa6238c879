//! Lifecycle segmentation and the aggregate statistics of a run: mean
//! slope, lifecycle length, turnover, peak height and Gini concentration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::{ItemId, RunTrace};
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("insufficient data: {rows} rows cannot cover burn-in {burn_in} plus one transition")]
    InsufficientData { rows: usize, burn_in: usize },
    #[error("negative or non-finite value {value} at index {index}")]
    InvalidValue { index: usize, value: f64 },
}

/// Lifetime of one item within its slot. Completed lifetimes cover
/// `[birth_t, death_t)`; the row at `death_t` already belongs to the
/// successor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleRecord {
    pub item_id: ItemId,
    pub slot: usize,
    pub birth_t: usize,
    pub death_t: Option<usize>,
    pub peak_height: f64,
    pub peak_t: usize,
}

impl LifecycleRecord {
    pub fn length(&self) -> Option<usize> {
        self.death_t.map(|d| d - self.birth_t)
    }

    pub fn is_completed(&self) -> bool {
        self.death_t.is_some()
    }
}

/// Splits every slot's column into item lifetimes, ordered by item id.
pub fn segment_lifecycles(trace: &RunTrace) -> Vec<LifecycleRecord> {
    let len = trace.len();
    let mut records = Vec::new();
    for slot in 0..trace.n() {
        let mut open = LifecycleRecord {
            item_id: trace.ids(1)[slot],
            slot,
            birth_t: 1,
            death_t: None,
            peak_height: trace.row(1)[slot],
            peak_t: 1,
        };
        for t in 2..=len {
            let id = trace.ids(t)[slot];
            let v = trace.row(t)[slot];
            if id != open.item_id {
                let next = LifecycleRecord {
                    item_id: id,
                    slot,
                    birth_t: t,
                    death_t: None,
                    peak_height: v,
                    peak_t: t,
                };
                let mut done = std::mem::replace(&mut open, next);
                done.death_t = Some(t);
                records.push(done);
            } else if v > open.peak_height {
                open.peak_height = v;
                open.peak_t = t;
            }
        }
        records.push(open);
    }
    records.sort_by_key(|r| r.item_id);
    records
}

fn check_rows(trace: &RunTrace, burn_in: usize) -> Result<(), MetricsError> {
    if trace.len() < burn_in + 2 {
        return Err(MetricsError::InsufficientData {
            rows: trace.len(),
            burn_in,
        });
    }
    Ok(())
}

/// Mean of `|pi_i^t - pi_i^{t-1}|` over all slots and every transition
/// ending after the burn-in. Zero-visibility slots and drops caused by
/// replacement are included.
pub fn mean_slope(trace: &RunTrace, burn_in: usize) -> Result<f64, MetricsError> {
    check_rows(trace, burn_in)?;
    let first = (burn_in + 1).max(2);
    let mut total = 0.0;
    let mut count = 0usize;
    for t in first..=trace.len() {
        let (prev, cur) = (trace.row(t - 1), trace.row(t));
        total += prev.iter().zip(cur).map(|(a, b)| (b - a).abs()).sum::<f64>();
        count += cur.len();
    }
    Ok(total / count as f64)
}

/// Replacements after burn-in per slot per counted iteration.
pub fn turnover_ratio(trace: &RunTrace, burn_in: usize) -> Result<f64, MetricsError> {
    check_rows(trace, burn_in)?;
    let entries = trace.events.iter().filter(|e| e.t > burn_in).count();
    Ok(entries as f64 / (trace.n() * (trace.len() - burn_in)) as f64)
}

fn qualifying(records: &[LifecycleRecord], burn_in: usize) -> impl Iterator<Item = &LifecycleRecord> {
    records.iter().filter(move |r| r.is_completed() && r.birth_t > burn_in)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Mean length of completed lifetimes born after the burn-in.
pub fn mean_lifecycle(records: &[LifecycleRecord], burn_in: usize) -> Option<f64> {
    mean(
        qualifying(records, burn_in)
            .filter_map(|r| r.length())
            .map(|l| l as f64),
    )
}

pub fn mean_peak_height(records: &[LifecycleRecord], burn_in: usize) -> Option<f64> {
    mean(qualifying(records, burn_in).map(|r| r.peak_height))
}

/// Population Gini index of non-negative values; zero when they sum to zero.
///
/// Uses the sorted-rank form `sum_i (2i - n - 1) x_(i) / (n sum x)` with
/// ascending `x_(i)`, which equals `2 sum_i i x_(i) / (n sum x) - (n + 1) / n`
/// without the cancellation.
pub fn gini(values: &[f64]) -> Result<f64, MetricsError> {
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(MetricsError::InvalidValue { index, value });
    }
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i + 1) as f64 - n - 1.0) * x)
        .sum();
    Ok((weighted / (n * total)).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub mean_slope: f64,
    pub mean_lifecycle: Option<f64>,
    pub turnover_ratio: f64,
    pub mean_peak_height: Option<f64>,
    pub mean_gini: f64,
    /// Completed lifetimes born after burn-in, i.e. those behind the
    /// lifecycle and peak means.
    pub completed_lifecycles: usize,
}

/// Flat JSON record: the summary fields next to the generating params.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRecord<'a> {
    #[serde(flatten)]
    pub params: &'a ModelParams,
    #[serde(flatten)]
    pub summary: &'a MetricsSummary,
}

impl MetricsSummary {
    pub fn to_json(&self, params: &ModelParams) -> String {
        serde_json::to_string_pretty(&SummaryRecord { params, summary: self })
            .expect("summary serialization cannot fail")
    }
}

/// All statistics of one run, using the trace's own burn-in.
pub fn summarize(trace: &RunTrace) -> Result<MetricsSummary, MetricsError> {
    let burn_in = trace.params.burn_in;
    let mean_slope = mean_slope(trace, burn_in)?;
    let turnover_ratio = turnover_ratio(trace, burn_in)?;
    let records = segment_lifecycles(trace);

    let mut gini_total = 0.0;
    let mut rows = 0usize;
    for t in burn_in + 1..=trace.len() {
        gini_total += gini(trace.row(t))?;
        rows += 1;
    }

    Ok(MetricsSummary {
        mean_slope,
        mean_lifecycle: mean_lifecycle(&records, burn_in),
        turnover_ratio,
        mean_peak_height: mean_peak_height(&records, burn_in),
        mean_gini: gini_total / rows as f64,
        completed_lifecycles: qualifying(&records, burn_in).count(),
    })
}
