//! Hourly view-count analysis: each channel is an arena, each video an
//! item competing for the channel's attention.
//!
//! Per video we compute the hours needed to reach 95% of first-week views,
//! the share of the channel's wall-clock-hour views captured at the video's
//! peak hour and the Gini concentration of its first-week hourly views.
//! Per channel we average those and build the mean normalized profile of
//! the first two days.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Read, Write};

use chrono::{DateTime, Duration, Timelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::gini;

pub const FIRST_WEEK_HOURS: usize = 168;
pub const PROFILE_HOURS: usize = 48;
/// Upper bound on `t_hour` accepted at ingestion (about eleven years).
pub const MAX_T_HOUR: u64 = 100_000;

pub const INPUT_COLUMNS: [&str; 5] = ["channel_id", "video_id", "published_at", "t_hour", "views"];

#[derive(Debug, Error)]
pub enum EmpiricalError {
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: u64,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: duplicate row for video `{video_id}` at t_hour {t_hour}")]
    Duplicate { line: u64, video_id: String, t_hour: u64 },
    #[error("missing column `{0}` in header")]
    MissingColumn(&'static str),
    #[error("channel `{0}` has no video with positive first-week views")]
    EmptyChannel(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoSeries {
    pub channel_id: String,
    pub video_id: String,
    pub published_at: DateTime<Utc>,
    /// Views per hour since publication; index 0 is the publication hour.
    pub hourly_views: Vec<u64>,
}

impl VideoSeries {
    /// Views in hour `h` after publication, zero past the recorded range.
    pub fn views(&self, h: usize) -> u64 {
        self.hourly_views.get(h).copied().unwrap_or(0)
    }

    pub fn first_week(&self) -> &[u64] {
        &self.hourly_views[..self.hourly_views.len().min(FIRST_WEEK_HOURS)]
    }

    pub fn first_week_views(&self) -> u64 {
        self.first_week().iter().sum()
    }

    pub fn total_views(&self) -> u64 {
        self.hourly_views.iter().sum()
    }

    fn published_hour(&self) -> i64 {
        self.published_at.timestamp().div_euclid(3600)
    }

    /// Views in an absolute hour counted since the Unix epoch.
    pub fn views_at_wall_hour(&self, wall_hour: i64) -> u64 {
        let h = wall_hour - self.published_hour();
        if h < 0 {
            0
        } else {
            self.views(h as usize)
        }
    }

    /// Last hour covered by the recorded series.
    pub fn last_observed(&self) -> DateTime<Utc> {
        self.published_at + Duration::hours(self.hourly_views.len() as i64 - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDataset {
    pub channel_id: String,
    /// Sorted by publication time, then video id.
    pub videos: Vec<VideoSeries>,
    pub window_start: DateTime<Utc>,
    pub window_end: DateTime<Utc>,
}

impl ChannelDataset {
    /// Total channel views per wall-clock hour.
    pub fn hourly_totals(&self) -> HashMap<i64, u64> {
        let mut totals = HashMap::new();
        for v in &self.videos {
            let start = v.published_hour();
            for (h, &views) in v.hourly_views.iter().enumerate() {
                *totals.entry(start + h as i64).or_insert(0) += views;
            }
        }
        totals
    }

    /// Whether the collection window covers the video's whole first week.
    pub fn observes_first_week(&self, video: &VideoSeries) -> bool {
        video.published_at + Duration::hours(FIRST_WEEK_HOURS as i64 - 1) <= self.window_end
    }
}

fn field_err(line: u64, field: &'static str, message: impl Into<String>) -> EmpiricalError {
    EmpiricalError::Field {
        line,
        field,
        message: message.into(),
    }
}

pub fn parse_hour_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    let ts = DateTime::parse_from_rfc3339(s)
        .map_err(|e| format!("invalid ISO 8601 timestamp {s:?}: {e}"))?
        .with_timezone(&Utc);
    if ts.minute() != 0 || ts.second() != 0 || ts.nanosecond() != 0 {
        return Err(format!("timestamp {s:?} is not truncated to the hour"));
    }
    Ok(ts)
}

struct Accum {
    published_at: DateTime<Utc>,
    hours: BTreeMap<u64, u64>,
}

/// Reads `channel_id,video_id,published_at,t_hour,views` rows, groups them
/// by channel and video and fills missing hours with zero views.
///
/// Channels come back sorted by id and share one observation window: from
/// the earliest publication to the latest recorded hour in the input.
pub fn load_dataset<R: Read>(input: R) -> Result<Vec<ChannelDataset>, EmpiricalError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(INPUT_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(EmpiricalError::MissingColumn(name))?;
    }
    let [ci, vi, pi, ti, wi] = idx;

    let mut videos: BTreeMap<(String, String), Accum> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |i: usize, name: &'static str| {
            record
                .get(i)
                .map(str::trim)
                .ok_or_else(|| field_err(line, name, "missing value"))
        };
        let channel = get(ci, "channel_id")?;
        let video = get(vi, "video_id")?;
        if channel.is_empty() {
            return Err(field_err(line, "channel_id", "empty"));
        }
        if video.is_empty() {
            return Err(field_err(line, "video_id", "empty"));
        }
        let published_at =
            parse_hour_timestamp(get(pi, "published_at")?).map_err(|m| field_err(line, "published_at", m))?;
        let t_raw = get(ti, "t_hour")?;
        let t_hour: u64 = t_raw.parse().map_err(|_| {
            field_err(
                line,
                "t_hour",
                format!("expected a non-negative integer, got {t_raw:?}"),
            )
        })?;
        if t_hour > MAX_T_HOUR {
            return Err(field_err(line, "t_hour", format!("{t_hour} exceeds {MAX_T_HOUR}")));
        }
        let v_raw = get(wi, "views")?;
        let views: i64 = v_raw
            .parse()
            .map_err(|_| field_err(line, "views", format!("expected an integer, got {v_raw:?}")))?;
        if views < 0 {
            return Err(field_err(line, "views", format!("negative view count {views}")));
        }

        let acc = videos
            .entry((channel.to_string(), video.to_string()))
            .or_insert_with(|| Accum {
                published_at,
                hours: BTreeMap::new(),
            });
        if acc.published_at != published_at {
            return Err(field_err(
                line,
                "published_at",
                format!(
                    "video `{video}` was already published at {}",
                    acc.published_at.to_rfc3339()
                ),
            ));
        }
        if acc.hours.insert(t_hour, views as u64).is_some() {
            return Err(EmpiricalError::Duplicate {
                line,
                video_id: video.to_string(),
                t_hour,
            });
        }
    }

    let mut channels: BTreeMap<String, Vec<VideoSeries>> = BTreeMap::new();
    for ((channel_id, video_id), acc) in videos {
        let len = acc.hours.keys().next_back().map_or(0, |&h| h as usize + 1);
        let mut hourly_views = vec![0u64; len];
        for (h, v) in acc.hours {
            hourly_views[h as usize] = v;
        }
        channels.entry(channel_id.clone()).or_default().push(VideoSeries {
            channel_id,
            video_id,
            published_at: acc.published_at,
            hourly_views,
        });
    }

    let all = channels.values().flatten();
    let Some(window_start) = all.clone().map(|v| v.published_at).min() else {
        return Ok(Vec::new());
    };
    let window_end = all.map(VideoSeries::last_observed).max().unwrap_or(window_start);

    Ok(channels
        .into_iter()
        .map(|(channel_id, mut videos)| {
            videos.sort_by(|a, b| {
                a.published_at
                    .cmp(&b.published_at)
                    .then_with(|| a.video_id.cmp(&b.video_id))
            });
            ChannelDataset {
                channel_id,
                videos,
                window_start,
                window_end,
            }
        })
        .collect())
}

/// Writes the gap-filled canonical form: every recorded hour of every video,
/// ordered by channel, publication time, video and hour.
pub fn write_dataset_csv<W: Write>(channels: &[ChannelDataset], out: W) -> Result<(), EmpiricalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(INPUT_COLUMNS)?;
    for ch in channels {
        for v in &ch.videos {
            let published = v.published_at.format("%Y-%m-%dT%H:%M:%SZ").to_string();
            for (h, views) in v.hourly_views.iter().enumerate() {
                w.write_record([
                    v.channel_id.as_str(),
                    v.video_id.as_str(),
                    &published,
                    &h.to_string(),
                    &views.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Hours needed to accumulate 95% of first-week views: `h + 1` for the
/// first hour `h` at which the running total reaches the threshold.
/// Undefined when the first week has no views.
pub fn video_lifecycle_95(video: &VideoSeries) -> Option<usize> {
    let week = video.first_week();
    let total: u128 = week.iter().map(|&v| v as u128).sum();
    if total == 0 {
        return None;
    }
    let mut cumulative: u128 = 0;
    for (h, &v) in week.iter().enumerate() {
        cumulative += v as u128;
        // cumulative >= 0.95 * total, in integers
        if 20 * cumulative >= 19 * total {
            return Some(h + 1);
        }
    }
    unreachable!("the full first week always reaches the threshold")
}

/// Earliest first-week hour with the most views.
pub fn peak_hour(video: &VideoSeries) -> Option<usize> {
    if video.first_week_views() == 0 {
        return None;
    }
    let week = video.first_week();
    let max = *week.iter().max()?;
    week.iter().position(|&v| v == max)
}

/// Peak hour and the video's share of all channel views in that wall-clock hour.
pub fn peak_hour_share(video: &VideoSeries, channel: &ChannelDataset) -> Option<(usize, f64)> {
    let peak = peak_hour(video)?;
    let wall = video.published_hour() + peak as i64;
    let channel_views: u64 = channel.videos.iter().map(|v| v.views_at_wall_hour(wall)).sum();
    Some((peak, video.views(peak) as f64 / channel_views as f64))
}

fn peak_hour_share_with(video: &VideoSeries, totals: &HashMap<i64, u64>) -> Option<(usize, f64)> {
    let peak = peak_hour(video)?;
    let wall = video.published_hour() + peak as i64;
    Some((peak, video.views(peak) as f64 / totals[&wall] as f64))
}

/// Gini index of the 168 first-week hourly counts, zero-padded.
pub fn gini_hourly(video: &VideoSeries) -> f64 {
    let mut week = vec![0.0; FIRST_WEEK_HOURS];
    for (slot, &v) in week.iter_mut().zip(video.first_week()) {
        *slot = v as f64;
    }
    gini(&week).expect("view counts are non-negative")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMetrics {
    pub channel_id: String,
    pub video_id: String,
    /// Absent when the first week has no views or is not fully observed.
    pub lifecycle_hours: Option<usize>,
    pub peak_hour: Option<usize>,
    pub peak_hour_share: Option<f64>,
    pub gini_hourly: f64,
    pub first_week_views: u64,
}

fn metrics_for(video: &VideoSeries, channel: &ChannelDataset, totals: &HashMap<i64, u64>) -> VideoMetrics {
    let peak = peak_hour_share_with(video, totals);
    VideoMetrics {
        channel_id: video.channel_id.clone(),
        video_id: video.video_id.clone(),
        lifecycle_hours: if channel.observes_first_week(video) {
            video_lifecycle_95(video)
        } else {
            None
        },
        peak_hour: peak.map(|p| p.0),
        peak_hour_share: peak.map(|p| p.1),
        gini_hourly: gini_hourly(video),
        first_week_views: video.first_week_views(),
    }
}

pub fn video_metrics(video: &VideoSeries, channel: &ChannelDataset) -> VideoMetrics {
    metrics_for(video, channel, &channel.hourly_totals())
}

/// Metrics of every video in the channel, in channel order.
pub fn channel_video_metrics(channel: &ChannelDataset) -> Vec<VideoMetrics> {
    let totals = channel.hourly_totals();
    channel
        .videos
        .iter()
        .map(|v| metrics_for(v, channel, &totals))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalProfile {
    pub channel_id: String,
    /// Mean share of first-week views collected in each of the first 48 hours.
    pub mean_share: Vec<f64>,
    pub videos: usize,
}

pub fn average_temporal_profile(channel: &ChannelDataset) -> Result<TemporalProfile, EmpiricalError> {
    let mut sums = vec![0.0; PROFILE_HOURS];
    let mut count = 0usize;
    for v in &channel.videos {
        let total = v.first_week_views();
        if total == 0 {
            continue;
        }
        for (h, s) in sums.iter_mut().enumerate() {
            *s += v.views(h) as f64 / total as f64;
        }
        count += 1;
    }
    if count == 0 {
        return Err(EmpiricalError::EmptyChannel(channel.channel_id.clone()));
    }
    Ok(TemporalProfile {
        channel_id: channel.channel_id.clone(),
        mean_share: sums.into_iter().map(|s| s / count as f64).collect(),
        videos: count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub channel_id: String,
    pub videos: usize,
    pub total_views: u64,
    pub mean_lifecycle_hours: Option<f64>,
    pub mean_peak_hour_share: Option<f64>,
    /// Averaged over every video, zero-view ones included.
    pub mean_gini_hourly: f64,
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn summarize_video_metrics(channel: &ChannelDataset, metrics: &[VideoMetrics]) -> ChannelSummary {
    ChannelSummary {
        channel_id: channel.channel_id.clone(),
        videos: channel.videos.len(),
        total_views: channel.videos.iter().map(VideoSeries::total_views).sum(),
        mean_lifecycle_hours: mean_of(metrics.iter().filter_map(|m| m.lifecycle_hours).map(|h| h as f64)),
        mean_peak_hour_share: mean_of(metrics.iter().filter_map(|m| m.peak_hour_share)),
        mean_gini_hourly: mean_of(metrics.iter().map(|m| m.gini_hourly)).unwrap_or(0.0),
    }
}

pub fn channel_summary(channel: &ChannelDataset) -> ChannelSummary {
    summarize_video_metrics(channel, &channel_video_metrics(channel))
}

pub const VIDEO_HEADER: [&str; 7] = [
    "channel_id",
    "video_id",
    "lifecycle_hours",
    "peak_hour",
    "peak_hour_share",
    "gini_hourly",
    "first_week_views",
];
pub const CHANNEL_HEADER: [&str; 6] = [
    "channel_id",
    "videos",
    "total_views",
    "mean_lifecycle_hours",
    "mean_peak_hour_share",
    "mean_gini_hourly",
];
pub const PROFILE_HEADER: [&str; 4] = ["channel_id", "hour", "mean_share", "videos"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_video_metrics_csv<W: Write>(rows: &[VideoMetrics], out: W) -> Result<(), EmpiricalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VIDEO_HEADER)?;
    for m in rows {
        w.write_record([
            m.channel_id.clone(),
            m.video_id.clone(),
            opt(m.lifecycle_hours),
            opt(m.peak_hour),
            opt(m.peak_hour_share),
            m.gini_hourly.to_string(),
            m.first_week_views.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_channel_summary_csv<W: Write>(rows: &[ChannelSummary], out: W) -> Result<(), EmpiricalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHANNEL_HEADER)?;
    for s in rows {
        w.write_record([
            s.channel_id.clone(),
            s.videos.to_string(),
            s.total_views.to_string(),
            opt(s.mean_lifecycle_hours),
            opt(s.mean_peak_hour_share),
            s.mean_gini_hourly.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profiles_csv<W: Write>(profiles: &[TemporalProfile], out: W) -> Result<(), EmpiricalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_HEADER)?;
    for p in profiles {
        for (h, share) in p.mean_share.iter().enumerate() {
            w.write_record([
                p.channel_id.clone(),
                h.to_string(),
                share.to_string(),
                p.videos.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
